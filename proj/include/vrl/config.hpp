// Scenario configuration: a flat INI-style key-value format with sections,
// parsed into ScenarioConfig and validated against the scan-domain
// constraints (c >= 2 P1, r >= 2 r_star, |u| <= u0).
#ifndef VRL_CONFIG_HPP
#define VRL_CONFIG_HPP

#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "vrl/ensemble.hpp"
#include "vrl/solver.hpp"

namespace vrl {

// Parsed INI text: ordered sections of key -> whitespace-separated values.
// Sections may repeat ([species] in particular).
struct IniSection {
    std::string name;
    std::map<std::string, std::string> values;
};

inline std::vector<IniSection> parse_ini(std::istream& in) {
    std::vector<IniSection> sections;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": unterminated section header");
            sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        if (sections.empty())
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        sections.back().values[key] = val;
    }
    return sections;
}

struct SpeciesConfig {
    Species species = Species::neutral;
    double weight = 1.0;
    Vec3 center{};
    Vec3 scale_radii{1, 1, 1};
    double momentum_radius = 0.5;
    Vec3 mean_momentum{};
    Symmetrize symmetrize = Symmetrize::none;
};

struct ScanConfig {
    bool enabled = true;
    std::vector<double> c_list;
    std::vector<double> r_over_rstar;
    std::vector<double> u_list;
    bool measure_exact = true;
    double exact_max_r_over_rstar = 1e30;
};

struct IdentityConfig {
    bool enabled = true;
    std::vector<double> times;
    bool spherical = false;
    int radiation_samples = 4;
    double radiation_c = 16.0;
    double radiation_r_over_rstar = 32.0;
};

struct ScenarioConfig {
    std::string name = "scenario";
    FieldMode mode = FieldMode::gravity;
    std::uint64_t seed = 1;
    std::vector<SpeciesConfig> species;

    // numerics
    std::size_t particles = 20000; // per species
    double dt = 0.004;
    double dt_record = 0.02;
    double softening = 0.0; // <= 0: mean interparticle spacing / 2
    int grid_n = 64;
    double grid_extent = 2.0;
    double bandwidth = 0.0; // <= 0: 2 h
    int sphere_theta = 16, sphere_phi = 32;
    double window_min = -0.5, window_max = 0.5;
    double drift_tolerance = 1e-5;

    // support bookkeeping (the scan-domain constants)
    double p1 = 1.0;
    double r2 = 0.0;     // support proxy for |t| <= 1
    double u0 = 1.0;
    double r_star = 0.0; // <= 0: max(2 (R0 + P1), R2)

    ScanConfig scan;
    IdentityConfig identities;
    double tolerance_scale = 1.0;

    double support_radius() const {
        double r0 = 0.0;
        for (const auto& s : species)
            r0 = std::max(r0, norm(s.center) + std::max({s.scale_radii.x, s.scale_radii.y,
                                                         s.scale_radii.z}));
        return r0;
    }
    double effective_r_star() const {
        if (r_star > 0.0) return r_star;
        return std::max(2.0 * (support_radius() + p1), r2);
    }
    double effective_softening() const {
        if (softening > 0.0) return softening;
        // mean interparticle spacing / 2 over the initial support
        const double r0 = support_radius();
        const double n_total = static_cast<double>(particles * std::max<std::size_t>(species.size(), 1));
        const double vol = 4.0 / 3.0 * std::numbers::pi * cube(r0);
        return 0.5 * std::cbrt(vol / n_total);
    }
    double effective_bandwidth() const {
        const double h = 2.0 * grid_extent / (grid_n - 1);
        return bandwidth > 0.0 ? bandwidth : 2.0 * h;
    }

    // Scan-domain validation; error messages cite the violated inequality
    // with both operand values.
    void validate() const {
        if (species.empty()) throw std::runtime_error("config: no [species] sections");
        for (double c : scan.c_list)
            if (c < 2.0 * p1)
                throw std::runtime_error("config: scan value c = " + format_double(c) +
                                         " violates c >= 2 P1 = " + format_double(2.0 * p1));
        const double rs = effective_r_star();
        for (double rr : scan.r_over_rstar)
            if (rr * rs < 2.0 * rs)
                throw std::runtime_error("config: scan radius r = " + format_double(rr * rs) +
                                         " violates r >= 2 r_star = " + format_double(2.0 * rs));
        for (double u : scan.u_list)
            if (std::abs(u) > u0)
                throw std::runtime_error("config: scan time |u| = " + format_double(std::abs(u)) +
                                         " violates |u| <= u0 = " + format_double(u0));
        if (window_min > 0.0 || window_max < 0.0)
            throw std::runtime_error("config: evolution window must contain t = 0");
        if (mode == FieldMode::plasma)
            for (const auto& s : species)
                if (s.species == Species::neutral)
                    throw std::runtime_error("config: plasma species must be signed");
    }
};

namespace cfgdetail {

inline std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    double v;
    while (is >> v) out.push_back(v);
    return out;
}

inline Vec3 parse_vec3(const std::string& s, const char* what) {
    const auto v = parse_doubles(s);
    if (v.size() != 3) throw std::runtime_error(std::string("config: ") + what + " needs 3 numbers");
    return {v[0], v[1], v[2]};
}

inline bool parse_bool(const std::string& s) {
    return s == "true" || s == "1" || s == "yes" || s == "on";
}

} // namespace cfgdetail

inline ScenarioConfig parse_scenario_config(std::istream& in) {
    using namespace cfgdetail;
    ScenarioConfig cfg;
    cfg.scan.c_list = {};
    for (const auto& sec : parse_ini(in)) {
        auto get = [&](const char* key) -> const std::string* {
            const auto it = sec.values.find(key);
            return it == sec.values.end() ? nullptr : &it->second;
        };
        if (sec.name == "scenario") {
            if (auto* v = get("name")) cfg.name = *v;
            if (auto* v = get("mode")) {
                if (*v == "plasma") cfg.mode = FieldMode::plasma;
                else if (*v == "gravity") cfg.mode = FieldMode::gravity;
                else throw std::runtime_error("config: mode must be plasma or gravity");
            }
            if (auto* v = get("seed")) cfg.seed = std::stoull(*v);
            if (auto* v = get("tolerance_scale")) cfg.tolerance_scale = std::stod(*v);
        } else if (sec.name == "species") {
            SpeciesConfig sp;
            if (auto* v = get("sign")) {
                const int s = std::stoi(*v);
                sp.species = s > 0 ? Species::positive : s < 0 ? Species::negative : Species::neutral;
            }
            if (auto* v = get("weight")) sp.weight = std::stod(*v);
            if (auto* v = get("center")) sp.center = parse_vec3(*v, "center");
            if (auto* v = get("scale_radii")) sp.scale_radii = parse_vec3(*v, "scale_radii");
            if (auto* v = get("momentum_radius")) sp.momentum_radius = std::stod(*v);
            if (auto* v = get("mean_momentum")) sp.mean_momentum = parse_vec3(*v, "mean_momentum");
            if (auto* v = get("symmetrize")) {
                if (*v == "none") sp.symmetrize = Symmetrize::none;
                else if (*v == "antithetic") sp.symmetrize = Symmetrize::antithetic;
                else if (*v == "octahedral") sp.symmetrize = Symmetrize::octahedral;
                else throw std::runtime_error("config: unknown symmetrize mode " + *v);
            }
            cfg.species.push_back(sp);
        } else if (sec.name == "numerics") {
            if (auto* v = get("particles")) cfg.particles = std::stoull(*v);
            if (auto* v = get("dt")) cfg.dt = std::stod(*v);
            if (auto* v = get("dt_record")) cfg.dt_record = std::stod(*v);
            if (auto* v = get("softening")) cfg.softening = (*v == "auto") ? 0.0 : std::stod(*v);
            if (auto* v = get("grid_n")) cfg.grid_n = std::stoi(*v);
            if (auto* v = get("grid_extent")) cfg.grid_extent = std::stod(*v);
            if (auto* v = get("bandwidth")) cfg.bandwidth = (*v == "auto") ? 0.0 : std::stod(*v);
            if (auto* v = get("sphere_theta")) cfg.sphere_theta = std::stoi(*v);
            if (auto* v = get("sphere_phi")) cfg.sphere_phi = std::stoi(*v);
            if (auto* v = get("window_min")) cfg.window_min = std::stod(*v);
            if (auto* v = get("window_max")) cfg.window_max = std::stod(*v);
            if (auto* v = get("drift_tolerance")) cfg.drift_tolerance = std::stod(*v);
        } else if (sec.name == "bounds") {
            if (auto* v = get("p1")) cfg.p1 = std::stod(*v);
            if (auto* v = get("r2")) cfg.r2 = std::stod(*v);
            if (auto* v = get("u0")) cfg.u0 = std::stod(*v);
            if (auto* v = get("r_star")) cfg.r_star = (*v == "auto") ? 0.0 : std::stod(*v);
        } else if (sec.name == "scan") {
            if (auto* v = get("enabled")) cfg.scan.enabled = parse_bool(*v);
            if (auto* v = get("c")) cfg.scan.c_list = parse_doubles(*v);
            if (auto* v = get("r_over_rstar")) cfg.scan.r_over_rstar = parse_doubles(*v);
            if (auto* v = get("u")) cfg.scan.u_list = parse_doubles(*v);
            if (auto* v = get("measure_exact")) cfg.scan.measure_exact = parse_bool(*v);
            if (auto* v = get("exact_max_r_over_rstar"))
                cfg.scan.exact_max_r_over_rstar = std::stod(*v);
        } else if (sec.name == "identities") {
            if (auto* v = get("enabled")) cfg.identities.enabled = parse_bool(*v);
            if (auto* v = get("times")) cfg.identities.times = parse_doubles(*v);
            if (auto* v = get("spherical")) cfg.identities.spherical = parse_bool(*v);
            if (auto* v = get("radiation_samples")) cfg.identities.radiation_samples = std::stoi(*v);
            if (auto* v = get("radiation_c")) cfg.identities.radiation_c = std::stod(*v);
            if (auto* v = get("radiation_r_over_rstar"))
                cfg.identities.radiation_r_over_rstar = std::stod(*v);
        } else {
            throw std::runtime_error("config: unknown section [" + sec.name + "]");
        }
    }
    return cfg;
}

inline ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config " + path);
    return parse_scenario_config(f);
}

// Samples and merges all configured species (per-species seeds derived from
// the scenario seed).
inline ParticleEnsemble build_initial_ensemble(const ScenarioConfig& cfg) {
    std::vector<ParticleEnsemble> parts;
    for (std::size_t i = 0; i < cfg.species.size(); ++i) {
        const auto& sp = cfg.species[i];
        ProfileSpec ps;
        ps.species = sp.species;
        ps.center = sp.center;
        ps.scale_radii = sp.scale_radii;
        ps.momentum_radius = sp.momentum_radius;
        ps.total_weight = sp.weight;
        ps.mean_momentum = sp.mean_momentum;
        const auto profile = build_profile(ps);
        std::size_t n = cfg.particles;
        if (sp.symmetrize == Symmetrize::antithetic) n -= n % 2;
        if (sp.symmetrize == Symmetrize::octahedral) n -= n % 48;
        parts.push_back(sample_ensemble(profile, n, cfg.seed + 1000003 * (i + 1), sp.symmetrize));
    }
    return merge(parts);
}

inline EvolveParams evolve_params(const ScenarioConfig& cfg) {
    EvolveParams par;
    par.mode = cfg.mode;
    par.dt = cfg.dt;
    par.dt_record = cfg.dt_record;
    par.softening = cfg.effective_softening();
    par.grid = UniformGrid::cube(cfg.grid_extent, cfg.grid_n);
    par.bandwidth = cfg.effective_bandwidth();
    par.t_min = cfg.window_min;
    par.t_max = cfg.window_max;
    par.drift_tolerance = cfg.drift_tolerance;
    return par;
}

} // namespace vrl

#endif // VRL_CONFIG_HPP
