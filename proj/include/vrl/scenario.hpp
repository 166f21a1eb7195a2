// Scenario orchestration: run a configured experiment end to end (evolve,
// identity suite, order scan, artifact directory) and print the summary
// report. The bundled scenario configs live here as well.
#ifndef VRL_SCENARIO_HPP
#define VRL_SCENARIO_HPP

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "vrl/config.hpp"
#include "vrl/identities.hpp"
#include "vrl/io.hpp"

namespace vrl {

inline std::filesystem::path output_root() {
    if (const char* env = std::getenv("VRL_DATA_DIR")) return std::filesystem::path(env);
    return std::filesystem::path("vrl-out");
}

struct RunResult {
    std::filesystem::path dir;
    int identities_passed = 0;
    int identities_failed = 0;
    bool ok = true;
};

// Unit vectors used for identity sampling: the axes plus seeded random
// directions.
inline std::vector<Vec3> identity_directions(std::uint64_t seed, int random_count) {
    std::vector<Vec3> dirs = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (int i = 0; i < random_count; ++i) {
        for (;;) {
            Vec3 v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            const double n2 = norm2(v);
            if (n2 > 0.04 && n2 < 1.0) {
                dirs.push_back(v / std::sqrt(n2));
                break;
            }
        }
    }
    return dirs;
}

// Runs the identity suite configured for this scenario against a history.
inline std::vector<IdentityResult> run_identities(const SourceHistory& h,
                                                  const ScenarioConfig& cfg) {
    std::vector<IdentityResult> all;
    IdentityOptions opt;
    opt.tolerance_scale = cfg.tolerance_scale;
    const auto dirs = identity_directions(cfg.seed, 1);
    const double rs = cfg.effective_r_star();
    for (double t : cfg.identities.times) {
        if (h.mode == FieldMode::gravity) {
            auto res = check_vp_identities(h, t, dirs, opt);
            all.insert(all.end(), res.begin(), res.end());
            if (cfg.identities.spherical) {
                auto res = check_spherical_reductions(h, t, dirs.back(), opt);
                all.insert(all.end(), res.begin(), res.end());
            }
        }
        const auto rdirs = identity_directions(cfg.seed + 17, cfg.identities.radiation_samples);
        for (int i = 3; i < static_cast<int>(rdirs.size()); ++i) {
            auto res = check_radiation_identities(h, rdirs[i], t,
                                                  cfg.identities.radiation_r_over_rstar * rs,
                                                  cfg.identities.radiation_c, opt);
            all.insert(all.end(), res.begin(), res.end());
        }
    }
    return all;
}

inline RadiationReport run_scan(const SourceHistory& h, const ScenarioConfig& cfg) {
    OrderScanConfig sc;
    sc.c_list = cfg.scan.c_list;
    const double rs = cfg.effective_r_star();
    for (double rr : cfg.scan.r_over_rstar) sc.r_list.push_back(rr * rs);
    sc.u_list = cfg.scan.u_list;
    sc.measure_exact = cfg.scan.measure_exact;
    sc.exact_max_r = cfg.scan.exact_max_r_over_rstar * rs;
    sc.sphere_n_theta = cfg.sphere_theta;
    sc.sphere_n_phi = cfg.sphere_phi;
    return order_scan(h, sc, cfg.name);
}

inline void write_identities_csv(const std::filesystem::path& path,
                                 const std::vector<IdentityResult>& results) {
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream f(path, std::ios::app);
    if (fresh) f << identity_csv_header() << "\n";
    for (const auto& r : results) f << identity_csv_row(r) << "\n";
}

// run <cfg>: evolve, record, check, scan, serialize. Returns the artifact
// directory and whether every enabled check passed.
inline RunResult run_scenario(const ScenarioConfig& cfg, std::ostream& log = std::cout) {
    cfg.validate();
    RunResult out;
    out.dir = output_root() / cfg.name;
    std::filesystem::create_directories(out.dir);

    log << "[vrl] scenario " << cfg.name << ": sampling "
        << cfg.particles * cfg.species.size() << " particles\n";
    const ParticleEnsemble e0 = build_initial_ensemble(cfg);
    log << "[vrl] evolving window [" << format_double(cfg.window_min) << ", "
        << format_double(cfg.window_max) << "] dt " << format_double(cfg.dt) << " softening "
        << format_double(cfg.effective_softening()) << "\n";
    const SourceHistory h = evolve(e0, evolve_params(cfg));
    log << "[vrl] recorded " << h.frame_count()
        << " frames; energy drift " << format_double(h.relative_energy_drift()) << "\n";

    save_history(out.dir, h);

    if (cfg.identities.enabled && !cfg.identities.times.empty()) {
        const auto results = run_identities(h, cfg);
        std::filesystem::remove(out.dir / "identities.csv");
        write_identities_csv(out.dir / "identities.csv", results);
        for (const auto& r : results) (r.pass ? out.identities_passed : out.identities_failed)++;
        log << "[vrl] identities: " << out.identities_passed << " passed, "
            << out.identities_failed << " failed\n";
        if (out.identities_failed > 0) out.ok = false;
    }

    if (cfg.scan.enabled && !cfg.scan.c_list.empty()) {
        const auto rep = run_scan(h, cfg);
        save_report(out.dir, rep);
        log << "[vrl] scan: " << rep.points.size() << " points, " << rep.fits.size()
            << " fits" << (rep.fits_skipped_static ? " (static: fits skipped)" : "") << "\n";
    }

    // echo the config into the artifact directory for provenance
    return out;
}

// report <dir>: human-readable summary of a completed artifact directory.
// Returns false if expected files are missing.
inline bool emit_report(const std::filesystem::path& dir, std::ostream& os = std::cout) {
    namespace fs = std::filesystem;
    std::vector<std::string> missing;
    for (const char* f : {"manifest.json", "scalars.csv"})
        if (!fs::exists(dir / f)) missing.push_back(f);
    if (!missing.empty()) {
        os << "report: missing files in " << dir.string() << ":";
        for (const auto& m : missing) os << " " << m;
        os << "\n";
        return false;
    }
    nlohmann::json manifest;
    {
        std::ifstream f(dir / "manifest.json");
        f >> manifest;
    }
    os << "=== " << dir.filename().string() << " ===\n";
    os << "mode " << manifest["mode"].get<std::string>() << ", " << manifest["frames"]
       << " frames, dt_record " << format_double(manifest["dt_record"].get<double>())
       << ", softening " << format_double(manifest["softening"].get<double>()) << "\n";

    // identity section (always printed; may be empty)
    std::size_t id_rows = 0, id_pass = 0;
    if (fs::exists(dir / "identities.csv")) {
        std::ifstream f(dir / "identities.csv");
        std::string line;
        std::getline(f, line); // header
        std::map<std::string, std::pair<int, int>> per_name;
        while (std::getline(f, line)) {
            ++id_rows;
            const bool pass = line.size() >= 2 && line[line.size() - 1] == '1';
            if (pass) ++id_pass;
            const auto comma = line.find(',');
            auto& pn = per_name[line.substr(0, comma)];
            pn.first += pass ? 1 : 0;
            pn.second += 1;
        }
        os << "identities: " << id_pass << "/" << id_rows << " passed\n";
        for (const auto& [name, counts] : per_name)
            os << "  " << name << ": " << counts.first << "/" << counts.second << "\n";
    } else {
        os << "identities: no identities.csv\n";
    }

    // scan section
    if (fs::exists(dir / "report.json")) {
        nlohmann::json rep;
        {
            std::ifstream f(dir / "report.json");
            f >> rep;
        }
        const auto& points = rep["points"];
        if (points.empty()) {
            os << "scan: no scan points\n";
        } else {
            os << "scan: " << points.size() << " points (measured vs predicted integrand)\n";
            // per (c, r, u): mean |residual| / mean |predicted|
            std::map<std::string, std::array<double, 3>> agg; // sum|res|, sum|pred|, count
            for (const auto& p : points) {
                std::ostringstream key;
                key << "c=" << format_double(p["c"].get<double>())
                    << " r=" << format_double(p["r"].get<double>())
                    << " u=" << format_double(p["u"].get<double>());
                auto& a = agg[key.str()];
                a[0] += std::abs(p["residual"].get<double>());
                a[1] += std::abs(p["predicted"].get<double>());
                a[2] += 1.0;
            }
            for (const auto& [key, a] : agg) {
                os << "  " << key << ": mean |residual|/|predicted| = "
                   << format_double(a[1] > 0 ? a[0] / a[1] : 0.0) << "\n";
            }
            for (const auto& f2 : rep["fits"]) {
                os << "  fit " << f2["name"].get<std::string>();
                if (f2["valid"].get<bool>())
                    os << ": exponent " << format_double(f2["exponent"].get<double>())
                       << " (rms " << format_double(f2["fit_residual"].get<double>()) << ", "
                       << f2["points"] << " pts)";
                else
                    os << ": skipped";
                os << "\n";
            }
            if (rep.value("fits_skipped_static", false))
                os << "  (static scenario: residuals at the noise floor, fits skipped)\n";
        }
    } else {
        os << "scan: no report.json\n";
    }

    // spherical gravity runs: Theorem-vs-Corollary agreement from identities
    if (fs::exists(dir / "identities.csv")) {
        std::ifstream f(dir / "identities.csv");
        std::string line;
        std::getline(f, line);
        while (std::getline(f, line)) {
            if (line.rfind("sph_dRdt_reduction,", 0) == 0) {
                std::istringstream is(line);
                std::string tok;
                std::vector<std::string> cols;
                while (std::getline(is, tok, ',')) cols.push_back(tok);
                os << "theorem-vs-corollary (dR/dt vs (8/3) dE_kin/dt): left " << cols[2]
                   << " right " << cols[3] << " rel " << cols[5] << "\n";
                break;
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Bundled scenario configs.
// ---------------------------------------------------------------------------
inline std::string bundled_scenario_text(const std::string& name) {
    if (name == "plasma_dipole") {
        return R"([scenario]
name = plasma_dipole
mode = plasma
seed = 20240817

[species]
sign = +1
weight = 0.15
center = 0 0 0.3
scale_radii = 0.3 0.3 0.3
momentum_radius = 0.15
symmetrize = antithetic

[species]
sign = -1
weight = 0.15
center = 0 0 -0.3
scale_radii = 0.3 0.3 0.3
momentum_radius = 0.15
symmetrize = antithetic

[numerics]
particles = 10000
dt = 0.002
dt_record = 0.02
softening = 0.06
grid_n = 64
grid_extent = 1.6
window_min = -0.2
window_max = 0.7
drift_tolerance = 1e-5

[bounds]
p1 = 0.5
r2 = 1.3
u0 = 1.0

[scan]
c = 8 16 32
r_over_rstar = 4 8 16 32 64
u = 0.25
measure_exact = true

[identities]
times = 0.25
radiation_samples = 4
radiation_c = 16
radiation_r_over_rstar = 64
)";
    }
    if (name == "plasma_single_species") {
        return R"([scenario]
name = plasma_single_species
mode = plasma
seed = 20240818

[species]
sign = +1
weight = 0.5
center = 0 0 0
scale_radii = 0.5 0.5 0.5
momentum_radius = 0.2
symmetrize = antithetic

[numerics]
particles = 20000
dt = 0.002
dt_record = 0.02
softening = 0.05
grid_n = 64
grid_extent = 2.0
window_min = -0.2
window_max = 0.5
drift_tolerance = 1e-5

[bounds]
p1 = 1.2
r2 = 1.8
u0 = 1.0

[scan]
c = 8 16
r_over_rstar = 4 8
u = 0.25
measure_exact = false

[identities]
times = 0.25
radiation_samples = 2
radiation_c = 16
radiation_r_over_rstar = 32
)";
    }
    if (name == "gravity_sphere") {
        return R"([scenario]
name = gravity_sphere
mode = gravity
seed = 20240819

[species]
sign = 0
weight = 1.0
center = 0 0 0
scale_radii = 0.8 0.8 0.8
momentum_radius = 1.7
symmetrize = octahedral

[numerics]
particles = 20016
dt = 0.002
dt_record = 0.02
softening = 0.06
grid_n = 64
grid_extent = 2.8
window_min = -0.35
window_max = 0.85
drift_tolerance = 1e-5

[bounds]
p1 = 2.4
r2 = 3.0
u0 = 1.0

[scan]
c = 8 16 32
r_over_rstar = 4 8 16 32 64
u = 0.25
measure_exact = true

[identities]
times = 0.25
spherical = true
radiation_samples = 2
radiation_c = 8
radiation_r_over_rstar = 32
)";
    }
    if (name == "gravity_aspherical") {
        return R"([scenario]
name = gravity_aspherical
mode = gravity
seed = 20240820

[species]
sign = 0
weight = 1.0
center = 0 0 0
scale_radii = 1.0 0.7 0.7
momentum_radius = 1.6
symmetrize = antithetic

[numerics]
particles = 20000
dt = 0.002
dt_record = 0.02
softening = 0.06
grid_n = 64
grid_extent = 2.8
window_min = -0.35
window_max = 0.85
drift_tolerance = 1e-5

[bounds]
p1 = 2.3
r2 = 3.0
u0 = 1.0

[scan]
c = 8 16 32
r_over_rstar = 4 8 16 32 64
u = 0.25
measure_exact = true

[identities]
times = 0.25
radiation_samples = 2
radiation_c = 8
radiation_r_over_rstar = 32
)";
    }
    if (name == "static_null") {
        return R"([scenario]
name = static_null
mode = plasma
seed = 20240821

[species]
sign = +1
weight = 0.5
center = 0 0 0
scale_radii = 0.5 0.5 0.5
momentum_radius = 0.05
symmetrize = antithetic

[numerics]
particles = 4000
dt = 0.005
dt_record = 0.05
softening = auto
grid_n = 32
grid_extent = 1.2
window_min = -0.2
window_max = 0.4
drift_tolerance = 1e-5

[bounds]
p1 = 0.4
r2 = 1.0
u0 = 1.0

[scan]
c = 8
r_over_rstar = 4 8
u = 0.1
measure_exact = false

[identities]
times = 0.1
radiation_samples = 2
radiation_c = 8
radiation_r_over_rstar = 16
)";
    }
    throw std::runtime_error("unknown bundled scenario " + name);
}

inline ScenarioConfig bundled_scenario(const std::string& name) {
    std::istringstream is(bundled_scenario_text(name));
    return parse_scenario_config(is);
}

} // namespace vrl

#endif // VRL_SCENARIO_HPP
