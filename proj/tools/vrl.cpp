// vrl: batch driver for the kinetic radiation laboratory.
//   vrl run <cfg>              evolve + identity suite + order scan
//   vrl identities <dir>       re-run the identity suite on a saved history
//   vrl scan <dir> <cfg>       re-run the order scan on a saved history
//   vrl report <dir>           print the human-readable summary
// <cfg> is a config file path or a bundled scenario name (plasma_dipole,
// plasma_single_species, gravity_sphere, gravity_aspherical, static_null).
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "vrl/scenario.hpp"

namespace {

vrl::ScenarioConfig load_config_arg(const std::string& arg) {
    if (std::filesystem::exists(arg)) return vrl::load_scenario_config(arg);
    return vrl::bundled_scenario(arg);
}

std::string config_text_arg(const std::string& arg) {
    if (std::filesystem::exists(arg)) {
        std::ifstream f(arg);
        std::ostringstream ss;
        ss << f.rdbuf();
        return ss.str();
    }
    return vrl::bundled_scenario_text(arg);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vrl - Vlasov radiation laboratory"};
    app.require_subcommand(1);

    int threads = 0;
    std::uint64_t seed_override = 0;
    double tolerance_scale = 0.0;
    app.add_option("--threads", threads, "worker thread count (default: hardware)");
    auto* seed_opt = app.add_option("--seed", seed_override, "override the scenario seed");
    app.add_option("--tolerance-scale", tolerance_scale,
                   "scale factor on identity tolerances");

    std::string cfg_arg, dir_arg;
    auto* cmd_run = app.add_subcommand("run", "run a scenario end to end");
    cmd_run->add_option("config", cfg_arg, "config path or bundled scenario name")->required();

    auto* cmd_ident = app.add_subcommand("identities", "identity suite on a saved history");
    cmd_ident->add_option("dir", dir_arg, "history directory")->required();

    auto* cmd_scan = app.add_subcommand("scan", "order scan on a saved history");
    cmd_scan->add_option("dir", dir_arg, "history directory")->required();
    cmd_scan->add_option("config", cfg_arg, "config path or bundled scenario name")->required();

    auto* cmd_report = app.add_subcommand("report", "summarize an artifact directory");
    cmd_report->add_option("dir", dir_arg, "artifact directory")->required();

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) vrl::set_worker_threads(threads);
    const bool has_seed = seed_opt->count() > 0;

    try {
        if (cmd_run->parsed()) {
            vrl::ScenarioConfig cfg = load_config_arg(cfg_arg);
            if (has_seed) cfg.seed = seed_override;
            if (tolerance_scale > 0.0) cfg.tolerance_scale = tolerance_scale;
            const auto res = vrl::run_scenario(cfg);
            {
                std::ofstream f(res.dir / "config.ini");
                f << config_text_arg(cfg_arg);
            }
            vrl::emit_report(res.dir);
            return res.ok ? 0 : 1;
        }
        if (cmd_ident->parsed()) {
            const std::filesystem::path dir(dir_arg);
            vrl::ScenarioConfig cfg;
            if (std::filesystem::exists(dir / "config.ini"))
                cfg = vrl::load_scenario_config((dir / "config.ini").string());
            else
                throw std::runtime_error("no config.ini in " + dir.string() +
                                         "; run the scenario first");
            if (tolerance_scale > 0.0) cfg.tolerance_scale = tolerance_scale;
            const vrl::SourceHistory h = vrl::load_history(dir);
            const auto results = vrl::run_identities(h, cfg);
            std::filesystem::remove(dir / "identities.csv");
            vrl::write_identities_csv(dir / "identities.csv", results);
            int passed = 0, failed = 0;
            for (const auto& r : results) (r.pass ? passed : failed)++;
            std::cout << "identities: " << passed << " passed, " << failed << " failed\n";
            return failed == 0 ? 0 : 1;
        }
        if (cmd_scan->parsed()) {
            const std::filesystem::path dir(dir_arg);
            vrl::ScenarioConfig cfg = load_config_arg(cfg_arg);
            cfg.validate();
            const vrl::SourceHistory h = vrl::load_history(dir);
            const auto rep = vrl::run_scan(h, cfg);
            vrl::save_report(dir, rep);
            std::cout << "scan: " << rep.points.size() << " points written to "
                      << (dir / "scan.csv").string() << "\n";
            return 0;
        }
        if (cmd_report->parsed()) {
            return vrl::emit_report(dir_arg) ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "vrl: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
