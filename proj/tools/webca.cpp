#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "webca/sim.hpp"

namespace fs = std::filesystem;
using namespace webca;

int main(int argc, char** argv) {
    CLI::App app{"webca: electrosensory world, wavelet sensing, three-map emulation, "
                 "population readout and symbolic feedback control"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "scenario config file")->required();
        sub->add_option("--seed", seed_override, "override the config seed");
        sub->add_option("--out", out_dir, "output directory");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "execute the full closed-loop scenario");
    CLI::App* cmd_hyper = app.add_subcommand("hyperacuity", "sub-pitch position decoding sweep");
    CLI::App* cmd_lesion = app.add_subcommand("lesion", "single-feature knockout analysis");
    CLI::App* cmd_feedback = app.add_subcommand("feedback", "chirp-triggered context switching");
    CLI::App* cmd_validate = app.add_subcommand("validate-config", "load and validate a config");
    for (auto* sub : {cmd_run, cmd_hyper, cmd_lesion, cmd_feedback, cmd_validate})
        add_common(sub);

    CLI11_PARSE(app, argc, argv);

    harness::ScenarioConfig cfg;
    try {
        cfg = harness::load_config(config_path);
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    if (seed_override) cfg.seed = *seed_override;

    try {
        if (app.got_subcommand(cmd_validate)) {
            std::cout << "config ok\n";
            return 0;
        }
        fs::create_directories(out_dir);
        const fs::path out(out_dir);

        harness::MetricsSummary summary;
        if (app.got_subcommand(cmd_run)) {
            auto [record, s] = harness::run_scenario(cfg);
            summary = s;
            harness::write_run_csv(record, (out / "run.csv").string());
            harness::write_events_log(record, (out / "events.log").string());
        } else if (app.got_subcommand(cmd_hyper)) {
            summary = harness::experiment_hyperacuity(cfg);
        } else if (app.got_subcommand(cmd_lesion)) {
            summary = harness::experiment_lesion(cfg);
        } else if (app.got_subcommand(cmd_feedback)) {
            summary = harness::experiment_feedback(cfg);
        }
        harness::write_summary_json(summary, (out / "summary.json").string());
        std::cout << "summary written to " << (out / "summary.json").string() << "\n";
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}
