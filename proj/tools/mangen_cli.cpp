#include "mangen/core.hpp"
#include "mangen/experiment.hpp"
#include "mangen/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

// Exit codes: 0 all targets met, 2 a metric missed its target, 1 error.
constexpr int kPass = 0;
constexpr int kError = 1;
constexpr int kTargetMissed = 2;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generative-model geometry experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int threads = 0;
    auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory (overrides MANGEN_OUT_DIR and the config)");
    run->add_option("--threads", threads, "OpenMP thread count (results do not depend on it)");

    app.add_subcommand("list", "List the available experiments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kError;
    }

    if (app.got_subcommand("list")) {
        std::cout << mangen::list_experiments_text();
        return kPass;
    }

    try {
        mangen::parallel::set_threads(threads);
        mangen::RunOptions options;
        if (!out_dir.empty()) options.out_dir = out_dir;
        const auto report = mangen::run_experiment_file(config_path, options);
        std::cout << report.document["experiment"].get<std::string>() << ": " << (report.pass ? "PASS" : "FAIL")
                  << "\nreport: " << report.output_dir << "/report.json\n";
        std::cout << report.document["metrics"].dump(2) << "\n";
        return report.pass ? kPass : kTargetMissed;
    } catch (const mangen::Error& e) {
        std::cerr << "mangen: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "mangen: unexpected failure: " << e.what() << "\n";
    }
    return kError;
}
