// rftune: run one configured experiment and write its result files.
//
//   rftune --config ishigami.json [--seed N] [--workers N] [--out DIR]
//   rftune --experiment lorenz63 --out runs/l63
//
// Exit codes: 0 ok, 2 bad configuration, 3 numerical failure, 4 io failure.

#include "rftune/parallel.hpp"
#include "rftune/serialization.hpp"
#include "rftune_tools/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

}  // namespace

int main(int argc, char** argv) {
    using namespace rftune;
    CLI::App app{"Random-feature emulator tuning experiments"};
    std::string config_path;
    std::string experiment;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string out_dir;
    bool print_defaults = false;
    app.add_option("--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
    app.add_option("--experiment", experiment, "Run an experiment with its default config")
        ->check(CLI::IsMember({"ishigami", "sobol_g", "lorenz63", "ces_synthetic", "linear_gaussian_check"}));
    app.add_option("--seed", seed, "Override the config seed");
    app.add_option("--workers", workers, "Concurrent forward-map evaluations (default: RF_TUNE_WORKERS or 1)");
    app.add_option("--out", out_dir, "Output directory (overrides the config)");
    app.add_flag("--print-defaults", print_defaults, "Print the resolved config and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    tools::ExperimentConfig config;
    try {
        if (config_path.empty() == experiment.empty())
            throw InvalidArgument("give exactly one of --config or --experiment");
        nlohmann::json doc;
        if (!config_path.empty()) {
            try {
                doc = nlohmann::json::parse(read_text(config_path));
            } catch (const nlohmann::json::parse_error& e) {
                throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
            }
        } else {
            doc = {{"experiment", experiment}};
        }
        config = tools::config_from_json(doc);
        if (seed) config.seed = *seed;
        config.workers = workers ? *workers : workers_from_env(config.workers);
        if (!out_dir.empty()) config.output_dir = out_dir;
        config.validate();
    } catch (const InvalidArgument& e) {
        std::cerr << "rftune: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoFailure& e) {
        std::cerr << "rftune: " << e.what() << "\n";
        return kExitConfig;
    }
    if (print_defaults) {
        std::cout << tools::config_to_json(config).dump(2) << "\n";
        return 0;
    }

    try {
        const tools::ExperimentResult result = tools::run_experiment(config);
        tools::emit_results(result, config, config.output_dir);
        std::cout << result.metrics.dump(2) << "\n";
    } catch (const NumericalError& e) {
        std::cerr << "rftune: numerical failure: " << e.what() << "\n";
        try {
            tools::ExperimentResult diag;
            diag.metrics = {{"error", e.what()}, {"kind", "numerical"}};
            tools::emit_results(diag, config, config.output_dir);
        } catch (const std::exception&) {
        }
        return kExitNumerical;
    } catch (const InvalidArgument& e) {
        std::cerr << "rftune: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoFailure& e) {
        std::cerr << "rftune: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}
