#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "jumpreach/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"jumpreach: simulation and reachability certification for jump-driven SDEs"};

    std::string config_path;
    std::string out_dir = "out";
    long long seed_override = -1;
    int workers_override = -1;
    std::string mode_override;

    app.add_option("--config", config_path, "experiment config file (json)")->required();
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--workers", workers_override, "worker pool size (0 = hardware)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--small-jump-mode", mode_override,
                   "drop_with_compensator | gaussian_approximation")
        ->check(CLI::IsMember({"drop_with_compensator", "gaussian_approximation"}));

    CLI11_PARSE(app, argc, argv);

    if (const char* env_out = std::getenv("JUMPREACH_OUT")) out_dir = env_out;

    try {
        std::ifstream is(config_path);
        if (!is) {
            std::cerr << "cannot open config '" << config_path << "'\n";
            return static_cast<int>(jumpreach::ExitStatus::error);
        }
        std::stringstream buf;
        buf << is.rdbuf();
        jumpreach::ExperimentConfig config = jumpreach::parse_config(buf.str());
        if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);
        if (workers_override >= 0) config.workers = workers_override;
        if (!mode_override.empty()) config.small_jump_mode = mode_override;

        const jumpreach::RunOutcome outcome = jumpreach::run_experiment(config, out_dir);
        std::cout << outcome.report_json << '\n';
        return static_cast<int>(outcome.status);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(jumpreach::ExitStatus::error);
    }
}
