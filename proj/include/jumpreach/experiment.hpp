#pragma once

#include <optional>
#include <string>

#include "jumpreach/mc.hpp"
#include "jumpreach/model.hpp"
#include "jumpreach/planner.hpp"

namespace jumpreach {

enum class ExitStatus : int { ok = 0, infeasible = 10, verification_failed = 11, error = 1 };

// Declarative description of one experiment. Everything except kind,
// measure and model has a default; parsing fills the defaults so the
// config echoes back canonically.
struct ExperimentConfig {
    std::string kind;          // simulate | plan | verify-cert | estimate-hitting |
                               // estimate-support | check-support | check-e-property
    std::string measure_json;  // canonical measure subtree ("model_default" allowed)
    std::string model_name;
    std::string model_params_json = "{}";

    double horizon = 1.0;
    double dt = 1e-3;
    double delta = 1e-3;
    long long n = 10000;
    double confidence = 0.99;
    std::uint64_t seed = 1;
    int workers = 0;
    std::string small_jump_mode = "drop_with_compensator";
    std::string planner = "auto";  // auto | additive | one_step | coordinatewise | greedy
    int budget = 100000;
    long long verify_samples = 10000;
    int truncation = 40;
    Vec x0;           // defaults to the origin
    Vec ball_center;  // target ball
    double ball_radius = 0.1;
    Vec pair_x, pair_y;  // check-e-property
    std::string certificate_file;

    std::string canonical_json() const;
};

ExperimentConfig parse_config(const std::string& json_text);

IntensityMeasure measure_from_json(const std::string& json_text);
std::string measure_canonical_json(const std::string& json_text);

struct RunOutcome {
    ExitStatus status = ExitStatus::ok;
    std::string report_json;   // full report document (stable key order)
    std::string report_path;   // written file
};

// Executes the experiment, writes report.json, appends to results.csv and
// writes any extra artifacts (certificate.json, noise.json, path.csv)
// under out_dir.
RunOutcome run_experiment(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace jumpreach
