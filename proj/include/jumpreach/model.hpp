#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>

#include "jumpreach/measure.hpp"
#include "jumpreach/rng.hpp"

namespace jumpreach {

enum class ModelTag { additive, monotone_drift, one_sided, frame };

struct FrameData {
    std::vector<Vec> frame;  // unit vectors
    double kappa;            // covering constant
    double lambda_bound;     // |sigma(x) xi| within [1/Lambda, Lambda] |xi|
};

struct CoordinatewiseData {
    std::vector<std::function<double(const Vec&)>> sigma_i;
    Vec beta;
    double kappa1;  // declared |sigma_i| < kappa1
    double kappa2;  // declared |sigma_i| > kappa2
};

struct LipschitzData {
    // |sigma(x,z) - sigma(x,z')| <= sigma_z |z - z'|
    double sigma_z = 1.0;
    // |sigma(x,z) - sigma(x',z)| <= sigma_x_per_z |z| |x - x'|
    double sigma_x_per_z = 0.0;
    double drift_modulus = 0.0;
};

struct ModelSpec {
    int dimension = 1;
    std::string name;
    std::function<Vec(const Vec&)> drift;                   // A(x)
    std::function<Vec(const Vec&, const Vec&)> jump_coeff;  // sigma(x, z)
    // present when sigma(x,z) = M(x) z for a matrix M; row-major
    std::function<Mat(const Vec&)> sigma_matrix;
    std::set<ModelTag> tags;
    std::optional<LipschitzData> lipschitz;
    std::optional<FrameData> frame;
    std::optional<CoordinatewiseData> coordwise;
    std::optional<IntensityMeasure> default_measure;

    bool has_tag(ModelTag t) const { return tags.count(t) > 0; }
};

// Probabilistic validation of declared structure: additive models must
// satisfy sigma(x,z) = z and Lipschitz declarations must hold on sampled
// pairs. Throws std::logic_error naming the failed declaration.
void validate_model(const ModelSpec& model, Rng& rng, int samples = 200);

// --- model zoo ---

ModelSpec frozen_model(int dimension);                   // A = 0, sigma = 0
ModelSpec pure_noise_model(int dimension);               // A = 0, additive
ModelSpec pure_drift_model(const Vec& c);                // A = c, additive
ModelSpec ornstein_uhlenbeck(int dimension, double theta);
ModelSpec one_sided_counterexample();
ModelSpec quadrant_locked_2d();
ModelSpec frame_fixed_2d();
ModelSpec monotone_cubic(int dimension);
ModelSpec singular_stable_like();

// Lookup by name with a json-encoded parameter object; used by the CLI.
ModelSpec model_by_name(const std::string& name, const std::string& params_json);
std::vector<std::string> model_names();

}  // namespace jumpreach
