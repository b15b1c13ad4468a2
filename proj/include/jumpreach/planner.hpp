#pragma once

#include <optional>
#include <string>

#include "jumpreach/certificate.hpp"
#include "jumpreach/measure.hpp"
#include "jumpreach/model.hpp"
#include "jumpreach/support.hpp"

namespace jumpreach {

struct PlanFailure {
    enum class Kind { structural, budget, condition_violation, singular };
    Kind kind;
    std::string detail;
    Vec state;  // for condition violations: the state where the frame failed
};

// One step of the greedy frame walk, kept for the contraction checks.
struct GreedyStep {
    double rho;        // distance to target before the step
    double varpi;      // achieved direction cosine
    double r0;         // chosen displacement length
    bool clamped;      // r0 hit the reachable-length bound
    bool big_case;     // rho * kappa > 1 / Lambda
    double g_value;    // squared distance after the step
    int direction;     // frame index used
};

struct PlanResult {
    std::optional<JumpChainCertificate> certificate;
    std::optional<PlanFailure> failure;
    std::vector<GreedyStep> greedy_steps;
    double condition_number = 0.0;  // one-step planner: cond of sigma(start)

    bool feasible() const { return certificate.has_value(); }
};

// Additive noise: turns a support-combination search for y - start into a
// chain with radii allocated by the triangle inequality.
PlanResult plan_additive(const ModelSpec& model, const IntensityMeasure& measure,
                         const Vec& start, const Vec& target, double eta_bar, int budget = 64);

// Invertible matrix coefficient and dense support: the single jump
// l = sigma(start)^{-1} (target - start).
PlanResult plan_one_step_inverse(const ModelSpec& model, const IntensityMeasure& measure,
                                 const Vec& start, const Vec& target, double eta_bar);

// Scalar per-coordinate coefficients with declared bounds: sign walks in
// index order with steps capped so that the terminal error stays within
// 3 eta_bar / 8.
PlanResult plan_coordinatewise(const ModelSpec& model, const IntensityMeasure& measure,
                               const Vec& start, const Vec& target, double eta_bar,
                               int budget = 100000);

// Frame-covered matrix coefficient: repeatedly jump along the frame
// direction best aligned with the target, with the exact quadratic step
// length, until the distance drops below eta / 8 (or, on discrete radial
// support, until no available radius improves it).
PlanResult plan_greedy_frame(const ModelSpec& model, const IntensityMeasure& measure,
                             const Vec& start, const Vec& target, double eta_bar,
                             int budget = 100000, std::optional<double> eta = std::nullopt);

// Dispatch on the model's declared structure (frame > coordinatewise >
// additive > invertible matrix).
PlanResult plan_auto(const ModelSpec& model, const IntensityMeasure& measure, const Vec& start,
                     const Vec& target, double eta_bar, int budget = 100000);

struct VerifyWitness {
    int step;
    Vec state;
    Vec mark;
    double distance;  // landed this far from q_{i+1}, >= eta_{i+1}
};

struct VerifyReport {
    bool structural_pass = false;
    std::string structural_failure;
    bool deterministic_available = false;
    bool deterministic_pass = false;
    bool sampled_pass = false;
    long long samples_per_step = 0;
    std::optional<VerifyWitness> witness;
    bool pass = false;
};

// Checks the one-jump containment bullet per step: deterministically from
// declared Lipschitz bounds when available, and by sampling pairs
// uniformly from the product of balls.
VerifyReport verify_certificate(const JumpChainCertificate& cert, const ModelSpec& model,
                                const IntensityMeasure& measure, long long samples,
                                std::uint64_t seed);

// Monte Carlo probe of the frame covering constant: the minimum over
// random unit targets (at random probe states) of the best frame cosine.
double probe_frame_covering(const ModelSpec& model, int n_probes, std::uint64_t seed);

}  // namespace jumpreach
