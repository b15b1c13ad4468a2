#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jumpreach/measure.hpp"

namespace jumpreach {

// Result of checking the sufficient density conditions for a 1-D measure.
// Conditions evaluated from the declared support description carry the
// basis "declared"; structural refutations are listed in notes.
struct SupportReport {
    std::map<std::string, TriState> condition_results;
    std::map<std::string, std::string> condition_basis;
    std::vector<Vec> witness;
    TriState h0_dense = TriState::inconclusive;
    std::vector<std::string> notes;
};

SupportReport analyze_support_1d(const IntensityMeasure& measure);

// A combination sum_i multiplicity_i * point_i approximating a target.
struct JumpCombination {
    std::vector<Vec> points;
    std::vector<int> multiplicities;
    Vec value;
    double error = 0.0;
    int total_jumps = 0;

    std::vector<Vec> expanded() const;  // points repeated by multiplicity
};

enum class InfeasibleReason { budget, structural };

struct CombinationSearchResult {
    std::optional<JumpCombination> combination;
    InfeasibleReason reason = InfeasibleReason::budget;
    bool search_truncated = false;  // a frontier cap dropped candidates
};

// Best-first layered search over N-combinations of declared support
// points. Returns a combination with error <= tol minimizing the total
// jump count (ties broken lexicographically on point index), or an
// infeasibility tagged budget vs. structural.
CombinationSearchResult search_jump_combination(const IntensityMeasure& measure,
                                                const Vec& target, double tol, int budget,
                                                int grid_per_ray = 64,
                                                std::size_t frontier_cap = 20000);

// Balls around support points whose Minkowski sum lands inside
// B(center, radius): the additive-noise reachability certificate.
struct BallSumCertificate {
    std::vector<Vec> points;
    std::vector<double> radii;
    Vec sum;
    double defect = 0.0;  // |sum - center|
};

struct BallSumCheck {
    bool pass = false;
    double containment_slack = 0.0;  // radius - defect - sum of radii
    std::string failure;
};

struct BallSumSearchResult {
    std::optional<BallSumCertificate> certificate;
    InfeasibleReason reason = InfeasibleReason::budget;
};

BallSumSearchResult find_ball_sum_certificate(const IntensityMeasure& measure, const Vec& center,
                                              double radius, int budget);

// Pure re-verification: containment by triangle inequality, positive mass
// of every ball, and 0 outside every closed ball.
BallSumCheck verify_ball_sum_certificate(const BallSumCertificate& cert,
                                         const IntensityMeasure& measure, const Vec& center,
                                         double radius);

// Probe of min over unit directions of int |<theta0, theta>| dtheta for a
// radial-polar sphere measure. Strictly positive non-degeneracy does not
// imply the frame covering the greedy planner needs; the quadrant measure
// separates the two.
double sphere_nondegeneracy(const IntensityMeasure& radial_measure, int n_probes = 8192,
                            std::uint64_t seed = 0);

}  // namespace jumpreach
