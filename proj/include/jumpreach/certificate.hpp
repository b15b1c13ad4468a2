#pragma once

#include <optional>
#include <string>

#include "jumpreach/measure.hpp"
#include "jumpreach/model.hpp"

namespace jumpreach {

// A finite jump chain certifying that neighbourhoods of the start reach a
// neighbourhood of the target through chosen jumps:
//   states q_0..q_n with q_{i} = q_{i-1} + sigma(q_{i-1}, l_i),
//   open mark balls B(l_i, eps_i) of positive intensity mass inside the
//   annulus Z_{m0}, and state radii eta_0 <= ... <= eta_n with
//   |q_n - y| + eta_n <= target_radius.
struct JumpChainCertificate {
    std::vector<Vec> states;
    std::vector<Vec> marks;
    std::vector<double> mark_radii;
    std::vector<double> state_radii;
    int m0 = 1;
    Vec target_center;
    double target_radius = 0.0;

    int steps() const { return static_cast<int>(marks.size()); }
};

struct StructuralCheck {
    bool pass = false;
    std::string failure;
};

// Pure recheck of every type invariant against the model's sigma and the
// measure's ball masses.
StructuralCheck check_certificate_structure(const JumpChainCertificate& cert,
                                            const ModelSpec& model,
                                            const IntensityMeasure& measure);

// Smallest m with min_i(|l_i| - eps_i) > 1/m.
int truncation_index_for(const std::vector<Vec>& marks, const std::vector<double>& mark_radii);

std::string certificate_to_json(const JumpChainCertificate& cert);
JumpChainCertificate certificate_from_json(const std::string& text);

// Human-readable step table (i, q_i, l_i, eps_i, eta_i, distance to target).
std::string certificate_table(const JumpChainCertificate& cert);

}  // namespace jumpreach
