#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "jumpreach/measure.hpp"
#include "jumpreach/rng.hpp"

namespace jumpreach {

enum class SmallJumpMode { drop_with_compensator, gaussian_approximation };

struct Jump {
    double time;
    Vec mark;
    int annulus_index;  // smallest m with |mark| > 1/m
};

// One realization of the driving noise above a cutoff. Jump times are
// strictly increasing in (0, T]; every mark's norm exceeds the cutoff.
// Identical (measure, T, cutoff, mode, seed) reproduce this bit for bit.
struct NoiseRealization {
    double horizon = 0.0;
    double cutoff = 0.0;
    SmallJumpMode mode = SmallJumpMode::drop_with_compensator;
    Representation representation = Representation::compound_poisson;
    std::uint64_t seed = 0;
    std::vector<Jump> jumps;

    // ito_levy: int_{cutoff < |z| <= 1} z nu(dz), the additive-model
    // compensator (zero vector for compound-Poisson realizations)
    Vec compensator_mean;
    // gaussian_approximation: int_{|z| <= cutoff} z z^T nu(dz), row-major
    Mat small_jump_cov;
};

int annulus_index_of(double mark_norm);

NoiseRealization sample_noise(const IntensityMeasure& measure, double horizon, double cutoff,
                              SmallJumpMode mode, std::uint64_t seed);

// Keeps only marks above the larger cutoff; equal in law to sampling at
// that cutoff directly.
NoiseRealization thin_to_cutoff(const NoiseRealization& noise, const IntensityMeasure& measure,
                                double larger_cutoff);

// Chambers-Mallows-Stuck standard alpha-stable variate.
double sample_stable_1d(double alpha, double skew, Rng& rng);

// Path skeleton of a subordinated process: marks are base-process
// increments over the subordinator's jumps (plus, for a product base with
// beta0 > 0, an independent thinned copy of the base jumps).
NoiseRealization sample_subordinated_path(const IntensityMeasure& subordinated, double horizon,
                                          double cutoff, std::uint64_t seed);

std::string noise_to_json(const NoiseRealization& noise);
NoiseRealization noise_from_json(const std::string& text);

}  // namespace jumpreach
