#pragma once

#include <iosfwd>
#include <optional>

#include "jumpreach/model.hpp"
#include "jumpreach/noise.hpp"

namespace jumpreach {

struct AppliedJump {
    double time;
    Vec mark;
    Vec pre;
    Vec post;
};

// Skeleton of one trajectory on the jump-adapted grid (uniform dt grid
// merged with all jump times, so jumps are applied exactly, never
// time-discretized).
struct PathRecord {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<uint8_t> jump_flags;
    std::vector<AppliedJump> jumps;
    Vec compensator_total;  // int C(X(s)) ds as accumulated by the scheme
    double dt = 0.0;
    std::uint64_t seed = 0;

    const Vec& terminal() const { return states.back(); }
};

// Explicit Euler between jumps; jumps applied exactly at their times.
// With an ito_levy realization the drift carries the small-jump
// compensator -int_{delta<|z|<=1} sigma(x,z) nu(dz); nonlinear jump
// coefficients without a sigma_matrix need the measure for per-step
// quadrature. Throws DivergenceError past a state norm of 1e12.
PathRecord integrate(const ModelSpec& model, const Vec& x0, const NoiseRealization& noise,
                     double dt, const IntensityMeasure* measure = nullptr);

// Same scheme with every jump of norm > 1/m removed; the compensator
// drift is unchanged, so both paths coincide strictly before the first
// removed jump.
PathRecord integrate_truncated(const ModelSpec& model, const Vec& x0,
                               const NoiseRealization& noise, double dt, int m,
                               const IntensityMeasure* measure = nullptr);

struct TerminalResult {
    Vec state;
    bool diverged = false;
    double divergence_time = 0.0;
};

// Terminal state only; no per-step recording. The workhorse of the Monte
// Carlo layer.
TerminalResult integrate_terminal(const ModelSpec& model, const Vec& x0,
                                  const NoiseRealization& noise, double dt,
                                  const IntensityMeasure* measure = nullptr);

// True when every recorded state strictly before t_end stays inside the
// open ball B(center, radius). Detection is on the skeleton only.
struct StayResult {
    bool stayed = false;
    bool diverged = false;
};
StayResult stays_in_ball(const ModelSpec& model, const Vec& x0, const NoiseRealization& noise,
                         double dt, const Vec& center, double radius, double t_end,
                         const IntensityMeasure* measure = nullptr);

// Time of the i-th jump with norm > 1/m, if any.
std::optional<double> first_jump_time(const NoiseRealization& noise, int m, int i);

// First recorded time the path leaves the open ball B(center, radius).
std::optional<double> exit_time(const PathRecord& path, const Vec& center, double radius);

// Columnar text export: time, state components, jump flag.
void write_path_csv(const PathRecord& path, std::ostream& os);

}  // namespace jumpreach
