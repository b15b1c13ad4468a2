#include "jumpreach/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace jumpreach {

namespace {

constexpr double kDivergenceGuard = 1e12;

// Cholesky factor with a tiny jitter; small d only.
Mat cholesky(Mat a, int d) {
    for (int i = 0; i < d; ++i) a[i * d + i] += 1e-15;
    Mat l(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[i * d + j];
            for (int k = 0; k < j; ++k) s -= l[i * d + k] * l[j * d + k];
            if (i == j) {
                l[i * d + i] = std::sqrt(std::max(s, 0.0));
            } else {
                l[i * d + j] = l[j * d + j] > 0.0 ? s / l[j * d + j] : 0.0;
            }
        }
    }
    return l;
}

struct CompensatorEval {
    const ModelSpec* model;
    const NoiseRealization* noise;
    const IntensityMeasure* measure;
    bool active = false;
    bool constant = false;
    Vec constant_value;

    void init() {
        active = noise->representation == Representation::ito_levy &&
                 norm(noise->compensator_mean) > 0.0;
        if (!active) return;
        if (model->has_tag(ModelTag::additive)) {
            constant = true;
            constant_value = noise->compensator_mean;
        } else if (!model->sigma_matrix && !measure) {
            throw std::invalid_argument(
                "nonlinear jump coefficient with a compensated realization needs the "
                "intensity measure for per-step quadrature");
        }
    }

    Vec eval(const Vec& x) const {
        if (constant) return constant_value;
        if (model->sigma_matrix) return mat_apply(model->sigma_matrix(x), noise->compensator_mean);
        return measure->integrate_annulus(
            [&](const Vec& z) { return model->jump_coeff(x, z); }, noise->cutoff, 1.0);
    }
};

// Core jump-adapted Euler walk. The observer receives every recorded
// state; jumps are applied exactly at their times.
template <typename Observer>
void run_scheme(const ModelSpec& model, const Vec& x0, const NoiseRealization& noise, double dt,
                int truncation_m, const IntensityMeasure* measure, Observer&& obs) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    const double T = noise.horizon;
    const int d = model.dimension;
    if (static_cast<int>(x0.size()) != d) throw std::invalid_argument("x0 dimension mismatch");

    CompensatorEval comp{&model, &noise, measure, false, false, {}};
    comp.init();

    const bool gaussian_mode = noise.mode == SmallJumpMode::gaussian_approximation &&
                               !noise.small_jump_cov.empty();
    Mat chol;
    Rng gauss_rng(derive_seed(noise.seed, 0x6a));
    if (gaussian_mode) chol = cholesky(noise.small_jump_cov, d);

    Vec x = x0;
    double t = 0.0;
    obs.on_state(t, x, false);

    std::size_t jump_idx = 0;
    const double keep_below = truncation_m >= 1 ? 1.0 / truncation_m : 0.0;
    auto next_kept_jump = [&]() -> const Jump* {
        while (jump_idx < noise.jumps.size()) {
            const Jump& j = noise.jumps[jump_idx];
            if (j.time > T) return nullptr;
            if (truncation_m >= 1 && norm(j.mark) > keep_below) {
                ++jump_idx;
                continue;
            }
            return &j;
        }
        return nullptr;
    };

    auto drift_to = [&](double target) {
        while (t < target) {
            const double h = target - t;
            Vec a = model.drift(x);
            if (comp.active) {
                const Vec c = comp.eval(x);
                for (int i = 0; i < d; ++i) a[i] -= c[i];
                obs.on_compensator(h, c);
            }
            for (int i = 0; i < d; ++i) x[i] += h * a[i];
            if (gaussian_mode) {
                Vec g = gauss_rng.normal_vec(d);
                const double sh = std::sqrt(h);
                for (int i = 0; i < d; ++i) {
                    double inc = 0.0;
                    for (int k = 0; k <= i; ++k) inc += chol[i * d + k] * g[k];
                    x[i] += sh * inc;
                }
            }
            t = target;
        }
        if (!all_finite(x) || norm(x) > kDivergenceGuard)
            throw DivergenceError("state diverged during drift step", t);
    };

    double next_grid = std::min(dt, T);
    while (true) {
        const Jump* j = next_kept_jump();
        const double t_jump = j ? j->time : std::numeric_limits<double>::infinity();
        if (j && t_jump <= next_grid) {
            drift_to(t_jump);
            Vec pre = x;
            Vec inc = model.jump_coeff(pre, j->mark);
            for (int i = 0; i < d; ++i) x[i] += inc[i];
            if (!all_finite(x) || norm(x) > kDivergenceGuard)
                throw DivergenceError("state diverged at a jump", t);
            obs.on_jump(t, j->mark, pre, x);
            obs.on_state(t, x, true);
            if (t_jump == next_grid) next_grid = std::min(next_grid + dt, T);
            ++jump_idx;
            if (t >= T && !next_kept_jump()) break;
            continue;
        }
        if (t >= T) break;
        drift_to(next_grid);
        obs.on_state(t, x, false);
        if (next_grid >= T) break;
        next_grid = std::min(next_grid + dt, T);
    }
    obs.on_done(x);
}

struct RecordingObserver {
    PathRecord* rec;
    int d;
    void on_state(double t, const Vec& x, bool is_jump) {
        rec->times.push_back(t);
        rec->states.push_back(x);
        rec->jump_flags.push_back(is_jump ? 1 : 0);
    }
    void on_jump(double t, const Vec& mark, const Vec& pre, const Vec& post) {
        rec->jumps.push_back({t, mark, pre, post});
    }
    void on_compensator(double h, const Vec& c) { axpy(h, c, rec->compensator_total); }
    void on_done(const Vec&) {}
};

struct TerminalObserver {
    Vec final_state;
    void on_state(double, const Vec&, bool) {}
    void on_jump(double, const Vec&, const Vec&, const Vec&) {}
    void on_compensator(double, const Vec&) {}
    void on_done(const Vec& x) { final_state = x; }
};

struct StayObserver {
    const Vec* center;
    double radius;
    double t_end;
    bool stayed = true;
    void on_state(double t, const Vec& x, bool) {
        if (t < t_end && dist(x, *center) >= radius) stayed = false;
    }
    void on_jump(double, const Vec&, const Vec&, const Vec&) {}
    void on_compensator(double, const Vec&) {}
    void on_done(const Vec&) {}
};

}  // namespace

PathRecord integrate(const ModelSpec& model, const Vec& x0, const NoiseRealization& noise,
                     double dt, const IntensityMeasure* measure) {
    PathRecord rec;
    rec.dt = dt;
    rec.seed = noise.seed;
    rec.compensator_total = zeros(model.dimension);
    RecordingObserver obs{&rec, model.dimension};
    run_scheme(model, x0, noise, dt, 0, measure, obs);
    return rec;
}

PathRecord integrate_truncated(const ModelSpec& model, const Vec& x0,
                               const NoiseRealization& noise, double dt, int m,
                               const IntensityMeasure* measure) {
    if (m < 1) throw std::invalid_argument("truncation index must be >= 1");
    PathRecord rec;
    rec.dt = dt;
    rec.seed = noise.seed;
    rec.compensator_total = zeros(model.dimension);
    RecordingObserver obs{&rec, model.dimension};
    run_scheme(model, x0, noise, dt, m, measure, obs);
    return rec;
}

TerminalResult integrate_terminal(const ModelSpec& model, const Vec& x0,
                                  const NoiseRealization& noise, double dt,
                                  const IntensityMeasure* measure) {
    TerminalResult out;
    TerminalObserver obs;
    try {
        run_scheme(model, x0, noise, dt, 0, measure, obs);
        out.state = std::move(obs.final_state);
    } catch (const DivergenceError& e) {
        out.diverged = true;
        out.divergence_time = e.time;
    }
    return out;
}

StayResult stays_in_ball(const ModelSpec& model, const Vec& x0, const NoiseRealization& noise,
                         double dt, const Vec& center, double radius, double t_end,
                         const IntensityMeasure* measure) {
    StayResult out;
    StayObserver obs{&center, radius, t_end};
    try {
        run_scheme(model, x0, noise, dt, 0, measure, obs);
        out.stayed = obs.stayed;
    } catch (const DivergenceError&) {
        out.diverged = true;
    }
    return out;
}

std::optional<double> first_jump_time(const NoiseRealization& noise, int m, int i) {
    if (m < 1 || i < 1) throw std::invalid_argument("first_jump_time needs m >= 1, i >= 1");
    int count = 0;
    for (const auto& j : noise.jumps) {
        if (norm(j.mark) > 1.0 / m) {
            ++count;
            if (count == i) return j.time;
        }
    }
    return std::nullopt;
}

std::optional<double> exit_time(const PathRecord& path, const Vec& center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    for (std::size_t k = 0; k < path.times.size(); ++k)
        if (dist(path.states[k], center) >= radius) return path.times[k];
    return std::nullopt;
}

void write_path_csv(const PathRecord& path, std::ostream& os) {
    os << "# jumpreach-path v1: time,state...,jump\n";
    for (std::size_t k = 0; k < path.times.size(); ++k) {
        os << path.times[k];
        for (double c : path.states[k]) os << ',' << c;
        os << ',' << static_cast<int>(path.jump_flags[k]) << '\n';
    }
}

}  // namespace jumpreach
