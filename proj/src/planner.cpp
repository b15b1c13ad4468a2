#include "jumpreach/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jumpreach {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct StepBounds {
    double growth;  // Lipschitz bound on q -> q + sigma(q, l) over the mark ball
    double lz;      // Lipschitz bound on l -> sigma(q, l)
};

// Probes local Lipschitz behaviour of sigma around (q, l) when no bounds
// are declared; inflated by a safety factor and confirmed later by the
// sampled verification.
StepBounds probe_bounds(const ModelSpec& model, const Vec& q, const Vec& l, Rng& rng) {
    double lz = 0.0, lx_rel = 0.0;
    const double scale = std::max(norm(l), 1e-6);
    for (int s = 0; s < 64; ++s) {
        Vec dq = scaled(rng.unit_vec(model.dimension), 0.1 * scale * rng.uniform());
        Vec dl = scaled(rng.unit_vec(model.dimension), 0.1 * scale * rng.uniform());
        const Vec base = model.jump_coeff(q, l);
        const Vec zl = model.jump_coeff(q, add(l, dl));
        const Vec zq = model.jump_coeff(add(q, dq), l);
        if (norm(dl) > 0.0) lz = std::max(lz, dist(zl, base) / norm(dl));
        if (norm(dq) > 0.0) lx_rel = std::max(lx_rel, dist(zq, base) / norm(dq));
    }
    StepBounds b;
    b.lz = 1.5 * lz + 1e-9;
    b.growth = 1.0 + 1.5 * lx_rel;
    return b;
}

StepBounds declared_bounds(const LipschitzData& lip, const Vec& l, double eps) {
    StepBounds b;
    b.lz = lip.sigma_z;
    b.growth = 1.0 + lip.sigma_x_per_z * (norm(l) + eps);
    return b;
}

struct Allocation {
    std::vector<double> eps;
    std::vector<double> eta;
    bool ok = false;
};

// Forward allocation eta_{i+1} = eta_i * growth_i + eps_{i+1} * lz_i with
// a small margin, shrunk until the terminal radius fits the cap.
Allocation allocate_radii(const ModelSpec& model, const std::vector<Vec>& states,
                          const std::vector<Vec>& marks, double eta_cap, std::uint64_t seed) {
    Allocation out;
    const std::size_t n = marks.size();
    out.eps.assign(n, 0.0);
    out.eta.assign(n + 1, 0.0);
    if (n == 0) {
        out.eta[0] = 0.5 * eta_cap;
        out.ok = out.eta[0] > 0.0;
        return out;
    }
    Rng rng(seed);
    std::vector<StepBounds> probed;
    if (!model.lipschitz) {
        probed.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            probed.push_back(probe_bounds(model, states[i], marks[i], rng));
    }
    double max_lz = 1e-12;
    for (std::size_t i = 0; i < n; ++i) {
        const double lz = model.lipschitz ? model.lipschitz->sigma_z : probed[i].lz;
        max_lz = std::max(max_lz, lz);
    }
    double eps_base = eta_cap / (4.0 * static_cast<double>(n) * std::max(max_lz, 1.0));
    double eta0 = 0.25 * eta_cap;
    for (int attempt = 0; attempt < 21; ++attempt) {
        for (std::size_t i = 0; i < n; ++i)
            out.eps[i] = std::min(eps_base, 0.5 * norm(marks[i]));
        out.eta[0] = eta0;
        bool fits = true;
        for (std::size_t i = 0; i < n; ++i) {
            const StepBounds b = model.lipschitz
                                     ? declared_bounds(*model.lipschitz, marks[i], out.eps[i])
                                     : probed[i];
            out.eta[i + 1] = out.eta[i] * b.growth + out.eps[i] * b.lz * (1.0 + 1e-6) + 1e-15;
            if (!(out.eta[i + 1] <= eta_cap)) {
                fits = false;
                break;
            }
        }
        if (fits) {
            out.ok = true;
            return out;
        }
        eps_base *= 0.5;
        eta0 *= 0.5;
    }
    return out;
}

// Chain states from the model's own jump map, so replaying the marks
// reproduces the states bit for bit.
std::vector<Vec> chain_states(const ModelSpec& model, const Vec& start,
                              const std::vector<Vec>& marks) {
    std::vector<Vec> states{start};
    for (const auto& l : marks) {
        const Vec& q = states.back();
        states.push_back(add(q, model.jump_coeff(q, l)));
    }
    return states;
}

std::optional<JumpChainCertificate> assemble(const ModelSpec& model,
                                             const IntensityMeasure& measure, const Vec& start,
                                             const Vec& target, double eta_bar,
                                             const std::vector<Vec>& marks, PlanResult& result) {
    JumpChainCertificate cert;
    cert.states = chain_states(model, start, marks);
    cert.marks = marks;
    cert.target_center = target;
    cert.target_radius = 0.5 * eta_bar;
    const double defect = dist(cert.states.back(), target);
    if (!(defect < cert.target_radius)) {
        result.failure = PlanFailure{PlanFailure::Kind::budget,
                                     "chain terminates outside the target ball", cert.states.back()};
        return std::nullopt;
    }
    const double eta_cap = (cert.target_radius - defect) * (1.0 - 1e-9);
    Allocation alloc = allocate_radii(model, cert.states, marks, eta_cap, 0xa110c);
    if (!alloc.ok) {
        result.failure = PlanFailure{PlanFailure::Kind::budget,
                                     "radius allocation failed within the shrink budget", {}};
        return std::nullopt;
    }
    cert.mark_radii = std::move(alloc.eps);
    cert.state_radii = std::move(alloc.eta);
    cert.m0 = marks.empty() ? 1 : truncation_index_for(cert.marks, cert.mark_radii);
    for (std::size_t i = 0; i < cert.marks.size(); ++i) {
        if (!(measure.mass_in_ball(cert.marks[i], cert.mark_radii[i]) > 0.0)) {
            result.failure = PlanFailure{PlanFailure::Kind::structural,
                                         "a planned mark ball carries no intensity mass",
                                         cert.marks[i]};
            return std::nullopt;
        }
    }
    return cert;
}

bool is_zero_target(const Vec& start, const Vec& target) {
    return dist(start, target) <= 1e-12 * std::max(1.0, norm(target));
}

}  // namespace

PlanResult plan_additive(const ModelSpec& model, const IntensityMeasure& measure,
                         const Vec& start, const Vec& target, double eta_bar, int budget) {
    if (!model.has_tag(ModelTag::additive))
        throw std::invalid_argument("plan_additive needs an additive model");
    if (!(eta_bar > 0.0)) throw std::invalid_argument("eta_bar must be positive");
    PlanResult result;
    if (is_zero_target(start, target)) {
        result.certificate = assemble(model, measure, start, target, eta_bar, {}, result);
        return result;
    }
    const Vec displacement = sub(target, start);
    auto search = search_jump_combination(measure, displacement, 0.25 * eta_bar, budget);
    if (!search.combination) {
        result.failure = PlanFailure{
            search.reason == InfeasibleReason::structural ? PlanFailure::Kind::structural
                                                          : PlanFailure::Kind::budget,
            search.reason == InfeasibleReason::structural
                ? "support cannot reach the target direction"
                : "combination search exhausted its jump budget",
            {}};
        return result;
    }
    result.certificate =
        assemble(model, measure, start, target, eta_bar, search.combination->expanded(), result);
    return result;
}

PlanResult plan_one_step_inverse(const ModelSpec& model, const IntensityMeasure& measure,
                                 const Vec& start, const Vec& target, double eta_bar) {
    if (!model.sigma_matrix)
        throw std::invalid_argument("plan_one_step_inverse needs a matrix jump coefficient");
    if (!(eta_bar > 0.0)) throw std::invalid_argument("eta_bar must be positive");
    PlanResult result;
    if (!measure.support().dense) {
        result.failure = PlanFailure{PlanFailure::Kind::structural,
                                     "one-step planning needs a declared dense support", {}};
        return result;
    }
    if (is_zero_target(start, target)) {
        result.certificate = assemble(model, measure, start, target, eta_bar, {}, result);
        return result;
    }
    const Mat s = model.sigma_matrix(start);
    Vec l;
    if (!solve_linear(s, sub(target, start), l, &result.condition_number)) {
        result.failure = PlanFailure{PlanFailure::Kind::singular,
                                     "sigma(start) is singular at the start state", start};
        return result;
    }
    result.certificate = assemble(model, measure, start, target, eta_bar, {l}, result);
    return result;
}

PlanResult plan_coordinatewise(const ModelSpec& model, const IntensityMeasure& measure,
                               const Vec& start, const Vec& target, double eta_bar, int budget) {
    if (!model.coordwise)
        throw std::invalid_argument("plan_coordinatewise needs per-coordinate coefficients");
    if (!(eta_bar > 0.0)) throw std::invalid_argument("eta_bar must be positive");
    PlanResult result;
    const auto& cw = *model.coordwise;
    const int d = model.dimension;
    if (is_zero_target(start, target)) {
        result.certificate = assemble(model, measure, start, target, eta_bar, {}, result);
        return result;
    }

    // per-axis candidate step magnitudes from the declared support
    struct AxisSteps {
        std::vector<double> pos, neg;      // discrete magnitudes
        double pos_ray_lo = kInf, pos_ray_hi = 0.0;
        double neg_ray_lo = kInf, neg_ray_hi = 0.0;
    };
    std::vector<AxisSteps> axes(static_cast<std::size_t>(d));
    const auto& sup = measure.support();
    for (const auto& p : sup.points) {
        int axis = -1;
        for (int i = 0; i < d; ++i) {
            if (p[i] == 0.0) continue;
            if (axis >= 0) {
                axis = -2;
                break;
            }
            axis = i;
        }
        if (axis < 0) continue;
        if (p[axis] > 0.0)
            axes[axis].pos.push_back(p[axis]);
        else
            axes[axis].neg.push_back(-p[axis]);
    }
    for (const auto& ray : sup.rays) {
        int axis = -1;
        for (int i = 0; i < d; ++i) {
            if (ray.direction[i] == 0.0) continue;
            if (axis >= 0) {
                axis = -2;
                break;
            }
            axis = i;
        }
        if (axis < 0) continue;
        auto& a = axes[axis];
        if (ray.direction[axis] > 0.0) {
            a.pos_ray_lo = std::min(a.pos_ray_lo, ray.r_lo);
            a.pos_ray_hi = std::max(a.pos_ray_hi, ray.r_hi);
        } else {
            a.neg_ray_lo = std::min(a.neg_ray_lo, ray.r_lo);
            a.neg_ray_hi = std::max(a.neg_ray_hi, ray.r_hi);
        }
    }

    const double tau = eta_bar / (8.0 * d);  // per-coordinate cap and stop tolerance
    auto pick_step = [&](int axis, bool positive) -> double {
        // largest available magnitude with kappa1 * v <= tau
        const auto& a = axes[axis];
        const double cap = tau / cw.kappa1;
        double best = 0.0;
        for (double v : positive ? a.pos : a.neg)
            if (v <= cap) best = std::max(best, v);
        const double ray_lo = positive ? a.pos_ray_lo : a.neg_ray_lo;
        const double ray_hi = positive ? a.pos_ray_hi : a.neg_ray_hi;
        if (ray_hi > ray_lo) {
            const double v = std::min(cap * (1.0 - 1e-12), ray_hi);
            if (v > ray_lo) best = std::max(best, v);
        }
        return best;  // 0 when the sign is unavailable
    };

    std::vector<Vec> marks;
    Vec q = start;
    int steps = 0;
    for (int i = 0; i < d; ++i) {
        while (true) {
            const double rem = target[i] - q[i];
            if (std::abs(rem) <= tau) break;
            if (++steps > budget) {
                result.failure = PlanFailure{PlanFailure::Kind::budget,
                                             "coordinate walk exceeded its step budget", q};
                return result;
            }
            const double sig = cw.sigma_i[i](q);
            const bool positive_mark = (rem > 0.0) == (sig > 0.0);
            const double v = pick_step(i, positive_mark);
            if (v <= 0.0) {
                result.failure = PlanFailure{
                    PlanFailure::Kind::structural,
                    "no support atom with the required sign on coordinate " + std::to_string(i),
                    q};
                return result;
            }
            Vec mark = basis(d, i, positive_mark ? v : -v);
            q = add(q, model.jump_coeff(q, mark));
            marks.push_back(std::move(mark));
        }
    }
    result.certificate = assemble(model, measure, start, target, eta_bar, marks, result);
    return result;
}

PlanResult plan_greedy_frame(const ModelSpec& model, const IntensityMeasure& measure,
                             const Vec& start, const Vec& target, double eta_bar, int budget,
                             std::optional<double> eta_opt) {
    if (!model.frame || !model.sigma_matrix)
        throw std::invalid_argument("plan_greedy_frame needs frame data and a matrix coefficient");
    if (!(eta_bar > 0.0)) throw std::invalid_argument("eta_bar must be positive");
    PlanResult result;
    const FrameData& fd = *model.frame;
    const double eta = eta_opt.value_or(0.25 * eta_bar);
    if (!(eta > 0.0 && eta < 0.5 * eta_bar))
        throw std::invalid_argument("eta must lie in (0, eta_bar/2)");
    const double stop_rho = eta / 8.0;

    // available mark lengths along each frame direction
    struct RadialAvail {
        double ray_lo = kInf, ray_hi = 0.0;
        std::vector<double> discrete;
    };
    std::vector<RadialAvail> avail(fd.frame.size());
    const auto& sup = measure.support();
    for (std::size_t k = 0; k < fd.frame.size(); ++k) {
        for (const auto& ray : sup.rays) {
            if (dot(ray.direction, fd.frame[k]) >= 1.0 - 1e-9) {
                avail[k].ray_lo = std::min(avail[k].ray_lo, ray.r_lo);
                avail[k].ray_hi = std::max(avail[k].ray_hi, ray.r_hi);
            }
        }
        for (const auto& p : sup.points) {
            const double c = norm(p);
            if (c > 0.0 && dot(scaled(p, 1.0 / c), fd.frame[k]) >= 1.0 - 1e-9)
                avail[k].discrete.push_back(c);
        }
        std::sort(avail[k].discrete.begin(), avail[k].discrete.end());
    }

    std::vector<Vec> marks;
    Vec q = start;
    bool stalled = false;
    for (int step = 0; dist(q, target) > stop_rho; ++step) {
        if (step >= budget) {
            result.failure =
                PlanFailure{PlanFailure::Kind::budget, "greedy walk exceeded its step budget", q};
            return result;
        }
        const double rho = dist(q, target);
        const Vec to_target = sub(target, q);
        const Mat sm = model.sigma_matrix(q);
        double varpi0 = -kInf;
        int i0 = -1;
        double r_dir = 0.0;
        for (std::size_t k = 0; k < fd.frame.size(); ++k) {
            const Vec pushed = mat_apply(sm, fd.frame[k]);
            const double len = norm(pushed);
            if (len <= 0.0) continue;
            const double c = dot(pushed, to_target) / (len * rho);
            if (c > varpi0 + 1e-15) {
                varpi0 = c;
                i0 = static_cast<int>(k);
                r_dir = len;
            }
        }
        if (i0 < 0 || varpi0 < fd.kappa) {
            result.failure = PlanFailure{
                PlanFailure::Kind::condition_violation,
                "frame covering fails: best cosine " + std::to_string(varpi0) +
                    " below kappa = " + std::to_string(fd.kappa),
                q};
            return result;
        }

        // exact minimizer of g(r) = rho^2 - 2 r rho varpi + r^2 over the
        // reachable lengths along direction i0
        const double r_star = rho * varpi0;
        const auto g = [&](double r) { return rho * rho - 2.0 * r * rho * varpi0 + r * r; };
        const RadialAvail& av = avail[static_cast<std::size_t>(i0)];
        double r0 = 0.0;
        bool clamped = false;
        double mark_len = 0.0;
        if (av.ray_hi > av.ray_lo) {
            const double hi_len = av.ray_hi * r_dir;
            r0 = std::min(r_star, hi_len);
            clamped = r_star > hi_len;
            mark_len = r0 / r_dir;
        }
        for (double c : av.discrete) {
            const double r = c * r_dir;
            if (mark_len == 0.0 || g(r) < g(r0)) {
                r0 = r;
                mark_len = c;
                clamped = false;
            }
        }
        if (mark_len <= 0.0) {
            result.failure = PlanFailure{PlanFailure::Kind::structural,
                                         "no support along the chosen frame direction", q};
            return result;
        }
        if (!(g(r0) < rho * rho * (1.0 - 1e-15))) {
            stalled = true;  // discrete radii cannot improve; rely on the slack
            break;
        }

        Vec mark = scaled(fd.frame[static_cast<std::size_t>(i0)], mark_len);
        Vec q_next = add(q, model.jump_coeff(q, mark));
        GreedyStep diag;
        diag.rho = rho;
        diag.varpi = varpi0;
        diag.r0 = r0;
        diag.clamped = clamped;
        diag.big_case = rho * fd.kappa > 1.0 / fd.lambda_bound;
        diag.g_value = norm2(sub(target, q_next));
        diag.direction = i0;
        result.greedy_steps.push_back(diag);
        marks.push_back(std::move(mark));
        q = std::move(q_next);
    }
    (void)stalled;
    result.certificate = assemble(model, measure, start, target, eta_bar, marks, result);
    return result;
}

PlanResult plan_auto(const ModelSpec& model, const IntensityMeasure& measure, const Vec& start,
                     const Vec& target, double eta_bar, int budget) {
    if (model.frame && model.sigma_matrix)
        return plan_greedy_frame(model, measure, start, target, eta_bar, budget);
    if (model.coordwise) return plan_coordinatewise(model, measure, start, target, eta_bar, budget);
    if (model.has_tag(ModelTag::additive))
        return plan_additive(model, measure, start, target, eta_bar, std::min(budget, 64));
    if (model.sigma_matrix) return plan_one_step_inverse(model, measure, start, target, eta_bar);
    throw std::invalid_argument("model '" + model.name + "' matches no planner");
}

VerifyReport verify_certificate(const JumpChainCertificate& cert, const ModelSpec& model,
                                const IntensityMeasure& measure, long long samples,
                                std::uint64_t seed) {
    VerifyReport report;
    const StructuralCheck sc = check_certificate_structure(cert, model, measure);
    report.structural_pass = sc.pass;
    report.structural_failure = sc.failure;
    if (!sc.pass) return report;

    const std::size_t n = cert.marks.size();
    report.samples_per_step = samples;

    report.deterministic_available = model.lipschitz.has_value();
    if (report.deterministic_available) {
        report.deterministic_pass = true;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec mapped = add(cert.states[i], model.jump_coeff(cert.states[i], cert.marks[i]));
            const double defect = dist(mapped, cert.states[i + 1]);
            const StepBounds b =
                declared_bounds(*model.lipschitz, cert.marks[i], cert.mark_radii[i]);
            const double lhs =
                cert.state_radii[i] * b.growth + cert.mark_radii[i] * b.lz;
            if (!(lhs <= cert.state_radii[i + 1] - defect)) {
                report.deterministic_pass = false;
                break;
            }
        }
    }

    report.sampled_pass = true;
    Rng rng(seed);
    for (std::size_t i = 0; i < n && report.sampled_pass; ++i) {
        for (long long s = 0; s < samples; ++s) {
            const Vec q = rng.uniform_in_ball(cert.states[i], cert.state_radii[i]);
            const Vec l = rng.uniform_in_ball(cert.marks[i], cert.mark_radii[i]);
            const Vec landed = add(q, model.jump_coeff(q, l));
            const double dd = dist(landed, cert.states[i + 1]);
            if (!(dd < cert.state_radii[i + 1])) {
                report.sampled_pass = false;
                report.witness = VerifyWitness{static_cast<int>(i), q, l, dd};
                break;
            }
        }
    }

    report.pass = report.structural_pass && report.sampled_pass &&
                  (!report.deterministic_available || report.deterministic_pass);
    return report;
}

double probe_frame_covering(const ModelSpec& model, int n_probes, std::uint64_t seed) {
    if (!model.frame || !model.sigma_matrix)
        throw std::invalid_argument("frame probing needs frame data and a matrix coefficient");
    Rng rng(seed);
    double worst = kInf;
    for (int p = 0; p < n_probes; ++p) {
        const Vec x = scaled(rng.normal_vec(model.dimension), 2.0);
        const Vec y = rng.unit_vec(model.dimension);
        const Mat sm = model.sigma_matrix(x);
        double best = -kInf;
        for (const auto& f : model.frame->frame) {
            const Vec pushed = mat_apply(sm, f);
            const double len = norm(pushed);
            if (len <= 0.0) continue;
            best = std::max(best, dot(pushed, y) / len);
        }
        worst = std::min(worst, best);
    }
    return worst;
}

}  // namespace jumpreach
