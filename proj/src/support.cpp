#include "jumpreach/support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace jumpreach {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Continued-fraction rationality probe: true when x is within tol of a
// fraction p/q with q <= q_max. A numeric stand-in for rationality of
// declared support points.
bool looks_rational(double x, long long q_max = 1000000, double tol = 1e-12) {
    x = std::abs(x);
    double frac = x;
    long long p_prev = 1, q_prev = 0, p_cur = 0, q_cur = 1;
    for (int it = 0; it < 64; ++it) {
        const double a_f = std::floor(frac);
        const long long a = static_cast<long long>(a_f);
        const long long p_next = a * p_cur + p_prev;
        const long long q_next = a * q_cur + q_prev;
        if (q_next > q_max || q_next <= 0) return false;
        p_prev = p_cur;
        q_prev = q_cur;
        p_cur = p_next;
        q_cur = q_next;
        if (std::abs(x - static_cast<double>(p_cur) / q_cur) <= tol * std::max(1.0, x))
            return true;
        const double rem = frac - a_f;
        if (rem < 1e-15) return false;
        frac = 1.0 / rem;
    }
    return false;
}

struct Sides {
    bool has_pos = false, has_neg = false;
    bool interval_pos = false, interval_neg = false;    // positive-length segments
    bool unbounded_pos = false, unbounded_neg = false;  // segment reaching +/- inf
    std::vector<double> pos_points, neg_points;
};

Sides classify_sides(const SupportDescription& sup) {
    Sides s;
    for (const auto& p : sup.points) {
        if (p[0] > 0.0) {
            s.has_pos = true;
            s.pos_points.push_back(p[0]);
        } else if (p[0] < 0.0) {
            s.has_neg = true;
            s.neg_points.push_back(p[0]);
        }
    }
    for (const auto& ray : sup.rays) {
        if (ray.r_hi <= ray.r_lo) continue;
        const bool pos = ray.direction[0] > 0.0;
        (pos ? s.has_pos : s.has_neg) = true;
        (pos ? s.interval_pos : s.interval_neg) = true;
        if (std::isinf(ray.r_hi)) (pos ? s.unbounded_pos : s.unbounded_neg) = true;
        // segment midpoint as a representative support point
        const double hi = std::isinf(ray.r_hi) ? ray.r_lo + 1.0 : ray.r_hi;
        const double rep = 0.5 * (ray.r_lo + hi) * (pos ? 1.0 : -1.0);
        (pos ? s.pos_points : s.neg_points).push_back(rep);
    }
    return s;
}

}  // namespace

SupportReport analyze_support_1d(const IntensityMeasure& measure) {
    if (measure.dimension() != 1)
        throw std::invalid_argument("support analysis applies to 1-D measures");
    SupportReport rep;
    const SupportDescription& sup = measure.support();
    const Sides sides = classify_sides(sup);

    auto set = [&rep](const std::string& name, TriState v, const std::string& basis) {
        rep.condition_results[name] = v;
        rep.condition_basis[name] = basis;
    };

    if (sup.dense) {
        set("dense_support", TriState::yes, "declared");
        rep.h0_dense = TriState::yes;
        return rep;
    }

    // (1) points of both signs and support points accumulating at zero
    set("both_signs_with_vanishing_points",
        (sides.has_pos && sides.has_neg && sup.accumulates_at_zero) ? TriState::yes
                                                                    : TriState::no,
        "declared");

    // (2) infinite total mass and points of both signs
    bool infinite_mass = !measure.total_mass_finite();
    set("infinite_mass_both_signs",
        (infinite_mass && sides.has_pos && sides.has_neg) ? TriState::yes : TriState::no,
        "verified");

    // (3) some support point whose negation is an accumulation point of the
    // support; only confirmable from declared segments
    bool accum_at_negation = false;
    for (const auto& ray : sup.rays) {
        if (ray.r_hi <= ray.r_lo) continue;
        const double lo = ray.direction[0] > 0.0 ? ray.r_lo : -ray.r_hi;
        const double hi = ray.direction[0] > 0.0 ? ray.r_hi : -ray.r_lo;
        for (double a : sides.pos_points)
            if (-a >= lo && -a <= hi) accum_at_negation = true;
        for (double a : sides.neg_points)
            if (-a >= lo && -a <= hi) accum_at_negation = true;
    }
    set("negated_point_accumulation",
        accum_at_negation ? TriState::yes
                          : (sup.rays.empty() ? TriState::no : TriState::inconclusive),
        "declared");

    // (4) ladder n*a + b_n with b_n unbounded above: needs a negative point
    // and a segment reaching +infinity
    set("unbounded_ladder",
        (sides.has_neg && sides.unbounded_pos) ? TriState::yes : TriState::inconclusive,
        "declared");

    // (5) positive Lebesgue mass on both sides
    set("two_sided_positive_length",
        (sides.interval_pos && sides.interval_neg) ? TriState::yes : TriState::no, "declared");

    // (6) a positive and a negative point with irrational ratio
    TriState irr = TriState::no;
    for (double a : sides.pos_points) {
        for (double b : sides.neg_points) {
            if (!looks_rational(a / b)) {
                irr = TriState::yes;
                rep.witness.push_back(Vec{a});
                rep.witness.push_back(Vec{b});
            }
        }
    }
    if (sides.pos_points.empty() || sides.neg_points.empty()) irr = TriState::no;
    set("irrational_ratio_pair", irr, "declared, continued-fraction probe");

    bool any_pass = false;
    for (const auto& [name, v] : rep.condition_results) any_pass = any_pass || v == TriState::yes;

    if (any_pass) {
        rep.h0_dense = TriState::yes;
        return rep;
    }

    // structural refutations
    if (!sides.has_pos || !sides.has_neg) {
        rep.h0_dense = TriState::no;
        rep.notes.push_back("support is one-sided: sums stay in a half-line");
        return rep;
    }
    if (sup.rays.empty() && !sup.points.empty()) {
        // all atoms pairwise commensurate => combinations live on a lattice
        bool lattice = true;
        const double ref = std::abs(sup.points.front()[0]);
        for (const auto& p : sup.points)
            if (!looks_rational(p[0] / ref)) lattice = false;
        if (lattice) {
            rep.h0_dense = TriState::no;
            rep.notes.push_back("atoms are commensurate: combinations live on a lattice");
            return rep;
        }
    }
    rep.h0_dense = TriState::inconclusive;
    return rep;
}

std::vector<Vec> JumpCombination::expanded() const {
    std::vector<Vec> out;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (int k = 0; k < multiplicities[i]; ++k) out.push_back(points[i]);
    return out;
}

namespace {

struct Node {
    Vec sum;
    int parent = -1;      // index into the previous layer
    int point_index = -1; // candidate point added at this step
};

bool structurally_unreachable(const std::vector<Vec>& candidates, const Vec& target, double tol) {
    if (candidates.empty()) return true;
    const std::size_t d = target.size();
    for (std::size_t i = 0; i < d; ++i) {
        bool all_nonneg = true, all_nonpos = true;
        for (const auto& c : candidates) {
            all_nonneg = all_nonneg && c[i] >= 0.0;
            all_nonpos = all_nonpos && c[i] <= 0.0;
        }
        if (all_nonneg && target[i] < -tol) return true;
        if (all_nonpos && target[i] > tol) return true;
    }
    return false;
}

}  // namespace

CombinationSearchResult search_jump_combination(const IntensityMeasure& measure,
                                                const Vec& target, double tol, int budget,
                                                int grid_per_ray, std::size_t frontier_cap) {
    if (!(tol > 0.0) || budget < 1)
        throw std::invalid_argument("search needs tol > 0 and budget >= 1");
    CombinationSearchResult res;

    if (measure.support().dense) {
        // every point is a support point; a single jump suffices
        JumpCombination combo;
        combo.points.push_back(target);
        combo.multiplicities.push_back(1);
        combo.value = target;
        combo.error = 0.0;
        combo.total_jumps = 1;
        res.combination = std::move(combo);
        return res;
    }

    const double max_norm = norm(target) + static_cast<double>(budget);
    std::vector<Vec> candidates = measure.support_points(max_norm, grid_per_ray);
    if (structurally_unreachable(candidates, target, tol)) {
        res.reason = InfeasibleReason::structural;
        return res;
    }

    const std::size_t n_cand = candidates.size();
    std::vector<std::vector<Node>> layers;
    layers.push_back({Node{zeros(static_cast<int>(target.size())), -1, -1}});
    bool truncated = false;

    for (int k = 1; k <= budget; ++k) {
        const auto& prev = layers.back();
        std::vector<Node> next;
        next.reserve(std::min(prev.size() * n_cand, frontier_cap + 1));
        for (int pi = 0; pi < static_cast<int>(prev.size()); ++pi) {
            // extend by candidates with index >= the last one used, so each
            // multiset is enumerated exactly once (non-decreasing indices)
            const int start = prev[pi].point_index < 0 ? 0 : prev[pi].point_index;
            for (int ci = start; ci < static_cast<int>(n_cand); ++ci) {
                Node node;
                node.sum = add(prev[pi].sum, candidates[ci]);
                node.parent = pi;
                node.point_index = ci;
                next.push_back(std::move(node));
            }
        }
        if (next.size() > frontier_cap) {
            truncated = true;
            std::nth_element(next.begin(), next.begin() + frontier_cap, next.end(),
                             [&](const Node& a, const Node& b) {
                                 return dist(a.sum, target) < dist(b.sum, target);
                             });
            next.resize(frontier_cap);
        }

        // collect hits in this layer; the first layer with a hit gives the
        // minimal total jump count
        std::vector<int> hits;
        for (int i = 0; i < static_cast<int>(next.size()); ++i)
            if (dist(next[i].sum, target) <= tol) hits.push_back(i);

        layers.push_back(std::move(next));

        if (!hits.empty()) {
            // reconstruct multiplicity vectors, break ties lexicographically
            std::vector<int> best_mult;
            int best_idx = -1;
            for (int h : hits) {
                std::vector<int> mult(n_cand, 0);
                int layer = static_cast<int>(layers.size()) - 1;
                int idx = h;
                while (layer > 0) {
                    const Node& nd = layers[layer][idx];
                    mult[nd.point_index] += 1;
                    idx = nd.parent;
                    --layer;
                }
                if (best_idx < 0 || mult < best_mult) {
                    best_mult = std::move(mult);
                    best_idx = h;
                }
            }
            JumpCombination combo;
            Vec value = zeros(static_cast<int>(target.size()));
            for (std::size_t ci = 0; ci < n_cand; ++ci) {
                if (best_mult[ci] == 0) continue;
                combo.points.push_back(candidates[ci]);
                combo.multiplicities.push_back(best_mult[ci]);
                combo.total_jumps += best_mult[ci];
                axpy(static_cast<double>(best_mult[ci]), candidates[ci], value);
            }
            combo.value = std::move(value);
            combo.error = dist(combo.value, target);
            res.combination = std::move(combo);
            res.search_truncated = truncated;
            return res;
        }
    }

    res.reason = InfeasibleReason::budget;
    res.search_truncated = truncated;
    return res;
}

BallSumSearchResult find_ball_sum_certificate(const IntensityMeasure& measure, const Vec& center,
                                              double radius, int budget) {
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    BallSumSearchResult out;
    BallSumCertificate cert;
    if (measure.support().dense && norm(center) <= 0.25 * radius) {
        // split a near-zero target into two honest nonzero jumps
        const Vec p = basis(static_cast<int>(center.size()), 0, std::max(1.0, radius));
        cert.points = {p, sub(center, p)};
        cert.sum = center;
        cert.defect = 0.0;
    } else {
        auto combo_res = search_jump_combination(measure, center, 0.5 * radius, budget);
        if (!combo_res.combination) {
            out.reason = combo_res.reason;
            return out;
        }
        const JumpCombination& combo = *combo_res.combination;
        cert.points = combo.expanded();
        cert.sum = combo.value;
        cert.defect = combo.error;
    }
    const std::size_t n = cert.points.size();
    const double slack = (radius - cert.defect) * (1.0 - 1e-9) / static_cast<double>(n);
    for (const auto& p : cert.points) cert.radii.push_back(std::min(slack, 0.5 * norm(p)));
    out.certificate = std::move(cert);
    return out;
}

double sphere_nondegeneracy(const IntensityMeasure& radial_measure, int n_probes,
                            std::uint64_t seed) {
    if (radial_measure.variant() != IntensityMeasure::Variant::radial_polar)
        throw std::invalid_argument("sphere non-degeneracy applies to radial-polar measures");
    const int d = radial_measure.dimension();
    std::vector<std::pair<Vec, double>> dirs;
    for (const auto& rd : radial_measure.radial_directions()) dirs.push_back({rd.u, rd.weight});
    Rng rng(seed);
    double worst = std::numeric_limits<double>::infinity();
    auto value_at = [&](const Vec& theta0) {
        double v = 0.0;
        for (const auto& [u, w] : dirs) v += w * std::abs(dot(theta0, u));
        return v;
    };
    if (d == 2) {
        const int grid = std::max(n_probes, 256);
        for (int k = 0; k < grid; ++k) {
            const double phi = 2.0 * M_PI * k / grid;
            worst = std::min(worst, value_at(Vec{std::cos(phi), std::sin(phi)}));
        }
    } else {
        for (int k = 0; k < n_probes; ++k) worst = std::min(worst, value_at(rng.unit_vec(d)));
    }
    return worst;
}

BallSumCheck verify_ball_sum_certificate(const BallSumCertificate& cert,
                                         const IntensityMeasure& measure, const Vec& center,
                                         double radius) {
    BallSumCheck check;
    if (cert.points.empty() || cert.points.size() != cert.radii.size()) {
        check.failure = "malformed certificate";
        return check;
    }
    Vec sum = zeros(static_cast<int>(center.size()));
    double radii_total = 0.0;
    for (std::size_t i = 0; i < cert.points.size(); ++i) {
        const Vec& a = cert.points[i];
        const double eta = cert.radii[i];
        if (!(eta > 0.0)) {
            check.failure = "nonpositive ball radius";
            return check;
        }
        if (norm(a) <= eta) {
            check.failure = "closed ball contains the origin";
            return check;
        }
        if (!(measure.mass_in_ball(a, eta) > 0.0)) {
            check.failure = "ball carries no intensity mass";
            return check;
        }
        axpy(1.0, a, sum);
        radii_total += eta;
    }
    const double defect = dist(sum, center);
    check.containment_slack = radius - defect - radii_total;
    if (check.containment_slack < 0.0) {
        check.failure = "Minkowski sum escapes the target ball";
        return check;
    }
    check.pass = true;
    return check;
}

}  // namespace jumpreach
