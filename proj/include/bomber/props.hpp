#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bomber/engine.hpp"
#include "bomber/grid.hpp"

namespace bomber {

inline constexpr double kTp2Tolerance = 1e-9;

struct Tp2Report {
    bool holds = true;
    double worst_minor = std::numeric_limits<double>::infinity();  // most negative normalized minor
    std::size_t i = 0;  // row pair (i, i2), column pair (j, j2) of the worst minor
    std::size_t j = 0;
    std::size_t i2 = 1;
    std::size_t j2 = 1;
    double tol = kTp2Tolerance;
};

namespace detail {

/// (Q(i2,j2) Q(i,j) - Q(i2,j) Q(i,j2)) / max(|products|, 1e-300).
template <class Grid>
double normalized_minor(const Grid& q, std::size_t i, std::size_t i2, std::size_t j, std::size_t j2) {
    const double diag = q(i2, j2) * q(i, j);
    const double anti = q(i2, j) * q(i, j2);
    const double scale = std::max({std::abs(diag), std::abs(anti), 1e-300});
    return (diag - anti) / scale;
}

inline void consider(Tp2Report& rep, double m, std::size_t i, std::size_t i2, std::size_t j, std::size_t j2) {
    // Strict comparison keeps the first location in scan order on ties.
    if (m < rep.worst_minor) {
        rep.worst_minor = m;
        rep.i = i;
        rep.i2 = i2;
        rep.j = j;
        rep.j2 = j2;
    }
}

}  // namespace detail

/// Every 2x2 minor over all row pairs i < i2 and column pairs j < j2.
inline Tp2Report check_tp2_all_pairs(const ValueField& q, double tol = kTp2Tolerance) {
    Tp2Report rep;
    rep.tol = tol;
    for (std::size_t i = 0; i < q.nx(); ++i)
        for (std::size_t i2 = i + 1; i2 < q.nx(); ++i2)
            for (std::size_t j = 0; j < q.nt(); ++j)
                for (std::size_t j2 = j + 1; j2 < q.nt(); ++j2)
                    detail::consider(rep, detail::normalized_minor(q, i, i2, j, j2), i, i2, j, j2);
    rep.holds = rep.worst_minor >= -tol;
    return rep;
}

/// TP2 check by adjacent minors. For a strictly positive kernel, adjacent
/// minors >= 0 imply all minors >= 0 (log-supermodularity chains). Rows and
/// columns containing zeros break that chain, so every minor touching one of
/// them is checked explicitly; the adjacent check then runs over the
/// remaining strictly positive rows and columns.
inline Tp2Report check_tp2(const ValueField& q, double tol = kTp2Tolerance) {
    Tp2Report rep;
    rep.tol = tol;
    const std::size_t nx = q.nx();
    const std::size_t nt = q.nt();

    std::vector<bool> zero_row(nx, false), zero_col(nt, false);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < nt; ++j)
            if (!(q(i, j) > 0.0)) zero_row[i] = zero_col[j] = true;

    std::vector<std::size_t> rows, cols;
    for (std::size_t i = 0; i < nx; ++i)
        if (!zero_row[i]) rows.push_back(i);
    for (std::size_t j = 0; j < nt; ++j)
        if (!zero_col[j]) cols.push_back(j);

    for (std::size_t a = 0; a + 1 < rows.size(); ++a)
        for (std::size_t b = 0; b + 1 < cols.size(); ++b)
            detail::consider(rep, detail::normalized_minor(q, rows[a], rows[a + 1], cols[b], cols[b + 1]), rows[a],
                             rows[a + 1], cols[b], cols[b + 1]);

    const bool any_zero = rows.size() < nx || cols.size() < nt;
    if (any_zero) {
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t i2 = i + 1; i2 < nx; ++i2)
                for (std::size_t j = 0; j < nt; ++j)
                    for (std::size_t j2 = j + 1; j2 < nt; ++j2) {
                        if (!(zero_row[i] || zero_row[i2] || zero_col[j] || zero_col[j2])) continue;
                        detail::consider(rep, detail::normalized_minor(q, i, i2, j, j2), i, i2, j, j2);
                    }
    }
    if (rep.worst_minor == std::numeric_limits<double>::infinity()) rep.worst_minor = 0.0;
    rep.holds = rep.worst_minor >= -tol;
    return rep;
}

/// Column-wise shape of a field along x.
struct ColumnShapeReport {
    bool holds = true;
    double worst = -std::numeric_limits<double>::infinity();  // largest normalized second difference
    std::size_t i = 0;                                        // center node of the worst second difference
    std::size_t j = 0;
    double tol = 0.0;
    std::size_t skipped = 0;  // triples left out because a value was not positive (log check only)
};

namespace detail {

template <class Transform>
ColumnShapeReport column_second_differences(const ValueField& q, double tol, bool log_scale, Transform tr) {
    ColumnShapeReport rep;
    rep.tol = tol;
    for (std::size_t j = 0; j < q.nt(); ++j) {
        double scale = 0.0;
        for (std::size_t i = 0; i < q.nx(); ++i)
            if (!log_scale || q(i, j) > 0.0) scale = std::max(scale, std::abs(tr(q(i, j))));
        if (log_scale) scale = std::max(scale, 1.0);
        if (scale == 0.0) scale = 1.0;
        for (std::size_t i = 1; i + 1 < q.nx(); ++i) {
            if (log_scale && !(q(i - 1, j) > 0.0 && q(i, j) > 0.0 && q(i + 1, j) > 0.0)) {
                ++rep.skipped;
                continue;
            }
            const double d2 = (tr(q(i + 1, j)) - 2.0 * tr(q(i, j)) + tr(q(i - 1, j))) / scale;
            if (d2 > rep.worst) {
                rep.worst = d2;
                rep.i = i;
                rep.j = j;
            }
        }
    }
    if (rep.worst == -std::numeric_limits<double>::infinity()) rep.worst = 0.0;
    rep.holds = rep.worst <= tol;
    return rep;
}

}  // namespace detail

/// Second differences of log Q along x, normalized by max(1, max |log Q|) of
/// the column. Triples touching a zero are skipped and counted.
inline ColumnShapeReport check_logconcave_in_x(const ValueField& q, double tol = 1e-9) {
    return detail::column_second_differences(q, tol, true, [](double v) { return std::log(v); });
}

/// Second differences of Q along x, normalized by max |Q| of the column.
inline ColumnShapeReport check_concave_in_x(const ValueField& q, double tol = 1e-9) {
    return detail::column_second_differences(q, tol, false, [](double v) { return v; });
}

struct BoundsReport {
    bool holds = true;
    double worst_excess = 0.0;  // largest amount by which a node leaves its envelope
    std::size_t i = 0;
    std::size_t j = 0;
    double slack = 1e-9;
};

/// Bomber: e^{-t} <= P <= 1. Fighter kinds: 0 <= N <= t.
inline BoundsReport check_bounds(const ValueField& field, const ModelKind& kind, double slack = 1e-9) {
    if (field.scaling() != Scaling::Raw) throw UsageError("check_bounds expects a raw field");
    BoundsReport rep;
    rep.slack = slack;
    const GridSpec& g = field.spec();
    for (std::size_t i = 0; i < g.nx; ++i) {
        for (std::size_t j = 0; j < g.nt; ++j) {
            const double v = field(i, j);
            const double lo = kind.is_bomber() ? std::exp(-g.t(j)) : 0.0;
            const double hi = kind.is_bomber() ? 1.0 : g.t(j);
            const double excess = std::max(lo - v, v - hi);
            if (excess > rep.worst_excess) {
                rep.worst_excess = excess;
                rep.i = i;
                rep.j = j;
            }
        }
    }
    rep.holds = rep.worst_excess <= slack;
    return rep;
}

// ---------------------------------------------------------------------------
// Randomized preservation checks

/// Outcome of one family of randomized trials.
struct PropertyOutcome {
    std::string name;
    int trials = 0;
    int failures = 0;
    int oracle_disagreements = 0;  // check_tp2 vs the all-pairs scan, or the kernel vs a direct sup
    std::string first_failure;     // reproducible description of the first failing instance
};

struct SuiteReport {
    std::uint64_t seed = 0;
    int trials = 0;
    std::vector<PropertyOutcome> outcomes;

    bool passed() const {
        return std::all_of(outcomes.begin(), outcomes.end(),
                           [](const PropertyOutcome& o) { return o.failures == 0 && o.oracle_disagreements == 0; });
    }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stream for trial `trial` of property `prop`, independent of trial order.
inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t prop, std::uint64_t trial) {
    return std::mt19937_64(splitmix64(splitmix64(seed ^ (prop << 56)) + trial));
}

inline GridSpec random_small_grid(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> n(2, 12);
    std::uniform_real_distribution<double> ext(0.5, 3.0);
    return GridSpec{ext(rng), ext(rng), n(rng), n(rng)};
}

/// e^{S} with S supermodular: S(i,j) = r_i + c_j + sum of nonnegative cross
/// increments over [1..i] x [1..j]. With `increasing`, r and c are also
/// nondecreasing so the kernel increases in both coordinates.
inline ValueField random_tp2(std::mt19937_64& rng, const GridSpec& g, bool increasing) {
    std::uniform_real_distribution<double> step(0.0, 0.6);
    std::uniform_real_distribution<double> any(-0.6, 0.6);
    std::bernoulli_distribution sparse(0.3);
    std::vector<double> r(g.nx), c(g.nt);
    for (std::size_t i = 0; i < g.nx; ++i) r[i] = (i ? r[i - 1] : 0.0) + (increasing ? step(rng) : any(rng));
    for (std::size_t j = 0; j < g.nt; ++j) c[j] = (j ? c[j - 1] : 0.0) + (increasing ? step(rng) : any(rng));

    std::vector<double> cross(g.size(), 0.0);
    for (std::size_t i = 1; i < g.nx; ++i)
        for (std::size_t j = 1; j < g.nt; ++j) {
            const double d = sparse(rng) ? 0.0 : step(rng);
            cross[i * g.nt + j] = d + cross[(i - 1) * g.nt + j] + cross[i * g.nt + j - 1] -
                                  cross[(i - 1) * g.nt + j - 1];
        }
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.nx; ++i)
        for (std::size_t j = 0; j < g.nt; ++j) v[i * g.nt + j] = std::exp(r[i] + c[j] + cross[i * g.nt + j]);
    return ValueField(g, Scaling::ExpRescaled, std::move(v));
}

/// Concave sequence: integral of random nonincreasing slopes.
inline std::vector<double> random_concave(std::mt19937_64& rng, std::size_t n, double first_slope_max) {
    std::uniform_real_distribution<double> start(-first_slope_max, first_slope_max);
    std::uniform_real_distribution<double> drop(0.0, 0.5);
    std::uniform_real_distribution<double> level(-1.0, 1.0);
    std::vector<double> v(n);
    double slope = start(rng);
    v[0] = level(rng);
    for (std::size_t i = 1; i < n; ++i) {
        v[i] = v[i - 1] + slope;
        slope -= drop(rng);
    }
    return v;
}

/// Positive log-concave sequence, nondecreasing as ammunition samples are.
inline std::vector<double> random_logconcave_ammo(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> slope0(0.0, 1.5);
    std::uniform_real_distribution<double> drop(0.0, 0.5);
    std::uniform_real_distribution<double> level(-3.0, 0.0);
    std::vector<double> v(n);
    double lg = level(rng);
    double slope = slope0(rng);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = std::exp(lg);
        lg += std::max(slope, 0.0);
        slope -= drop(rng);
    }
    return v;
}

inline std::string describe(const ValueField& q) {
    std::ostringstream os;
    os.precision(17);
    os << "grid " << to_string(q.spec()) << " values [";
    for (std::size_t n = 0; n < q.values().size(); ++n) os << (n ? "," : "") << q.values()[n];
    os << ']';
    return os.str();
}

template <class Vec>
std::string describe_vec(const char* name, const Vec& v) {
    std::ostringstream os;
    os.precision(17);
    os << name << " [";
    for (std::size_t n = 0; n < v.size(); ++n) os << (n ? "," : "") << v[n];
    os << ']';
    return os.str();
}

inline void score_tp2(PropertyOutcome& out, const ValueField& q, std::uint64_t seed, int trial,
                      const std::string& instance) {
    const auto fast = check_tp2(q);
    const auto full = check_tp2_all_pairs(q);
    const bool failed = !fast.holds;
    if (fast.holds != full.holds) ++out.oracle_disagreements;
    if (failed) ++out.failures;
    if ((failed || fast.holds != full.holds) && out.first_failure.empty()) {
        std::ostringstream os;
        os << "seed=" << seed << " trial=" << trial << " worst_minor=" << fast.worst_minor << " " << instance;
        out.first_failure = os.str();
    }
}

}  // namespace detail

/// Randomized checks of the preservation facts behind the TP2 and
/// concavity results, on grids of at most 12x12:
///   tp2_product        Q, R TP2            => Q.R TP2
///   tp2_plus_one       Q TP2, increasing   => Q + 1 TP2
///   tp2_supconv        a log-concave, Q TP2 => a (x) Q TP2 (Bomber case)
///   concave_supconv    f, g concave        => max_k f(k) + g(i-k) concave
/// Each trial also compares the adjacent-minor verdict against the all-pairs
/// scan (or, for the additive case, the kernel against a direct double loop).
inline SuiteReport property_suite(std::uint64_t seed, int trials) {
    if (trials < 1) throw UsageError("property_suite needs at least one trial");
    SuiteReport rep{seed, trials, {}};

    PropertyOutcome product;
    product.name = "tp2_product";
    PropertyOutcome plus_one;
    plus_one.name = "tp2_plus_one";
    PropertyOutcome supconv;
    supconv.name = "tp2_supconv";
    PropertyOutcome concave;
    concave.name = "concave_supconv";

    for (int t = 0; t < trials; ++t) {
        {
            auto rng = detail::trial_rng(seed, 0, t);
            const auto g = detail::random_small_grid(rng);
            const auto q = detail::random_tp2(rng, g, false);
            const auto r = detail::random_tp2(rng, g, false);
            std::vector<double> v(g.size());
            for (std::size_t n = 0; n < v.size(); ++n) v[n] = q.values()[n] * r.values()[n];
            const ValueField prod(g, Scaling::ExpRescaled, std::move(v));
            ++product.trials;
            detail::score_tp2(product, prod, seed, t, detail::describe(prod));
        }
        {
            auto rng = detail::trial_rng(seed, 1, t);
            const auto g = detail::random_small_grid(rng);
            const auto q = detail::random_tp2(rng, g, true);
            std::vector<double> v(q.values().begin(), q.values().end());
            for (double& x : v) x += 1.0;
            const ValueField shifted(g, Scaling::ExpRescaled, std::move(v));
            ++plus_one.trials;
            detail::score_tp2(plus_one, shifted, seed, t, detail::describe(q));
        }
        {
            auto rng = detail::trial_rng(seed, 2, t);
            const auto g = detail::random_small_grid(rng);
            const auto q = detail::random_tp2(rng, g, false);
            const auto a = detail::random_logconcave_ammo(rng, g.nx);
            std::vector<double> v(g.size());
            for (std::size_t j = 0; j < g.nt; ++j) {
                const auto col = apply_otimes(ModelKind::bomber(), a, q, j);
                for (std::size_t i = 0; i < g.nx; ++i) v[i * g.nt + j] = col.value[i];
            }
            const ValueField conv(g, Scaling::ExpRescaled, std::move(v));
            ++supconv.trials;
            detail::score_tp2(supconv, conv, seed, t, detail::describe_vec("a", a) + " Q " + detail::describe(q));
        }
        {
            auto rng = detail::trial_rng(seed, 3, t);
            std::uniform_int_distribution<std::size_t> len(3, 12);
            const std::size_t n = len(rng);
            auto f = detail::random_concave(rng, n, 1.0);
            auto g = detail::random_concave(rng, n, 1.0);
            // Shift g so it can serve as a nonnegative field column.
            const double lift = -std::min(0.0, *std::min_element(g.begin(), g.end()));
            for (double& v : g) v += lift;
            // F1 at t = 0 is exactly the additive sup-convolution max_k f_k + g_{i-k}.
            const GridSpec grid{1.0, 1.0, n, 2};
            std::vector<double> qv(grid.size());
            for (std::size_t i = 0; i < n; ++i) qv[i * 2] = qv[i * 2 + 1] = g[i];
            const ValueField q(grid, Scaling::ExpRescaled, std::move(qv));
            const auto h = apply_otimes(ModelKind::invincible(), f, q, 0).value;

            bool direct_agrees = true;
            for (std::size_t i = 0; i < n; ++i) {
                double best = -std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k <= i; ++k) best = std::max(best, f[k] + g[i - k]);
                if (best != h[i]) direct_agrees = false;
            }
            double scale = 1.0;
            for (double v : h) scale = std::max(scale, std::abs(v));
            bool is_concave = true;
            for (std::size_t i = 1; i + 1 < n; ++i)
                if (h[i + 1] - 2.0 * h[i] + h[i - 1] > 1e-12 * scale) is_concave = false;

            ++concave.trials;
            if (!direct_agrees) ++concave.oracle_disagreements;
            if (!is_concave) ++concave.failures;
            if ((!direct_agrees || !is_concave) && concave.first_failure.empty()) {
                std::ostringstream os;
                os << "seed=" << seed << " trial=" << t << ' ' << detail::describe_vec("f", f) << ' '
                   << detail::describe_vec("g", g);
                concave.first_failure = os.str();
            }
        }
    }
    rep.outcomes = {product, plus_one, supconv, concave};
    return rep;
}

}  // namespace bomber
