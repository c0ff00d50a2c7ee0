#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bomber/errors.hpp"
#include "bomber/grid.hpp"
#include "bomber/model.hpp"

namespace bomber {

/// Which recursion governs the value surface.
///   Bo  sup a(y) Q(x-y,t)                      (Bomber)
///   F0  sup a(y) [e^t + Q(x-y,t)]              (Frail Fighter)
///   F1  sup a(y) e^t + Q(x-y,t)                (Invincible Fighter)
///   Fu  sup a(y) e^t + [a(y) + u(1-a(y))] Q    (general Fighter)
struct ModelKind {
    enum class Case { Bo, F0, F1, Fu };

    Case which = Case::Bo;
    double u = 0.0;

    static ModelKind bomber() { return {Case::Bo, 0.0}; }
    static ModelKind frail() { return {Case::F0, 0.0}; }
    static ModelKind invincible() { return {Case::F1, 1.0}; }
    static ModelKind fighter(double u) {
        if (!(u >= 0.0 && u <= 1.0)) throw UsageError("fighter model needs u in [0,1]");
        return {Case::Fu, u};
    }

    bool is_bomber() const { return which == Case::Bo; }

    /// Miss-survival probability of the equivalent Fu case.
    double fighter_u() const {
        switch (which) {
            case Case::F0: return 0.0;
            case Case::F1: return 1.0;
            default: return u;
        }
    }
};

inline std::string to_string(const ModelKind& k) {
    switch (k.which) {
        case ModelKind::Case::Bo: return "bomber";
        case ModelKind::Case::F0: return "frail";
        case ModelKind::Case::F1: return "invincible";
        case ModelKind::Case::Fu: {
            std::ostringstream os;
            os.precision(17);
            os << "fu:u=" << k.u;
            return os.str();
        }
    }
    return "?";
}

/// `bomber`/`bo`, `frail`/`f0`, `invincible`/`f1`, `fu:u=<p>`.
inline ModelKind parse_model(std::string_view s) {
    if (s == "bomber" || s == "bo") return ModelKind::bomber();
    if (s == "frail" || s == "f0") return ModelKind::frail();
    if (s == "invincible" || s == "f1") return ModelKind::invincible();
    if (s.rfind("fu:u=", 0) == 0) return ModelKind::fighter(detail::parse_double(s.substr(5), "u"));
    throw UsageError("unknown model '" + std::string(s) + "'");
}

/// Relative slack under which two candidates count as tied.
inline constexpr double kTieSlack = 1e-12;

inline double tie_threshold(double best) { return best - kTieSlack * (1.0 + std::abs(best)); }

struct OtimesColumn {
    std::vector<double> value;
    std::vector<std::size_t> argmax;  // minimal maximizing spend index per node
};

namespace detail {

/// One column of (a (x) Q): out[i] = max over k <= i of the case candidate.
/// k is scanned in ascending order so the result does not depend on how
/// nodes are scheduled. `arg` may be empty when the maximizer is not needed.
inline void otimes_column(const ModelKind& kind, std::span<const double> a, std::span<const double> survive,
                          std::span<const double> q, double et, std::span<double> out,
                          std::span<std::size_t> arg) {
    const std::size_t nx = a.size();
    auto candidate = [&](std::size_t i, std::size_t k) {
        const double qv = q[i - k];
        switch (kind.which) {
            case ModelKind::Case::Bo: return a[k] * qv;
            case ModelKind::Case::F0: return a[k] * (et + qv);
            case ModelKind::Case::F1: return a[k] * et + qv;
            case ModelKind::Case::Fu: return a[k] * et + survive[k] * qv;
        }
        return 0.0;
    };
    for (std::size_t i = 0; i < nx; ++i) {
        double best = candidate(i, 0);
        for (std::size_t k = 1; k <= i; ++k) {
            const double c = candidate(i, k);
            if (c > best) best = c;
        }
        out[i] = best;
        if (!arg.empty()) {
            const double floor = tie_threshold(best);
            std::size_t k = 0;
            while (candidate(i, k) < floor) ++k;
            arg[i] = k;
        }
    }
}

inline std::vector<double> survival_weights(const ModelKind& kind, std::span<const double> a) {
    std::vector<double> s;
    if (kind.which == ModelKind::Case::Fu) {
        s.resize(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) s[k] = a[k] + kind.u * (1.0 - a[k]);
    }
    return s;
}

inline void require_rescaled(const ValueField& q) {
    if (q.scaling() != Scaling::ExpRescaled) {
        throw UsageError("operator expects an exp-rescaled field");
    }
}

}  // namespace detail

/// Column j of the sup-convolution (a (x) Q) in the rescaled frame, with the
/// minimal maximizing spend index at every x-node.
inline OtimesColumn apply_otimes(const ModelKind& kind, std::span<const double> a, const ValueField& q,
                                 std::size_t j) {
    if (a.size() != q.nx()) throw DimensionError("ammo samples and field disagree on nx");
    if (j >= q.nt()) throw DimensionError("t-node index out of range");
    const auto col = q.column(j);
    const auto survive = detail::survival_weights(kind, a);
    OtimesColumn out{std::vector<double>(q.nx()), std::vector<std::size_t>(q.nx())};
    detail::otimes_column(kind, a, survive, col, std::exp(q.spec().t(j)), out.value, out.argmax);
    return out;
}

/// G(Q)(x,t) = int_0^t (a (x) Q)(x,s) ds, plus 1 for the Bomber. The integral
/// is the cumulative composite trapezoid rule over t-nodes.
inline ValueField apply_G(const ModelKind& kind, std::span<const double> a, const ValueField& q) {
    detail::require_rescaled(q);
    const GridSpec& g = q.spec();
    if (a.size() != g.nx) throw DimensionError("ammo samples and field disagree on nx");

    const std::size_t nx = g.nx;
    const std::size_t nt = g.nt;
    const auto survive = detail::survival_weights(kind, a);

    // Column-major copies so each sup-convolution reads contiguous memory.
    std::vector<double> qcol(nx * nt);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < nt; ++j) qcol[j * nx + i] = q(i, j);

    std::vector<double> conv(nx * nt);
    for (std::size_t j = 0; j < nt; ++j) {
        detail::otimes_column(kind, a, survive, std::span<const double>(qcol).subspan(j * nx, nx),
                              std::exp(g.t(j)), std::span<double>(conv).subspan(j * nx, nx), {});
    }

    const double base = kind.is_bomber() ? 1.0 : 0.0;
    const double half_dt = 0.5 * g.dt();
    std::vector<double> out(nx * nt);
    for (std::size_t i = 0; i < nx; ++i) {
        double acc = 0.0;
        out[i * nt] = base;
        for (std::size_t j = 1; j < nt; ++j) {
            acc += half_dt * (conv[(j - 1) * nx + i] + conv[j * nx + i]);
            out[i * nt + j] = base + acc;
        }
    }
    return ValueField(g, Scaling::ExpRescaled, std::move(out));
}

/// Ceiling B(t) with Q <= B implying G(Q) <= B. Bomber: e^{kappa t}.
/// Fighter with alpha = (1-u) kappa + u: kappa t e^t when alpha = 1, else
/// kappa/(1-alpha) (e^t - e^{alpha t}).
inline double b_bound(const ModelKind& kind, double kappa, double t) {
    if (kind.is_bomber()) return std::exp(kappa * t);
    const double u = kind.fighter_u();
    const double alpha = (1.0 - u) * kappa + u;
    if (alpha == 1.0) return kappa * t * std::exp(t);
    // e^{alpha t} (e^{(1-alpha) t} - 1) / (1-alpha), stable as alpha -> 1.
    return kappa * std::exp(alpha * t) * std::expm1((1.0 - alpha) * t) / (1.0 - alpha);
}

inline ValueField bound_field(const ModelKind& kind, double kappa, const GridSpec& g) {
    std::vector<double> v(g.size());
    for (std::size_t j = 0; j < g.nt; ++j) {
        const double b = b_bound(kind, kappa, g.t(j));
        for (std::size_t i = 0; i < g.nx; ++i) v[i * g.nt + j] = b;
    }
    return ValueField(g, Scaling::ExpRescaled, std::move(v));
}

enum class Init { Zero, Bound, Sandwich };

inline const char* to_string(Init i) {
    switch (i) {
        case Init::Zero: return "zero";
        case Init::Bound: return "bound";
        case Init::Sandwich: return "sandwich";
    }
    return "?";
}

struct SolveOpts {
    double tol = 1e-10;
    int max_iter = 200;
    Init init = Init::Sandwich;
};

struct SolveReport {
    Init init = Init::Sandwich;
    int iterations = 0;
    std::vector<double> deltas;  // sup-norm change per iteration (max over both bounds for Sandwich)
    std::vector<double> gaps;    // ||upper - lower|| per iteration, Sandwich only
    double empirical_rate = 0.0;
    std::optional<double> sandwich_gap;
    bool converged = false;
    std::vector<std::string> warnings;
};

/// Median of deltas[m+1]/deltas[m] over m >= burn_in; 0 when there are none.
inline double empirical_rate(std::span<const double> deltas, std::size_t burn_in = 3) {
    std::vector<double> ratios;
    for (std::size_t m = burn_in; m + 1 < deltas.size(); ++m) {
        if (deltas[m] > 0.0) ratios.push_back(deltas[m + 1] / deltas[m]);
    }
    if (ratios.empty()) return 0.0;
    std::sort(ratios.begin(), ratios.end());
    const std::size_t n = ratios.size();
    return n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
}

struct Solution {
    ValueField field;  // exp-rescaled; the sandwich midpoint when init=Sandwich
    SolveReport report;
    std::optional<ValueField> lower;
    std::optional<ValueField> upper;
};

/// Fixed-point iteration of apply_G on a fixed grid.
///
/// With init=Sandwich the iteration runs from Q0 = 0 and from Q0 = B side by
/// side. Monotonicity of G keeps lower <= upper at every step, and the final
/// gap bounds the iteration error of the returned midpoint. The certificate
/// is relative to the discrete fixed point; it says nothing about the
/// distance between the grid solution and the continuum one.
inline Solution solve(const ModelKind& kind, const AmmoFunction& f, const GridSpec& spec,
                      const SolveOpts& opts = {}) {
    spec.validate();
    if (!(opts.tol > 0.0)) throw UsageError("tol must be positive");
    if (opts.max_iter < 1) throw UsageError("max_iter must be at least 1");

    const auto a = sample_ammo(f, spec);
    SolveReport rep;
    rep.init = opts.init;
    if (f.kappa() > 1.0) {
        rep.warnings.push_back("kappa > 1: values are not probabilities / expected counts");
    }

    const auto zero = ValueField::filled(spec, Scaling::ExpRescaled, 0.0);
    const auto ceiling = bound_field(kind, f.kappa(), spec);

    if (opts.init != Init::Sandwich) {
        ValueField cur = opts.init == Init::Zero ? zero : ceiling;
        for (int m = 0; m < opts.max_iter; ++m) {
            ValueField next = apply_G(kind, a, cur);
            const double d = sup_distance(next, cur);
            rep.deltas.push_back(d);
            cur = std::move(next);
            ++rep.iterations;
            if (d < opts.tol) {
                rep.converged = true;
                break;
            }
        }
        rep.empirical_rate = empirical_rate(rep.deltas);
        return Solution{std::move(cur), std::move(rep), std::nullopt, std::nullopt};
    }

    ValueField lo = zero;
    ValueField hi = ceiling;
    double gap = sup_distance(hi, lo);
    for (int m = 0; m < opts.max_iter; ++m) {
        ValueField lo_next = apply_G(kind, a, lo);
        ValueField hi_next = apply_G(kind, a, hi);
        const double d = std::max(sup_distance(lo_next, lo), sup_distance(hi_next, hi));

        const double scale = std::max(1.0, hi_next.sup_norm());
        gap = 0.0;
        auto lv = lo_next.values();
        auto hv = hi_next.values();
        for (std::size_t n = 0; n < lv.size(); ++n) {
            if (lv[n] > hv[n] + 1e-12 * scale) {
                throw ConsistencyError("sandwich order violated at iteration " + std::to_string(m + 1));
            }
            gap = std::max(gap, hv[n] - lv[n]);
        }
        rep.deltas.push_back(d);
        rep.gaps.push_back(gap);
        lo = std::move(lo_next);
        hi = std::move(hi_next);
        ++rep.iterations;
        if (d < opts.tol) {
            rep.converged = true;
            break;
        }
    }
    rep.sandwich_gap = gap;
    rep.empirical_rate = empirical_rate(rep.deltas);

    std::vector<double> mid(spec.size());
    auto lv = lo.values();
    auto hv = hi.values();
    for (std::size_t n = 0; n < mid.size(); ++n) mid[n] = 0.5 * (lv[n] + hv[n]);
    return Solution{ValueField(spec, Scaling::ExpRescaled, std::move(mid)), std::move(rep), std::move(lo),
                    std::move(hi)};
}

/// Q_1, ..., Q_count of the iteration started at `initial`.
inline std::vector<ValueField> iterates(const ModelKind& kind, const AmmoFunction& f, const ValueField& initial,
                                        int count) {
    detail::require_rescaled(initial);
    const auto a = sample_ammo(f, initial.spec());
    std::vector<ValueField> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    ValueField cur = initial;
    for (int m = 0; m < count; ++m) {
        cur = apply_G(kind, a, cur);
        out.push_back(cur);
    }
    return out;
}

}  // namespace bomber
