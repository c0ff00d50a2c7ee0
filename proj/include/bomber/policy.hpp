#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "bomber/engine.hpp"
#include "bomber/errors.hpp"
#include "bomber/grid.hpp"
#include "bomber/model.hpp"

namespace bomber {

/// Minimal optimal spend K(x_i, t_j) as a number of x-cells, plus the band of
/// spends whose objective lies within 10x the tie slack of the maximum. The
/// band is what the monotonicity checks use to excuse single-cell jitter.
class PolicyField {
public:
    PolicyField() = default;

    /// Policy without tie information (band collapses to the index itself).
    PolicyField(GridSpec spec, std::vector<std::size_t> k_index)
        : PolicyField(spec, k_index, k_index, k_index) {}

    PolicyField(GridSpec spec, std::vector<std::size_t> k_index, std::vector<std::size_t> near_lo,
                std::vector<std::size_t> near_hi)
        : spec_(spec), k_(std::move(k_index)), lo_(std::move(near_lo)), hi_(std::move(near_hi)) {
        spec_.validate();
        if (k_.size() != spec_.size() || lo_.size() != spec_.size() || hi_.size() != spec_.size()) {
            throw DimensionError("policy vectors do not match grid size");
        }
        for (std::size_t i = 0; i < spec_.nx; ++i) {
            for (std::size_t j = 0; j < spec_.nt; ++j) {
                const std::size_t n = i * spec_.nt + j;
                if (k_[n] > i || hi_[n] > i) throw DomainError("policy spends more than the stock");
                if (lo_[n] > k_[n] || hi_[n] < k_[n]) throw DomainError("near-tie band must contain k");
            }
        }
    }

    /// Builds a policy from a rule k(i, j).
    template <class Rule>
    static PolicyField from_rule(const GridSpec& spec, Rule&& rule) {
        std::vector<std::size_t> k(spec.size());
        for (std::size_t i = 0; i < spec.nx; ++i)
            for (std::size_t j = 0; j < spec.nt; ++j) k[i * spec.nt + j] = rule(i, j);
        return PolicyField(spec, std::move(k));
    }

    const GridSpec& spec() const { return spec_; }
    std::size_t k_index(std::size_t i, std::size_t j) const { return k_[i * spec_.nt + j]; }
    double k_value(std::size_t i, std::size_t j) const { return static_cast<double>(k_index(i, j)) * spec_.dx(); }
    std::size_t near_lo(std::size_t i, std::size_t j) const { return lo_[i * spec_.nt + j]; }
    std::size_t near_hi(std::size_t i, std::size_t j) const { return hi_[i * spec_.nt + j]; }

    bool near_optimal(std::size_t i, std::size_t j, std::size_t k) const {
        return k >= near_lo(i, j) && k <= near_hi(i, j);
    }

    /// The tie slack the policy was extracted with (0 for hand-built policies).
    double tie_slack() const { return tie_slack_; }
    void set_tie_slack(double s) { tie_slack_ = s; }

private:
    GridSpec spec_{};
    std::vector<std::size_t> k_, lo_, hi_;
    double tie_slack_ = 0.0;
};

namespace detail {

/// Encounter-time objective in the raw frame: what the encounter is worth
/// when spending a[k] from stock i at remaining time t_j.
inline double policy_objective(const ModelKind& kind, double a, double survive, double v) {
    switch (kind.which) {
        case ModelKind::Case::Bo: return a * v;
        case ModelKind::Case::F0: return a * (1.0 + v);
        case ModelKind::Case::F1: return a + v;
        case ModelKind::Case::Fu: return a + survive * v;
    }
    return 0.0;
}

}  // namespace detail

/// K(x,t) from a solved raw field: the smallest grid spend attaining the
/// maximum of the kind's encounter objective, up to kTieSlack.
inline PolicyField extract_policy(const ModelKind& kind, const AmmoFunction& f, const ValueField& field) {
    if (field.scaling() != Scaling::Raw) {
        throw UsageError("extract_policy expects a raw (P or N) field");
    }
    const GridSpec& g = field.spec();
    const auto a = sample_ammo(f, g);
    const auto survive = detail::survival_weights(kind, a);

    std::vector<std::size_t> k(g.size()), lo(g.size()), hi(g.size());
    std::vector<double> obj(g.nx);
    for (std::size_t j = 0; j < g.nt; ++j) {
        for (std::size_t i = 0; i < g.nx; ++i) {
            double best = -1.0;
            for (std::size_t s = 0; s <= i; ++s) {
                obj[s] = detail::policy_objective(kind, a[s], survive.empty() ? 0.0 : survive[s], field(i - s, j));
                best = std::max(best, obj[s]);
            }
            const double tie = kTieSlack * (1.0 + std::abs(best));
            const double floor = best - tie;
            const double near = best - 10.0 * tie;
            std::size_t kmin = 0;
            while (obj[kmin] < floor) ++kmin;
            std::size_t nlo = 0;
            while (obj[nlo] < near) ++nlo;
            std::size_t nhi = i;
            while (obj[nhi] < near) --nhi;
            const std::size_t n = i * g.nt + j;
            k[n] = kmin;
            lo[n] = nlo;
            hi[n] = nhi;
        }
    }
    PolicyField p(g, std::move(k), std::move(lo), std::move(hi));
    p.set_tie_slack(kTieSlack);
    return p;
}

enum class Conjecture { A, B, C };

inline const char* to_string(Conjecture c) {
    switch (c) {
        case Conjecture::A: return "A";
        case Conjecture::B: return "B";
        case Conjecture::C: return "C";
    }
    return "?";
}

struct Violation {
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t cells = 0;
    bool excused = false;  // single cell, and the two nodes are near-tied
};

struct MonotonicityReport {
    Conjecture conjecture = Conjecture::A;
    bool holds = true;
    std::vector<Violation> violations;
    std::size_t worst_cells = 0;      // over all violations, excused or not
    std::size_t unexcused = 0;
    double tie_slack = 0.0;
};

namespace detail {

// A break between nodes p and q is excused when it is a single cell and
// either node could switch to the other's spend without leaving its
// near-tie band (which would restore monotonicity).
inline void record(MonotonicityReport& rep, const PolicyField& pol, std::size_t pi, std::size_t pj,
                   std::size_t alt_p, std::size_t qi, std::size_t qj, std::size_t alt_q, std::size_t cells) {
    Violation v{pi, pj, cells, false};
    if (cells <= 1) {
        const bool p_ok = alt_p <= pi && pol.near_optimal(pi, pj, alt_p);
        const bool q_ok = alt_q <= qi && pol.near_optimal(qi, qj, alt_q);
        v.excused = p_ok || q_ok;
    }
    rep.worst_cells = std::max(rep.worst_cells, cells);
    if (!v.excused) ++rep.unexcused;
    rep.violations.push_back(v);
}

inline MonotonicityReport finish(MonotonicityReport rep, const PolicyField& p) {
    rep.holds = rep.unexcused == 0;
    rep.tie_slack = p.tie_slack();
    return rep;
}

}  // namespace detail

/// [A]: k_index(i, .) nonincreasing in t for every i.
inline MonotonicityReport check_A(const PolicyField& p) {
    MonotonicityReport rep;
    rep.conjecture = Conjecture::A;
    const GridSpec& g = p.spec();
    for (std::size_t i = 0; i < g.nx; ++i) {
        for (std::size_t j = 0; j + 1 < g.nt; ++j) {
            const std::size_t kp = p.k_index(i, j);
            const std::size_t kq = p.k_index(i, j + 1);
            if (kq > kp) detail::record(rep, p, i, j, kq, i, j + 1, kp, kq - kp);
        }
    }
    return detail::finish(std::move(rep), p);
}

/// [B]: k_index(., j) nondecreasing in x for every j.
inline MonotonicityReport check_B(const PolicyField& p) {
    MonotonicityReport rep;
    rep.conjecture = Conjecture::B;
    const GridSpec& g = p.spec();
    for (std::size_t j = 0; j < g.nt; ++j) {
        for (std::size_t i = 0; i + 1 < g.nx; ++i) {
            const std::size_t kp = p.k_index(i, j);
            const std::size_t kq = p.k_index(i + 1, j);
            if (kq < kp) detail::record(rep, p, i, j, kq, i + 1, j, kp, kp - kq);
        }
    }
    return detail::finish(std::move(rep), p);
}

/// [C]: the held-back amount i - k_index(i, j) nondecreasing in x.
inline MonotonicityReport check_C(const PolicyField& p) {
    MonotonicityReport rep;
    rep.conjecture = Conjecture::C;
    const GridSpec& g = p.spec();
    for (std::size_t j = 0; j < g.nt; ++j) {
        for (std::size_t i = 0; i + 1 < g.nx; ++i) {
            const std::size_t hp = i - p.k_index(i, j);
            const std::size_t hq = i + 1 - p.k_index(i + 1, j);
            if (hq < hp) {
                // Equal holdings would need k(i+1) = k(i) + 1 or k(i) = k(i+1) - 1.
                detail::record(rep, p, i, j, p.k_index(i + 1, j) - 1, i + 1, j, p.k_index(i, j) + 1, hp - hq);
            }
        }
    }
    return detail::finish(std::move(rep), p);
}

/// CSV with header `x,t,k`, x-major, k as a resource amount.
inline void write_csv(std::ostream& os, const PolicyField& p) {
    const GridSpec& g = p.spec();
    const auto old_prec = os.precision(17);
    os << "x,t,k\n";
    for (std::size_t i = 0; i < g.nx; ++i)
        for (std::size_t j = 0; j < g.nt; ++j) os << g.x(i) << ',' << g.t(j) << ',' << p.k_value(i, j) << '\n';
    os.precision(old_prec);
}

}  // namespace bomber
