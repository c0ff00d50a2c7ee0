#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bomber/errors.hpp"
#include "bomber/model.hpp"
#include "bomber/policy.hpp"

namespace bomber {

/// Encounters arrive as a unit-rate Poisson process over the remaining
/// horizon t0; the aircraft starts with stock x0. Both must be grid nodes of
/// the policy being simulated.
struct SimConfig {
    std::size_t n_paths = 100000;
    std::uint64_t seed = 1;
    double x0 = 0.0;
    double t0 = 0.0;
};

struct SimResult {
    double estimate = 0.0;
    double std_err = 0.0;
    std::size_t n_paths = 0;
};

namespace detail {

/// Path-indexed stream: splitmix64 over (seed, path, draw counter). A path's
/// draws depend only on its index, so paths could run in any order.
class PathStream {
public:
    PathStream(std::uint64_t seed, std::uint64_t path) : key_(splitmix(seed ^ splitmix(path + 0x632be59bd9b4e019ULL))) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double exponential() { return -std::log1p(-uniform()); }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }
    std::uint64_t next() { return splitmix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Pairwise (tree) summation in a fixed order.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

inline std::size_t node_index(double v, double step, std::size_t n, const char* what) {
    const double r = v / step;
    const double k = std::round(r);
    if (!(v >= 0.0) || std::abs(r - k) > 1e-9 * std::max(1.0, r) || k > static_cast<double>(n - 1)) {
        throw UsageError(std::string(what) + " must lie on a grid node of the policy");
    }
    return static_cast<std::size_t>(k);
}

struct Start {
    std::size_t stock;
};

inline Start validate(const AmmoFunction& f, const PolicyField& p, const SimConfig& cfg) {
    if (cfg.n_paths < 1) throw UsageError("n_paths must be at least 1");
    if (f.kappa() > 1.0) throw UsageError("simulation needs a(y) to be a probability (kappa <= 1)");
    const GridSpec& g = p.spec();
    node_index(cfg.t0, g.dt(), g.nt, "t0");
    return Start{node_index(cfg.x0, g.dx(), g.nx, "x0")};
}

inline std::size_t time_node(double remaining, const GridSpec& g) {
    const double r = std::round(remaining / g.dt());
    return std::min(static_cast<std::size_t>(std::max(r, 0.0)), g.nt - 1);
}

inline SimResult summarize(const std::vector<double>& outcome) {
    const double n = static_cast<double>(outcome.size());
    const double mean = pairwise_sum(outcome) / n;
    std::vector<double> sq(outcome.size());
    for (std::size_t p = 0; p < outcome.size(); ++p) sq[p] = (outcome[p] - mean) * (outcome[p] - mean);
    const double var = outcome.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
    return SimResult{mean, std::sqrt(var / n), outcome.size()};
}

/// Runs one path. `encounter(spend, stream)` returns false when the
/// path ends; the stock is kept as a node index since spends are whole cells.
template <class Encounter>
void run_path(const PolicyField& p, const SimConfig& cfg, std::size_t stock, std::uint64_t path,
              Encounter&& encounter) {
    const GridSpec& g = p.spec();
    PathStream rng(cfg.seed, path);
    double remaining = cfg.t0;
    while (true) {
        remaining -= rng.exponential();
        if (remaining < 0.0) return;
        // Stock is always a node, so "largest node <= stock" is the stock itself.
        const std::size_t spend = std::min(p.k_index(stock, time_node(remaining, g)), stock);
        if (!encounter(spend, rng)) return;
        stock -= spend;
    }
}

}  // namespace detail

/// Fraction of paths on which the Bomber survives every encounter while
/// following the grid policy. Standard error is the binomial one.
inline SimResult simulate_bomber(const AmmoFunction& f, const PolicyField& p, const SimConfig& cfg) {
    const auto start = detail::validate(f, p, cfg);
    const double dx = p.spec().dx();
    std::vector<double> outcome(cfg.n_paths);
    for (std::size_t path = 0; path < cfg.n_paths; ++path) {
        bool alive = true;
        detail::run_path(p, cfg, start.stock, path, [&](std::size_t spend, detail::PathStream& rng) {
            alive = rng.uniform() < f(static_cast<double>(spend) * dx);
            return alive;
        });
        outcome[path] = alive ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(cfg.n_paths);
    const double mean = detail::pairwise_sum(outcome) / n;
    return SimResult{mean, std::sqrt(mean * (1.0 - mean) / n), cfg.n_paths};
}

/// Mean number of enemies destroyed. Per encounter: a hit with probability
/// a(y) (continue); otherwise continue unscored with probability u; otherwise
/// the Fighter is lost.
inline SimResult simulate_fighter(const AmmoFunction& f, double u, const PolicyField& p, const SimConfig& cfg) {
    if (!(u >= 0.0 && u <= 1.0)) throw UsageError("u must lie in [0,1]");
    const auto start = detail::validate(f, p, cfg);
    const double dx = p.spec().dx();
    std::vector<double> outcome(cfg.n_paths);
    for (std::size_t path = 0; path < cfg.n_paths; ++path) {
        double kills = 0.0;
        detail::run_path(p, cfg, start.stock, path, [&](std::size_t spend, detail::PathStream& rng) {
            const double a = f(static_cast<double>(spend) * dx);
            const double r = rng.uniform();
            if (r < a) {
                kills += 1.0;
                return true;
            }
            return r < a + u * (1.0 - a);
        });
        outcome[path] = kills;
    }
    return detail::summarize(outcome);
}

}  // namespace bomber
