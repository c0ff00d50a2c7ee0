#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bomber/errors.hpp"
#include "bomber/grid_spec.hpp"

namespace bomber {

/// a(y) = 1 - (1-u) e^{-y}: survival when y units kill the attacker with
/// probability 1 - e^{-y} and a surviving attacker misses with probability u.
struct CanonicalBomber {
    double u = 0.0;
};

/// a(y) = 1 - e^{-y}.
struct CanonicalFighter {};

struct Knot {
    double y = 0.0;
    double value = 0.0;
};

/// Linear interpolation between knots, constant outside them. Values are
/// usually probabilities; larger values give a general bounded a with
/// kappa > 1, which the solver accepts with a warning.
struct PiecewiseLinear {
    std::vector<Knot> knots;
};

using AmmoFamily = std::variant<CanonicalBomber, CanonicalFighter, PiecewiseLinear>;

/// Per-encounter probability as a function of resource spent. Immutable.
class AmmoFunction {
public:
    static AmmoFunction bomber(double u) {
        if (!(u >= 0.0 && u <= 1.0)) {
            throw UsageError("bomber family needs u in [0,1]");
        }
        return AmmoFunction(CanonicalBomber{u}, 1.0);
    }

    static AmmoFunction fighter() { return AmmoFunction(CanonicalFighter{}, 1.0); }

    static AmmoFunction piecewise(std::vector<Knot> knots) {
        if (knots.empty()) {
            throw UsageError("piecewise family needs at least one knot");
        }
        for (std::size_t k = 0; k < knots.size(); ++k) {
            const Knot& kn = knots[k];
            if (!(kn.y >= 0.0) || !std::isfinite(kn.y)) {
                throw UsageError("piecewise knot positions must be finite and >= 0");
            }
            if (!(kn.value >= 0.0) || !std::isfinite(kn.value)) {
                throw UsageError("piecewise knot values must be finite and >= 0");
            }
            if (k > 0) {
                if (!(kn.y > knots[k - 1].y)) {
                    throw UsageError("piecewise knot positions must be strictly increasing");
                }
                if (kn.value < knots[k - 1].value) {
                    throw UsageError("piecewise knot values must be nondecreasing");
                }
            }
        }
        const double kappa = knots.back().value;
        return AmmoFunction(PiecewiseLinear{std::move(knots)}, kappa);
    }

    /// Constant a == c, expressed as a single-knot piecewise family.
    static AmmoFunction constant(double c) { return piecewise({{0.0, c}}); }

    double operator()(double y) const {
        if (!(y >= 0.0)) {
            throw DomainError("ammunition function evaluated at negative or NaN resource");
        }
        const double v = std::visit([y](const auto& fam) { return raw_eval(fam, y); }, family_);
        return std::clamp(v, 0.0, kappa_);
    }

    /// Supremum of a over [0, inf).
    double kappa() const { return kappa_; }
    const AmmoFamily& family() const { return family_; }

private:
    AmmoFunction(AmmoFamily fam, double kappa) : family_(std::move(fam)), kappa_(kappa) {}

    static double raw_eval(const CanonicalBomber& f, double y) {
        // u + (1-u)(1 - e^{-y}), written with expm1 to keep digits near y = 0.
        return f.u - (1.0 - f.u) * std::expm1(-y);
    }
    static double raw_eval(const CanonicalFighter&, double y) { return -std::expm1(-y); }
    static double raw_eval(const PiecewiseLinear& f, double y) {
        const auto& ks = f.knots;
        if (y <= ks.front().y) return ks.front().value;
        if (y >= ks.back().y) return ks.back().value;
        auto hi = std::upper_bound(ks.begin(), ks.end(), y,
                                   [](double v, const Knot& k) { return v < k.y; });
        auto lo = hi - 1;
        const double w = (y - lo->y) / (hi->y - lo->y);
        return lo->value + w * (hi->value - lo->value);
    }

    AmmoFamily family_;
    double kappa_;
};

inline double eval_ammo(const AmmoFunction& f, double y) { return f(y); }

/// Canonical textual form, parseable by parse_ammo.
inline std::string to_string(const AmmoFunction& f) {
    std::ostringstream os;
    os.precision(17);
    std::visit(
        [&os](const auto& fam) {
            using T = std::decay_t<decltype(fam)>;
            if constexpr (std::is_same_v<T, CanonicalBomber>) {
                os << "bomber:u=" << fam.u;
            } else if constexpr (std::is_same_v<T, CanonicalFighter>) {
                os << "fighter";
            } else {
                os << "piecewise:knots=";
                for (std::size_t k = 0; k < fam.knots.size(); ++k) {
                    if (k) os << ',';
                    os << fam.knots[k].y << ':' << fam.knots[k].value;
                }
            }
        },
        f.family());
    return os.str();
}

namespace detail {

inline double parse_double(std::string_view s, std::string_view what) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (s.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw UsageError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
    }
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::vector<Knot> parse_knots(std::string_view s) {
    std::vector<Knot> knots;
    for (auto item : split(s, ',')) {
        auto parts = split(item, ':');
        if (parts.size() != 2) {
            throw UsageError("knot must be y:value, got '" + std::string(item) + "'");
        }
        knots.push_back({parse_double(parts[0], "knot position"), parse_double(parts[1], "knot value")});
    }
    return knots;
}

inline AmmoFunction make_family(std::string_view family,
                                const std::vector<std::pair<std::string_view, std::string_view>>& kv) {
    auto lookup = [&kv](std::string_view key) -> const std::string_view* {
        for (const auto& [k, v] : kv)
            if (k == key) return &v;
        return nullptr;
    };
    auto reject_extra = [&kv](std::initializer_list<std::string_view> allowed) {
        for (const auto& [k, v] : kv) {
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
                throw UsageError("unknown ammo parameter '" + std::string(k) + "'");
            }
        }
    };
    if (family == "bomber") {
        reject_extra({"u"});
        const auto* u = lookup("u");
        if (!u) throw UsageError("bomber family requires u=...");
        return AmmoFunction::bomber(parse_double(*u, "u"));
    }
    if (family == "fighter") {
        reject_extra({});
        return AmmoFunction::fighter();
    }
    if (family == "piecewise") {
        reject_extra({"knots"});
        const auto* knots = lookup("knots");
        if (!knots) throw UsageError("piecewise family requires knots=...");
        return AmmoFunction::piecewise(parse_knots(*knots));
    }
    throw UsageError("unknown ammo family '" + std::string(family) + "'");
}

}  // namespace detail

/// Accepts `bomber:u=0.3`, `fighter`, `piecewise:knots=0:0.1,1:0.9`, and the
/// config-file form `family=bomber u=0.3`.
inline AmmoFunction parse_ammo(std::string_view text) {
    using detail::split;
    std::vector<std::pair<std::string_view, std::string_view>> kv;
    std::string_view family;
    if (text.rfind("family=", 0) == 0) {
        for (auto tok : split(text, ' ')) {
            if (tok.empty()) continue;
            const auto eq = tok.find('=');
            if (eq == std::string_view::npos) {
                throw UsageError("expected key=value, got '" + std::string(tok) + "'");
            }
            auto key = tok.substr(0, eq);
            auto val = tok.substr(eq + 1);
            if (key == "family") {
                family = val;
            } else {
                kv.emplace_back(key, val);
            }
        }
    } else {
        const auto colon = text.find(':');
        family = text.substr(0, colon);
        if (colon != std::string_view::npos) {
            std::string_view rest = text.substr(colon + 1);
            // knots= swallows the remainder since its value contains ',' and ':'.
            while (!rest.empty()) {
                const auto eq = rest.find('=');
                if (eq == std::string_view::npos) {
                    throw UsageError("expected key=value in '" + std::string(text) + "'");
                }
                auto key = rest.substr(0, eq);
                rest.remove_prefix(eq + 1);
                if (key == "knots") {
                    kv.emplace_back(key, rest);
                    break;
                }
                const auto comma = rest.find(',');
                kv.emplace_back(key, rest.substr(0, comma));
                if (comma == std::string_view::npos) break;
                rest.remove_prefix(comma + 1);
            }
        }
    }
    return detail::make_family(family, kv);
}

/// Sampled shape diagnostics of a(y) on the positive part of a probe grid.
struct ShapeReport {
    bool log_concave = true;
    bool strictly_log_concave = true;
    bool concave = true;
    bool strictly_concave = true;
    double worst_log_second_diff = -std::numeric_limits<double>::infinity();
    double worst_second_diff = -std::numeric_limits<double>::infinity();
    double log_tolerance = 0.0;
    double tolerance = 0.0;
    double strict_margin = 0.0;
    std::vector<double> not_assessable;  // probe points y where a(y) == 0
};

/// Second differences of log a and a over probe x-nodes with y > 0. Slack is
/// relative to the largest |log a| (resp. |a|); strictness requires every
/// second difference <= -strict_margin.
inline ShapeReport check_shape(const AmmoFunction& f, const GridSpec& probe, double rel_slack = 1e-9,
                               double strict_margin = 1e-12) {
    probe.validate();
    ShapeReport rep;
    rep.strict_margin = strict_margin;

    std::vector<double> a(probe.nx);
    for (std::size_t i = 0; i < probe.nx; ++i) a[i] = f(probe.x(i));

    double max_abs = 0.0;
    double max_abs_log = 0.0;
    for (std::size_t i = 1; i < probe.nx; ++i) {
        max_abs = std::max(max_abs, std::abs(a[i]));
        if (a[i] > 0.0) {
            max_abs_log = std::max(max_abs_log, std::abs(std::log(a[i])));
        } else {
            rep.not_assessable.push_back(probe.x(i));
        }
    }
    rep.tolerance = rel_slack * max_abs;
    rep.log_tolerance = rel_slack * max_abs_log;

    bool any_log = false;
    bool any_lin = false;
    for (std::size_t i = 2; i + 1 < probe.nx; ++i) {
        const double d2 = a[i + 1] - 2.0 * a[i] + a[i - 1];
        any_lin = true;
        rep.worst_second_diff = std::max(rep.worst_second_diff, d2);
        if (a[i - 1] > 0.0 && a[i] > 0.0 && a[i + 1] > 0.0) {
            any_log = true;
            const double l2 = std::log(a[i + 1]) - 2.0 * std::log(a[i]) + std::log(a[i - 1]);
            rep.worst_log_second_diff = std::max(rep.worst_log_second_diff, l2);
        }
    }
    if (any_lin) {
        rep.concave = rep.worst_second_diff <= rep.tolerance;
        rep.strictly_concave = rep.worst_second_diff <= -strict_margin;
    }
    if (any_log) {
        rep.log_concave = rep.worst_log_second_diff <= rep.log_tolerance;
        rep.strictly_log_concave = rep.worst_log_second_diff <= -strict_margin;
    }
    return rep;
}

}  // namespace bomber
