#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bomber/errors.hpp"
#include "bomber/grid_spec.hpp"
#include "bomber/model.hpp"

namespace bomber {

/// Raw holds P or N; ExpRescaled holds e^t P or e^t N.
enum class Scaling { Raw, ExpRescaled };

inline const char* to_string(Scaling s) { return s == Scaling::Raw ? "raw" : "exp_rescaled"; }

/// Value surface on a GridSpec, stored row-major by x: value(i, j) lives at
/// i * nt + j. Immutable once constructed.
class ValueField {
public:
    ValueField() = default;

    ValueField(GridSpec spec, Scaling scaling, std::vector<double> values)
        : spec_(spec), scaling_(scaling),
          values_(std::make_shared<const std::vector<double>>(std::move(values))) {
        spec_.validate();
        if (values_->size() != spec_.size()) {
            throw DimensionError("value vector does not match grid size");
        }
        for (double v : *values_) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw DomainError("field values must be finite and nonnegative");
            }
        }
    }

    static ValueField filled(const GridSpec& spec, Scaling scaling, double v) {
        return ValueField(spec, scaling, std::vector<double>(spec.size(), v));
    }

    const GridSpec& spec() const { return spec_; }
    Scaling scaling() const { return scaling_; }
    std::size_t nx() const { return spec_.nx; }
    std::size_t nt() const { return spec_.nt; }

    double operator()(std::size_t i, std::size_t j) const { return (*values_)[i * spec_.nt + j]; }
    std::span<const double> values() const { return *values_; }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(*values_).subspan(i * spec_.nt, spec_.nt);
    }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> c(spec_.nx);
        for (std::size_t i = 0; i < spec_.nx; ++i) c[i] = (*this)(i, j);
        return c;
    }

    double sup_norm() const {
        double m = 0.0;
        for (double v : *values_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    friend ValueField rescale(const ValueField&, Scaling);

    GridSpec spec_{};
    Scaling scaling_ = Scaling::Raw;
    std::shared_ptr<const std::vector<double>> values_ = std::make_shared<const std::vector<double>>();
    // Field this one was rescaled from, if any. Rescaling back returns it,
    // which makes a round trip exact.
    std::shared_ptr<const ValueField> source_;
};

inline double sup_distance(const ValueField& a, const ValueField& b) {
    if (!(a.spec() == b.spec())) throw DimensionError("fields live on different grids");
    double m = 0.0;
    auto va = a.values();
    auto vb = b.values();
    for (std::size_t n = 0; n < va.size(); ++n) m = std::max(m, std::abs(va[n] - vb[n]));
    return m;
}

/// Multiplies (to ExpRescaled) or divides (to Raw) column j by e^{t_j}.
inline ValueField rescale(const ValueField& field, Scaling target) {
    if (field.scaling() == target) return field;
    if (field.source_ && field.source_->scaling() == target) return *field.source_;

    const GridSpec& g = field.spec();
    std::vector<double> factor(g.nt);
    for (std::size_t j = 0; j < g.nt; ++j) factor[j] = std::exp(g.t(j));

    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.nx; ++i) {
        for (std::size_t j = 0; j < g.nt; ++j) {
            const double v = field(i, j);
            out[i * g.nt + j] = target == Scaling::ExpRescaled ? v * factor[j] : v / factor[j];
        }
    }
    ValueField result(g, target, std::move(out));
    auto src = field;
    src.source_.reset();
    result.source_ = std::make_shared<const ValueField>(std::move(src));
    return result;
}

/// a(x_i) at every x-node.
inline std::vector<double> sample_ammo(const AmmoFunction& f, const GridSpec& spec) {
    std::vector<double> a(spec.nx);
    for (std::size_t i = 0; i < spec.nx; ++i) a[i] = f(spec.x(i));
    return a;
}

/// CSV with header `x,t,<column>`, x-major rows, 17 significant digits.
inline void write_csv(std::ostream& os, const ValueField& field, const std::string& column = "value") {
    const GridSpec& g = field.spec();
    const auto old_prec = os.precision(17);
    os << "x,t," << column << '\n';
    for (std::size_t i = 0; i < g.nx; ++i) {
        for (std::size_t j = 0; j < g.nt; ++j) {
            os << g.x(i) << ',' << g.t(j) << ',' << field(i, j) << '\n';
        }
    }
    os.precision(old_prec);
}

}  // namespace bomber
