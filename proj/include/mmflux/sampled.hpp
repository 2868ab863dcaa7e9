#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mmflux {

/// Function tabulated on a uniform grid over [lo, hi]. Evaluation is piecewise
/// linear inside the grid and continues linearly with the end slopes outside.
class SampledCurve {
public:
    SampledCurve() = default;
    SampledCurve(double lo, double hi, std::vector<double> values);

    static SampledCurve tabulate(const std::function<double(double)>& fn, double lo, double hi,
                                 std::size_t samples);

    double operator()(double u) const;
    /// Slope of the linear piece containing u (right piece at nodes).
    double slope_at(double u) const;

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double step() const { return h_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    double abscissa(std::size_t i) const { return lo_ + h_ * static_cast<double>(i); }

    /// Largest |slope| of the pieces meeting [a, b], end slopes included outside the table.
    double max_slope(double a, double b) const;
    /// Largest |slope| over the table pieces; equals the Lipschitz constant of the interpolant.
    double lipschitz() const { return lipschitz_; }

private:
    std::size_t piece(double u) const;

    double lo_ = 0.0;
    double hi_ = 1.0;
    double h_ = 1.0;
    std::vector<double> values_;
    double lipschitz_ = 0.0;
};

/// Strictly increasing sampled function with an exact inverse of its interpolant.
class SmoothMonotoneFn {
public:
    SmoothMonotoneFn() = default;
    /// Throws std::invalid_argument if the samples are not strictly increasing or not finite.
    explicit SmoothMonotoneFn(SampledCurve curve);

    double operator()(double u) const { return curve_(u) - offset_; }
    double inverse(double y) const;

    /// Copy shifted so that evaluation at u = 0 returns exactly 0.
    SmoothMonotoneFn normalized_at_zero() const;
    double offset() const { return offset_; }

    const SampledCurve& curve() const { return curve_; }
    double lipschitz() const { return curve_.lipschitz(); }
    /// Smallest slope over the table pieces (strict-monotonicity margin).
    double min_slope() const { return min_slope_; }

private:
    SampledCurve curve_;
    double min_slope_ = 0.0;
    double offset_ = 0.0;
};

}  // namespace mmflux
