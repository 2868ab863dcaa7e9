#include "mmflux/sampled.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mmflux {

SampledCurve::SampledCurve(double lo, double hi, std::vector<double> values)
    : lo_(lo), hi_(hi), values_(std::move(values)) {
    if (!(hi > lo) || values_.size() < 2) {
        throw std::invalid_argument("SampledCurve needs hi > lo and at least two samples");
    }
    h_ = (hi_ - lo_) / static_cast<double>(values_.size() - 1);
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
        if (!std::isfinite(values_[i]) || !std::isfinite(values_[i + 1])) {
            throw std::invalid_argument("SampledCurve: non-finite sample");
        }
        lipschitz_ = std::max(lipschitz_, std::abs(values_[i + 1] - values_[i]) / h_);
    }
}

SampledCurve SampledCurve::tabulate(const std::function<double(double)>& fn, double lo, double hi,
                                    std::size_t samples) {
    std::vector<double> values(samples);
    const double h = (hi - lo) / static_cast<double>(samples - 1);
    for (std::size_t i = 0; i < samples; ++i) {
        values[i] = fn(i + 1 == samples ? hi : lo + h * static_cast<double>(i));
    }
    return SampledCurve(lo, hi, std::move(values));
}

std::size_t SampledCurve::piece(double u) const {
    const double pos = (u - lo_) / h_;
    if (!(pos > 0.0)) return 0;
    const auto last = values_.size() - 2;
    if (pos >= static_cast<double>(last)) return last;
    return static_cast<std::size_t>(pos);
}

double SampledCurve::operator()(double u) const {
    const std::size_t i = piece(u);
    const double t = (u - abscissa(i)) / h_;
    return (1.0 - t) * values_[i] + t * values_[i + 1];
}

double SampledCurve::slope_at(double u) const {
    const std::size_t i = piece(u);
    return (values_[i + 1] - values_[i]) / h_;
}

double SampledCurve::max_slope(double a, double b) const {
    if (b < a) std::swap(a, b);
    const std::size_t first = piece(a);
    const std::size_t last = piece(b);
    double m = 0.0;
    for (std::size_t i = first; i <= last; ++i) m = std::max(m, std::abs(values_[i + 1] - values_[i]));
    return m / h_;
}

SmoothMonotoneFn::SmoothMonotoneFn(SampledCurve curve) : curve_(std::move(curve)) {
    const auto v = curve_.values();
    min_slope_ = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const double s = (v[i + 1] - v[i]) / curve_.step();
        if (!(s > 0.0)) {
            throw std::invalid_argument("SmoothMonotoneFn: samples not strictly increasing near u = " +
                                        std::to_string(curve_.abscissa(i)));
        }
        min_slope_ = std::min(min_slope_, s);
    }
}

SmoothMonotoneFn SmoothMonotoneFn::normalized_at_zero() const {
    SmoothMonotoneFn out = *this;
    out.offset_ = 0.0;
    out.offset_ = out.curve_(0.0);
    return out;
}

double SmoothMonotoneFn::inverse(double value) const {
    const double y = value + offset_;
    const auto v = curve_.values();
    const std::size_t n = v.size();
    std::size_t i;
    if (y <= v.front()) {
        i = 0;
    } else if (y >= v.back()) {
        i = n - 2;
    } else {
        const auto it = std::upper_bound(v.begin(), v.end(), y);
        i = static_cast<std::size_t>(it - v.begin()) - 1;
        i = std::min(i, n - 2);
    }
    const double x0 = curve_.abscissa(i);
    const double s = (v[i + 1] - v[i]) / curve_.step();
    return x0 + (y - v[i]) / s;
}

}  // namespace mmflux
