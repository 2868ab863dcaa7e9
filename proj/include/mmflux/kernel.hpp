#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace mmflux {

/// Standard C-infinity bump exp(-1/(1-s^2)) on (-1,1), zero outside. Unnormalized.
inline double bump(double s) {
    if (!(std::abs(s) < 1.0)) return 0.0;
    return std::exp(-1.0 / (1.0 - s * s));
}

inline double bump_derivative(double s) {
    if (!(std::abs(s) < 1.0)) return 0.0;
    const double q = 1.0 - s * s;
    return bump(s) * (-2.0 * s / (q * q));
}

/// Fixed 16-point midpoint rule for convolution with the bump kernel on (-1,1).
/// Weights are normalized to sum to one so constants are reproduced exactly;
/// the node set is symmetric, so affine functions are reproduced up to rounding.
class MollifierRule {
public:
    static constexpr std::size_t kNodes = 16;

    MollifierRule() {
        double total = 0.0;
        for (std::size_t q = 0; q < kNodes; ++q) {
            nodes_[q] = -1.0 + (static_cast<double>(q) + 0.5) * (2.0 / kNodes);
            weights_[q] = bump(nodes_[q]);
            total += weights_[q];
        }
        for (auto& w : weights_) w /= total;
    }

    /// (f * omega_radius)(u) = sum_q w_q f(u - radius * s_q).
    template <typename Fn>
    double apply(Fn&& f, double u, double radius) const {
        double acc = 0.0;
        for (std::size_t q = 0; q < kNodes; ++q) acc += weights_[q] * f(u - radius * nodes_[q]);
        return acc;
    }

    const std::array<double, kNodes>& nodes() const { return nodes_; }
    const std::array<double, kNodes>& weights() const { return weights_; }

private:
    std::array<double, kNodes> nodes_{};
    std::array<double, kNodes> weights_{};
};

inline const MollifierRule& mollifier() {
    static const MollifierRule rule;
    return rule;
}

}  // namespace mmflux
