#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"

#include "mmflux/monotone.hpp"
#include "mmflux/sampled.hpp"

namespace mmflux {

struct FluxJump {
    double z = 0.0;
    double left = 0.0;   // A(z^-)
    double right = 0.0;  // A(z^+)
    bool operator==(const FluxJump&) const = default;
};

/// Jump-continuous scalar flux A: piecewise linear through samples, with
/// finitely many jump points. Outside the sampled range it continues with the
/// end slopes.
class FluxCurve {
public:
    FluxCurve() = default;
    /// Throws std::invalid_argument on unsorted samples or overlapping jump points.
    FluxCurve(std::vector<std::pair<double, double>> samples, std::vector<FluxJump> jumps);

    /// Single value; at a jump point returns the right limit.
    double operator()(double v) const;
    /// Filled value set: [min, max] of the one-sided limits at jump points.
    Interval eval_interval(double v) const;
    /// A over [lo, hi]: the range of the filled graph on that interval.
    Interval image(double lo, double hi) const;
    double left_limit(double v) const;
    double right_limit(double v) const;

    const std::vector<std::pair<double, double>>& samples() const { return samples_; }
    const std::vector<FluxJump>& jumps() const { return jumps_; }
    bool continuous() const { return jumps_.empty(); }

    bool operator==(const FluxCurve&) const = default;

private:
    struct Knot {
        double x, left, right;
        bool operator==(const Knot&) const = default;
    };
    double eval_side(double v, bool right_side) const;

    std::vector<std::pair<double, double>> samples_;
    std::vector<FluxJump> jumps_;
    std::vector<Knot> knots_;
};

void to_json(nlohmann::json& j, const FluxCurve& a);
void from_json(const nlohmann::json& j, FluxCurve& a);

/// Declarative flux description as it appears in configuration files.
struct FluxSpec {
    std::string kind = "burgers";  // burgers | linear | cubic | samples
    double speed = 1.0;            // linear slope / cubic scale
    double range = 8.0;            // sampled on [-range, range]
    std::size_t samples = 4096;
    struct Step {
        double z = 0.0;
        double height = 0.0;
        bool operator==(const Step&) const = default;
    };
    std::vector<Step> steps;  // A(v) = base(v) + sum height * H(v - z)
    FluxCurve curve;          // kind == "samples"

    FluxCurve build() const;
    bool operator==(const FluxSpec&) const = default;
};

void to_json(nlohmann::json& j, const FluxSpec& f);
void from_json(const nlohmann::json& j, FluxSpec& f);

struct Plateau {
    double alpha = 0.0;
    double beta = 0.0;
    double z = 0.0;
};

/// Admissible parametrization (calA, U) of a jump-continuous flux: each jump
/// point z_k is blown up into a plateau [alpha_k, beta_k] of unit length on
/// which U == z_k and calA interpolates the jump affinely.
class Parametrization {
public:
    /// `slope` is the slope of U between plateaus (free in the framework; 1 by default).
    explicit Parametrization(const FluxCurve& a, double slope = 1.0);

    double U(double s) const;
    double calA(double s) const;
    /// Inverse reparametrization s(v), defined for v that is not a jump point
    /// (at a jump point returns the plateau start).
    double s_of(double v) const;

    const std::vector<Plateau>& plateaus() const { return plateaus_; }
    double slope() const { return slope_; }

    /// Rows (s, U(s), calA(s)) on a uniform grid of [s_lo, s_hi].
    std::vector<std::array<double, 3>> sample(double s_lo, double s_hi, std::size_t n) const;

private:
    FluxCurve a_;
    double slope_ = 1.0;
    std::vector<Plateau> plateaus_;
};

/// A^j: A mollified with the bump kernel of radius 1/j and tabulated on
/// [-range, range]. Affine and constant fluxes are reproduced up to rounding.
SampledCurve smooth_flux(const FluxCurve& a, double j, double range, std::size_t samples = 4096);

/// A(theta(x, u)) for the multi-valued pipeline: image of the value set under A.
Interval composed_flux(const MonotoneGraph& theta_cell, double u, const FluxCurve& a);
/// A^j(theta^j(x_i, u)) for the regularized pipeline.
double composed_flux(const RegularizedTheta& theta, std::size_t cell, double u, const SampledCurve& aj);

}  // namespace mmflux
