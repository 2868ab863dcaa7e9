#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mmflux/flux.hpp"
#include "mmflux/grid.hpp"
#include "mmflux/monotone.hpp"
#include "mmflux/sampled.hpp"

namespace mmflux {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Source f(t, x, u) = c(t, x) * g(u) from a closed-form registry.
///
/// Registry ids: zero, linear (g = -u), arctan (g = -arctan u),
/// modulated (c(t,x) = c (1 + amplitude sin(wavenumber x) cos(frequency t)), g = -arctan u),
/// antidissipative (g = +u; test-only, violates dissipativity on purpose).
struct SourceSpec {
    std::string id = "zero";
    double c = 1.0;
    double amplitude = 0.0;
    double wavenumber = 1.0;
    double frequency = 1.0;

    static const std::vector<std::string>& registry();

    double coefficient(double t, double x) const;
    double profile(double u) const;  // g(u)
    double operator()(double t, double x, double u) const { return coefficient(t, x) * profile(u); }
    /// Upper bound for sup_{t,x} c(t, x) * Lip(g).
    double lipschitz() const;
    bool test_only() const { return id == "antidissipative"; }

    bool operator==(const SourceSpec&) const = default;
};

void to_json(nlohmann::json& j, const SourceSpec& s);
void from_json(const nlohmann::json& j, SourceSpec& s);

/// Initial datum u0 from a closed-form registry or samples.
struct InitialDatum {
    std::string kind = "constant";  // constant | riemann | box | bump | samples
    double value = 0.0;             // constant value, box/bump height
    double left = 0.0;              // riemann
    double right = 0.0;             // riemann
    double at = 0.0;                // riemann discontinuity, bump center
    double a = 0.0;                 // box [a, b]
    double b = 0.0;
    double radius = 1.0;            // bump half width
    std::vector<double> xs, us;     // samples (piecewise linear, zero outside)

    double operator()(double x) const;
    double sup_abs() const;
    bool operator==(const InitialDatum&) const = default;
};

void to_json(nlohmann::json& j, const InitialDatum& d);
void from_json(const nlohmann::json& j, InitialDatum& d);

/// phi_{ell,m}(r) = (1/ell) arctan(r^-) - (1/m) arctan(r^+); ell or m may be +inf.
double perturbation(double r, double ell, double m);

struct ProblemSpec {
    double x_lo = -1.0;
    double x_hi = 1.0;
    double T = 0.5;
    ThetaField theta{MonotoneGraph::identity(), Coefficient{}};
    FluxSpec flux;
    SourceSpec source;
    InitialDatum u0;
    double j = 1024.0;
    double ell = kInfinity;
    double m = kInfinity;
    double far_left = 0.0;   // ghost-cell states
    double far_right = 0.0;
    double padding = 0.0;    // width that waves should not cross (warning only)
    std::optional<double> u_range;  // extent of regularization tables; derived from data when absent

    double table_range() const;
    bool operator==(const ProblemSpec&) const = default;
};

void to_json(nlohmann::json& j, const ProblemSpec& p);
void from_json(const nlohmann::json& j, ProblemSpec& p);

struct HypothesisCheck {
    std::string name;
    bool passed = true;
    bool enforced = true;
    std::string detail;
};

struct ValidationReport {
    std::vector<std::string> errors;  // structural: the spec cannot be run
    std::vector<HypothesisCheck> checks;

    bool structurally_valid() const { return errors.empty(); }
    /// All enforced hypotheses hold. Failures of the test-only source are exempt when `allow_test_only`.
    bool hypotheses_hold(bool allow_test_only = false) const;
    const HypothesisCheck* find(const std::string& name) const;
};

void to_json(nlohmann::json& j, const ValidationReport& r);

/// Checks the structural invariants and (H1)-(H4) on sampling grids. Never throws.
ValidationReport validate_spec(const ProblemSpec& spec, const Grid1D& grid);

/// The regularized problem on a grid: theta^j per cell, A^j, f^j and the perturbation.
class Approximation {
public:
    Approximation(const ProblemSpec& spec, const Grid1D& grid);

    const Grid1D& grid() const { return grid_; }
    const RegularizedTheta& theta() const { return theta_; }
    const SampledCurve& flux() const { return flux_; }
    const SourceSpec& source_spec() const { return source_; }
    double ell() const { return ell_; }
    double m() const { return m_; }
    double far_left() const { return far_left_; }
    double far_right() const { return far_right_; }
    double table_range() const { return u_range_; }

    double theta_value(std::size_t cell, double u) const { return theta_.value(cell, u); }
    double eta(std::size_t cell, double v) const { return theta_.inverse(cell, v); }
    /// A^j(v).
    double flux_of_v(double v) const { return flux_(v); }
    /// A^j(theta^j(x_i, u)).
    double cell_flux(std::size_t cell, double u) const { return flux_(theta_.value(cell, u)); }
    /// F at interface k (between cells k-1 and k, k = 0..n): A^j of the mean of the adjacent theta^j.
    double interface_flux_fn(std::size_t k, double u) const;

    /// Upper bound for |d/du interface_flux_fn(k, u)| on [lo, hi] from the table slopes.
    double flux_slope_bound(std::size_t k, double lo, double hi) const;

    /// f^j(t, x_i, u), zero-normalized.
    double source(double t, std::size_t cell, double u) const;
    /// f^j(t, x_i, u) + phi_{ell,m}(theta^j(x_i, u)).
    double perturbed_source(double t, std::size_t cell, double u) const;
    /// Same, with the transformed value v = theta^j(x_i, u) already known.
    double perturbed_source_v(double t, std::size_t cell, double u, double v) const;
    /// Lipschitz bound of the perturbed source in u.
    double source_lipschitz() const { return source_lip_; }

private:
    Grid1D grid_;
    RegularizedTheta theta_;
    SampledCurve flux_;
    SourceSpec source_;
    SampledCurve profile_;  // g^j before normalization
    double profile_offset_ = 0.0;
    double ell_ = kInfinity;
    double m_ = kInfinity;
    double far_left_ = 0.0;
    double far_right_ = 0.0;
    double u_range_ = 4.0;
    double source_lip_ = 0.0;
};

}  // namespace mmflux
