#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "json.hpp"

#include "mmflux/grid.hpp"
#include "mmflux/sampled.hpp"

namespace mmflux {

/// Closed interval [lo, hi]; a point when lo == hi.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
    double width() const { return hi - lo; }
    bool operator==(const Interval&) const = default;
};

/// Piecewise-linear maximal monotone graph on the real line.
///
/// The graph is stored by its vertices: at each breakpoint u_i it takes the
/// closed value set [left_i, right_i] (a vertical segment when left_i < right_i),
/// between breakpoints it is affine from right_i to left_{i+1}, and outside it
/// continues with the tail slopes. Storing vertices rather than slopes keeps
/// `inverse()` an exact involution.
class MonotoneGraph {
public:
    MonotoneGraph() : MonotoneGraph(identity()) {}
    /// Throws std::invalid_argument unless the vertices describe a maximal monotone graph.
    MonotoneGraph(std::vector<double> breakpoints, std::vector<double> left, std::vector<double> right,
                  double tail_left, double tail_right);

    static MonotoneGraph identity() { return linear(1.0); }
    static MonotoneGraph linear(double slope);
    /// Sgn: {-1} for u < 0, [-1, 1] at 0, {1} for u > 0 (zero tail slopes, not surjective).
    static MonotoneGraph sign();
    /// u + Sgn(u): surjective with a unit jump on each side of the origin.
    static MonotoneGraph sign_plus_identity();

    /// Full value set at u.
    Interval eval(double u) const;
    /// Element of eval(u) of smallest modulus.
    double minimal_selection(double u) const;
    /// Unique u with w in u + lambda * theta(u).
    double resolvent(double lambda, double w) const;
    /// (w - resolvent(lambda, w)) / lambda.
    double yosida(double lambda, double w) const;
    /// Graph with the axes swapped. Throws std::invalid_argument if not surjective.
    MonotoneGraph inverse() const;
    /// c * theta for c > 0.
    MonotoneGraph scaled(double c) const;

    bool is_surjective() const { return tail_left_ > 0.0 && tail_right_ > 0.0; }
    /// True when every affine piece has positive slope, i.e. the inverse is single valued.
    bool strictly_increasing() const;
    bool has_jumps() const;

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& left_values() const { return left_; }
    const std::vector<double>& right_values() const { return right_; }
    double tail_left() const { return tail_left_; }
    double tail_right() const { return tail_right_; }
    /// Slopes of the affine pieces between consecutive breakpoints.
    std::vector<double> interior_slopes() const;

    bool operator==(const MonotoneGraph&) const = default;

private:
    std::vector<double> breakpoints_;
    std::vector<double> left_;
    std::vector<double> right_;
    double tail_left_ = 1.0;
    double tail_right_ = 1.0;
};

void to_json(nlohmann::json& j, const MonotoneGraph& g);
void from_json(const nlohmann::json& j, MonotoneGraph& g);

/// Generic resolvent of an increasing function by bisection, tolerance 1e-12 in u.
double resolvent_bisection(const std::function<double(double)>& theta, double lambda, double w);

/// Spatial coefficient c(x) > 0 multiplying the base graph.
struct Coefficient {
    enum class Kind { constant, step, smooth };
    Kind kind = Kind::constant;
    double value = 1.0;       // constant
    double left = 1.0;        // step: value for x < at
    double right = 1.0;       // step: value for x >= at
    double at = 0.0;          // step location or smooth center
    double amplitude = 0.0;   // smooth: value * (1 + amplitude * tanh((x - at) / width))
    double width = 1.0;

    double operator()(double x) const;
    double min_value() const;
    double max_value() const;
    bool is_smooth() const { return kind == Kind::smooth; }
    bool operator==(const Coefficient&) const = default;
};

void to_json(nlohmann::json& j, const Coefficient& c);
void from_json(const nlohmann::json& j, Coefficient& c);

/// theta(x, .) for every cell: c(x) * base(.), with optional explicit per-cell overrides.
class ThetaField {
public:
    ThetaField() = default;
    ThetaField(MonotoneGraph base, Coefficient coefficient) : base_(std::move(base)), coef_(coefficient) {}

    MonotoneGraph graph_at(double x) const { return base_.scaled(coef_(x)); }
    MonotoneGraph cell_graph(const Grid1D& grid, std::size_t i) const;
    void set_override(std::size_t cell, MonotoneGraph g) { overrides_[cell] = std::move(g); }

    const MonotoneGraph& base() const { return base_; }
    const Coefficient& coefficient() const { return coef_; }
    const std::map<std::size_t, MonotoneGraph>& overrides() const { return overrides_; }
    bool smooth_in_x() const { return coef_.is_smooth() && overrides_.empty(); }

    bool operator==(const ThetaField&) const = default;

private:
    MonotoneGraph base_;
    Coefficient coef_;
    std::map<std::size_t, MonotoneGraph> overrides_;
};

void to_json(nlohmann::json& j, const ThetaField& t);
void from_json(const nlohmann::json& j, ThetaField& t);

/// Per-cell regularized theta^j with its inverse eta^j.
class RegularizedTheta {
public:
    RegularizedTheta() = default;
    explicit RegularizedTheta(std::vector<std::shared_ptr<const SmoothMonotoneFn>> cells)
        : cells_(std::move(cells)) {}

    double value(std::size_t cell, double u) const { return (*cells_[cell])(u); }
    double inverse(std::size_t cell, double v) const { return cells_[cell]->inverse(v); }
    const SmoothMonotoneFn& cell(std::size_t i) const { return *cells_[i]; }
    const std::shared_ptr<const SmoothMonotoneFn>& shared_cell(std::size_t i) const { return cells_[i]; }
    std::size_t size() const { return cells_.size(); }
    double lipschitz() const;

private:
    std::vector<std::shared_ptr<const SmoothMonotoneFn>> cells_;
};

struct RegularizeOptions {
    double u_range = 4.0;            // tables cover [-u_range, u_range]
    std::size_t min_samples = 2049;
    std::size_t max_samples = 32769;
    std::size_t max_samples_smooth = 4097;  // per-cell tables when mollifying in x
};

/// Yosida approximation with lambda = 1/sqrt(j), mollification of radius 1/j
/// (in u, and in x for smooth coefficients), normalization theta^j(0) = 0.
/// Throws std::runtime_error if the quadrature produces non-finite values.
RegularizedTheta regularize_theta(const ThetaField& field, const Grid1D& grid, double j,
                                  const RegularizeOptions& options = {});

/// Regularization of a single graph (no x-mollification).
SmoothMonotoneFn regularize_graph(const MonotoneGraph& g, double j, const RegularizeOptions& options = {});

/// sup over a 1000-point grid of [a, b] of |seq_n^{-1}(y) - limit^{-1}(y)|, one entry per member.
/// Throws std::invalid_argument if a member does not cover [a, b] (not surjective there).
std::vector<double> check_inverse_convergence(const std::vector<std::function<double(double)>>& sequence,
                                              const MonotoneGraph& limit, double a, double b);

/// Max over a grid of [a, b] of |f_n - f|, the uniform-convergence diagnostic for monotone sequences.
std::vector<double> uniform_errors(const std::vector<std::function<double(double)>>& sequence,
                                   const std::function<double(double)>& limit, double a, double b,
                                   std::size_t points = 1000);

}  // namespace mmflux
