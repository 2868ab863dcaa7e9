#include "mmflux/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mmflux/kernel.hpp"

namespace mmflux {

using nlohmann::json;

MonotoneGraph::MonotoneGraph(std::vector<double> breakpoints, std::vector<double> left, std::vector<double> right,
                             double tail_left, double tail_right)
    : breakpoints_(std::move(breakpoints)),
      left_(std::move(left)),
      right_(std::move(right)),
      tail_left_(tail_left),
      tail_right_(tail_right) {
    const std::size_t n = breakpoints_.size();
    if (n == 0) throw std::invalid_argument("MonotoneGraph needs at least one breakpoint");
    if (left_.size() != n || right_.size() != n) {
        throw std::invalid_argument("MonotoneGraph: vertex arrays differ in length");
    }
    if (!(tail_left_ >= 0.0) || !(tail_right_ >= 0.0) || !std::isfinite(tail_left_) || !std::isfinite(tail_right_)) {
        throw std::invalid_argument("MonotoneGraph: tail slopes must be finite and nonnegative");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(breakpoints_[i]) || !std::isfinite(left_[i]) || !std::isfinite(right_[i])) {
            throw std::invalid_argument("MonotoneGraph: non-finite vertex");
        }
        if (left_[i] > right_[i]) {
            throw std::invalid_argument("MonotoneGraph: jump at u = " + std::to_string(breakpoints_[i]) +
                                        " has lo > hi");
        }
        if (i + 1 < n) {
            if (!(breakpoints_[i] < breakpoints_[i + 1])) {
                throw std::invalid_argument("MonotoneGraph: breakpoints must be strictly increasing");
            }
            if (right_[i] > left_[i + 1]) {
                throw std::invalid_argument("MonotoneGraph: not monotone between u = " +
                                            std::to_string(breakpoints_[i]) + " and u = " +
                                            std::to_string(breakpoints_[i + 1]));
            }
        }
    }
}

MonotoneGraph MonotoneGraph::linear(double slope) {
    return MonotoneGraph({0.0}, {0.0}, {0.0}, slope, slope);
}

MonotoneGraph MonotoneGraph::sign() { return MonotoneGraph({0.0}, {-1.0}, {1.0}, 0.0, 0.0); }

MonotoneGraph MonotoneGraph::sign_plus_identity() { return MonotoneGraph({0.0}, {-1.0}, {1.0}, 1.0, 1.0); }

Interval MonotoneGraph::eval(double u) const {
    const std::size_t n = breakpoints_.size();
    if (u < breakpoints_.front()) {
        const double v = left_.front() + tail_left_ * (u - breakpoints_.front());
        return {v, v};
    }
    if (u > breakpoints_.back()) {
        const double v = right_.back() + tail_right_ * (u - breakpoints_.back());
        return {v, v};
    }
    const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), u);
    const auto i = static_cast<std::size_t>(it - breakpoints_.begin());
    if (i < n && breakpoints_[i] == u) return {left_[i], right_[i]};
    // u lies strictly between breakpoints i-1 and i
    const double u0 = breakpoints_[i - 1];
    const double u1 = breakpoints_[i];
    const double t = (u - u0) / (u1 - u0);
    const double v = (1.0 - t) * right_[i - 1] + t * left_[i];
    return {v, v};
}

double MonotoneGraph::minimal_selection(double u) const {
    const Interval s = eval(u);
    return std::clamp(0.0, s.lo, s.hi);
}

double MonotoneGraph::resolvent(double lambda, double w) const {
    if (!(lambda > 0.0)) throw std::invalid_argument("resolvent: lambda must be positive");
    const std::size_t n = breakpoints_.size();
    // G(u) = u + lambda * theta(u) takes [g_lo[i], g_hi[i]] at breakpoint i.
    auto g_lo = [&](std::size_t i) { return breakpoints_[i] + lambda * left_[i]; };
    auto g_hi = [&](std::size_t i) { return breakpoints_[i] + lambda * right_[i]; };

    if (w < g_lo(0)) {
        return breakpoints_.front() + (w - g_lo(0)) / (1.0 + lambda * tail_left_);
    }
    if (w > g_hi(n - 1)) {
        return breakpoints_.back() + (w - g_hi(n - 1)) / (1.0 + lambda * tail_right_);
    }
    // Largest i with g_lo(i) <= w.
    std::size_t lo = 0, hi = n - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (g_lo(mid) <= w) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    const std::size_t i = lo;
    if (w <= g_hi(i)) return breakpoints_[i];
    // Affine piece between i and i+1.
    const double du = breakpoints_[i + 1] - breakpoints_[i];
    const double slope = (left_[i + 1] - right_[i]) / du;
    const double u = breakpoints_[i] + (w - g_hi(i)) / (1.0 + lambda * slope);
    return std::clamp(u, breakpoints_[i], breakpoints_[i + 1]);
}

double MonotoneGraph::yosida(double lambda, double w) const { return (w - resolvent(lambda, w)) / lambda; }

MonotoneGraph MonotoneGraph::inverse() const {
    if (!is_surjective()) {
        throw std::invalid_argument("invert_graph: graph is not surjective (zero tail slope), inverse undefined");
    }
    // Walk the vertex polyline (u_i, left_i), (u_i, right_i) and swap coordinates;
    // vertices sharing a value collapse into one breakpoint of the inverse.
    std::vector<double> bps, lo, hi;
    auto push = [&](double value, double u) {
        if (!bps.empty() && bps.back() == value) {
            hi.back() = u;
        } else {
            bps.push_back(value);
            lo.push_back(u);
            hi.push_back(u);
        }
    };
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        push(left_[i], breakpoints_[i]);
        push(right_[i], breakpoints_[i]);
    }
    return MonotoneGraph(std::move(bps), std::move(lo), std::move(hi), 1.0 / tail_left_, 1.0 / tail_right_);
}

MonotoneGraph MonotoneGraph::scaled(double c) const {
    if (!(c > 0.0)) throw std::invalid_argument("MonotoneGraph::scaled needs c > 0");
    if (c == 1.0) return *this;
    auto l = left_;
    auto r = right_;
    for (auto& v : l) v *= c;
    for (auto& v : r) v *= c;
    return MonotoneGraph(breakpoints_, std::move(l), std::move(r), c * tail_left_, c * tail_right_);
}

bool MonotoneGraph::strictly_increasing() const {
    if (!is_surjective()) return false;
    for (double s : interior_slopes()) {
        if (!(s > 0.0)) return false;
    }
    return true;
}

bool MonotoneGraph::has_jumps() const {
    for (std::size_t i = 0; i < left_.size(); ++i) {
        if (left_[i] < right_[i]) return true;
    }
    return false;
}

std::vector<double> MonotoneGraph::interior_slopes() const {
    std::vector<double> s;
    for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
        s.push_back((left_[i + 1] - right_[i]) / (breakpoints_[i + 1] - breakpoints_[i]));
    }
    return s;
}

// JSON: {breakpoints, slopes (interior), jumps ([lo,hi] or null per breakpoint),
// tail_slopes [l, r], anchor}. The anchor is the left value at the first
// breakpoint and is only needed when that breakpoint carries no jump.
void to_json(json& j, const MonotoneGraph& g) {
    json jumps = json::array();
    for (std::size_t i = 0; i < g.breakpoints().size(); ++i) {
        if (g.left_values()[i] < g.right_values()[i]) {
            jumps.push_back({g.left_values()[i], g.right_values()[i]});
        } else {
            jumps.push_back(nullptr);
        }
    }
    j = json{{"breakpoints", g.breakpoints()},
             {"slopes", g.interior_slopes()},
             {"jumps", jumps},
             {"tail_slopes", {g.tail_left(), g.tail_right()}},
             {"anchor", g.left_values().front()}};
}

void from_json(const json& j, MonotoneGraph& g) {
    const auto bps = j.at("breakpoints").get<std::vector<double>>();
    const std::size_t n = bps.size();
    const auto slopes = j.value("slopes", std::vector<double>{});
    const auto tails = j.at("tail_slopes").get<std::vector<double>>();
    if (tails.size() != 2) throw std::invalid_argument("graph JSON: tail_slopes must have two entries");
    if (n == 0) throw std::invalid_argument("graph JSON: breakpoints must be nonempty");
    if (slopes.size() + 1 != n) throw std::invalid_argument("graph JSON: need one slope per breakpoint gap");
    std::vector<json> jumps(n, nullptr);
    if (j.contains("jumps")) {
        const auto& arr = j.at("jumps");
        if (arr.size() != n) throw std::invalid_argument("graph JSON: need one jump entry per breakpoint");
        for (std::size_t i = 0; i < n; ++i) jumps[i] = arr[i];
    }
    std::vector<double> left(n), right(n);
    double carry = j.value("anchor", 0.0);
    if (!jumps[0].is_null()) carry = jumps[0].at(0).get<double>();
    constexpr double kGapTol = 1e-12;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) carry = right[i - 1] + slopes[i - 1] * (bps[i] - bps[i - 1]);
        if (jumps[i].is_null()) {
            left[i] = right[i] = carry;
        } else {
            const double lo = jumps[i].at(0).get<double>();
            const double hi = jumps[i].at(1).get<double>();
            // Maximality: the vertical segment must close the gap exactly.
            if (std::abs(lo - carry) > kGapTol * (1.0 + std::abs(carry))) {
                throw std::invalid_argument("graph JSON: jump at u = " + std::to_string(bps[i]) +
                                            " leaves a hole (lo = " + std::to_string(lo) +
                                            ", segment limit = " + std::to_string(carry) + ")");
            }
            left[i] = lo;
            right[i] = hi;
        }
    }
    g = MonotoneGraph(bps, std::move(left), std::move(right), tails[0], tails[1]);
}

double resolvent_bisection(const std::function<double(double)>& theta, double lambda, double w) {
    if (!(lambda > 0.0)) throw std::invalid_argument("resolvent: lambda must be positive");
    auto g = [&](double u) { return u + lambda * theta(u); };
    double lo = -1.0, hi = 1.0;
    for (int k = 0; k < 200 && g(lo) > w; ++k) lo *= 2.0;
    for (int k = 0; k < 200 && g(hi) < w; ++k) hi *= 2.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (g(mid) < w) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double Coefficient::operator()(double x) const {
    switch (kind) {
        case Kind::constant: return value;
        case Kind::step: return x < at ? left : right;
        case Kind::smooth: return value * (1.0 + amplitude * std::tanh((x - at) / width));
    }
    return value;
}

double Coefficient::min_value() const {
    switch (kind) {
        case Kind::constant: return value;
        case Kind::step: return std::min(left, right);
        case Kind::smooth: return value * (1.0 - std::abs(amplitude));
    }
    return value;
}

double Coefficient::max_value() const {
    switch (kind) {
        case Kind::constant: return value;
        case Kind::step: return std::max(left, right);
        case Kind::smooth: return value * (1.0 + std::abs(amplitude));
    }
    return value;
}

void to_json(json& j, const Coefficient& c) {
    switch (c.kind) {
        case Coefficient::Kind::constant: j = json{{"kind", "constant"}, {"value", c.value}}; break;
        case Coefficient::Kind::step:
            j = json{{"kind", "step"}, {"left", c.left}, {"right", c.right}, {"at", c.at}};
            break;
        case Coefficient::Kind::smooth:
            j = json{{"kind", "smooth"}, {"value", c.value}, {"amplitude", c.amplitude}, {"at", c.at},
                     {"width", c.width}};
            break;
    }
}

void from_json(const json& j, Coefficient& c) {
    c = Coefficient{};
    const auto kind = j.value("kind", std::string("constant"));
    if (kind == "constant") {
        c.kind = Coefficient::Kind::constant;
        c.value = j.value("value", 1.0);
    } else if (kind == "step") {
        c.kind = Coefficient::Kind::step;
        c.left = j.at("left").get<double>();
        c.right = j.at("right").get<double>();
        c.at = j.value("at", 0.0);
    } else if (kind == "smooth") {
        c.kind = Coefficient::Kind::smooth;
        c.value = j.value("value", 1.0);
        c.amplitude = j.at("amplitude").get<double>();
        c.at = j.value("at", 0.0);
        c.width = j.value("width", 1.0);
        if (!(std::abs(c.amplitude) < 1.0) || !(c.width > 0.0)) {
            throw std::invalid_argument("smooth coefficient needs |amplitude| < 1 and width > 0");
        }
    } else {
        throw std::invalid_argument("unknown coefficient kind '" + kind + "'");
    }
    if (!(c.min_value() > 0.0)) throw std::invalid_argument("coefficient must be bounded below by a positive constant");
}

MonotoneGraph ThetaField::cell_graph(const Grid1D& grid, std::size_t i) const {
    if (const auto it = overrides_.find(i); it != overrides_.end()) return it->second;
    return graph_at(grid.center(i));
}

void to_json(json& j, const ThetaField& t) {
    j = json{{"graph", t.base()}, {"coefficient", t.coefficient()}};
    if (!t.overrides().empty()) {
        json o = json::array();
        for (const auto& [cell, g] : t.overrides()) o.push_back({{"cell", cell}, {"graph", g}});
        j["overrides"] = o;
    }
}

void from_json(const json& j, ThetaField& t) {
    Coefficient c;
    if (j.contains("coefficient")) c = j.at("coefficient").get<Coefficient>();
    t = ThetaField(j.at("graph").get<MonotoneGraph>(), c);
    if (j.contains("overrides")) {
        for (const auto& o : j.at("overrides")) {
            t.set_override(o.at("cell").get<std::size_t>(), o.at("graph").get<MonotoneGraph>());
        }
    }
}

double RegularizedTheta::lipschitz() const {
    double lip = 0.0;
    const SmoothMonotoneFn* last = nullptr;
    for (const auto& c : cells_) {
        if (c.get() == last) continue;
        last = c.get();
        lip = std::max(lip, c->lipschitz());
    }
    return lip;
}

namespace {

std::size_t table_samples(double u_range, double radius, std::size_t lo, std::size_t hi) {
    // Spacing of about a quarter of the kernel radius, odd count so that u = 0 is a node.
    const double want = 2.0 * std::ceil(u_range / (0.25 * radius)) + 1.0;
    const double clamped = std::clamp(want, static_cast<double>(lo), static_cast<double>(hi));
    auto n = static_cast<std::size_t>(clamped);
    if (n % 2 == 0) ++n;
    return n;
}

SmoothMonotoneFn finish_table(std::vector<double> values, double u_range) {
    for (double v : values) {
        if (!std::isfinite(v)) throw std::runtime_error("regularize_theta: quadrature produced a non-finite value");
    }
    return SmoothMonotoneFn(SampledCurve(-u_range, u_range, std::move(values))).normalized_at_zero();
}

}  // namespace

SmoothMonotoneFn regularize_graph(const MonotoneGraph& g, double j, const RegularizeOptions& options) {
    if (!(j >= 1.0)) throw std::invalid_argument("regularize_theta: j must be >= 1");
    const double lambda = 1.0 / std::sqrt(j);
    const double radius = 1.0 / j;
    const auto& rule = mollifier();
    const std::size_t n = table_samples(options.u_range, radius, options.min_samples, options.max_samples);
    const double h = 2.0 * options.u_range / static_cast<double>(n - 1);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = -options.u_range + h * static_cast<double>(i);
        values[i] = rule.apply([&](double z) { return g.yosida(lambda, z); }, u, radius);
    }
    return finish_table(std::move(values), options.u_range);
}

RegularizedTheta regularize_theta(const ThetaField& field, const Grid1D& grid, double j,
                                  const RegularizeOptions& options) {
    if (!(j >= 1.0)) throw std::invalid_argument("regularize_theta: j must be >= 1");
    std::vector<std::shared_ptr<const SmoothMonotoneFn>> cells(grid.n_cells);

    if (!field.smooth_in_x()) {
        // Cells sharing the same graph share one table.
        std::vector<std::pair<MonotoneGraph, std::shared_ptr<const SmoothMonotoneFn>>> cache;
        for (std::size_t i = 0; i < grid.n_cells; ++i) {
            MonotoneGraph g = field.cell_graph(grid, i);
            auto hit = std::find_if(cache.begin(), cache.end(), [&](const auto& e) { return e.first == g; });
            if (hit == cache.end()) {
                cache.emplace_back(g, std::make_shared<const SmoothMonotoneFn>(regularize_graph(g, j, options)));
                hit = std::prev(cache.end());
            }
            cells[i] = hit->second;
        }
        return RegularizedTheta(std::move(cells));
    }

    // Joint (x, u) mollification with a product kernel for smooth coefficients.
    const double lambda = 1.0 / std::sqrt(j);
    const double radius = 1.0 / j;
    const auto& rule = mollifier();
    const std::size_t n = table_samples(options.u_range, radius, options.min_samples, options.max_samples_smooth);
    const double h = 2.0 * options.u_range / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
        const double x = grid.center(i);
        std::vector<MonotoneGraph> graphs;
        graphs.reserve(MollifierRule::kNodes);
        for (double s : rule.nodes()) graphs.push_back(field.graph_at(x - radius * s));
        std::vector<double> values(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double u = -options.u_range + h * static_cast<double>(k);
            double acc = 0.0;
            for (std::size_t p = 0; p < MollifierRule::kNodes; ++p) {
                acc += rule.weights()[p] *
                       rule.apply([&](double z) { return graphs[p].yosida(lambda, z); }, u, radius);
            }
            values[k] = acc;
        }
        cells[i] = std::make_shared<const SmoothMonotoneFn>(finish_table(std::move(values), options.u_range));
    }
    return RegularizedTheta(std::move(cells));
}

namespace {

double bisect_inverse(const std::function<double(double)>& f, double y) {
    double lo = -1.0, hi = 1.0;
    int k = 0;
    for (; k < 200 && f(lo) > y; ++k) lo *= 2.0;
    if (k == 200) throw std::invalid_argument("check_inverse_convergence: sequence member not surjective");
    for (k = 0; k < 200 && f(hi) < y; ++k) hi *= 2.0;
    if (k == 200) throw std::invalid_argument("check_inverse_convergence: sequence member not surjective");
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < y) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> check_inverse_convergence(const std::vector<std::function<double(double)>>& sequence,
                                              const MonotoneGraph& limit, double a, double b) {
    const MonotoneGraph eta = limit.inverse();
    if (eta.has_jumps()) {
        throw std::invalid_argument("check_inverse_convergence: limit inverse is not continuous");
    }
    constexpr std::size_t kPoints = 1000;
    std::vector<double> errors;
    errors.reserve(sequence.size());
    for (const auto& f : sequence) {
        double worst = 0.0;
        for (std::size_t p = 0; p < kPoints; ++p) {
            const double y = a + (b - a) * static_cast<double>(p) / static_cast<double>(kPoints - 1);
            worst = std::max(worst, std::abs(bisect_inverse(f, y) - eta.eval(y).lo));
        }
        errors.push_back(worst);
    }
    return errors;
}

std::vector<double> uniform_errors(const std::vector<std::function<double(double)>>& sequence,
                                   const std::function<double(double)>& limit, double a, double b,
                                   std::size_t points) {
    std::vector<double> errors;
    for (const auto& f : sequence) {
        double worst = 0.0;
        for (std::size_t p = 0; p < points; ++p) {
            const double x = a + (b - a) * static_cast<double>(p) / static_cast<double>(points - 1);
            worst = std::max(worst, std::abs(f(x) - limit(x)));
        }
        errors.push_back(worst);
    }
    return errors;
}

}  // namespace mmflux
