#include "mmflux/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mmflux/kernel.hpp"

namespace mmflux {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Sources

const std::vector<std::string>& SourceSpec::registry() {
    static const std::vector<std::string> ids{"zero", "linear", "arctan", "modulated", "antidissipative"};
    return ids;
}

double SourceSpec::coefficient(double t, double x) const {
    if (id == "modulated") return c * (1.0 + amplitude * std::sin(wavenumber * x) * std::cos(frequency * t));
    return c;
}

double SourceSpec::profile(double u) const {
    if (id == "zero") return 0.0;
    if (id == "linear") return -u;
    if (id == "arctan" || id == "modulated") return -std::atan(u);
    if (id == "antidissipative") return u;
    throw std::invalid_argument("unknown source id '" + id + "'");
}

double SourceSpec::lipschitz() const {
    if (id == "zero") return 0.0;
    const double cmax = (id == "modulated") ? c * (1.0 + std::abs(amplitude)) : c;
    return std::abs(cmax);
}

void to_json(json& j, const SourceSpec& s) {
    j = json{{"id", s.id}, {"c", s.c}};
    if (s.id == "modulated") {
        j["amplitude"] = s.amplitude;
        j["wavenumber"] = s.wavenumber;
        j["frequency"] = s.frequency;
    }
}

void from_json(const json& j, SourceSpec& s) {
    s = SourceSpec{};
    s.id = j.value("id", std::string("zero"));
    const auto& ids = SourceSpec::registry();
    if (std::find(ids.begin(), ids.end(), s.id) == ids.end()) {
        throw std::invalid_argument("unknown source id '" + s.id + "'");
    }
    s.c = j.value("c", 1.0);
    s.amplitude = j.value("amplitude", 0.0);
    s.wavenumber = j.value("wavenumber", 1.0);
    s.frequency = j.value("frequency", 1.0);
}

// ---------------------------------------------------------------------------
// Initial data

double InitialDatum::operator()(double x) const {
    if (kind == "constant") return value;
    if (kind == "riemann") return x < at ? left : right;
    if (kind == "box") return (x >= a && x <= b) ? value : 0.0;
    if (kind == "bump") return value * std::exp(1.0) * bump((x - at) / radius);
    if (kind == "samples") {
        if (xs.empty() || x < xs.front() || x > xs.back()) return 0.0;
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        if (it == xs.end()) return us.back();
        const auto i = static_cast<std::size_t>(it - xs.begin());
        const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return (1.0 - t) * us[i - 1] + t * us[i];
    }
    throw std::invalid_argument("unknown initial datum kind '" + kind + "'");
}

double InitialDatum::sup_abs() const {
    if (kind == "constant" || kind == "box" || kind == "bump") return std::abs(value);
    if (kind == "riemann") return std::max(std::abs(left), std::abs(right));
    double s = 0.0;
    for (double u : us) s = std::max(s, std::abs(u));
    return s;
}

void to_json(json& j, const InitialDatum& d) {
    j = json{{"kind", d.kind}};
    if (d.kind == "constant") {
        j["value"] = d.value;
    } else if (d.kind == "riemann") {
        j["left"] = d.left;
        j["right"] = d.right;
        j["at"] = d.at;
    } else if (d.kind == "box") {
        j["a"] = d.a;
        j["b"] = d.b;
        j["value"] = d.value;
    } else if (d.kind == "bump") {
        j["at"] = d.at;
        j["radius"] = d.radius;
        j["value"] = d.value;
    } else {
        j["xs"] = d.xs;
        j["us"] = d.us;
    }
}

void from_json(const json& j, InitialDatum& d) {
    d = InitialDatum{};
    d.kind = j.value("kind", std::string("constant"));
    if (d.kind == "constant") {
        d.value = j.value("value", 0.0);
    } else if (d.kind == "riemann") {
        d.left = j.at("left").get<double>();
        d.right = j.at("right").get<double>();
        d.at = j.value("at", 0.0);
    } else if (d.kind == "box") {
        d.a = j.at("a").get<double>();
        d.b = j.at("b").get<double>();
        d.value = j.at("value").get<double>();
    } else if (d.kind == "bump") {
        d.at = j.value("at", 0.0);
        d.radius = j.at("radius").get<double>();
        d.value = j.at("value").get<double>();
        if (!(d.radius > 0.0)) throw std::invalid_argument("bump initial datum needs radius > 0");
    } else if (d.kind == "samples") {
        d.xs = j.at("xs").get<std::vector<double>>();
        d.us = j.at("us").get<std::vector<double>>();
        if (d.xs.size() != d.us.size() || d.xs.size() < 2) {
            throw std::invalid_argument("sampled initial datum needs matching xs/us with >= 2 entries");
        }
        if (!std::is_sorted(d.xs.begin(), d.xs.end())) throw std::invalid_argument("sampled initial datum: xs unsorted");
    } else {
        throw std::invalid_argument("unknown initial datum kind '" + d.kind + "'");
    }
}

// ---------------------------------------------------------------------------

double perturbation(double r, double ell, double m) {
    const double neg = std::max(-r, 0.0);
    const double pos = std::max(r, 0.0);
    const double a = std::isinf(ell) ? 0.0 : std::atan(neg) / ell;
    const double b = std::isinf(m) ? 0.0 : std::atan(pos) / m;
    return a - b;
}

double ProblemSpec::table_range() const {
    if (u_range) return *u_range;
    const double s = std::max({u0.sup_abs(), std::abs(far_left), std::abs(far_right)});
    return 1.25 * s + 1.0;
}

namespace {

json index_to_json(double v) {
    if (std::isinf(v)) return "inf";
    return v;
}

double index_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return kInfinity;
        throw std::invalid_argument("perturbation index must be a number or \"inf\"");
    }
    return j.get<double>();
}

}  // namespace

void to_json(json& j, const ProblemSpec& p) {
    j = json{{"domain", {p.x_lo, p.x_hi}},
             {"T", p.T},
             {"theta", p.theta},
             {"flux", p.flux},
             {"source", p.source},
             {"u0", p.u0},
             {"j", p.j},
             {"ell", index_to_json(p.ell)},
             {"m", index_to_json(p.m)},
             {"boundary", {{"left", p.far_left}, {"right", p.far_right}}},
             {"padding", p.padding}};
    if (p.u_range) j["u_range"] = *p.u_range;
}

void from_json(const json& j, ProblemSpec& p) {
    p = ProblemSpec{};
    const auto dom = j.at("domain").get<std::vector<double>>();
    if (dom.size() != 2) throw std::invalid_argument("domain must be [x_lo, x_hi]");
    p.x_lo = dom[0];
    p.x_hi = dom[1];
    p.T = j.at("T").get<double>();
    if (j.contains("theta")) p.theta = j.at("theta").get<ThetaField>();
    if (j.contains("flux")) p.flux = j.at("flux").get<FluxSpec>();
    if (j.contains("source")) p.source = j.at("source").get<SourceSpec>();
    p.u0 = j.at("u0").get<InitialDatum>();
    p.j = j.value("j", 1024.0);
    if (j.contains("ell")) p.ell = index_from_json(j.at("ell"));
    if (j.contains("m")) p.m = index_from_json(j.at("m"));
    if (j.contains("boundary")) {
        p.far_left = j.at("boundary").value("left", 0.0);
        p.far_right = j.at("boundary").value("right", 0.0);
    }
    p.padding = j.value("padding", 0.0);
    if (j.contains("u_range")) p.u_range = j.at("u_range").get<double>();
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::hypotheses_hold(bool allow_test_only) const {
    for (const auto& c : checks) {
        if (!c.enforced || c.passed) continue;
        if (allow_test_only && c.name == "H4") continue;
        return false;
    }
    return true;
}

const HypothesisCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

void to_json(json& j, const ValidationReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks) {
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"enforced", c.enforced}, {"detail", c.detail}});
    }
    j = json{{"errors", r.errors}, {"checks", checks}};
}

ValidationReport validate_spec(const ProblemSpec& spec, const Grid1D& grid) {
    ValidationReport report;
    auto& err = report.errors;
    if (!(spec.T > 0.0) || !std::isfinite(spec.T)) err.push_back("T must be positive and finite");
    if (!(spec.x_lo < spec.x_hi)) err.push_back("domain must satisfy x_lo < x_hi");
    if (!(spec.j >= 1.0) || !std::isfinite(spec.j)) err.push_back("j must be >= 1");
    if (!(spec.ell >= 1.0)) err.push_back("ell must be >= 1 (or \"inf\")");
    if (!(spec.m >= 1.0)) err.push_back("m must be >= 1 (or \"inf\")");
    if (!std::isfinite(spec.u0.sup_abs())) err.push_back("u0 must be bounded");
    const auto& ids = SourceSpec::registry();
    if (std::find(ids.begin(), ids.end(), spec.source.id) == ids.end()) {
        err.push_back("unknown source id '" + spec.source.id + "'");
    }
    try {
        (void)spec.flux.build();
    } catch (const std::exception& e) {
        err.push_back(std::string("flux: ") + e.what());
    }
    if (!err.empty()) return report;

    const double R = spec.table_range();

    // (H1): maximal monotone with 0 in theta(x, 0), continuous inverse.
    {
        HypothesisCheck h{"H1", true, true, "maximal monotone cell graphs with 0 in theta(x,0) and continuous inverse"};
        for (std::size_t i = 0; i < grid.n_cells && h.passed; ++i) {
            const MonotoneGraph g = spec.theta.cell_graph(grid, i);
            std::ostringstream w;
            if (!g.is_surjective()) {
                w << "cell " << i << ": graph not surjective (zero tail slope)";
            } else if (!g.eval(0.0).contains(0.0)) {
                const auto s = g.eval(0.0);
                w << "cell " << i << ": 0 not in theta(x,0) = [" << s.lo << ", " << s.hi << "]";
            } else if (!g.strictly_increasing()) {
                w << "cell " << i << ": graph has a plateau, inverse eta is not continuous";
            }
            if (!w.str().empty()) {
                h.passed = false;
                h.detail = w.str();
            }
        }
        report.checks.push_back(h);
        report.checks.push_back({"H1-integrability", true, false,
                                 "theta*(.,l) in L1 is vacuous on a bounded domain; not enforced"});
    }

    // (H2): envelopes h1 <= |theta| <= h2 sampled on [-R, R], coercivity of h1.
    {
        HypothesisCheck h{"H2", true, true, ""};
        constexpr int kSamples = 201;
        std::vector<double> h1(kSamples, kInfinity), h2(kSamples, 0.0);
        for (std::size_t i = 0; i < grid.n_cells; ++i) {
            const MonotoneGraph g = spec.theta.cell_graph(grid, i);
            for (int s = 0; s < kSamples; ++s) {
                const double u = -R + 2.0 * R * s / (kSamples - 1);
                const auto vals = g.eval(u);
                h1[s] = std::min(h1[s], std::abs(g.minimal_selection(u)));
                h2[s] = std::max(h2[s], std::max(std::abs(vals.lo), std::abs(vals.hi)));
            }
        }
        const int mid = kSamples / 2;
        for (int s = mid + 1; s < kSamples && h.passed; ++s) {
            if (h1[s] < h1[s - 1]) {
                h.passed = false;
                h.detail = "lower envelope h1 decreases at u = " + std::to_string(-R + 2.0 * R * s / (kSamples - 1));
            }
        }
        for (int s = mid - 1; s >= 0 && h.passed; --s) {
            if (h1[s] < h1[s + 1]) {
                h.passed = false;
                h.detail = "lower envelope h1 decreases at u = " + std::to_string(-R + 2.0 * R * s / (kSamples - 1));
            }
        }
        if (h.passed && !(h1.front() > h1[mid] && h1.back() > h1[mid])) {
            h.passed = false;
            h.detail = "lower envelope h1 is not coercive on the sampled range";
        }
        if (h.passed) {
            std::ostringstream d;
            d << "sampled on [-" << R << ", " << R << "]: h1(-R) = " << h1.front() << ", h1(R) = " << h1.back()
              << ", max h2 = " << std::max(h2.front(), h2.back());
            h.detail = d.str();
        }
        report.checks.push_back(h);
    }

    report.checks.push_back({"H3", true, false, "far-field decay with exponent p is untestable on a bounded domain"});

    // (H4): f(t,x,0) = 0 and dissipativity on sampled triples.
    {
        HypothesisCheck h{"H4", true, true, "f(t,x,0) = 0 and (f(u)-f(v))(u-v) <= 0 on samples"};
        static const std::vector<double> us{1.0, 0.0, -1.0, 2.0, -2.0, 0.5, -0.5, 0.1, -0.1};
        std::vector<double> ts;
        for (int k = 0; k <= 4; ++k) ts.push_back(spec.T * k / 4.0);
        const std::size_t stride = std::max<std::size_t>(1, grid.n_cells / 16);
        for (double t : ts) {
            for (std::size_t i = 0; i < grid.n_cells && h.passed; i += stride) {
                const double x = grid.center(i);
                if (spec.source(t, x, 0.0) != 0.0) {
                    h.passed = false;
                    h.detail = "f(t,x,0) != 0 at x = " + std::to_string(x);
                    break;
                }
                for (double u : us) {
                    for (double v : us) {
                        if (u == v || !h.passed) continue;
                        const double su = u * R / 2.0, sv = v * R / 2.0;
                        const double prod = (spec.source(t, x, su) - spec.source(t, x, sv)) * (su - sv);
                        if (prod > 1e-14) {
                            std::ostringstream w;
                            w << "dissipativity fails at (u, v) = (" << su << ", " << sv << "), t = " << t
                              << ", x = " << x;
                            h.passed = false;
                            h.detail = w.str();
                        }
                    }
                }
            }
        }
        report.checks.push_back(h);
    }
    return report;
}

// ---------------------------------------------------------------------------

Approximation::Approximation(const ProblemSpec& spec, const Grid1D& grid)
    : grid_(grid),
      source_(spec.source),
      ell_(spec.ell),
      m_(spec.m),
      far_left_(spec.far_left),
      far_right_(spec.far_right),
      u_range_(spec.table_range()) {
    RegularizeOptions opts;
    opts.u_range = u_range_;
    theta_ = regularize_theta(spec.theta, grid, spec.j, opts);

    double v_range = 0.0;
    for (std::size_t i = 0; i < theta_.size(); ++i) {
        v_range = std::max({v_range, std::abs(theta_.value(i, u_range_)), std::abs(theta_.value(i, -u_range_))});
    }
    v_range = 1.05 * v_range + 1.0;
    flux_ = smooth_flux(spec.flux.build(), spec.j, v_range);

    if (source_.id != "zero") {
        const auto& rule = mollifier();
        const double radius = 1.0 / spec.j;
        const SourceSpec src = source_;
        profile_ = SampledCurve::tabulate(
            [&](double u) { return rule.apply([&](double z) { return src.profile(z); }, u, radius); }, -u_range_,
            u_range_, theta_.cell(0).curve().size());
        profile_offset_ = profile_(0.0);
    } else {
        profile_ = SampledCurve(-u_range_, u_range_, {0.0, 0.0});
    }
    const double pert_lip = std::max(std::isinf(ell_) ? 0.0 : 1.0 / ell_, std::isinf(m_) ? 0.0 : 1.0 / m_);
    source_lip_ = source_.lipschitz() + pert_lip * theta_.lipschitz();
}

double Approximation::interface_flux_fn(std::size_t k, double u) const {
    const std::size_t n = grid_.n_cells;
    const std::size_t l = (k == 0) ? 0 : k - 1;
    const std::size_t r = (k >= n) ? n - 1 : k;
    if (theta_.shared_cell(l) == theta_.shared_cell(r)) return flux_(theta_.value(l, u));
    return flux_(0.5 * (theta_.value(l, u) + theta_.value(r, u)));
}

double Approximation::flux_slope_bound(std::size_t k, double lo, double hi) const {
    const std::size_t n = grid_.n_cells;
    const std::size_t l = (k == 0) ? 0 : k - 1;
    const std::size_t r = (k >= n) ? n - 1 : k;
    if (hi < lo) std::swap(lo, hi);
    const auto& tl = theta_.cell(l).curve();
    const auto& tr = theta_.cell(r).curve();
    const double dtheta = std::max(tl.max_slope(lo, hi), tr.max_slope(lo, hi));
    // Both cell functions are increasing, so their values (and the mean) stay in this range.
    const double vlo = std::min(theta_.value(l, lo), theta_.value(r, lo));
    const double vhi = std::max(theta_.value(l, hi), theta_.value(r, hi));
    return flux_.max_slope(vlo, vhi) * dtheta;
}

double Approximation::source(double t, std::size_t cell, double u) const {
    if (source_.id == "zero") return 0.0;
    return source_.coefficient(t, grid_.center(cell)) * (profile_(u) - profile_offset_);
}

double Approximation::perturbed_source(double t, std::size_t cell, double u) const {
    return perturbed_source_v(t, cell, u, theta_.value(cell, u));
}

double Approximation::perturbed_source_v(double t, std::size_t cell, double u, double v) const {
    return source(t, cell, u) + perturbation(v, ell_, m_);
}

}  // namespace mmflux
