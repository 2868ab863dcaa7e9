#include "mmflux/flux.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mmflux/kernel.hpp"

namespace mmflux {

using nlohmann::json;

FluxCurve::FluxCurve(std::vector<std::pair<double, double>> samples, std::vector<FluxJump> jumps)
    : samples_(std::move(samples)), jumps_(std::move(jumps)) {
    std::sort(jumps_.begin(), jumps_.end(), [](const FluxJump& a, const FluxJump& b) { return a.z < b.z; });
    for (std::size_t k = 0; k + 1 < jumps_.size(); ++k) {
        if (!(jumps_[k].z < jumps_[k + 1].z)) {
            throw std::invalid_argument("FluxCurve: overlapping jump points at z = " + std::to_string(jumps_[k].z));
        }
    }
    for (std::size_t i = 0; i + 1 < samples_.size(); ++i) {
        if (!(samples_[i].first < samples_[i + 1].first)) {
            throw std::invalid_argument("FluxCurve: sample abscissae must be strictly increasing");
        }
    }
    for (const auto& [x, y] : samples_) {
        if (!std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument("FluxCurve: non-finite sample");
    }
    for (const auto& jp : jumps_) {
        if (!std::isfinite(jp.left) || !std::isfinite(jp.right)) {
            throw std::invalid_argument("FluxCurve: jump limits must be finite");
        }
    }
    // Merge samples and jump points into one knot list; jump points win over coincident samples.
    std::size_t s = 0, k = 0;
    while (s < samples_.size() || k < jumps_.size()) {
        if (k < jumps_.size() && (s == samples_.size() || jumps_[k].z <= samples_[s].first)) {
            if (s < samples_.size() && samples_[s].first == jumps_[k].z) ++s;
            knots_.push_back({jumps_[k].z, jumps_[k].left, jumps_[k].right});
            ++k;
        } else {
            knots_.push_back({samples_[s].first, samples_[s].second, samples_[s].second});
            ++s;
        }
    }
    if (knots_.size() < 2) throw std::invalid_argument("FluxCurve needs at least two knots");
}

double FluxCurve::eval_side(double v, bool right_side) const {
    const std::size_t n = knots_.size();
    if (v < knots_.front().x) {
        const auto& a = knots_[0];
        const auto& b = knots_[1];
        const double s = (b.left - a.right) / (b.x - a.x);
        return a.left + s * (v - a.x);
    }
    if (v > knots_.back().x) {
        const auto& a = knots_[n - 2];
        const auto& b = knots_[n - 1];
        const double s = (b.left - a.right) / (b.x - a.x);
        return b.right + s * (v - b.x);
    }
    const auto it = std::lower_bound(knots_.begin(), knots_.end(), v, [](const Knot& k, double x) { return k.x < x; });
    const auto i = static_cast<std::size_t>(it - knots_.begin());
    if (knots_[i].x == v) return right_side ? knots_[i].right : knots_[i].left;
    const auto& a = knots_[i - 1];
    const auto& b = knots_[i];
    const double t = (v - a.x) / (b.x - a.x);
    return (1.0 - t) * a.right + t * b.left;
}

double FluxCurve::operator()(double v) const { return eval_side(v, true); }
double FluxCurve::left_limit(double v) const { return eval_side(v, false); }
double FluxCurve::right_limit(double v) const { return eval_side(v, true); }

Interval FluxCurve::eval_interval(double v) const {
    const double l = left_limit(v);
    const double r = right_limit(v);
    return {std::min(l, r), std::max(l, r)};
}

Interval FluxCurve::image(double lo, double hi) const {
    Interval out = eval_interval(lo);
    auto absorb = [&](const Interval& i) {
        out.lo = std::min(out.lo, i.lo);
        out.hi = std::max(out.hi, i.hi);
    };
    absorb(eval_interval(hi));
    for (const auto& k : knots_) {
        if (k.x > lo && k.x < hi) absorb({std::min(k.left, k.right), std::max(k.left, k.right)});
    }
    return out;
}

void to_json(json& j, const FluxCurve& a) {
    json samples = json::array();
    for (const auto& [x, y] : a.samples()) samples.push_back({x, y});
    json jumps = json::array();
    for (const auto& jp : a.jumps()) jumps.push_back({{"z", jp.z}, {"left", jp.left}, {"right", jp.right}});
    j = json{{"samples", samples}, {"jumps", jumps}};
}

void from_json(const json& j, FluxCurve& a) {
    std::vector<std::pair<double, double>> samples;
    for (const auto& s : j.at("samples")) samples.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
    std::vector<FluxJump> jumps;
    if (j.contains("jumps")) {
        for (const auto& jp : j.at("jumps")) {
            jumps.push_back({jp.at("z").get<double>(), jp.at("left").get<double>(), jp.at("right").get<double>()});
        }
    }
    a = FluxCurve(std::move(samples), std::move(jumps));
}

FluxCurve FluxSpec::build() const {
    if (kind == "samples") return curve;
    auto base = [&](double v) -> double {
        if (kind == "burgers") return 0.5 * v * v;
        if (kind == "linear") return speed * v;
        if (kind == "cubic") return speed * v * v * v / 3.0;
        throw std::invalid_argument("unknown flux kind '" + kind + "'");
    };
    auto sorted_steps = steps;
    std::sort(sorted_steps.begin(), sorted_steps.end(), [](const Step& a, const Step& b) { return a.z < b.z; });
    auto stepped = [&](double v) {
        double acc = base(v);
        for (const auto& s : sorted_steps) {
            if (v > s.z) acc += s.height;
        }
        return acc;
    };
    if (samples < 2 || !(range > 0.0)) throw std::invalid_argument("flux sampling needs range > 0 and >= 2 samples");
    std::vector<std::pair<double, double>> pts;
    pts.reserve(samples);
    const double h = 2.0 * range / static_cast<double>(samples - 1);
    for (std::size_t i = 0; i < samples; ++i) {
        const double v = (i + 1 == samples) ? range : -range + h * static_cast<double>(i);
        pts.emplace_back(v, stepped(v));
    }
    std::vector<FluxJump> jumps;
    for (const auto& s : sorted_steps) {
        const double left = stepped(s.z);  // excludes this step (v > z is false)
        jumps.push_back({s.z, left, left + s.height});
    }
    return FluxCurve(std::move(pts), std::move(jumps));
}

void to_json(json& j, const FluxSpec& f) {
    if (f.kind == "samples") {
        j = json{{"kind", "samples"}, {"curve", f.curve}};
        return;
    }
    j = json{{"kind", f.kind}, {"speed", f.speed}, {"range", f.range}, {"samples", f.samples}};
    if (!f.steps.empty()) {
        json s = json::array();
        for (const auto& st : f.steps) s.push_back({{"z", st.z}, {"height", st.height}});
        j["steps"] = s;
    }
}

void from_json(const json& j, FluxSpec& f) {
    f = FluxSpec{};
    f.kind = j.value("kind", std::string("burgers"));
    if (f.kind == "samples") {
        f.curve = j.at("curve").get<FluxCurve>();
        return;
    }
    if (f.kind != "burgers" && f.kind != "linear" && f.kind != "cubic") {
        throw std::invalid_argument("unknown flux kind '" + f.kind + "'");
    }
    f.speed = j.value("speed", 1.0);
    f.range = j.value("range", 8.0);
    f.samples = j.value("samples", std::size_t{4096});
    if (j.contains("steps")) {
        for (const auto& s : j.at("steps")) f.steps.push_back({s.at("z").get<double>(), s.at("height").get<double>()});
    }
}

Parametrization::Parametrization(const FluxCurve& a, double slope) : a_(a), slope_(slope) {
    if (!(slope > 0.0)) throw std::invalid_argument("Parametrization: slope between plateaus must be positive");
    const auto& jumps = a_.jumps();
    for (std::size_t k = 0; k < jumps.size(); ++k) {
        Plateau p;
        p.z = jumps[k].z;
        p.alpha = (k == 0) ? jumps[0].z : plateaus_.back().beta + (jumps[k].z - jumps[k - 1].z) / slope_;
        p.beta = p.alpha + 1.0;
        plateaus_.push_back(p);
    }
}

double Parametrization::U(double s) const {
    if (plateaus_.empty()) return slope_ * s;
    if (s <= plateaus_.front().alpha) return plateaus_.front().z + slope_ * (s - plateaus_.front().alpha);
    for (std::size_t k = 0; k < plateaus_.size(); ++k) {
        const auto& p = plateaus_[k];
        if (s <= p.beta) return p.z;
        if (k + 1 == plateaus_.size() || s < plateaus_[k + 1].alpha) return p.z + slope_ * (s - p.beta);
    }
    return plateaus_.back().z;  // unreachable
}

double Parametrization::calA(double s) const {
    for (const auto& p : plateaus_) {
        if (s >= p.alpha && s <= p.beta) {
            const double l = a_.left_limit(p.z);
            const double r = a_.right_limit(p.z);
            return l + (s - p.alpha) / (p.beta - p.alpha) * (r - l);
        }
    }
    return a_(U(s));
}

double Parametrization::s_of(double v) const {
    if (plateaus_.empty()) return v / slope_;
    if (v <= plateaus_.front().z) return plateaus_.front().alpha + (v - plateaus_.front().z) / slope_;
    for (std::size_t k = 0; k < plateaus_.size(); ++k) {
        if (k + 1 == plateaus_.size() || v <= plateaus_[k + 1].z) {
            if (k + 1 < plateaus_.size() && v == plateaus_[k + 1].z) return plateaus_[k + 1].alpha;
            return plateaus_[k].beta + (v - plateaus_[k].z) / slope_;
        }
    }
    return plateaus_.back().beta;  // unreachable
}

std::vector<std::array<double, 3>> Parametrization::sample(double s_lo, double s_hi, std::size_t n) const {
    std::vector<std::array<double, 3>> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = (n == 1) ? s_lo : s_lo + (s_hi - s_lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        rows.push_back({s, U(s), calA(s)});
    }
    return rows;
}

SampledCurve smooth_flux(const FluxCurve& a, double j, double range, std::size_t samples) {
    if (!(j >= 1.0)) throw std::invalid_argument("smooth_flux: j must be >= 1");
    const double radius = 1.0 / j;
    const double want = std::ceil(2.0 * range / (0.25 * radius)) + 1.0;
    const auto n = static_cast<std::size_t>(std::clamp(want, static_cast<double>(samples), 65537.0));
    const auto& rule = mollifier();
    return SampledCurve::tabulate([&](double v) { return rule.apply(a, v, radius); }, -range, range, n);
}

Interval composed_flux(const MonotoneGraph& theta_cell, double u, const FluxCurve& a) {
    const Interval values = theta_cell.eval(u);
    return a.image(values.lo, values.hi);
}

double composed_flux(const RegularizedTheta& theta, std::size_t cell, double u, const SampledCurve& aj) {
    return aj(theta.value(cell, u));
}

}  // namespace mmflux
