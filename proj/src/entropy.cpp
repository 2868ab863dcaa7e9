#include "mmflux/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mmflux/errors.hpp"
#include "mmflux/kernel.hpp"

namespace mmflux {

namespace {

double sgn(double x) { return (x > 0.0) - (x < 0.0); }
double pos(double x) { return x > 0.0 ? x : 0.0; }

struct Window {
    std::size_t n0, n1;  // steps [n0, n1)
    std::size_t i0, i1;  // cells [i0, i1)
};

Window support_window(const RunResult& run, const TestFunction& psi) {
    Window w{0, run.steps(), 0, run.grid.n_cells};
    const double ta = psi.tc - psi.rt, tb = psi.tc + psi.rt;
    while (w.n0 < w.n1 && run.times[w.n0 + 1] <= ta) ++w.n0;
    while (w.n1 > w.n0 && run.times[w.n1 - 1] >= tb) --w.n1;
    if (!psi.flat_in_x()) {
        const double xa = psi.xc - psi.rx, xb = psi.xc + psi.rx;
        while (w.i0 < w.i1 && run.grid.right_edge(w.i0) <= xa) ++w.i0;
        while (w.i1 > w.i0 && run.grid.left_edge(w.i1 - 1) >= xb) --w.i1;
    }
    return w;
}

std::size_t cell_at(const Grid1D& g, double x) {
    const double s = std::floor((x - g.x_lo) / g.dx());
    return static_cast<std::size_t>(std::clamp(s, 0.0, static_cast<double>(g.n_cells - 1)));
}

void require_matching(const RunResult& a, const RunResult& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("runs are on different grids");
    if (a.times.size() != b.times.size()) throw std::invalid_argument("runs have different time levels");
    for (std::size_t n = 0; n < a.times.size(); ++n) {
        if (std::abs(a.times[n] - b.times[n]) > 1e-12 * (1.0 + std::abs(a.times[n]))) {
            throw std::invalid_argument("runs have different time levels (use a common fixed dt)");
        }
    }
}

/// Separable evaluation of the cell weights over a support window.
class WindowWeights {
public:
    WindowWeights(const RunResult& run, const TestFunction& psi, const Window& w) : run_(run), w_(w) {
        const Grid1D& g = run.grid;
        const std::size_t m = w.i1 - w.i0;
        mid_.resize(m);
        edge_.resize(m + 1);
        for (std::size_t c = 0; c < m; ++c) mid_[c] = psi.space_factor(g.center(w.i0 + c));
        for (std::size_t c = 0; c <= m; ++c) edge_[c] = psi.flat_in_x() ? 0.0 : psi.space_factor(g.left_edge(w.i0 + c));
        const std::size_t steps = w.n1 - w.n0;
        t_lo_.resize(steps);
        t_hi_.resize(steps);
        t_mid_.resize(steps);
        for (std::size_t s = 0; s < steps; ++s) {
            const double t0 = run.times[w.n0 + s], t1 = run.times[w.n0 + s + 1];
            t_lo_[s] = psi.time_factor(t0);
            t_hi_[s] = psi.time_factor(t1);
            t_mid_[s] = psi.time_factor(0.5 * (t0 + t1));
        }
    }

    CellWeights at(std::size_t n, std::size_t i) const {
        const std::size_t s = n - w_.n0, c = i - w_.i0;
        const double dt = run_.times[n + 1] - run_.times[n];
        const double dx = run_.grid.dx();
        return {dx * (t_hi_[s] - t_lo_[s]) * mid_[c], dt * t_mid_[s] * (edge_[c + 1] - edge_[c]),
                dt * dx * t_mid_[s] * mid_[c]};
    }

private:
    const RunResult& run_;
    Window w_;
    std::vector<double> mid_, edge_, t_lo_, t_hi_, t_mid_;
};

}  // namespace

double TestFunction::time_factor(double t) const { return bump((t - tc) / rt); }

double TestFunction::space_factor(double x) const { return flat_in_x() ? 1.0 : bump((x - xc) / rx); }

std::vector<TestFunction> standard_battery(double T, double x_lo, double x_hi,
                                           const std::vector<std::pair<double, double>>& radii) {
    const double L = x_hi - x_lo;
    std::vector<TestFunction> out;
    for (std::size_t r = 0; r < radii.size(); ++r) {
        for (int a = 1; a <= 3; ++a) {
            for (int b = 1; b <= 3; ++b) {
                TestFunction psi;
                psi.tc = T * a / 4.0;
                psi.xc = x_lo + L * b / 4.0;
                psi.rt = radii[r].first * T;
                psi.rx = std::isinf(radii[r].second) ? radii[r].second : radii[r].second * L;
                psi.id = "t" + std::to_string(a) + "x" + std::to_string(b) + "r" + std::to_string(r);
                out.push_back(psi);
            }
        }
    }
    return out;
}

CellWeights cell_weights(const TestFunction& psi, double t0, double t1, double x0, double x1) {
    const double tm = 0.5 * (t0 + t1);
    const double xm = 0.5 * (x0 + x1);
    CellWeights w;
    w.wt = (x1 - x0) * (psi(t1, xm) - psi(t0, xm));
    w.wx = psi.flat_in_x() ? 0.0 : (t1 - t0) * (psi(tm, x1) - psi(tm, x0));
    w.w0 = (t1 - t0) * (x1 - x0) * psi(tm, xm);
    return w;
}

void check_resolution(const RunResult& run, const TestFunction& psi) {
    const double dx = run.grid.dx();
    double dt = 0.0;
    for (double d : run.dts) dt = std::max(dt, d);
    std::ostringstream msg;
    if (!psi.flat_in_x() && psi.rx < 8.0 * dx) {
        const auto need = static_cast<std::size_t>(std::ceil(8.0 * (run.grid.x_hi - run.grid.x_lo) / psi.rx));
        msg << "test function " << psi.id << ": x-radius " << psi.rx << " spans fewer than 8 cells (dx = " << dx
            << "); use at least " << need << " cells";
        throw ResolutionError(msg.str());
    }
    if (psi.rt < 8.0 * dt) {
        msg << "test function " << psi.id << ": t-radius " << psi.rt << " spans fewer than 8 steps (dt = " << dt
            << "); refine the grid or set a smaller fixed dt";
        throw ResolutionError(msg.str());
    }
    if (psi.tc - psi.rt < 0.0 || psi.tc + psi.rt > run.times.back()) {
        msg << "test function " << psi.id << " is not supported inside (0, T)";
        throw ResolutionError(msg.str());
    }
}

std::string to_string(Form f) {
    switch (f) {
        case Form::semi_plus: return "SEMI_PLUS";
        case Form::semi_minus: return "SEMI_MINUS";
        case Form::sgn: return "SGN";
        case Form::n1: return "N1";
        case Form::n2: return "N2";
    }
    return "?";
}

Form form_from_string(const std::string& s) {
    for (Form f : all_forms()) {
        if (to_string(f) == s) return f;
    }
    throw std::invalid_argument("unknown entropy form '" + s + "'");
}

double entropy_residual(Form form, const RunResult& run, const Approximation& approx, double k,
                        const TestFunction& psi) {
    const Grid1D& grid = run.grid;
    const std::size_t n_cells = grid.n_cells;
    const double dx = grid.dx();
    const Window w = support_window(run, psi);

    // Per-cell quantities that depend on k only.
    auto eta_of_k = [&](std::size_t i) { return form == Form::n1 ? k : approx.eta(i, k); };
    std::vector<double> eta_k(n_cells), dphi_k;
    for (std::size_t i = w.i0; i < w.i1; ++i) eta_k[i] = eta_of_k(i);
    if (form == Form::n1) {
        std::vector<double> phi(n_cells);
        const std::size_t lo = w.i0 == 0 ? 0 : w.i0 - 1;
        const std::size_t hi = std::min(n_cells, w.i1 + 1);
        for (std::size_t i = lo; i < hi; ++i) phi[i] = approx.cell_flux(i, k);
        dphi_k.resize(n_cells);
        for (std::size_t i = w.i0; i < w.i1; ++i) {
            const std::size_t l = i == 0 ? 0 : i - 1;
            const std::size_t r = i + 1 == n_cells ? i : i + 1;
            dphi_k[i] = (phi[r] - phi[l]) / (static_cast<double>(r - l) * dx);
        }
    }
    const double a_k = approx.flux_of_v(k);
    const WindowWeights ww(run, psi, w);

    double total = 0.0;
    for (std::size_t n = w.n0; n < w.n1; ++n) {
        const double t0 = run.times[n];
        const Field& f = run.fields[n];
        for (std::size_t i = w.i0; i < w.i1; ++i) {
            const CellWeights cw = ww.at(n, i);
            const double u = f.u[i], v = f.v[i];
            const double s = approx.perturbed_source_v(t0, i, u, v);
            double e = 0.0, q = 0.0, src = 0.0;
            switch (form) {
                case Form::semi_plus:
                    e = pos(u - eta_k[i]);
                    if (v > k) {
                        q = approx.flux_of_v(v) - a_k;
                        src = s;
                    }
                    break;
                case Form::semi_minus:
                    e = pos(eta_k[i] - u);
                    if (k > v) {
                        q = a_k - approx.flux_of_v(v);
                        src = -s;
                    }
                    break;
                case Form::sgn:
                case Form::n2:
                    e = std::abs(u - eta_k[i]);
                    q = sgn(v - k) * (approx.flux_of_v(v) - a_k);
                    src = sgn(v - k) * s;
                    break;
                case Form::n1:
                    e = std::abs(u - k);
                    q = sgn(u - k) * (approx.flux_of_v(v) - approx.cell_flux(i, k));
                    src = sgn(u - k) * (s - dphi_k[i]);
                    break;
            }
            total += e * cw.wt + q * cw.wx + src * cw.w0;
        }
    }

    if (form != Form::sgn) {
        const Field& f0 = run.fields.front();
        double init = 0.0;
        for (std::size_t i = 0; i < n_cells; ++i) {
            const double p = psi(0.0, grid.center(i));
            if (p == 0.0) continue;
            const double d = f0.u[i] - eta_of_k(i);
            const double term = form == Form::semi_plus ? pos(d) : form == Form::semi_minus ? pos(-d) : std::abs(d);
            init += term * p;
        }
        total += dx * init;
    }
    return total;
}

std::vector<double> k_samples(const RunResult& run, const ProblemSpec& spec, std::size_t count) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& f : run.fields) {
        for (double v : f.v) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    lo -= 0.5;
    hi += 0.5;
    std::vector<double> ks;
    for (std::size_t q = 0; q < count; ++q) {
        ks.push_back(count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(q) / (count - 1));
    }
    const FluxCurve flux = spec.flux.build();
    for (const auto& jp : flux.jumps()) ks.push_back(jp.z);
    const std::size_t n = run.grid.n_cells;
    for (std::size_t i : {std::size_t{0}, n / 2, n - 1}) {
        const MonotoneGraph g = spec.theta.cell_graph(run.grid, i);
        for (std::size_t b = 0; b < g.breakpoints().size(); ++b) {
            if (g.left_values()[b] < g.right_values()[b]) {
                ks.push_back(g.left_values()[b]);
                ks.push_back(g.right_values()[b]);
            }
        }
    }
    std::sort(ks.begin(), ks.end());
    std::vector<double> out;
    for (double k : ks) {
        if (out.empty() || k - out.back() > 1e-12) out.push_back(k);
    }
    return out;
}

std::vector<std::pair<double, double>> initial_trace_error(const RunResult& run, double a, double b,
                                                           std::size_t levels) {
    const Grid1D& g = run.grid;
    const Field& f0 = run.fields.front();
    std::vector<std::pair<double, double>> out;
    for (std::size_t n = 0; n < std::min(levels, run.fields.size()); ++n) {
        double acc = 0.0;
        for (std::size_t i = 0; i < g.n_cells; ++i) {
            const double x = g.center(i);
            if (x >= a && x <= b) acc += std::abs(run.fields[n].u[i] - f0.u[i]);
        }
        out.emplace_back(run.times[n], acc * g.dx());
    }
    return out;
}

std::string to_string(PairKind k) {
    switch (k) {
        case PairKind::contraction: return "CONTRACTION";
        case PairKind::comparison: return "COMPARISON";
        case PairKind::kato: return "KATO";
    }
    return "?";
}

double pair_gap(PairKind kind, const RunResult& run1, const Approximation& a1, const RunResult& run2,
                const Approximation& a2, const TestFunction& psi) {
    require_matching(run1, run2);
    const Window w = support_window(run1, psi);
    const WindowWeights ww(run1, psi, w);
    double total = 0.0;
    for (std::size_t n = w.n0; n < w.n1; ++n) {
        const double t0 = run1.times[n];
        const Field& f1 = run1.fields[n];
        const Field& f2 = run2.fields[n];
        for (std::size_t i = w.i0; i < w.i1; ++i) {
            const CellWeights cw = ww.at(n, i);
            const double u1 = f1.u[i], v1 = f1.v[i], u2 = f2.u[i], v2 = f2.v[i];
            const double s1 = a1.perturbed_source_v(t0, i, u1, v1);
            const double s2 = a2.perturbed_source_v(t0, i, u2, v2);
            double e = 0.0, q = 0.0, src = 0.0;
            switch (kind) {
                case PairKind::contraction:
                    e = std::abs(u1 - u2);
                    q = sgn(v1 - v2) * (a1.flux_of_v(v1) - a1.flux_of_v(v2));
                    src = sgn(v1 - v2) * (s1 - s2) + (v1 == v2 ? std::abs(s1 - s2) : 0.0);
                    break;
                case PairKind::comparison:
                    e = pos(u1 - u2);
                    if (v1 > v2) {
                        q = a1.flux_of_v(v1) - a1.flux_of_v(v2);
                        src = s1 - s2;
                    } else if (v1 == v2) {
                        src = pos(s1 - s2);
                    }
                    break;
                case PairKind::kato:
                    e = std::abs(u1 - u2);
                    q = sgn(u1 - u2) * (a1.cell_flux(i, u1) - a1.cell_flux(i, u2));
                    src = sgn(u1 - u2) * (s1 - s2) + (u1 == u2 ? std::abs(s1 - s2) : 0.0);
                    break;
            }
            total += e * cw.wt + q * cw.wx + src * cw.w0;
        }
    }
    return total;
}

std::vector<std::pair<double, double>> l1_distance_curve(const RunResult& run1, const RunResult& run2) {
    require_matching(run1, run2);
    const std::size_t n = run1.grid.n_cells;
    const double dx = run1.grid.dx();
    std::vector<std::pair<double, double>> out;
    for (std::size_t l = 0; l < run1.fields.size(); ++l) {
        const auto& u1 = run1.fields[l].u;
        const auto& u2 = run2.fields[l].u;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += std::abs(u1[i] - u2[i]);
        out.emplace_back(run1.times[l], acc * dx);
    }
    return out;
}

double EntropyReport::minimum(Form f) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& e : entries) {
        if (e.form == f) m = std::min(m, e.residual);
    }
    return m;
}

double EntropyReport::minimum() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& e : entries) m = std::min(m, e.residual);
    return m;
}

EntropyReport entropy_report(const RunResult& run, const Approximation& approx, const std::vector<Form>& forms,
                             const std::vector<double>& ks, const std::vector<TestFunction>& battery) {
    for (const auto& psi : battery) check_resolution(run, psi);
    EntropyReport rep;
    rep.cells = run.grid.n_cells;
    rep.dx = run.grid.dx();
    rep.tolerance = residual_tolerance(rep.dx, run.max_abs_v());
    for (Form form : forms) {
        for (double k : ks) {
            for (const auto& psi : battery) {
                double kk = k;
                if (form == Form::n1) {
                    const double xc = psi.flat_in_x() ? 0.5 * (run.grid.x_lo + run.grid.x_hi) : psi.xc;
                    kk = approx.eta(cell_at(run.grid, xc), k);
                }
                rep.entries.push_back({form, kk, psi.id, entropy_residual(form, run, approx, kk, psi)});
            }
        }
    }
    return rep;
}

void to_json(nlohmann::json& j, const EntropyReport& r) {
    nlohmann::json minima = nlohmann::json::object();
    for (Form f : all_forms()) {
        const double m = r.minimum(f);
        if (std::isfinite(m)) minima[to_string(f)] = m;
    }
    const double dx = r.dx;
    const double mn = r.minimum();
    j = nlohmann::json{{"cells", r.cells},
                       {"dx", dx},
                       {"tolerance", r.tolerance},
                       {"minimum", mn},
                       {"margin_constant", dx > 0.0 ? -mn / dx : 0.0},
                       {"minima", minima},
                       {"holds", r.holds()},
                       {"entries", r.entries.size()}};
}

void write_csv(std::ostream& os, const EntropyReport& r) {
    os << "form,k,psi_id,residual\n";
    os << std::setprecision(17);
    for (const auto& e : r.entries) os << to_string(e.form) << ',' << e.k << ',' << e.psi << ',' << e.residual << '\n';
}

}  // namespace mmflux
