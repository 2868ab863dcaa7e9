#include "mmflux/measures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mmflux {

namespace {

constexpr double kMergeTolerance = 1e-9;

double sgn(double x) { return (x > 0.0) - (x < 0.0); }
double pos(double x) { return x > 0.0 ? x : 0.0; }

std::vector<std::pair<std::size_t, std::size_t>> blocks(std::size_t n, std::size_t size) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const std::size_t count = std::max<std::size_t>(1, n / size);
    for (std::size_t b = 0; b < count; ++b) out.emplace_back(b * size, b + 1 == count ? n : (b + 1) * size);
    return out;
}

std::vector<Atom> merge(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<Atom> atoms;
    const double w = 1.0 / static_cast<double>(values.size());
    std::size_t count = 0;
    for (std::size_t s = 0; s < values.size(); ++s) {
        if (!atoms.empty() && values[s] - atoms.back().value <= kMergeTolerance) {
            ++count;
        } else {
            if (!atoms.empty()) atoms.back().weight = w * static_cast<double>(count);
            atoms.push_back({values[s], 0.0});
            count = 1;
        }
    }
    atoms.back().weight = w * static_cast<double>(count);
    return atoms;
}

CellWeights macro_weights(const YoungMeasureEstimate& ym, const MacroCell& c, const TestFunction& psi) {
    if (ym.times[c.n1] <= psi.tc - psi.rt || ym.times[c.n0] >= psi.tc + psi.rt) return {};
    if (!psi.flat_in_x() && (ym.grid.right_edge(c.i1 - 1) <= psi.xc - psi.rx || ym.grid.left_edge(c.i0) >= psi.xc + psi.rx)) {
        return {};
    }
    return cell_weights(psi, ym.times[c.n0], ym.times[c.n1], ym.grid.left_edge(c.i0), ym.grid.right_edge(c.i1 - 1));
}

bool weights_vanish(const CellWeights& w) { return w.wt == 0.0 && w.wx == 0.0 && w.w0 == 0.0; }

}  // namespace

double YoungMeasureEstimate::weight_defect() const {
    double d = 0.0;
    for (const auto& c : cells) {
        double s = 0.0;
        for (const auto& a : c.atoms) s += a.weight;
        d = std::max(d, std::abs(s - 1.0));
    }
    return d;
}

bool YoungMeasureEstimate::same_geometry(const YoungMeasureEstimate& o) const {
    if (!(grid == o.grid) || nt != o.nt || nx != o.nx || times.size() != o.times.size()) return false;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& a = cells[c];
        const auto& b = o.cells[c];
        if (a.n0 != b.n0 || a.n1 != b.n1 || a.i0 != b.i0 || a.i1 != b.i1) return false;
    }
    for (std::size_t n = 0; n < times.size(); ++n) {
        if (std::abs(times[n] - o.times[n]) > 1e-12 * (1.0 + std::abs(times[n]))) return false;
    }
    return true;
}

void to_json(nlohmann::json& j, const YoungMeasureEstimate& ym) {
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t tb = 0; tb < ym.nt; ++tb) {
        for (std::size_t xb = 0; xb < ym.nx; ++xb) {
            const auto& c = ym.at(tb, xb);
            nlohmann::json atoms = nlohmann::json::array();
            for (const auto& a : c.atoms) atoms.push_back({a.value, a.weight});
            cells.push_back({{"tb", tb},
                             {"xb", xb},
                             {"t0", ym.times[c.n0]},
                             {"t1", ym.times[c.n1]},
                             {"x0", ym.grid.left_edge(c.i0)},
                             {"x1", ym.grid.right_edge(c.i1 - 1)},
                             {"samples", c.samples},
                             {"atoms", atoms}});
        }
    }
    j = nlohmann::json{{"members", ym.members}, {"nt", ym.nt}, {"nx", ym.nx}, {"cells", cells}};
}

YoungMeasureEstimate estimate_young_measure(const std::vector<const RunResult*>& ensemble, const MacroSpec& macro) {
    if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
    if (macro.block_t == 0 || macro.block_x == 0) throw std::invalid_argument("macro block sizes must be positive");
    const RunResult& first = *ensemble.front();
    for (const RunResult* r : ensemble) {
        if (!(r->grid == first.grid) || r->times.size() != first.times.size()) {
            throw std::invalid_argument("ensemble members must share the grid and the time levels");
        }
        for (std::size_t n = 0; n < first.times.size(); ++n) {
            if (std::abs(r->times[n] - first.times[n]) > 1e-12 * (1.0 + std::abs(first.times[n]))) {
                throw std::invalid_argument("ensemble members must share the time levels (use a common fixed dt)");
            }
        }
    }
    YoungMeasureEstimate ym;
    ym.grid = first.grid;
    ym.times = first.times;
    ym.members = ensemble.size();
    const auto tb = blocks(first.steps(), macro.block_t);
    const auto xb = blocks(first.grid.n_cells, macro.block_x);
    ym.nt = tb.size();
    ym.nx = xb.size();
    for (const auto& [n0, n1] : tb) {
        for (const auto& [i0, i1] : xb) {
            MacroCell c{n0, n1, i0, i1, 0, {}};
            std::vector<double> values;
            for (const RunResult* r : ensemble) {
                for (std::size_t n = n0; n < n1; ++n) {
                    for (std::size_t i = i0; i < i1; ++i) values.push_back(r->fields[n].v[i]);
                }
            }
            c.samples = values.size();
            if (c.samples < macro.min_samples) {
                std::ostringstream msg;
                msg << "macro cell at steps [" << n0 << ", " << n1 << ") x cells [" << i0 << ", " << i1 << ") pools "
                    << c.samples << " samples; at least " << macro.min_samples << " required";
                throw std::invalid_argument(msg.str());
            }
            c.atoms = merge(std::move(values));
            ym.cells.push_back(std::move(c));
        }
    }
    return ym;
}

YoungMeasureEstimate dirac_from_run(const RunResult& run) {
    YoungMeasureEstimate ym;
    ym.grid = run.grid;
    ym.times = run.times;
    ym.members = 1;
    ym.nt = run.steps();
    ym.nx = run.grid.n_cells;
    ym.cells.reserve(ym.nt * ym.nx);
    for (std::size_t n = 0; n < ym.nt; ++n) {
        for (std::size_t i = 0; i < ym.nx; ++i) ym.cells.push_back({n, n + 1, i, i + 1, 1, {{run.fields[n].v[i], 1.0}}});
    }
    return ym;
}

double chi_gamma(double lambda, double mu, double gamma) {
    if (gamma <= 0.0) return lambda > mu ? 1.0 : 0.0;
    if (mu >= 0.0) {
        if (lambda < mu) return 0.0;
        if (lambda >= mu + gamma) return 1.0;
        return (lambda - mu) / gamma;
    }
    if (lambda < mu - gamma) return 0.0;
    if (lambda >= mu) return lambda > mu ? 1.0 : 0.0;
    return (lambda - mu + gamma) / gamma;
}

double mv_entropy_residual(Sign sign, const YoungMeasureEstimate& ym, const Approximation& approx, double mu,
                           const TestFunction& psi, double gamma) {
    const double a_mu = approx.flux_of_v(mu);
    double total = 0.0;
    for (const auto& c : ym.cells) {
        const CellWeights w = macro_weights(ym, c, psi);
        if (weights_vanish(w)) continue;
        const std::size_t mid = c.middle_cell();
        const double t0 = ym.times[c.n0];
        const double eta_mu = approx.eta(mid, mu);
        double e = 0.0, q = 0.0, s = 0.0;
        for (const auto& a : c.atoms) {
            const double lam = a.value;
            const double eta_l = approx.eta(mid, lam);
            const double f = approx.perturbed_source_v(t0, mid, eta_l, lam);
            if (sign == Sign::plus) {
                e += a.weight * pos(eta_l - eta_mu);
                if (lam > mu) q += a.weight * (approx.flux_of_v(lam) - a_mu);
                s += a.weight * chi_gamma(lam, mu, gamma) * f;
            } else {
                e += a.weight * pos(eta_mu - eta_l);
                if (lam < mu) {
                    q += a.weight * (a_mu - approx.flux_of_v(lam));
                    s -= a.weight * f;
                }
            }
        }
        total += e * w.wt + q * w.wx + s * w.w0;
    }
    return total;
}

double mv_source_term(const YoungMeasureEstimate& ym, const Approximation& approx, double mu,
                      const TestFunction& psi, double gamma) {
    double total = 0.0;
    for (const auto& c : ym.cells) {
        const CellWeights w = macro_weights(ym, c, psi);
        if (w.w0 == 0.0) continue;
        const std::size_t mid = c.middle_cell();
        const double t0 = ym.times[c.n0];
        double s = 0.0;
        for (const auto& a : c.atoms) {
            const double f = approx.perturbed_source_v(t0, mid, approx.eta(mid, a.value), a.value);
            s += a.weight * chi_gamma(a.value, mu, gamma) * f;
        }
        total += s * w.w0;
    }
    return total;
}

ChiGammaCheck chi_gamma_check(const YoungMeasureEstimate& ym, const Approximation& approx, double mu,
                              const TestFunction& psi, const std::vector<double>& gammas) {
    ChiGammaCheck out;
    out.gammas = gammas;
    std::sort(out.gammas.begin(), out.gammas.end(), std::greater<>());
    out.gammas.push_back(0.0);
    for (double g : out.gammas) out.values.push_back(mv_source_term(ym, approx, mu, psi, g));
    for (std::size_t q = 0; q + 1 < out.values.size(); ++q) {
        if (out.values[q + 1] > out.values[q] + 1e-15 * (1.0 + std::abs(out.values[q]))) out.ordered = false;
    }
    for (const auto& c : ym.cells) {
        if (macro_weights(ym, c, psi).w0 == 0.0) continue;
        for (const auto& a : c.atoms) {
            if (std::abs(a.value - mu) <= kMergeTolerance) out.mu_is_atom = true;
        }
    }
    return out;
}

double averaged_contraction_gap(const YoungMeasureEstimate& ym1, const YoungMeasureEstimate& ym2,
                                const Approximation& approx, const TestFunction& psi) {
    if (!ym1.same_geometry(ym2)) throw std::invalid_argument("Young measures have different macro grids");
    double total = 0.0;
    for (std::size_t c = 0; c < ym1.cells.size(); ++c) {
        const MacroCell& m1 = ym1.cells[c];
        const MacroCell& m2 = ym2.cells[c];
        const CellWeights w = macro_weights(ym1, m1, psi);
        if (weights_vanish(w)) continue;
        const std::size_t mid = m1.middle_cell();
        const double t0 = ym1.times[m1.n0];
        std::vector<double> eta2, a2, f2;
        for (const auto& b : m2.atoms) {
            eta2.push_back(approx.eta(mid, b.value));
            a2.push_back(approx.flux_of_v(b.value));
            f2.push_back(approx.perturbed_source_v(t0, mid, eta2.back(), b.value));
        }
        double e = 0.0, q = 0.0, s = 0.0;
        for (const auto& a : m1.atoms) {
            const double eta1 = approx.eta(mid, a.value);
            const double a1 = approx.flux_of_v(a.value);
            const double f1 = approx.perturbed_source_v(t0, mid, eta1, a.value);
            for (std::size_t bi = 0; bi < m2.atoms.size(); ++bi) {
                const double ww = a.weight * m2.atoms[bi].weight;
                const double sg = sgn(a.value - m2.atoms[bi].value);
                e += ww * std::abs(eta1 - eta2[bi]);
                q += ww * sg * (a1 - a2[bi]);
                s += ww * sg * (f1 - f2[bi]);
            }
        }
        total += e * w.wt + q * w.wx + s * w.w0;
    }
    return total;
}

double ensemble_bound(const std::vector<const RunResult*>& ensemble) {
    double m = 0.0;
    for (const RunResult* r : ensemble) m = std::max(m, r->max_abs_v());
    return 1.05 * m;
}

SupportTraceReport support_and_trace_check(const YoungMeasureEstimate& ym, double R, const Approximation& approx,
                                           const InitialDatum& u0, double a, double b, std::size_t slabs) {
    SupportTraceReport rep;
    rep.bound = R;
    for (std::size_t tb = 0; tb < ym.nt; ++tb) {
        for (std::size_t xb = 0; xb < ym.nx; ++xb) {
            for (const auto& atom : ym.at(tb, xb).atoms) {
                if (std::abs(atom.value) > R) {
                    rep.support_ok = false;
                    std::ostringstream w;
                    w << tb << "," << xb << ": " << atom.value;
                    rep.violations.push_back(w.str());
                }
            }
        }
    }
    const Field init = initial_field(approx, u0);
    const double dx = ym.grid.dx();
    for (std::size_t tb = 0; tb < std::min(slabs, ym.nt); ++tb) {
        double acc = 0.0;
        for (std::size_t xb = 0; xb < ym.nx; ++xb) {
            const MacroCell& c = ym.at(tb, xb);
            for (std::size_t i = c.i0; i < c.i1; ++i) {
                const double x = ym.grid.center(i);
                if (x < a || x > b) continue;
                for (const auto& atom : c.atoms) acc += atom.weight * std::abs(approx.eta(i, atom.value) - init.u[i]);
            }
        }
        const MacroCell& c0 = ym.at(tb, 0);
        rep.ic_curve.emplace_back(0.5 * (ym.times[c0.n0] + ym.times[c0.n1]), acc * dx);
    }
    return rep;
}

void to_json(nlohmann::json& j, const SupportTraceReport& r) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& [t, v] : r.ic_curve) curve.push_back({t, v});
    j = nlohmann::json{{"bound", r.bound}, {"support_ok", r.support_ok}, {"violations", r.violations},
                       {"ic_curve", curve}};
}

}  // namespace mmflux
