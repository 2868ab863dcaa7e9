#include "mmflux/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace mmflux {

namespace {

void require_increasing(const std::vector<double>& s, const char* what) {
    if (s.empty()) throw std::invalid_argument(std::string(what) + " schedule is empty");
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        if (!(s[k] < s[k + 1])) throw std::invalid_argument(std::string(what) + " schedule must be strictly increasing");
    }
}

double l1(const std::vector<double>& a, const std::vector<double>& b, double dx) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc * dx;
}

SchedulePoint summarize(double value, const RunResult& r) {
    double mass = 0.0;
    for (double u : r.final_field().u) mass += u;
    return {value, r.steps(), r.max_abs_v(), mass * r.grid.dx()};
}

/// Ordering check between consecutive runs; `lower_first` says whether run k
/// is expected below run k + 1.
ScheduleReport ordered_schedule(const std::string& kind, const std::vector<double>& schedule,
                                const std::vector<ProblemSpec>& specs, const Grid1D& grid, bool lower_first) {
    const Ensemble ens = solve_ensemble(specs, grid);
    ScheduleReport rep;
    rep.kind = kind;
    rep.schedule = schedule;
    rep.cells = grid.n_cells;
    rep.dx = grid.dx();
    double vmax = 0.0;
    for (std::size_t k = 0; k < ens.runs.size(); ++k) {
        rep.points.push_back(summarize(schedule[k], ens.runs[k]));
        vmax = std::max(vmax, rep.points.back().max_abs_v);
    }
    rep.tolerance = schedule_tolerance(rep.dx, vmax);
    for (std::size_t k = 0; k + 1 < ens.runs.size(); ++k) {
        const RunResult& lo = lower_first ? ens.runs[k] : ens.runs[k + 1];
        const RunResult& hi = lower_first ? ens.runs[k + 1] : ens.runs[k];
        PairCheck pc{lower_first ? schedule[k] : schedule[k + 1], lower_first ? schedule[k + 1] : schedule[k], 0.0, 0};
        for (std::size_t n = 0; n < lo.fields.size(); ++n) {
            for (std::size_t i = 0; i < grid.n_cells; ++i) {
                const double d = lo.fields[n].v[i] - hi.fields[n].v[i];
                pc.max_violation = std::max(pc.max_violation, d);
                if (d > rep.tolerance) ++pc.count_above_tolerance;
            }
        }
        rep.pairs.push_back(pc);
        rep.distances.push_back(l1(ens.runs[k].final_field().u, ens.runs[k + 1].final_field().u, rep.dx));
        rep.v_distances.push_back(l1(ens.runs[k].final_field().v, ens.runs[k + 1].final_field().v, rep.dx));
    }
    return rep;
}

}  // namespace

Ensemble solve_ensemble(const std::vector<ProblemSpec>& specs, const Grid1D& grid, double cfl) {
    if (specs.empty()) throw std::invalid_argument("empty ensemble");
    double table = 0.0;
    for (const auto& s : specs) {
        if (s.T != specs.front().T) throw std::invalid_argument("ensemble members must share T");
        table = std::max(table, s.table_range());
    }
    // One table extent for all members, so equal inputs give equal tables.
    std::vector<ProblemSpec> members = specs;
    for (auto& s : members) {
        if (!s.u_range) s.u_range = table;
    }
    Ensemble ens;
    {
        std::vector<std::future<std::shared_ptr<const Approximation>>> jobs;
        for (const auto& s : members) {
            jobs.push_back(std::async(std::launch::async,
                                      [&s, &grid] { return std::make_shared<const Approximation>(s, grid); }));
        }
        for (auto& j : jobs) ens.approximations.push_back(j.get());
    }
    StateRange range{kInfinity, -kInfinity};
    std::vector<const Approximation*> ptrs;
    for (std::size_t k = 0; k < members.size(); ++k) {
        const StateRange r = invariant_range(*ens.approximations[k], initial_field(*ens.approximations[k], members[k].u0));
        range.lo = std::min(range.lo, r.lo);
        range.hi = std::max(range.hi, r.hi);
        ptrs.push_back(ens.approximations[k].get());
    }
    ens.dt = common_dt(ptrs, range, cfl);
    SolveOptions opts;
    opts.cfl = cfl;
    opts.fixed_dt = ens.dt;
    opts.state_range = range;
    std::vector<std::future<RunResult>> jobs;
    for (std::size_t k = 0; k < members.size(); ++k) {
        jobs.push_back(std::async(std::launch::async, [&, k] {
            return solve(*ens.approximations[k], members[k].u0, members[k].T, opts, members[k].padding);
        }));
    }
    for (auto& j : jobs) ens.runs.push_back(j.get());
    return ens;
}

double ScheduleReport::max_violation() const {
    double m = 0.0;
    for (const auto& p : pairs) m = std::max(m, p.max_violation);
    return m;
}

std::size_t ScheduleReport::violation_count() const {
    std::size_t c = 0;
    for (const auto& p : pairs) c += p.count_above_tolerance;
    return c;
}

std::vector<double> ScheduleReport::ratios() const {
    std::vector<double> r;
    for (std::size_t k = 0; k + 1 < distances.size(); ++k) {
        r.push_back(distances[k] > 0.0 ? distances[k + 1] / distances[k] : 0.0);
    }
    return r;
}

ScheduleReport monotone_in_m_check(const ProblemSpec& spec, const Grid1D& grid, double ell,
                                   const std::vector<double>& m_schedule) {
    require_increasing(m_schedule, "m");
    std::vector<ProblemSpec> specs;
    for (double m : m_schedule) {
        ProblemSpec s = spec;
        s.ell = ell;
        s.m = m;
        specs.push_back(s);
    }
    return ordered_schedule("m", m_schedule, specs, grid, true);
}

ScheduleReport monotone_in_ell_check(const ProblemSpec& spec, const Grid1D& grid,
                                     const std::vector<double>& ell_schedule, double m) {
    require_increasing(ell_schedule, "ell");
    std::vector<ProblemSpec> specs;
    for (double ell : ell_schedule) {
        ProblemSpec s = spec;
        s.ell = ell;
        s.m = m;
        specs.push_back(s);
    }
    return ordered_schedule("ell", ell_schedule, specs, grid, false);
}

ScheduleReport j_schedule_run(const ProblemSpec& spec, const Grid1D& grid, const std::vector<double>& j_schedule) {
    require_increasing(j_schedule, "j");
    std::vector<ProblemSpec> specs;
    for (double j : j_schedule) {
        ProblemSpec s = spec;
        s.j = j;
        specs.push_back(s);
    }
    ScheduleReport rep = ordered_schedule("j", j_schedule, specs, grid, true);
    rep.pairs.clear();  // no ordering is claimed in j
    return rep;
}

void to_json(nlohmann::json& j, const ScheduleReport& r) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : r.points) {
        points.push_back({{"value", p.value}, {"steps", p.steps}, {"max_abs_v", p.max_abs_v}, {"mass", p.mass}});
    }
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : r.pairs) {
        pairs.push_back({{"lower", p.lower},
                         {"upper", p.upper},
                         {"max_violation", p.max_violation},
                         {"count_above_tolerance", p.count_above_tolerance}});
    }
    j = nlohmann::json{{"kind", r.kind},
                       {"schedule", r.schedule},
                       {"cells", r.cells},
                       {"dx", r.dx},
                       {"tolerance", r.tolerance},
                       {"points", points},
                       {"pairs", pairs},
                       {"max_violation", r.max_violation()},
                       {"violation_count", r.violation_count()},
                       {"distances", r.distances},
                       {"v_distances", r.v_distances},
                       {"ratios", r.ratios()}};
}

void write_csv(std::ostream& os, const ScheduleReport& r) {
    os << "value,steps,max_abs_v,mass,l1_to_next,v_l1_to_next,ratio,max_violation_to_next\n";
    os << std::setprecision(17);
    const auto ratios = r.ratios();
    for (std::size_t k = 0; k < r.points.size(); ++k) {
        const auto& p = r.points[k];
        os << p.value << ',' << p.steps << ',' << p.max_abs_v << ',' << p.mass << ',';
        if (k < r.distances.size()) os << r.distances[k] << ',' << r.v_distances[k];
        else os << ',';
        os << ',';
        if (k < ratios.size()) os << ratios[k];
        os << ',';
        if (k < r.pairs.size()) os << r.pairs[k].max_violation;
        os << '\n';
    }
}

std::vector<double> restrict_by_averaging(const std::vector<double>& fine) {
    if (fine.size() % 2 != 0) throw std::invalid_argument("restriction needs an even number of cells");
    std::vector<double> out(fine.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (fine[2 * i] + fine[2 * i + 1]);
    return out;
}

OrderReport self_convergence_order(const ProblemSpec& spec, const Grid1D& coarse) {
    OrderReport rep;
    std::vector<std::future<RunResult>> jobs;
    for (std::size_t f : {1u, 2u, 4u}) {
        rep.cells.push_back(coarse.n_cells * f);
        const Grid1D g(coarse.x_lo, coarse.x_hi, coarse.n_cells * f);
        jobs.push_back(std::async(std::launch::async, [&spec, g] { return solve(spec, g); }));
    }
    std::vector<RunResult> runs;
    for (auto& j : jobs) runs.push_back(j.get());
    const double dx = coarse.dx();
    rep.errors.push_back(l1(runs[0].final_field().u, restrict_by_averaging(runs[1].final_field().u), dx));
    rep.errors.push_back(l1(runs[1].final_field().u, restrict_by_averaging(runs[2].final_field().u), dx / 2.0));
    if (rep.errors[1] == 0.0) {
        rep.order = std::numeric_limits<double>::infinity();
    } else {
        rep.order = std::log2(rep.errors[0] / rep.errors[1]);
    }
    return rep;
}

void to_json(nlohmann::json& j, const OrderReport& r) {
    j = nlohmann::json{{"cells", r.cells}, {"errors", r.errors}};
    if (std::isinf(r.order)) j["order"] = "inf";
    else j["order"] = r.order;
}

void write_csv(std::ostream& os, const OrderReport& r) {
    os << "cells,error_to_next,order\n";
    os << std::setprecision(17);
    for (std::size_t k = 0; k < r.cells.size(); ++k) {
        os << r.cells[k] << ',';
        if (k < r.errors.size()) os << r.errors[k];
        os << ',';
        if (k == 0) {
            if (std::isinf(r.order)) os << "inf";
            else os << r.order;
        }
        os << '\n';
    }
}

}  // namespace mmflux
