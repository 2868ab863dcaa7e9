#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "mmflux/problem.hpp"
#include "mmflux/solver.hpp"

namespace mmflux {

/// Runs of several problems on one grid with one shared dt sequence, so their
/// time levels coincide. Problems are solved concurrently; results keep input order.
struct Ensemble {
    std::vector<std::shared_ptr<const Approximation>> approximations;
    std::vector<RunResult> runs;
    double dt = 0.0;
};

/// All specs must share T. Throws std::invalid_argument otherwise.
Ensemble solve_ensemble(const std::vector<ProblemSpec>& specs, const Grid1D& grid, double cfl = 0.45);

/// 10 dx (1 + max|v|).
inline double schedule_tolerance(double dx, double max_abs_v) { return 10.0 * dx * (1.0 + max_abs_v); }

struct SchedulePoint {
    double value = 0.0;
    std::size_t steps = 0;
    double max_abs_v = 0.0;
    double mass = 0.0;  // sum u dx at T
};

struct PairCheck {
    double lower = 0.0;  // schedule value expected to give the smaller v
    double upper = 0.0;
    double max_violation = 0.0;  // max over levels and cells of (v_lower - v_upper)^+
    std::size_t count_above_tolerance = 0;
};

struct ScheduleReport {
    std::string kind;  // "m", "ell" or "j"
    std::vector<double> schedule;
    std::vector<SchedulePoint> points;
    std::vector<PairCheck> pairs;      // monotone checks, consecutive entries
    std::vector<double> distances;     // ||u_k - u_{k+1}||_L1 at T, consecutive entries
    std::vector<double> v_distances;   // same for v
    std::size_t cells = 0;
    double dx = 0.0;
    double tolerance = 0.0;

    double max_violation() const;
    std::size_t violation_count() const;
    /// distances[k + 1] / distances[k].
    std::vector<double> ratios() const;
};

/// v_{ell,m} <= v_{ell,m'} for m < m' along the schedule.
ScheduleReport monotone_in_m_check(const ProblemSpec& spec, const Grid1D& grid, double ell,
                                   const std::vector<double>& m_schedule);
/// v_{ell',m} <= v_{ell,m} for ell < ell' along the schedule.
ScheduleReport monotone_in_ell_check(const ProblemSpec& spec, const Grid1D& grid,
                                     const std::vector<double>& ell_schedule, double m);
/// Solves per j and reports consecutive L1 distances at T.
ScheduleReport j_schedule_run(const ProblemSpec& spec, const Grid1D& grid, const std::vector<double>& j_schedule);

void to_json(nlohmann::json& j, const ScheduleReport& r);
/// CSV with header value,steps,max_abs_v,mass,l1_to_next,v_l1_to_next,ratio,max_violation_to_next.
void write_csv(std::ostream& os, const ScheduleReport& r);

struct OrderReport {
    std::vector<std::size_t> cells;  // n, 2n, 4n
    std::vector<double> errors;      // ||u_n - R u_2n||, ||u_2n - R u_4n||
    double order = 0.0;              // +inf when the second error vanishes
};

/// Order from the dx, dx/2, dx/4 triple with restriction by cell averaging.
OrderReport self_convergence_order(const ProblemSpec& spec, const Grid1D& coarse);

void to_json(nlohmann::json& j, const OrderReport& r);
void write_csv(std::ostream& os, const OrderReport& r);

/// Cell averages of a fine field over pairs of cells.
std::vector<double> restrict_by_averaging(const std::vector<double>& fine);

}  // namespace mmflux
