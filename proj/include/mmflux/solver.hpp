#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mmflux/grid.hpp"
#include "mmflux/problem.hpp"

namespace mmflux {

/// Cell averages u_i and the transformed values v_i = theta^j(x_i, u_i).
struct Field {
    std::vector<double> u;
    std::vector<double> v;
};

/// Closed state interval [lo, hi].
struct StateRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct SolveOptions {
    double cfl = 0.45;
    /// Use this dt for every step (the last one is shortened to land on T).
    /// Paired and ensemble runs share a dt so their time levels coincide.
    std::optional<double> fixed_dt;
    /// Widens the range the interface viscosities are computed over. Runs
    /// that are compared share it so they use the same scheme.
    std::optional<StateRange> state_range;
};

/// Every time level of a run: fields[n] is the state on [times[n], times[n+1]).
struct RunResult {
    Grid1D grid;
    std::vector<double> times;
    std::vector<Field> fields;
    std::vector<double> dts;
    std::vector<double> cfl;          // dt * max wave speed / dx per step
    std::vector<double> mass;         // sum u_i dx per time level
    std::vector<double> mass_defect;  // relative residual of the discrete mass balance per step
    bool boundary_warning = false;
    std::string warning;

    std::size_t steps() const { return dts.size(); }
    const Field& final_field() const { return fields.back(); }
    /// Largest |v| over all time levels.
    double max_abs_v() const;
};

void to_json(nlohmann::json& j, const RunResult& r);  // metadata only

/// Cell averages of u0 (16-point midpoint rule per cell) and their v.
Field initial_field(const Approximation& approx, const InitialDatum& u0);

/// Local wave speed at interface k for states uL, uR: max |A^j'| over the
/// theta^j-image of [min, max] times max |theta^j'| there, read off the tables.
double wave_speed(const Approximation& approx, std::size_t k, double uL, double uR);

/// Lax-Friedrichs flux at interface k with the given viscosity.
double interface_flux(const Approximation& approx, std::size_t k, double uL, double uR, double viscosity);

/// States the scheme cannot leave for a dissipative source: the initial cell
/// averages, the far values, and 0 when a source acts.
StateRange invariant_range(const Approximation& approx, const Field& initial);

/// Per-interface viscosity: wave_speed over the whole range. It does not
/// depend on the current states, so the step is a monotone map under the CFL bound.
std::vector<double> interface_viscosity(const Approximation& approx, const StateRange& range);

/// cfl * dx / max viscosity (dx when it is 0), capped so dt * Lip(source) <= 1/2.
double cfl_dt(const std::vector<double>& viscosity, const Approximation& approx, double cfl = 0.45);

/// Stable dt shared by the given problems over one state range (minimum over all).
double common_dt(const std::vector<const Approximation*>& problems, const StateRange& range, double cfl = 0.45);

/// One explicit Euler step. Throws SolverError on non-finite values.
Field step(const Field& field, double dt, double t, const Approximation& approx, const std::vector<double>& viscosity);

RunResult solve(const Approximation& approx, const InitialDatum& u0, double T, const SolveOptions& options = {},
                double padding = 0.0);
RunResult solve(const ProblemSpec& spec, const Grid1D& grid, const SolveOptions& options = {});

}  // namespace mmflux
