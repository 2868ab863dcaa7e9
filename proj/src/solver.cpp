#include "mmflux/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mmflux/errors.hpp"

namespace mmflux {

namespace {

double left_state(const Field& f, const Approximation& a, std::size_t k) { return k == 0 ? a.far_left() : f.u[k - 1]; }

double right_state(const Field& f, const Approximation& a, std::size_t k) {
    return k == f.u.size() ? a.far_right() : f.u[k];
}

struct StepData {
    Field next;
    double flux_left = 0.0;   // numerical flux through the left domain edge
    double flux_right = 0.0;  // through the right edge
    double source_sum = 0.0;  // sum_i S_i
};

StepData step_impl(const Field& field, double dt, double t, const Approximation& approx,
                   const std::vector<double>& viscosity) {
    const Grid1D& grid = approx.grid();
    const std::size_t n = grid.n_cells;
    const double dx = grid.dx();
    std::vector<double> flux(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        flux[k] = interface_flux(approx, k, left_state(field, approx, k), right_state(field, approx, k), viscosity[k]);
    }
    StepData out;
    out.next.u.resize(n);
    out.next.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = approx.perturbed_source_v(t, i, field.u[i], field.v[i]);
        out.source_sum += s;
        const double u = field.u[i] - (dt / dx) * (flux[i + 1] - flux[i]) + dt * s;
        if (!std::isfinite(u)) {
            std::ostringstream msg;
            msg << "non-finite state at t = " << t << ", cell " << i << " (x = " << grid.center(i) << ")";
            throw SolverError(msg.str(), t, i);
        }
        out.next.u[i] = u;
        out.next.v[i] = approx.theta_value(i, u);
    }
    out.flux_left = flux[0];
    out.flux_right = flux[n];
    return out;
}

double mass_of(const Field& f, double dx) {
    double m = 0.0;
    for (double u : f.u) m += u;
    return m * dx;
}

double abs_mass_of(const Field& f, double dx) {
    double m = 0.0;
    for (double u : f.u) m += std::abs(u);
    return m * dx;
}

}  // namespace

double RunResult::max_abs_v() const {
    double m = 0.0;
    for (const auto& f : fields) {
        for (double v : f.v) m = std::max(m, std::abs(v));
    }
    return m;
}

void to_json(nlohmann::json& j, const RunResult& r) {
    double max_defect = 0.0;
    for (double d : r.mass_defect) max_defect = std::max(max_defect, d);
    double max_cfl = 0.0;
    for (double c : r.cfl) max_cfl = std::max(max_cfl, c);
    j = nlohmann::json{{"grid", {{"x_lo", r.grid.x_lo}, {"x_hi", r.grid.x_hi}, {"cells", r.grid.n_cells}}},
                       {"steps", r.steps()},
                       {"final_time", r.times.back()},
                       {"dt", r.dts},
                       {"cfl", r.cfl},
                       {"max_cfl", max_cfl},
                       {"mass", r.mass},
                       {"mass_defect", r.mass_defect},
                       {"max_mass_defect", max_defect},
                       {"boundary_warning", r.boundary_warning}};
    if (r.boundary_warning) j["warning"] = r.warning;
}

Field initial_field(const Approximation& approx, const InitialDatum& u0) {
    const Grid1D& grid = approx.grid();
    constexpr int kSub = 16;
    Field f;
    f.u.resize(grid.n_cells);
    f.v.resize(grid.n_cells);
    const double dx = grid.dx();
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
        double acc = 0.0;
        for (int q = 0; q < kSub; ++q) acc += u0(grid.left_edge(i) + (q + 0.5) * dx / kSub);
        f.u[i] = acc / kSub;
        f.v[i] = approx.theta_value(i, f.u[i]);
    }
    return f;
}

double wave_speed(const Approximation& approx, std::size_t k, double uL, double uR) {
    return approx.flux_slope_bound(k, std::min(uL, uR), std::max(uL, uR));
}

double interface_flux(const Approximation& approx, std::size_t k, double uL, double uR, double viscosity) {
    const double fl = approx.interface_flux_fn(k, uL);
    if (uL == uR) return fl;
    const double fr = approx.interface_flux_fn(k, uR);
    return 0.5 * (fl + fr) - 0.5 * viscosity * (uR - uL);
}

StateRange invariant_range(const Approximation& approx, const Field& initial) {
    StateRange r{std::min(approx.far_left(), approx.far_right()), std::max(approx.far_left(), approx.far_right())};
    for (double u : initial.u) {
        r.lo = std::min(r.lo, u);
        r.hi = std::max(r.hi, u);
    }
    // A dissipative source pulls states toward 0.
    if (approx.source_spec().id != "zero" || std::isfinite(approx.ell()) || std::isfinite(approx.m())) {
        r.lo = std::min(r.lo, 0.0);
        r.hi = std::max(r.hi, 0.0);
    }
    return r;
}

std::vector<double> interface_viscosity(const Approximation& approx, const StateRange& range) {
    std::vector<double> a(approx.grid().n_cells + 1);
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = wave_speed(approx, k, range.lo, range.hi);
    return a;
}

namespace {

double source_cap(double dt, const Approximation& approx) {
    const double lip = approx.source_lipschitz();
    if (lip > 0.0) dt = std::min(dt, 0.5 / lip);
    return dt;
}

}  // namespace

double cfl_dt(const std::vector<double>& viscosity, const Approximation& approx, double cfl) {
    double speed = 0.0;
    for (double a : viscosity) speed = std::max(speed, a);
    const double dx = approx.grid().dx();
    return source_cap(speed > 0.0 ? cfl * dx / speed : dx, approx);
}

double common_dt(const std::vector<const Approximation*>& problems, const StateRange& range, double cfl) {
    double dt = std::numeric_limits<double>::infinity();
    for (const Approximation* a : problems) dt = std::min(dt, cfl_dt(interface_viscosity(*a, range), *a, cfl));
    return dt;
}

Field step(const Field& field, double dt, double t, const Approximation& approx,
           const std::vector<double>& viscosity) {
    return step_impl(field, dt, t, approx, viscosity).next;
}

RunResult solve(const Approximation& approx, const InitialDatum& u0, double T, const SolveOptions& options,
                double padding) {
    const Grid1D& grid = approx.grid();
    const double dx = grid.dx();
    RunResult run;
    run.grid = grid;
    run.times.push_back(0.0);
    run.fields.push_back(initial_field(approx, u0));
    run.mass.push_back(mass_of(run.fields.back(), dx));

    StateRange range = invariant_range(approx, run.fields.back());
    if (options.state_range) {
        range.lo = std::min(range.lo, options.state_range->lo);
        range.hi = std::max(range.hi, options.state_range->hi);
    }
    std::vector<double> viscosity = interface_viscosity(approx, range);
    double max_speed = 0.0;
    for (double a : viscosity) max_speed = std::max(max_speed, a);
    double base_dt = options.fixed_dt ? *options.fixed_dt : cfl_dt(viscosity, approx, options.cfl);
    if (!(base_dt > 0.0)) throw SolverError("non-positive time step", 0.0, 0);

    auto check_boundary = [&](const Field& f, double t) {
        if (padding <= 0.0 || run.boundary_warning) return;
        for (std::size_t i = 0; i < grid.n_cells; ++i) {
            const double x = grid.center(i);
            const bool near_left = x - grid.x_lo < padding;
            const bool near_right = grid.x_hi - x < padding;
            if ((near_left && std::abs(f.u[i] - approx.far_left()) > 1e-10) ||
                (near_right && std::abs(f.u[i] - approx.far_right()) > 1e-10)) {
                std::ostringstream w;
                w << "solution reached the padding zone at t = " << t << ", x = " << x;
                run.boundary_warning = true;
                run.warning = w.str();
                return;
            }
        }
    };
    check_boundary(run.fields.back(), 0.0);

    double t = 0.0;
    while (t < T) {
        const Field& cur = run.fields.back();
        double dt = base_dt;
        // Avoid a sliver step at the end.
        if (t + dt >= T || T - (t + dt) < 1e-12 * T) dt = T - t;

        StepData sd = step_impl(cur, dt, t, approx, viscosity);
        const double new_mass = mass_of(sd.next, dx);
        const double balance =
            new_mass - run.mass.back() + dt * (sd.flux_right - sd.flux_left) - dt * dx * sd.source_sum;
        const double scale = std::max(abs_mass_of(cur, dx), abs_mass_of(sd.next, dx));
        run.mass_defect.push_back(scale > 0.0 ? std::abs(balance) / scale : 0.0);
        run.cfl.push_back(dt * max_speed / dx);
        run.dts.push_back(dt);
        t = (dt == T - t) ? T : t + dt;
        run.times.push_back(t);
        run.mass.push_back(new_mass);
        run.fields.push_back(std::move(sd.next));
        check_boundary(run.fields.back(), t);

        // Only a source violating dissipativity can leave the range; widen it
        // so the flux stays stable (the step is no longer exactly monotone).
        bool widened = false;
        for (double u : run.fields.back().u) {
            if (u < range.lo || u > range.hi) {
                range.lo = std::min(range.lo, u);
                range.hi = std::max(range.hi, u);
                widened = true;
            }
        }
        if (widened) {
            const double pad = 0.25 * (range.hi - range.lo);
            range.lo -= pad;
            range.hi += pad;
            viscosity = interface_viscosity(approx, range);
            for (double a : viscosity) max_speed = std::max(max_speed, a);
            if (options.fixed_dt && (*options.fixed_dt) * max_speed > dx) {
                throw SolverError("fixed dt violates the CFL bound after the state range grew", t, 0);
            }
            if (!options.fixed_dt) base_dt = std::min(base_dt, cfl_dt(viscosity, approx, options.cfl));
        }
    }
    return run;
}

RunResult solve(const ProblemSpec& spec, const Grid1D& grid, const SolveOptions& options) {
    const Approximation approx(spec, grid);
    return solve(approx, spec.u0, spec.T, options, spec.padding);
}

}  // namespace mmflux
