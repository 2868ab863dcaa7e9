#include "mmflux/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "mmflux/errors.hpp"
#include "mmflux/flux.hpp"
#include "mmflux/harness.hpp"

namespace mmflux {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

void say(const CommandContext& ctx, const std::string& msg) {
    if (!ctx.quiet && ctx.log) *ctx.log << msg << '\n';
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

void prepare_dir(const CommandContext& ctx) {
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec || !fs::is_directory(ctx.out)) throw ConfigError("output directory '" + ctx.out.string() + "' is not writable");
}

Grid1D grid_for(const ProblemSpec& spec, std::size_t cells) { return Grid1D(spec.x_lo, spec.x_hi, cells); }

/// Structural errors and failed hypotheses are config errors, except the
/// dissipativity failure of the test-only source, which only warns.
ValidationReport validate_or_throw(const ProblemSpec& spec, const Grid1D& grid, const CommandContext& ctx) {
    ValidationReport rep = validate_spec(spec, grid);
    if (!rep.structurally_valid()) {
        std::string msg = "invalid problem:";
        for (const auto& e : rep.errors) msg += " " + e + ";";
        throw ConfigError(msg);
    }
    const bool allow = spec.source.test_only();
    if (!rep.hypotheses_hold(allow)) {
        for (const auto& c : rep.checks) {
            if (c.enforced && !c.passed) throw ConfigError("hypothesis " + c.name + " fails: " + c.detail);
        }
    }
    if (allow) {
        const auto* h4 = rep.find("H4");
        if (h4 && !h4->passed) say(ctx, "warning: test-only source violates H4: " + h4->detail);
    }
    return rep;
}

std::vector<double> k_set(const RunResult& run, const RunConfig& c) {
    std::vector<double> ks = k_samples(run, c.problem, c.k_count);
    ks.insert(ks.end(), c.k_extra.begin(), c.k_extra.end());
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12; }), ks.end());
    return ks;
}

std::vector<Form> forms_of(const RunConfig& c) {
    std::vector<Form> out;
    for (const auto& f : c.forms) out.push_back(form_from_string(f));
    return out;
}

/// max |SEMI_PLUS + SEMI_MINUS - SGN| over the (k, psi) points present for all three forms.
double split_defect(const EntropyReport& r) {
    std::map<std::pair<double, std::string>, std::array<double, 3>> acc;
    std::map<std::pair<double, std::string>, int> seen;
    for (const auto& e : r.entries) {
        int slot = -1;
        if (e.form == Form::semi_plus) slot = 0;
        if (e.form == Form::semi_minus) slot = 1;
        if (e.form == Form::sgn) slot = 2;
        if (slot < 0) continue;
        acc[{e.k, e.psi}][slot] = e.residual;
        seen[{e.k, e.psi}] |= 1 << slot;
    }
    double worst = 0.0;
    for (const auto& [key, v] : acc) {
        if (seen[key] != 7) continue;
        worst = std::max(worst, std::abs(v[0] + v[1] - v[2]));
    }
    return worst;
}

std::string csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string tag(std::size_t cells) { return std::to_string(cells); }

constexpr std::size_t kMaxAtomRows = 200000;

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"solve", "verify", "converge", "ym", "parametrize"};
    return names;
}

std::vector<std::size_t> snapshot_levels(const std::vector<double>& times, std::size_t count) {
    std::vector<std::size_t> out;
    if (times.empty() || count == 0) return out;
    const double T = times.back();
    for (std::size_t s = 0; s < count; ++s) {
        const double target = count == 1 ? T : T * static_cast<double>(s) / static_cast<double>(count - 1);
        auto it = std::lower_bound(times.begin(), times.end(), target - 1e-12 * std::max(T, 1.0));
        std::size_t n = it == times.end() ? times.size() - 1 : static_cast<std::size_t>(it - times.begin());
        if (out.empty() || out.back() != n) out.push_back(n);
    }
    return out;
}

int cmd_solve(const RunConfig& config, const CommandContext& ctx) {
    prepare_dir(ctx);
    const ProblemSpec& spec = config.problem;
    const Grid1D grid = grid_for(spec, config.cells.front());
    const ValidationReport rep = validate_or_throw(spec, grid, ctx);
    const RunResult run = solve(spec, grid);
    if (run.boundary_warning) say(ctx, "warning: " + run.warning);

    const auto levels = snapshot_levels(run.times, config.snapshots);
    std::ostringstream csv;
    csv << "snapshot,level,t,x,u,v\n" << std::setprecision(17);
    std::vector<double> snap_times;
    for (std::size_t s = 0; s < levels.size(); ++s) {
        const std::size_t n = levels[s];
        snap_times.push_back(run.times[n]);
        const Field& f = run.fields[n];
        for (std::size_t i = 0; i < grid.n_cells; ++i) {
            csv << s << ',' << n << ',' << run.times[n] << ',' << grid.center(i) << ',' << f.u[i] << ',' << f.v[i]
                << '\n';
        }
    }
    write_file(ctx.out / "snapshots.csv", csv.str());
    write_json(ctx.out / "run.json",
               json{{"problem", spec}, {"validation", rep}, {"run", run}, {"snapshot_times", snap_times}});
    say(ctx, "solve: " + std::to_string(run.steps()) + " steps on " + tag(grid.n_cells) + " cells");
    return kExitOk;
}

int cmd_verify(const RunConfig& config, const CommandContext& ctx) {
    prepare_dir(ctx);
    const ProblemSpec& spec = config.problem;
    const auto forms = forms_of(config);
    json summary = json::array();
    bool ok = true;
    for (std::size_t cells : config.cells) {
        const Grid1D grid = grid_for(spec, cells);
        validate_or_throw(spec, grid, ctx);
        const auto battery = standard_battery(spec.T, spec.x_lo, spec.x_hi, config.battery_radii);

        std::vector<ProblemSpec> specs{spec};
        if (config.pair) {
            specs.push_back(spec);
            specs.back().u0 = config.pair->u0;
        }
        const Ensemble ens = solve_ensemble(specs, grid);
        const RunResult& run = ens.runs.front();
        const Approximation& approx = *ens.approximations.front();

        const EntropyReport rep = entropy_report(run, approx, forms, k_set(run, config), battery);
        std::ostringstream csv;
        write_csv(csv, rep);
        write_file(ctx.out / ("entropy_" + tag(cells) + ".csv"), csv.str());
        json rj = rep;
        rj["split_defect"] = split_defect(rep);
        rj["initial_trace"] = initial_trace_error(run, spec.x_lo, spec.x_hi);
        write_json(ctx.out / ("entropy_" + tag(cells) + ".json"), rj);

        json item{{"cells", cells},
                  {"dx", rep.dx},
                  {"tolerance", rep.tolerance},
                  {"minimum", rep.minimum()},
                  {"margin_constant", -rep.minimum() / rep.dx},
                  {"entropy_holds", rep.holds()}};
        ok = ok && rep.holds();
        say(ctx, "verify " + tag(cells) + " cells: min residual " + csv_number(rep.minimum()) + ", tolerance " +
                     csv_number(rep.tolerance));

        if (config.pair) {
            const RunResult& run2 = ens.runs[1];
            const Approximation& approx2 = *ens.approximations[1];
            const double tol = residual_tolerance(grid.dx(), std::max(run.max_abs_v(), run2.max_abs_v()));
            std::ostringstream pc;
            pc << "psi_id,gap\n" << std::setprecision(17);
            double min_gap = kInfinity;
            for (const auto& psi : battery) {
                const double g = pair_gap(config.pair->kind, run, approx, run2, approx2, psi);
                min_gap = std::min(min_gap, g);
                pc << psi.id << ',' << g << '\n';
            }
            write_file(ctx.out / ("pair_" + tag(cells) + ".csv"), pc.str());

            const auto curve = l1_distance_curve(run, run2);
            std::ostringstream lc;
            lc << "t,l1\n" << std::setprecision(17);
            double max_increase = 0.0;
            for (std::size_t n = 0; n < curve.size(); ++n) {
                lc << curve[n].first << ',' << curve[n].second << '\n';
                if (n > 0) max_increase = std::max(max_increase, curve[n].second - curve[n - 1].second);
            }
            write_file(ctx.out / ("l1_" + tag(cells) + ".csv"), lc.str());
            const bool pair_ok = min_gap >= -tol && max_increase <= 1e-12;
            item["pair"] = {{"kind", to_string(config.pair->kind)},
                            {"min_gap", min_gap},
                            {"tolerance", tol},
                            {"l1_max_increase", max_increase},
                            {"holds", pair_ok}};
            ok = ok && pair_ok;
            say(ctx, "verify pair: min gap " + csv_number(min_gap) + ", max L1 increase " + csv_number(max_increase));
        }
        summary.push_back(item);
    }
    write_json(ctx.out / "verify.json", json{{"grids", summary}, {"holds", ok}});
    return ok ? kExitOk : kExitViolation;
}

int cmd_converge(const RunConfig& config, const CommandContext& ctx) {
    prepare_dir(ctx);
    const ProblemSpec& spec = config.problem;
    const Grid1D grid = grid_for(spec, config.cells.front());
    validate_or_throw(spec, grid, ctx);
    bool ok = true;
    json summary;

    const OrderReport order = self_convergence_order(spec, grid);
    {
        std::ostringstream csv;
        write_csv(csv, order);
        write_file(ctx.out / "order.csv", csv.str());
        write_json(ctx.out / "order.json", order);
        summary["order"] = order;
    }

    auto emit = [&](const ScheduleReport& r, bool gated) {
        std::ostringstream csv;
        write_csv(csv, r);
        write_file(ctx.out / (r.kind + "_schedule.csv"), csv.str());
        write_json(ctx.out / (r.kind + "_schedule.json"), r);
        if (gated && r.violation_count() > 0) ok = false;
        summary[r.kind + "_schedule"] = {{"max_violation", r.max_violation()},
                                         {"violation_count", r.violation_count()},
                                         {"tolerance", r.tolerance}};
        say(ctx, "converge " + r.kind + " schedule: max violation " + csv_number(r.max_violation()));
    };
    if (!config.j_schedule.empty()) emit(j_schedule_run(spec, grid, config.j_schedule), false);
    if (!config.m_schedule.empty()) emit(monotone_in_m_check(spec, grid, config.fixed_index, config.m_schedule), true);
    if (!config.ell_schedule.empty()) {
        emit(monotone_in_ell_check(spec, grid, config.ell_schedule, config.fixed_index), true);
    }
    summary["holds"] = ok;
    write_json(ctx.out / "converge.json", summary);
    return ok ? kExitOk : kExitViolation;
}

int cmd_ym(const RunConfig& config, const CommandContext& ctx) {
    prepare_dir(ctx);
    const ProblemSpec& spec = config.problem;
    const Grid1D grid = grid_for(spec, config.cells.front());
    validate_or_throw(spec, grid, ctx);

    std::vector<ProblemSpec> members;
    if (config.j_schedule.empty()) {
        members.push_back(spec);
    } else {
        for (double j : config.j_schedule) {
            members.push_back(spec);
            members.back().j = j;
        }
    }
    const std::size_t count = members.size();
    std::vector<ProblemSpec> all = members;
    if (config.pair) {
        for (const auto& m : members) {
            all.push_back(m);
            all.back().u0 = config.pair->u0;
        }
    }
    const Ensemble ens = solve_ensemble(all, grid);

    auto estimate = [&](std::size_t first) {
        if (count == 1) return dirac_from_run(ens.runs[first]);
        std::vector<const RunResult*> ptrs;
        for (std::size_t k = 0; k < count; ++k) ptrs.push_back(&ens.runs[first + k]);
        return estimate_young_measure(ptrs, config.macro);
    };
    const YoungMeasureEstimate ym = estimate(0);
    const Approximation& approx = *ens.approximations[count - 1];  // finest member

    std::size_t total_atoms = 0;
    std::ostringstream cells_csv;
    cells_csv << "tb,xb,t0,t1,x0,x1,samples,atoms,mean,variance,min,max\n" << std::setprecision(17);
    for (std::size_t tb = 0; tb < ym.nt; ++tb) {
        for (std::size_t xb = 0; xb < ym.nx; ++xb) {
            const MacroCell& c = ym.at(tb, xb);
            double mean = 0.0, second = 0.0;
            for (const auto& a : c.atoms) {
                mean += a.weight * a.value;
                second += a.weight * a.value * a.value;
            }
            total_atoms += c.atoms.size();
            cells_csv << tb << ',' << xb << ',' << ym.times[c.n0] << ',' << ym.times[c.n1] << ','
                      << grid.left_edge(c.i0) << ',' << grid.right_edge(c.i1 - 1) << ',' << c.samples << ','
                      << c.atoms.size() << ',' << mean << ',' << std::max(0.0, second - mean * mean) << ','
                      << c.atoms.front().value << ',' << c.atoms.back().value << '\n';
        }
    }
    write_file(ctx.out / "ym_cells.csv", cells_csv.str());
    const bool atoms_written = total_atoms <= kMaxAtomRows;
    if (atoms_written) {
        std::ostringstream csv;
        csv << "tb,xb,value,weight\n" << std::setprecision(17);
        for (std::size_t tb = 0; tb < ym.nt; ++tb) {
            for (std::size_t xb = 0; xb < ym.nx; ++xb) {
                for (const auto& a : ym.at(tb, xb).atoms) csv << tb << ',' << xb << ',' << a.value << ',' << a.weight << '\n';
            }
        }
        write_file(ctx.out / "ym_atoms.csv", csv.str());
    } else {
        std::error_code ec;
        fs::remove(ctx.out / "ym_atoms.csv", ec);  // stale file from an earlier, smaller run
    }

    std::vector<const RunResult*> ptrs;
    for (const auto& r : ens.runs) ptrs.push_back(&r);
    const double R = ensemble_bound(ptrs);
    const SupportTraceReport st = support_and_trace_check(ym, R, approx, spec.u0, spec.x_lo, spec.x_hi);
    std::size_t max_atoms = 0;
    for (const auto& c : ym.cells) max_atoms = std::max(max_atoms, c.atoms.size());
    json out{{"members", ym.members},
             {"nt", ym.nt},
             {"nx", ym.nx},
             {"max_atoms", max_atoms},
             {"total_atoms", total_atoms},
             {"atoms_written", atoms_written},
             {"weight_defect", ym.weight_defect()},
             {"support_trace", st}};
    bool ok = st.support_ok && ym.weight_defect() <= 1e-12;

    if (config.pair) {
        const YoungMeasureEstimate ym2 = estimate(count);
        const auto battery = standard_battery(spec.T, spec.x_lo, spec.x_hi, config.battery_radii);
        double vmax = 0.0;
        for (const auto& r : ens.runs) vmax = std::max(vmax, r.max_abs_v());
        const double tol = residual_tolerance(grid.dx(), vmax);
        double min_gap = kInfinity;
        json gaps = json::array();
        for (const auto& psi : battery) {
            const double g = averaged_contraction_gap(ym, ym2, approx, psi);
            min_gap = std::min(min_gap, g);
            gaps.push_back({{"psi_id", psi.id}, {"gap", g}});
        }
        out["contraction"] = {{"gaps", gaps}, {"min_gap", min_gap}, {"tolerance", tol}, {"holds", min_gap >= -tol}};
        ok = ok && min_gap >= -tol;
        say(ctx, "ym: min averaged contraction gap " + csv_number(min_gap));
    }
    out["holds"] = ok;
    write_json(ctx.out / "ym.json", out);
    say(ctx, "ym: " + std::to_string(ym.members) + " member(s), max " + std::to_string(max_atoms) + " atoms per cell");
    return ok ? kExitOk : kExitViolation;
}

int cmd_parametrize(const RunConfig& config, const CommandContext& ctx) {
    prepare_dir(ctx);
    FluxCurve a;
    try {
        a = config.problem.flux.build();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("flux: ") + e.what());
    }
    const Parametrization p(a, config.param_slope);
    std::ostringstream csv;
    csv << "s,U,calA\n" << std::setprecision(17);
    for (const auto& row : p.sample(config.param_s_lo, config.param_s_hi, config.param_samples)) {
        csv << row[0] << ',' << row[1] << ',' << row[2] << '\n';
    }
    write_file(ctx.out / "parametrization.csv", csv.str());
    json plateaus = json::array();
    for (const auto& pl : p.plateaus()) plateaus.push_back({{"alpha", pl.alpha}, {"beta", pl.beta}, {"z", pl.z}});
    write_json(ctx.out / "parametrization.json", json{{"slope", p.slope()}, {"plateaus", plateaus}});
    say(ctx, "parametrize: " + std::to_string(p.plateaus().size()) + " plateau(s)");
    return kExitOk;
}

int run_command(const std::string& name, const RunConfig& config, const CommandContext& ctx, std::ostream& err) {
    try {
        if (name == "solve") return cmd_solve(config, ctx);
        if (name == "verify") return cmd_verify(config, ctx);
        if (name == "converge") return cmd_converge(config, ctx);
        if (name == "ym") return cmd_ym(config, ctx);
        if (name == "parametrize") return cmd_parametrize(config, ctx);
        err << "error: unknown subcommand '" << name << "'\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ResolutionError& e) {
        err << "resolution error: " << e.what() << '\n';
        return kExitResolution;
    } catch (const SolverError& e) {
        err << "solver error at t = " << e.time << ", cell " << e.cell << ": " << e.what() << '\n';
        return kExitViolation;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
}

}  // namespace mmflux
