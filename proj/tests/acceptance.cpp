// Acceptance suite: one PASS/FAIL line per criterion. Exit status 1 if any fails.
//
// Usage: acceptance [configs_dir] [scratch_dir]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

#include "mmflux/cli.hpp"
#include "mmflux/config.hpp"
#include "mmflux/entropy.hpp"
#include "mmflux/harness.hpp"
#include "mmflux/measures.hpp"
#include "mmflux/monotone.hpp"
#include "mmflux/solver.hpp"

using namespace mmflux;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Pinned tolerances.
constexpr std::size_t kOperatorCases = 10000;
constexpr double kOperatorTol = 1e-10;
constexpr double kInverseTarget = 0.02;
constexpr double kShockCells = 2.0;
constexpr double kRarefactionL1 = 0.02;
constexpr double kImprovement = 1.3;
constexpr double kVanishing = 1e-12;  // a violation this small counts as already resolved
constexpr double kSplitTol = 1e-9;
constexpr double kL1StepTol = 1e-12;
constexpr double kOrderTol = 1e-13;
constexpr std::size_t kMinPairs = 5;
constexpr double kDiracTol = 1e-9;
constexpr double kWeightTol = 1e-12;
constexpr double kScheduleRatio = 0.8;
constexpr double kMassTol = 1e-12;

fs::path g_configs;
fs::path g_scratch;
int g_failures = 0;

void report(int id, bool pass, const std::string& what) {
    std::printf("%s  [%d] %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string num(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

std::vector<std::string> shipped() {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(g_configs)) {
        if (e.path().extension() == ".json") names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

RunConfig config(const std::string& name) { return load_config((g_configs / name).string()); }

Grid1D grid_of(const ProblemSpec& s, std::size_t cells) { return Grid1D(s.x_lo, s.x_hi, cells); }

fs::path scratch(const std::string& name) {
    const fs::path p = g_scratch / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& cmd, const RunConfig& cfg, const fs::path& out) {
    std::ostringstream log, err;
    const CommandContext ctx{out, &log, true};
    const int code = run_command(cmd, cfg, ctx, err);
    if (!err.str().empty()) std::cerr << cmd << ": " << err.str();
    return code;
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void criterion_1() {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> w(-8.0, 8.0), e(0.0, 10.0);
    std::size_t violations = 0;
    for (std::size_t c = 0; c < kOperatorCases; ++c) {
        const MonotoneGraph g = testing::random_graph(rng);
        const double lambda = std::pow(2.0, -e(rng));
        const double w1 = w(rng), w2 = w(rng);
        const double r1 = g.resolvent(lambda, w1), r2 = g.resolvent(lambda, w2);
        const double y1 = g.yosida(lambda, w1), y2 = g.yosida(lambda, w2);
        if (std::abs(r1 - r2) > std::abs(w1 - w2) + kOperatorTol) ++violations;
        if (std::abs(y1 - y2) > std::abs(w1 - w2) / lambda + kOperatorTol) ++violations;
        if (!g.eval(r1).contains(y1, kOperatorTol)) ++violations;
        const double half = std::abs(g.yosida(0.5 * lambda, w1));
        if (half < std::abs(y1) - kOperatorTol) ++violations;
        if (half > std::abs(g.minimal_selection(w1)) + kOperatorTol) ++violations;
    }
    report(1, violations == 0,
           "monotone operators: " + std::to_string(violations) + " violations over " +
               std::to_string(kOperatorCases) + " seeded cases (tol " + num(kOperatorTol) + ")");
}

void criterion_2() {
    std::vector<std::function<double(double)>> seq;
    for (int n = 1; n <= 256; n *= 2) {
        seq.push_back([n](double u) { return u + (2.0 / std::numbers::pi) * std::atan(n * u); });
    }
    const auto err = check_inverse_convergence(seq, MonotoneGraph::sign_plus_identity(), -2.0, 2.0);
    bool decreasing = true;
    for (std::size_t k = 0; k + 1 < err.size(); ++k) decreasing = decreasing && err[k + 1] < err[k];
    const bool pass = decreasing && err.back() < kInverseTarget;
    report(2, pass,
           "inverse convergence u + (2/pi) atan(nu): decreasing=" + std::string(decreasing ? "yes" : "no") +
               ", error at n=256 " + num(err.back()) + " (target < " + num(kInverseTarget) + ")");
}

void criterion_3() {
    auto riemann = [](double l, double r) {
        ProblemSpec s;
        s.u0.kind = "riemann";
        s.u0.left = l;
        s.u0.right = r;
        s.far_left = l;
        s.far_right = r;
        s.j = 1e6;
        return s;
    };
    const Grid1D grid(-1.0, 1.0, 1024);  // dx = 1/512
    const double dx = grid.dx();

    const auto shock = solve(riemann(1.0, -0.5), grid);
    const auto& us = shock.final_field().u;
    double pos = kInfinity;
    for (std::size_t i = 0; i + 1 < us.size(); ++i) {
        if (us[i] >= 0.25 && us[i + 1] < 0.25) {
            const double a = grid.center(i), b = grid.center(i + 1);
            pos = a + (b - a) * (us[i] - 0.25) / (us[i] - us[i + 1]);
        }
    }
    const double shock_err = std::abs(pos - 0.25 * 0.5);

    const auto fan = solve(riemann(-0.5, 1.0), grid);
    double l1 = 0.0;
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
        // Exact cell average of clamp(x / t, -0.5, 1) by 16-point midpoint sums.
        double exact = 0.0;
        for (int q = 0; q < 16; ++q) {
            const double x = grid.left_edge(i) + (q + 0.5) * dx / 16.0;
            exact += std::clamp(x / 0.5, -0.5, 1.0) / 16.0;
        }
        l1 += std::abs(fan.final_field().u[i] - exact) * dx;
    }
    const bool pass = shock_err <= kShockCells * dx && l1 <= kRarefactionL1;
    report(3, pass,
           "Burgers Riemann at dx=1/512: shock error " + num(shock_err / dx) + " dx (<= " + num(kShockCells) +
               "), rarefaction L1 " + num(l1) + " (<= " + num(kRarefactionL1) + ")");
}

void criteria_4_5() {
    bool res_ok = true, improve_ok = true, split_ok = true;
    std::string worst;
    double worst_ratio = kInfinity, worst_split = 0.0;
    bool l1_ok = true, order_ok = true;
    std::size_t pairs = 0;
    double worst_l1 = 0.0, worst_order = 0.0;

    for (const auto& name : shipped()) {
        const RunConfig cfg = config(name);
        const fs::path out = scratch("verify_" + name);
        run_cli("verify", cfg, out);
        const json v = read_json(out / "verify.json");
        std::vector<double> viol;
        for (const auto& g : v["grids"]) {
            const double mn = g["minimum"].get<double>();
            const double tol = g["tolerance"].get<double>();
            if (mn < -tol) {
                res_ok = false;
                worst += " " + name;
            }
            viol.push_back(std::max(0.0, -mn));
            const std::size_t cells = g["cells"].get<std::size_t>();
            const json e = read_json(out / ("entropy_" + std::to_string(cells) + ".json"));
            const double split = e["split_defect"].get<double>();
            worst_split = std::max(worst_split, split);
            split_ok = split_ok && split <= kSplitTol;
            if (g.contains("pair")) {
                const double inc = g["pair"]["l1_max_increase"].get<double>();
                worst_l1 = std::max(worst_l1, inc);
                l1_ok = l1_ok && inc <= kL1StepTol;
            }
        }
        for (std::size_t k = 0; k + 1 < viol.size(); ++k) {
            if (viol[k + 1] < kVanishing) continue;
            const double ratio = viol[k] / viol[k + 1];
            worst_ratio = std::min(worst_ratio, ratio);
            if (ratio < kImprovement) {
                improve_ok = false;
                worst += " " + name + "(ratio)";
            }
        }

        if (cfg.pair) {
            ++pairs;
            // Cellwise order for ordered data, on the coarsest grid.
            std::vector<ProblemSpec> specs{cfg.problem, cfg.problem};
            specs[1].u0 = cfg.pair->u0;
            const auto ens = solve_ensemble(specs, grid_of(cfg.problem, cfg.cells.front()));
            const auto& a = ens.runs[0].fields;
            const auto& b = ens.runs[1].fields;
            bool le = true, ge = true;
            for (std::size_t i = 0; i < a[0].u.size(); ++i) {
                le = le && a[0].u[i] <= b[0].u[i];
                ge = ge && a[0].u[i] >= b[0].u[i];
            }
            if (le || ge) {
                for (std::size_t n = 0; n < a.size(); ++n) {
                    for (std::size_t i = 0; i < a[n].u.size(); ++i) {
                        const double d = le ? a[n].u[i] - b[n].u[i] : b[n].u[i] - a[n].u[i];
                        worst_order = std::max(worst_order, d);
                    }
                }
            }
        }
    }
    order_ok = worst_order <= kOrderTol;
    report(4, res_ok && improve_ok && split_ok,
           "entropy residuals on all shipped problems: min >= -10 dx (1 + max|v|) " +
               std::string(res_ok ? "yes" : "no") + ", worst improvement ratio " + num(worst_ratio) + " (>= " +
               num(kImprovement) + "), max split defect " + num(worst_split) + " (<= " + num(kSplitTol) + ")" +
               (worst.empty() ? "" : "; failing:" + worst));
    report(5, pairs >= kMinPairs && l1_ok && order_ok,
           std::to_string(pairs) + " shipped pairs: max L1 increase per step " + num(worst_l1) + " (<= " +
               num(kL1StepTol) + "), max order violation " + num(worst_order) + " (<= " + num(kOrderTol) + ")");
}

void criterion_6() {
    // Dirac collapse: measure residuals equal the entropy residuals of the single run.
    double dirac_gap = 0.0, weight_gap = 0.0;
    for (const char* name : {"arctan_source.json", "step_coefficient.json"}) {
        const RunConfig cfg = config(name);
        const ProblemSpec& s = cfg.problem;
        const Approximation a(s, grid_of(s, cfg.cells.front()));
        const RunResult run = solve(a, s.u0, s.T);
        const auto ym = dirac_from_run(run);
        weight_gap = std::max(weight_gap, ym.weight_defect());
        for (const auto& psi : standard_battery(s.T, s.x_lo, s.x_hi, cfg.battery_radii)) {
            for (double mu : k_samples(run, s, 9)) {
                dirac_gap = std::max(dirac_gap, std::abs(mv_entropy_residual(Sign::plus, ym, a, mu, psi) -
                                                         entropy_residual(Form::semi_plus, run, a, mu, psi)));
                dirac_gap = std::max(dirac_gap, std::abs(mv_entropy_residual(Sign::minus, ym, a, mu, psi) -
                                                         entropy_residual(Form::semi_minus, run, a, mu, psi)));
            }
        }
    }
    // Averaged contraction on j-schedule ensembles of every shipped problem with a pair and a schedule.
    bool gaps_ok = true;
    std::size_t ensembles = 0;
    double worst_margin = kInfinity;
    for (const auto& name : shipped()) {
        RunConfig cfg = config(name);
        if (!cfg.pair || cfg.j_schedule.size() < 2) continue;
        ++ensembles;
        const fs::path out = scratch("ym_" + name);
        run_cli("ym", cfg, out);
        const json y = read_json(out / "ym.json");
        weight_gap = std::max(weight_gap, y["weight_defect"].get<double>());
        const double gap = y["contraction"]["min_gap"].get<double>();
        const double tol = y["contraction"]["tolerance"].get<double>();
        worst_margin = std::min(worst_margin, gap / tol);
        gaps_ok = gaps_ok && gap >= -tol;
    }
    report(6, dirac_gap <= kDiracTol && gaps_ok && weight_gap <= kWeightTol && ensembles > 0,
           "measures: Dirac gap " + num(dirac_gap) + " (<= " + num(kDiracTol) + "), averaged contraction on " +
               std::to_string(ensembles) + " ensembles min gap/tol " + num(worst_margin) + " (>= -1), weight defect " +
               num(weight_gap) + " (<= " + num(kWeightTol) + ")");
}

void criterion_7() {
    const RunConfig cfg = config("arctan_source.json");
    const std::vector<double> sched{1.0, 2.0, 4.0, 8.0};
    bool ok = true;
    std::vector<double> vm, ve;
    for (std::size_t cells : cfg.cells) {
        const Grid1D grid = grid_of(cfg.problem, cells);
        const auto m = monotone_in_m_check(cfg.problem, grid, 1.0, sched);
        const auto e = monotone_in_ell_check(cfg.problem, grid, sched, 1.0);
        ok = ok && m.max_violation() <= m.tolerance && e.max_violation() <= e.tolerance;
        vm.push_back(m.max_violation());
        ve.push_back(e.max_violation());
    }
    auto shrinks = [](double coarse, double fine) { return fine <= coarse || fine < kVanishing; };
    for (std::size_t k = 0; k + 1 < vm.size(); ++k) ok = ok && shrinks(vm[k], vm[k + 1]) && shrinks(ve[k], ve[k + 1]);
    report(7, ok,
           "m/ell ordering on {1,2,4,8}: max violations m " + num(vm.front()) + " -> " + num(vm.back()) + ", ell " +
               num(ve.front()) + " -> " + num(ve.back()) + " (<= 10 dx (1 + max|v|), non-increasing in dx or below " + num(kVanishing) + ")");
}

void criterion_8() {
    const RunConfig cfg = config("sign_jump.json");
    const auto rep = j_schedule_run(cfg.problem, grid_of(cfg.problem, cfg.cells.back()), cfg.j_schedule);
    const auto ratios = rep.ratios();
    double worst = 0.0;
    for (double r : ratios) worst = std::max(worst, r);
    report(8, !ratios.empty() && worst <= kScheduleRatio,
           "sign-jump j schedule {4..256}: max L1 distance ratio " + num(worst) + " over " +
               std::to_string(ratios.size()) + " doublings (<= " + num(kScheduleRatio) + ")");
}

void criterion_9() {
    double worst_mass = 0.0;
    std::size_t zero_source = 0;
    for (const auto& name : shipped()) {
        const RunConfig cfg = config(name);
        if (cfg.problem.source.id != "zero") continue;
        ++zero_source;
        const auto run = solve(cfg.problem, grid_of(cfg.problem, cfg.cells.front()));
        for (double d : run.mass_defect) worst_mass = std::max(worst_mass, d);
    }
    RunConfig cfg = config("arctan_source.json");
    cfg.cells = {cfg.cells.front()};
    cfg.j_schedule = {512.0, 1024.0};
    std::size_t files = 0, differing = 0;
    bool exits_ok = true;
    for (const auto& cmd : command_names()) {
        const fs::path a = scratch("rerun_a_" + cmd), b = scratch("rerun_b_" + cmd);
        const int ca = run_cli(cmd, cfg, a), cb = run_cli(cmd, cfg, b);
        exits_ok = exits_ok && ca == cb;
        for (const auto& e : fs::directory_iterator(a)) {
            ++files;
            const fs::path other = b / e.path().filename();
            if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differing;
        }
    }
    report(9, worst_mass <= kMassTol && differing == 0 && exits_ok && files > 0,
           "conservation on " + std::to_string(zero_source) + " zero-source problems: max relative defect " +
               num(worst_mass) + " (<= " + num(kMassTol) + "); reruns of " + std::to_string(command_names().size()) +
               " subcommands: " + std::to_string(differing) + "/" + std::to_string(files) + " files differ");
}

}  // namespace

int main(int argc, char** argv) {
    g_configs = argc > 1 ? fs::path(argv[1]) : fs::path(MMFLUX_CONFIG_DIR);
    g_scratch = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "mmflux_acceptance";
    fs::create_directories(g_scratch);
    try {
        criterion_1();
        criterion_2();
        criterion_3();
        criteria_4_5();
        criterion_6();
        criterion_7();
        criterion_8();
        criterion_9();
    } catch (const std::exception& e) {
        std::printf("FAIL  aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
