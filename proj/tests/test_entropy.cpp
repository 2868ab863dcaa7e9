#include <cmath>

#include "doctest.h"

#include "mmflux/entropy.hpp"
#include "mmflux/errors.hpp"
#include "mmflux/harness.hpp"

using namespace mmflux;

namespace {

ProblemSpec bump_problem(double height) {
    ProblemSpec s;
    s.u0.kind = "bump";
    s.u0.value = height;
    s.u0.at = -0.2;
    s.u0.radius = 0.4;
    s.source.id = "arctan";
    s.source.c = 0.5;
    s.j = 4096.0;
    return s;
}

}  // namespace

TEST_CASE("test functions") {
    TestFunction psi{"p", 0.25, 0.0, 0.1, 0.5};
    CHECK(psi(0.25, 0.0) == doctest::Approx(std::exp(-2.0)));
    CHECK(psi(0.36, 0.0) == 0.0);
    CHECK(psi(0.25, 0.5) == 0.0);
    const auto battery = standard_battery(0.5, -1.0, 1.0);
    CHECK(battery.size() == 18);
    for (const auto& p : battery) CHECK(p(0.0, p.xc) == 0.0);
    // Weights integrate psi_t exactly: the time weights over a full slab sum to 0.
    double wt = 0.0;
    for (int n = 0; n < 100; ++n) wt += cell_weights(psi, n * 0.005, (n + 1) * 0.005, -0.01, 0.01).wt;
    CHECK(std::abs(wt) <= 1e-15);
}

TEST_CASE("resolution check") {
    ProblemSpec s;
    s.u0.value = 0.5;
    s.far_left = s.far_right = 0.5;
    const auto run = solve(s, Grid1D(-1.0, 1.0, 256));
    TestFunction narrow{"n", 0.25, 0.0, 0.1, 0.005};  // 0.01 wide in x: under 8 cells
    CHECK_THROWS_AS(check_resolution(run, narrow), ResolutionError);
    TestFunction wide{"w", 0.25, 0.0, 0.1, 0.5};
    CHECK_NOTHROW(check_resolution(run, wide));
}

TEST_CASE("constant solution has zero residuals") {
    ProblemSpec s;
    s.u0.value = 0.5;
    s.far_left = s.far_right = 0.5;
    const Grid1D grid(-1.0, 1.0, 256);
    const Approximation a(s, grid);
    const auto run = solve(a, s.u0, s.T);
    const auto battery = standard_battery(s.T, s.x_lo, s.x_hi);
    const std::vector<double> ks{-1.0, 0.0, 0.3, 0.5, 1.0};
    const auto rep = entropy_report(run, a, all_forms(), ks, battery);
    for (const auto& e : rep.entries) CHECK(std::abs(e.residual) <= 1e-12);
    for (const auto& [t, err] : initial_trace_error(run, -1.0, 1.0)) CHECK(err <= 1e-14);
}

TEST_CASE("SEMI_PLUS + SEMI_MINUS = SGN when psi vanishes at t = 0") {
    const auto s = bump_problem(0.8);
    const Grid1D grid(-1.0, 1.0, 256);
    const Approximation a(s, grid);
    const auto run = solve(a, s.u0, s.T);
    for (const auto& psi : standard_battery(s.T, s.x_lo, s.x_hi)) {
        for (double k : {-0.3, 0.0, 0.2, 0.5}) {
            const double p = entropy_residual(Form::semi_plus, run, a, k, psi);
            const double m = entropy_residual(Form::semi_minus, run, a, k, psi);
            const double g = entropy_residual(Form::sgn, run, a, k, psi);
            CHECK(std::abs(p + m - g) <= 1e-12);
        }
    }
}

TEST_CASE("N1 and N2 agree when theta does not depend on x") {
    auto s = bump_problem(0.8);
    s.theta = ThetaField(MonotoneGraph::sign_plus_identity(), Coefficient{});
    const Grid1D grid(-1.0, 1.0, 256);
    const Approximation a(s, grid);
    const auto run = solve(a, s.u0, s.T);
    for (const auto& psi : standard_battery(s.T, s.x_lo, s.x_hi)) {
        for (double kv : {-1.5, -0.2, 0.0, 0.4, 1.3}) {
            const double n2 = entropy_residual(Form::n2, run, a, kv, psi);
            const double n1 = entropy_residual(Form::n1, run, a, a.eta(0, kv), psi);
            CHECK(std::abs(n1 - n2) <= 1e-9);
        }
    }
}

TEST_CASE("entropy inequalities hold within tolerance for a dissipative problem") {
    const auto s = bump_problem(0.8);
    const Grid1D grid(-1.0, 1.0, 256);
    const Approximation a(s, grid);
    const auto run = solve(a, s.u0, s.T);
    const auto rep = entropy_report(run, a, all_forms(), k_samples(run, s), standard_battery(s.T, s.x_lo, s.x_hi));
    CHECK(rep.tolerance == doctest::Approx(residual_tolerance(grid.dx(), run.max_abs_v())));
    CHECK(rep.holds());
    CHECK(rep.entries.size() == 5 * k_samples(run, s).size() * 18);
}

TEST_CASE("pair gaps") {
    const auto lo = bump_problem(0.5);
    const auto hi = bump_problem(0.8);
    const Grid1D grid(-1.0, 1.0, 256);
    const auto ens = solve_ensemble({lo, hi}, grid);
    const auto& r1 = ens.runs[0];
    const auto& r2 = ens.runs[1];
    const auto& a1 = *ens.approximations[0];
    const auto& a2 = *ens.approximations[1];
    const double tol = residual_tolerance(grid.dx(), std::max(r1.max_abs_v(), r2.max_abs_v()));
    for (const auto& psi : standard_battery(lo.T, lo.x_lo, lo.x_hi)) {
        CHECK(pair_gap(PairKind::contraction, r1, a1, r1, a1, psi) == 0.0);
        CHECK(pair_gap(PairKind::contraction, r1, a1, r2, a2, psi) >= -tol);
        CHECK(pair_gap(PairKind::comparison, r2, a2, r1, a1, psi) >= -tol);
        CHECK(pair_gap(PairKind::kato, r1, a1, r2, a2, psi) >= -tol);
        // u1 <= u2 everywhere: the comparison bracket vanishes up to source rounding where v1 == v2.
        CHECK(std::abs(pair_gap(PairKind::comparison, r1, a1, r2, a2, psi)) <= 1e-20);
    }
    const auto other = solve(lo, Grid1D(-1.0, 1.0, 128));
    CHECK_THROWS_AS((void)l1_distance_curve(r1, other), std::invalid_argument);
}

TEST_CASE("L1 distance under pure decay follows exp(-t)") {
    auto s = bump_problem(1.0);
    s.flux.kind = "linear";
    s.flux.speed = 0.0;
    s.source.id = "linear";
    s.source.c = 1.0;
    auto zero = s;
    zero.u0 = InitialDatum{};
    const Grid1D grid(-1.0, 1.0, 1024);
    const auto ens = solve_ensemble({s, zero}, grid);
    const auto curve = l1_distance_curve(ens.runs[0], ens.runs[1]);
    const double l0 = curve.front().second;
    REQUIRE(l0 > 0.0);
    for (const auto& [t, d] : curve) CHECK(std::abs(d - l0 * std::exp(-t)) <= 0.02 * l0 * std::exp(-t));
    const auto same = l1_distance_curve(ens.runs[0], ens.runs[0]);
    for (const auto& [t, d] : same) CHECK(d == 0.0);
    for (std::size_t n = 0; n + 1 < curve.size(); ++n) CHECK(curve[n + 1].second <= curve[n].second + 1e-15);
}

TEST_CASE("k samples include flux jump points") {
    auto s = bump_problem(0.8);
    s.flux.steps = {{0.3, 0.25}};
    const auto run = solve(s, Grid1D(-1.0, 1.0, 64));
    const auto ks = k_samples(run, s);
    CHECK(std::is_sorted(ks.begin(), ks.end()));
    CHECK(std::find(ks.begin(), ks.end(), 0.3) != ks.end());
    CHECK(ks.front() <= -0.5);
}

TEST_CASE("form names round trip") {
    for (Form f : all_forms()) CHECK(form_from_string(to_string(f)) == f);
    CHECK_THROWS(form_from_string("SEMI"));
}
