#include <cmath>

#include "doctest.h"

#include "mmflux/flux.hpp"
#include "mmflux/kernel.hpp"

using namespace mmflux;

namespace {

FluxCurve heaviside() {
    // 0 for v < 0, 1 for v > 0.
    return FluxCurve({{-4.0, 0.0}, {4.0, 1.0}}, {{0.0, 0.0, 1.0}});
}

FluxCurve two_jumps() {
    return FluxCurve({{-4.0, -4.0}, {4.0, 4.0}}, {{-1.0, -1.0, 0.5}, {2.0, 3.5, 2.0}});
}

FluxCurve burgers_curve() {
    FluxSpec s;
    s.kind = "burgers";
    return s.build();
}

}  // namespace

TEST_CASE("flux curve evaluation and one-sided limits") {
    const auto h = heaviside();
    CHECK(h.left_limit(0.0) == 0.0);
    CHECK(h.right_limit(0.0) == 1.0);
    CHECK(h.eval_interval(0.0) == Interval{0.0, 1.0});
    // Samples (-4, 0) and (4, 1) with a jump at 0: affine pieces 0 -> 0 and 1 -> 1.
    CHECK(h(-2.0) == doctest::Approx(0.0));
    CHECK(h(2.0) == doctest::Approx(1.0));
    CHECK(h.image(-1.0, 1.0) == Interval{0.0, 1.0});
    CHECK_THROWS_AS(FluxCurve({{1.0, 0.0}, {0.0, 1.0}}, {}), std::invalid_argument);
}

TEST_CASE("flux specs build the closed forms") {
    const auto b = burgers_curve();
    for (double v : {-3.0, -0.5, 0.0, 0.7, 2.0}) CHECK(b(v) == doctest::Approx(0.5 * v * v).epsilon(1e-4));
    FluxSpec s;
    s.kind = "linear";
    s.speed = 2.0;
    s.steps = {{0.5, 0.25}};
    const auto a = s.build();
    CHECK(a(0.25) == doctest::Approx(0.5));
    CHECK(a.left_limit(0.5) == doctest::Approx(1.0));
    CHECK(a.right_limit(0.5) == doctest::Approx(1.25));
    CHECK(a(1.0) == doctest::Approx(2.25));
}

TEST_CASE("parametrization without jumps is the identity reparametrization") {
    const auto b = burgers_curve();
    const Parametrization p(b);
    CHECK(p.plateaus().empty());
    for (double s = -3.0; s <= 3.0; s += 0.25) {
        CHECK(p.U(s) == s);
        CHECK(p.calA(s) == b(s));
    }
}

TEST_CASE("parametrization of a single unit jump") {
    const Parametrization p(heaviside());
    REQUIRE(p.plateaus().size() == 1);
    CHECK(p.plateaus()[0].alpha == 0.0);
    CHECK(p.plateaus()[0].beta == 1.0);
    for (double s = 0.0; s <= 1.0; s += 0.125) {
        CHECK(p.U(s) == 0.0);
        CHECK(p.calA(s) == doctest::Approx(s));
    }
    CHECK(p.U(-0.5) == -0.5);
    CHECK(p.U(1.5) == 0.5);
}

TEST_CASE("parametrization with two jumps") {
    const auto a = two_jumps();
    const Parametrization p(a);
    REQUIRE(p.plateaus().size() == 2);
    for (const auto& pl : p.plateaus()) CHECK(pl.beta - pl.alpha == 1.0);
    // U strictly increasing between the plateaus.
    const double s0 = p.plateaus()[0].beta, s1 = p.plateaus()[1].alpha;
    REQUIRE(s1 > s0);
    double prev = p.U(s0);
    for (int i = 1; i <= 20; ++i) {
        const double u = p.U(s0 + (s1 - s0) * i / 20.0);
        CHECK(u > prev);
        prev = u;
    }
}

TEST_CASE("calA lies in the filled graph of A over U on a fine grid") {
    for (const auto& a : {heaviside(), two_jumps()}) {
        for (double slope : {0.5, 1.0, 3.0}) {
            const Parametrization p(a, slope);
            for (int i = 0; i <= 10000; ++i) {
                const double s = -5.0 + 10.0 * i / 10000.0;
                const auto range = a.eval_interval(p.U(s));
                REQUIRE(range.contains(p.calA(s), 1e-12));
            }
            // calA(s(v)) = A(v) at continuity points.
            for (double v = -3.3; v <= 3.3; v += 0.1) {
                bool at_jump = false;
                for (const auto& jp : a.jumps()) at_jump = at_jump || std::abs(v - jp.z) < 1e-9;
                if (!at_jump) CHECK(std::abs(p.calA(p.s_of(v)) - a(v)) <= 1e-10);
            }
        }
    }
}

TEST_CASE("smooth_flux reproduces constants and affine maps") {
    const FluxCurve c({{-8.0, 3.0}, {8.0, 3.0}}, {});
    const auto cj = smooth_flux(c, 32.0, 4.0);
    for (double v = -3.9; v < 3.9; v += 0.3) CHECK(std::abs(cj(v) - 3.0) <= 1e-14);
    const FluxCurve l({{-8.0, -16.0 + 1.0}, {8.0, 16.0 + 1.0}}, {});
    const auto lj = smooth_flux(l, 32.0, 4.0);
    for (double v = -3.9; v < 3.9; v += 0.3) CHECK(std::abs(lj(v) - (2.0 * v + 1.0)) <= 1e-10);
}

TEST_CASE("smooth Burgers flux converges at the mollification rate") {
    // Midpoint-rule oracle for the exact convolution of v^2/2 with the normalized bump.
    auto oracle = [](double v, double r) {
        constexpr int kNodes = 4000;
        double num = 0.0, den = 0.0;
        for (int q = 0; q < kNodes; ++q) {
            const double s = -1.0 + (q + 0.5) * 2.0 / kNodes;
            num += bump(s) * 0.5 * (v - r * s) * (v - r * s);
            den += bump(s);
        }
        return num / den;
    };
    const auto b = burgers_curve();
    double prev = 0.0;
    for (double j : {16.0, 32.0, 64.0}) {
        const auto bj = smooth_flux(b, j, 8.0);
        double err_exact = 0.0, err_oracle = 0.0;
        for (double v = -2.0; v <= 2.0; v += 0.01) {
            err_exact = std::max(err_exact, std::abs(bj(v) - 0.5 * v * v));
            err_oracle = std::max(err_oracle, std::abs(bj(v) - oracle(v, 1.0 / j)));
        }
        CHECK(err_exact <= 2.0 / j);  // Lip(A) on [-2, 2] is 2
        // 16-node rule: second moment off by < 0.02; plus linear interpolation h^2 / 8 of v^2 / 2.
        const double h = bj.step();
        CHECK(err_oracle <= 0.01 / (j * j) + h * h / 8.0 + 1e-12);
        if (prev > 0.0) CHECK(prev / err_exact >= 1.5);
        prev = err_exact;
    }
}

TEST_CASE("composed flux examples") {
    const auto b = burgers_curve();
    CHECK(composed_flux(MonotoneGraph::identity(), 2.0, b) == Interval{b(2.0), b(2.0)});
    CHECK(b(2.0) == doctest::Approx(2.0).epsilon(1e-6));
    const FluxCurve id({{-8.0, -8.0}, {8.0, 8.0}}, {});
    CHECK(composed_flux(MonotoneGraph::sign(), 0.0, id) == Interval{-1.0, 1.0});
    const Grid1D grid(0.0, 1.0, 4);
    const auto th = regularize_theta(ThetaField(MonotoneGraph::sign_plus_identity(), Coefficient{}), grid, 64.0);
    const auto aj = smooth_flux(id, 64.0, 8.0);
    const double v = composed_flux(th, 1, 0.01, aj);
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(th.value(1, 0.01)).epsilon(1e-9));
}

TEST_CASE("flux JSON round trip") {
    const auto a = two_jumps();
    nlohmann::json j = a;
    CHECK(j.get<FluxCurve>() == a);
    FluxSpec s;
    s.kind = "cubic";
    s.speed = 0.5;
    s.steps = {{0.25, -0.1}};
    nlohmann::json js = s;
    CHECK(js.get<FluxSpec>() == s);
    CHECK_THROWS(nlohmann::json::parse(R"({"kind":"sine"})").get<FluxSpec>());
}
