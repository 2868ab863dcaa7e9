#pragma once

#include <cmath>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mmflux/problem.hpp"
#include "mmflux/solver.hpp"

namespace mmflux {

/// psi(t, x) = b((t - tc) / rt) * b((x - xc) / rx) with b the unnormalized bump.
/// rx = +inf gives a test function that is flat in x.
struct TestFunction {
    std::string id;
    double tc = 0.0;
    double xc = 0.0;
    double rt = 1.0;
    double rx = 1.0;

    double operator()(double t, double x) const { return time_factor(t) * space_factor(x); }
    double time_factor(double t) const;
    double space_factor(double x) const;
    bool flat_in_x() const { return std::isinf(rx); }
};

/// 3x3 centers (T/4, T/2, 3T/4) x (quarter points of the domain) times the
/// radius pairs given as fractions of (T, x_hi - x_lo).
std::vector<TestFunction> standard_battery(double T, double x_lo, double x_hi,
                                           const std::vector<std::pair<double, double>>& radii = {{0.125, 0.125},
                                                                                                  {0.2, 0.2}});

/// Quadrature weights of psi on the space-time cell [t0, t1] x [x0, x1]:
/// psi_t, psi_x and psi integrated by the midpoint rule.
struct CellWeights {
    double wt = 0.0;
    double wx = 0.0;
    double w0 = 0.0;
};
CellWeights cell_weights(const TestFunction& psi, double t0, double t1, double x0, double x1);

/// Throws ResolutionError unless psi's radii span >= 8 cells and >= 8 steps.
void check_resolution(const RunResult& run, const TestFunction& psi);

enum class Form { semi_plus, semi_minus, sgn, n1, n2 };
std::string to_string(Form f);
Form form_from_string(const std::string& s);
inline const std::vector<Form>& all_forms() {
    static const std::vector<Form> forms{Form::semi_plus, Form::semi_minus, Form::sgn, Form::n1, Form::n2};
    return forms;
}

/// Left side of the chosen entropy inequality (plus its initial term where it
/// has one) by midpoint quadrature on the run's space-time cells. k lives in
/// v-space for every form except N1, whose k is a u-value. Nonnegative means
/// the inequality holds.
double entropy_residual(Form form, const RunResult& run, const Approximation& approx, double k,
                        const TestFunction& psi);

/// Default k set in v-space: 33 values over [min v - 0.5, max v + 0.5], the
/// flux jump points and the jump values of theta, sorted and deduplicated.
std::vector<double> k_samples(const RunResult& run, const ProblemSpec& spec, std::size_t count = 33);

/// t -> int_K |u(t, x) - u0(x)| dx over the first `levels` time levels, K = [a, b].
std::vector<std::pair<double, double>> initial_trace_error(const RunResult& run, double a, double b,
                                                           std::size_t levels = 10);

enum class PairKind { contraction, comparison, kato };
std::string to_string(PairKind k);

/// Left side minus right side of the two-solution inequality; positive means it holds.
/// Throws std::invalid_argument if the runs do not share grid and time levels.
double pair_gap(PairKind kind, const RunResult& run1, const Approximation& a1, const RunResult& run2,
                const Approximation& a2, const TestFunction& psi);

/// t -> ||u1(t) - u2(t)||_L1 of the piecewise-constant cell averages. A trapezoid
/// rule over centers would halve the end cells and can grow under boundary inflow.
std::vector<std::pair<double, double>> l1_distance_curve(const RunResult& run1, const RunResult& run2);

/// Tolerance C dx (1 + max|v|) with C = 10.
inline double residual_tolerance(double dx, double max_abs_v) { return 10.0 * dx * (1.0 + max_abs_v); }

struct ResidualEntry {
    Form form;
    double k;        // as passed to entropy_residual
    std::string psi;
    double residual;
};

struct EntropyReport {
    std::size_t cells = 0;
    double dx = 0.0;
    double tolerance = 0.0;
    std::vector<ResidualEntry> entries;  // ordered by form, k, psi

    double minimum(Form f) const;
    double minimum() const;
    bool holds() const { return minimum() >= -tolerance; }
};

/// Residuals for all (form, k, psi). For N1 each k is mapped to u-space at the
/// test-function center.
EntropyReport entropy_report(const RunResult& run, const Approximation& approx, const std::vector<Form>& forms,
                             const std::vector<double>& ks, const std::vector<TestFunction>& battery);

void to_json(nlohmann::json& j, const EntropyReport& r);
/// CSV with header form,k,psi_id,residual.
void write_csv(std::ostream& os, const EntropyReport& r);

}  // namespace mmflux
