#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mmflux/entropy.hpp"
#include "mmflux/problem.hpp"
#include "mmflux/solver.hpp"

namespace mmflux {

struct Atom {
    double value = 0.0;
    double weight = 0.0;
};

/// Macro cell: fine steps [n0, n1) x fine cells [i0, i1) and the pooled measure.
struct MacroCell {
    std::size_t n0 = 0, n1 = 0, i0 = 0, i1 = 0;
    std::size_t samples = 0;  // pooled fine samples (members x steps x cells)
    std::vector<Atom> atoms;  // sorted by value

    std::size_t middle_cell() const { return (i0 + i1 - 1) / 2; }
};

struct MacroSpec {
    std::size_t block_t = 8;
    std::size_t block_x = 8;
    std::size_t min_samples = 16;
    bool operator==(const MacroSpec&) const = default;
};

struct YoungMeasureEstimate {
    Grid1D grid;
    std::vector<double> times;  // fine time levels shared by every member
    std::size_t members = 0;
    std::size_t nt = 0, nx = 0;    // macro blocks in t and x
    std::vector<MacroCell> cells;  // row-major: cells[tb * nx + xb]

    const MacroCell& at(std::size_t tb, std::size_t xb) const { return cells[tb * nx + xb]; }
    MacroCell& at(std::size_t tb, std::size_t xb) { return cells[tb * nx + xb]; }
    /// max over cells of |sum of weights - 1|.
    double weight_defect() const;
    bool same_geometry(const YoungMeasureEstimate& other) const;
};

void to_json(nlohmann::json& j, const YoungMeasureEstimate& ym);

/// Pools the v-values of all members over each macro cell (equal weights,
/// values merged at 1e-9). The last block in each direction absorbs the
/// remainder. Throws std::invalid_argument if members disagree on grid or time
/// levels or a macro cell pools fewer than min_samples values.
YoungMeasureEstimate estimate_young_measure(const std::vector<const RunResult*>& ensemble,
                                            const MacroSpec& macro = {});

/// One atom per fine space-time cell (1x1 macro cells): the Dirac measure of a single run.
YoungMeasureEstimate dirac_from_run(const RunResult& run);

enum class Sign { plus, minus };

/// Measure-valued semi-entropy inequality with bracket sums over atoms. PLUS
/// returns its left side; MINUS returns the negated left side. Positive means
/// the inequality holds. gamma > 0 replaces the indicator in the source bracket
/// by the piecewise-affine chi^gamma; gamma = 0 uses the indicator itself.
double mv_entropy_residual(Sign sign, const YoungMeasureEstimate& ym, const Approximation& approx, double mu,
                           const TestFunction& psi, double gamma = 0.0);

/// Source bracket term of the PLUS inequality alone, with chi^gamma (gamma = 0: indicator).
double mv_source_term(const YoungMeasureEstimate& ym, const Approximation& approx, double mu,
                      const TestFunction& psi, double gamma);

/// chi^gamma_{lambda > mu}: affine on [mu, mu + gamma) for mu >= 0, on [mu - gamma, mu) for mu < 0.
double chi_gamma(double lambda, double mu, double gamma);

struct ChiGammaCheck {
    std::vector<double> gammas;  // decreasing, then 0
    std::vector<double> values;  // source term per gamma
    bool ordered = true;         // values nonincreasing toward the indicator value
    bool mu_is_atom = false;     // mu coincides with an atom in the support (exceptional value)
};

ChiGammaCheck chi_gamma_check(const YoungMeasureEstimate& ym, const Approximation& approx, double mu,
                              const TestFunction& psi, const std::vector<double>& gammas = {1e-2, 1e-3});

/// Averaged contraction inequality with product-measure brackets as double sums over atom pairs.
/// Throws std::invalid_argument if the macro grids differ.
double averaged_contraction_gap(const YoungMeasureEstimate& ym1, const YoungMeasureEstimate& ym2,
                                const Approximation& approx, const TestFunction& psi);

/// 1.05 * max |v| over the ensemble.
double ensemble_bound(const std::vector<const RunResult*>& ensemble);

struct SupportTraceReport {
    double bound = 0.0;
    bool support_ok = true;
    std::vector<std::string> violations;                // "tb,xb: value"
    std::vector<std::pair<double, double>> ic_curve;  // (slab mid time, int_K <|eta - u0|, nu> dx)
};

/// Support inside [-R, R] for every atom, and the initial-trace curve on the
/// first `slabs` macro time slabs over K = [a, b].
SupportTraceReport support_and_trace_check(const YoungMeasureEstimate& ym, double R, const Approximation& approx,
                                           const InitialDatum& u0, double a, double b, std::size_t slabs = 10);

void to_json(nlohmann::json& j, const SupportTraceReport& r);

}  // namespace mmflux
