#pragma once

#include <cstdint>
#include <vector>

#include "llb/covers.hpp"
#include "llb/exact_rank.hpp"
#include "llb/rational.hpp"

namespace llb {

// Dimension cap for dense eigensolves; LLB_EXACT_CAP overrides the default 3000.
long exact_eigensolve_cap();

// Eigenvalues of a symmetric PSD integer matrix, ascending. Tiny negative
// values (solver noise) are clamped to 0; a genuinely negative eigenvalue is
// an internal error since our Laplacians are PSD by construction.
std::vector<double> laplacian_spectrum(const SparseIntMatrix& L, long cap = 0);

double heat_trace_from_spectrum(const std::vector<double>& eigenvalues, double t);
double heat_trace_exact(const SparseIntMatrix& L, double t);

struct StochasticTrace {
    double value = 0;
    double std_error = 0;   // sample standard error over probes
    double bias_bound = 0;  // dimension x uniform Chebyshev truncation error
};

// Hutchinson estimator of tr exp(-tL) with a Chebyshev expansion of exp on
// [0, lambda_max] (Gershgorin bound). Deterministic for a fixed seed;
// poly_degree 0 picks the degree from the 1e-8 uniform-error target.
StochasticTrace heat_trace_stochastic(const SparseIntMatrix& L, double t, int probes,
                                      int poly_degree, std::uint64_t seed);

// Same estimator across a whole t-grid, reusing one Chebyshev vector
// recurrence per probe (the matrix work is shared by all t).
std::vector<StochasticTrace> heat_trace_stochastic_grid(const SparseIntMatrix& L,
                                                        const std::vector<double>& t_grid,
                                                        int probes, int poly_degree,
                                                        std::uint64_t seed);

struct HeatLevel {
    long degree = 1;
    bool exact = true;
    std::vector<double> values;      // normalized trace (1/degree) tr exp(-t Laplacian_k)
    std::vector<double> std_errors;  // zero in exact mode
    double bias_bound = 0;           // normalized; zero in exact mode
};

struct HeatTraceSeries {
    int k = 0;
    std::vector<double> t_grid;
    std::vector<HeatLevel> levels;
};

// How traces are computed per level: Auto switches to the stochastic
// estimator above the exact-eigensolve cap; Exact refuses (TooLargeForExact)
// instead of switching; Stochastic uses the estimator everywhere.
enum class TraceMode { Auto, Exact, Stochastic };

HeatTraceSeries heat_trace_series(const CoverTower& tower, int k,
                                  const std::vector<double>& t_grid, int probes,
                                  std::uint64_t seed, TraceMode mode = TraceMode::Auto);

struct ConvergenceReport {
    int k = 0;
    std::vector<long> degrees;
    std::vector<long> betti;
    std::vector<Rational> normalized;  // betti/degree, exact
    Rational fitted_limit{0};          // slope of betti vs degree over the last two levels
    std::vector<Rational> deviations;  // |normalized - fitted_limit|
    bool converging = false;
};

ConvergenceReport normalized_betti_sequence(const CoverTower& tower, int k);

struct PlateauEstimate {
    double value = 0;    // deepest level's normalized trace at t_star
    double t_star = 0;
    double tolerance = 0;  // effective agreement tolerance at t_star
    bool domination_ok = false;
    double max_domination_violation = 0;
};

// Plateau read-off: largest grid t where the last two levels agree within
// 1e-2*(1+value), widened by 3 standard errors for stochastic levels. Also
// checks that every level's normalized trace dominates its normalized Betti
// number at every t.
PlateauEstimate l2_betti_plateau(const HeatTraceSeries& series,
                                 const std::vector<Rational>& normalized_betti);

PlateauEstimate l2_betti_plateau(const CoverTower& tower, int k,
                                 const std::vector<double>& t_grid, int probes = 64,
                                 std::uint64_t seed = 2);

}  // namespace llb
