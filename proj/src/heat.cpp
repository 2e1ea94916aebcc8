#include "llb/heat.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "llb/errors.hpp"
#include "llb/parallel.hpp"
#include "llb/simplicial.hpp"

namespace llb {

long exact_eigensolve_cap() {
    if (const char* env = std::getenv("LLB_EXACT_CAP")) {
        long cap = std::atol(env);
        if (cap > 0) return cap;
    }
    return 3000;
}

namespace {

void require_symmetric(const SparseIntMatrix& L) {
    if (L.rows() != L.cols())
        throw NotSymmetric("matrix is " + std::to_string(L.rows()) + "x" +
                           std::to_string(L.cols()));
    SparseIntMatrix D = SparseIntMatrix(L.transpose()) - L;
    for (int j = 0; j < D.outerSize(); ++j)
        for (SparseIntMatrix::InnerIterator it(D, j); it; ++it)
            if (it.value() != 0)
                throw NotSymmetric("entry (" + std::to_string(it.row()) + "," +
                                   std::to_string(j) + ") differs from its transpose");
}

double gershgorin_bound(const SparseIntMatrix& L) {
    std::vector<std::int64_t> row_sum(L.rows(), 0);
    for (int j = 0; j < L.outerSize(); ++j)
        for (SparseIntMatrix::InnerIterator it(L, j); it; ++it)
            row_sum[it.row()] += std::abs(it.value());
    std::int64_t m = 0;
    for (auto v : row_sum) m = std::max(m, v);
    return static_cast<double>(m);
}

}  // namespace

std::vector<double> laplacian_spectrum(const SparseIntMatrix& L, long cap) {
    require_symmetric(L);
    if (cap <= 0) cap = exact_eigensolve_cap();
    if (L.rows() > cap)
        throw TooLargeForExact("dimension " + std::to_string(L.rows()) +
                               " exceeds the exact-eigensolve cap " + std::to_string(cap));
    if (L.rows() == 0) return {};

    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(L.rows(), L.cols());
    for (int j = 0; j < L.outerSize(); ++j)
        for (SparseIntMatrix::InnerIterator it(L, j); it; ++it)
            dense(it.row(), j) = static_cast<double>(it.value());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw InternalError("eigensolver failed to converge");

    std::vector<double> eig(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + solver.eigenvalues().size());
    double scale = std::max(1.0, std::abs(eig.back()));
    for (double& v : eig) {
        if (v < -1e-10 * scale)
            throw InternalError("matrix is not positive semidefinite: eigenvalue " +
                                std::to_string(v));
        if (v < 0) v = 0;
    }
    return eig;
}

double heat_trace_from_spectrum(const std::vector<double>& eigenvalues, double t) {
    if (t <= 0) throw ValidationError("heat trace requires t > 0");
    double sum = 0;
    for (double lambda : eigenvalues) sum += std::exp(-t * lambda);
    return sum;
}

double heat_trace_exact(const SparseIntMatrix& L, double t) {
    return heat_trace_from_spectrum(laplacian_spectrum(L), t);
}

namespace {

// Chebyshev coefficients of exp(-t x) on [0, lambda_max]: with z = t*lambda_max/2,
// exp(-tx) = sum_k (2 - delta_{k0}) (-1)^k e^{-z} I_k(z) T_k(y), y = 2x/lambda_max - 1.
// The scaled Bessel values e^{-z} I_k(z) come from Miller's backward recurrence,
// normalized through e^z = I_0 + 2*sum I_k, so nothing overflows at large z.
std::vector<double> scaled_bessel(double z, int kmax) {
    std::vector<double> f(kmax + 1, 0.0);
    if (z <= 0) {
        f[0] = 1.0;
        return f;
    }
    int start = kmax + 30 + static_cast<int>(2 * std::sqrt(z));
    double fk1 = 0.0, fk = 1e-280;
    double norm = 0.0;  // accumulates f0 + 2*sum f_k contributions seen so far
    std::vector<double> keep(kmax + 1, 0.0);
    for (int k = start; k >= 1; --k) {
        double fkm1 = fk1 + (2.0 * k / z) * fk;
        fk1 = fk;
        fk = fkm1;
        if (k - 1 <= kmax) keep[k - 1] = fk;
        if (std::abs(fk) > 1e250) {
            fk *= 1e-250;
            fk1 *= 1e-250;
            for (auto& v : keep) v *= 1e-250;
        }
    }
    norm = keep[0];
    for (int k = 1; k <= kmax; ++k) norm += 2 * keep[k];
    // keep[] holds I_k up to a common factor c with norm = c*e^z, so
    // keep[k]/norm = e^{-z} I_k(z) exactly as wanted.
    for (int k = 0; k <= kmax; ++k) f[k] = keep[k] / norm;
    return f;
}

struct ChebCoeffs {
    std::vector<double> c;  // c[k] multiplies T_k
    double tail = 0;        // uniform error bound of the truncation
};

ChebCoeffs exp_chebyshev(double z, int degree_override) {
    const double target = 1e-8;
    int kmax = static_cast<int>(z + 9 * std::cbrt(std::max(z, 1.0)) + 40);
    if (degree_override > 0) kmax = std::max(kmax, degree_override + 1);
    auto b = scaled_bessel(z, kmax);

    // Truncation degree: smallest K with 2*sum_{k>K} b_k below target, plus a
    // geometric estimate for the analytic remainder beyond kmax.
    double remainder = 0;
    if (kmax >= 2 && b[kmax - 1] > 0 && b[kmax] > 0) {
        double r = b[kmax] / b[kmax - 1];
        if (r < 0.9) remainder = 2 * b[kmax] * r / (1 - r);
    }
    std::vector<double> suffix(kmax + 2, 0.0);
    for (int k = kmax; k >= 1; --k) suffix[k] = suffix[k + 1] + 2 * std::abs(b[k]);
    int K = kmax;
    if (degree_override > 0) {
        K = std::min(kmax, degree_override);
    } else {
        for (int k = 0; k <= kmax; ++k)
            if (suffix[k + 1] + remainder <= target) {
                K = k;
                break;
            }
    }
    ChebCoeffs out;
    out.c.resize(K + 1);
    for (int k = 0; k <= K; ++k) out.c[k] = (k == 0 ? 1.0 : 2.0) * (k % 2 ? -1.0 : 1.0) * b[k];
    out.tail = suffix[K + 1] + remainder;
    return out;
}

}  // namespace

std::vector<StochasticTrace> heat_trace_stochastic_grid(const SparseIntMatrix& L,
                                                        const std::vector<double>& t_grid,
                                                        int probes, int poly_degree,
                                                        std::uint64_t seed) {
    require_symmetric(L);
    if (probes < 1) throw InvalidProbeCount("need at least 1 probe, got " +
                                            std::to_string(probes));
    for (double t : t_grid)
        if (t <= 0) throw ValidationError("heat trace requires t > 0");

    const int n = static_cast<int>(L.rows());
    const std::size_t nt = t_grid.size();
    std::vector<StochasticTrace> out(nt);
    if (n == 0) return out;

    const double lmax = gershgorin_bound(L);
    if (lmax == 0) {  // zero matrix: every probe returns exactly n
        for (auto& s : out) s.value = n;
        return out;
    }

    std::vector<ChebCoeffs> coeffs(nt);
    std::size_t kneed = 0;
    for (std::size_t i = 0; i < nt; ++i) {
        coeffs[i] = exp_chebyshev(t_grid[i] * lmax / 2.0, poly_degree);
        kneed = std::max(kneed, coeffs[i].c.size());
    }

    Eigen::SparseMatrix<double> Ld = L.cast<double>();
    // One Chebyshev vector recurrence per probe; per-t work is just a dot
    // product with the coefficient vector.
    std::vector<std::vector<double>> probe_sums(probes);
    parallel_for(static_cast<std::size_t>(probes), [&](std::size_t p) {
        std::uint64_t state = derive_seed(seed, p);
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) {
            state = splitmix64(state + 0x9e3779b97f4a7c15ULL);
            v[i] = (state >> 63) ? 1.0 : -1.0;
        }
        Eigen::VectorXd w0 = v;
        Eigen::VectorXd w1 = (2.0 / lmax) * (Ld * v) - v;
        std::vector<double> s(kneed);
        s[0] = v.dot(w0);
        if (kneed > 1) s[1] = v.dot(w1);
        for (std::size_t k = 2; k < kneed; ++k) {
            Eigen::VectorXd w2 = (4.0 / lmax) * (Ld * w1) - 2.0 * w1 - w0;
            s[k] = v.dot(w2);
            w0.swap(w1);
            w1.swap(w2);
        }
        probe_sums[p] = std::move(s);
    });

    for (std::size_t i = 0; i < nt; ++i) {
        const auto& c = coeffs[i].c;
        double mean = 0, m2 = 0;
        for (int p = 0; p < probes; ++p) {
            double est = 0;
            for (std::size_t k = 0; k < c.size(); ++k) est += c[k] * probe_sums[p][k];
            double delta = est - mean;
            mean += delta / (p + 1);
            m2 += delta * (est - mean);
        }
        out[i].value = mean;
        out[i].std_error = probes > 1 ? std::sqrt(m2 / (double(probes) * (probes - 1))) : 0.0;
        out[i].bias_bound = n * coeffs[i].tail;
    }
    return out;
}

StochasticTrace heat_trace_stochastic(const SparseIntMatrix& L, double t, int probes,
                                      int poly_degree, std::uint64_t seed) {
    return heat_trace_stochastic_grid(L, {t}, probes, poly_degree, seed)[0];
}

HeatTraceSeries heat_trace_series(const CoverTower& tower, int k,
                                  const std::vector<double>& t_grid, int probes,
                                  std::uint64_t seed, TraceMode mode) {
    if (k < 0 || k > tower.base.dim())
        throw DegreeOutOfRange("form degree " + std::to_string(k) + " outside 0.." +
                               std::to_string(tower.base.dim()));
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] <= 0) throw ValidationError("t grid must be positive");
        if (i > 0 && t_grid[i] <= t_grid[i - 1])
            throw ValidationError("t grid must be strictly increasing");
    }

    HeatTraceSeries series;
    series.k = k;
    series.t_grid = t_grid;
    const long cap = exact_eigensolve_cap();
    for (std::size_t li = 0; li < tower.levels.size(); ++li) {
        const auto& level = tower.levels[li];
        SparseIntMatrix Lk = hodge_laplacian(level.complex, k);
        HeatLevel out;
        out.degree = level.degree;
        const bool use_exact =
            mode == TraceMode::Exact || (mode == TraceMode::Auto && Lk.rows() <= cap);
        if (use_exact) {
            auto eig = laplacian_spectrum(Lk, cap);
            out.exact = true;
            out.values.reserve(t_grid.size());
            for (double t : t_grid) out.values.push_back(heat_trace_from_spectrum(eig, t) /
                                                         level.degree);
            out.std_errors.assign(t_grid.size(), 0.0);
        } else {
            auto traces = heat_trace_stochastic_grid(Lk, t_grid, probes, 0,
                                                     derive_seed(seed, li));
            out.exact = false;
            for (const auto& tr : traces) {
                out.values.push_back(tr.value / level.degree);
                out.std_errors.push_back(tr.std_error / level.degree);
                out.bias_bound = std::max(out.bias_bound, tr.bias_bound / level.degree);
            }
        }
        series.levels.push_back(std::move(out));
    }
    return series;
}

ConvergenceReport normalized_betti_sequence(const CoverTower& tower, int k) {
    if (k < 0 || k > tower.base.dim())
        throw DegreeOutOfRange("form degree " + std::to_string(k) + " outside 0.." +
                               std::to_string(tower.base.dim()));
    ConvergenceReport report;
    report.k = k;
    for (const auto& level : tower.levels) {
        report.degrees.push_back(level.degree);
        report.betti.push_back(betti_number(level.complex, k));
        report.normalized.emplace_back(report.betti.back(), level.degree);
    }
    const std::size_t n = report.normalized.size();
    if (n == 0) throw ValidationError("tower has no levels");
    if (n == 1) {
        report.fitted_limit = report.normalized[0];
    } else {
        long db = report.betti[n - 1] - report.betti[n - 2];
        long dd = report.degrees[n - 1] - report.degrees[n - 2];
        report.fitted_limit = dd != 0 ? Rational(db, dd) : report.normalized[n - 1];
    }
    for (const auto& v : report.normalized) {
        Rational d = v - report.fitted_limit;
        report.deviations.push_back(d < Rational(0) ? -d : d);
    }
    report.converging = true;
    for (std::size_t i = 1; i < n; ++i)
        if (report.deviations[i] > report.deviations[i - 1]) report.converging = false;
    return report;
}

PlateauEstimate l2_betti_plateau(const HeatTraceSeries& series,
                                 const std::vector<Rational>& normalized_betti) {
    if (series.levels.size() < 2)
        throw ValidationError("plateau estimate needs at least 2 tower levels");
    if (series.levels.size() != normalized_betti.size())
        throw ValidationError("normalized Betti values don't match the series levels");
    if (series.t_grid.empty()) throw GridTooCoarse("empty t grid");

    PlateauEstimate est;
    est.domination_ok = true;
    for (std::size_t li = 0; li < series.levels.size(); ++li) {
        const auto& level = series.levels[li];
        double bk = to_double(normalized_betti[li]);
        for (std::size_t i = 0; i < series.t_grid.size(); ++i) {
            double slack = 1e-10 + 3 * level.std_errors[i] + level.bias_bound;
            double violation = bk - level.values[i] - slack;
            if (violation > 0) {
                est.domination_ok = false;
                est.max_domination_violation = std::max(est.max_domination_violation, violation);
            }
        }
    }

    const auto& last = series.levels.back();
    const auto& prev = series.levels[series.levels.size() - 2];
    for (std::size_t i = series.t_grid.size(); i-- > 0;) {
        double a = last.values[i], b = prev.values[i];
        double tol = 1e-2 * (1.0 + std::abs(a)) + 3 * (last.std_errors[i] + prev.std_errors[i]) +
                     last.bias_bound + prev.bias_bound;
        if (std::abs(a - b) < tol) {
            est.value = a;
            est.t_star = series.t_grid[i];
            est.tolerance = tol;
            return est;
        }
    }
    throw GridTooCoarse("no grid t where the last two levels agree within tolerance");
}

PlateauEstimate l2_betti_plateau(const CoverTower& tower, int k,
                                 const std::vector<double>& t_grid, int probes,
                                 std::uint64_t seed) {
    HeatTraceSeries series = heat_trace_series(tower, k, t_grid, probes, seed);
    std::vector<Rational> nb;
    for (const auto& level : tower.levels)
        nb.emplace_back(betti_number(level.complex, k), level.degree);
    return l2_betti_plateau(series, nb);
}

}  // namespace llb
