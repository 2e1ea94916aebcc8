#include "llb/exact_rank.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <limits>
#include <map>
#include <numeric>

#include "llb/errors.hpp"
#include "llb/parallel.hpp"
#include "llb/rational.hpp"

namespace llb {

namespace {

using boost::multiprecision::cpp_int;

// Thrown inside the int64 elimination when an intermediate minor leaves the
// 64-bit range; the caller retries with cpp_int.
struct Int64Overflow {};

struct CheckedInt64 {
    using value_type = std::int64_t;
    // (a*b - c*d) / denom; the division is exact by the Bareiss identity.
    static value_type mul_sub_div(value_type a, value_type b, value_type c, value_type d,
                                  value_type denom) {
        __int128 num = static_cast<__int128>(a) * b - static_cast<__int128>(c) * d;
        __int128 q = num / denom;
        if (q > std::numeric_limits<std::int64_t>::max() ||
            q < std::numeric_limits<std::int64_t>::min())
            throw Int64Overflow{};
        return static_cast<value_type>(q);
    }
};

struct BigInt {
    using value_type = cpp_int;
    static value_type mul_sub_div(const value_type& a, const value_type& b, const value_type& c,
                                  const value_type& d, const value_type& denom) {
        return (a * b - c * d) / denom;
    }
};

// Pick a pivot by Markowitz count: scan columns in order of increasing fill,
// look at a bounded number of candidate columns, take the entry minimizing
// (row_nnz-1)*(col_nnz-1). Returns {row, col} or {-1, -1} when the active
// submatrix is empty. `live` filters entries to active rows.
template <class ColMap>
std::pair<int, int> markowitz_pivot(const std::vector<ColMap>& cols,
                                    const std::vector<int>& row_nnz,
                                    const std::vector<int>& col_nnz,
                                    const std::vector<bool>& row_done,
                                    const std::vector<bool>& col_done, int nrows) {
    const int ncols = static_cast<int>(cols.size());
    int best_row = -1, best_col = -1;
    long best_score = std::numeric_limits<long>::max();
    int budget = 12;
    for (int target = 1; target <= nrows; ++target) {
        for (int j = 0; j < ncols; ++j) {
            if (col_done[j] || col_nnz[j] != target) continue;
            for (const auto& kv : cols[j]) {
                if (row_done[kv.first]) continue;
                long score = static_cast<long>(row_nnz[kv.first] - 1) * (col_nnz[j] - 1);
                if (score < best_score) {
                    best_score = score;
                    best_row = kv.first;
                    best_col = j;
                }
            }
            if (--budget <= 0) break;
        }
        if (best_col >= 0 && (budget <= 0 || best_score <= static_cast<long>(target) * target))
            break;
    }
    return {best_row, best_col};
}

// Sparse fraction-free Gaussian elimination.
//
// Entries are stored lazily: each value carries the step at which it was last
// materialized, and the true Bareiss value at step k is stored * p_k / p_stamp
// (an exact integer division; both sides are minors of the input). This keeps
// per-step work proportional to the touched rows and columns instead of the
// whole active submatrix.
template <class Ring>
long sparse_bareiss_rank(const SparseIntMatrix& A) {
    using T = typename Ring::value_type;
    const int nrows = static_cast<int>(A.rows());
    const int ncols = static_cast<int>(A.cols());
    if (nrows == 0 || ncols == 0 || A.nonZeros() == 0) return 0;

    struct Entry {
        T value;
        int stamp;
    };
    std::vector<std::map<int, Entry>> cols(ncols);
    std::vector<int> row_nnz(nrows, 0), col_nnz(ncols, 0);
    for (int j = 0; j < ncols; ++j)
        for (SparseIntMatrix::InnerIterator it(A, j); it; ++it) {
            if (it.value() == 0) continue;
            cols[j].emplace(static_cast<int>(it.row()), Entry{T(it.value()), 0});
            ++row_nnz[it.row()];
            ++col_nnz[j];
        }

    std::vector<bool> row_done(nrows, false), col_done(ncols, false);
    std::vector<T> pivots;  // pivots[k] = p_{k+1}; p_0 = 1
    pivots.reserve(std::min(nrows, ncols));
    const T one(1);
    auto pivot_at = [&](int stamp) -> const T& { return stamp == 0 ? one : pivots[stamp - 1]; };
    auto normalize = [&](Entry& e, int step) {
        if (e.stamp == step) return;
        e.value = Ring::mul_sub_div(e.value, pivot_at(step), T(0), T(0), pivot_at(e.stamp));
        e.stamp = step;
    };

    long rank = 0;
    for (int step = 0;; ++step) {
        auto [pr, pc] = markowitz_pivot(cols, row_nnz, col_nnz, row_done, col_done, nrows);
        if (pc < 0) break;

        Entry& pe = cols[pc].at(pr);
        normalize(pe, step);
        T pivot_val = pe.value;
        pivots.push_back(pivot_val);
        ++rank;

        std::vector<std::pair<int, T>> row_entries;  // pivot row, other columns
        for (int j = 0; j < ncols; ++j) {
            if (col_done[j] || j == pc) continue;
            auto it = cols[j].find(pr);
            if (it == cols[j].end()) continue;
            normalize(it->second, step);
            if (it->second.value == 0) {
                cols[j].erase(it);
                --col_nnz[j];
                --row_nnz[pr];
            } else {
                row_entries.emplace_back(j, it->second.value);
            }
        }
        std::vector<std::pair<int, T>> col_entries;  // pivot column, other rows
        for (auto& [i, e] : cols[pc]) {
            if (i == pr || row_done[i]) continue;
            normalize(e, step);
            if (e.value != 0) col_entries.emplace_back(i, e.value);
        }

        for (auto& [j, arj] : row_entries) {
            auto& colj = cols[j];
            for (auto& [i, aic] : col_entries) {
                auto it = colj.find(i);
                if (it == colj.end()) {
                    T nv = Ring::mul_sub_div(T(0), T(0), aic, arj, pivot_at(step));
                    if (nv != 0) {
                        colj.emplace(i, Entry{std::move(nv), step + 1});
                        ++col_nnz[j];
                        ++row_nnz[i];
                    }
                } else {
                    normalize(it->second, step);
                    T nv = Ring::mul_sub_div(pivot_val, it->second.value, aic, arj, pivot_at(step));
                    if (nv == 0) {
                        colj.erase(it);
                        --col_nnz[j];
                        --row_nnz[i];
                    } else {
                        it->second.value = std::move(nv);
                        it->second.stamp = step + 1;
                    }
                }
            }
        }

        row_done[pr] = true;
        col_done[pc] = true;
        for (auto& [j, arj] : row_entries) {
            cols[j].erase(pr);
            --col_nnz[j];
            --row_nnz[pr];
        }
        for (auto& [i, e] : cols[pc])
            if (!row_done[i]) --row_nnz[i];
        cols[pc].clear();
        col_nnz[pc] = 0;
        if (rank == std::min(nrows, ncols)) break;
    }
    return rank;
}

std::uint64_t mod_pow(std::uint64_t b, std::uint64_t e, std::uint64_t p) {
    std::uint64_t r = 1;
    b %= p;
    while (e) {
        if (e & 1) r = r * b % p;
        b = b * b % p;
        e >>= 1;
    }
    return r;
}

}  // namespace

long rank_mod_p(const SparseIntMatrix& A, std::uint64_t p) {
    const int nrows = static_cast<int>(A.rows());
    const int ncols = static_cast<int>(A.cols());
    if (nrows == 0 || ncols == 0 || A.nonZeros() == 0) return 0;

    std::vector<std::map<int, std::uint64_t>> cols(ncols);
    std::vector<int> row_nnz(nrows, 0), col_nnz(ncols, 0);
    for (int j = 0; j < ncols; ++j)
        for (SparseIntMatrix::InnerIterator it(A, j); it; ++it) {
            std::int64_t v = it.value() % static_cast<std::int64_t>(p);
            if (v < 0) v += p;
            if (v == 0) continue;
            cols[j].emplace(static_cast<int>(it.row()), static_cast<std::uint64_t>(v));
            ++row_nnz[it.row()];
            ++col_nnz[j];
        }

    std::vector<bool> row_done(nrows, false), col_done(ncols, false);
    long rank = 0;
    for (;;) {
        auto [pr, pc] = markowitz_pivot(cols, row_nnz, col_nnz, row_done, col_done, nrows);
        if (pc < 0) break;

        std::uint64_t pivot = cols[pc].at(pr);
        std::uint64_t pinv = mod_pow(pivot, p - 2, p);
        ++rank;

        std::vector<std::pair<int, std::uint64_t>> row_entries;
        for (int j = 0; j < ncols; ++j) {
            if (col_done[j] || j == pc) continue;
            auto it = cols[j].find(pr);
            if (it != cols[j].end()) row_entries.emplace_back(j, it->second * pinv % p);
        }
        std::vector<std::pair<int, std::uint64_t>> col_entries;
        for (auto& [i, v] : cols[pc])
            if (i != pr && !row_done[i]) col_entries.emplace_back(i, v);

        for (auto& [j, factor] : row_entries) {
            auto& colj = cols[j];
            for (auto& [i, aic] : col_entries) {
                std::uint64_t sub = aic * factor % p;
                auto it = colj.find(i);
                if (it == colj.end()) {
                    std::uint64_t nv = (p - sub) % p;
                    if (nv) {
                        colj.emplace(i, nv);
                        ++col_nnz[j];
                        ++row_nnz[i];
                    }
                } else {
                    std::uint64_t nv = (it->second + p - sub) % p;
                    if (nv == 0) {
                        colj.erase(it);
                        --col_nnz[j];
                        --row_nnz[i];
                    } else {
                        it->second = nv;
                    }
                }
            }
        }

        row_done[pr] = true;
        col_done[pc] = true;
        for (auto& [j, f] : row_entries) {
            cols[j].erase(pr);
            --col_nnz[j];
            --row_nnz[pr];
        }
        for (auto& [i, v] : cols[pc])
            if (!row_done[i]) --row_nnz[i];
        cols[pc].clear();
        col_nnz[pc] = 0;
        if (rank == std::min(nrows, ncols)) break;
    }
    return rank;
}

long rank_fraction_free(const SparseIntMatrix& A) {
    try {
        return sparse_bareiss_rank<CheckedInt64>(A);
    } catch (const Int64Overflow&) {
        return sparse_bareiss_rank<BigInt>(A);
    }
}

long rank_exact(const SparseIntMatrix& A) {
    static const std::uint64_t primes[] = {998244353ULL, 1000000007ULL, 754974721ULL};
    long ranks[3] = {0, 0, 0};
    parallel_for(3, [&](std::size_t i) { ranks[i] = rank_mod_p(A, primes[i]); });
    long lower = std::max({ranks[0], ranks[1], ranks[2]});
    if (lower == std::min(A.rows(), A.cols())) return lower;  // bound already tight

    long r = rank_fraction_free(A);
    if (r < lower)
        throw InternalError("rank certification failed: elimination rank " + std::to_string(r) +
                            " below modular lower bound " + std::to_string(lower));
    return r;
}

std::vector<std::vector<std::int64_t>> integer_kernel_basis(const SparseIntMatrix& A) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    std::vector<std::vector<Rational>> M(m, std::vector<Rational>(n, Rational(0)));
    for (int j = 0; j < n; ++j)
        for (SparseIntMatrix::InnerIterator it(A, j); it; ++it) M[it.row()][j] = Rational(it.value());

    std::vector<int> pivot_col;
    int r = 0;
    for (int c = 0; c < n && r < m; ++c) {
        int pr = -1;
        for (int i = r; i < m; ++i)
            if (M[i][c] != 0) {
                pr = i;
                break;
            }
        if (pr < 0) continue;
        std::swap(M[r], M[pr]);
        Rational pv = M[r][c];
        for (int j = 0; j < n; ++j) M[r][j] /= pv;
        for (int i = 0; i < m; ++i) {
            if (i == r || M[i][c] == 0) continue;
            Rational f = M[i][c];
            for (int j = 0; j < n; ++j) M[i][j] -= f * M[r][j];
        }
        pivot_col.push_back(c);
        ++r;
    }

    std::vector<bool> is_pivot(n, false);
    for (int c : pivot_col) is_pivot[c] = true;
    std::vector<std::vector<std::int64_t>> basis;
    for (int fc = 0; fc < n; ++fc) {
        if (is_pivot[fc]) continue;
        std::vector<Rational> x(n, Rational(0));
        x[fc] = Rational(1);
        for (int i = 0; i < r; ++i) x[pivot_col[i]] = -M[i][fc];
        std::int64_t lcm = 1;
        for (auto& v : x) lcm = std::lcm(lcm, v.denominator());
        std::vector<std::int64_t> iv(n);
        std::int64_t g = 0;
        for (int j = 0; j < n; ++j) {
            iv[j] = x[j].numerator() * (lcm / x[j].denominator());
            g = std::gcd(g, std::llabs(iv[j]));
        }
        if (g > 1)
            for (auto& v : iv) v /= g;
        basis.push_back(std::move(iv));
    }
    return basis;
}

SmithForm smith_normal_form(const std::vector<std::vector<std::int64_t>>& R, int cols) {
    const int m = static_cast<int>(R.size());
    const int n = cols;
    std::vector<std::vector<cpp_int>> D(m, std::vector<cpp_int>(n, 0));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n && j < static_cast<int>(R[i].size()); ++j) D[i][j] = R[i][j];
    std::vector<std::vector<cpp_int>> V(n, std::vector<cpp_int>(n, 0));
    for (int j = 0; j < n; ++j) V[j][j] = 1;

    auto col_op = [&](int a, int b, const cpp_int& f) {  // col_a -= f * col_b
        for (int i = 0; i < m; ++i) D[i][a] -= f * D[i][b];
        for (int i = 0; i < n; ++i) V[i][a] -= f * V[i][b];
    };
    auto col_swap = [&](int a, int b) {
        for (int i = 0; i < m; ++i) std::swap(D[i][a], D[i][b]);
        for (int i = 0; i < n; ++i) std::swap(V[i][a], V[i][b]);
    };
    auto col_neg = [&](int a) {
        for (int i = 0; i < m; ++i) D[i][a] = -D[i][a];
        for (int i = 0; i < n; ++i) V[i][a] = -V[i][a];
    };
    auto row_op = [&](int a, int b, const cpp_int& f) {  // row_a -= f * row_b
        for (int j = 0; j < n; ++j) D[a][j] -= f * D[b][j];
    };

    int t = 0;
    const int steps = std::min(m, n);
    while (t < steps) {
        int pi = -1, pj = -1;
        cpp_int best = 0;
        for (int i = t; i < m; ++i)
            for (int j = t; j < n; ++j) {
                if (D[i][j] == 0) continue;
                cpp_int a = abs(D[i][j]);
                if (pi < 0 || a < best) {
                    best = a;
                    pi = i;
                    pj = j;
                }
            }
        if (pi < 0) break;
        if (pi != t) std::swap(D[pi], D[t]);
        if (pj != t) col_swap(pj, t);
        if (D[t][t] < 0) col_neg(t);

        bool clean = true;
        for (int i = t + 1; i < m; ++i)
            if (D[i][t] != 0) {
                row_op(i, t, D[i][t] / D[t][t]);
                if (D[i][t] != 0) clean = false;
            }
        for (int j = t + 1; j < n; ++j)
            if (D[t][j] != 0) {
                col_op(j, t, D[t][j] / D[t][t]);
                if (D[t][j] != 0) clean = false;
            }
        if (!clean) continue;  // nonzero remainders; retry with the smaller pivot

        bool redo = false;  // enforce d_t | everything else
        for (int i = t + 1; i < m && !redo; ++i)
            for (int j = t + 1; j < n && !redo; ++j)
                if (D[i][j] % D[t][t] != 0) {
                    col_op(t, j, cpp_int(-1));
                    redo = true;
                }
        if (redo) continue;
        ++t;
    }

    SmithForm out;
    auto to_i64 = [](const cpp_int& v) {
        if (v > std::numeric_limits<std::int64_t>::max() ||
            v < std::numeric_limits<std::int64_t>::min())
            throw Error("smith normal form entry exceeds 64 bits");
        return static_cast<std::int64_t>(v);
    };
    out.diag.assign(n, 0);
    for (int j = 0; j < std::min(m, n); ++j) out.diag[j] = to_i64(D[j][j]);
    out.V.assign(n, std::vector<std::int64_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.V[i][j] = to_i64(V[i][j]);
    return out;
}

}  // namespace llb
