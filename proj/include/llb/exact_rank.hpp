#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <vector>

namespace llb {

using SparseIntMatrix = Eigen::SparseMatrix<std::int64_t>;

// Rank over F_p for an odd prime p < 2^31, by sparse Gaussian elimination with
// Markowitz pivoting. Always a lower bound for the rank over Q.
long rank_mod_p(const SparseIntMatrix& A, std::uint64_t p);

// Rank over Q. Runs the modular prepass over a few fixed word-size primes to
// get a certified lower bound; if that bound already equals min(rows, cols)
// the rank is decided. Otherwise runs sparse fraction-free (Bareiss)
// elimination over the integers, escalating from int64 to arbitrary-precision
// arithmetic if an intermediate minor overflows. The two routes are
// cross-checked: elimination below the modular bound is an internal error.
long rank_exact(const SparseIntMatrix& A);

// Fraction-free elimination rank only (no prepass); exposed for tests.
long rank_fraction_free(const SparseIntMatrix& A);

// Exact rational kernel basis of A (column vectors x with A x = 0), returned
// as primitive integer vectors. Dense elimination; meant for small systems
// (cocycle solves), not for the big boundary matrices.
std::vector<std::vector<std::int64_t>> integer_kernel_basis(const SparseIntMatrix& A);

// Smith normal form of a small dense integer matrix R (m x n):
// U R V = D with U, V unimodular. Returns the diagonal of D (length n; zero
// entries mean free factors) and V, which carries generator images for
// abelian-quotient constructions: the class of e_k in Z^n / rowspace(R) has
// coordinates row k of V in the factor decomposition +/- Z/d_j.
struct SmithForm {
    std::vector<std::int64_t> diag;                // length = cols
    std::vector<std::vector<std::int64_t>> V;      // cols x cols
};
SmithForm smith_normal_form(const std::vector<std::vector<std::int64_t>>& R, int cols);

}  // namespace llb
