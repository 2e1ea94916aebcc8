#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "llb/exact_rank.hpp"

namespace {

using llb::SparseIntMatrix;
using BigInt = boost::multiprecision::cpp_int;
using DenseBig = std::vector<std::vector<BigInt>>;

SparseIntMatrix sparse_from(const std::vector<std::vector<std::int64_t>>& rows, int cols) {
    SparseIntMatrix A(static_cast<int>(rows.size()), cols);
    std::vector<Eigen::Triplet<std::int64_t>> trips;
    for (int i = 0; i < static_cast<int>(rows.size()); ++i)
        for (int j = 0; j < cols; ++j)
            if (rows[i][j] != 0) trips.emplace_back(i, j, rows[i][j]);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

// Independent oracle: dense fraction-free Gaussian elimination over arbitrary
// precision integers. No pivoting tricks, no sparsity: just Bareiss.
long bareiss_rank(const std::vector<std::vector<std::int64_t>>& rows, int cols) {
    DenseBig a(rows.size(), std::vector<BigInt>(cols));
    for (size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < cols; ++j) a[i][j] = rows[i][j];
    const int m = static_cast<int>(rows.size());
    int rank = 0;
    BigInt prev = 1;
    for (int col = 0; col < cols && rank < m; ++col) {
        int piv = -1;
        for (int r = rank; r < m; ++r)
            if (a[r][col] != 0) { piv = r; break; }
        if (piv < 0) continue;
        std::swap(a[rank], a[piv]);
        for (int r = rank + 1; r < m; ++r) {
            for (int c = col + 1; c < cols; ++c)
                a[r][c] = (a[rank][col] * a[r][c] - a[r][col] * a[rank][c]) / prev;
            a[r][col] = 0;
        }
        prev = a[rank][col];
        ++rank;
    }
    return rank;
}

BigInt big_det(DenseBig a) {
    const int n = static_cast<int>(a.size());
    BigInt prev = 1;
    int sign = 1;
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (a[r][col] != 0) { piv = r; break; }
        if (piv < 0) return 0;
        if (piv != col) { std::swap(a[col], a[piv]); sign = -sign; }
        for (int r = col + 1; r < n; ++r) {
            for (int c = col + 1; c < n; ++c)
                a[r][c] = (a[col][col] * a[r][c] - a[r][col] * a[col][c]) / prev;
            a[r][col] = 0;
        }
        prev = a[col][col];
    }
    return sign > 0 ? a[n - 1][n - 1] : -a[n - 1][n - 1];
}

// gcd of all k x k minors (0 when all vanish); oracle for Smith invariants:
// d_1 * ... * d_k = gcd of k x k minors.
BigInt minor_gcd(const std::vector<std::vector<std::int64_t>>& rows, int cols, int k) {
    const int m = static_cast<int>(rows.size());
    std::vector<int> ri(k), ci(k);
    BigInt g = 0;
    std::function<void(int, int)> pick_cols = [&](int idx, int start) {
        if (idx == k) {
            DenseBig sub(k, std::vector<BigInt>(k));
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) sub[i][j] = rows[ri[i]][ci[j]];
            BigInt d = big_det(sub);
            if (d < 0) d = -d;
            g = boost::multiprecision::gcd(g, d);
            return;
        }
        for (int c = start; c < cols; ++c) { ci[idx] = c; pick_cols(idx + 1, c + 1); }
    };
    std::function<void(int, int)> pick_rows = [&](int idx, int start) {
        if (idx == k) { pick_cols(0, 0); return; }
        for (int r = start; r < m; ++r) { ri[idx] = r; pick_rows(idx + 1, r + 1); }
    };
    pick_rows(0, 0);
    return g;
}

std::vector<std::vector<std::int64_t>> random_rows(std::mt19937_64& rng, int m, int n, int lo,
                                                   int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    std::vector<std::vector<std::int64_t>> rows(m, std::vector<std::int64_t>(n));
    for (auto& r : rows)
        for (auto& x : r) x = d(rng);
    return rows;
}

}  // namespace

TEST_CASE("rank of fixed matrices matches linear algebra facts") {
    // identity
    std::vector<std::vector<std::int64_t>> id5(5, std::vector<std::int64_t>(5, 0));
    for (int i = 0; i < 5; ++i) id5[i][i] = 1;
    CHECK(llb::rank_exact(sparse_from(id5, 5)) == 5);

    // zero
    std::vector<std::vector<std::int64_t>> z(4, std::vector<std::int64_t>(6, 0));
    CHECK(llb::rank_exact(sparse_from(z, 6)) == 0);

    // rank-1 outer product
    std::vector<std::int64_t> u = {1, -2, 3, 0, 5, 7};
    std::vector<std::int64_t> v = {2, 0, -1, 4, 1};
    std::vector<std::vector<std::int64_t>> outer(6, std::vector<std::int64_t>(5));
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 5; ++j) outer[i][j] = u[i] * v[j];
    CHECK(llb::rank_exact(sparse_from(outer, 5)) == 1);
    CHECK(llb::rank_fraction_free(sparse_from(outer, 5)) == 1);

    // Vandermonde on distinct nodes is invertible
    std::vector<std::vector<std::int64_t>> vand(6, std::vector<std::int64_t>(6));
    for (int i = 0; i < 6; ++i) {
        std::int64_t p = 1;
        for (int j = 0; j < 6; ++j) { vand[i][j] = p; p *= (i + 1); }
    }
    CHECK(llb::rank_exact(sparse_from(vand, 6)) == 6);
}

TEST_CASE("rank agrees with an independent big-integer Bareiss oracle on random matrices") {
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<int> dim(1, 12);
    for (int trial = 0; trial < 60; ++trial) {
        const int m = dim(rng), n = dim(rng);
        auto rows = random_rows(rng, m, n, -5, 5);
        // bias toward rank deficiency: sometimes overwrite a row with a sum of others
        if (trial % 3 == 0 && m >= 2) {
            for (int j = 0; j < n; ++j) rows[m - 1][j] = rows[0][j] + (m > 2 ? rows[1][j] : 0);
        }
        const long expect = bareiss_rank(rows, n);
        auto A = sparse_from(rows, n);
        CAPTURE(trial);
        CHECK(llb::rank_exact(A) == expect);
        CHECK(llb::rank_fraction_free(A) == expect);
    }
}

TEST_CASE("rank survives huge entries that overflow 64-bit intermediates") {
    std::mt19937_64 rng(777);
    auto rows = random_rows(rng, 8, 8, -1000000000, 1000000000);
    const long expect = bareiss_rank(rows, 8);
    CHECK(llb::rank_exact(sparse_from(rows, 8)) == expect);
}

TEST_CASE("rank mod p can drop below the rational rank") {
    std::vector<std::vector<std::int64_t>> two_i = {{2, 0, 0}, {0, 2, 0}, {0, 0, 2}};
    auto A = sparse_from(two_i, 3);
    CHECK(llb::rank_exact(A) == 3);
    CHECK(llb::rank_mod_p(A, 2) == 0);
    CHECK(llb::rank_mod_p(A, 3) == 3);

    std::vector<std::vector<std::int64_t>> m = {{1, 2}, {3, 4}};
    CHECK(llb::rank_exact(sparse_from(m, 2)) == 2);
    CHECK(llb::rank_mod_p(sparse_from(m, 2), 2) == 1);
}

TEST_CASE("integer kernel basis spans the nullspace with primitive vectors") {
    std::mt19937_64 rng(424242);
    for (int trial = 0; trial < 30; ++trial) {
        const int m = 1 + static_cast<int>(rng() % 6);
        const int n = 2 + static_cast<int>(rng() % 7);
        auto rows = random_rows(rng, m, n, -4, 4);
        auto A = sparse_from(rows, n);
        const long r = llb::rank_exact(A);
        auto basis = llb::integer_kernel_basis(A);
        CHECK(static_cast<long>(basis.size()) == n - r);
        for (const auto& v : basis) {
            REQUIRE(static_cast<int>(v.size()) == n);
            // A v = 0 exactly
            for (int i = 0; i < m; ++i) {
                BigInt dot = 0;
                for (int j = 0; j < n; ++j) dot += BigInt(rows[i][j]) * v[j];
                CHECK(dot == 0);
            }
            // primitive: gcd of entries is 1
            std::int64_t g = 0;
            for (auto x : v) g = std::gcd(g, x < 0 ? -x : x);
            CHECK(g == 1);
        }
    }
}

TEST_CASE("Smith normal form invariant factors match the minor-gcd oracle") {
    auto check_against_oracle = [](const std::vector<std::vector<std::int64_t>>& rows, int cols) {
        auto snf = llb::smith_normal_form(rows, cols);
        REQUIRE(static_cast<int>(snf.diag.size()) == cols);
        // nonzero invariant factors first, each dividing the next, zeros trailing
        bool seen_zero = false;
        for (size_t i = 0; i < snf.diag.size(); ++i) {
            if (snf.diag[i] == 0) { seen_zero = true; continue; }
            CHECK(!seen_zero);
            CHECK(snf.diag[i] > 0);
            if (i > 0 && snf.diag[i - 1] != 0) CHECK(snf.diag[i] % snf.diag[i - 1] == 0);
        }
        // d_1 ... d_k == gcd of k x k minors
        BigInt prod = 1;
        for (int k = 1; k <= cols && k <= static_cast<int>(rows.size()); ++k) {
            if (snf.diag[k - 1] == 0) {
                CHECK(minor_gcd(rows, cols, k) == 0);
                break;
            }
            prod *= snf.diag[k - 1];
            CHECK(minor_gcd(rows, cols, k) == prod);
        }
        // V is unimodular
        DenseBig vmat(cols, std::vector<BigInt>(cols));
        for (int i = 0; i < cols; ++i)
            for (int j = 0; j < cols; ++j) vmat[i][j] = snf.V[i][j];
        BigInt dv = big_det(vmat);
        CHECK((dv == 1 || dv == -1));
    };

    check_against_oracle({{2, 0}, {0, 3}}, 2);   // invariant factors 1, 6
    check_against_oracle({{2, 4}, {6, 8}}, 2);   // invariant factors 2, 4
    check_against_oracle({{1, 0}}, 2);           // one relation on two generators
    check_against_oracle({{6, 10, 15}}, 3);

    auto snf = llb::smith_normal_form({{2, 0}, {0, 3}}, 2);
    CHECK(snf.diag == std::vector<std::int64_t>{1, 6});
    auto snf2 = llb::smith_normal_form({{2, 4}, {6, 8}}, 2);
    CHECK(snf2.diag == std::vector<std::int64_t>{2, 4});
    auto snf3 = llb::smith_normal_form({{1, 0}}, 2);
    CHECK(snf3.diag == std::vector<std::int64_t>{1, 0});

    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 12; ++trial) {
        const int m = 1 + static_cast<int>(rng() % 3);
        const int n = 1 + static_cast<int>(rng() % 3);
        check_against_oracle(random_rows(rng, m, n, -4, 4), n);
    }
}
