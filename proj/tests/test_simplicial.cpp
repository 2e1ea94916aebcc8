#include <doctest.h>

#include <Eigen/Dense>
#include <vector>

#include "llb/errors.hpp"
#include "llb/simplicial.hpp"

namespace {

using llb::SimplicialComplex;

Eigen::MatrixXd to_dense(const llb::SparseIntMatrix& A) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    for (int k = 0; k < A.outerSize(); ++k)
        for (llb::SparseIntMatrix::InnerIterator it(A, k); it; ++it)
            B(it.row(), it.col()) = static_cast<double>(it.value());
    return B;
}

// Independent Betti oracle: floating-point row reduction of the boundary
// matrices via Eigen's rank-revealing LU. Entries are +-1, sizes are tiny, so
// the numerical ranks are exact.
std::vector<long> betti_oracle(const SimplicialComplex& K) {
    const int dim = K.dim();
    std::vector<long> ranks(dim + 2, 0);
    for (int k = 1; k <= dim; ++k) {
        Eigen::MatrixXd B = to_dense(llb::boundary_matrix(K, k));
        if (B.size() == 0) continue;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
        lu.setThreshold(1e-8);
        ranks[k] = lu.rank();
    }
    std::vector<long> b(dim + 1);
    for (int k = 0; k <= dim; ++k) b[k] = K.num_cells(k) - ranks[k] - ranks[k + 1];
    return b;
}

long euler_from_cells(const SimplicialComplex& K) {
    long chi = 0;
    for (int k = 0; k <= K.dim(); ++k) chi += (k % 2 == 0 ? 1 : -1) * K.num_cells(k);
    return chi;
}

}  // namespace

TEST_CASE("boundary matrices compose to zero") {
    for (const SimplicialComplex& K :
         {llb::torus_complex(), llb::genus2_complex(), llb::filled_triangle()}) {
        for (int k = 2; k <= K.dim(); ++k) {
            llb::SparseIntMatrix a = llb::boundary_matrix(K, k - 1);
            llb::SparseIntMatrix b = llb::boundary_matrix(K, k);
            llb::SparseIntMatrix prod = (a * b).pruned();
            CHECK(prod.nonZeros() == 0);
        }
    }
}

TEST_CASE("Betti numbers of the standard complexes") {
    CHECK(llb::betti_vector(llb::cycle_complex(3)) == std::vector<long>{1, 1});
    CHECK(llb::betti_vector(llb::cycle_complex(10)) == std::vector<long>{1, 1});
    CHECK(llb::betti_vector(llb::circle_complex()) == std::vector<long>{1, 1});
    CHECK(llb::betti_vector(llb::filled_triangle()) == std::vector<long>{1, 0, 0});
    CHECK(llb::betti_vector(llb::rose2_complex()) == std::vector<long>{1, 2});
    CHECK(llb::betti_vector(llb::torus_complex()) == std::vector<long>{1, 2, 1});
    CHECK(llb::betti_vector(llb::genus2_complex()) == std::vector<long>{1, 4, 1});
}

TEST_CASE("torus and genus-2 cell counts and Euler characteristics") {
    SimplicialComplex T = llb::torus_complex();
    CHECK(T.num_cells(0) == 7);
    CHECK(T.num_cells(1) == 21);
    CHECK(T.num_cells(2) == 14);
    CHECK(euler_from_cells(T) == 0);

    SimplicialComplex G = llb::genus2_complex();
    CHECK(G.num_cells(0) == 11);
    CHECK(G.num_cells(1) == 39);
    CHECK(G.num_cells(2) == 26);
    CHECK(euler_from_cells(G) == -2);
    CHECK(llb::euler_characteristic(G) == -2);
}

TEST_CASE("Betti numbers match the independent floating-point rank oracle") {
    for (const SimplicialComplex& K :
         {llb::cycle_complex(5), llb::filled_triangle(), llb::rose2_complex(),
          llb::torus_complex(), llb::genus2_complex(),
          llb::disjoint_union(llb::cycle_complex(3), llb::torus_complex())}) {
        CHECK(llb::betti_vector(K) == betti_oracle(K));
    }
}

TEST_CASE("Euler-Poincare: alternating cell counts equal alternating Betti sums") {
    for (const SimplicialComplex& K :
         {llb::cycle_complex(4), llb::filled_triangle(), llb::rose2_complex(),
          llb::torus_complex(), llb::genus2_complex()}) {
        auto b = llb::betti_vector(K);
        long alt = 0;
        for (size_t k = 0; k < b.size(); ++k) alt += (k % 2 == 0 ? 1 : -1) * b[k];
        CHECK(alt == euler_from_cells(K));
        CHECK(llb::euler_characteristic(K) == alt);
    }
}

TEST_CASE("Hodge Laplacians are symmetric, PSD, with kernel dimension = Betti number") {
    for (const SimplicialComplex& K : {llb::torus_complex(), llb::genus2_complex()}) {
        auto b = llb::betti_vector(K);
        for (int k = 0; k <= K.dim(); ++k) {
            Eigen::MatrixXd L = to_dense(llb::hodge_laplacian(K, k));
            CHECK((L - L.transpose()).cwiseAbs().maxCoeff() == 0.0);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
            CHECK(es.eigenvalues()(0) >= -1e-9);
            long zeros = 0;
            for (int i = 0; i < es.eigenvalues().size(); ++i)
                if (es.eigenvalues()(i) < 1e-8) ++zeros;
            CHECK(zeros == b[k]);
        }
    }
}

TEST_CASE("laplacian of the 3-cycle has the known spectrum") {
    Eigen::MatrixXd L = to_dense(llb::hodge_laplacian(llb::cycle_complex(3), 0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues()(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(es.eigenvalues()(1) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(es.eigenvalues()(2) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("validation rejects malformed complexes") {
    SimplicialComplex missing_face;
    missing_face.cells = {{{0}, {1}}, {{0, 2}}};  // edge uses a vertex that is not listed
    CHECK_THROWS_AS(llb::validate_complex(missing_face), llb::MissingFace);

    SimplicialComplex missing_edge;
    missing_edge.cells = {{{0}, {1}, {2}}, {{0, 1}, {1, 2}}, {{0, 1, 2}}};
    CHECK_THROWS_AS(llb::validate_complex(missing_edge), llb::MissingFace);

    SimplicialComplex dup;
    dup.cells = {{{0}, {1}}, {{0, 1}, {0, 1}}};
    CHECK_THROWS_AS(llb::validate_complex(dup), llb::DuplicateCell);

    SimplicialComplex degen;
    degen.cells = {{{0}}, {{0, 0}}};
    CHECK_THROWS_AS(llb::validate_complex(degen), llb::NonSimplicial);

    SimplicialComplex neg;
    neg.cells = {{{-1}}};
    CHECK_THROWS_AS(llb::validate_complex(neg), llb::NonSimplicial);
}

TEST_CASE("disjoint union and connectivity") {
    SimplicialComplex two = llb::disjoint_union(llb::cycle_complex(3), llb::cycle_complex(4));
    CHECK(llb::betti_number(two, 0) == 2);
    CHECK(llb::betti_number(two, 1) == 2);
    CHECK_FALSE(llb::is_connected(two));
    CHECK(llb::is_connected(llb::cycle_complex(3)));
    CHECK(llb::is_connected(llb::genus2_complex()));
}

TEST_CASE("out-of-range boundary matrices are empty with compatible shapes") {
    SimplicialComplex K = llb::cycle_complex(3);
    llb::SparseIntMatrix b2 = llb::boundary_matrix(K, 2);
    CHECK(b2.rows() == K.num_cells(1));
    CHECK(b2.cols() == 0);
}
