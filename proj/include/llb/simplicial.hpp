#pragma once

#include <vector>

#include "llb/exact_rank.hpp"

namespace llb {

// A finite abstract simplicial complex. cells[k] lists the k-cells, each a
// strictly increasing vertex tuple; the tuple order fixes the orientation
// used by boundary_matrix. Vertices are arbitrary nonnegative ints.
struct SimplicialComplex {
    std::vector<std::vector<std::vector<int>>> cells;

    int dim() const { return static_cast<int>(cells.size()) - 1; }
    long num_cells(int k) const {
        return k >= 0 && k <= dim() ? static_cast<long>(cells[k].size()) : 0;
    }
};

// Throws ValidationError (MissingFace / DuplicateCell / NonSimplicial) if the
// cell lists do not describe a simplicial complex closed under taking faces.
void validate_complex(const SimplicialComplex& K);

// Matrix of d_k : C_k -> C_{k-1} in the sorted-tuple bases, with the usual
// alternating signs. k out of range gives an empty matrix of matching shape.
SparseIntMatrix boundary_matrix(const SimplicialComplex& K, int k);

// Rational Betti numbers, computed from exact integer ranks.
long betti_number(const SimplicialComplex& K, int k);
std::vector<long> betti_vector(const SimplicialComplex& K);

// k-th Hodge Laplacian d_k^T d_k + d_{k+1} d_{k+1}^T (integer entries).
SparseIntMatrix hodge_laplacian(const SimplicialComplex& K, int k);

long euler_characteristic(const SimplicialComplex& K);

// Connectivity of the 1-skeleton.
bool is_connected(const SimplicialComplex& K);

// Builders. All return validated complexes.
SimplicialComplex cycle_complex(int n);   // n-gon boundary, n >= 3
SimplicialComplex circle_complex();       // cycle_complex(3)
SimplicialComplex filled_triangle();      // 2-simplex with all faces
SimplicialComplex rose2_complex();        // wedge of two triangle circles at vertex 0
SimplicialComplex torus_complex();        // 7-vertex triangulated torus
SimplicialComplex genus2_complex();       // 11-vertex closed orientable genus-2 surface
SimplicialComplex disjoint_union(const SimplicialComplex& a, const SimplicialComplex& b);

}  // namespace llb
