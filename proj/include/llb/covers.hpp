#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "llb/simplicial.hpp"

namespace llb {

// Presentation of the fundamental group of a connected complex, read off a
// BFS spanning tree of the 1-skeleton: one free generator per non-tree edge
// (oriented low-to-high vertex), one relator per 2-cell. Relator words are
// signed 1-based generator indices; tree edges contribute no letters.
struct Presentation {
    std::vector<int> vertices;                        // sorted vertex labels
    std::vector<std::pair<int, int>> tree_edges;      // (u, v) with u < v
    std::vector<std::pair<int, int>> generator_edges; // (u, v) with u < v
    std::vector<std::vector<int>> relators;
};

Presentation spanning_tree_generators(const SimplicialComplex& K);

// A finite-index subgroup given by the monodromy action on sheets {0..degree-1}.
struct PermutationRep {
    long degree = 1;
    std::vector<std::vector<int>> generators;  // generators[g][s] = image sheet
};

// Checks shape (one permutation per presentation generator, each a bijection
// of the sheets) and that every relator acts as the identity.
void validate_rep(const Presentation& P, const PermutationRep& rep);

int apply_word(const PermutationRep& rep, const std::vector<int>& word, int sheet);
bool rep_transitive(const PermutationRep& rep);

// Whether the associated cover is regular (the subgroup is normal): the
// monodromy group acts freely, checked via Schreier transversal consistency.
// Requires a transitive rep.
bool rep_regular(const PermutationRep& rep);

// Whether the subgroup of `finer` is contained in the subgroup of `coarser`:
// looks for an equivariant map of sheet sets sending 0 to 0.
bool rep_factors_through(const PermutationRep& finer, const PermutationRep& coarser);

// The degree-n cover determined by the rep. Cover vertex labels encode the
// fiber: base vertex with index i (in P.vertices order) and sheet s becomes
// label i*degree + s, which is the covering projection.
SimplicialComplex cover_from_permutations(const SimplicialComplex& K, const Presentation& P,
                                          const PermutationRep& rep);

struct CoverLevel {
    PermutationRep rep;
    SimplicialComplex complex;
    long degree = 1;
    bool is_normal = false;
    bool is_connected = false;
};

struct CoverTower {
    SimplicialComplex base;
    Presentation presentation;
    std::string family;
    bool is_chain = false;  // levels are nested subgroups by construction
    std::vector<CoverLevel> levels;
};

// Towers from abelian quotient families:
//   "mod-p":  kernels of pi_1 -> H_1 tensor Z/p^i, i = 1..depth
//   "cyclic": kernels of pi_1 -> Z/p^i through a free H_1 coordinate
// Levels are nested and normal. Truncates once the degree stops growing.
CoverTower normal_chain_tower(const SimplicialComplex& K, const std::string& family, long p,
                              int depth);

// Covers of degree n = 1..depth pulled back from index-n subgroups of F_2
// (x -> n-cycle, y -> transposition) through a surjection pi_1 -> F_2 found
// from a pair of integral 1-cocycles with relator-disjoint supports.
CoverTower free_subgroup_chain_tower(const SimplicialComplex& K, int depth);

// Relator abelianization: rows = relators, cols = generators, net exponents.
std::vector<std::vector<std::int64_t>> relator_exponent_matrix(const Presentation& P);

// Exponent pairs (a_g, b_g) of the F_2 surjection g -> x^{a_g} y^{b_g}; at
// most one of a_g, b_g is nonzero. Throws NoFreeQuotient when no such
// surjection is found.
std::vector<std::pair<std::int64_t, std::int64_t>> f2_quotient_exponents(const Presentation& P);

}  // namespace llb
