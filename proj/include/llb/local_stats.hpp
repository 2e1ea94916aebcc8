#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "llb/rational.hpp"
#include "llb/simplicial.hpp"

namespace llb {

// Simple undirected graph on vertices 0..n-1 with sorted adjacency lists.
struct Graph {
    long n = 0;
    std::vector<std::vector<long>> adj;

    long degree(long v) const { return static_cast<long>(adj[static_cast<std::size_t>(v)].size()); }
};

// Builds a simple graph from an edge list; rejects self-loops, duplicate
// edges, and endpoints outside [0, n).
Graph graph_from_edges(long n, const std::vector<std::pair<long, long>>& edges);

// 1-skeleton of a simplicial complex; vertex labels are compressed to
// 0..n-1 in increasing label order.
Graph skeleton_graph(const SimplicialComplex& K);

Graph cycle_graph(long n);
Graph path_graph(long n);
Graph star_graph(long leaves);
Graph petersen_graph();

// Induced subgraph on the vertices at distance <= r from root, re-indexed
// with the root first (BFS order). `root` of the result is always 0.
struct RootedBall {
    Graph g;
    long root = 0;
};
RootedBall rooted_ball(const Graph& G, long root, long r);

// Canonical form of a rooted graph: equal strings iff the rooted graphs are
// isomorphic by a root-preserving isomorphism.
std::string canonical_rooted_code(const Graph& g, long root);

// Census of rooted r-balls over all vertices: exact rational frequency of
// each isomorphism class, keyed by canonical code.
struct BallStatistics {
    long r = 0;
    long sample_size = 0;
    std::vector<std::pair<std::string, Rational>> histogram;  // sorted by code
};
BallStatistics ball_census(const Graph& G, long r);

// Total-variation distance between two ball censuses at the same radius.
Rational tv_distance(const BallStatistics& a, const BallStatistics& b);

// Per-vertex injectivity radius: half the length of the shortest cycle
// through the vertex, or nullopt if no cycle passes through it.
std::vector<std::optional<Rational>> injectivity_radius_profile(const Graph& G);

// Fraction of vertices whose injectivity radius is < r (acyclic vertices
// count as thick).
Rational thin_part_fraction(const Graph& G, const Rational& r);

}  // namespace llb
