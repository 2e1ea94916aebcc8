#include "llb/local_stats.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <set>

#include "llb/errors.hpp"

namespace llb {

namespace {

std::string pair_str(long u, long v) {
    return "(" + std::to_string(u) + "," + std::to_string(v) + ")";
}

// Distance from every vertex to `root`; -1 for unreachable vertices.
std::vector<long> bfs_distances(const Graph& G, long root) {
    std::vector<long> dist(static_cast<std::size_t>(G.n), -1);
    std::deque<long> queue{root};
    dist[static_cast<std::size_t>(root)] = 0;
    while (!queue.empty()) {
        const long v = queue.front();
        queue.pop_front();
        for (long u : G.adj[static_cast<std::size_t>(v)]) {
            if (dist[static_cast<std::size_t>(u)] < 0) {
                dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
                queue.push_back(u);
            }
        }
    }
    return dist;
}

// Weisfeiler-Leman color refinement seeded with the given canonical initial
// colors. Returned colors are ranks (0-based, contiguous) that depend only on
// the isomorphism type of (graph, initial coloring).
std::vector<long> refine_colors(const Graph& G, std::vector<long> color) {
    const auto n = static_cast<std::size_t>(G.n);
    long num_colors = 0;
    {
        std::set<long> distinct(color.begin(), color.end());
        num_colors = static_cast<long>(distinct.size());
    }
    for (long round = 0; round <= G.n; ++round) {
        std::vector<std::pair<std::vector<long>, long>> keyed(n);
        for (std::size_t v = 0; v < n; ++v) {
            std::vector<long> key{color[v]};
            for (long u : G.adj[v]) key.push_back(color[static_cast<std::size_t>(u)]);
            std::sort(key.begin() + 1, key.end());
            keyed[v] = {std::move(key), static_cast<long>(v)};
        }
        std::sort(keyed.begin(), keyed.end());
        std::vector<long> next(n);
        long id = -1;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == 0 || keyed[i].first != keyed[i - 1].first) ++id;
            next[static_cast<std::size_t>(keyed[i].second)] = id;
        }
        if (id + 1 == num_colors) return next;
        num_colors = id + 1;
        color = std::move(next);
    }
    return color;
}

// Minimal-adjacency-code search over all vertex orderings that respect the
// canonical ordered partition given by the refined colors. The minimum is a
// complete rooted-isomorphism invariant.
class CodeSearch {
  public:
    CodeSearch(const Graph& g, const std::vector<long>& color) : g_(g), n_(g.n) {
        words_ = static_cast<long>((n_ + 63) / 64);
        const long num_colors = *std::max_element(color.begin(), color.end()) + 1;
        classes_.resize(static_cast<std::size_t>(num_colors));
        for (long v = 0; v < n_; ++v) classes_[static_cast<std::size_t>(color[static_cast<std::size_t>(v)])].push_back(v);
        class_of_pos_.reserve(static_cast<std::size_t>(n_));
        for (std::size_t c = 0; c < classes_.size(); ++c)
            for (std::size_t i = 0; i < classes_[c].size(); ++i) class_of_pos_.push_back(static_cast<long>(c));
        pos_of_.assign(static_cast<std::size_t>(n_), -1);
        order_.assign(static_cast<std::size_t>(n_), -1);
        rows_.assign(static_cast<std::size_t>(n_ * words_), 0);
        used_.assign(static_cast<std::size_t>(n_), false);
    }

    std::vector<std::uint64_t> run() {
        place(0, have_best_);
        return best_;
    }

  private:
    // Lexicographic comparison of one row (words_) of packed bits.
    int compare_row(long p) const {
        for (long w = 0; w < words_; ++w) {
            const std::uint64_t a = rows_[static_cast<std::size_t>(p * words_ + w)];
            const std::uint64_t b = best_[static_cast<std::size_t>(p * words_ + w)];
            if (a != b) return a < b ? -1 : 1;
        }
        return 0;
    }

    void place(long p, bool tight) {
        if (p == n_) {
            // `tight` only gates pruning; the minimum is enforced here by a
            // full comparison, so sub-minimal completions never stick.
            if (!have_best_ ||
                std::lexicographical_compare(rows_.begin(), rows_.end(), best_.begin(),
                                             best_.end())) {
                best_ = rows_;
                have_best_ = true;
            }
            return;
        }
        for (long v : classes_[static_cast<std::size_t>(class_of_pos_[static_cast<std::size_t>(p)])]) {
            if (used_[static_cast<std::size_t>(v)]) continue;
            // Build row p: bits toward already-placed vertices, MSB-first so
            // word-wise unsigned comparison is lexicographic in bit order.
            for (long w = 0; w < words_; ++w) rows_[static_cast<std::size_t>(p * words_ + w)] = 0;
            for (long u : g_.adj[static_cast<std::size_t>(v)]) {
                const long q = pos_of_[static_cast<std::size_t>(u)];
                if (q >= 0) rows_[static_cast<std::size_t>(p * words_ + q / 64)] |= (1ull << 63) >> (q % 64);
            }
            bool child_tight = tight;
            if (tight && have_best_) {
                const int cmp = compare_row(p);
                if (cmp > 0) continue;  // prefix already larger than best
                if (cmp < 0) child_tight = false;
            }
            used_[static_cast<std::size_t>(v)] = true;
            pos_of_[static_cast<std::size_t>(v)] = p;
            order_[static_cast<std::size_t>(p)] = v;
            place(p + 1, child_tight);
            used_[static_cast<std::size_t>(v)] = false;
            pos_of_[static_cast<std::size_t>(v)] = -1;
        }
    }

    const Graph& g_;
    long n_, words_;
    std::vector<std::vector<long>> classes_;
    std::vector<long> class_of_pos_, pos_of_, order_;
    std::vector<std::uint64_t> rows_, best_;
    std::vector<bool> used_;
    bool have_best_ = false;
};

}  // namespace

Graph graph_from_edges(long n, const std::vector<std::pair<long, long>>& edges) {
    if (n < 0) throw NonSimplicial("vertex count must be nonnegative");
    Graph G;
    G.n = n;
    G.adj.assign(static_cast<std::size_t>(n), {});
    std::set<std::pair<long, long>> seen;
    for (auto [u, v] : edges) {
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw NonSimplicial("edge endpoint out of range: " + pair_str(u, v));
        if (u == v) throw NonSimplicial("self-loop at vertex " + std::to_string(u));
        auto key = std::minmax(u, v);
        if (!seen.insert({key.first, key.second}).second)
            throw DuplicateCell("duplicate edge " + pair_str(key.first, key.second));
        G.adj[static_cast<std::size_t>(u)].push_back(v);
        G.adj[static_cast<std::size_t>(v)].push_back(u);
    }
    for (auto& nbrs : G.adj) std::sort(nbrs.begin(), nbrs.end());
    return G;
}

Graph skeleton_graph(const SimplicialComplex& K) {
    validate_complex(K);
    std::map<long, long> index;
    for (const auto& v : K.cells[0]) index.emplace(v[0], static_cast<long>(index.size()));
    std::vector<std::pair<long, long>> edges;
    if (K.dim() >= 1)
        for (const auto& e : K.cells[1]) edges.emplace_back(index.at(e[0]), index.at(e[1]));
    return graph_from_edges(static_cast<long>(index.size()), edges);
}

Graph cycle_graph(long n) {
    if (n < 3) throw NonSimplicial("cycle needs at least 3 vertices");
    std::vector<std::pair<long, long>> edges;
    for (long i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return graph_from_edges(n, edges);
}

Graph path_graph(long n) {
    if (n < 1) throw NonSimplicial("path needs at least 1 vertex");
    std::vector<std::pair<long, long>> edges;
    for (long i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return graph_from_edges(n, edges);
}

Graph star_graph(long leaves) {
    if (leaves < 0) throw NonSimplicial("negative leaf count");
    std::vector<std::pair<long, long>> edges;
    for (long i = 1; i <= leaves; ++i) edges.emplace_back(0, i);
    return graph_from_edges(leaves + 1, edges);
}

Graph petersen_graph() {
    std::vector<std::pair<long, long>> edges;
    for (long i = 0; i < 5; ++i) {
        edges.emplace_back(i, (i + 1) % 5);          // outer pentagon
        edges.emplace_back(5 + i, 5 + (i + 2) % 5);  // inner pentagram
        edges.emplace_back(i, 5 + i);                // spokes
    }
    return graph_from_edges(10, edges);
}

RootedBall rooted_ball(const Graph& G, long root, long r) {
    if (root < 0 || root >= G.n) throw NonSimplicial("ball root out of range");
    if (r < 0) throw NonSimplicial("ball radius must be nonnegative");
    std::vector<long> new_index(static_cast<std::size_t>(G.n), -1);
    std::vector<long> members;
    std::deque<std::pair<long, long>> queue{{root, 0}};
    new_index[static_cast<std::size_t>(root)] = 0;
    members.push_back(root);
    while (!queue.empty()) {
        auto [v, d] = queue.front();
        queue.pop_front();
        if (d == r) continue;
        for (long u : G.adj[static_cast<std::size_t>(v)]) {
            if (new_index[static_cast<std::size_t>(u)] < 0) {
                new_index[static_cast<std::size_t>(u)] = static_cast<long>(members.size());
                members.push_back(u);
                queue.emplace_back(u, d + 1);
            }
        }
    }
    std::vector<std::pair<long, long>> edges;
    for (long v : members)
        for (long u : G.adj[static_cast<std::size_t>(v)])
            if (u > v && new_index[static_cast<std::size_t>(u)] >= 0)
                edges.emplace_back(new_index[static_cast<std::size_t>(v)], new_index[static_cast<std::size_t>(u)]);
    RootedBall ball;
    ball.g = graph_from_edges(static_cast<long>(members.size()), edges);
    ball.root = 0;
    return ball;
}

std::string canonical_rooted_code(const Graph& g, long root) {
    if (root < 0 || root >= g.n) throw NonSimplicial("root out of range");
    if (g.n == 0) throw NonSimplicial("empty graph has no rooted code");
    // Seed colors with distance from the root (unreachable vertices get the
    // largest color), then refine; the root is always the unique color-0
    // vertex, so its position in the code is determined by the partition.
    std::vector<long> dist = bfs_distances(g, root);
    for (auto& d : dist)
        if (d < 0) d = g.n;
    const std::vector<long> color = refine_colors(g, std::move(dist));
    CodeSearch search(g, color);
    const std::vector<std::uint64_t> bits = search.run();

    long root_pos = 0;
    for (long v = 0; v < g.n; ++v)
        if (v != root && color[static_cast<std::size_t>(v)] < color[static_cast<std::size_t>(root)]) ++root_pos;

    std::string out = "n" + std::to_string(g.n) + "r" + std::to_string(root_pos) + ":";
    static const char* hex = "0123456789abcdef";
    for (std::uint64_t w : bits)
        for (int shift = 60; shift >= 0; shift -= 4) out += hex[(w >> shift) & 0xf];
    return out;
}

BallStatistics ball_census(const Graph& G, long r) {
    if (G.n == 0) throw NonSimplicial("census of empty graph");
    std::map<std::string, long> counts;
    for (long v = 0; v < G.n; ++v) {
        const RootedBall ball = rooted_ball(G, v, r);
        ++counts[canonical_rooted_code(ball.g, ball.root)];
    }
    BallStatistics stats;
    stats.r = r;
    stats.sample_size = G.n;
    for (const auto& [code, count] : counts) stats.histogram.emplace_back(code, Rational(count, G.n));
    return stats;
}

Rational tv_distance(const BallStatistics& a, const BallStatistics& b) {
    if (a.r != b.r)
        throw RadiusMismatch("cannot compare censuses at radii " + std::to_string(a.r) + " and " +
                             std::to_string(b.r));
    std::map<std::string, Rational> diff;
    for (const auto& [code, freq] : a.histogram) diff[code] += freq;
    for (const auto& [code, freq] : b.histogram) diff[code] -= freq;
    Rational total;
    for (const auto& [code, d] : diff) total += d >= Rational(0) ? d : -d;
    return total / 2;
}

std::vector<std::optional<Rational>> injectivity_radius_profile(const Graph& G) {
    std::vector<std::optional<Rational>> profile(static_cast<std::size_t>(G.n));
    for (long v = 0; v < G.n; ++v) {
        long best = -1;
        for (long u : G.adj[static_cast<std::size_t>(v)]) {
            // Shortest v-u path avoiding the edge {v,u}; closing it up with
            // that edge gives the shortest cycle through v using the edge.
            std::vector<long> dist(static_cast<std::size_t>(G.n), -1);
            std::deque<long> queue{v};
            dist[static_cast<std::size_t>(v)] = 0;
            while (!queue.empty() && dist[static_cast<std::size_t>(u)] < 0) {
                const long w = queue.front();
                queue.pop_front();
                for (long x : G.adj[static_cast<std::size_t>(w)]) {
                    if (w == v && x == u) continue;  // skip the removed edge
                    if (dist[static_cast<std::size_t>(x)] < 0) {
                        dist[static_cast<std::size_t>(x)] = dist[static_cast<std::size_t>(w)] + 1;
                        queue.push_back(x);
                    }
                }
            }
            if (dist[static_cast<std::size_t>(u)] >= 0) {
                const long cycle_len = dist[static_cast<std::size_t>(u)] + 1;
                if (best < 0 || cycle_len < best) best = cycle_len;
            }
        }
        if (best >= 0) profile[static_cast<std::size_t>(v)] = Rational(best, 2);
    }
    return profile;
}

Rational thin_part_fraction(const Graph& G, const Rational& r) {
    if (G.n == 0) throw NonSimplicial("thin part of empty graph");
    long thin = 0;
    for (const auto& inj : injectivity_radius_profile(G))
        if (inj && *inj < r) ++thin;
    return Rational(thin, G.n);
}

}  // namespace llb
