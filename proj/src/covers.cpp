#include "llb/covers.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <map>
#include <numeric>
#include <set>

#include "llb/errors.hpp"

namespace llb {

namespace {

// Signed generator label of the oriented edge u -> v: 0 for tree edges,
// +-(g+1) for the generator edge g. Built once per presentation.
struct EdgeLabels {
    std::map<std::pair<int, int>, int> label;  // keyed (min, max), sign for min->max

    explicit EdgeLabels(const Presentation& P) {
        for (const auto& e : P.tree_edges) label.emplace(e, 0);
        for (std::size_t g = 0; g < P.generator_edges.size(); ++g)
            label.emplace(P.generator_edges[g], static_cast<int>(g) + 1);
    }
    int oriented(int u, int v) const {
        if (u < v) return label.at({u, v});
        return -label.at({v, u});
    }
};

std::vector<std::vector<int>> inverse_perms(const PermutationRep& rep) {
    std::vector<std::vector<int>> inv(rep.generators.size());
    for (std::size_t g = 0; g < rep.generators.size(); ++g) {
        inv[g].assign(rep.degree, 0);
        for (long s = 0; s < rep.degree; ++s) inv[g][rep.generators[g][s]] = static_cast<int>(s);
    }
    return inv;
}

}  // namespace

Presentation spanning_tree_generators(const SimplicialComplex& K) {
    validate_complex(K);
    Presentation P;
    if (K.dim() < 0 || K.cells[0].empty()) return P;
    for (const auto& v : K.cells[0]) P.vertices.push_back(v[0]);

    std::map<int, std::vector<int>> adj;
    for (int v : P.vertices) adj[v];
    if (K.dim() >= 1)
        for (const auto& e : K.cells[1]) {
            adj[e[0]].push_back(e[1]);
            adj[e[1]].push_back(e[0]);
        }
    for (auto& [v, nbrs] : adj) std::sort(nbrs.begin(), nbrs.end());

    std::set<int> visited = {P.vertices.front()};
    std::set<std::pair<int, int>> tree;
    std::deque<int> queue = {P.vertices.front()};
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int w : adj[u])
            if (visited.insert(w).second) {
                tree.emplace(std::min(u, w), std::max(u, w));
                queue.push_back(w);
            }
    }
    if (visited.size() != P.vertices.size())
        throw Disconnected("complex has " + std::to_string(P.vertices.size()) +
                           " vertices but only " + std::to_string(visited.size()) +
                           " reachable from the first");

    if (K.dim() >= 1)
        for (const auto& e : K.cells[1]) {
            std::pair<int, int> key{e[0], e[1]};
            if (tree.count(key))
                P.tree_edges.push_back(key);
            else
                P.generator_edges.push_back(key);
        }

    EdgeLabels labels(P);
    if (K.dim() >= 2)
        for (const auto& f : K.cells[2]) {
            std::vector<int> word;
            const int loop[4] = {f[0], f[1], f[2], f[0]};
            for (int i = 0; i < 3; ++i)
                if (int l = labels.oriented(loop[i], loop[i + 1]); l != 0) word.push_back(l);
            P.relators.push_back(std::move(word));
        }
    return P;
}

void validate_rep(const Presentation& P, const PermutationRep& rep) {
    if (rep.degree < 1) throw ValidationError("permutation rep degree must be positive");
    if (rep.generators.size() != P.generator_edges.size())
        throw DegreeMismatch("rep has " + std::to_string(rep.generators.size()) +
                             " permutations but the presentation has " +
                             std::to_string(P.generator_edges.size()) + " generators");
    for (std::size_t g = 0; g < rep.generators.size(); ++g) {
        const auto& perm = rep.generators[g];
        if (static_cast<long>(perm.size()) != rep.degree)
            throw ValidationError("generator " + std::to_string(g) + " permutation has " +
                                  std::to_string(perm.size()) + " entries, expected " +
                                  std::to_string(rep.degree));
        std::vector<bool> hit(rep.degree, false);
        for (int image : perm) {
            if (image < 0 || image >= rep.degree)
                throw ValidationError("generator " + std::to_string(g) + " image " +
                                      std::to_string(image) + " outside 0.." +
                                      std::to_string(rep.degree - 1));
            if (hit[image])
                throw ValidationError("generator " + std::to_string(g) +
                                      " repeats image " + std::to_string(image));
            hit[image] = true;
        }
    }
    for (std::size_t r = 0; r < P.relators.size(); ++r)
        for (long s = 0; s < rep.degree; ++s)
            if (apply_word(rep, P.relators[r], static_cast<int>(s)) != s)
                throw RelatorViolated("relator " + std::to_string(r) +
                                      " does not act as the identity (moves sheet " +
                                      std::to_string(s) + ")");
}

int apply_word(const PermutationRep& rep, const std::vector<int>& word, int sheet) {
    for (int letter : word) {
        std::size_t g = static_cast<std::size_t>(std::abs(letter)) - 1;
        const auto& perm = rep.generators.at(g);
        if (letter > 0) {
            sheet = perm[sheet];
        } else {
            int pre = 0;
            while (perm[pre] != sheet) ++pre;
            sheet = pre;
        }
    }
    return sheet;
}

bool rep_transitive(const PermutationRep& rep) {
    std::vector<bool> seen(rep.degree, false);
    std::deque<int> queue = {0};
    seen[0] = true;
    long count = 1;
    auto inv = inverse_perms(rep);
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (std::size_t g = 0; g < rep.generators.size(); ++g)
            for (int t : {rep.generators[g][s], inv[g][s]})
                if (!seen[t]) {
                    seen[t] = true;
                    ++count;
                    queue.push_back(t);
                }
    }
    return count == rep.degree;
}

bool rep_regular(const PermutationRep& rep) {
    // Transversal t_s moving sheet 0 to s, built by BFS; the cover is regular
    // iff every Schreier generator t_{g(s)}^{-1} g t_s of the stabilizer of 0
    // is trivial, i.e. g(t_s(x)) = t_{g(s)}(x) for all x.
    const long n = rep.degree;
    auto inv = inverse_perms(rep);
    std::vector<std::vector<int>> transversal(n);
    std::vector<int> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    transversal[0] = identity;
    std::deque<int> queue = {0};
    std::vector<bool> seen(n, false);
    seen[0] = true;
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (std::size_t g = 0; g < rep.generators.size(); ++g)
            for (const auto& perm : {rep.generators[g], inv[g]}) {
                int t = perm[s];
                if (seen[t]) continue;
                seen[t] = true;
                transversal[t].resize(n);
                for (long x = 0; x < n; ++x) transversal[t][x] = perm[transversal[s][x]];
                queue.push_back(t);
            }
    }
    for (long s = 0; s < n; ++s) {
        if (!seen[s]) return false;  // not even transitive
        for (const auto& perm : rep.generators) {
            const auto& lhs = transversal[perm[s]];
            const auto& ts = transversal[s];
            for (long x = 0; x < n; ++x)
                if (perm[ts[x]] != lhs[x]) return false;
        }
    }
    return true;
}

bool rep_factors_through(const PermutationRep& finer, const PermutationRep& coarser) {
    if (finer.generators.size() != coarser.generators.size())
        throw DegreeMismatch("reps have different generator counts");
    // Try to build f with f(0) = 0 and f(g(s)) = g(f(s)); the map exists iff
    // the finer stabilizer of 0 is contained in the coarser one.
    std::vector<int> f(finer.degree, -1);
    f[0] = 0;
    std::deque<int> queue = {0};
    auto inv_f = inverse_perms(finer);
    auto inv_c = inverse_perms(coarser);
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (std::size_t g = 0; g < finer.generators.size(); ++g) {
            const std::pair<const std::vector<int>&, const std::vector<int>&> moves[2] = {
                {finer.generators[g], coarser.generators[g]}, {inv_f[g], inv_c[g]}};
            for (const auto& [pf, pc] : moves) {
                int t = pf[s];
                int image = pc[f[s]];
                if (f[t] < 0) {
                    f[t] = image;
                    queue.push_back(t);
                } else if (f[t] != image) {
                    return false;
                }
            }
        }
    }
    return true;
}

SimplicialComplex cover_from_permutations(const SimplicialComplex& K, const Presentation& P,
                                          const PermutationRep& rep) {
    validate_rep(P, rep);
    const long d = rep.degree;
    std::map<int, int> vertex_index;
    for (std::size_t i = 0; i < P.vertices.size(); ++i)
        vertex_index.emplace(P.vertices[i], static_cast<int>(i));

    EdgeLabels labels(P);
    auto inv = inverse_perms(rep);
    auto shift = [&](int letter, int sheet) {
        if (letter == 0) return sheet;
        std::size_t g = static_cast<std::size_t>(std::abs(letter)) - 1;
        return letter > 0 ? rep.generators[g][sheet] : inv[g][sheet];
    };

    SimplicialComplex C;
    C.cells.resize(K.cells.size());
    for (int k = 0; k <= K.dim(); ++k) {
        C.cells[k].reserve(K.cells[k].size() * d);
        for (const auto& cell : K.cells[k])
            for (long s = 0; s < d; ++s) {
                std::vector<int> lifted(cell.size());
                for (std::size_t j = 0; j < cell.size(); ++j) {
                    int sheet = j == 0 ? static_cast<int>(s)
                                       : shift(labels.oriented(cell[0], cell[j]),
                                               static_cast<int>(s));
                    lifted[j] = vertex_index.at(cell[j]) * static_cast<int>(d) + sheet;
                }
                std::sort(lifted.begin(), lifted.end());
                C.cells[k].push_back(std::move(lifted));
            }
        std::sort(C.cells[k].begin(), C.cells[k].end());
    }
    validate_complex(C);
    return C;
}

std::vector<std::vector<std::int64_t>> relator_exponent_matrix(const Presentation& P) {
    std::vector<std::vector<std::int64_t>> R(
        P.relators.size(), std::vector<std::int64_t>(P.generator_edges.size(), 0));
    for (std::size_t r = 0; r < P.relators.size(); ++r)
        for (int letter : P.relators[r]) R[r][std::abs(letter) - 1] += letter > 0 ? 1 : -1;
    return R;
}

namespace {

std::uint64_t support_mask(const std::vector<std::int64_t>& v) {
    std::uint64_t m = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] != 0) m |= std::uint64_t{1} << i;
    return m;
}

}  // namespace

std::vector<std::pair<std::int64_t, std::int64_t>> f2_quotient_exponents(const Presentation& P) {
    const std::size_t g = P.generator_edges.size();
    if (g < 2) throw NoFreeQuotient("presentation has fewer than 2 generators");
    if (g > 64)
        throw NoFreeQuotient("free-quotient search supports at most 64 generators, got " +
                             std::to_string(g));

    auto R = relator_exponent_matrix(P);
    SparseIntMatrix A(static_cast<int>(R.size()), static_cast<int>(g));
    {
        std::vector<Eigen::Triplet<std::int64_t>> trips;
        for (std::size_t r = 0; r < R.size(); ++r)
            for (std::size_t c = 0; c < g; ++c)
                if (R[r][c] != 0) trips.emplace_back(static_cast<int>(r), static_cast<int>(c),
                                                     R[r][c]);
        A.setFromTriplets(trips.begin(), trips.end());
    }
    auto kernel = integer_kernel_basis(A);
    if (kernel.size() < 2)
        throw NoFreeQuotient("first homology has rank " + std::to_string(kernel.size()) +
                             ", need at least 2");

    // Candidate cocycles: small integer combinations of the kernel basis,
    // made primitive and sign-normalized, ordered by support size.
    const int use = static_cast<int>(std::min<std::size_t>(kernel.size(), 5));
    std::set<std::vector<std::int64_t>> seen;
    std::vector<std::vector<std::int64_t>> candidates;
    std::vector<int> coeff(use, -2);
    for (;;) {
        std::vector<std::int64_t> v(g, 0);
        for (int i = 0; i < use; ++i)
            if (coeff[i] != 0)
                for (std::size_t c = 0; c < g; ++c) v[c] += coeff[i] * kernel[i][c];
        std::int64_t content = 0;
        for (auto x : v) content = std::gcd(content, std::llabs(x));
        if (content > 0) {
            for (auto& x : v) x /= content;
            auto first = std::find_if(v.begin(), v.end(), [](std::int64_t x) { return x != 0; });
            if (first != v.end() && *first < 0)
                for (auto& x : v) x = -x;
            if (seen.insert(v).second) candidates.push_back(v);
        }
        int i = 0;
        while (i < use && coeff[i] == 2) coeff[i++] = -2;
        if (i == use) break;
        ++coeff[i];
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const auto& a, const auto& b) {
                  int pa = __builtin_popcountll(support_mask(a));
                  int pb = __builtin_popcountll(support_mask(b));
                  return pa != pb ? pa < pb : a < b;
              });

    std::vector<std::uint64_t> relator_support;
    for (const auto& word : P.relators) {
        std::uint64_t m = 0;
        for (int letter : word) m |= std::uint64_t{1} << (std::abs(letter) - 1);
        relator_support.push_back(m);
    }

    // A pair works when supports are disjoint and no relator word touches
    // both: every relator then maps to a one-letter word with exponent sum 0.
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        std::uint64_t mi = support_mask(candidates[i]);
        for (std::size_t j = i + 1; j < candidates.size(); ++j) {
            std::uint64_t mj = support_mask(candidates[j]);
            if (mi & mj) continue;
            bool ok = true;
            for (std::uint64_t mr : relator_support)
                if ((mr & mi) && (mr & mj)) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            std::vector<std::pair<std::int64_t, std::int64_t>> exps(g, {0, 0});
            for (std::size_t c = 0; c < g; ++c) {
                exps[c].first = candidates[i][c];
                exps[c].second = candidates[j][c];
            }
            return exps;
        }
    }
    throw NoFreeQuotient("no pair of relator-disjoint primitive cocycles found");
}

namespace {

PermutationRep translation_rep(const std::vector<long>& moduli,
                               const std::vector<std::vector<long>>& translations) {
    long degree = 1;
    for (long m : moduli) degree *= m;
    PermutationRep rep;
    rep.degree = degree;
    for (const auto& a : translations) {
        std::vector<int> perm(degree);
        for (long s = 0; s < degree; ++s) {
            long rem = s, out = 0, stride = 1;
            for (std::size_t j = 0; j < moduli.size(); ++j) {
                long x = rem % moduli[j];
                rem /= moduli[j];
                out += ((x + a[j]) % moduli[j]) * stride;
                stride *= moduli[j];
            }
            perm[s] = static_cast<int>(out);
        }
        rep.generators.push_back(std::move(perm));
    }
    return rep;
}

long power_capped(long p, int e, long cap) {
    long v = 1;
    for (int i = 0; i < e; ++i) {
        if (v > cap / p) return cap + 1;
        v *= p;
    }
    return v;
}

CoverLevel make_level(const SimplicialComplex& K, const Presentation& P, PermutationRep rep) {
    CoverLevel level;
    level.degree = rep.degree;
    level.is_connected = rep_transitive(rep);
    level.is_normal = rep_regular(rep);
    level.complex = cover_from_permutations(K, P, rep);
    level.rep = std::move(rep);
    return level;
}

}  // namespace

CoverTower normal_chain_tower(const SimplicialComplex& K, const std::string& family, long p,
                              int depth) {
    if (family != "mod-p" && family != "cyclic")
        throw UnsupportedFamily("unknown family '" + family + "' (expected mod-p or cyclic)");
    if (p < 2) throw ValidationError("modulus base must be at least 2");
    if (depth < 1) throw ValidationError("tower depth must be at least 1");

    CoverTower tower;
    tower.base = K;
    tower.presentation = spanning_tree_generators(K);
    tower.family = family;
    tower.is_chain = true;
    const Presentation& P = tower.presentation;
    const int g = static_cast<int>(P.generator_edges.size());
    if (g == 0) throw UnsupportedFamily("fundamental group is trivial, no covers to build");

    SmithForm snf = smith_normal_form(relator_exponent_matrix(P), g);
    const long degree_cap = 1L << 20;

    long prev_degree = 0;
    for (int i = 1; i <= depth; ++i) {
        long q = power_capped(p, i, degree_cap);
        std::vector<long> moduli;
        std::vector<int> kept_cols;
        for (int j = 0; j < g; ++j) {
            long dj = snf.diag[j];
            long m = dj == 0 ? q : std::gcd(dj, q);
            if (m > 1) {
                moduli.push_back(m);
                kept_cols.push_back(j);
            }
        }
        if (moduli.empty()) {
            if (family == "mod-p")
                throw UnsupportedFamily("first homology has no " + std::to_string(p) +
                                        "-quotient");
            // cyclic handled below; fall through to its own check
        }
        if (family == "cyclic") {
            int free_col = -1;
            for (int j = 0; j < g; ++j)
                if (snf.diag[j] == 0) {
                    free_col = j;
                    break;
                }
            if (free_col < 0)
                throw UnsupportedFamily("first homology has no free part for cyclic quotients");
            moduli = {q};
            kept_cols = {free_col};
        }

        long degree = 1;
        for (long m : moduli) {
            if (degree > degree_cap / m)
                throw ResourceError("tower level " + std::to_string(i) + " degree exceeds cap " +
                                    std::to_string(degree_cap));
            degree *= m;
        }
        if (degree == prev_degree) break;  // quotient stopped growing
        prev_degree = degree;

        std::vector<std::vector<long>> translations;
        for (int k = 0; k < g; ++k) {
            std::vector<long> a(moduli.size());
            for (std::size_t jj = 0; jj < moduli.size(); ++jj) {
                long v = snf.V[k][kept_cols[jj]] % moduli[jj];
                a[jj] = v < 0 ? v + moduli[jj] : v;
            }
            translations.push_back(std::move(a));
        }
        tower.levels.push_back(make_level(K, P, translation_rep(moduli, translations)));
    }
    return tower;
}

CoverTower free_subgroup_chain_tower(const SimplicialComplex& K, int depth) {
    if (depth < 1) throw ValidationError("tower depth must be at least 1");
    CoverTower tower;
    tower.base = K;
    tower.presentation = spanning_tree_generators(K);
    tower.family = "free-chain";
    tower.is_chain = false;  // index-n stabilizers are not nested across n
    const Presentation& P = tower.presentation;
    auto exps = f2_quotient_exponents(P);

    for (int n = 1; n <= depth; ++n) {
        // x -> the n-cycle s+1 mod n, y -> the transposition (0 1).
        auto power_of_cycle = [&](std::int64_t e, int s) {
            long r = (s + e) % n;
            return static_cast<int>(r < 0 ? r + n : r);
        };
        auto power_of_swap = [&](std::int64_t e, int s) {
            if (n < 2 || e % 2 == 0) return s;
            return s == 0 ? 1 : s == 1 ? 0 : s;
        };
        PermutationRep rep;
        rep.degree = n;
        for (const auto& [a, b] : exps) {
            std::vector<int> perm(n);
            for (int s = 0; s < n; ++s) perm[s] = a != 0 ? power_of_cycle(a, s)
                                                         : power_of_swap(b, s);
            rep.generators.push_back(std::move(perm));
        }
        tower.levels.push_back(make_level(K, P, rep));
    }
    return tower;
}

}  // namespace llb
