#include "llb/simplicial.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "llb/errors.hpp"

namespace llb {

namespace {

std::string tuple_str(const std::vector<int>& t) {
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(t[i]);
    }
    return s + ")";
}

std::map<std::vector<int>, int> index_of(const std::vector<std::vector<int>>& cells) {
    std::map<std::vector<int>, int> idx;
    for (std::size_t i = 0; i < cells.size(); ++i) idx.emplace(cells[i], static_cast<int>(i));
    return idx;
}

}  // namespace

void validate_complex(const SimplicialComplex& K) {
    for (int k = 0; k <= K.dim(); ++k) {
        std::set<std::vector<int>> seen;
        for (const auto& cell : K.cells[k]) {
            if (static_cast<int>(cell.size()) != k + 1)
                throw NonSimplicial("cell " + tuple_str(cell) + " listed in dimension " +
                                    std::to_string(k) + " has " + std::to_string(cell.size()) +
                                    " vertices");
            for (std::size_t i = 0; i + 1 < cell.size(); ++i)
                if (cell[i] >= cell[i + 1])
                    throw NonSimplicial("cell " + tuple_str(cell) +
                                        " is not strictly increasing");
            if (!cell.empty() && cell.front() < 0)
                throw NonSimplicial("cell " + tuple_str(cell) + " has a negative vertex");
            if (!seen.insert(cell).second)
                throw DuplicateCell("cell " + tuple_str(cell) + " listed twice in dimension " +
                                    std::to_string(k));
        }
    }
    for (int k = 1; k <= K.dim(); ++k) {
        auto faces = index_of(K.cells[k - 1]);
        for (const auto& cell : K.cells[k]) {
            std::vector<int> face(cell.size() - 1);
            for (std::size_t drop = 0; drop < cell.size(); ++drop) {
                for (std::size_t i = 0, j = 0; i < cell.size(); ++i)
                    if (i != drop) face[j++] = cell[i];
                if (!faces.count(face))
                    throw MissingFace("face " + tuple_str(face) + " of cell " + tuple_str(cell) +
                                      " is not listed");
            }
        }
    }
}

SparseIntMatrix boundary_matrix(const SimplicialComplex& K, int k) {
    const long rows = K.num_cells(k - 1);
    const long cols = K.num_cells(k);
    SparseIntMatrix B(rows, cols);
    if (k < 1 || k > K.dim() || rows == 0 || cols == 0) return B;

    auto face_idx = index_of(K.cells[k - 1]);
    std::vector<Eigen::Triplet<std::int64_t>> trips;
    trips.reserve(static_cast<std::size_t>(cols) * (k + 1));
    for (long c = 0; c < cols; ++c) {
        const auto& cell = K.cells[k][c];
        std::vector<int> face(cell.size() - 1);
        std::int64_t sign = 1;
        for (std::size_t drop = 0; drop < cell.size(); ++drop, sign = -sign) {
            for (std::size_t i = 0, j = 0; i < cell.size(); ++i)
                if (i != drop) face[j++] = cell[i];
            trips.emplace_back(face_idx.at(face), c, sign);
        }
    }
    B.setFromTriplets(trips.begin(), trips.end());
    return B;
}

long betti_number(const SimplicialComplex& K, int k) {
    if (k < 0 || k > K.dim()) return 0;
    long rk = rank_exact(boundary_matrix(K, k));
    long rk1 = rank_exact(boundary_matrix(K, k + 1));
    return K.num_cells(k) - rk - rk1;
}

std::vector<long> betti_vector(const SimplicialComplex& K) {
    const int d = K.dim();
    if (d < 0) return {};
    std::vector<long> rank_b(d + 2, 0);
    for (int k = 1; k <= d; ++k) rank_b[k] = rank_exact(boundary_matrix(K, k));
    std::vector<long> b(d + 1);
    for (int k = 0; k <= d; ++k) b[k] = K.num_cells(k) - rank_b[k] - rank_b[k + 1];
    return b;
}

SparseIntMatrix hodge_laplacian(const SimplicialComplex& K, int k) {
    SparseIntMatrix down = boundary_matrix(K, k);
    SparseIntMatrix up = boundary_matrix(K, k + 1);
    SparseIntMatrix L = SparseIntMatrix(down.transpose()) * down;
    if (up.nonZeros() > 0) L = L + SparseIntMatrix(up * SparseIntMatrix(up.transpose()));
    return L;
}

long euler_characteristic(const SimplicialComplex& K) {
    long chi = 0;
    for (int k = 0; k <= K.dim(); ++k) chi += (k % 2 == 0 ? 1 : -1) * K.num_cells(k);
    return chi;
}

bool is_connected(const SimplicialComplex& K) {
    if (K.dim() < 0 || K.cells[0].empty()) return true;
    std::map<int, int> comp;  // vertex -> union-find parent index
    std::vector<int> parent;
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto id = [&](int v) {
        auto it = comp.find(v);
        if (it != comp.end()) return it->second;
        int n = static_cast<int>(parent.size());
        parent.push_back(n);
        comp.emplace(v, n);
        return n;
    };
    for (const auto& v : K.cells[0]) id(v[0]);
    if (K.dim() >= 1)
        for (const auto& e : K.cells[1]) parent[find(id(e[0]))] = find(id(e[1]));
    int root = find(0);
    for (int i = 0; i < static_cast<int>(parent.size()); ++i)
        if (find(i) != root) return false;
    return true;
}

namespace {

// Collect all facets of the given top cells and assemble the closure.
SimplicialComplex closure_of_faces(std::vector<std::vector<int>> top, int top_dim) {
    SimplicialComplex K;
    K.cells.resize(top_dim + 1);
    std::sort(top.begin(), top.end());
    K.cells[top_dim] = std::move(top);
    for (int k = top_dim; k >= 1; --k) {
        std::set<std::vector<int>> faces;
        for (const auto& cell : K.cells[k]) {
            std::vector<int> face(cell.size() - 1);
            for (std::size_t drop = 0; drop < cell.size(); ++drop) {
                for (std::size_t i = 0, j = 0; i < cell.size(); ++i)
                    if (i != drop) face[j++] = cell[i];
                faces.insert(face);
            }
        }
        for (const auto& f : faces) K.cells[k - 1].push_back(f);
    }
    return K;
}

}  // namespace

SimplicialComplex cycle_complex(int n) {
    if (n < 3) throw ValidationError("cycle_complex needs at least 3 vertices");
    std::vector<std::vector<int>> edges;
    for (int i = 0; i < n; ++i) {
        int a = i, b = (i + 1) % n;
        edges.push_back({std::min(a, b), std::max(a, b)});
    }
    return closure_of_faces(std::move(edges), 1);
}

SimplicialComplex circle_complex() { return cycle_complex(3); }

SimplicialComplex filled_triangle() { return closure_of_faces({{0, 1, 2}}, 2); }

SimplicialComplex rose2_complex() {
    return closure_of_faces({{0, 1}, {1, 2}, {0, 2}, {0, 3}, {3, 4}, {0, 4}}, 1);
}

SimplicialComplex torus_complex() {
    std::vector<std::vector<int>> faces;
    for (int i = 0; i < 7; ++i) {
        std::vector<int> f1 = {i, (i + 1) % 7, (i + 3) % 7};
        std::vector<int> f2 = {i, (i + 2) % 7, (i + 3) % 7};
        std::sort(f1.begin(), f1.end());
        std::sort(f2.begin(), f2.end());
        faces.push_back(f1);
        faces.push_back(f2);
    }
    return closure_of_faces(std::move(faces), 2);
}

SimplicialComplex genus2_complex() {
    // Two copies of the 7-vertex torus, each with the face (0,1,3) removed,
    // glued along the exposed boundary triangle.
    SimplicialComplex T = torus_complex();
    const std::vector<int> removed = {0, 1, 3};
    std::map<int, int> relabel = {{7, 0}, {8, 1}, {10, 3}, {9, 7}, {11, 8}, {12, 9}, {13, 10}};
    std::vector<std::vector<int>> faces;
    for (const auto& f : T.cells[2]) {
        if (f == removed) continue;
        faces.push_back(f);
        std::vector<int> g(3);
        for (int i = 0; i < 3; ++i) g[i] = relabel.at(f[i] + 7);
        std::sort(g.begin(), g.end());
        faces.push_back(g);
    }
    return closure_of_faces(std::move(faces), 2);
}

SimplicialComplex disjoint_union(const SimplicialComplex& a, const SimplicialComplex& b) {
    int shift = 0;
    for (const auto& v : a.cells.empty() ? std::vector<std::vector<int>>{} : a.cells[0])
        shift = std::max(shift, v[0] + 1);
    SimplicialComplex K;
    K.cells.resize(std::max(a.cells.size(), b.cells.size()));
    for (std::size_t k = 0; k < a.cells.size(); ++k) K.cells[k] = a.cells[k];
    for (std::size_t k = 0; k < b.cells.size(); ++k)
        for (auto cell : b.cells[k]) {
            for (auto& v : cell) v += shift;
            K.cells[k].push_back(std::move(cell));
        }
    for (auto& layer : K.cells) std::sort(layer.begin(), layer.end());
    return K;
}

}  // namespace llb
