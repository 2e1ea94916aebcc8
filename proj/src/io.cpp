#include "llb/io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <filesystem>
#include <limits>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "llb/errors.hpp"
#include "llb/parallel.hpp"

namespace llb {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Thread plumbing (single definition point for the library)
// ---------------------------------------------------------------------------

int& thread_count() {
    static int n = std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, 16);
    return n;
}

void parallel_try_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    std::atomic<bool> failed{false};
    std::exception_ptr first;
    std::mutex mu;
    parallel_for(n, [&](std::size_t i) {
        if (failed.load(std::memory_order_relaxed)) return;
        try {
            fn(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!failed.exchange(true)) first = std::current_exception();
        }
    });
    if (first) std::rethrow_exception(first);
}

// ---------------------------------------------------------------------------
// Small text helpers
// ---------------------------------------------------------------------------

namespace {

// Strips '#' comments and surrounding whitespace; returns the payload tokens.
std::vector<std::string> tokenize(const std::string& raw) {
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
    std::vector<std::string> tokens;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    return tokens;
}

long parse_long(const std::string& tok, long lineno) {
    long value = 0;
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw ParseError(lineno, "expected an integer, got '" + tok + "'");
    return value;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(0, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << content;
    if (!out) throw Error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Complex files
// ---------------------------------------------------------------------------

SimplicialComplex parse_complex(std::istream& in) {
    SimplicialComplex K;
    std::string line;
    long lineno = 0;
    long cur_dim = -1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::vector<std::string> tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (tokens[0] == "dim") {
            if (tokens.size() != 2) throw ParseError(lineno, "expected 'dim k'");
            cur_dim = parse_long(tokens[1], lineno);
            if (cur_dim < 0) throw ParseError(lineno, "dimension must be nonnegative");
            if (static_cast<long>(K.cells.size()) <= cur_dim)
                K.cells.resize(static_cast<std::size_t>(cur_dim) + 1);
            continue;
        }
        if (cur_dim < 0) throw ParseError(lineno, "cell listed before any 'dim' header");
        std::vector<int> cell;
        for (const auto& tok : tokens) {
            const long v = parse_long(tok, lineno);
            if (v > std::numeric_limits<int>::max() || v < std::numeric_limits<int>::min())
                throw ParseError(lineno, "vertex id out of range: " + tok);
            cell.push_back(static_cast<int>(v));
        }
        if (static_cast<long>(cell.size()) != cur_dim + 1)
            throw ParseError(lineno, "cell has " + std::to_string(cell.size()) +
                                         " vertices, expected " + std::to_string(cur_dim + 1));
        K.cells[static_cast<std::size_t>(cur_dim)].push_back(std::move(cell));
    }
    validate_complex(K);
    return K;
}

SimplicialComplex load_complex(const std::string& path) {
    std::istringstream in(read_text_file(path));
    try {
        return parse_complex(in);
    } catch (ParseError& e) {
        throw ParseError(e.line, path + ": " + e.what());
    }
}

std::string emit_complex(const SimplicialComplex& K) {
    std::ostringstream out;
    for (std::size_t k = 0; k < K.cells.size(); ++k) {
        out << "dim " << k << "\n";
        for (const auto& cell : K.cells[k]) {
            for (std::size_t i = 0; i < cell.size(); ++i) out << (i ? " " : "") << cell[i];
            out << "\n";
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Graph files
// ---------------------------------------------------------------------------

Graph parse_graph(std::istream& in) {
    std::vector<std::pair<long, long>> edges;
    long max_vertex = -1;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::vector<std::string> tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (tokens.size() != 2) throw ParseError(lineno, "expected 'u v' edge line");
        const long u = parse_long(tokens[0], lineno);
        const long v = parse_long(tokens[1], lineno);
        if (u < 0 || v < 0) throw ParseError(lineno, "vertex ids must be nonnegative");
        edges.emplace_back(u, v);
        max_vertex = std::max({max_vertex, u, v});
    }
    return graph_from_edges(max_vertex + 1, edges);
}

Graph load_graph(const std::string& path) {
    std::istringstream in(read_text_file(path));
    try {
        return parse_graph(in);
    } catch (ParseError& e) {
        throw ParseError(e.line, path + ": " + e.what());
    }
}

std::string emit_graph(const Graph& G) {
    std::ostringstream out;
    for (long v = 0; v < G.n; ++v)
        for (long u : G.adj[static_cast<std::size_t>(v)])
            if (u > v) out << v << " " << u << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Permutation representation files
// ---------------------------------------------------------------------------

PermutationRep parse_rep(std::istream& in) {
    PermutationRep rep;
    std::string line;
    long lineno = 0;
    bool have_degree = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::vector<std::string> tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (!have_degree) {
            if (tokens.size() != 2 || tokens[0] != "degree")
                throw ParseError(lineno, "expected 'degree n' as the first line");
            rep.degree = parse_long(tokens[1], lineno);
            if (rep.degree < 1) throw ParseError(lineno, "degree must be at least 1");
            have_degree = true;
            continue;
        }
        if (static_cast<long>(tokens.size()) != rep.degree)
            throw ParseError(lineno, "generator line has " + std::to_string(tokens.size()) +
                                         " images, expected " + std::to_string(rep.degree));
        std::vector<int> perm;
        for (const auto& tok : tokens) {
            const long img = parse_long(tok, lineno);
            if (img < 0 || img >= rep.degree)
                throw ParseError(lineno, "sheet image out of range [0, " +
                                             std::to_string(rep.degree) + "): " + tok);
            perm.push_back(static_cast<int>(img));
        }
        rep.generators.push_back(std::move(perm));
    }
    if (!have_degree) throw ParseError(lineno ? lineno : 1, "missing 'degree n' header");
    return rep;
}

PermutationRep load_rep(const std::string& path) {
    std::istringstream in(read_text_file(path));
    try {
        return parse_rep(in);
    } catch (ParseError& e) {
        throw ParseError(e.line, path + ": " + e.what());
    }
}

std::string emit_rep(const PermutationRep& rep) {
    std::ostringstream out;
    out << "degree " << rep.degree << "\n";
    for (const auto& perm : rep.generators) {
        for (std::size_t i = 0; i < perm.size(); ++i) out << (i ? " " : "") << perm[i];
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Surface files (JSON)
// ---------------------------------------------------------------------------

HyperbolicSurface parse_surface(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, std::string("invalid JSON: ") + e.what());
    }
    try {
        HyperbolicSurface S;
        S.label = j.value("label", std::string{});
        if (!j.contains("generators") || !j["generators"].is_array() || j["generators"].empty())
            throw ParseError(0, "surface needs a nonempty 'generators' array");
        for (const auto& g : j["generators"]) {
            if (!g.is_array() || g.size() != 4)
                throw ParseError(0, "each generator must be 4 numbers, row-major");
            Eigen::Matrix2d m;
            m << g[0].get<double>(), g[1].get<double>(), g[2].get<double>(), g[3].get<double>();
            S.generators.push_back(m);
        }
        if (j.contains("relator"))
            for (const auto& letter : j["relator"]) S.relator.push_back(letter.get<int>());
        if (j.contains("basepoint")) {
            const auto& b = j["basepoint"];
            if (!b.is_array() || b.size() != 2) throw ParseError(0, "basepoint must be [re, im]");
            S.basepoint = {b[0].get<double>(), b[1].get<double>()};
        }
        S.area = j.value("area", 0.0);
        S.genus = j.value("genus", 0L);
        S.domain_radius = j.value("domain_radius", 0.0);
        validate_surface(S);
        return S;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("bad surface JSON value: ") + e.what());
    }
}

HyperbolicSurface load_surface(const std::string& path) { return parse_surface(read_text_file(path)); }

std::string emit_surface(const HyperbolicSurface& S) {
    ordered_json j;
    j["label"] = S.label;
    j["generators"] = ordered_json::array();
    for (const auto& g : S.generators) j["generators"].push_back({g(0, 0), g(0, 1), g(1, 0), g(1, 1)});
    j["relator"] = S.relator;
    j["basepoint"] = {S.basepoint.real(), S.basepoint.imag()};
    j["area"] = S.area;
    j["genus"] = S.genus;
    j["domain_radius"] = S.domain_radius;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Tower persistence
// ---------------------------------------------------------------------------

void save_tower(const CoverTower& tower, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_text_file((fs::path(dir) / "base.cplx").string(), emit_complex(tower.base));
    ordered_json j;
    j["family"] = tower.family;
    j["is_chain"] = tower.is_chain;
    j["base"] = "base.cplx";
    j["levels"] = ordered_json::array();
    for (std::size_t i = 0; i < tower.levels.size(); ++i) {
        const CoverLevel& level = tower.levels[i];
        const std::string name = "level_" + std::to_string(i + 1) + ".cplx";
        write_text_file((fs::path(dir) / name).string(), emit_complex(level.complex));
        ordered_json entry;
        entry["file"] = name;
        entry["degree"] = level.degree;
        entry["is_normal"] = level.is_normal;
        entry["is_connected"] = level.is_connected;
        j["levels"].push_back(entry);
    }
    write_text_file((fs::path(dir) / "tower.json").string(), j.dump(2) + "\n");
}

CoverTower load_tower(const std::string& path) {
    namespace fs = std::filesystem;
    // accept either the manifest file or the directory it lives in
    const std::string manifest_path =
        fs::is_directory(path) ? (fs::path(path) / "tower.json").string() : path;
    ordered_json j;
    try {
        j = ordered_json::parse(read_text_file(manifest_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, manifest_path + ": invalid JSON: " + e.what());
    }
    const fs::path dir = fs::path(manifest_path).parent_path();
    try {
        CoverTower tower;
        tower.family = j.value("family", std::string{});
        tower.is_chain = j.value("is_chain", false);
        tower.base = load_complex((dir / j.at("base").get<std::string>()).string());
        tower.presentation = spanning_tree_generators(tower.base);
        for (const auto& entry : j.at("levels")) {
            CoverLevel level;
            level.complex = load_complex((dir / entry.at("file").get<std::string>()).string());
            level.degree = entry.at("degree").get<long>();
            level.is_normal = entry.at("is_normal").get<bool>();
            level.is_connected = entry.at("is_connected").get<bool>();
            tower.levels.push_back(std::move(level));
        }
        if (tower.levels.empty()) throw ParseError(0, manifest_path + ": tower has no levels");
        for (std::size_t i = 1; i < tower.levels.size(); ++i)
            if (tower.levels[i].degree < tower.levels[i - 1].degree)
                throw ValidationError(manifest_path + ": level degrees must be nondecreasing");
        return tower;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, manifest_path + ": bad tower manifest: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

RunManifest make_manifest(const std::string& command, const std::vector<std::string>& input_paths,
                          const std::vector<std::pair<std::string, std::string>>& params) {
    RunManifest m;
    m.command = command;
    m.version = "llb 0.1.0";
    for (const auto& path : input_paths) m.inputs.emplace_back(path, fnv1a_hex(read_text_file(path)));
    m.params = params;
    return m;
}

}  // namespace llb
