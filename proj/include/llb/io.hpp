#pragma once

#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "llb/covers.hpp"
#include "llb/hyperbolic.hpp"
#include "llb/local_stats.hpp"
#include "llb/simplicial.hpp"

namespace llb {

// ---------------------------------------------------------------------------
// Text formats (line oriented, '#' starts a comment)
// ---------------------------------------------------------------------------

// Complex file: one `dim k` header per dimension, then one cell per line as
// space-separated vertex ids. Parse errors carry 1-based line numbers; the
// parsed complex is validated before being returned.
SimplicialComplex parse_complex(std::istream& in);
SimplicialComplex load_complex(const std::string& path);
std::string emit_complex(const SimplicialComplex& K);

// Graph file: one `u v` edge per line; the vertex count is max index + 1.
Graph parse_graph(std::istream& in);
Graph load_graph(const std::string& path);
std::string emit_graph(const Graph& G);

// Permutation representation file: first line `degree n`, then one line per
// generator listing the images of 0..n-1.
PermutationRep parse_rep(std::istream& in);
PermutationRep load_rep(const std::string& path);
std::string emit_rep(const PermutationRep& rep);

// Surface file (JSON): generator matrices row-major under "generators",
// signed relator word, optional label / basepoint / area / genus /
// domain_radius.
HyperbolicSurface parse_surface(const std::string& json_text);
HyperbolicSurface load_surface(const std::string& path);
std::string emit_surface(const HyperbolicSurface& S);

// ---------------------------------------------------------------------------
// Tower persistence: one complex file per level plus a tower.json manifest
// (family, degrees, normality/connectivity flags, chain flag).
// ---------------------------------------------------------------------------

void save_tower(const CoverTower& tower, const std::string& dir);
CoverTower load_tower(const std::string& manifest_path);  // reps are not persisted

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

// Provenance block embedded in every report: rerunning the same command on
// the same inputs reproduces the report byte-for-byte.
struct RunManifest {
    std::string command;
    std::string version;
    std::vector<std::pair<std::string, std::string>> inputs;  // path -> content hash
    std::vector<std::pair<std::string, std::string>> params;  // key -> value
};

RunManifest make_manifest(const std::string& command,
                          const std::vector<std::string>& input_paths,
                          const std::vector<std::pair<std::string, std::string>>& params);

// 64-bit FNV-1a content hash, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

// Shortest-representation float formatting with 12 significant digits,
// identical across runs.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace llb
