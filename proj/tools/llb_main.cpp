// llb: volume-normalized Betti numbers along cover towers, heat-trace
// plateaus, local graph statistics, and hyperbolic quotient heat kernels.
#include <CLI11.hpp>
#include <json.hpp>

#include <complex>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "llb/covers.hpp"
#include "llb/errors.hpp"
#include "llb/heat.hpp"
#include "llb/hyperbolic.hpp"
#include "llb/io.hpp"
#include "llb/local_stats.hpp"
#include "llb/parallel.hpp"
#include "llb/simplicial.hpp"

namespace {

using llb::format_double;
using ordered_json = nlohmann::ordered_json;

std::string join_command(int argc, char** argv) {
    std::string cmd;
    for (int i = 0; i < argc; ++i) {
        if (i) cmd += " ";
        cmd += argv[i];
    }
    return cmd;
}

std::vector<double> parse_grid(const std::string& spec, bool log_spaced) {
    double a = 0, b = 0;
    long steps = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(spec);
    if (!(ss >> a >> c1 >> b >> c2 >> steps) || c1 != ':' || c2 != ':' || !ss.eof())
        throw llb::ValidationError("grid must be 'a:b:steps', got '" + spec + "'");
    if (steps < 1) throw llb::ValidationError("grid needs at least one step");
    if (steps == 1) return {a};
    if (log_spaced && !(a > 0)) throw llb::ValidationError("log-spaced grid needs a > 0");
    std::vector<double> grid;
    for (long i = 0; i < steps; ++i) {
        const double f = static_cast<double>(i) / (steps - 1);
        grid.push_back(log_spaced ? a * std::pow(b / a, f) : a + (b - a) * f);
    }
    return grid;
}

ordered_json manifest_json(const llb::RunManifest& m) {
    ordered_json j;
    j["command"] = m.command;
    j["version"] = m.version;
    j["inputs"] = ordered_json::array();
    for (const auto& [path, hash] : m.inputs) j["inputs"].push_back({{"path", path}, {"fnv1a", hash}});
    j["params"] = ordered_json::object();
    for (const auto& [key, value] : m.params) j["params"][key] = value;
    return j;
}

std::string manifest_csv_header(const llb::RunManifest& m) {
    std::string out = "# command: " + m.command + "\n# version: " + m.version + "\n";
    for (const auto& [path, hash] : m.inputs) out += "# input: " + path + " fnv1a=" + hash + "\n";
    return out;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content;
    else
        llb::write_text_file(out_path, content);
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

void run_complex_validate(const std::string& file) {
    const llb::SimplicialComplex K = llb::load_complex(file);
    std::cout << "valid complex: dim " << K.dim();
    for (int k = 0; k <= K.dim(); ++k) std::cout << (k ? ", " : " with ") << K.num_cells(k) << " cells[" << k << "]";
    std::cout << "\n";
}

void run_complex_betti(const llb::RunManifest& manifest, const std::string& file, int degree,
                       const std::string& out) {
    const llb::SimplicialComplex K = llb::load_complex(file);
    std::string csv = manifest_csv_header(manifest) + "degree,betti\n";
    if (degree >= 0) {
        csv += std::to_string(degree) + "," + std::to_string(llb::betti_number(K, degree)) + "\n";
    } else {
        const std::vector<long> betti = llb::betti_vector(K);
        for (std::size_t k = 0; k < betti.size(); ++k)
            csv += std::to_string(k) + "," + std::to_string(betti[k]) + "\n";
    }
    emit(out, csv);
}

void run_tower_build(const llb::RunManifest& manifest, const std::string& file,
                     const std::string& family, long p, int depth, const std::string& out_dir) {
    const llb::SimplicialComplex K = llb::load_complex(file);
    const llb::CoverTower tower = family == "free-chain"
                                      ? llb::free_subgroup_chain_tower(K, depth)
                                      : llb::normal_chain_tower(K, family, p, depth);
    llb::save_tower(tower, out_dir);
    llb::write_text_file((std::filesystem::path(out_dir) / "run.json").string(),
                         manifest_json(manifest).dump(2) + "\n");
    std::cout << "tower with " << tower.levels.size() << " levels, degrees";
    for (const auto& level : tower.levels) std::cout << " " << level.degree;
    std::cout << ", chain=" << (tower.is_chain ? "yes" : "no") << ", written to " << out_dir << "\n";
}

void run_tower_cover(const std::string& complex_file, const std::string& rep_file,
                     const std::string& out) {
    const llb::SimplicialComplex K = llb::load_complex(complex_file);
    const llb::Presentation P = llb::spanning_tree_generators(K);
    const llb::PermutationRep rep = llb::load_rep(rep_file);
    const llb::SimplicialComplex C = llb::cover_from_permutations(K, P, rep);
    emit(out, llb::emit_complex(C));
    std::cerr << "degree-" << rep.degree << " cover: " << C.num_cells(0) << " vertices, "
              << (C.dim() >= 1 ? C.num_cells(1) : 0) << " edges\n";
}

void run_limit(const llb::RunManifest& manifest, const std::string& tower_file, int degree,
              const std::string& t_grid_spec, const std::string& mode_name, int probes,
              std::uint64_t seed, const std::string& out) {
    const llb::CoverTower tower = llb::load_tower(tower_file);
    const std::vector<double> t_grid = parse_grid(t_grid_spec, true);
    llb::TraceMode mode = llb::TraceMode::Auto;
    if (mode_name == "exact") mode = llb::TraceMode::Exact;
    if (mode_name == "stochastic") mode = llb::TraceMode::Stochastic;

    const llb::HeatTraceSeries series = llb::heat_trace_series(tower, degree, t_grid, probes, seed, mode);
    const llb::ConvergenceReport conv = llb::normalized_betti_sequence(tower, degree);

    ordered_json j;
    j["manifest"] = manifest_json(manifest);
    j["k"] = degree;
    j["t_grid"] = ordered_json::array();
    for (double t : t_grid) j["t_grid"].push_back(format_double(t));
    j["levels"] = ordered_json::array();
    for (std::size_t li = 0; li < series.levels.size(); ++li) {
        const llb::HeatLevel& level = series.levels[li];
        ordered_json entry;
        entry["level"] = li + 1;
        entry["degree"] = level.degree;
        entry["betti"] = conv.betti[li];
        entry["normalized_betti"] = llb::to_string(conv.normalized[li]);
        entry["mode"] = level.exact ? "exact" : "stochastic";
        entry["trace"] = ordered_json::array();
        for (double v : level.values) entry["trace"].push_back(format_double(v));
        if (!level.exact) {
            entry["std_error"] = ordered_json::array();
            for (double v : level.std_errors) entry["std_error"].push_back(format_double(v));
            entry["bias_bound"] = format_double(level.bias_bound);
        }
        j["levels"].push_back(entry);
    }
    j["fitted_limit"] = llb::to_string(conv.fitted_limit);
    j["converging"] = conv.converging;
    if (series.levels.size() < 2) {
        j["plateau"] = nullptr;
        j["plateau_error"] = "plateau extrapolation needs at least 2 tower levels";
    } else {
        try {
            std::vector<llb::Rational> nb;
            for (std::size_t li = 0; li < series.levels.size(); ++li)
                nb.emplace_back(conv.betti[li], conv.degrees[li]);
            const llb::PlateauEstimate plateau = llb::l2_betti_plateau(series, nb);
            j["plateau"] = {{"value", format_double(plateau.value)},
                            {"t_star", format_double(plateau.t_star)},
                            {"tolerance", format_double(plateau.tolerance)},
                            {"domination_ok", plateau.domination_ok}};
        } catch (const llb::GridTooCoarse& e) {
            j["plateau"] = nullptr;
            j["plateau_error"] = e.what();
        }
    }

    std::string csv = manifest_csv_header(manifest) + "level,degree,normalized_betti";
    for (double t : t_grid) csv += ",trace@" + format_double(t);
    csv += "\n";
    for (std::size_t li = 0; li < series.levels.size(); ++li) {
        csv += std::to_string(li + 1) + "," + std::to_string(series.levels[li].degree) + "," +
               llb::to_string(conv.normalized[li]);
        for (double v : series.levels[li].values) csv += "," + format_double(v);
        csv += "\n";
    }

    if (out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        llb::write_text_file(out, j.dump(2) + "\n");
        std::filesystem::path csv_path(out);
        csv_path.replace_extension(".csv");
        llb::write_text_file(csv_path.string(), csv);
        std::cout << "report: " << out << " and " << csv_path.string() << "\n";
    }
}

void run_bs_census(const llb::RunManifest& manifest, const std::string& file, long radius,
                   const std::string& out) {
    const llb::Graph G = llb::load_graph(file);
    const llb::BallStatistics stats = llb::ball_census(G, radius);
    ordered_json j;
    j["manifest"] = manifest_json(manifest);
    j["radius"] = stats.r;
    j["sample_size"] = stats.sample_size;
    j["histogram"] = ordered_json::array();
    for (const auto& [code, freq] : stats.histogram)
        j["histogram"].push_back({{"code", code}, {"frequency", llb::to_string(freq)}});
    emit(out, j.dump(2) + "\n");
}

llb::BallStatistics load_census(const std::string& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(llb::read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw llb::ParseError(0, path + ": invalid JSON: " + e.what());
    }
    try {
        llb::BallStatistics stats;
        stats.r = j.at("radius").get<long>();
        stats.sample_size = j.at("sample_size").get<long>();
        for (const auto& entry : j.at("histogram"))
            stats.histogram.emplace_back(entry.at("code").get<std::string>(),
                                         llb::parse_rational(entry.at("frequency").get<std::string>()));
        return stats;
    } catch (const nlohmann::json::exception& e) {
        throw llb::ParseError(0, path + ": bad census JSON: " + e.what());
    }
}

void run_bs_compare(const std::string& a_path, const std::string& b_path) {
    const llb::Rational tv = llb::tv_distance(load_census(a_path), load_census(b_path));
    std::cout << "tv_distance " << llb::to_string(tv) << " (" << format_double(llb::to_double(tv))
              << ")\n";
}

void run_bs_thin(const llb::RunManifest& manifest, const std::string& file,
                 const std::string& r_grid_spec, int samples, std::uint64_t seed,
                 const std::string& out) {
    const std::vector<double> r_grid = parse_grid(r_grid_spec, false);
    std::string csv = manifest_csv_header(manifest) + "r,fraction,error_bar\n";
    if (std::filesystem::path(file).extension() == ".json") {
        const llb::HyperbolicSurface S = llb::load_surface(file);
        for (const auto& pt : llb::thin_part_fraction_surface(S, r_grid, samples, seed))
            csv += format_double(pt.r) + "," + format_double(pt.fraction) + "," +
                   format_double(pt.error_bar) + "\n";
    } else {
        const llb::Graph G = llb::load_graph(file);
        for (double r : r_grid) {
            if (!(r > 0)) throw llb::ValidationError("thin-part radius must be positive");
            long num = 0, den = 1;
            const llb::Rational frac = llb::thin_part_fraction(
                G, llb::Rational(static_cast<long long>(std::llround(r * 1000000)), 1000000));
            num = static_cast<long>(frac.numerator());
            den = static_cast<long>(frac.denominator());
            csv += format_double(r) + "," + std::to_string(num) + "/" + std::to_string(den) + ",0\n";
        }
    }
    emit(out, csv);
}

void run_hyp_trace(const llb::RunManifest& manifest, const std::string& file, double t, double eps,
                   int points, std::uint64_t seed, const std::string& out) {
    const llb::HyperbolicSurface S = llb::load_surface(file);
    std::vector<std::complex<double>> xs{S.basepoint};
    if (points > 1) {
        const auto sampled = llb::sample_surface(S, points - 1, seed);
        xs.insert(xs.end(), sampled.begin(), sampled.end());
    }
    std::string csv = manifest_csv_header(manifest) + "re,im,inj_rad,value,truncation_bound,images_used,radius\n";
    for (const auto& x : xs) {
        const llb::KernelValue kv = llb::surface_heat_diagonal(S, x, t, eps);
        csv += format_double(x.real()) + "," + format_double(x.imag()) + "," +
               format_double(llb::injectivity_radius(S, x)) + "," + format_double(kv.value) + "," +
               format_double(kv.truncation_bound) + "," + std::to_string(kv.images_used) + "," +
               format_double(kv.radius) + "\n";
    }
    emit(out, csv);
}

void run_hyp_dual(const std::string& space, int degree) {
    std::cout << format_double(llb::compact_dual_l2_betti(space, degree)) << "\n";
}

void run_hyp_genus_limit(long max_genus, const std::string& out) {
    std::vector<long> genera;
    for (long g = 2; g <= std::min(max_genus, 12L); ++g) genera.push_back(g);
    for (long g = 100; g <= max_genus; g *= 100) genera.push_back(g);
    if (max_genus > 12 && (genera.empty() || genera.back() != max_genus)) genera.push_back(max_genus);
    std::string csv = "genus,normalized_over_pi,deviation_over_pi\n";
    for (const auto& row : llb::genus_limit_check(genera))
        csv += std::to_string(row.genus) + "," + llb::to_string(row.normalized) + "," +
               llb::to_string(row.deviation) + "\n";
    emit(out, csv);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"volume-normalized Betti numbers, heat-trace plateaus, and local statistics "
                 "along towers of finite covers"};
    app.require_subcommand(1);
    int threads = llb::thread_count();
    app.add_option("--threads", threads, "worker threads (default: hardware)");

    const std::string command = join_command(argc, argv);

    // complex
    CLI::App* complex_cmd = app.add_subcommand("complex", "simplicial complex utilities");
    complex_cmd->require_subcommand(1);
    std::string cx_file, cx_out;
    int cx_degree = -1;
    CLI::App* cx_validate = complex_cmd->add_subcommand("validate", "check closure and shape");
    cx_validate->add_option("file", cx_file)->required();
    CLI::App* cx_betti = complex_cmd->add_subcommand("betti", "exact Betti numbers (CSV)");
    cx_betti->add_option("file", cx_file)->required();
    cx_betti->add_option("--degree", cx_degree, "single degree (default: all)");
    cx_betti->add_option("--out", cx_out, "output file (default: stdout)");

    // tower
    CLI::App* tower_cmd = app.add_subcommand("tower", "towers of finite covers");
    tower_cmd->require_subcommand(1);
    std::string tw_file, tw_family = "mod-p", tw_out, tw_rep;
    long tw_p = 2;
    int tw_depth = 2;
    CLI::App* tw_build = tower_cmd->add_subcommand("build", "build a cover tower");
    tw_build->add_option("file", tw_file)->required();
    tw_build->add_option("--family", tw_family, "mod-p | cyclic | free-chain")->required();
    tw_build->add_option("--p", tw_p, "prime/modulus for mod-p and cyclic families");
    tw_build->add_option("--depth", tw_depth, "number of levels")->required();
    tw_build->add_option("--out", tw_out, "output directory")->required();
    CLI::App* tw_cover = tower_cmd->add_subcommand("cover", "single cover from a permutation rep");
    tw_cover->add_option("file", tw_file)->required();
    tw_cover->add_option("rep", tw_rep)->required();
    tw_cover->add_option("--out", cx_out, "output file (default: stdout)");

    // limit
    CLI::App* limit_cmd = app.add_subcommand("limit", "normalized Betti / heat-trace runs");
    limit_cmd->require_subcommand(1);
    std::string lk_tower, lk_grid = "0.5:200:60", lk_mode = "auto", lk_out;
    int lk_degree = 1, lk_probes = 64;
    std::uint64_t lk_seed = 1;
    CLI::App* lk_run = limit_cmd->add_subcommand("run", "trace series + plateau for a tower");
    lk_run->add_option("tower", lk_tower, "tower.json manifest")->required();
    lk_run->add_option("--degree", lk_degree, "form degree k");
    lk_run->add_option("--t-grid", lk_grid, "a:b:steps, log-spaced");
    lk_run->add_option("--mode", lk_mode, "auto | exact | stochastic")
        ->check(CLI::IsMember({"auto", "exact", "stochastic"}));
    lk_run->add_option("--probes", lk_probes, "stochastic probe count");
    lk_run->add_option("--seed", lk_seed, "RNG seed");
    lk_run->add_option("--out", lk_out, "report JSON path (CSV written alongside)");

    // bs
    CLI::App* bs_cmd = app.add_subcommand("bs", "local (Benjamini-Schramm style) statistics");
    bs_cmd->require_subcommand(1);
    std::string bs_file, bs_out, bs_a, bs_b, bs_rgrid = "0.5:5:10";
    long bs_radius = 1;
    int bs_samples = 2000;
    std::uint64_t bs_seed = 1;
    CLI::App* bs_census = bs_cmd->add_subcommand("census", "rooted r-ball census of a graph");
    bs_census->add_option("file", bs_file)->required();
    bs_census->add_option("--radius", bs_radius)->required();
    bs_census->add_option("--out", bs_out, "output JSON (default: stdout)");
    CLI::App* bs_compare = bs_cmd->add_subcommand("compare", "TV distance of two censuses");
    bs_compare->add_option("a", bs_a)->required();
    bs_compare->add_option("b", bs_b)->required();
    CLI::App* bs_thin = bs_cmd->add_subcommand("thin", "thin-part fraction profile");
    bs_thin->add_option("file", bs_file, "graph file or surface .json")->required();
    bs_thin->add_option("--r-grid", bs_rgrid, "a:b:steps, linear");
    bs_thin->add_option("--samples", bs_samples, "Monte-Carlo samples (surfaces)");
    bs_thin->add_option("--seed", bs_seed);
    bs_thin->add_option("--out", bs_out, "output CSV (default: stdout)");

    // hyp
    CLI::App* hyp_cmd = app.add_subcommand("hyp", "hyperbolic-surface heat kernels");
    hyp_cmd->require_subcommand(1);
    std::string hy_file, hy_out, hy_space = "H2";
    double hy_t = 0.5, hy_eps = 1e-6;
    int hy_points = 1, hy_degree = 1;
    long hy_max_genus = 1000000;
    std::uint64_t hy_seed = 1;
    CLI::App* hy_trace = hyp_cmd->add_subcommand("trace", "certified diagonal heat kernel values");
    hy_trace->add_option("file", hy_file, "surface .json")->required();
    hy_trace->add_option("--t", hy_t, "time in the certified window");
    hy_trace->add_option("--eps", hy_eps, "tail tolerance");
    hy_trace->add_option("--points", hy_points, "number of sample points (basepoint first)");
    hy_trace->add_option("--seed", hy_seed);
    hy_trace->add_option("--out", hy_out, "output CSV (default: stdout)");
    CLI::App* hy_dual = hyp_cmd->add_subcommand("dual", "compact-dual normalized Betti value");
    hy_dual->add_option("--space", hy_space, "H2 | H3");
    hy_dual->add_option("--degree", hy_degree);
    CLI::App* hy_genus = hyp_cmd->add_subcommand("genus-limit", "exact genus-limit table");
    hy_genus->add_option("--max-genus", hy_max_genus);
    hy_genus->add_option("--out", hy_out, "output CSV (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    llb::thread_count() = std::max(1, threads);

    try {
        auto params = [&](std::initializer_list<std::pair<std::string, std::string>> kv) {
            return std::vector<std::pair<std::string, std::string>>(kv);
        };
        if (cx_validate->parsed()) run_complex_validate(cx_file);
        if (cx_betti->parsed())
            run_complex_betti(
                llb::make_manifest(command, {cx_file}, params({{"degree", std::to_string(cx_degree)}})),
                cx_file, cx_degree, cx_out);
        if (tw_build->parsed())
            run_tower_build(llb::make_manifest(command, {tw_file},
                                               params({{"family", tw_family},
                                                       {"p", std::to_string(tw_p)},
                                                       {"depth", std::to_string(tw_depth)}})),
                            tw_file, tw_family, tw_p, tw_depth, tw_out);
        if (tw_cover->parsed()) run_tower_cover(tw_file, tw_rep, cx_out);
        if (lk_run->parsed())
            run_limit(llb::make_manifest(command, {lk_tower},
                                        params({{"degree", std::to_string(lk_degree)},
                                                {"t_grid", lk_grid},
                                                {"mode", lk_mode},
                                                {"probes", std::to_string(lk_probes)},
                                                {"seed", std::to_string(lk_seed)}})),
                     lk_tower, lk_degree, lk_grid, lk_mode, lk_probes, lk_seed, lk_out);
        if (bs_census->parsed())
            run_bs_census(llb::make_manifest(command, {bs_file},
                                             params({{"radius", std::to_string(bs_radius)}})),
                          bs_file, bs_radius, bs_out);
        if (bs_compare->parsed()) run_bs_compare(bs_a, bs_b);
        if (bs_thin->parsed())
            run_bs_thin(llb::make_manifest(command, {bs_file},
                                           params({{"r_grid", bs_rgrid},
                                                   {"samples", std::to_string(bs_samples)},
                                                   {"seed", std::to_string(bs_seed)}})),
                        bs_file, bs_rgrid, bs_samples, bs_seed, bs_out);
        if (hy_trace->parsed())
            run_hyp_trace(llb::make_manifest(command, {hy_file},
                                             params({{"t", format_double(hy_t)},
                                                     {"eps", format_double(hy_eps)},
                                                     {"points", std::to_string(hy_points)},
                                                     {"seed", std::to_string(hy_seed)}})),
                          hy_file, hy_t, hy_eps, hy_points, hy_seed, hy_out);
        if (hy_dual->parsed()) run_hyp_dual(hy_space, hy_degree);
        if (hy_genus->parsed()) run_hyp_genus_limit(hy_max_genus, hy_out);
    } catch (const llb::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const llb::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const llb::ResourceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
