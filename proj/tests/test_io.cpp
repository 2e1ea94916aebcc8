#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "llb/covers.hpp"
#include "llb/errors.hpp"
#include "llb/hyperbolic.hpp"
#include "llb/io.hpp"
#include "llb/local_stats.hpp"
#include "llb/simplicial.hpp"

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& tag) {
    fs::path d = fs::temp_directory_path() / ("llb_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LLB_CLI_PATH) + " " + args;
    int status = std::system(cmd.c_str());
    if (status < 0) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) { return llb::read_text_file(p.string()); }

}  // namespace

TEST_CASE("complex files round trip") {
    for (const llb::SimplicialComplex& K :
         {llb::genus2_complex(), llb::rose2_complex(), llb::filled_triangle()}) {
        std::istringstream in(llb::emit_complex(K));
        auto K2 = llb::parse_complex(in);
        CHECK(K2.cells == K.cells);
    }
}

TEST_CASE("complex parse errors carry line numbers") {
    auto expect_line = [](const std::string& text, long line) {
        std::istringstream in(text);
        try {
            llb::parse_complex(in);
            FAIL("expected a parse error");
        } catch (const llb::ParseError& e) {
            CHECK(e.line == line);
        }
    };
    expect_line("0 1\n", 1);                          // cell before any dim header
    expect_line("dim 0\n0\ndim 1\n0 1 2\n", 4);      // arity mismatch
    expect_line("dim 0\n0\nx\n", 3);                 // bad token
    expect_line("dim x\n", 1);                       // bad dimension
}

TEST_CASE("graph files round trip and reject bad input") {
    llb::Graph g = llb::petersen_graph();
    std::istringstream in(llb::emit_graph(g));
    llb::Graph h = llb::parse_graph(in);
    CHECK(h.n == g.n);
    CHECK(h.adj == g.adj);

    std::istringstream bad("0 1\n1 1\n");
    CHECK_THROWS_AS(llb::parse_graph(bad), llb::NonSimplicial);
    std::istringstream dup("0 1\n1 0\n");
    CHECK_THROWS_AS(llb::parse_graph(dup), llb::DuplicateCell);
    std::istringstream trailing("0 1 2\n");
    CHECK_THROWS_AS(llb::parse_graph(trailing), llb::ParseError);
}

TEST_CASE("permutation rep files round trip") {
    llb::PermutationRep rep;
    rep.degree = 3;
    rep.generators = {{1, 2, 0}, {1, 0, 2}};
    std::istringstream in(llb::emit_rep(rep));
    auto rep2 = llb::parse_rep(in);
    CHECK(rep2.degree == rep.degree);
    CHECK(rep2.generators == rep.generators);

    std::istringstream bad("degree 2\n0 2\n");
    CHECK_THROWS_AS(llb::parse_rep(bad), llb::Error);
}

TEST_CASE("surface JSON round trips to full precision") {
    for (const llb::HyperbolicSurface& S : {llb::bolza_surface(), llb::cylinder_surface(1.5)}) {
        auto S2 = llb::parse_surface(llb::emit_surface(S));
        CHECK(S2.label == S.label);
        CHECK(S2.relator == S.relator);
        CHECK(S2.genus == S.genus);
        CHECK(S2.area == doctest::Approx(S.area).epsilon(1e-15));
        CHECK(S2.basepoint == S.basepoint);
        REQUIRE(S2.generators.size() == S.generators.size());
        for (size_t k = 0; k < S.generators.size(); ++k)
            CHECK((S2.generators[k] - S.generators[k]).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK_THROWS_AS(llb::parse_surface("{not json"), llb::ParseError);
    CHECK_THROWS_AS(llb::parse_surface("{\"generators\": []}"), llb::Error);
}

TEST_CASE("towers save and load") {
    auto dir = fresh_dir("tower");
    auto tower = llb::normal_chain_tower(llb::rose2_complex(), "mod-p", 2, 2);
    llb::save_tower(tower, dir.string());
    CHECK(fs::exists(dir / "tower.json"));
    CHECK(fs::exists(dir / "base.cplx"));
    CHECK(fs::exists(dir / "level_1.cplx"));
    CHECK(fs::exists(dir / "level_2.cplx"));

    auto loaded = llb::load_tower((dir / "tower.json").string());
    CHECK(loaded.family == tower.family);
    CHECK(loaded.is_chain == tower.is_chain);
    REQUIRE(loaded.levels.size() == tower.levels.size());
    for (size_t i = 0; i < tower.levels.size(); ++i) {
        CHECK(loaded.levels[i].degree == tower.levels[i].degree);
        CHECK(loaded.levels[i].is_normal == tower.levels[i].is_normal);
        CHECK(loaded.levels[i].complex.cells == tower.levels[i].complex.cells);
    }
    CHECK(loaded.base.cells == tower.base.cells);
    fs::remove_all(dir);
}

TEST_CASE("tower manifests with decreasing degrees are rejected") {
    auto dir = fresh_dir("badtower");
    auto tower = llb::normal_chain_tower(llb::rose2_complex(), "mod-p", 2, 2);
    llb::save_tower(tower, dir.string());
    // declare a first-level degree larger than the second level's
    std::string manifest = slurp(dir / "tower.json");
    auto pos = manifest.find("\"degree\": 4");
    REQUIRE(pos != std::string::npos);
    manifest.replace(pos, 11, "\"degree\": 64");
    llb::write_text_file((dir / "tower.json").string(), manifest);
    CHECK_THROWS_AS(llb::load_tower((dir / "tower.json").string()), llb::Error);
    fs::remove_all(dir);
}

TEST_CASE("content hashes and float formatting are stable") {
    CHECK(llb::fnv1a_hex("") == "cbf29ce484222325");  // FNV-1a offset basis
    CHECK(llb::fnv1a_hex("abc") == llb::fnv1a_hex("abc"));
    CHECK(llb::fnv1a_hex("abc") != llb::fnv1a_hex("abd"));
    CHECK(llb::format_double(0.5) == "0.5");
    CHECK(llb::format_double(1.0 / 3.0) == llb::format_double(1.0 / 3.0));
}

#ifdef LLB_CLI_PATH

TEST_CASE("cli: betti numbers as CSV") {
    auto dir = fresh_dir("cli_betti");
    const std::string data = LLB_DATA_DIR;
    const fs::path out = dir / "betti.csv";
    CHECK(run_cli("complex betti " + data + "/torus.cplx --out " + out.string()) == 0);
    const std::string csv = slurp(out);
    CHECK(csv.find("0,1\n") != std::string::npos);
    CHECK(csv.find("1,2\n") != std::string::npos);
    CHECK(csv.find("2,1\n") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cli: validation failures exit with the input-error code") {
    auto dir = fresh_dir("cli_bad");
    const fs::path bad = dir / "bad.cplx";
    llb::write_text_file(bad.string(), "dim 1\n0 1\n");  // vertices missing
    CHECK(run_cli("complex validate " + bad.string() + " > /dev/null 2>&1") == 2);
    CHECK(run_cli("complex betti /nonexistent.cplx > /dev/null 2>&1") == 2);
    CHECK(run_cli("definitely-not-a-command > /dev/null 2>&1") != 0);
    fs::remove_all(dir);
}

TEST_CASE("cli: tower build then trace run, reports are byte-identical across runs") {
    auto dir = fresh_dir("cli_tower");
    const std::string data = LLB_DATA_DIR;
    const fs::path tdir = dir / "tower";
    CHECK(run_cli("tower build " + data + "/rose2.cplx --family mod-p --p 2 --depth 1 --out " +
                  tdir.string() + " > /dev/null") == 0);
    CHECK(fs::exists(tdir / "tower.json"));

    // identical command twice: the report (manifest included) must not drift
    const fs::path rep = dir / "report.json";
    const std::string limit_cmd = "limit run " + (tdir / "tower.json").string() +
                                 " --degree 1 --t-grid 0.5:40:6 --probes 16 --seed 3 --out " +
                                 rep.string() + " > /dev/null";
    CHECK(run_cli(limit_cmd) == 0);
    const std::string a = slurp(rep);
    CHECK(run_cli(limit_cmd) == 0);
    const std::string b = slurp(rep);
    CHECK(a == b);
    CHECK(a.find("\"normalized_betti\"") != std::string::npos);
    CHECK(fs::exists(dir / "report.csv"));
    fs::remove_all(dir);
}

TEST_CASE("cli: census and compare") {
    auto dir = fresh_dir("cli_census");
    const std::string data = LLB_DATA_DIR;
    const fs::path c1 = dir / "c1.json";
    const fs::path c2 = dir / "c2.json";
    CHECK(run_cli("bs census " + data + "/cycle12.graph --radius 2 --out " + c1.string()) == 0);
    CHECK(run_cli("bs census " + data + "/cycle24.graph --radius 2 --out " + c2.string()) == 0);
    const fs::path tv = dir / "tv.txt";
    CHECK(run_cli("bs compare " + c1.string() + " " + c2.string() + " > " + tv.string()) == 0);
    CHECK(slurp(tv).find("0") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cli: thin-part profile for a graph") {
    auto dir = fresh_dir("cli_thin");
    const std::string data = LLB_DATA_DIR;
    const fs::path out = dir / "thin.csv";
    CHECK(run_cli("bs thin " + data + "/cycle12.graph --r-grid 1:8:4 --out " + out.string()) == 0);
    const std::string csv = slurp(out);
    CHECK(csv.find("r,fraction") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cli: compact dual value") {
    auto dir = fresh_dir("cli_dual");
    const fs::path out = dir / "dual.txt";
    CHECK(run_cli("hyp dual --space H2 --degree 1 > " + out.string()) == 0);
    CHECK(slurp(out).find("0.159154943092") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cli: certified surface trace on the cylinder") {
    auto dir = fresh_dir("cli_trace");
    const std::string data = LLB_DATA_DIR;
    const fs::path out = dir / "trace.csv";
    CHECK(run_cli("hyp trace " + data + "/cylinder1.json --t 1 --eps 1e-6 --points 3 --out " +
                  out.string()) == 0);
    const std::string csv = slurp(out);
    CHECK(csv.find("re,im,") != std::string::npos);
    // basepoint row first; its value is the on-axis lattice sum
    CHECK(csv.find("\n0,1,") != std::string::npos);
    fs::remove_all(dir);
}

#endif  // LLB_CLI_PATH
