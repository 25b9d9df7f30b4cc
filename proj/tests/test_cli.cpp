#include "catch_amalgamated.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "hillctl");
    std::ostringstream out, err;
    int code = hill::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(HILL_DATA_DIR) + "/potentials/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch() {
    fs::path d = fs::temp_directory_path() / "hill_cli_test";
    fs::create_directories(d);
    return d;
}

} // namespace

TEST_CASE("disc writes one CSV row per energy", "[cli]") {
    fs::path out = scratch() / "d.csv";
    Run r = run({"disc", "--potential", data("free.json"), "--emin", "0", "--emax", "10", "--n", "100", "--out",
                 out.string()});
    REQUIRE(r.code == 0);
    std::ifstream in(out);
    std::string line;
    int rows = -1;  // header
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 100);
    CHECK(slurp(out).rfind("E,D\n0,2\n", 0) == 0);
}

TEST_CASE("bands prints a band table", "[cli]") {
    Run r = run({"bands", "--potential", data("mathieu.json"), "--R", "2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("index,lo,hi,length,ids_mass") != std::string::npos);
    CHECK(r.out.find("bands: 3 bands") != std::string::npos);
}

TEST_CASE("ids below the spectrum is a domain error", "[cli]") {
    Run r = run({"ids", "--potential", data("free.json"), "--E", "-5"});
    CHECK(r.code == 1);
    CHECK(r.err.find("not elliptic") != std::string::npos);
    CHECK(r.err.find("[floquet]") != std::string::npos);
}

TEST_CASE("usage errors exit with 2", "[cli]") {
    CHECK(run({}).code == 2);
    CHECK(run({"disc"}).code == 2);
    CHECK(run({"bands", "--potential", "/no/such/file.json"}).code == 2);
    CHECK(run({"bands", "--potential", data("free.json"), "--bogus"}).code == 2);
    CHECK(run({"disc", "--potential", data("free.json"), "--emin", "3", "--emax", "1"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("reports embed the configuration and are reproducible", "[cli]") {
    fs::path a = scratch() / "a.json", b = scratch() / "b.json";
    std::vector<std::string> args = {"--seed", "4", "--report", a.string(), "verify-ids-bound", "--potential",
                                     data("mathieu.json"), "--E", "0.63", "--E", "-1.067", "--trials", "40"};
    Run r1 = run(args);
    REQUIRE(r1.code == 0);
    args[3] = b.string();
    Run r2 = run(args);
    REQUIRE(r2.code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(r1.out == r2.out);
    auto j = hill::json::parse(slurp(a));
    CHECK(j["config"]["seed"] == 4);
    CHECK(j["config"]["command"] == "verify-ids-bound");
    CHECK(j["config"]["quadrature"]["nq"] == 64);
    CHECK(j["config"]["rel_tol"] == 1e-12);
}

TEST_CASE("lyap, measure and gordon", "[cli]") {
    Run l = run({"lyap", "--potential", data("free.json"), "--E", "-4"});
    CHECK(l.code == 0);
    auto lpos = l.out.find("\n-4,");
    REQUIRE(lpos != std::string::npos);
    CHECK(std::abs(std::stod(l.out.substr(lpos + 4)) - 2.0) < 1e-9);
    Run m = run({"measure", "--potential", data("free.json"), "--R", "3"});
    CHECK(m.code == 0);
    auto pos = m.out.find("Leb = ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::abs(std::stod(m.out.substr(pos + 6)) - 3.0) < 1e-8);
    Run g = run({"gordon", "--potential", data("cos2pi.json"), "--period", "0.5"});
    CHECK(g.code == 0);
    CHECK(g.out.find("defect 4") != std::string::npos);
}

TEST_CASE("thin reports a budget failure as a domain error", "[cli]") {
    fs::path out = scratch() / "thin.json";
    Run r = run({"thin", "--potential", data("cos2pi.json"), "--epsilon", "0.25", "--N", "100", "--max-nprime", "2",
                 "--out", out.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("thinspec/break-points") != std::string::npos);
}

TEST_CASE("hd0 and cover work on a stopped schedule", "[cli]") {
    fs::path out = scratch() / "sched.json";
    Run r = run({"hd0", "--potential", data("cos2pi.json"), "--epsilon0", "1e-14", "--depth", "1", "--N", "10",
                 "--out", out.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("0 of 1 levels") != std::string::npos);
    Run c = run({"cover", "--schedule", out.string()});
    CHECK(c.code == 1);
}
