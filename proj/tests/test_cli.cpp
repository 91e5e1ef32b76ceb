#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "rgg/io.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return RGG_CLI_PATH; }

struct RunResult {
    int exit_code = -1;
    std::string out;
};

fs::path make_temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("rgg_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

RunResult run_cli(const std::string& args, const fs::path& dir, const std::string& env = "") {
    fs::path outfile = dir / "stdout.txt";
    std::string cmd = env + " " + std::string(cli_path()) + " " + args + " > " +
                      outfile.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream f(outfile);
    std::stringstream ss;
    ss << f.rdbuf();
    r.out = ss.str();
    return r;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream f(p);
    f << s;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string combined_hash(const std::string& stdout_text) {
    auto pos = stdout_text.find("combined_output_hash ");
    REQUIRE(pos != std::string::npos);
    return stdout_text.substr(pos + 21, 16);
}

const std::string sim_cfg =
    "family = gilbert\nweight = power\nalpha = 1.0\nd = 2\nt = 5\nreplicates = 4\neps = 0.3\n";

} // namespace

TEST_CASE("simulate: outputs, reproducibility, worker independence", "[cli]") {
    auto dir = make_temp_dir("sim");
    write_text(dir / "run.cfg", sim_cfg);
    std::string base = "simulate --config " + (dir / "run.cfg").string() + " --seed 11 ";

    auto r1 = run_cli(base + "--workers 1 --out " + (dir / "a").string(), dir);
    REQUIRE(r1.exit_code == 0);
    CHECK(fs::exists(dir / "a" / "samples.csv"));
    CHECK(fs::exists(dir / "a" / "report.json"));
    CHECK(fs::exists(dir / "a" / "manifest.json"));

    std::string samples = slurp(dir / "a" / "samples.csv");
    int rows = 0;
    for (char ch : samples)
        if (ch == '\n') ++rows;
    CHECK(rows == 5); // header + 4 replicates

    auto r2 = run_cli(base + "--workers 4 --out " + (dir / "b").string(), dir);
    REQUIRE(r2.exit_code == 0);
    CHECK(combined_hash(r1.out) == combined_hash(r2.out));
    CHECK(slurp(dir / "a" / "samples.csv") == slurp(dir / "b" / "samples.csv"));

    auto r3 = run_cli(base + "--out " + (dir / "c").string(), dir);
    CHECK(combined_hash(r3.out) == combined_hash(r1.out)); // rerun, same seed

    auto r4 = run_cli("simulate --config " + (dir / "run.cfg").string() + " --seed 12 --out " +
                          (dir / "d").string(),
                      dir);
    CHECK(combined_hash(r4.out) != combined_hash(r1.out));

    // output dir via environment variable
    auto r5 = run_cli(base, dir, "RGG_OUTPUT_DIR=" + (dir / "envout").string());
    REQUIRE(r5.exit_code == 0);
    CHECK(fs::exists(dir / "envout" / "samples.csv"));
}

TEST_CASE("simulate: config and capacity errors", "[cli]") {
    auto dir = make_temp_dir("err");
    write_text(dir / "bad.cfg",
               "family = gilbert\nd = 2\nt = 5,5\nreplicates = 4\neps = 0.3\n");
    CHECK(run_cli("simulate --config " + (dir / "bad.cfg").string(), dir).exit_code == 2);

    write_text(dir / "nogrid.cfg", "family = gilbert\nd = 2\nreplicates = 4\n");
    CHECK(run_cli("simulate --config " + (dir / "nogrid.cfg").string(), dir).exit_code == 2);

    write_text(dir / "run.cfg", sim_cfg);
    CHECK(run_cli("simulate --config " + (dir / "run.cfg").string() + " --max-points 2 --out " +
                      (dir / "cap").string(),
                  dir)
              .exit_code == 3);

    CHECK(run_cli("nonsense-subcommand", dir).exit_code == 2);
}

TEST_CASE("variance-scan: injection mode and missing grid", "[cli]") {
    auto dir = make_temp_dir("scan");
    std::string inj = "t,var\n";
    for (double t : {10.0, 20.0, 40.0, 80.0}) {
        inj += rgg::format_double(t) + "," + rgg::format_double(7.0 * t * t * t) + "\n";
    }
    write_text(dir / "inj.csv", inj);
    write_text(dir / "inj.cfg", "inject = " + (dir / "inj.csv").string() + "\nd = 3\n");
    auto r = run_cli("variance-scan --config " + (dir / "inj.cfg").string() + " --out " +
                         (dir / "o").string(),
                     dir);
    REQUIRE(r.exit_code == 0);
    auto pos = r.out.find("slope ");
    REQUIRE(pos != std::string::npos);
    double slope = std::stod(r.out.substr(pos + 6));
    CHECK(std::fabs(slope - 3.0) < 1e-9);
    CHECK(fs::exists(dir / "o" / "scan.csv"));

    write_text(dir / "missing.cfg", "family = onng\nd = 1\nalpha = 0.5\nreplicates = 4\n");
    CHECK(run_cli("variance-scan --config " + (dir / "missing.cfg").string(), dir).exit_code == 2);
}

TEST_CASE("clt-distance: degenerate input gives the numeric-error exit", "[cli]") {
    auto dir = make_temp_dir("clt");
    write_text(dir / "degen.cfg",
               "family = gilbert\nalpha = 1\nd = 2\nt = 0.05,0.1\nreplicates = 2\neps = 0.001\n");
    CHECK(run_cli("clt-distance --config " + (dir / "degen.cfg").string() + " --out " +
                      (dir / "o").string(),
                  dir)
              .exit_code == 4);

    write_text(dir / "cp.cfg", "model = compound_poisson\nt = 10,100\nreplicates = 400\n");
    std::string base = "clt-distance --config " + (dir / "cp.cfg").string() + " --seed 5 --out ";
    auto a = run_cli(base + (dir / "a").string(), dir);
    auto b = run_cli(base + (dir / "b").string(), dir);
    REQUIRE(a.exit_code == 0);
    CHECK(combined_hash(a.out) == combined_hash(b.out));
    CHECK(fs::exists(dir / "a" / "distances.csv"));
}

TEST_CASE("verify: pass, fault injection, suite selection", "[cli]") {
    auto dir = make_temp_dir("verify");
    auto ok = run_cli("verify --seed 3 --workers 2 --out " + (dir / "v").string(), dir);
    REQUIRE(ok.exit_code == 0);
    CHECK(ok.out.find("FAIL") == std::string::npos);

    auto bad = run_cli("verify --suite oracle --inject-fault --out " + (dir / "vf").string(), dir);
    CHECK(bad.exit_code == 5);
    CHECK(bad.out.find("FAIL oracle") != std::string::npos);

    auto sub = run_cli("verify --suite product --out " + (dir / "vs").string(), dir);
    REQUIRE(sub.exit_code == 0);
    CHECK(sub.out.find("PASS product") != std::string::npos);
    CHECK(sub.out.find("oracle") == std::string::npos);
    std::string vj = slurp(dir / "vs" / "verify.json");
    CHECK(vj.find("\"product\"") != std::string::npos);
    CHECK(vj.find("\"oracle\"") == std::string::npos);
}

TEST_CASE("constants: pinned row, range validation, stable schema", "[cli]") {
    auto dir = make_temp_dir("const");
    auto r = run_cli("constants --out " + (dir / "c").string(), dir);
    REQUIRE(r.exit_code == 0);
    std::string csv = slurp(dir / "c" / "constants.csv");
    REQUIRE(csv.rfind("d,c,c_abs_error,evaluations,beta1\n", 0) == 0);
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line); // header
    std::getline(ss, line); // d=1 row
    auto comma = line.find(',');
    REQUIRE(line.substr(0, comma) == "1");
    double c1 = std::stod(line.substr(comma + 1));
    CHECK(std::fabs(c1 - 0.5827) <= 1e-3);

    write_text(dir / "bad.cfg", "d_min = 1\nd_max = 9\n");
    CHECK(run_cli("constants --config " + (dir / "bad.cfg").string(), dir).exit_code == 2);
}

TEST_CASE("mecke and poincare subcommands succeed", "[cli]") {
    auto dir = make_temp_dir("mp");
    write_text(dir / "m.cfg", "body.kind = ball\nbody.radius = 1\nd = 2\nintensity = 5\nreplicates = 300\n");
    auto m = run_cli("mecke --config " + (dir / "m.cfg").string() + " --seed 5 --workers 2 --out " +
                         (dir / "m").string(),
                     dir);
    REQUIRE(m.exit_code == 0);
    CHECK(fs::exists(dir / "m" / "mecke.csv"));

    write_text(dir / "p.cfg", "d = 2\nintensity = 1\nreplicates = 200\np = 1.5,2\n");
    auto p = run_cli("poincare --config " + (dir / "p.cfg").string() + " --seed 5 --workers 2 --out " +
                         (dir / "p").string(),
                     dir);
    REQUIRE(p.exit_code == 0);
    CHECK(fs::exists(dir / "p" / "poincare.csv"));
}

TEST_CASE("key-value config parsing and csv quoting", "[cli]") {
    std::stringstream ss("# comment\n a.b = 1.5 \n name = x,y \n\nflag=on\n");
    auto cfg = rgg::parse_key_value(ss);
    CHECK(cfg.at("a.b") == "1.5");
    CHECK(cfg.at("name") == "x,y");
    CHECK(cfg.at("flag") == "on");
    std::stringstream bad("novalue\n");
    CHECK_THROWS_AS(rgg::parse_key_value(bad), rgg::argument_error);

    CHECK(rgg::csv_field("plain") == "plain");
    CHECK(rgg::csv_field("a,b") == "\"a,b\"");
    CHECK(rgg::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");

    auto xs = rgg::parse_double_list("1, 2.5 ,3e-2");
    REQUIRE(xs.size() == 3);
    CHECK(xs[2] == Catch::Approx(0.03));
    CHECK_THROWS_AS(rgg::parse_double_list("1,zz"), std::exception);

    // hashing is stable and content-sensitive
    CHECK(rgg::hash_hex(rgg::fnv1a64(std::string("abc"))) !=
          rgg::hash_hex(rgg::fnv1a64(std::string("abd"))));
}
