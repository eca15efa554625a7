#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "hgf/diagnostics.hpp"
#include "hgf/field_io.hpp"
#include "hgf/hyperbolic.hpp"
#include "hgf/sampling.hpp"

using namespace hgf;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int status = -1;
    std::string output;  // stdout and stderr interleaved
};

// Runs the installed driver with the given arguments, capturing output.
CmdResult run_cli(const std::string& args) {
    CmdResult r;
    std::string cmd = std::string(HGF_CLI_BIN) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, got);
    int rc = pclose(p);
    r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return r;
}

// Fresh working directory per test, removed on scope exit.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("hgf_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
    REQUIRE(f.good());
}

const char* kPerturbedConfig =
    "[surface]\n"
    "dim = 2\n"
    "resolution = 16x32\n"
    "rho0 = 1.0\n"
    "perturb_degree = 2\n"
    "perturb_amplitude = 0.1\n"
    "[flow]\n"
    "alpha = 1.0\n"
    "[time]\n"
    "t_end = 2.0\n"
    "osc_tol = 1e-4\n";

} // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("linear-rate prints the model table") {
    CmdResult r = run_cli("linear-rate --dim 2 --alpha 1 --rho-inf 1 --l-max 4");
    CHECK(r.status == 0);
    std::istringstream is(r.output);
    std::string header;
    std::getline(is, header);
    CHECK(header == "l rate");
    int l;
    double rate;
    for (int expect = 0; expect <= 4; ++expect) {
        REQUIRE((is >> l >> rate));
        CHECK(l == expect);
        CHECK(rate == linear_rate(2, 1.0, 1.0, expect));  // 17-digit round trip
    }
}

TEST_CASE("ball-table agrees with the closed forms at every radius") {
    CmdResult r = run_cli("ball-table --dim 2 --rho 0.5 --rho 1 --rho 2");
    CHECK(r.status == 0);
    std::istringstream is(r.output);
    std::string header;
    std::getline(is, header);
    CHECK(header == "rho volume A0 A1 A2 kbar max_rel_mismatch");
    for (double expect : {0.5, 1.0, 2.0}) {
        double rho, vol, a0, a1, a2, kbar, mis;
        REQUIRE((is >> rho >> vol >> a0 >> a1 >> a2 >> kbar >> mis));
        CHECK(rho == expect);
        CHECK(vol == doctest::Approx(ball_volume(2, expect)).epsilon(1e-12));
        CHECK(a0 == doctest::Approx(ball_quermass(2, 0, expect)).epsilon(1e-12));
        CHECK(a1 == doctest::Approx(ball_quermass(2, 1, expect)).epsilon(1e-12));
        CHECK(a2 == doctest::Approx(ball_quermass(2, 2, expect)).epsilon(1e-12));
        CHECK(kbar == doctest::Approx(ball_kbar(2, expect)).epsilon(1e-12));
        CHECK(mis <= 1e-8);
    }
    CHECK(run_cli("ball-table --dim 1 --rho 1").status == 0);
    CHECK(run_cli("ball-table --dim 2 --rho -1").status == 1);
}

TEST_CASE("simulate runs a ball to its horizon and stays put") {
    TempDir tmp("ball");
    write(tmp.path / "ball.ini",
          "[surface]\ndim = 2\nresolution = 16x32\nrho0 = 1.0\n[time]\nt_end = 0.2\n");
    CmdResult r =
        run_cli("simulate --config " + tmp.sub("ball.ini") + " --out " + tmp.sub("run") + " --quiet");
    CHECK(r.status == 0);
    CHECK(r.output.empty());

    auto manifest = nlohmann::json::parse(slurp(tmp.path / "run/manifest.json"));
    CHECK(manifest["command"] == "simulate");
    CHECK(manifest["resolution"] == "16x32");
    CHECK(manifest["dim"] == 2);
    CHECK(manifest["finished"].is_string());

    std::istringstream series(slurp(tmp.path / "run/series.jsonl"));
    std::string line;
    int rows = 0;
    while (std::getline(series, line)) {
        auto row = nlohmann::json::parse(line);
        CHECK(row["osc"].get<double>() <= 1e-12);
        ++rows;
    }
    CHECK(rows >= 3);

    auto summary = nlohmann::json::parse(slurp(tmp.path / "run/summary.json"));
    CHECK(summary["ball_distance"].get<double>() <= 1e-10);
    CHECK(summary["volume_drift"].get<double>() <= 1e-12);
    CHECK(summary["decay_rate"].is_null());  // no oscillation to fit on a ball

    // a second run into the same directory must refuse, not overwrite
    CmdResult again =
        run_cli("simulate --config " + tmp.sub("ball.ini") + " --out " + tmp.sub("run"));
    CHECK(again.status == 1);
    CHECK(again.output.find("already holds a run") != std::string::npos);
}

TEST_CASE("simulate relaxes a perturbed ball below its stop tolerance") {
    TempDir tmp("pert");
    write(tmp.path / "pert.ini", kPerturbedConfig);
    CmdResult r = run_cli("simulate --config " + tmp.sub("pert.ini") + " --out " + tmp.sub("a") +
                          " --quiet");
    CHECK(r.status == 0);

    auto summary = nlohmann::json::parse(slurp(tmp.path / "a/summary.json"));
    CHECK(summary["osc"].get<double>() <= 1e-4);
    CHECK(summary["ball_distance"].get<double>() <= 1e-4);
    CHECK(summary["t_final"].get<double>() < 2.0);  // the oscillation rule stopped it early
    CHECK(summary["decay_rate"].get<double>() > 1.0);
    CHECK(summary["dissipation_mismatch"].get<double>() <= 0.02);

    // reruns are bit-identical in everything but the manifest wall times
    CmdResult r2 = run_cli("simulate --config " + tmp.sub("pert.ini") + " --out " + tmp.sub("b") +
                           " --quiet");
    CHECK(r2.status == 0);
    for (const char* f : {"series.jsonl", "series.csv", "initial.csv", "final.csv", "summary.json"})
        CHECK(slurp(tmp.path / "a" / f) == slurp(tmp.path / "b" / f));

    // the final snapshot reads back onto the grid it was written from
    auto g = make_grid(2, 16, 32);
    std::ifstream fin(tmp.path / "a/final.csv");
    RadialSurface s;
    s.rho = read_field_csv(g, fin);
    CHECK(kappa_range(geometry(s)).first > 0.0);
}

TEST_CASE("simulate rejects bad configurations with line numbers") {
    TempDir tmp("bad");
    write(tmp.path / "typo.ini",
          "[surface]\ndim = 2\nresolution = 16x32\n[flow]\nalphaa = 1.0\n[time]\nt_end = 1\n");
    CmdResult r = run_cli("simulate --config " + tmp.sub("typo.ini") + " --out " + tmp.sub("x"));
    CHECK(r.status == 1);
    CHECK(r.output.find("typo.ini:5") != std::string::npos);
    CHECK(r.output.find("alphaa") != std::string::npos);
    CHECK(!fs::exists(tmp.path / "x/manifest.json"));  // nothing written on config error

    write(tmp.path / "noval.ini", "[surface]\ndim\n");
    r = run_cli("simulate --config " + tmp.sub("noval.ini") + " --out " + tmp.sub("x"));
    CHECK(r.status == 1);
    CHECK(r.output.find("noval.ini:2: expected key = value") != std::string::npos);

    write(tmp.path / "dup.ini", "[time]\nt_end = 1\nt_end = 2\n");
    r = run_cli("simulate --config " + tmp.sub("dup.ini") + " --out " + tmp.sub("x"));
    CHECK(r.status == 1);
    CHECK(r.output.find("duplicate key") != std::string::npos);

    write(tmp.path / "nonconvex.ini",
          "[surface]\ndim = 1\nresolution = 64\nrho0 = 1.0\nperturb_degree = 2\n"
          "perturb_amplitude = 0.5\n[time]\nt_end = 1\n");
    r = run_cli("simulate --config " + tmp.sub("nonconvex.ini") + " --out " + tmp.sub("x"));
    CHECK(r.status == 1);
    CHECK(r.output.find("convexity certificate") != std::string::npos);

    CHECK(run_cli("simulate --config /nonexistent.ini --out " + tmp.sub("x")).status == 1);
    CHECK(run_cli("simulate --bogus-flag").status == 1);
}

TEST_CASE("simulate reports unrecoverable stiffness as a numerical failure") {
    TempDir tmp("stiff");
    // a forced first step so large that twenty halvings cannot rescue it
    write(tmp.path / "stiff.ini",
          "[surface]\ndim = 2\nresolution = 12x24\nrho0 = 1.0\nperturb_degree = 2\n"
          "perturb_amplitude = 0.1\n[time]\nt_end = 1e12\ninitial_dt = 1e12\n");
    CmdResult r = run_cli("simulate --config " + tmp.sub("stiff.ini") + " --out " + tmp.sub("x"));
    CHECK(r.status == 2);
    CHECK(r.output.find("numerical failure") != std::string::npos);
}

TEST_CASE("simulate honors the resolution override flag") {
    TempDir tmp("res");
    write(tmp.path / "ball.ini",
          "[surface]\ndim = 2\nresolution = 16x32\nrho0 = 1.0\n[time]\nt_end = 0.01\n");
    CmdResult r = run_cli("simulate --config " + tmp.sub("ball.ini") + " --out " + tmp.sub("run") +
                          " --resolution 12x24 --quiet");
    CHECK(r.status == 0);
    auto manifest = nlohmann::json::parse(slurp(tmp.path / "run/manifest.json"));
    CHECK(manifest["resolution"] == "12x24");
    auto g = make_grid(2, 12, 24);
    std::ifstream fin(tmp.path / "run/final.csv");
    CHECK_NOTHROW(read_field_csv(g, fin));
}

TEST_CASE("sample-convex writes deterministic certified bodies") {
    TempDir tmp("sample");
    std::string fixed = " --seed 7 --count 3 --cap 0.1 --resolution 16x32 --quiet";
    CHECK(run_cli("sample-convex --out " + tmp.sub("a") + fixed).status == 0);
    CHECK(run_cli("sample-convex --out " + tmp.sub("b") + fixed).status == 0);

    auto g = make_grid(2, 16, 32);
    for (int i = 0; i < 3; ++i) {
        std::string name = "body_00" + std::to_string(i) + ".csv";
        std::string a = slurp(tmp.path / "a" / name);
        CHECK(a == slurp(tmp.path / "b" / name));  // bit-identical rerun
        std::istringstream is(a);
        RadialSurface s;
        s.rho = read_field_csv(g, is);
        CHECK(kappa_range(geometry(s)).first > 0.0);
        // the library regenerates the same body from the recorded per-body seed
        CHECK(s.rho.v == sample_convex_body(g, 1.0, 0.1, 7 + i).rho.v);
    }
    auto index = nlohmann::json::parse(slurp(tmp.path / "a/samples.json"));
    CHECK(index["acceptance_rate"].get<double>() > 0.5);
    CHECK(index["bodies"].size() == 3);

    // cap 0 must yield exact balls
    CHECK(run_cli("sample-convex --out " + tmp.sub("balls") +
                  " --seed 3 --count 1 --cap 0 --resolution 16x32 --rho0 0.7 --quiet")
              .status == 0);
    std::istringstream is(slurp(tmp.path / "balls/body_000.csv"));
    ScalarField rho = read_field_csv(g, is);
    for (double v : rho.v) CHECK(v == 0.7);

    // an unusable cap is an input error, reported before any body is written
    CmdResult bad = run_cli("sample-convex --out " + tmp.sub("bad") +
                            " --seed 3 --count 1 --cap 0.9 --rho0 0.3 --resolution 16x32");
    CHECK(bad.status == 1);
    CHECK(bad.output.find("acceptance rate") != std::string::npos);
    CHECK(!fs::exists(tmp.path / "bad/samples.json"));
}

TEST_CASE("sampled bodies feed back into simulate") {
    TempDir tmp("roundtrip");
    CHECK(run_cli("sample-convex --out " + tmp.sub("bodies") +
                  " --seed 11 --count 1 --cap 0.1 --resolution 16x32 --quiet")
              .status == 0);
    write(tmp.path / "run.ini",
          "[surface]\ndim = 2\nresolution = 16x32\ninitial = " + tmp.sub("bodies") +
              "/body_000.csv\n[time]\nt_end = 0.2\n");
    CmdResult r =
        run_cli("simulate --config " + tmp.sub("run.ini") + " --out " + tmp.sub("run") + " --quiet");
    CHECK(r.status == 0);
    auto summary = nlohmann::json::parse(slurp(tmp.path / "run/summary.json"));
    CHECK(summary["kappa_min"].get<double>() > 0.0);
    CHECK(summary["volume_drift"].get<double>() <= 1e-12);

    // resolution mismatch between grid and file is an input error
    write(tmp.path / "mismatch.ini",
          "[surface]\ndim = 2\nresolution = 12x24\ninitial = " + tmp.sub("bodies") +
              "/body_000.csv\n[time]\nt_end = 0.2\n");
    CHECK(run_cli("simulate --config " + tmp.sub("mismatch.ini") + " --out " + tmp.sub("y"))
              .status == 1);
}

TEST_CASE("verify-af campaign lands every gap above the floor") {
    TempDir tmp("af");
    CmdResult r = run_cli("verify-af --out " + tmp.sub("a") +
                          " --seed 7 --count 20 --cap 0.1 --resolution 16x32 --quiet");
    CHECK(r.status == 0);

    auto summary = nlohmann::json::parse(slurp(tmp.path / "a/af_summary.json"));
    CHECK(summary["all_above_floor"].get<bool>());
    CHECK(summary["min_gap"].get<double>() > 0.0);

    std::istringstream csv(slurp(tmp.path / "a/af.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "seed,volume,outer,psi,gap");
    int n = 0;
    auto g = make_grid(2, 16, 32);
    while (std::getline(csv, line)) {
        std::istringstream row(line);
        std::string seed, volume, outer, psi, gap;
        std::getline(row, seed, ',');
        std::getline(row, volume, ',');
        std::getline(row, outer, ',');
        std::getline(row, psi, ',');
        std::getline(row, gap, ',');
        CHECK(std::stod(gap) > 0.0);
        if (n == 0) {  // the row regenerates from its own seed column
            AFReport again = af_verify(sample_convex_body(g, 1.0, 0.1, std::stoul(seed)));
            CHECK(std::stod(volume) == again.volume);
            CHECK(std::stod(gap) == again.gap);
        }
        ++n;
    }
    CHECK(n == 20);

    CHECK(run_cli("verify-af --out " + tmp.sub("b") +
                  " --seed 7 --count 20 --cap 0.1 --resolution 16x32 --quiet")
              .status == 0);
    CHECK(slurp(tmp.path / "a/af.csv") == slurp(tmp.path / "b/af.csv"));
    CHECK(slurp(tmp.path / "a/af_summary.json") == slurp(tmp.path / "b/af_summary.json"));
}

TEST_SUITE_END();
