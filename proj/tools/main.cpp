// hgflow -- command-line driver for the volume-preserving curvature-flow
// library: run configured simulations, generate random convex initial data,
// run isoperimetric verification campaigns, and print reference tables.
//
// Exit codes: 0 success, 1 configuration/input error, 2 numerical failure.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "config.hpp"
#include "hgf/diagnostics.hpp"
#include "hgf/errors.hpp"
#include "hgf/field_io.hpp"
#include "hgf/flow.hpp"
#include "hgf/hyperbolic.hpp"
#include "hgf/sampling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hgf;

namespace {

#ifndef HGFLOW_VERSION
#define HGFLOW_VERSION "0.0.0"
#endif

std::string now_utc() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// "AxB" (or "A×B") for n = 2, a single node count for n = 1.
GridPtr grid_from_resolution(int dim, const std::string& spec) {
    std::string s = spec;
    std::size_t cross = s.find("×");
    if (cross != std::string::npos) s.replace(cross, std::string("×").size(), "x");
    if (dim == 1) {
        if (s.find('x') != std::string::npos)
            throw ConfigError("n = 1 takes a single node count, got '" + spec + "'");
        return make_grid(1, std::stoi(s));
    }
    std::size_t x = s.find('x');
    if (x == std::string::npos)
        throw ConfigError("n = 2 resolution must look like 32x64, got '" + spec + "'");
    return make_grid(2, std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1)));
}

std::string resolution_string(const GridPtr& g) {
    if (g->dim() == 1) return std::to_string(g->ntheta());
    return std::to_string(g->ntheta()) + "x" + std::to_string(g->nphi());
}

// Zonal Legendre bump: rho0 + amp * P_deg(cos theta) on S^2, rho0 + amp *
// cos(deg theta) on S^1. The same family the test corpus relaxes.
RadialSurface zonal_surface(const GridPtr& g, double rho0, int deg, double amp) {
    RadialSurface s;
    s.rho = ScalarField(g, rho0);
    if (amp == 0.0) return s;
    for (int k = 0; k < g->nodes(); ++k) {
        double t = g->node_theta(k);
        s.rho.v[k] += g->dim() == 1 ? amp * std::cos(deg * t)
                                    : amp * std::legendre(deg, std::cos(t));
    }
    return s;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    f << text;
    if (!f) throw ConfigError("cannot write " + path.string());
}

fs::path prepare_out_dir(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + out + ": " + ec.message());
    return dir;
}

double json_or_null(std::optional<double> v, json& j, const char* key) {
    if (v)
        j[key] = *v;
    else
        j[key] = nullptr;
    return v.value_or(0.0);
}

// ---- simulate ----------------------------------------------------------------

struct SimulateArgs {
    std::string config_path;
    std::string out_dir;
    std::string resolution_override;
    unsigned long seed = 0;
    bool quiet = false;
};

int cmd_simulate(const SimulateArgs& args) {
    cli::Config cfg = cli::Config::load(args.config_path);

    int dim = cfg.integer("surface.dim", 2);
    if (dim != 1 && dim != 2) throw ConfigError("surface.dim must be 1 or 2");
    std::string res = cfg.text("surface.resolution", dim == 1 ? "96" : "32x64");
    if (!args.resolution_override.empty()) res = args.resolution_override;
    GridPtr grid = grid_from_resolution(dim, res);

    RadialSurface initial;
    if (cfg.has("surface.initial")) {
        std::string path = cfg.text("surface.initial");
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot open initial surface " + path);
        try {
            initial.rho = read_field_csv(grid, f);
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + e.what());
        }
    } else {
        initial = zonal_surface(grid, cfg.number("surface.rho0", 1.0),
                                cfg.integer("surface.perturb_degree", 2),
                                cfg.number("surface.perturb_amplitude", 0.0));
    }

    FlowConfig flow;
    flow.alpha = cfg.number("flow.alpha", 1.0);
    std::string par = cfg.text("flow.parametrization", "radial");
    if (par == "radial")
        flow.parametrization = Parametrization::Radial;
    else if (par == "support")
        flow.parametrization = Parametrization::Support;
    else
        throw ConfigError("flow.parametrization must be radial or support, got '" + par + "'");
    flow.volume_correction = cfg.flag("flow.volume_correction", true);
    flow.filter_beta = cfg.number("flow.filter_beta", 1.0);
    flow.recenter_osc = cfg.number("flow.recenter_osc", 0.5);
    flow.stop.t_end = cfg.number("time.t_end", 1.0);
    flow.stop.osc_tol = cfg.number("time.osc_tol", 0.0);
    flow.dt.initial = cfg.number("time.initial_dt", 0.0);
    flow.dt.safety = cfg.number("time.safety", 0.8);
    flow.dt.max_step = cfg.number("time.max_step", 0.01);
    cfg.finish();

    // the initial-data convexity certificate is an input check, not a
    // numerical failure: fail before any output is written
    if (kappa_range(geometry(initial)).first <= 0.0)
        throw ConfigError("initial surface fails the convexity certificate");

    fs::path dir = prepare_out_dir(args.out_dir);
    if (fs::exists(dir / "manifest.json"))
        throw ConfigError("output directory " + args.out_dir + " already holds a run");

    json manifest{{"command", "simulate"},
                  {"version", HGFLOW_VERSION},
                  {"config_path", args.config_path},
                  {"config", cfg.raw()},
                  {"dim", dim},
                  {"resolution", resolution_string(grid)},
                  {"seed", args.seed},
                  {"started", now_utc()},
                  {"finished", nullptr},
                  {"outputs",
                   {{"series_jsonl", (dir / "series.jsonl").string()},
                    {"series_csv", (dir / "series.csv").string()},
                    {"snapshot_initial", (dir / "initial.csv").string()},
                    {"snapshot_final", (dir / "final.csv").string()},
                    {"summary", (dir / "summary.json").string()}}}};
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    {
        std::ofstream f(dir / "initial.csv");
        write_field_csv(initial.rho, "rho", f);
    }

    RunResult rr;
    try {
        rr = run(initial, flow);
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }

    {
        std::ofstream f(dir / "series.jsonl");
        write_series_jsonl(rr.series, f);
    }
    {
        std::ofstream f(dir / "series.csv");
        write_series_csv(rr.series, f);
    }
    {
        std::ofstream f(dir / "final.csv");
        write_field_csv(rr.final_state.radial.rho, "rho", f);
    }

    const FlowState& fin = rr.final_state;
    const std::vector<SeriesRow>& rows = rr.series.rows;
    json summary{{"t_final", fin.t},
                 {"steps", fin.step_count},
                 {"osc", fin.osc},
                 {"kappa_min", fin.kappa_min},
                 {"kappa_max", fin.kappa_max},
                 {"volume", fin.functionals.volume},
                 {"volume_drift",
                  std::abs(rows.back().volume - rr.series.initial_volume) /
                      rr.series.initial_volume}};
    BallDistance bd = ball_distance(fin.radial);
    summary["ball_distance"] = bd.distance;
    AFReport af = af_verify(fin.radial);
    summary["af_gap"] = af.gap;

    std::optional<double> decay, diss, vark0;
    try {
        decay = fit_decay(rr.series).rate;
    } catch (const WindowError&) {}
    try {
        diss = dissipation_identity(rr.series).mismatch;
        vark0 = variational_identity(rr.series, 0).mismatch;
    } catch (const WindowError&) {}
    json_or_null(decay, summary, "decay_rate");
    json_or_null(diss, summary, "dissipation_mismatch");
    json_or_null(vark0, summary, "variational_mismatch_k0");
    write_text(dir / "summary.json", summary.dump(2) + "\n");

    manifest["finished"] = now_utc();
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");

    if (!args.quiet)
        std::cout << "t = " << format_g17(fin.t) << "  steps = " << fin.step_count
                  << "  osc = " << format_g17(fin.osc)
                  << "  ball distance = " << format_g17(bd.distance) << "\n";
    return 0;
}

// ---- sample-convex -------------------------------------------------------------

struct SampleArgs {
    std::string out_dir;
    unsigned long seed = 0;
    int count = 10;
    double cap = 0.1;
    double rho0 = 1.0;
    int dim = 2;
    std::string resolution;
    bool quiet = false;
};

GridPtr sample_grid(const SampleArgs& a) {
    if (a.dim != 1 && a.dim != 2) throw ConfigError("--dim must be 1 or 2");
    std::string res = a.resolution.empty() ? (a.dim == 1 ? "96" : "32x64") : a.resolution;
    return grid_from_resolution(a.dim, res);
}

int cmd_sample_convex(const SampleArgs& args) {
    GridPtr grid = sample_grid(args);
    fs::path dir = prepare_out_dir(args.out_dir);

    SampleStats stats;
    std::vector<RadialSurface> bodies =
        sample_convex_bodies(grid, args.rho0, args.cap, args.seed, args.count, &stats);

    json index{{"command", "sample-convex"},
               {"version", HGFLOW_VERSION},
               {"dim", args.dim},
               {"resolution", resolution_string(grid)},
               {"seed", args.seed},
               {"count", args.count},
               {"cap", args.cap},
               {"rho0", args.rho0},
               {"acceptance_rate", stats.proposed ? (double)stats.accepted / stats.proposed : 1.0},
               {"bodies", json::array()}};
    for (int i = 0; i < args.count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "body_%03d.csv", i);
        std::ofstream f(dir / name);
        write_field_csv(bodies[i].rho, "rho", f);
        if (!f) throw ConfigError("cannot write " + (dir / name).string());
        index["bodies"].push_back(json{{"seed", args.seed + i}, {"path", (dir / name).string()}});
    }
    write_text(dir / "samples.json", index.dump(2) + "\n");
    if (!args.quiet)
        std::cout << "accepted " << stats.accepted << " of " << stats.proposed << " proposals\n";
    return 0;
}

// ---- verify-af ------------------------------------------------------------------

struct VerifyArgs {
    std::string out_dir;
    unsigned long seed = 7;
    int count = 100;
    double cap = 0.1;
    double rho0 = 1.0;
    int dim = 2;
    std::string resolution;
    bool quiet = false;
};

int cmd_verify_af(const VerifyArgs& args) {
    SampleArgs s;
    s.dim = args.dim;
    s.resolution = args.resolution;
    GridPtr grid = sample_grid(s);
    fs::path dir = prepare_out_dir(args.out_dir);

    std::vector<AFRow> rows;
    double min_gap = 0.0, min_rel = 0.0;
    bool first = true;
    for (int i = 0; i < args.count; ++i) {
        RadialSurface body = sample_convex_body(grid, args.rho0, args.cap, args.seed + i);
        AFReport r = af_verify(body);
        rows.push_back({args.seed + i, r.volume, r.outer, r.psi, r.gap});
        if (first || r.gap < min_gap) min_gap = r.gap;
        if (first || r.gap / r.psi < min_rel) min_rel = r.gap / r.psi;
        first = false;
    }
    {
        std::ofstream f(dir / "af.csv");
        write_af_csv(rows, f);
        if (!f) throw ConfigError("cannot write " + (dir / "af.csv").string());
    }
    json summary{{"command", "verify-af"},
                 {"version", HGFLOW_VERSION},
                 {"dim", args.dim},
                 {"resolution", resolution_string(grid)},
                 {"seed", args.seed},
                 {"count", args.count},
                 {"cap", args.cap},
                 {"rho0", args.rho0},
                 {"min_gap", min_gap},
                 {"min_gap_over_psi", min_rel},
                 {"all_above_floor", min_rel >= -1e-6}};
    write_text(dir / "af_summary.json", summary.dump(2) + "\n");
    if (!args.quiet)
        std::cout << "min gap = " << format_g17(min_gap)
                  << "  min gap/psi = " << format_g17(min_rel) << "\n";
    return min_rel >= -1e-6 ? 0 : 2;
}

// ---- linear-rate ------------------------------------------------------------------

int cmd_linear_rate(int dim, double alpha, double rho_inf, int l_max) {
    LinearizedModel m = linearized_model(dim, alpha, rho_inf, l_max);
    std::cout << "l rate\n";
    for (int l = 0; l <= l_max; ++l)
        std::cout << l << " " << format_g17(m.rates[l]) << "\n";
    return 0;
}

// ---- ball-table --------------------------------------------------------------------

int cmd_ball_table(int dim, const std::vector<double>& rhos, const std::string& resolution) {
    if (dim != 1 && dim != 2) throw ConfigError("--dim must be 1 or 2");
    GridPtr grid =
        grid_from_resolution(dim, resolution.empty() ? (dim == 1 ? "96" : "32x64") : resolution);

    std::cout << "rho volume";
    for (int k = 0; k <= dim; ++k) std::cout << " A" << k;
    std::cout << " kbar max_rel_mismatch\n";

    double worst = 0.0;
    for (double rho : rhos) {
        if (!(rho > 0.0)) throw ConfigError("ball radius must be positive");
        RadialSurface ball = ball_surface(grid, rho);
        Functionals f = quermassintegrals(geometry(ball), enclosed_volume(ball));

        double mismatch = std::abs(f.volume - ball_volume(dim, rho)) / ball_volume(dim, rho);
        for (int k = 0; k <= dim; ++k) {
            double exact = ball_quermass(dim, k, rho);
            mismatch = std::max(mismatch, std::abs(f.A[k] - exact) / std::abs(exact));
        }
        mismatch = std::max(mismatch, std::abs(f.kbar - ball_kbar(dim, rho)) / ball_kbar(dim, rho));
        worst = std::max(worst, mismatch);

        std::cout << format_g17(rho) << " " << format_g17(f.volume);
        for (int k = 0; k <= dim; ++k) std::cout << " " << format_g17(f.A[k]);
        std::cout << " " << format_g17(f.kbar) << " " << format_g17(mismatch) << "\n";
    }
    // closed forms are the ground truth here; disagreement is a numerical failure
    if (worst > 1e-8) {
        std::cerr << "quadrature disagrees with closed forms: " << format_g17(worst) << "\n";
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"volume-preserving Gauss curvature flow in hyperbolic space"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "run a configured flow to its stop rule");
    c_sim->add_option("--config", sim.config_path, "configuration file")->required();
    c_sim->add_option("--out", sim.out_dir, "output directory (one run per directory)")
        ->required();
    c_sim->add_option("--resolution", sim.resolution_override,
                      "override the configured grid resolution (AxB, or N for n = 1)");
    c_sim->add_option("--seed", sim.seed, "seed echoed into the run manifest");
    c_sim->add_flag("--quiet", sim.quiet, "suppress the progress line");

    SampleArgs smp;
    CLI::App* c_smp = app.add_subcommand("sample-convex", "draw seeded random convex bodies");
    c_smp->add_option("--out", smp.out_dir, "output directory")->required();
    c_smp->add_option("--seed", smp.seed, "base seed; body i uses seed + i");
    c_smp->add_option("--count", smp.count, "number of bodies");
    c_smp->add_option("--cap", smp.cap, "per-harmonic amplitude cap, in [0, 1)");
    c_smp->add_option("--rho0", smp.rho0, "base geodesic radius");
    c_smp->add_option("--dim", smp.dim, "boundary dimension n (1 or 2)");
    c_smp->add_option("--resolution", smp.resolution, "grid resolution");
    c_smp->add_flag("--quiet", smp.quiet, "suppress the acceptance line");

    VerifyArgs ver;
    CLI::App* c_ver = app.add_subcommand(
        "verify-af", "isoperimetric campaign: outer quermassintegral vs the ball bound");
    c_ver->add_option("--out", ver.out_dir, "output directory")->required();
    c_ver->add_option("--seed", ver.seed, "base seed; body i uses seed + i");
    c_ver->add_option("--count", ver.count, "number of bodies");
    c_ver->add_option("--cap", ver.cap, "per-harmonic amplitude cap, in [0, 1)");
    c_ver->add_option("--rho0", ver.rho0, "base geodesic radius");
    c_ver->add_option("--dim", ver.dim, "boundary dimension n (1 or 2)");
    c_ver->add_option("--resolution", ver.resolution, "grid resolution");
    c_ver->add_flag("--quiet", ver.quiet, "suppress the summary line");

    int lr_dim = 2, lr_lmax = 4;
    double lr_alpha = 1.0, lr_rho = 1.0;
    CLI::App* c_lr =
        app.add_subcommand("linear-rate", "decay rates of harmonic perturbations of a sphere");
    c_lr->add_option("--dim", lr_dim, "boundary dimension n (1 or 2)");
    c_lr->add_option("--alpha", lr_alpha, "curvature power");
    c_lr->add_option("--rho-inf", lr_rho, "limit sphere radius");
    c_lr->add_option("--l-max", lr_lmax, "largest harmonic degree");

    int bt_dim = 2;
    std::vector<double> bt_rhos{0.5, 1.0, 2.0};
    std::string bt_res;
    CLI::App* c_bt =
        app.add_subcommand("ball-table", "geodesic-ball functionals: quadrature vs closed forms");
    c_bt->add_option("--dim", bt_dim, "boundary dimension n (1 or 2)");
    c_bt->add_option("--rho", bt_rhos, "ball radii");
    c_bt->add_option("--resolution", bt_res, "grid resolution");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (c_sim->parsed()) return cmd_simulate(sim);
        if (c_smp->parsed()) return cmd_sample_convex(smp);
        if (c_ver->parsed()) return cmd_verify_af(ver);
        if (c_lr->parsed()) return cmd_linear_rate(lr_dim, lr_alpha, lr_rho, lr_lmax);
        if (c_bt->parsed()) return cmd_ball_table(bt_dim, bt_rhos, bt_res);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
