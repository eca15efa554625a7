// Acceptance suite: one self-contained check per structural property of the
// volume-preserving curvature flow, printed as a [PASS]/[FAIL] line each.
// Run with no arguments for all criteria, or pass criterion numbers to run a
// subset (the ctest entries run them one by one). Exit status is the number
// of failed criteria, capped at 1.
//
// Every tolerance below is pinned; the measured values they were calibrated
// against are quoted next to each check.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "decay_oracle.hpp"
#include "hgf/diagnostics.hpp"
#include "hgf/flow.hpp"
#include "hgf/hyperbolic.hpp"
#include "hgf/klein.hpp"
#include "hgf/sampling.hpp"
#include "hgf/sphere_grid.hpp"

using namespace hgf;

namespace {

// --- small helpers -----------------------------------------------------------

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, ap);
    va_end(ap);
    return buf;
}

struct Check {
    bool ok = true;
    std::string why; // first failing condition, for the report line
    void require(bool cond, const std::string& label) {
        if (!cond && ok) {
            ok = false;
            why = label;
        }
    }
};

RadialSurface zonal(const GridPtr& g, double rho0, double amp, int deg) {
    RadialSurface s;
    s.rho = ScalarField(g);
    for (int k = 0; k < g->nodes(); ++k) {
        double t = g->node_theta(k);
        if (g->dim() == 1) {
            s.rho.v[k] = rho0 + amp * std::cos(deg * t);
        } else {
            double c = std::cos(t);
            double p = deg == 2 ? 0.5 * (3.0 * c * c - 1.0) : 0.5 * (5.0 * c * c * c - 3.0 * c);
            s.rho.v[k] = rho0 + amp * p;
        }
    }
    return s;
}

// The degree-2 perturbed reference run shared by criteria 2, 3, 4 and 6,
// with a coarser twin for the refinement clause of criterion 3.
const RunResult& perturbed_run() {
    static RunResult r = [] {
        FlowConfig cfg;
        cfg.stop.t_end = 2.0;
        return run(zonal(make_grid(2, 24, 48), 1.0, 0.1, 2), cfg);
    }();
    return r;
}

const RunResult& perturbed_run_coarse() {
    static RunResult r = [] {
        FlowConfig cfg;
        cfg.stop.t_end = 2.0;
        return run(zonal(make_grid(2, 16, 32), 1.0, 0.1, 2), cfg);
    }();
    return r;
}

// --- criterion bodies --------------------------------------------------------

// 1. Geodesic spheres are fixed points: evolved to t = 1 they stay put to
//    1e-10 for every (n, alpha, rho0) in {1,2} x {0.5,1,2} x {0.5,1,2}.
std::string c1(Check& c) {
    double worst = 0.0;
    for (int n : {1, 2})
        for (double alpha : {0.5, 1.0, 2.0})
            for (double rho0 : {0.5, 1.0, 2.0}) {
                GridPtr g = n == 2 ? make_grid(2, 16, 32) : make_grid(1, 64);
                FlowConfig cfg;
                cfg.alpha = alpha;
                cfg.stop.t_end = 1.0;
                RunResult r = run(ball_surface(g, rho0), cfg);
                double dev = 0.0;
                for (double v : r.final_state.radial.rho.v)
                    dev = std::max(dev, std::abs(v - rho0));
                worst = std::max(worst, dev);
                c.require(dev <= 1e-10, fmt("n=%d alpha=%g rho0=%g drifted %.2e", n, alpha,
                                            rho0, dev));
            }
    return fmt("max |rho - rho0| = %.2e over 18 runs to t = 1", worst);
}

// 2. Volume preservation: with the constraint on, the recorded volume never
//    leaves the initial value by more than 1e-10 relative on the perturbed
//    run; with it off, the end-to-end drift is the stepper's O(dt^4) and
//    shrinks ~16x per halving (measured ratios ~16.3).
std::string c2(Check& c) {
    const FunctionalSeries& s = perturbed_run().series;
    double corrected = 0.0;
    for (const SeriesRow& row : s.rows)
        corrected = std::max(corrected, std::abs(row.volume / s.initial_volume - 1.0));
    c.require(corrected <= 1e-10, fmt("corrected drift %.2e > 1e-10", corrected));

    RadialSurface init = zonal(make_grid(2, 12, 24), 1.0, 0.1, 2);
    FlowConfig probe;
    StepReport rep;
    step(make_state(init, probe), probe, &rep);
    double d0 = 0.9 * rep.dt_limit;

    double drift[3];
    for (int lev = 0; lev < 3; ++lev) {
        double d = d0 / (1 << lev);
        FlowConfig cfg;
        cfg.volume_correction = false;
        cfg.dt.safety = 1.0;
        cfg.dt.max_step = d;
        cfg.stop.t_end = 40.0 * d0; // common multiple of all three steps
        RunResult r = run(init, cfg);
        drift[lev] = std::abs(r.series.rows.back().volume / r.series.initial_volume - 1.0);
    }
    double r01 = drift[0] / drift[1], r12 = drift[1] / drift[2];
    c.require(drift[0] > drift[1] && drift[1] > drift[2],
              fmt("uncorrected drifts not decreasing: %.2e %.2e %.2e", drift[0], drift[1],
                  drift[2]));
    c.require(r01 >= 11.0 && r01 <= 22.0 && r12 >= 11.0 && r12 <= 22.0,
              fmt("halving ratios %.1f, %.1f outside [11, 22]", r01, r12));
    return fmt("corrected drift %.1e; uncorrected %.1e -> %.1e -> %.1e (ratios %.1f, %.1f)",
               corrected, drift[0], drift[1], drift[2], r01, r12);
}

// 3. Dissipation identity: dA_1/dt tracks the negative covariance quadrature
//    within 2% at interior times (measured 4.5e-4 at 24x48), improves under
//    refinement (2.2e-3 at 16x32), and A_1 never increases.
std::string c3(Check& c) {
    DissipationReport fine = dissipation_identity(perturbed_run().series);
    DissipationReport coarse = dissipation_identity(perturbed_run_coarse().series);
    c.require(fine.mismatch <= 0.02, fmt("mismatch %.2e > 2%%", fine.mismatch));
    c.require(fine.mismatch < coarse.mismatch,
              fmt("no refinement gain: %.2e vs %.2e", fine.mismatch, coarse.mismatch));
    const std::vector<SeriesRow>& rows = perturbed_run().series.rows;
    for (std::size_t i = 1; i < rows.size(); ++i)
        c.require(rows[i].A[1] <= rows[i - 1].A[1] * (1.0 + 1e-12),
                  fmt("A_1 increased at t = %.4f", rows[i].t));
    return fmt("mismatch %.2e (coarse %.2e), A_1 monotone over %zu steps", fine.mismatch,
               coarse.mismatch, rows.size() - 1);
}

// 4. Variational identity for the area: dA_0/dt matches its first-variation
//    quadrature within 2% on the same run (measured 4.4e-4).
std::string c4(Check& c) {
    VariationalReport rep = variational_identity(perturbed_run().series, 0);
    c.require(rep.mismatch <= 0.02, fmt("mismatch %.2e > 2%%", rep.mismatch));
    return fmt("area-rate mismatch %.2e", rep.mismatch);
}

// 5. Convexity is preserved: min principal curvature stays positive at every
//    accepted step for 20 sampled bodies under each curvature power.
std::string c5(Check& c) {
    auto g = make_grid(2, 16, 32);
    double global_min = 1e300;
    for (double alpha : {0.5, 1.0, 2.0})
        for (unsigned long seed = 1; seed <= 20; ++seed) {
            RadialSurface body = sample_convex_body(g, 1.0, 0.1, seed);
            FlowConfig cfg;
            cfg.alpha = alpha;
            cfg.stop.t_end = 0.5;
            cfg.stop.osc_tol = 1e-8;
            double kmin = 1e300;
            long steps = 0;
            run(body, cfg, [&](const FlowState& st, const SeriesRow&) {
                kmin = std::min(kmin, st.kappa_min);
                ++steps;
            });
            c.require(steps > 0, fmt("alpha=%g seed=%lu made no steps", alpha, seed));
            c.require(kmin > 0.0, fmt("alpha=%g seed=%lu lost convexity (min %.2e)", alpha,
                                      seed, kmin));
            global_min = std::min(global_min, kmin);
        }
    return fmt("min kappa over 60 runs = %.3f", global_min);
}

// 6. Exponential convergence at the linearized rate: the rate table matches
//    a direct evolution of the linearized equation to 0.1%, and the fitted
//    decay of the nonlinear perturbed run lands within 10% of the degree-2
//    rate (measured 0.9%).
std::string c6(Check& c) {
    auto g2 = make_grid(2, 48, 96);
    struct Probe {
        double alpha, rho;
        int l, m;
        double T;
    };
    double table_worst = 0.0;
    for (const Probe& p : {Probe{1.0, 1.0, 2, 0, 0.2}, Probe{1.0, 1.0, 3, 2, 0.2},
                           Probe{1.0, 1.0, 4, 0, 0.2}, Probe{2.0, 1.0, 2, 1, 0.1},
                           Probe{1.0, 0.5, 2, 0, 0.1}}) {
        double oracle = hgf_tests::evolved_rate(g2, p.alpha, p.rho, p.l, p.m, p.T);
        double model = linear_rate(2, p.alpha, p.rho, p.l);
        double rel = std::abs(oracle / model - 1.0);
        table_worst = std::max(table_worst, rel);
        c.require(rel <= 1e-3, fmt("n=2 l=%d alpha=%g rho=%g off by %.2e", p.l, p.alpha,
                                   p.rho, rel));
    }
    auto g1 = make_grid(1, 64);
    for (int l : {2, 3}) {
        double oracle = hgf_tests::evolved_rate(g1, 0.5, 1.0, l, 1, 0.2);
        double model = linear_rate(1, 0.5, 1.0, l);
        double rel = std::abs(oracle / model - 1.0);
        table_worst = std::max(table_worst, rel);
        c.require(rel <= 1e-3, fmt("n=1 l=%d off by %.2e", l, rel));
    }

    DecayFit fit = fit_decay(perturbed_run().series);
    double lambda2 = linear_rate(2, 1.0, 1.0, 2);
    double rel = std::abs(fit.rate / lambda2 - 1.0);
    c.require(rel <= 0.10, fmt("fitted rate %.4f vs %.4f off by %.1f%%", fit.rate, lambda2,
                               100.0 * rel));
    return fmt("rate table within %.1e of the oracle; fitted %.4f vs lambda_2 %.4f (%.2f%%)",
               table_worst, fit.rate, lambda2, 100.0 * rel);
}

// 7. Cross-parametrization consistency: the radial-graph curvature and the
//    support-function curvature agree pointwise (compared at the projection's
//    contact points), the inverse Weingarten eigenvalues match 1/kappa_i, and
//    the area-weighted RMS mismatch refines at second order (the max norm is
//    limited by the two pole rings, where the projection's search jitter is
//    amplified by 1/sin^2 theta; measured RMS ratios 3.6-4.2).
std::string c7(Check& c) {
    auto norms = [](const RadialSurface& rs, double* sup, double* rms) {
        const GridPtr& g = rs.rho.grid;
        SurfaceGeometry geom = geometry(rs);
        std::vector<double> cth, cph;
        SupportSurface ss = project(rs, &cth, &cph);
        ScalarField kx = gauss_KX(ss);
        InverseWeingarten iw = inverse_weingarten(ss);
        ScalarField k_rad(g), inv1(g), inv2(g);
        for (int k = 0; k < g->nodes(); ++k) {
            k_rad[k] = geom.K[k];
            inv1[k] = 1.0 / geom.kappa1[k];
            inv2[k] = 1.0 / geom.kappa2[k];
        }
        FieldInterpolator iK(k_rad, PoleParity::Even);
        FieldInterpolator i1(inv1, PoleParity::Even);
        FieldInterpolator i2(inv2, PoleParity::Even);
        ScalarField dens = area_density(ss, radii_tensor(ss));
        double s2 = 0.0, wtot = 0.0;
        *sup = 0.0;
        for (int k = 0; k < g->nodes(); ++k) {
            double kref = iK(cth[k], cph[k]);
            double e = std::abs(kx[k] - kref) / kref;
            double lo = i2(cth[k], cph[k]), hi = i1(cth[k], cph[k]);
            e = std::max(e, std::abs(iw.eig_min[k] - lo) / lo);
            e = std::max(e, std::abs(iw.eig_max[k] - hi) / hi);
            *sup = std::max(*sup, e);
            double w = g->weight(k) * dens[k];
            s2 += w * e * e;
            wtot += w;
        }
        *rms = std::sqrt(s2 / wtot);
    };

    auto g96 = make_grid(2, 96, 192);
    auto g48 = make_grid(2, 48, 96);
    double worst_sup = 0.0, worst_ratio = 1e300, best_ratio = 0.0;
    for (unsigned long seed = 1; seed <= 10; ++seed) {
        double sup, rms;
        norms(sample_convex_body(g96, 1.0, 0.1, seed), &sup, &rms);
        worst_sup = std::max(worst_sup, sup);
        c.require(sup <= 0.01, fmt("seed %lu disagrees by %.2e", seed, sup));
        if (seed <= 3) {
            double sup48, rms48;
            norms(sample_convex_body(g48, 1.0, 0.1, seed), &sup48, &rms48);
            double ratio = rms48 / rms;
            worst_ratio = std::min(worst_ratio, ratio);
            best_ratio = std::max(best_ratio, ratio);
            c.require(ratio >= 2.8 && ratio <= 5.7,
                      fmt("seed %lu RMS refinement ratio %.2f outside [2.8, 5.7]", seed, ratio));
        }
    }
    return fmt("max disagreement %.2e over 10 bodies; RMS halving ratios in [%.2f, %.2f]",
               worst_sup, worst_ratio, best_ratio);
}

// 8. Isoperimetric deficit: 100 sampled bodies all sit above the ball
//    threshold by more than ten quadrature floors (measured min 7.6e-5
//    relative), and exact balls sit on it to 1e-8.
std::string c8(Check& c) {
    auto g = make_grid(2, 24, 48);
    double min_rel = 1e300;
    for (unsigned long seed = 1; seed <= 100; ++seed) {
        AFReport rep = af_verify(sample_convex_body(g, 1.0, 0.1, seed));
        double rel = rep.gap / rep.psi;
        min_rel = std::min(min_rel, rel);
        c.require(rel >= -1e-6, fmt("seed %lu below the floor: gap/psi %.2e", seed, rel));
        c.require(rel > 1e-5, fmt("seed %lu not clear of the quadrature floor: %.2e", seed,
                                  rel));
    }
    auto gb = make_grid(2, 32, 64);
    double ball_worst = 0.0;
    for (double rho : {0.5, 1.0, 2.0}) {
        AFReport rep = af_verify(ball_surface(gb, rho));
        ball_worst = std::max(ball_worst, std::abs(rep.gap));
        c.require(std::abs(rep.gap) <= 1e-8, fmt("ball rho=%g gap %.2e", rho, rep.gap));
    }
    return fmt("min gap/psi = %.2e over 100 bodies; ball |gap| <= %.1e", min_rel, ball_worst);
}

// 9. Geodesic-ball closed forms: quadrature volume, A_0, A_1 and mean Gauss
//    curvature match pi(sinh 2rho - 2rho), 4pi sinh^2 rho,
//    2pi sinh 2rho + 4pi rho and coth^2 rho to 1e-8 relative.
std::string c9(Check& c) {
    auto g = make_grid(2, 32, 64);
    double worst = 0.0;
    for (double rho : {0.5, 1.0, 2.0}) {
        RadialSurface b = ball_surface(g, rho);
        double vol = enclosed_volume(b);
        Functionals f = quermassintegrals(geometry(b), vol);
        double sh = std::sinh(rho), s2 = std::sinh(2.0 * rho), ct = 1.0 / std::tanh(rho);
        double closed[4] = {M_PI * (s2 - 2.0 * rho), 4.0 * M_PI * sh * sh,
                            2.0 * M_PI * s2 + 4.0 * M_PI * rho, ct * ct};
        double got[4] = {vol, f.A[0], f.A[1], f.kbar};
        const char* name[4] = {"volume", "A_0", "A_1", "kbar"};
        for (int i = 0; i < 4; ++i) {
            double rel = std::abs(got[i] / closed[i] - 1.0);
            worst = std::max(worst, rel);
            c.require(rel <= 1e-8, fmt("%s at rho=%g off by %.2e", name[i], rho, rel));
        }
    }
    return fmt("worst relative mismatch %.2e over rho in {0.5, 1, 2}", worst);
}

struct Criterion {
    int id;
    const char* label;
    std::string (*body)(Check&);
};

const Criterion kCriteria[] = {
    {1, "geodesic spheres are stationary", c1},
    {2, "enclosed volume is preserved", c2},
    {3, "dissipation identity and monotone A_1", c3},
    {4, "area variational identity", c4},
    {5, "convexity preserved on sampled bodies", c5},
    {6, "convergence at the linearized rate", c6},
    {7, "cross-parametrization consistency", c7},
    {8, "isoperimetric deficit above threshold", c8},
    {9, "ball closed-form table", c9},
};

} // namespace

int main(int argc, char** argv) {
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const Criterion& cr : kCriteria) {
        if (!wanted.empty() &&
            std::find(wanted.begin(), wanted.end(), cr.id) == wanted.end())
            continue;
        Check check;
        std::string detail;
        try {
            detail = cr.body(check);
        } catch (const std::exception& e) {
            check.ok = false;
            check.why = std::string("exception: ") + e.what();
        }
        if (check.ok) {
            std::printf("[PASS] criterion %d: %s -- %s\n", cr.id, cr.label, detail.c_str());
        } else {
            std::printf("[FAIL] criterion %d: %s -- %s\n", cr.id, cr.label, check.why.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
    if (wanted.empty())
        std::printf("acceptance: %d/9 criteria passed\n", 9 - failures);
    return failures > 0 ? 1 : 0;
}
