#include "hgf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <utility>

#include "hgf/field_io.hpp"

namespace hgf {

namespace {

// RK4 keeps |amplification| <= 1 for real eigenvalues down to about -2.785.
constexpr double kRk4Stability = 2.8;
// Sharp bound on the symbol of the 4th-order 5-point second-difference
// stencil: max over wavenumbers of |S(xi)| * h^2 = 16/3.
constexpr double kTheta2Symbol = 5.34;

void validate(const FlowConfig& cfg) {
    if (!(cfg.alpha > 0.0)) throw ConfigError("flow: alpha must be positive");
    if (!(cfg.dt.safety > 0.0) || cfg.dt.safety > 1.0)
        throw ConfigError("flow: dt safety factor must be in (0, 1]");
    if (cfg.dt.max_step < 0.0 || cfg.dt.initial < 0.0)
        throw ConfigError("flow: dt caps must be nonnegative");
}

// ---- radial parametrization ------------------------------------------------

struct RadialEval {
    SurfaceGeometry geom;
    std::vector<double> kalpha;  // K^alpha per node
    double phi = 0.0;
    ScalarField rhs;  // filtered stage right-hand side
};

RadialEval radial_eval(const RadialSurface& s, double alpha, double filter_beta) {
    RadialEval ev;
    ev.geom = geometry(s);
    const SphereGrid& g = *s.rho.grid;
    ev.kalpha.resize(g.nodes());
    double num = 0.0, den = 0.0;
    for (int k = 0; k < g.nodes(); ++k) {
        ev.kalpha[k] = std::pow(ev.geom.K[k], alpha);
        double wd = g.weight(k) * ev.geom.dmu[k];
        num += wd * ev.kalpha[k];
        den += wd;
    }
    ev.phi = num / den;
    ev.rhs = ScalarField(s.rho.grid);
    for (int k = 0; k < g.nodes(); ++k)
        ev.rhs[k] = (ev.phi - ev.kalpha[k]) * ev.geom.v[k] / std::sinh(s.rho[k]);
    if (filter_beta > 0.0 && g.dim() == 2) ev.rhs = filter_azimuthal(ev.rhs, filter_beta);
    return ev;
}

// Largest linearized rate of the radial operator over nodes: diffusion scale
// alpha K^{alpha-1} sigma_{n-1} (times the graph factor v/sinh rho) against
// the squared resolved wavenumbers in each coordinate direction, converted by
// the induced metric. The azimuthal wavenumber is capped by the polar filter.
double stability_rate(const RadialSurface& s, const SurfaceGeometry& geom, double alpha,
                      double filter_beta) {
    const SphereGrid& g = *s.rho.grid;
    double lam = 0.0;
    if (g.dim() == 1) {
        double kmax2 = 0.25 * g.nodes() * (double)g.nodes();
        for (int k = 0; k < g.nodes(); ++k) {
            double d = alpha * std::pow(geom.K[k], alpha - 1.0) * geom.v[k] / std::sinh(s.rho[k]);
            lam = std::max(lam, d * kmax2 / geom.g.c11[k]);
        }
        return lam;
    }
    int np = g.nphi();
    for (int k = 0; k < g.nodes(); ++k) {
        int i = k / np;
        double d = alpha * std::pow(geom.K[k], alpha - 1.0) * geom.sigma1[k] * geom.v[k] /
                   std::sinh(s.rho[k]);
        double dth = g.dtheta_min(i);
        double kphi = 0.5 * np;
        if (filter_beta > 0.0) kphi = std::min(kphi, filter_beta * 0.5 * np * g.sin_theta(i));
        double rate = d * (kTheta2Symbol / (dth * dth * geom.g.c11[k]) +
                           kphi * kphi / geom.g.c22[k]);
        lam = std::max(lam, rate);
    }
    return lam;
}

// ---- support parametrization -----------------------------------------------

struct SupportEval {
    RadiiTensor rt;
    double phi = 0.0;
    ScalarField rhs;
};

SupportEval support_eval(const SupportSurface& ss, double alpha, double filter_beta) {
    SupportEval ev;
    ev.rt = radii_tensor(ss);
    ScalarField ky = gauss_KY(ev.rt);  // throws on convexity loss
    ScalarField kx = gauss_KX(ss, ev.rt);
    ScalarField dens = area_density(ss, ev.rt);
    const SphereGrid& g = *ss.grid;
    double num = 0.0, den = 0.0;
    for (int k = 0; k < g.nodes(); ++k) {
        double wd = g.weight(k) * dens[k];
        num += wd * std::pow(kx[k], alpha);
        den += wd;
    }
    ev.phi = num / den;
    KleinCoefficients co = coefficients(ss, alpha);
    ev.rhs = ScalarField(ss.grid);
    for (int k = 0; k < g.nodes(); ++k)
        ev.rhs[k] = co.A[k] * ev.phi - co.B[k] * std::pow(ky[k], alpha);
    if (filter_beta > 0.0 && g.dim() == 2) ev.rhs = filter_azimuthal(ev.rhs, filter_beta);
    return ev;
}

double stability_rate(const SupportSurface& ss, const SupportEval& ev, double alpha,
                      double filter_beta) {
    const SphereGrid& g = *ss.grid;
    KleinCoefficients co = coefficients(ss, alpha);
    double lam = 0.0;
    if (g.dim() == 1) {
        double kmax2 = 0.25 * g.nodes() * (double)g.nodes();
        for (int k = 0; k < g.nodes(); ++k) {
            double d = alpha * co.B[k] * std::pow(1.0 / ev.rt.det[k], alpha) / ev.rt.eig_min[k];
            lam = std::max(lam, d * kmax2);
        }
        return lam;
    }
    int np = g.nphi();
    for (int k = 0; k < g.nodes(); ++k) {
        int i = k / np;
        double d = alpha * co.B[k] * std::pow(1.0 / ev.rt.det[k], alpha) / ev.rt.eig_min[k];
        double dth = g.dtheta_min(i);
        double st = g.sin_theta(i);
        double kphi = 0.5 * np;
        if (filter_beta > 0.0) kphi = std::min(kphi, filter_beta * 0.5 * np * st);
        lam = std::max(lam, d * (kTheta2Symbol / (dth * dth) + kphi * kphi / (st * st)));
    }
    return lam;
}

// ---- state bookkeeping -----------------------------------------------------

void check_finite(const ScalarField& f, const char* what) {
    for (double x : f.v)
        if (!std::isfinite(x)) throw DegenerateSurfaceError(std::string(what) + " went non-finite");
}

// Recompute every cached quantity of a state whose surfaces are current.
// Throws ConvexityLossError if a principal curvature reaches zero -- the
// accept/reject contract of the stepper. Returns the evaluation so callers
// can derive the series rates without a second geometry pass.
RadialEval refresh(FlowState& st, const FlowConfig& cfg) {
    check_finite(st.radial.rho, "radial graph");
    RadialEval ev = radial_eval(st.radial, cfg.alpha, 0.0);
    const SurfaceGeometry& geom = ev.geom;
    int worst = 0;
    double kmin = geom.kappa1[0], kmax = geom.kappa2.empty() ? geom.kappa1[0] : geom.kappa2[0];
    for (int k = 0; k < (int)geom.kappa1.size(); ++k) {
        if (geom.kappa1[k] < kmin) {
            kmin = geom.kappa1[k];
            worst = k;
        }
        kmax = std::max(kmax, geom.kappa2.empty() ? geom.kappa1[k] : geom.kappa2[k]);
    }
    if (!(kmin > 0.0))
        throw ConvexityLossError("flow state lost convexity (min curvature " +
                                     std::to_string(kmin) + ")",
                                 worst, kmin);
    st.kappa_min = kmin;
    st.kappa_max = kmax;
    st.functionals = quermassintegrals(geom, enclosed_volume(st.radial));
    st.phi = ev.phi;
    auto [lo, hi] = std::minmax_element(st.radial.rho.v.begin(), st.radial.rho.v.end());
    st.osc = *hi - *lo;
    return ev;
}

ScalarField axpy(const ScalarField& base, double c, const ScalarField& k) {
    ScalarField out(base.grid);
    for (int i = 0; i < (int)out.size(); ++i) out[i] = base[i] + c * k[i];
    return out;
}

// One RK4 trial in the radial parametrization; e0 is the (dt-independent)
// evaluation at the current state, reused across rejections.
FlowState try_step_radial(const FlowState& st, const RadialEval& e0, double dt,
                          const FlowConfig& cfg) {
    const ScalarField& r0 = st.radial.rho;
    long cid = st.radial.center_id;
    auto stage = [&](const ScalarField& k, double c) {
        return radial_eval(RadialSurface{axpy(r0, c * dt, k), cid}, cfg.alpha, cfg.filter_beta);
    };
    RadialEval e2 = stage(e0.rhs, 0.5);
    RadialEval e3 = stage(e2.rhs, 0.5);
    RadialEval e4 = stage(e3.rhs, 1.0);

    FlowState next = st;
    next.t = st.t + dt;
    next.step_count = st.step_count + 1;
    next.radial.rho = ScalarField(r0.grid);
    for (int i = 0; i < (int)r0.size(); ++i)
        next.radial.rho[i] =
            r0[i] + dt / 6.0 * (e0.rhs[i] + 2.0 * e2.rhs[i] + 2.0 * e3.rhs[i] + e4.rhs[i]);
    refresh(next, cfg);
    return next;
}

FlowState try_step_support(const FlowState& st, const SupportEval& e0, double dt,
                           const FlowConfig& cfg) {
    const ScalarField& s0 = st.support.s;
    long cid = st.support.center_id;
    auto stage = [&](const ScalarField& k, double c) {
        return support_eval(make_support(axpy(s0, c * dt, k), cid), cfg.alpha, cfg.filter_beta);
    };
    SupportEval e2 = stage(e0.rhs, 0.5);
    SupportEval e3 = stage(e2.rhs, 0.5);
    SupportEval e4 = stage(e3.rhs, 1.0);

    ScalarField s1(s0.grid);
    for (int i = 0; i < (int)s0.size(); ++i)
        s1[i] = s0[i] + dt / 6.0 * (e0.rhs[i] + 2.0 * e2.rhs[i] + 2.0 * e3.rhs[i] + e4.rhs[i]);
    check_finite(s1, "support function");

    FlowState next = st;
    next.t = st.t + dt;
    next.step_count = st.step_count + 1;
    next.support = make_support(std::move(s1), cid);
    ConvexityCertificate cert = convexity_certificate(next.support);
    if (!cert.pass)
        throw ConvexityLossError("support step lost convexity", cert.worst_node,
                                 cert.min_eigenvalue);
    next.radial = to_radial(next.support);
    refresh(next, cfg);
    return next;
}

SeriesRow make_row(const FlowState& st, const RadialEval& ev, const StepReport& rep,
                   double drift) {
    const SphereGrid& g = *st.radial.rho.grid;
    int n = g.dim();
    SeriesRow row;
    row.t = st.t;
    row.dt = rep.dt;
    row.rejections = rep.rejections;
    row.volume = st.functionals.volume;
    row.drift = drift;
    row.A = st.functionals.A;
    row.Phi = st.functionals.Phi;
    row.phi = st.phi;
    row.kbar = st.functionals.kbar;
    row.kappa_min = st.kappa_min;
    row.kappa_max = st.kappa_max;
    row.osc = st.osc;

    double vr = 0.0, ar0 = 0.0, ar1 = 0.0, diss = 0.0;
    for (int k = 0; k < g.nodes(); ++k) {
        double wd = g.weight(k) * ev.geom.dmu[k];
        double eta = st.phi - ev.kalpha[k];
        vr += wd * eta;
        ar0 += wd * eta * ev.geom.sigma1[k];
        if (n == 2) ar1 += wd * eta * ev.geom.K[k];
        // Pairing K - Kbar with K^alpha - phi (phi is the dmu-mean of
        // K^alpha, Kbar the dmu-mean of K) makes this the covariance of two
        // increasing functions of K: nonnegative, and -n times it equals
        // area_rate[n-1] exactly under the quadrature definitions.
        diss += wd * (ev.geom.K[k] - st.functionals.kbar) * (ev.kalpha[k] - st.phi);
    }
    row.volume_rate = vr;
    row.area_rate.assign(1, ar0);
    if (n == 2) row.area_rate.push_back(2.0 * ar1);
    row.dissipation_rate = -n * diss;
    return row;
}

} // namespace

// ---- public operations -----------------------------------------------------

double phi(const SurfaceGeometry& geom, double alpha) {
    const SphereGrid& g = *geom.grid;
    double num = 0.0, den = 0.0;
    for (int k = 0; k < g.nodes(); ++k) {
        double wd = g.weight(k) * geom.dmu[k];
        num += wd * std::pow(geom.K[k], alpha);
        den += wd;
    }
    return num / den;
}

double phi(const SupportSurface& ss, const RadiiTensor& rt, double alpha) {
    ScalarField kx = gauss_KX(ss, rt);
    ScalarField dens = area_density(ss, rt);
    const SphereGrid& g = *ss.grid;
    double num = 0.0, den = 0.0;
    for (int k = 0; k < g.nodes(); ++k) {
        double wd = g.weight(k) * dens[k];
        num += wd * std::pow(kx[k], alpha);
        den += wd;
    }
    return num / den;
}

ScalarField radial_rhs(const RadialSurface& s, const SurfaceGeometry& geom, double alpha,
                       double phi_value) {
    ScalarField rhs(s.rho.grid);
    for (int k = 0; k < (int)rhs.size(); ++k)
        rhs[k] =
            (phi_value - std::pow(geom.K[k], alpha)) * geom.v[k] / std::sinh(s.rho[k]);
    return rhs;
}

ScalarField radial_rhs(const RadialSurface& s, double alpha, double phi_value) {
    return radial_rhs(s, geometry(s), alpha, phi_value);
}

ScalarField support_rhs(const SupportSurface& ss, const RadiiTensor& rt, double alpha,
                        double phi_value) {
    ScalarField ky = gauss_KY(rt);
    KleinCoefficients co = coefficients(ss, alpha);
    ScalarField rhs(ss.grid);
    for (int k = 0; k < (int)rhs.size(); ++k)
        rhs[k] = co.A[k] * phi_value - co.B[k] * std::pow(ky[k], alpha);
    return rhs;
}

ScalarField support_rhs(const SupportSurface& ss, double alpha, double phi_value) {
    return support_rhs(ss, radii_tensor(ss), alpha, phi_value);
}

double volume_shift(const RadialSurface& s, double target) {
    if (!(target > 0.0)) throw ConfigError("volume correction: target volume must be positive");
    const SphereGrid& g = *s.rho.grid;
    int n = g.dim();
    double eps = 0.0;
    for (int it = 0; it < 50; ++it) {
        double vol = 0.0, dvol = 0.0;
        for (int k = 0; k < g.nodes(); ++k) {
            double r = s.rho[k] + eps;
            vol += g.weight(k) * sinh_integral(n, r);
            dvol += g.weight(k) * std::pow(std::sinh(r), n);
        }
        double f = vol - target;
        if (std::abs(f) <= 1e-12 * target) return eps;
        eps -= f / dvol;
    }
    throw CorrectionError("volume correction did not converge in 50 iterations");
}

RadialSurface volume_correct(const RadialSurface& s, double target) {
    double eps = volume_shift(s, target);
    RadialSurface out;
    out.center_id = s.center_id;
    out.rho = ScalarField(s.rho.grid);
    for (int k = 0; k < (int)out.rho.size(); ++k) {
        out.rho[k] = s.rho[k] + eps;
        if (!(out.rho[k] > 0.0))
            throw CorrectionError("volume correction collapsed the radial graph");
    }
    return out;
}

FlowState make_state(const RadialSurface& initial, const FlowConfig& cfg) {
    validate(cfg);
    FlowState st;
    st.parametrization = cfg.parametrization;
    st.radial = initial;
    if (cfg.parametrization == Parametrization::Support) {
        st.support = project(initial);  // refuses non-convex input
        ConvexityCertificate cert = convexity_certificate(st.support);
        if (!cert.pass)
            throw ConvexityLossError("initial data fails the convexity certificate",
                                     cert.worst_node, cert.min_eigenvalue);
    }
    refresh(st, cfg);
    return st;
}

FlowState step(const FlowState& state, const FlowConfig& cfg, StepReport* report,
               double dt_cap) {
    validate(cfg);
    const bool radial = state.parametrization == Parametrization::Radial;

    RadialEval re0;
    SupportEval se0;
    double lam;
    if (radial) {
        re0 = radial_eval(state.radial, cfg.alpha, cfg.filter_beta);
        lam = stability_rate(state.radial, re0.geom, cfg.alpha, cfg.filter_beta);
    } else {
        se0 = support_eval(state.support, cfg.alpha, cfg.filter_beta);
        lam = stability_rate(state.support, se0, cfg.alpha, cfg.filter_beta);
    }
    double dt_limit = kRk4Stability / lam;
    double dt = cfg.dt.safety * dt_limit;
    if (cfg.dt.max_step > 0.0) dt = std::min(dt, cfg.dt.max_step);
    // A positive `initial` is taken literally on the first step (even beyond
    // the stability bound -- the rejection loop recovers), so oversized-step
    // behaviour is reachable and fixed-step experiments can seed themselves.
    if (state.step_count == 0 && cfg.dt.initial > 0.0) dt = cfg.dt.initial;
    if (dt_cap > 0.0) dt = std::min(dt, dt_cap);

    int rejections = 0;
    while (true) {
        try {
            FlowState next = radial ? try_step_radial(state, re0, dt, cfg)
                                    : try_step_support(state, se0, dt, cfg);
            if (report) {
                report->dt = dt;
                report->dt_limit = dt_limit;
                report->rejections = rejections;
            }
            return next;
        } catch (const ConvexityLossError&) {
        } catch (const DegenerateSurfaceError&) {
        } catch (const OutOfModelError&) {
        }
        if (++rejections > 20)
            throw StiffnessError("time step rejected 20 times in a row at t = " +
                                 std::to_string(state.t) + " (last dt = " + std::to_string(dt) +
                                 ")");
        dt *= 0.5;
    }
}

RunResult run(const RadialSurface& initial, const FlowConfig& cfg, const StepObserver& observer) {
    validate(cfg);
    if (!(cfg.stop.t_end > 0.0)) throw ConfigError("flow: t_end must be positive");
    if (cfg.stop.osc_tol < 0.0) throw ConfigError("flow: osc_tol must be nonnegative");

    RunResult out;
    FlowState st = make_state(initial, cfg);
    RadialEval ev = radial_eval(st.radial, cfg.alpha, 0.0);
    const double v0 = st.functionals.volume;
    out.series.initial_volume = v0;
    out.series.rows.push_back(make_row(st, ev, StepReport{}, 0.0));
    if (observer) observer(st, out.series.rows.back());

    const double t_eps = 1e-12 * std::max(1.0, cfg.stop.t_end);
    while (st.t < cfg.stop.t_end - t_eps &&
           !(cfg.stop.osc_tol > 0.0 && st.osc <= cfg.stop.osc_tol)) {
        StepReport rep;
        st = step(st, cfg, &rep, cfg.stop.t_end - st.t);

        // Re-search the center while the graph is badly off-center; the move
        // is worthwhile only if it actually shrinks the oscillation.
        if (cfg.recenter_osc > 0.0 && st.osc > cfg.recenter_osc) {
            auto spread = [](const std::vector<double>& radii) {
                auto [lo, hi] = std::minmax_element(radii.begin(), radii.end());
                return *hi - *lo;
            };
            std::array<double, 3> move = search_center(st.radial, spread);
            double dist = std::sqrt(move[0] * move[0] + move[1] * move[1] + move[2] * move[2]);
            if (dist > 0.0) {
                double gain = spread(shifted_radii(
                    st.radial, {move[0] / dist, move[1] / dist, move[2] / dist}, dist));
                if (gain <= 0.9 * st.osc) {
                    try {
                        st.radial = recenter(
                            st.radial, {move[0] / dist, move[1] / dist, move[2] / dist}, dist);
                        if (st.parametrization == Parametrization::Support)
                            st.support = project(st.radial);
                    } catch (const RecenterError&) {
                        // keep the old center; purely an optimization
                    }
                }
            }
        }

        double drift = (st.functionals.volume - v0) / v0;
        if (cfg.volume_correction) {
            st.radial = volume_correct(st.radial, v0);
            if (st.parametrization == Parametrization::Support)
                st.support = project(st.radial);
        }
        // One evaluation covers the recorded row and the acceptance caches.
        ev = refresh(st, cfg);
        out.series.rows.push_back(make_row(st, ev, rep, drift));
        if (observer) observer(st, out.series.rows.back());
    }

    out.final_state = std::move(st);
    return out;
}

// ---- serialization ----------------------------------------------------------

void write_series_jsonl(const FunctionalSeries& series, std::ostream& os) {
    for (const SeriesRow& r : series.rows) {
        os << "{\"t\":" << format_g17(r.t) << ",\"volume\":" << format_g17(r.volume)
           << ",\"A\":[";
        for (std::size_t k = 0; k < r.A.size(); ++k) {
            if (k) os << ',';
            os << format_g17(r.A[k]);
        }
        os << "],\"phi\":" << format_g17(r.phi) << ",\"kbar\":" << format_g17(r.kbar)
           << ",\"kappa_min\":" << format_g17(r.kappa_min)
           << ",\"kappa_max\":" << format_g17(r.kappa_max) << ",\"osc\":" << format_g17(r.osc)
           << "}\n";
    }
}

void write_series_csv(const FunctionalSeries& series, std::ostream& os) {
    if (series.rows.empty()) return;
    const SeriesRow& first = series.rows.front();
    os << "t,dt,rejections,volume,drift";
    for (std::size_t k = 0; k < first.A.size(); ++k) os << ",A" << k;
    for (std::size_t k = 0; k < first.Phi.size(); ++k) os << ",Phi" << k;
    os << ",phi,kbar,kappa_min,kappa_max,osc,volume_rate";
    for (std::size_t k = 0; k < first.area_rate.size(); ++k) os << ",area_rate" << k;
    os << ",dissipation_rate\n";
    for (const SeriesRow& r : series.rows) {
        os << format_g17(r.t) << ',' << format_g17(r.dt) << ',' << r.rejections << ','
           << format_g17(r.volume) << ',' << format_g17(r.drift);
        for (double a : r.A) os << ',' << format_g17(a);
        for (double p : r.Phi) os << ',' << format_g17(p);
        os << ',' << format_g17(r.phi) << ',' << format_g17(r.kbar) << ','
           << format_g17(r.kappa_min) << ',' << format_g17(r.kappa_max) << ','
           << format_g17(r.osc) << ',' << format_g17(r.volume_rate);
        for (double a : r.area_rate) os << ',' << format_g17(a);
        os << ',' << format_g17(r.dissipation_rate) << '\n';
    }
}

} // namespace hgf
