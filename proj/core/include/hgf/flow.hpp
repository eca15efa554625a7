#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "hgf/hyperbolic.hpp"
#include "hgf/klein.hpp"

namespace hgf {

// Which scalar unknown the time stepper evolves. The radial graph rho is the
// default (valid while the body is star-shaped and quadrature is direct); the
// Klein support function s serves as an interchangeable cross-check whose
// very well-posedness certifies convexity.
enum class Parametrization { Radial, Support };

// Time-step policy for the explicit 4-stage Runge-Kutta stepper. Every step
// starts from safety * (stability bound of the linearized curvature operator
// estimated from the current state); `max_step` caps it (set it to the
// desired value to force a fixed step) and `initial`, when positive, is taken
// literally on the very first step -- even beyond the stability bound, the
// rejection loop recovers -- so oversized-step behaviour stays reachable.
struct DtPolicy {
    double initial = 0.0;  // 0 = start from the stability bound
    double safety = 0.8;   // fraction of the stability bound, in (0, 1]
    double max_step = 0.01;
};

// Stop when t reaches t_end, or earlier when the radial oscillation
// max(rho) - min(rho) falls below osc_tol (0 disables the oscillation test).
struct StopRule {
    double t_end = 1.0;
    double osc_tol = 0.0;
};

struct FlowConfig {
    double alpha = 1.0;  // curvature power, > 0
    Parametrization parametrization = Parametrization::Radial;
    DtPolicy dt;
    bool volume_correction = true;  // re-solve |Omega_t| = |Omega_0| each step
    StopRule stop;
    // Azimuthal polar filter: each stage's right-hand side keeps only Fourier
    // modes k <= filter_beta * (nphi/2) * sin(theta) per ring, the standard
    // lat-long treatment that stops the pole rings from carrying (and
    // time-step-limiting) modes beyond their physical resolution. <= 0
    // disables the filter (and the time step then shrinks like sin^2 theta
    // of the first ring).
    double filter_beta = 1.0;
    // Re-search the center (and re-parametrize) whenever the oscillation
    // exceeds this; keeps the graph well-conditioned on long runs. <= 0
    // disables recentering.
    double recenter_osc = 0.5;
};

// Snapshot of the evolving surface. The radial description is always
// maintained (in support mode it is reconstructed after every accepted step
// -- the functionals and the volume constraint live there); `support` is the
// evolved unknown in support mode and empty otherwise.
struct FlowState {
    double t = 0.0;
    long step_count = 0;
    Parametrization parametrization = Parametrization::Radial;
    RadialSurface radial;
    SupportSurface support;
    Functionals functionals;
    double phi = 0.0;        // current nonlocal term
    double kappa_min = 0.0;  // over nodes and principal directions
    double kappa_max = 0.0;
    double osc = 0.0;  // max rho - min rho
};

struct StepReport {
    double dt = 0.0;        // accepted step size
    double dt_limit = 0.0;  // stability bound the policy started from
    int rejections = 0;     // halvings before acceptance
};

// One accepted step of the functional time series. The rate entries are the
// quadratures the structural identities predict for d/dt of volume and A_k,
// evaluated at this state: volume_rate = integral of eta (vanishes by the
// definition of phi), area_rate[k] = (k+1) integral of eta sigma_{k+1},
// k = 0..n-1, and dissipation_rate = -n integral of (K - Kbar)(K^alpha -
// phi), the negative-semidefinite covariance form that equals area_rate[n-1]
// identically. eta = phi - K^alpha is the normal speed.
struct SeriesRow {
    double t = 0.0;
    double dt = 0.0;  // 0 for the initial row
    int rejections = 0;
    double volume = 0.0;
    double drift = 0.0;  // relative volume drift this step, before correction
    std::vector<double> A;    // quermassintegrals A_0..A_n
    std::vector<double> Phi;  // curvature integrals Phi_0..Phi_n
    double phi = 0.0;
    double kbar = 0.0;
    double kappa_min = 0.0, kappa_max = 0.0;
    double osc = 0.0;
    double volume_rate = 0.0;
    std::vector<double> area_rate;  // k = 0..n-1
    double dissipation_rate = 0.0;
};

struct FunctionalSeries {
    std::vector<SeriesRow> rows;  // strictly increasing t, row 0 at t = 0
    double initial_volume = 0.0;
};

struct RunResult {
    FunctionalSeries series;
    FlowState final_state;
};

// Called after every accepted (and corrected) step.
using StepObserver = std::function<void(const FlowState&, const SeriesRow&)>;

// Nonlocal term phi(t) = integral of K^alpha dmu / |M_t| by grid quadrature,
// in either parametrization. Always between min and max of K^alpha.
double phi(const SurfaceGeometry& geom, double alpha);
double phi(const SupportSurface& ss, const RadiiTensor& rt, double alpha);

// Radial-graph speed: d rho/dt = (phi - K^alpha) sqrt(1 + |grad rho|^2 /
// sinh^2 rho) = (phi - K^alpha) v / sinh(rho), pointwise.
ScalarField radial_rhs(const RadialSurface& s, const SurfaceGeometry& geom, double alpha,
                       double phi_value);
ScalarField radial_rhs(const RadialSurface& s, double alpha, double phi_value);

// Support-function speed: ds/dt = A phi - B (K_Y)^alpha, pointwise (equals
// A (phi - (K_X)^alpha) identically).
ScalarField support_rhs(const SupportSurface& ss, const RadiiTensor& rt, double alpha,
                        double phi_value);
ScalarField support_rhs(const SupportSurface& ss, double alpha, double phi_value);

// The uniform radial shift epsilon solving enclosed_volume(rho + epsilon) =
// target (volume is strictly increasing in the shift, so Newton converges;
// CorrectionError after 50 iterations). volume_correct applies it, leaving
// |volume - target| <= 1e-12 relative.
double volume_shift(const RadialSurface& s, double target);
RadialSurface volume_correct(const RadialSurface& s, double target);

// Build the state for an initial body: checks convexity (rejecting with
// ConvexityLossError before any stepping), projects to the support function
// in support mode, and fills the cached functionals.
FlowState make_state(const RadialSurface& initial, const FlowConfig& cfg);

// One accepted step: classic RK4 on the chosen scalar PDE with phi recomputed
// at every stage and the polar filter applied to each stage's right-hand
// side. A trial step is rejected -- halving dt, at most 20 times, then
// StiffnessError -- if any stage or the final state loses convexity,
// degenerates, or leaves the Klein ball. dt_cap (> 0) additionally clips the
// step, which the driver uses to land exactly on t_end.
FlowState step(const FlowState& state, const FlowConfig& cfg, StepReport* report = nullptr,
               double dt_cap = 0.0);

// Full driver: step until the stop rule fires, enforcing the volume
// constraint and recentering per config, appending a series row (and calling
// the observer) after every accepted step. Row 0 records the initial state.
RunResult run(const RadialSurface& initial, const FlowConfig& cfg,
              const StepObserver& observer = {});

// Serialization of the series: JSON-lines with one object per row (keys t,
// volume, A, phi, kbar, kappa_min, kappa_max, osc) and a wider CSV carrying
// the step/rate diagnostics as well. 17 significant digits throughout.
void write_series_jsonl(const FunctionalSeries& series, std::ostream& os);
void write_series_csv(const FunctionalSeries& series, std::ostream& os);

} // namespace hgf
