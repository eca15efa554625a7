#pragma once

#include <iosfwd>
#include <vector>

#include "hgf/flow.hpp"
#include "hgf/hyperbolic.hpp"

namespace hgf {

// ---- linearized decay rates --------------------------------------------------

// Decay rate of the degree-l spherical-harmonic perturbation of a geodesic
// sphere of radius rho_inf under the volume-preserving flow:
//
//   lambda_l = c * (l(l+n-1) - n),   c = alpha * coth^{n alpha - 1}(rho_inf)
//                                        / sinh^2(rho_inf).
//
// The prefactor is pinned by the uniform radial mode: without the volume
// constraint a sphere relaxes at -d(K^alpha)/d rho = n alpha coth^{n alpha-1}
// (rho)/sinh^2(rho), which must equal n*c. lambda_0 = lambda_1 = 0 (volume
// and translation modes are annihilated by the mean projection and the n*eta
// term). Throws ConfigError for invalid n, alpha, rho_inf, or l < 0.
double linear_rate(int n, double alpha, double rho_inf, int l);

// The linearization about the limit sphere: the PDE is
// d eta/dt = c (Lap eta + n eta - (n/|S^n|) integral of eta), whose harmonic
// eigenvalues are the rates above.
struct LinearizedModel {
    int n = 2;
    double alpha = 1.0;
    double rho_inf = 1.0;
    double c = 0.0;             // prefactor of the linearized operator
    std::vector<double> rates;  // rates[l], l = 0..l_max
};
LinearizedModel linearized_model(int n, double alpha, double rho_inf, int l_max);

// ---- structural identities over a run ----------------------------------------

// Discrete time derivative of A_{n-1} (centered differences over the series)
// against the dissipation quadrature -n integral of (K - Kbar)(K^alpha - phi)
// recorded with each row. rhs <= 0 always; the two agree up to spatial
// truncation and the O(dt^2) of the difference stencil.
struct DissipationReport {
    std::vector<double> t;    // interior sample times
    std::vector<double> lhs;  // centered difference of A_{n-1}
    std::vector<double> rhs;  // recorded dissipation quadrature
    double max_lhs = 0.0;     // max |lhs|
    double max_rhs = 0.0;     // max |rhs|
    // worst pointwise |lhs - rhs| / max(|rhs|, 0.1% of the peak rate); 0 for
    // a stationary series
    double mismatch = 0.0;
};
// Requires at least 3 rows (two step intervals); throws WindowError otherwise.
DissipationReport dissipation_identity(const FunctionalSeries& series);

// Same comparison for dA_k/dt against (k+1) integral of eta sigma_{k+1} dmu,
// k = 0..n-1; k = -1 compares the volume against its (identically vanishing)
// rate quadrature, i.e. the volume-preservation check.
struct VariationalReport {
    int k = 0;
    std::vector<double> t;
    std::vector<double> lhs;
    std::vector<double> rhs;
    double max_lhs = 0.0;
    double max_rhs = 0.0;
    double mismatch = 0.0;
};
VariationalReport variational_identity(const FunctionalSeries& series, int k);

// ---- convergence measurements -------------------------------------------------

// Least-squares fit of log(osc rho) vs t over rows with t in [t_begin,
// t_end]: decay rate (minus the slope) and the RMS residual of the fit.
// Throws WindowError when the window holds fewer than 3 rows or any non-
// positive oscillation. The one-argument form uses the trailing 40% of the
// series (the rate is asymptotic; early rows carry higher modes).
struct DecayFit {
    double rate = 0.0;
    double residual = 0.0;
    int samples = 0;
};
DecayFit fit_decay(const FunctionalSeries& series, double t_begin, double t_end);
DecayFit fit_decay(const FunctionalSeries& series);

// Radial sup-distance to the volume-matching geodesic ball, after a
// center search minimizing that distance: rho_star is the matching ball
// radius, distance = max |rho - rho_star| about the best center found. An
// upper bound for the Hausdorff distance to the nearest ball; exactly 0 for
// a ball. search_ok turns false if the improved center had to be discarded.
struct BallDistance {
    double rho_star = 0.0;
    double distance = 0.0;
    bool search_ok = true;
};
BallDistance ball_distance(const RadialSurface& s);

// ---- isoperimetric-type verification -------------------------------------------

// Sharp lower bound psi_n(v) for the outer quermassintegral A_{n-1} among
// convex bodies of volume v: the value attained by the geodesic ball of that
// volume (n = 1: sqrt(v^2 + 4 pi v); n = 2 via the ball closed forms with a
// Newton inversion of the volume).
double af_threshold(int n, double volume);

// gap = A_{n-1}(body) - psi_n(volume); nonnegative up to quadrature error,
// zero exactly on balls.
struct AFReport {
    double volume = 0.0;
    double outer = 0.0;  // A_{n-1}
    double psi = 0.0;    // sharp ball bound at the same volume
    double gap = 0.0;
};
AFReport af_verify(const RadialSurface& s);

// One campaign line per sampled body.
struct AFRow {
    unsigned long seed = 0;
    double volume = 0.0;
    double outer = 0.0;
    double psi = 0.0;
    double gap = 0.0;
};
// CSV with header seed,volume,outer,psi,gap at 17 significant digits.
void write_af_csv(const std::vector<AFRow>& rows, std::ostream& os);

// Flat JSON objects (17 significant digits), one per report.
void write_json(const DissipationReport& r, std::ostream& os);
void write_json(const VariationalReport& r, std::ostream& os);
void write_json(const DecayFit& r, std::ostream& os);
void write_json(const BallDistance& r, std::ostream& os);
void write_json(const AFReport& r, std::ostream& os);

} // namespace hgf
