#pragma once

#include <array>
#include <functional>
#include <vector>

#include "hgf/sphere_grid.hpp"

namespace hgf {

// Radial-graph hypersurface M = {(rho(theta), theta)} about an interior
// center of a convex body in hyperbolic space H^{n+1}, with the metric
// d rho^2 + sinh^2(rho) * (round metric on S^n).
struct RadialSurface {
    ScalarField rho;     // hyperbolic distance from the center, > 0
    long center_id = 0;  // opaque tag; recenter() bumps it
};

// All pointwise geometric data of a radial graph. Tensor components are
// covariant in the grid's (theta, phi) coordinates (theta only for n = 1).
struct SurfaceGeometry {
    GridPtr grid;
    SymTensorField g;    // induced metric  g_ij = rho_i rho_j + sinh^2(rho) sigma_ij
    SymTensorField h;    // second fundamental form (see geometry())
    ScalarField v;       // v = sqrt(sinh^2 rho + |grad rho|^2)
    ScalarField u;       // support function <sinh(rho) d_rho, nu> = sinh^2(rho)/v
    ScalarField nu_r;    // normal: coefficient of the unit radial vector, sinh(rho)/v
    VectorField nu_ang;  // normal: contravariant angular components, -sigma^{ij} rho_j/(sinh(rho) v)
    ScalarField dmu;     // area density sqrt(det g / det sigma) = sinh^{n-1}(rho) v
    std::vector<double> kappa1, kappa2;  // principal curvatures, kappa1 <= kappa2 (kappa2 empty for n=1)
    ScalarField sigma1;  // mean curvature sum kappa_i
    ScalarField K;       // Gauss curvature prod kappa_i = det h / det g
};

// Global functionals of a convex body with smooth boundary.
struct Functionals {
    double volume = 0.0;      // |Omega|, also the quermassintegral of index -1
    double area = 0.0;        // A_0 = |boundary|
    std::vector<double> A;    // quermassintegrals A[k], k = 0..n, by the smooth recursion
    std::vector<double> Phi;  // curvature integrals Phi[k] = integral of sigma_{n-k} d mu, k = 0..n
    double kbar = 0.0;        // average Gauss curvature  integral K dmu / area
};

// Geodesic-ball closed forms. ball_quermass(n, k, rho) returns A_k of the
// ball of radius rho: for n = 2 these are 4 pi sinh^2(rho),
// 2 pi sinh(2 rho) + 4 pi rho, 4 pi; for n = 1: 2 pi sinh(rho), 2 pi.
double ball_volume(int n, double rho);
double ball_quermass(int n, int k, double rho);
double ball_kbar(int n, double rho);  // coth^n(rho)
// Inverse of ball_volume in rho (closed form for n = 1, Newton for n = 2).
double ball_radius_for_volume(int n, double volume);
// Antiderivative I_n(rho) = integral_0^rho sinh^n(r) dr, the radial factor of
// the polar volume element.
double sinh_integral(int n, double rho);

// Geodesic sphere of radius rho0 as a radial surface.
RadialSurface ball_surface(const GridPtr& g, double rho0);

// Pointwise fundamental forms, curvatures and support data. Throws
// DegenerateSurfaceError if min rho <= 0, any derivative is non-finite, or
// sinh^2(rho) + |grad rho|^2 falls below 1e-14 at a node.
SurfaceGeometry geometry(const RadialSurface& s);

// Gauss curvature straight from the graph formula
//   K = det(-sinh(rho) rho_ij + 2 cosh(rho) rho_i rho_j + sinh^2(rho) cosh(rho) sigma_ij)
//       / (det sigma * v^{n+2} * sinh^{2n-2}(rho)),
// an independent route that must agree with geometry(s).K to roundoff.
ScalarField gauss_curvature(const RadialSurface& s);

// Hyperbolic volume enclosed by the graph: quadrature of I_n(rho) over S^n.
double enclosed_volume(const RadialSurface& s);

// Quermassintegrals by the smooth recursion
//   A_0 = area,  A_1 = Phi_{n-1} - n |Omega|,
//   A_k = integral sigma_k dmu - (n-k+1)/(k-1) A_{k-2}   (k = 2..n),
// plus the curvature integrals Phi_k and the average curvature
// kbar = Phi_0 / area (for n = 2 this equals (A_2 + A_0)/A_0; the recursion
// form of kbar has a 1/(n-1) factor and is not usable at n = 1).
Functionals quermassintegrals(const SurfaceGeometry& geom, double volume);

// Smallest and largest principal curvature over all nodes.
std::pair<double, double> kappa_range(const SurfaceGeometry& geom);

// Distances from the surface nodes to a trial center displaced by `dist`
// along the unit direction `dir` (hyperbolic law of cosines, evaluated at the
// surface's own boundary points; no resampling involved).
std::vector<double> shifted_radii(const RadialSurface& s, const std::array<double, 3>& dir,
                                  double dist);

// Coordinate pattern search over center displacements z minimizing
// objective(shifted radii about z). Candidates keeping min radius > 1e-3 only;
// returns the best displacement found (zero vector when no move helps).
std::array<double, 3> search_center(
    const RadialSurface& s, const std::function<double(const std::vector<double>&)>& objective);

// Re-parametrizes the body as a radial graph about the center displaced by
// `distance` along the unit direction `direction` (new-node radii found by a
// bracketed root solve along each new ray, values read through bicubic
// interpolation of rho). Throws RecenterError if the new center is not
// strictly inside or the result fails the star-shapedness test u > 0.
RadialSurface recenter(const RadialSurface& s, const std::array<double, 3>& direction,
                       double distance);

// Inner and outer radius bounds of the body: outer = min over trial centers
// of the largest node distance, inner = max over trial centers of the
// smallest (two independent center searches).
struct RadiusBounds {
    double inner = 0.0;
    double outer = 0.0;
    bool search_ok = true;  // false when the searches had to fall back to the current center
};
RadiusBounds inner_outer_radius(const RadialSurface& s);

} // namespace hgf
