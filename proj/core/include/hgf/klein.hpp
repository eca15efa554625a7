#pragma once

#include <array>
#include <vector>

#include "hgf/hyperbolic.hpp"
#include "hgf/sphere_grid.hpp"

namespace hgf {

// Gauss-map support-function description of a convex body, obtained by
// projecting the hyperbolic surface into the Klein unit ball: the hyperboloid
// point X = (1, Y)/sqrt(1 - |Y|^2) corresponds to the Euclidean point Y, a
// radial distance tanh(rho) from the origin. The body is recorded by its
// Euclidean support function s(z) = max_Y <Y, z> on the Gauss sphere, so the
// boundary point with outer normal z is Y(z) = s z + grad s.
//
// Derivatives of s are cached at construction (make_support) because every
// derived quantity needs them. Invariants enforced there: 0 < s < 1 and
// r2 = s^2 + |grad s|^2 < 1 at every node (the body stays inside the model
// ball and contains the origin). Convexity is *not* enforced here -- it is
// queried through convexity_certificate / gauss_KY so that candidate bodies
// can be tested without throwing.
struct SupportSurface {
    GridPtr grid;
    ScalarField s;         // support function
    VectorField grad_s;    // coordinate partials (s_theta, s_phi)
    SymTensorField hess_s; // covariant Hessian of s (round metric)
    ScalarField grad2;     // |grad s|^2
    ScalarField r2;        // s^2 + |grad s|^2 = |Y|^2 of the boundary point
    long center_id = 0;    // provenance counter shared with RadialSurface
};

// Build a SupportSurface from node values of s, computing the cached
// derivatives. Throws DegenerateSurfaceError if s <= 0 somewhere (origin not
// interior) and OutOfModelError if s >= 1 or r2 >= 1 (body leaves the ball).
SupportSurface make_support(ScalarField s, long center_id = 0);

// The principal-radii tensor r_ij = hess(s)_ij + s sigma_ij, stored in the
// orthonormal frame (e_theta, e_phi / sin theta) so its plain 2x2 eigenvalues
// are the eigenvalues with respect to the round metric: the principal radii
// of curvature 1/kappa_i of the projected body. For dim 1 only r.c11 is used
// and both eigenvalue fields coincide with it.
struct RadiiTensor {
    GridPtr grid;
    SymTensorField r;
    ScalarField eig_min, eig_max; // principal radii, ascending
    ScalarField det;
};

// Compute the radii tensor. Never throws on sign: indefinite tensors are
// representable so that convexity_certificate can report them.
RadiiTensor radii_tensor(const SupportSurface& ss);

// Euclidean Gauss curvature of the projected body, K_Y = 1/det(r_ij). Throws
// ConvexityLossError (carrying the worst node and its smallest eigenvalue) if
// the radii tensor is not positive definite everywhere.
ScalarField gauss_KY(const RadiiTensor& rt);

// Hyperbolic Gauss curvature of the original surface recovered through the
// model map: K_X = ((1 - r2)/(1 - s^2))^{(n+2)/2} K_Y. The overload taking a
// RadiiTensor avoids recomputing it. Throws as gauss_KY, plus OutOfModelError
// if r2 >= 1 (defensive; make_support already rejects that).
ScalarField gauss_KX(const SupportSurface& ss);
ScalarField gauss_KX(const SupportSurface& ss, const RadiiTensor& rt);

// Coefficients of the scalar support-function flow ds/dt = A phi - B K_Y^alpha:
//   A = sqrt((1 - r2)(1 - s^2)),
//   B = (1 - r2)^{(n+2)alpha/2 + 1/2} (1 - s^2)^{-(n+2)alpha/2 + 1/2}.
// They satisfy B K_Y^alpha = A K_X^alpha identically, which is how the speed
// of the original hyperbolic flow transfers to the support function.
struct KleinCoefficients {
    ScalarField A, B;
};
KleinCoefficients coefficients(const SupportSurface& ss, double alpha);

// Inverse Weingarten map of the *hyperbolic* surface expressed in support
// variables:
//   W^{-1} = (sigma^{jq} + grad_s^j grad_s^q / (1 - r2)) r_qi
//            * sqrt((1 - s^2)/(1 - r2)).
// The product is not symmetric, so we return the symmetric matrix
// c Q r Q (Q = square root of the first factor) which is similar to it:
// the eigenvalue fields are the reciprocals 1/kappa_i of the hyperbolic
// principal curvatures. Components are in the orthonormal frame.
struct InverseWeingarten {
    GridPtr grid;
    SymTensorField m;
    ScalarField eig_min, eig_max; // 1/kappa_max, 1/kappa_min
};
InverseWeingarten inverse_weingarten(const SupportSurface& ss);

// Convexity report for a candidate support function: smallest eigenvalue and
// smallest determinant of the radii tensor over all nodes, the node attaining
// the smallest eigenvalue, and max r2. Passes when the tensor is positive
// definite everywhere (eigenvalue tolerance 1e-10). Never throws.
struct ConvexityCertificate {
    double min_eigenvalue = 0.0;
    double min_det = 0.0;
    double max_r2 = 0.0;
    int worst_node = 0; // node of min_eigenvalue
    bool pass = false;
};
ConvexityCertificate convexity_certificate(const SupportSurface& ss);

// Hyperbolic area element of the original surface per unit solid angle of the
// Gauss sphere: det(r) sqrt((1 - s^2)/(1 - r2)^{n+1}). integrate(f * this)
// is the surface integral of f in the support parametrization; it equals
// sinh^n(rho) for a concentric ball.
ScalarField area_density(const SupportSurface& ss, const RadiiTensor& rt);

// Euclidean boundary point Y(z) = s z + grad s of the node's normal direction
// (third component 0 for dim 1).
std::array<double, 3> support_point(const SupportSurface& ss, int node);

// Project a convex radial surface into the Klein ball and extract its support
// function on the same grid. Each s(z) is the maximum of
// tanh(rho(x)) <e(x), z> over surface directions x, located by a strided
// coarse scan, a lattice hill climb (strict convexity makes the maximum the
// only lattice attractor), and a Newton polish on interpolated fields.
// The optional out-parameters receive the contact angles (the argmax
// direction) per node, which cross-parametrization tests use to compare
// pointwise curvatures. The assembled field is truncated ring by ring to the
// resolvable azimuthal wavenumbers (the usual polar treatment) so that the
// search's node-level jitter cannot reach the pole-ring second derivatives.
// Throws ConvexityLossError if min kappa <= 0.
SupportSurface project(const RadialSurface& surf,
                       std::vector<double>* contact_theta = nullptr,
                       std::vector<double>* contact_phi = nullptr);

// Inverse of project: recover the radial description rho = artanh(r) from a
// support function, r(e) = min_z s(z)/<z, e> over the open hemisphere
// <z, e> > 0 (the support-halfspace intersection evaluated along the ray e),
// again polished by Newton iteration on interpolated fields and despiked by
// the same per-ring azimuthal truncation.
RadialSurface to_radial(const SupportSurface& ss);

} // namespace hgf
