#pragma once

#include <array>
#include <memory>
#include <vector>

#include "hgf/errors.hpp"

namespace hgf {

class SphereGrid;
using GridPtr = std::shared_ptr<const SphereGrid>;

// Behaviour of a per-node quantity when a stencil or interpolation crosses a
// pole of the (theta, phi) chart: the continuation of f to theta < 0 is
//     f(-theta, phi) = parity * f(theta, phi + pi),
// with parity +1 for scalars (and any even number of theta-derivatives) and
// -1 for odd theta-derivative counts.
enum class PoleParity { Even, Odd };

// A real function sampled on the grid, one value per node.
struct ScalarField {
    GridPtr grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(GridPtr g);
    ScalarField(GridPtr g, double fill);

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    std::size_t size() const { return v.size(); }
};

// Covariant components of a one-form / gradient: (d_theta f, d_phi f).
// For dim 1 only c1 is used.
struct VectorField {
    GridPtr grid;
    std::vector<double> c1, c2;
};

// Covariant components of a symmetric 2-tensor: (T_11, T_12, T_22) in the
// (theta, phi) chart. Symmetry is exact by storage. For dim 1 only c11.
struct SymTensorField {
    GridPtr grid;
    std::vector<double> c11, c12, c22;
};

// Discretized round sphere S^n, n = 1 or 2.
//
// n = 2: product grid, Gauss-Legendre nodes in cos(theta) (so colatitudes
//        cluster slightly toward the poles but stay strictly inside (0, pi))
//        times a uniform azimuth with an even node count. Derivatives use
//        4th-order centered differences in theta (7-point rows: 5-point
//        Fornberg weights plus a 6th-difference correction that makes the
//        quadrature-weighted divergence of the Laplacian vanish identically)
//        with pole-crossing continuation, and exact trigonometric
//        differentiation in phi via the discrete Fourier transform.
// n = 1: uniform periodic grid with fully spectral differentiation.
//
// Node ordering: index = ring * nphi + column for n = 2; index = column for
// n = 1. All quadrature weights are positive and sum to |S^n|.
class SphereGrid : public std::enable_shared_from_this<SphereGrid> {
public:
    ~SphereGrid();
    SphereGrid(const SphereGrid&) = delete;
    SphereGrid& operator=(const SphereGrid&) = delete;

    int dim() const { return dim_; }
    int ntheta() const { return ntheta_; }   // rings (n=2) or nodes (n=1)
    int nphi() const { return nphi_; }       // azimuth nodes (n=2), else 1
    int nodes() const { return nnodes_; }
    double area() const { return area_; }    // |S^n| = 2*pi or 4*pi

    double theta(int i) const { return theta_[i]; }
    double phi(int j) const { return phi_[j]; }
    double weight(int node) const { return weights_[node]; }
    const std::vector<double>& weights() const { return weights_; }

    int node_index(int i, int j) const { return dim_ == 2 ? i * nphi_ + j : i; }
    double node_theta(int node) const { return theta_[dim_ == 2 ? node / nphi_ : node]; }
    double node_phi(int node) const { return dim_ == 2 ? phi_[node % nphi_] : 0.0; }

    // Unit vector of a node direction in R^{n+1} (z-component last for n=2;
    // for n=1 the third component is 0).
    std::array<double, 3> unit_vector(int node) const;

    // Round-metric helpers at ring i (n=2). sigma_thth = 1, sigma_phph =
    // sin^2(theta); the only nonzero Christoffels are hard-coded inside the
    // derivative routines.
    double sin_theta(int i) const { return sin_theta_[i]; }
    double cos_theta(int i) const { return cos_theta_[i]; }
    double cot_theta(int i) const { return cot_theta_[i]; }

    // Smallest colatitude spacing adjacent to ring i (used by time-step
    // stability estimates).
    double dtheta_min(int i) const { return dtheta_min_[i]; }

    // Largest spherical-harmonic degree the grid can analyze.
    int max_degree() const;

    friend GridPtr make_grid(int dim, int res1, int res2);
    friend double integrate(const ScalarField& f);
    friend VectorField gradient(const ScalarField& f);
    friend SymTensorField hessian(const ScalarField& f);
    friend ScalarField laplacian(const ScalarField& f);
    friend ScalarField filter_azimuthal(const ScalarField& f, double beta);
    friend std::vector<double> harmonic_coeffs(const ScalarField& f, int l_max);
    friend ScalarField harmonic_field(const GridPtr& g, int l, int m);
    friend class FieldInterpolator;

private:
    SphereGrid() = default;

    struct Fft;                      // FFTW plans, hidden from the header
    std::unique_ptr<Fft> fft_;

    int dim_ = 2;
    int ntheta_ = 0, nphi_ = 0, nnodes_ = 0;
    double area_ = 0.0;

    std::vector<double> theta_, phi_;
    std::vector<double> weights_;                          // per node
    std::vector<double> sin_theta_, cos_theta_, cot_theta_;
    std::vector<double> dtheta_min_;

    // theta-difference rows (n=2 only): 7 taps per ring; taps may read a
    // mirrored ring on the other side of a pole ("flip" = evaluate at
    // phi + pi, with the sign supplied by the field's PoleParity).
    struct ThetaRow {
        std::array<int, 7> src;      // source ring of each tap
        std::array<bool, 7> flip;
        std::array<double, 7> w1;    // first derivative (taps 1..5 used)
        std::array<double, 7> w2;    // second derivative (all 7 taps)
    };
    std::vector<ThetaRow> rows_;

    // extended-colatitude bookkeeping shared with FieldInterpolator
    double theta_ext(int m) const;
    int src_row(int m) const;
    bool row_flipped(int m) const;

    void build_dim2(int ntheta, int nphi);
    void build_dim1(int nnodes);

    // internal per-ring spectral helpers (n=2) and full-circle (n=1)
    void ring_dphi(const double* in, double* out) const;
    void ring_dphi2(const double* in, double* out) const;
    void ring_filter(double* inout, double kcut) const;
    void apply_theta(const ScalarField& f, int deriv, std::vector<double>& out,
                     PoleParity parity) const;
};

// --- Operations ------------------------------------------------------------

// Build a grid. res1 = colatitude rings (n=2) or node count (n=1); res2 =
// azimuth nodes (n=2 only, must be even). Minimum 8 per dimension.
GridPtr make_grid(int dim, int res1, int res2 = 0);

// Quadrature: sum of f * weights. Exact for zonal polynomials up to degree
// 2*ntheta-1 and azimuthal trigonometric polynomials below the node count.
double integrate(const ScalarField& f);

// Covariant derivatives with respect to the round metric. For scalars the
// gradient is the coordinate partials; the Hessian subtracts the hard-coded
// Christoffel terms
//   H_qp = f_qp - cot(theta) f_p,   H_pp = f_pp + sin(theta)cos(theta) f_q
// (q = theta, p = phi). laplacian(f) is exactly the sigma^{ij} contraction of
// hessian(f) -- same stencils, no separate discretization.
VectorField gradient(const ScalarField& f);
SymTensorField hessian(const ScalarField& f);
ScalarField laplacian(const ScalarField& f);

// Zero out azimuthal Fourier modes with k > beta * (nphi/2) * sin(theta) on
// each ring (identity for n = 1). Standard lat-long pole treatment: the polar
// rings cannot carry -- and must not time-step-limit -- azimuthal modes finer
// than their physical resolution.
ScalarField filter_azimuthal(const ScalarField& f, double beta);

// Per-degree amplitudes a_l = sqrt(sum_m <f, Y_lm>^2), l = 0..l_max, in the
// real orthonormal harmonic basis (so f == c gives a_0 = c*sqrt(|S^n|) and a
// unit-normalized degree-l harmonic of amplitude eps gives a_l = eps).
std::vector<double> harmonic_coeffs(const ScalarField& f, int l_max);

// Real orthonormal spherical harmonic sampled on the grid. n=2: -l <= m <= l,
// m > 0 cosine branch, m < 0 sine branch. n=1: m = 0 (constant, l must be 0)
// or m = +1 / -1 for cos(l theta)/sqrt(pi), sin(l theta)/sqrt(pi).
ScalarField harmonic_field(const GridPtr& g, int l, int m);

// Bicubic (4x4 Lagrange) interpolation of a node field at arbitrary angles,
// with pole-crossing ghost rows controlled by the field's PoleParity and an
// optional sign flip of 1/sin(theta)-type prefactors (see SinParity below).
//
// Fields carrying an odd power of sin(theta) in their definition (e.g. the
// orthonormal-frame component f_phi / sin(theta)) flip sign across a pole in
// addition to their derivative parity; `odd_sin_factor` accounts for that.
class FieldInterpolator {
public:
    FieldInterpolator(const ScalarField& f, PoleParity parity,
                      bool odd_sin_factor = false);
    double operator()(double theta, double phi) const;

private:
    GridPtr grid_;
    std::vector<double> v_;
    int sign_ = 1;
};

} // namespace hgf
