#include "hgf/sphere_grid.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>

#include <Eigen/Dense>
#include <fftw3.h>
#include <gsl/gsl_integration.h>

namespace hgf {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Fornberg's algorithm (Math. Comp. 51, 1988): weights of the m-th derivative
// at point z from samples at x[0..n-1]. Returns only the m-th-order row.
std::vector<double> fd_weights(double z, const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size());
    std::vector<double> c(static_cast<std::size_t>(n) * (m + 1), 0.0);
    auto C = [&](int i, int k) -> double& { return c[static_cast<std::size_t>(i) * (m + 1) + k]; };

    double c1 = 1.0;
    double c4 = x[0] - z;
    C(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    C(i, k) = c1 * (k * C(i - 1, k - 1) - c5 * C(i - 1, k)) / c2;
                C(i, 0) = -c1 * c5 * C(i - 1, 0) / c2;
            }
            for (int k = mn; k >= 1; --k)
                C(j, k) = (c4 * C(j, k) - k * C(j, k - 1)) / c3;
            C(j, 0) = c4 * C(j, 0) / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = C(i, m);
    return w;
}

} // namespace

// --- FFT handle --------------------------------------------------------------

struct SphereGrid::Fft {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
    int len = 0;

    explicit Fft(int n) : len(n) {
        std::vector<double> re(n);
        std::vector<std::complex<double>> sp(n / 2 + 1);
        // FFTW_ESTIMATE keeps plan selection (hence output bits) reproducible;
        // FFTW_UNALIGNED lets the plans run on plain std::vector storage.
        r2c = fftw_plan_dft_r2c_1d(n, re.data(),
                                   reinterpret_cast<fftw_complex*>(sp.data()),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
        c2r = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(sp.data()),
                                   re.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    ~Fft() {
        if (r2c) fftw_destroy_plan(r2c);
        if (c2r) fftw_destroy_plan(c2r);
    }

    void forward(const double* in, std::complex<double>* out) const {
        fftw_execute_dft_r2c(r2c, const_cast<double*>(in),
                             reinterpret_cast<fftw_complex*>(out));
    }
    void backward(std::complex<double>* in, double* out) const {
        fftw_execute_dft_c2r(c2r, reinterpret_cast<fftw_complex*>(in), out);
    }
};

SphereGrid::~SphereGrid() = default;

// --- field constructors ------------------------------------------------------

ScalarField::ScalarField(GridPtr g) : grid(std::move(g)), v(grid->nodes(), 0.0) {}
ScalarField::ScalarField(GridPtr g, double fill) : grid(std::move(g)), v(grid->nodes(), fill) {}

// --- grid construction -------------------------------------------------------

GridPtr make_grid(int dim, int res1, int res2) {
    if (dim != 1 && dim != 2)
        throw ConfigError("sphere dimension must be 1 or 2");
    if (res1 < 8)
        throw ConfigError("grid resolution below minimum of 8 per dimension");
    auto g = std::shared_ptr<SphereGrid>(new SphereGrid());
    if (dim == 2) {
        if (res2 < 8)
            throw ConfigError("grid resolution below minimum of 8 per dimension");
        if (res2 % 2 != 0)
            throw ConfigError("azimuth node count must be even (pole continuation reads phi + pi)");
        g->build_dim2(res1, res2);
    } else {
        g->build_dim1(res1);
    }
    return g;
}

double SphereGrid::theta_ext(int m) const {
    if (m < 0) return -theta_[-1 - m];
    if (m >= ntheta_) return 2.0 * kPi - theta_[2 * ntheta_ - 1 - m];
    return theta_[m];
}
int SphereGrid::src_row(int m) const {
    if (m < 0) return -1 - m;
    if (m >= ntheta_) return 2 * ntheta_ - 1 - m;
    return m;
}
bool SphereGrid::row_flipped(int m) const { return m < 0 || m >= ntheta_; }

void SphereGrid::build_dim2(int ntheta, int nphi) {
    dim_ = 2;
    ntheta_ = ntheta;
    nphi_ = nphi;
    nnodes_ = ntheta * nphi;
    area_ = 4.0 * kPi;

    // Gauss-Legendre colatitudes: nodes of the ntheta-point rule in
    // x = cos(theta), listed with theta increasing from the north pole.
    gsl_integration_glfixed_table* tbl = gsl_integration_glfixed_table_alloc(ntheta);
    std::vector<double> wtheta(ntheta);
    theta_.resize(ntheta);
    for (int i = 0; i < ntheta; ++i) {
        double x, w;
        gsl_integration_glfixed_point(-1.0, 1.0, ntheta - 1 - i, &x, &w, tbl);
        theta_[i] = std::acos(x);
        wtheta[i] = w;
    }
    gsl_integration_glfixed_table_free(tbl);

    phi_.resize(nphi);
    for (int j = 0; j < nphi; ++j) phi_[j] = 2.0 * kPi * j / nphi;

    sin_theta_.resize(ntheta);
    cos_theta_.resize(ntheta);
    cot_theta_.resize(ntheta);
    for (int i = 0; i < ntheta; ++i) {
        sin_theta_[i] = std::sin(theta_[i]);
        cos_theta_[i] = std::cos(theta_[i]);
        cot_theta_[i] = cos_theta_[i] / sin_theta_[i];
    }

    weights_.resize(nnodes_);
    const double wphi = 2.0 * kPi / nphi;
    for (int i = 0; i < ntheta; ++i)
        for (int j = 0; j < nphi; ++j) weights_[i * nphi + j] = wtheta[i] * wphi;

    dtheta_min_.resize(ntheta);
    for (int i = 0; i < ntheta; ++i)
        dtheta_min_[i] = std::min(theta_[i] - theta_ext(i - 1), theta_ext(i + 1) - theta_[i]);

    // theta-derivative rows. Base: 5-point Fornberg first/second derivative on
    // taps i-2..i+2. The second derivative then gets a 6th-difference
    // correction (7 taps, one coefficient c_i per ring) so that the
    // quadrature-weighted column sums of D2 + diag(cot)*D1 vanish: that is
    // exactly the statement integrate(laplacian(f)) == 0 for every f, and a
    // plain stencil only satisfies it to O(h^4).
    rows_.resize(ntheta);
    std::vector<double> pat_h4(ntheta); // h_i^4 scale of the correction row
    for (int i = 0; i < ntheta; ++i) {
        ThetaRow& r = rows_[i];
        for (int t = 0; t < 7; ++t) {
            const int m = i - 3 + t;
            r.src[t] = src_row(m);
            r.flip[t] = row_flipped(m);
            r.w1[t] = 0.0;
            r.w2[t] = 0.0;
        }
        std::vector<double> x5(5), x7(7);
        for (int t = 0; t < 5; ++t) x5[t] = theta_ext(i - 2 + t);
        for (int t = 0; t < 7; ++t) x7[t] = theta_ext(i - 3 + t);
        const std::vector<double> w1 = fd_weights(theta_[i], x5, 1);
        const std::vector<double> w2 = fd_weights(theta_[i], x5, 2);
        for (int t = 0; t < 5; ++t) {
            r.w1[t + 1] = w1[t];
            r.w2[t + 1] = w2[t];
        }
        const double h = 0.5 * (theta_ext(i + 1) - theta_ext(i - 1));
        pat_h4[i] = h * h * h * h;
    }

    // Fold the operators to ntheta x ntheta matrices acting on ring means
    // (ghost rings read the mirrored ring; the azimuth shift does not change a
    // ring sum) and solve for the correction coefficients.
    using Mat = Eigen::MatrixXd;
    using Vec = Eigen::VectorXd;
    Mat D1 = Mat::Zero(ntheta, ntheta), D2 = Mat::Zero(ntheta, ntheta),
        P = Mat::Zero(ntheta, ntheta);
    for (int i = 0; i < ntheta; ++i) {
        std::vector<double> x7(7);
        for (int t = 0; t < 7; ++t) x7[t] = theta_ext(i - 3 + t);
        const std::vector<double> w6 = fd_weights(theta_[i], x7, 6);
        for (int t = 0; t < 7; ++t) {
            const int m = i - 3 + t;
            D1(i, src_row(m)) += rows_[i].w1[t];
            D2(i, src_row(m)) += rows_[i].w2[t];
            P(i, src_row(m)) += w6[t] * pat_h4[i];
        }
    }
    Vec w = Eigen::Map<const Vec>(wtheta.data(), ntheta);
    Vec wcot(ntheta);
    for (int i = 0; i < ntheta; ++i) wcot(i) = wtheta[i] * cot_theta_[i];
    const Vec zeta = D2.transpose() * w + D1.transpose() * wcot;
    // M c = -zeta with M_{k,i} = w_i P_{i,k}; M is rank ntheta-1 with left
    // null vector 1 and the system is consistent (column sums of D1, D2, P all
    // vanish), so take the minimum-norm solution.
    Mat M = P.transpose() * w.asDiagonal();
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(M);
    const Vec c = cod.solve(-zeta);
    const double resid = (M * c + zeta).lpNorm<Eigen::Infinity>();
    const double scale = zeta.lpNorm<Eigen::Infinity>() + 1.0;
    if (resid > 1e-9 * scale)
        throw Error("grid build: divergence-compatibility solve did not close");
    for (int i = 0; i < ntheta; ++i) {
        std::vector<double> x7(7);
        for (int t = 0; t < 7; ++t) x7[t] = theta_ext(i - 3 + t);
        const std::vector<double> w6 = fd_weights(theta_[i], x7, 6);
        for (int t = 0; t < 7; ++t) rows_[i].w2[t] += c(i) * w6[t] * pat_h4[i];
    }

    fft_ = std::make_unique<Fft>(nphi);
}

void SphereGrid::build_dim1(int n) {
    dim_ = 1;
    ntheta_ = n;
    nphi_ = 1;
    nnodes_ = n;
    area_ = 2.0 * kPi;

    theta_.resize(n);
    for (int i = 0; i < n; ++i) theta_[i] = 2.0 * kPi * i / n;
    phi_.assign(1, 0.0);
    weights_.assign(n, 2.0 * kPi / n);
    sin_theta_.resize(n);
    cos_theta_.resize(n);
    cot_theta_.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        sin_theta_[i] = std::sin(theta_[i]);
        cos_theta_[i] = std::cos(theta_[i]);
    }
    dtheta_min_.assign(n, 2.0 * kPi / n);
    fft_ = std::make_unique<Fft>(n);
}

std::array<double, 3> SphereGrid::unit_vector(int node) const {
    if (dim_ == 2) {
        const int i = node / nphi_, j = node % nphi_;
        return {sin_theta_[i] * std::cos(phi_[j]), sin_theta_[i] * std::sin(phi_[j]),
                cos_theta_[i]};
    }
    return {cos_theta_[node], sin_theta_[node], 0.0};
}

int SphereGrid::max_degree() const {
    return dim_ == 2 ? std::min(ntheta_ - 1, nphi_ / 2 - 1) : ntheta_ / 2 - 1;
}

// --- spectral ring helpers ---------------------------------------------------

void SphereGrid::ring_dphi(const double* in, double* out) const {
    const int n = (dim_ == 2) ? nphi_ : ntheta_;
    std::vector<std::complex<double>> sp(n / 2 + 1);
    fft_->forward(in, sp.data());
    for (int k = 0; k <= n / 2; ++k) sp[k] *= std::complex<double>(0.0, k) / double(n);
    sp[n / 2] = 0.0; // the Nyquist mode has no well-defined odd derivative
    fft_->backward(sp.data(), out);
}

void SphereGrid::ring_dphi2(const double* in, double* out) const {
    const int n = (dim_ == 2) ? nphi_ : ntheta_;
    std::vector<std::complex<double>> sp(n / 2 + 1);
    fft_->forward(in, sp.data());
    for (int k = 0; k <= n / 2; ++k) sp[k] *= -double(k) * double(k) / double(n);
    fft_->backward(sp.data(), out);
}

void SphereGrid::ring_filter(double* inout, double kcut) const {
    const int n = (dim_ == 2) ? nphi_ : ntheta_;
    std::vector<std::complex<double>> sp(n / 2 + 1);
    fft_->forward(inout, sp.data());
    for (int k = 0; k <= n / 2; ++k)
        sp[k] *= (k <= kcut) ? 1.0 / n : 0.0;
    fft_->backward(sp.data(), inout);
}

void SphereGrid::apply_theta(const ScalarField& f, int deriv, std::vector<double>& out,
                             PoleParity parity) const {
    out.assign(nnodes_, 0.0);
    const double psign = (parity == PoleParity::Even) ? 1.0 : -1.0;
    const int half = nphi_ / 2;
    for (int i = 0; i < ntheta_; ++i) {
        const ThetaRow& r = rows_[i];
        for (int t = 0; t < 7; ++t) {
            const double w = (deriv == 1) ? r.w1[t] : r.w2[t];
            if (w == 0.0) continue;
            const double s = r.flip[t] ? psign * w : w;
            const double* src = f.v.data() + static_cast<std::size_t>(r.src[t]) * nphi_;
            double* dst = out.data() + static_cast<std::size_t>(i) * nphi_;
            if (r.flip[t]) {
                for (int j = 0; j < nphi_; ++j) dst[j] += s * src[(j + half) % nphi_];
            } else {
                for (int j = 0; j < nphi_; ++j) dst[j] += s * src[j];
            }
        }
    }
}

// --- operations ----------------------------------------------------------------

double integrate(const ScalarField& f) {
    const SphereGrid& g = *f.grid;
    double acc = 0.0;
    for (int k = 0; k < g.nnodes_; ++k) acc += g.weights_[k] * f.v[k];
    return acc;
}

VectorField gradient(const ScalarField& f) {
    const SphereGrid& g = *f.grid;
    VectorField out;
    out.grid = f.grid;
    if (g.dim_ == 2) {
        g.apply_theta(f, 1, out.c1, PoleParity::Even);
        out.c2.resize(g.nnodes_);
        for (int i = 0; i < g.ntheta_; ++i)
            g.ring_dphi(f.v.data() + static_cast<std::size_t>(i) * g.nphi_,
                        out.c2.data() + static_cast<std::size_t>(i) * g.nphi_);
    } else {
        out.c1.resize(g.nnodes_);
        g.ring_dphi(f.v.data(), out.c1.data());
        out.c2.assign(g.nnodes_, 0.0);
    }
    return out;
}

SymTensorField hessian(const ScalarField& f) {
    const SphereGrid& g = *f.grid;
    SymTensorField out;
    out.grid = f.grid;
    if (g.dim_ == 1) {
        out.c11.resize(g.nnodes_);
        g.ring_dphi2(f.v.data(), out.c11.data());
        out.c12.assign(g.nnodes_, 0.0);
        out.c22.assign(g.nnodes_, 0.0);
        return out;
    }
    std::vector<double> ftheta;
    g.apply_theta(f, 1, ftheta, PoleParity::Even);
    g.apply_theta(f, 2, out.c11, PoleParity::Even);
    out.c12.resize(g.nnodes_);
    out.c22.resize(g.nnodes_);
    std::vector<double> fphi(g.nnodes_), fphiphi(g.nphi_);
    for (int i = 0; i < g.ntheta_; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * g.nphi_;
        g.ring_dphi(f.v.data() + off, fphi.data() + off);
        g.ring_dphi(ftheta.data() + off, out.c12.data() + off); // f_theta_phi
        g.ring_dphi2(f.v.data() + off, fphiphi.data());
        const double cot = g.cot_theta_[i];
        const double sc = g.sin_theta_[i] * g.cos_theta_[i];
        for (int j = 0; j < g.nphi_; ++j) {
            out.c12[off + j] -= cot * fphi[off + j];
            out.c22[off + j] = fphiphi[j] + sc * ftheta[off + j];
        }
    }
    return out;
}

ScalarField laplacian(const ScalarField& f) {
    const SphereGrid& g = *f.grid;
    const SymTensorField H = hessian(f);
    ScalarField out(f.grid);
    if (g.dim_ == 1) {
        out.v = H.c11;
        return out;
    }
    for (int i = 0; i < g.ntheta_; ++i) {
        const double inv_s2 = 1.0 / (g.sin_theta_[i] * g.sin_theta_[i]);
        const std::size_t off = static_cast<std::size_t>(i) * g.nphi_;
        for (int j = 0; j < g.nphi_; ++j)
            out.v[off + j] = H.c11[off + j] + inv_s2 * H.c22[off + j];
    }
    return out;
}

ScalarField filter_azimuthal(const ScalarField& f, double beta) {
    const SphereGrid& g = *f.grid;
    ScalarField out = f;
    if (g.dim_ == 1) return out;
    for (int i = 0; i < g.ntheta_; ++i) {
        const double kcut = beta * (g.nphi_ / 2) * g.sin_theta_[i];
        g.ring_filter(out.v.data() + static_cast<std::size_t>(i) * g.nphi_, kcut);
    }
    return out;
}

// --- spherical harmonics -------------------------------------------------------

namespace {

// Fully normalized associated Legendre values P_lm(x) for fixed m and
// l = m..l_max, normalization  integral P_lm(x)^2 dx = 1/(2*pi)  so that the
// real basis {P_l0, sqrt(2) P_lm cos(m phi), sqrt(2) P_lm sin(m phi)} is
// orthonormal on the unit sphere. No Condon-Shortley phase.
void legendre_norm(int m, int l_max, double x, std::vector<double>& out) {
    out.assign(l_max - m + 1, 0.0);
    const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
    double pmm = 1.0 / std::sqrt(4.0 * kPi);
    for (int k = 1; k <= m; ++k) pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
    out[0] = pmm;
    if (l_max == m) return;
    double pm1 = std::sqrt(2.0 * m + 3.0) * x * pmm;
    out[1] = pm1;
    for (int l = m + 2; l <= l_max; ++l) {
        const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
        const double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) /
                                   (4.0 * double(l - 1) * (l - 1) - 1.0));
        const double pl = a * (x * pm1 - b * pmm);
        pmm = pm1;
        pm1 = pl;
        out[l - m] = pl;
    }
}

} // namespace

std::vector<double> harmonic_coeffs(const ScalarField& f, int l_max) {
    const SphereGrid& g = *f.grid;
    if (l_max < 0 || l_max > g.max_degree())
        throw ConfigError("harmonic degree exceeds what the resolution supports");
    std::vector<double> amp2(l_max + 1, 0.0);

    if (g.dim_ == 1) {
        const double w = 2.0 * kPi / g.ntheta_;
        std::vector<std::complex<double>> sp(g.ntheta_ / 2 + 1);
        g.fft_->forward(f.v.data(), sp.data());
        // <f, cos(l.)/sqrt(pi)> = w * Re F_l / sqrt(pi), likewise sine.
        for (int l = 0; l <= l_max; ++l) {
            if (l == 0) {
                const double c0 = w * sp[0].real() / std::sqrt(2.0 * kPi);
                amp2[0] = c0 * c0;
            } else {
                const double cc = w * sp[l].real() / std::sqrt(kPi);
                const double cs = -w * sp[l].imag() / std::sqrt(kPi);
                amp2[l] = cc * cc + cs * cs;
            }
        }
    } else {
        // One azimuthal FFT per ring, then Legendre sums per order m.
        const int nspec = g.nphi_ / 2 + 1;
        std::vector<std::complex<double>> ringspec(static_cast<std::size_t>(g.ntheta_) * nspec);
        for (int i = 0; i < g.ntheta_; ++i)
            g.fft_->forward(f.v.data() + static_cast<std::size_t>(i) * g.nphi_,
                            ringspec.data() + static_cast<std::size_t>(i) * nspec);
        const double wphi = 2.0 * kPi / g.nphi_;
        std::vector<double> plm;
        std::vector<double> wtheta(g.ntheta_);
        for (int i = 0; i < g.ntheta_; ++i) wtheta[i] = g.weights_[static_cast<std::size_t>(i) * g.nphi_] / wphi;
        for (int m = 0; m <= l_max; ++m) {
            std::vector<double> ccos(l_max - m + 1, 0.0), csin(l_max - m + 1, 0.0);
            for (int i = 0; i < g.ntheta_; ++i) {
                legendre_norm(m, l_max, g.cos_theta_[i], plm);
                const std::complex<double> Fm =
                    ringspec[static_cast<std::size_t>(i) * nspec + m];
                const double re = Fm.real(), im = -Fm.imag();
                const double wi = wtheta[i] * wphi;
                for (int l = m; l <= l_max; ++l) {
                    ccos[l - m] += wi * plm[l - m] * re;
                    csin[l - m] += wi * plm[l - m] * im;
                }
            }
            const double fac = (m == 0) ? 1.0 : std::sqrt(2.0);
            for (int l = m; l <= l_max; ++l) {
                const double cc = fac * ccos[l - m];
                amp2[l] += cc * cc;
                if (m > 0) {
                    const double cs = fac * csin[l - m];
                    amp2[l] += cs * cs;
                }
            }
        }
    }
    std::vector<double> amp(l_max + 1);
    for (int l = 0; l <= l_max; ++l) amp[l] = std::sqrt(amp2[l]);
    return amp;
}

ScalarField harmonic_field(const GridPtr& g, int l, int m) {
    if (l < 0 || l > g->max_degree())
        throw ConfigError("harmonic degree exceeds what the resolution supports");
    ScalarField f(g);
    if (g->dim() == 1) {
        if (l == 0) {
            if (m != 0) throw ConfigError("n=1 degree 0 has only m = 0");
            const double c = 1.0 / std::sqrt(2.0 * kPi);
            for (auto& x : f.v) x = c;
        } else {
            if (m != 1 && m != -1)
                throw ConfigError("n=1 harmonics take m = +1 (cos) or -1 (sin)");
            const double c = 1.0 / std::sqrt(kPi);
            for (int i = 0; i < g->ntheta(); ++i)
                f.v[i] = c * (m > 0 ? std::cos(l * g->theta(i)) : std::sin(l * g->theta(i)));
        }
        return f;
    }
    if (std::abs(m) > l) throw ConfigError("harmonic order |m| exceeds degree");
    const int ma = std::abs(m);
    std::vector<double> plm;
    for (int i = 0; i < g->ntheta(); ++i) {
        legendre_norm(ma, l, g->cos_theta(i), plm);
        const double p = plm[l - ma];
        for (int j = 0; j < g->nphi(); ++j) {
            double a;
            if (m == 0) a = p;
            else if (m > 0) a = std::sqrt(2.0) * p * std::cos(ma * g->phi(j));
            else a = std::sqrt(2.0) * p * std::sin(ma * g->phi(j));
            f.v[static_cast<std::size_t>(i) * g->nphi() + j] = a;
        }
    }
    return f;
}

// --- interpolation --------------------------------------------------------------

FieldInterpolator::FieldInterpolator(const ScalarField& f, PoleParity parity,
                                     bool odd_sin_factor)
    : grid_(f.grid), v_(f.v) {
    sign_ = (parity == PoleParity::Even ? 1 : -1) * (odd_sin_factor ? -1 : 1);
}

namespace {

// 4-point Lagrange basis at t given abscissae x[0..3].
void lagrange4(const double x[4], double t, double out[4]) {
    for (int a = 0; a < 4; ++a) {
        double p = 1.0;
        for (int b = 0; b < 4; ++b)
            if (b != a) p *= (t - x[b]) / (x[a] - x[b]);
        out[a] = p;
    }
}

} // namespace

double FieldInterpolator::operator()(double theta, double phi) const {
    const SphereGrid& g = *grid_;
    const double twopi = 2.0 * kPi;

    if (g.dim() == 1) {
        double t = std::fmod(theta, twopi);
        if (t < 0) t += twopi;
        const int n = g.ntheta();
        const double h = twopi / n;
        const int k = static_cast<int>(std::floor(t / h));
        double xs[4], b[4];
        double val[4];
        for (int a = 0; a < 4; ++a) {
            const int idx = k - 1 + a;
            xs[a] = idx * h;
            val[a] = v_[((idx % n) + n) % n];
        }
        lagrange4(xs, t, b);
        return b[0] * val[0] + b[1] * val[1] + b[2] * val[2] + b[3] * val[3];
    }

    double ph = std::fmod(phi, twopi);
    if (ph < 0) ph += twopi;
    // locate the extended ring k with theta_ext(k) <= theta < theta_ext(k+1)
    int k = int(std::upper_bound(g.theta_.begin(), g.theta_.end(), theta) -
                g.theta_.begin()) - 1; // in [-1, ntheta-1]
    if (k > g.ntheta() - 2) k = g.ntheta() - 2;
    if (k < -1) k = -1;

    const int nphi = g.nphi();
    const double hphi = twopi / nphi;
    double rowval[4], xs[4];
    for (int a = 0; a < 4; ++a) {
        const int m = k - 1 + a;
        xs[a] = g.theta_ext(m);
        const int src = g.src_row(m);
        const bool flip = g.row_flipped(m);
        double p = ph + (flip ? kPi : 0.0);
        if (p >= twopi) p -= twopi;
        const int j0 = static_cast<int>(std::floor(p / hphi));
        double xp[4], bp[4];
        double vv[4];
        for (int b = 0; b < 4; ++b) {
            const int jj = j0 - 1 + b;
            xp[b] = jj * hphi;
            vv[b] = v_[static_cast<std::size_t>(src) * nphi + ((jj % nphi) + nphi) % nphi];
        }
        lagrange4(xp, p, bp);
        double rv = bp[0] * vv[0] + bp[1] * vv[1] + bp[2] * vv[2] + bp[3] * vv[3];
        if (flip && sign_ < 0) rv = -rv;
        rowval[a] = rv;
    }
    double bt[4];
    lagrange4(xs, theta, bt);
    return bt[0] * rowval[0] + bt[1] * rowval[1] + bt[2] * rowval[2] + bt[3] * rowval[3];
}

} // namespace hgf
