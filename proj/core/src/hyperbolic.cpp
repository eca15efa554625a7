#include "hgf/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hgf {

namespace {

constexpr double kPi = 3.14159265358979323846;

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

double norm3(const std::array<double, 3>& a) { return std::sqrt(dot3(a, a)); }

std::array<double, 3> normalized(const std::array<double, 3>& a) {
    const double n = norm3(a);
    if (n < 1e-300) throw ConfigError("direction vector must be nonzero");
    return {a[0] / n, a[1] / n, a[2] / n};
}

// (theta, phi) of a unit vector, phi wrapped to [0, 2 pi)
std::pair<double, double> angles_of(int dim, const std::array<double, 3>& e) {
    if (dim == 1) {
        double th = std::atan2(e[1], e[0]);
        if (th < 0) th += 2.0 * kPi;
        return {th, 0.0};
    }
    const double z = std::clamp(e[2], -1.0, 1.0);
    double ph = std::atan2(e[1], e[0]);
    if (ph < 0) ph += 2.0 * kPi;
    return {std::acos(z), ph};
}

} // namespace

// --- geodesic-ball closed forms -----------------------------------------------

double ball_volume(int n, double rho) {
    if (n == 2) return kPi * (std::sinh(2.0 * rho) - 2.0 * rho);
    if (n == 1) return 2.0 * kPi * (std::cosh(rho) - 1.0);
    throw ConfigError("dimension must be 1 or 2");
}

double ball_quermass(int n, int k, double rho) {
    const double sh = std::sinh(rho);
    if (n == 2) {
        if (k == 0) return 4.0 * kPi * sh * sh;
        if (k == 1) return 2.0 * kPi * std::sinh(2.0 * rho) + 4.0 * kPi * rho;
        if (k == 2) return 4.0 * kPi;
    } else if (n == 1) {
        if (k == 0) return 2.0 * kPi * sh;
        if (k == 1) return 2.0 * kPi;
    }
    throw ConfigError("ball_quermass: k out of range for this dimension");
}

double ball_kbar(int n, double rho) {
    return std::pow(std::cosh(rho) / std::sinh(rho), n);
}

double sinh_integral(int n, double rho) {
    if (n == 1) return std::cosh(rho) - 1.0;
    return 0.5 * (std::sinh(rho) * std::cosh(rho) - rho);
}

double ball_radius_for_volume(int n, double volume) {
    if (volume <= 0.0) throw ConfigError("ball volume must be positive");
    if (n == 1) return std::acosh(1.0 + volume / (2.0 * kPi));
    // invert pi (sinh 2 rho - 2 rho), strictly increasing and convex
    double rho = std::max(std::cbrt(3.0 * volume / (4.0 * kPi)),
                          0.5 * std::log(std::max(2.0 * volume / kPi, 1.0)));
    for (int it = 0; it < 100; ++it) {
        const double f = kPi * (std::sinh(2.0 * rho) - 2.0 * rho) - volume;
        const double df = 2.0 * kPi * (std::cosh(2.0 * rho) - 1.0);
        double step = f / df;
        if (step > 0.5 * rho) step = 0.5 * rho; // keep rho positive
        rho -= step;
        if (std::abs(step) <= 1e-15 * (1.0 + rho)) return rho;
    }
    throw Error("ball_radius_for_volume: Newton did not converge");
}

RadialSurface ball_surface(const GridPtr& g, double rho0) {
    if (rho0 <= 0.0) throw ConfigError("ball radius must be positive");
    return RadialSurface{ScalarField(g, rho0), 0};
}

// --- pointwise geometry ----------------------------------------------------------

SurfaceGeometry geometry(const RadialSurface& s) {
    const GridPtr& g = s.rho.grid;
    const int n = g->dim();
    const int N = g->nodes();
    for (int k = 0; k < N; ++k)
        if (!(s.rho.v[k] > 0.0))
            throw DegenerateSurfaceError("radial function must be positive everywhere");

    const VectorField grad = gradient(s.rho);
    const SymTensorField hess = hessian(s.rho);

    SurfaceGeometry out;
    out.grid = g;
    out.g.grid = out.h.grid = g;
    out.g.c11.resize(N);
    out.g.c12.assign(N, 0.0);
    out.g.c22.assign(N, 0.0);
    out.h = out.g;
    out.v = ScalarField(g);
    out.u = ScalarField(g);
    out.nu_r = ScalarField(g);
    out.nu_ang.grid = g;
    out.nu_ang.c1.resize(N);
    out.nu_ang.c2.assign(N, 0.0);
    out.dmu = ScalarField(g);
    out.kappa1.resize(N);
    if (n == 2) out.kappa2.resize(N);
    out.sigma1 = ScalarField(g);
    out.K = ScalarField(g);

    for (int k = 0; k < N; ++k) {
        const double rho = s.rho.v[k];
        const double sh = std::sinh(rho), ch = std::cosh(rho);
        if (n == 2) {
            const int i = k / g->nphi();
            const double s2 = g->sin_theta(i) * g->sin_theta(i);
            const double r1 = grad.c1[k], r2 = grad.c2[k];
            const double grad2 = r1 * r1 + r2 * r2 / s2;
            const double v2 = sh * sh + grad2;
            if (!std::isfinite(v2) || v2 < 1e-14)
                throw DegenerateSurfaceError("sinh^2(rho) + |grad rho|^2 degenerate at a node");
            const double v = std::sqrt(v2);

            const double g11 = r1 * r1 + sh * sh;
            const double g12 = r1 * r2;
            const double g22 = r2 * r2 + sh * sh * s2;
            // h_ij = (-sinh(rho) rho_ij + 2 cosh(rho) rho_i rho_j
            //         + sinh^2(rho) cosh(rho) sigma_ij) / v
            const double h11 = (-sh * hess.c11[k] + 2.0 * ch * r1 * r1 + sh * sh * ch) / v;
            const double h12 = (-sh * hess.c12[k] + 2.0 * ch * r1 * r2) / v;
            const double h22 = (-sh * hess.c22[k] + 2.0 * ch * r2 * r2 + sh * sh * ch * s2) / v;

            const double detg = g11 * g22 - g12 * g12;
            // kappa solve det(h - kappa g) = 0, a quadratic in kappa. The
            // discriminant T^2 - 4 det(g) det(h) vanishes identically at
            // umbilic points, so that form loses half the digits to
            // cancellation (sqrt of the rounding residue is ~1e-8); the
            // expansion below is the same polynomial without the subtraction
            // of two nearly equal squares.
            const double T = h11 * g22 + h22 * g11 - 2.0 * h12 * g12;
            const double d1 = g22 * h11 - g11 * h22;
            const double d2 = g22 * h12 - g12 * h22;
            const double d3 = g11 * h12 - g12 * h11;
            const double disc = std::max(d1 * d1 + 4.0 * d2 * d3, 0.0);
            const double root = std::sqrt(disc);
            const double k2 = (T + root) / (2.0 * detg);
            const double k1 = (T - root) / (2.0 * detg);
            if (!std::isfinite(k1) || !std::isfinite(k2))
                throw DegenerateSurfaceError("non-finite principal curvature");

            out.g.c11[k] = g11;
            out.g.c12[k] = g12;
            out.g.c22[k] = g22;
            out.h.c11[k] = h11;
            out.h.c12[k] = h12;
            out.h.c22[k] = h22;
            out.v.v[k] = v;
            out.u.v[k] = sh * sh / v;
            out.nu_r.v[k] = sh / v;
            out.nu_ang.c1[k] = -r1 / (sh * v);
            out.nu_ang.c2[k] = -r2 / (s2 * sh * v);
            out.dmu.v[k] = sh * v;
            out.kappa1[k] = k1;
            out.kappa2[k] = k2;
            out.sigma1.v[k] = k1 + k2;
            out.K.v[k] = k1 * k2;
        } else {
            const double r1 = grad.c1[k];
            const double v2 = sh * sh + r1 * r1;
            if (!std::isfinite(v2) || v2 < 1e-14)
                throw DegenerateSurfaceError("sinh^2(rho) + |grad rho|^2 degenerate at a node");
            const double v = std::sqrt(v2);
            const double g11 = v2;
            const double h11 = (-sh * hess.c11[k] + 2.0 * ch * r1 * r1 + sh * sh * ch) / v;
            const double kap = h11 / g11;
            if (!std::isfinite(kap))
                throw DegenerateSurfaceError("non-finite principal curvature");
            out.g.c11[k] = g11;
            out.h.c11[k] = h11;
            out.v.v[k] = v;
            out.u.v[k] = sh * sh / v;
            out.nu_r.v[k] = sh / v;
            out.nu_ang.c1[k] = -r1 / (sh * v);
            out.dmu.v[k] = v;
            out.kappa1[k] = kap;
            out.sigma1.v[k] = kap;
            out.K.v[k] = kap;
        }
    }
    return out;
}

ScalarField gauss_curvature(const RadialSurface& s) {
    const GridPtr& g = s.rho.grid;
    const int n = g->dim();
    for (int k = 0; k < g->nodes(); ++k)
        if (!(s.rho.v[k] > 0.0))
            throw DegenerateSurfaceError("radial function must be positive everywhere");
    const VectorField grad = gradient(s.rho);
    const SymTensorField hess = hessian(s.rho);
    ScalarField K(g);
    for (int k = 0; k < g->nodes(); ++k) {
        const double rho = s.rho.v[k];
        const double sh = std::sinh(rho), ch = std::cosh(rho);
        if (n == 2) {
            const int i = k / g->nphi();
            const double s2 = g->sin_theta(i) * g->sin_theta(i);
            const double r1 = grad.c1[k], r2 = grad.c2[k];
            const double v2 = sh * sh + r1 * r1 + r2 * r2 / s2;
            if (!std::isfinite(v2) || v2 < 1e-14)
                throw DegenerateSurfaceError("sinh^2(rho) + |grad rho|^2 degenerate at a node");
            const double A11 = -sh * hess.c11[k] + 2.0 * ch * r1 * r1 + sh * sh * ch;
            const double A12 = -sh * hess.c12[k] + 2.0 * ch * r1 * r2;
            const double A22 = -sh * hess.c22[k] + 2.0 * ch * r2 * r2 + sh * sh * ch * s2;
            // det is taken relative to the round metric, hence the det sigma
            // = sin^2(theta) divisor alongside v^{n+2} sinh^{2n-2}(rho)
            K.v[k] = (A11 * A22 - A12 * A12) / (s2 * v2 * v2 * sh * sh);
        } else {
            const double r1 = grad.c1[k];
            const double v2 = sh * sh + r1 * r1;
            if (!std::isfinite(v2) || v2 < 1e-14)
                throw DegenerateSurfaceError("sinh^2(rho) + |grad rho|^2 degenerate at a node");
            const double A11 = -sh * hess.c11[k] + 2.0 * ch * r1 * r1 + sh * sh * ch;
            K.v[k] = A11 / (v2 * std::sqrt(v2));
        }
    }
    return K;
}

double enclosed_volume(const RadialSurface& s) {
    const GridPtr& g = s.rho.grid;
    double acc = 0.0;
    for (int k = 0; k < g->nodes(); ++k)
        acc += g->weight(k) * sinh_integral(g->dim(), s.rho.v[k]);
    return acc;
}

Functionals quermassintegrals(const SurfaceGeometry& geom, double volume) {
    const GridPtr& g = geom.grid;
    const int n = g->dim();
    Functionals F;
    F.volume = volume;

    ScalarField sig1w(g), sigNw(g);
    for (int k = 0; k < g->nodes(); ++k) {
        sig1w.v[k] = geom.sigma1.v[k] * geom.dmu.v[k];
        sigNw.v[k] = geom.K.v[k] * geom.dmu.v[k];
    }
    F.area = integrate(geom.dmu);
    const double int_sig1 = integrate(sig1w);
    const double int_sigN = integrate(sigNw);

    F.Phi.assign(n + 1, 0.0);
    F.Phi[n] = F.area;            // sigma_0 = 1
    F.Phi[n - 1] = int_sig1;      // only distinct from the line below when n = 2
    F.Phi[0] = int_sigN;          // sigma_n = K

    F.A.assign(n + 1, 0.0);
    F.A[0] = F.area;
    F.A[1] = int_sig1 - n * volume;
    if (n == 2) F.A[2] = int_sigN - F.A[0]; // recursion with (n-k+1)/(k-1) = 1

    // kbar = integral K dmu / area; for n = 2 this coincides with
    // (A_2 + A_0)/A_0 from the quermassintegral recursion.
    F.kbar = int_sigN / F.area;
    return F;
}

std::pair<double, double> kappa_range(const SurfaceGeometry& geom) {
    double lo = geom.kappa1[0];
    double hi = geom.kappa2.empty() ? geom.kappa1[0] : geom.kappa2[0];
    for (std::size_t k = 0; k < geom.kappa1.size(); ++k) {
        lo = std::min(lo, geom.kappa1[k]);
        hi = std::max(hi, geom.kappa2.empty() ? geom.kappa1[k] : geom.kappa2[k]);
    }
    return {lo, hi};
}

// --- center displacement machinery --------------------------------------------

std::vector<double> shifted_radii(const RadialSurface& s, const std::array<double, 3>& dir,
                                  double dist) {
    const GridPtr& g = s.rho.grid;
    const std::array<double, 3> w = normalized(dir);
    const double chd = std::cosh(dist), shd = std::sinh(dist);
    std::vector<double> out(g->nodes());
    for (int k = 0; k < g->nodes(); ++k) {
        const double rho = s.rho.v[k];
        const double mu = dot3(g->unit_vector(k), w);
        // hyperbolic law of cosines: distance from the displaced center to
        // the boundary point at (rho, e_k)
        const double arg = chd * std::cosh(rho) - shd * std::sinh(rho) * mu;
        out[k] = std::acosh(std::max(arg, 1.0));
    }
    return out;
}

std::array<double, 3> search_center(
    const RadialSurface& s, const std::function<double(const std::vector<double>&)>& objective) {
    const GridPtr& g = s.rho.grid;
    const int ncoord = g->dim() + 1;

    auto eval = [&](const std::array<double, 3>& z) {
        const double d = norm3(z);
        std::vector<double> radii;
        if (d < 1e-16) {
            radii = s.rho.v;
        } else {
            radii = shifted_radii(s, {z[0] / d, z[1] / d, z[2] / d}, d);
        }
        double rmin = radii[0];
        for (double r : radii) rmin = std::min(rmin, r);
        if (rmin <= 1e-3) return std::numeric_limits<double>::infinity();
        return objective(radii);
    };

    std::array<double, 3> z{0.0, 0.0, 0.0};
    double cur = eval(z);
    double rho_min = s.rho.v[0];
    for (double r : s.rho.v) rho_min = std::min(rho_min, r);
    double step = 0.25 * rho_min;

    int sweeps = 0;
    while (step > 1e-7 && sweeps < 500) {
        ++sweeps;
        bool improved = false;
        for (int d = 0; d < ncoord; ++d) {
            for (double sgn : {1.0, -1.0}) {
                std::array<double, 3> cand = z;
                cand[d] += sgn * step;
                const double val = eval(cand);
                if (val < cur - 1e-14) {
                    z = cand;
                    cur = val;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return z;
}

RadiusBounds inner_outer_radius(const RadialSurface& s) {
    auto radii_at = [&](const std::array<double, 3>& z) {
        const double d = norm3(z);
        if (d < 1e-16) return s.rho.v;
        return shifted_radii(s, {z[0] / d, z[1] / d, z[2] / d}, d);
    };
    const auto z_out = search_center(
        s, [](const std::vector<double>& r) { return *std::max_element(r.begin(), r.end()); });
    const auto z_in = search_center(
        s, [](const std::vector<double>& r) { return -*std::min_element(r.begin(), r.end()); });
    const auto r_out = radii_at(z_out);
    const auto r_in = radii_at(z_in);
    RadiusBounds rb;
    rb.outer = *std::max_element(r_out.begin(), r_out.end());
    rb.inner = *std::min_element(r_in.begin(), r_in.end());
    rb.search_ok = true;
    if (rb.inner > rb.outer) { // pathological search outcome: fall back
        const auto r0 = s.rho.v;
        rb.outer = *std::max_element(r0.begin(), r0.end());
        rb.inner = *std::min_element(r0.begin(), r0.end());
        rb.search_ok = false;
    }
    return rb;
}

RadialSurface recenter(const RadialSurface& s, const std::array<double, 3>& direction,
                       double distance) {
    if (distance < 0.0) throw ConfigError("recenter distance must be >= 0");
    if (distance == 0.0) return s;
    const GridPtr& g = s.rho.grid;
    const int n = g->dim();
    const std::array<double, 3> w = normalized(direction);
    if (n == 1 && std::abs(w[2]) > 1e-12)
        throw ConfigError("recenter direction must lie in the plane for n = 1");

    const FieldInterpolator interp(s.rho, PoleParity::Even);
    auto rho_at = [&](const std::array<double, 3>& e) {
        const auto [th, ph] = angles_of(n, e);
        return interp(th, ph);
    };
    if (rho_at(w) - distance <= 1e-12)
        throw RecenterError("new center is not strictly inside the body");

    double rho_max = s.rho.v[0];
    for (double r : s.rho.v) rho_max = std::max(rho_max, r);
    const double chd = std::cosh(distance), shd = std::sinh(distance);

    RadialSurface out;
    out.rho = ScalarField(g);
    out.center_id = s.center_id + 1;

    for (int k = 0; k < g->nodes(); ++k) {
        const std::array<double, 3> ep = g->unit_vector(k);
        const double mu = dot3(ep, w);
        const std::array<double, 3> eperp{ep[0] - mu * w[0], ep[1] - mu * w[1],
                                          ep[2] - mu * w[2]};
        // point at arc length r from the new center along ep, written in the
        // old polar coordinates (hyperboloid-model algebra)
        auto F = [&](double r) {
            const double chr = std::cosh(r), shr = std::sinh(r);
            const double Xt = chd * chr + shd * shr * mu;  // cosh of old radius
            const double Xw = shd * chr + chd * shr * mu;  // component along w
            const double rho_x = std::acosh(std::max(Xt, 1.0));
            std::array<double, 3> sp{Xw * w[0] + shr * eperp[0], Xw * w[1] + shr * eperp[1],
                                     Xw * w[2] + shr * eperp[2]};
            const double nrm = norm3(sp);
            std::array<double, 3> e = w;
            if (nrm > 1e-14) e = {sp[0] / nrm, sp[1] / nrm, sp[2] / nrm};
            return rho_at(e) - rho_x;
        };
        double a = 0.0, fa = rho_at(w) - distance;
        double b = rho_max + distance + 0.5, fb = F(b);
        int expand = 0;
        while (fb >= 0.0 && expand++ < 5) {
            b *= 1.5;
            fb = F(b);
        }
        if (fb >= 0.0) throw RecenterError("could not bracket the recentered radius");
        double c = b, fc = fb;
        for (int it = 0; it < 100; ++it) {
            c = (a * fb - b * fa) / (fb - fa);
            fc = F(c);
            if (std::abs(fc) < 1e-13 || std::abs(b - a) < 1e-14 * (1.0 + std::abs(b))) break;
            if (fc * fb < 0.0) {
                a = b;
                fa = fb;
            } else {
                fa *= 0.5; // Illinois cut keeps superlinear convergence
            }
            b = c;
            fb = fc;
        }
        if (!(c > 0.0) || !std::isfinite(c))
            throw RecenterError("recentered radius solve failed at a node");
        out.rho.v[k] = c;
    }

    const SurfaceGeometry geom = geometry(out);
    for (int k = 0; k < g->nodes(); ++k)
        if (!(geom.u.v[k] > 0.0))
            throw RecenterError("recentered surface is not a radial graph (u <= 0)");
    return out;
}

} // namespace hgf
