#include "hgf/klein.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace hgf {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Eigenvalues of the symmetric matrix [[a, b], [b, c]], computed without the
// cancellation of the naive trace/determinant route.
void sym_eigs(double a, double b, double c, double& lo, double& hi) {
    double mean = 0.5 * (a + c);
    double half = std::hypot(0.5 * (a - c), b);
    lo = mean - half;
    hi = mean + half;
}

std::array<double, 3> direction_vector(int dim, double th, double ph) {
    if (dim == 1) return {std::cos(th), std::sin(th), 0.0};
    double st = std::sin(th), ct = std::cos(th);
    return {st * std::cos(ph), st * std::sin(ph), ct};
}

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Lattice node reached from ring i +/- 1 columns dj, continuing across a pole
// (mirror the ring, advance the azimuth by half a turn) when i leaves range.
int lattice_node(const SphereGrid& g, int i, int j) {
    int nt = g.ntheta(), np = g.nphi();
    if (g.dim() == 1) return ((i % nt) + nt) % nt;
    if (i < 0) {
        i = -1 - i;
        j += np / 2;
    } else if (i >= nt) {
        i = 2 * nt - 1 - i;
        j += np / 2;
    }
    j = ((j % np) + np) % np;
    return g.node_index(i, j);
}

// Walk uphill (sign = +1) or downhill (-1) on the node lattice until no
// 8-neighbour improves. Strictly convex support/radial objectives have a
// single lattice attractor, so this finds the global optimum from any start.
template <typename F>
int lattice_climb(const SphereGrid& g, int start, int sign, F&& value) {
    int cur = start;
    double best = sign * value(cur);
    bool moved = true;
    while (moved) {
        moved = false;
        int ci = g.dim() == 2 ? cur / g.nphi() : cur;
        int cj = g.dim() == 2 ? cur % g.nphi() : 0;
        for (int di = -1; di <= 1; ++di) {
            for (int dj = -1; dj <= 1; ++dj) {
                if (di == 0 && dj == 0) continue;
                if (g.dim() == 1 && di != 0) continue;
                int cand = g.dim() == 2 ? lattice_node(g, ci + di, cj + dj)
                                        : lattice_node(g, cur + dj, 0);
                double val = sign * value(cand);
                if (val > best) {
                    best = val;
                    cur = cand;
                    moved = true;
                }
            }
        }
    }
    return cur;
}

// Interpolators for a scalar field and its first and second covariant
// derivatives in the orthonormal frame (e_theta, e_phi / sin theta). The
// stored fields absorb the 1/sin(theta) factors at the nodes so evaluation
// needs no further division; the parity/sin flags give each component the
// right continuation across the poles.
struct JetInterpolator {
    FieldInterpolator f, f1, f2, h11, h12, h22;

    JetInterpolator(const ScalarField& field, const VectorField& grad,
                    const SymTensorField& hess)
        : f(field, PoleParity::Even),
          f1(make_c1(grad), PoleParity::Odd),
          f2(over_sin(grad.c2, grad.grid), PoleParity::Even, true),
          h11(make_c11(hess), PoleParity::Even),
          h12(over_sin(hess.c12, hess.grid), PoleParity::Odd, true),
          h22(over_sin2(hess.c22, hess.grid), PoleParity::Even) {}

    static ScalarField make_c1(const VectorField& grad) {
        ScalarField out(grad.grid);
        out.v = grad.c1;
        return out;
    }
    static ScalarField make_c11(const SymTensorField& hess) {
        ScalarField out(hess.grid);
        out.v = hess.c11;
        return out;
    }
    static ScalarField over_sin(const std::vector<double>& comp, const GridPtr& g) {
        ScalarField out(g, 0.0);
        if (g->dim() == 2)
            for (int k = 0; k < g->nodes(); ++k)
                out[k] = comp[k] / g->sin_theta(k / g->nphi());
        return out;
    }
    static ScalarField over_sin2(const std::vector<double>& comp, const GridPtr& g) {
        ScalarField out(g, 0.0);
        if (g->dim() == 2)
            for (int k = 0; k < g->nodes(); ++k) {
                double s = g->sin_theta(k / g->nphi());
                out[k] = comp[k] / (s * s);
            }
        return out;
    }
};

// One evaluation of the scalar jet at (th, ph): value, orthonormal gradient,
// orthonormal covariant Hessian.
struct Jet {
    double val, g1, g2, h11, h12, h22;
};

Jet eval_jet(const JetInterpolator& ji, int dim, double th, double ph) {
    Jet j;
    j.val = ji.f(th, ph);
    j.g1 = ji.f1(th, ph);
    j.h11 = ji.h11(th, ph);
    if (dim == 2) {
        j.g2 = ji.f2(th, ph);
        j.h12 = ji.h12(th, ph);
        j.h22 = ji.h22(th, ph);
    } else {
        j.g2 = j.h12 = j.h22 = 0.0;
    }
    return j;
}

// Move from the point (th, ph) along the tangent vector d1 e_theta + d2 e_phi
// on the unit sphere (geodesic step) and return the new angles.
void sphere_step(int dim, double& th, double& ph, double d1, double d2) {
    if (dim == 1) {
        th += d1;
        th = std::fmod(th, 2.0 * kPi);
        if (th < 0) th += 2.0 * kPi;
        return;
    }
    double st = std::sin(th), ct = std::cos(th);
    double cp = std::cos(ph), sp = std::sin(ph);
    std::array<double, 3> p = {st * cp, st * sp, ct};
    std::array<double, 3> eth = {ct * cp, ct * sp, -st};
    std::array<double, 3> eph = {-sp, cp, 0.0};
    double dn = std::hypot(d1, d2);
    if (dn == 0.0) return;
    double c = std::cos(dn), s = std::sin(dn);
    std::array<double, 3> q;
    for (int k = 0; k < 3; ++k)
        q[k] = c * p[k] + s * (d1 * eth[k] + d2 * eph[k]) / dn;
    double norm = std::sqrt(dot3(q, q));
    th = std::acos(std::clamp(q[2] / norm, -1.0, 1.0));
    ph = std::atan2(q[1], q[0]);
    if (ph < 0) ph += 2.0 * kPi;
}

} // namespace

SupportSurface make_support(ScalarField s, long center_id) {
    if (!s.grid) throw ConfigError("make_support: field not attached to a grid");
    const SphereGrid& g = *s.grid;
    SupportSurface ss;
    ss.grid = s.grid;
    ss.grad_s = gradient(s);
    ss.hess_s = hessian(s);
    ss.grad2 = ScalarField(s.grid);
    ss.r2 = ScalarField(s.grid);
    for (int k = 0; k < g.nodes(); ++k) {
        double sv = s[k];
        if (!std::isfinite(sv) || sv <= 0.0)
            throw DegenerateSurfaceError(
                "support function not positive at node " + std::to_string(k));
        if (sv >= 1.0)
            throw OutOfModelError("support function >= 1 at node " + std::to_string(k));
        double g1 = ss.grad_s.c1[k];
        double grad2 = g1 * g1;
        if (g.dim() == 2) {
            double g2 = ss.grad_s.c2[k] / g.sin_theta(k / g.nphi());
            grad2 += g2 * g2;
        }
        double r2 = sv * sv + grad2;
        if (!(r2 < 1.0))
            throw OutOfModelError("boundary point leaves the model ball at node " +
                                  std::to_string(k) + " (r^2 = " + std::to_string(r2) + ")");
        ss.grad2[k] = grad2;
        ss.r2[k] = r2;
    }
    ss.s = std::move(s);
    ss.center_id = center_id;
    return ss;
}

RadiiTensor radii_tensor(const SupportSurface& ss) {
    const SphereGrid& g = *ss.grid;
    RadiiTensor rt;
    rt.grid = ss.grid;
    rt.r.grid = ss.grid;
    rt.r.c11.resize(g.nodes());
    rt.eig_min = ScalarField(ss.grid);
    rt.eig_max = ScalarField(ss.grid);
    rt.det = ScalarField(ss.grid);
    if (g.dim() == 1) {
        for (int k = 0; k < g.nodes(); ++k) {
            double a = ss.hess_s.c11[k] + ss.s[k];
            rt.r.c11[k] = a;
            rt.eig_min[k] = rt.eig_max[k] = rt.det[k] = a;
        }
        return rt;
    }
    rt.r.c12.resize(g.nodes());
    rt.r.c22.resize(g.nodes());
    for (int k = 0; k < g.nodes(); ++k) {
        double st = g.sin_theta(k / g.nphi());
        double a = ss.hess_s.c11[k] + ss.s[k];
        double b = ss.hess_s.c12[k] / st;
        double c = ss.hess_s.c22[k] / (st * st) + ss.s[k];
        rt.r.c11[k] = a;
        rt.r.c12[k] = b;
        rt.r.c22[k] = c;
        sym_eigs(a, b, c, rt.eig_min[k], rt.eig_max[k]);
        rt.det[k] = a * c - b * b;
    }
    return rt;
}

ScalarField gauss_KY(const RadiiTensor& rt) {
    int worst = 0;
    double worst_eig = rt.eig_min[0];
    for (int k = 1; k < (int)rt.eig_min.size(); ++k)
        if (rt.eig_min[k] < worst_eig) {
            worst_eig = rt.eig_min[k];
            worst = k;
        }
    if (!(worst_eig > 0.0))
        throw ConvexityLossError("radii tensor not positive definite at node " +
                                     std::to_string(worst),
                                 worst, worst_eig);
    ScalarField ky(rt.grid);
    for (int k = 0; k < (int)ky.size(); ++k) ky[k] = 1.0 / rt.det[k];
    return ky;
}

ScalarField gauss_KX(const SupportSurface& ss, const RadiiTensor& rt) {
    ScalarField kx = gauss_KY(rt);
    double p = 0.5 * (ss.grid->dim() + 2);
    for (int k = 0; k < (int)kx.size(); ++k) {
        double one_r2 = 1.0 - ss.r2[k];
        if (!(one_r2 > 0.0))
            throw OutOfModelError("r^2 >= 1 at node " + std::to_string(k));
        kx[k] *= std::pow(one_r2 / (1.0 - ss.s[k] * ss.s[k]), p);
    }
    return kx;
}

ScalarField gauss_KX(const SupportSurface& ss) {
    return gauss_KX(ss, radii_tensor(ss));
}

KleinCoefficients coefficients(const SupportSurface& ss, double alpha) {
    if (!(alpha > 0.0)) throw ConfigError("coefficients: alpha must be positive");
    KleinCoefficients co;
    co.A = ScalarField(ss.grid);
    co.B = ScalarField(ss.grid);
    double pw = 0.5 * (ss.grid->dim() + 2) * alpha;
    for (int k = 0; k < (int)co.A.size(); ++k) {
        double one_r2 = 1.0 - ss.r2[k];
        double one_s2 = 1.0 - ss.s[k] * ss.s[k];
        if (!(one_r2 > 0.0))
            throw OutOfModelError("r^2 >= 1 at node " + std::to_string(k));
        co.A[k] = std::sqrt(one_r2 * one_s2);
        co.B[k] = std::pow(one_r2, pw + 0.5) * std::pow(one_s2, -pw + 0.5);
    }
    return co;
}

InverseWeingarten inverse_weingarten(const SupportSurface& ss) {
    RadiiTensor rt = radii_tensor(ss);
    const SphereGrid& g = *ss.grid;
    InverseWeingarten iw;
    iw.grid = ss.grid;
    iw.m.grid = ss.grid;
    iw.m.c11.resize(g.nodes());
    iw.eig_min = ScalarField(ss.grid);
    iw.eig_max = ScalarField(ss.grid);
    if (g.dim() == 1) {
        for (int k = 0; k < g.nodes(); ++k) {
            double c = std::sqrt((1.0 - ss.s[k] * ss.s[k]) / (1.0 - ss.r2[k]));
            double m = c * c * c * rt.r.c11[k];
            iw.m.c11[k] = m;
            iw.eig_min[k] = iw.eig_max[k] = m;
        }
        return iw;
    }
    iw.m.c12.resize(g.nodes());
    iw.m.c22.resize(g.nodes());
    for (int k = 0; k < g.nodes(); ++k) {
        double one_r2 = 1.0 - ss.r2[k];
        double c = std::sqrt((1.0 - ss.s[k] * ss.s[k]) / one_r2);
        double w1 = ss.grad_s.c1[k];
        double w2 = ss.grad_s.c2[k] / g.sin_theta(k / g.nphi());
        // Q = (I + grad s grad s^T/(1-r2))^{1/2} = I + beta w w^T with
        // beta = ((1 + |w|^2/(1-r2))^{1/2} - 1)/|w|^2 = 1/((1-r2)(1+c)),
        // the last form exact as |w| -> 0 because |w|^2 = r2 - s^2.
        double beta = 1.0 / (one_r2 * (1.0 + c));
        double q11 = 1.0 + beta * w1 * w1;
        double q12 = beta * w1 * w2;
        double q22 = 1.0 + beta * w2 * w2;
        double a = rt.r.c11[k], b = rt.r.c12[k], d = rt.r.c22[k];
        double t11 = q11 * a + q12 * b, t12 = q11 * b + q12 * d;
        double t21 = q12 * a + q22 * b, t22 = q12 * b + q22 * d;
        double m11 = c * (t11 * q11 + t12 * q12);
        double m22 = c * (t21 * q12 + t22 * q22);
        double m12 = c * 0.5 * ((t11 * q12 + t12 * q22) + (t21 * q11 + t22 * q12));
        iw.m.c11[k] = m11;
        iw.m.c12[k] = m12;
        iw.m.c22[k] = m22;
        sym_eigs(m11, m12, m22, iw.eig_min[k], iw.eig_max[k]);
    }
    return iw;
}

ConvexityCertificate convexity_certificate(const SupportSurface& ss) {
    RadiiTensor rt = radii_tensor(ss);
    ConvexityCertificate cert;
    cert.min_eigenvalue = rt.eig_min[0];
    cert.min_det = rt.det[0];
    cert.max_r2 = ss.r2[0];
    cert.worst_node = 0;
    for (int k = 1; k < (int)rt.eig_min.size(); ++k) {
        if (rt.eig_min[k] < cert.min_eigenvalue) {
            cert.min_eigenvalue = rt.eig_min[k];
            cert.worst_node = k;
        }
        cert.min_det = std::min(cert.min_det, rt.det[k]);
        cert.max_r2 = std::max(cert.max_r2, ss.r2[k]);
    }
    cert.pass = cert.min_eigenvalue > 1e-10;
    return cert;
}

ScalarField area_density(const SupportSurface& ss, const RadiiTensor& rt) {
    int n = ss.grid->dim();
    ScalarField d(ss.grid);
    for (int k = 0; k < (int)d.size(); ++k) {
        double one_s2 = 1.0 - ss.s[k] * ss.s[k];
        double one_r2 = 1.0 - ss.r2[k];
        d[k] = rt.det[k] * std::sqrt(one_s2 / std::pow(one_r2, n + 1));
    }
    return d;
}

std::array<double, 3> support_point(const SupportSurface& ss, int node) {
    const SphereGrid& g = *ss.grid;
    double th = g.node_theta(node), ph = g.node_phi(node);
    if (g.dim() == 1) {
        double ct = std::cos(th), st = std::sin(th);
        double s = ss.s[node], g1 = ss.grad_s.c1[node];
        return {s * ct - g1 * st, s * st + g1 * ct, 0.0};
    }
    double st = std::sin(th), ct = std::cos(th);
    double cp = std::cos(ph), sp = std::sin(ph);
    double s = ss.s[node];
    double g1 = ss.grad_s.c1[node];
    double g2 = ss.grad_s.c2[node] / st; // orthonormal e_phi component
    return {s * st * cp + g1 * ct * cp - g2 * sp,
            s * st * sp + g1 * ct * sp + g2 * cp,
            s * ct - g1 * st};
}

SupportSurface project(const RadialSurface& surf, std::vector<double>* contact_theta,
                       std::vector<double>* contact_phi) {
    SurfaceGeometry geom = geometry(surf);
    {
        int worst = 0;
        for (int k = 1; k < (int)geom.kappa1.size(); ++k)
            if (geom.kappa1[k] < geom.kappa1[worst]) worst = k;
        if (!(geom.kappa1[worst] > 0.0))
            throw ConvexityLossError(
                "projection refused: surface not convex (min curvature " +
                    std::to_string(geom.kappa1[worst]) + " at node " + std::to_string(worst) + ")",
                worst, geom.kappa1[worst]);
    }

    const SphereGrid& g = *surf.rho.grid;
    int dim = g.dim();
    const int N = g.nodes();

    // Node data for the lattice stages of the search.
    std::vector<double> tau(N);
    std::vector<std::array<double, 3>> dir(N);
    for (int k = 0; k < N; ++k) {
        tau[k] = std::tanh(surf.rho[k]);
        dir[k] = direction_vector(dim, g.node_theta(k), g.node_phi(k));
    }

    JetInterpolator jet(surf.rho, gradient(surf.rho), hessian(surf.rho));
    double hstep = kPi / (dim == 2 ? g.ntheta() : g.nodes() / 2);

    // Strided coarse-scan candidates (the climb corrects any stride miss).
    std::vector<int> coarse;
    if (dim == 2) {
        int si = std::max(1, g.ntheta() / 16), sj = std::max(1, g.nphi() / 32);
        for (int i = 0; i < g.ntheta(); i += si)
            for (int j = 0; j < g.nphi(); j += sj) coarse.push_back(g.node_index(i, j));
    } else {
        for (int i = 0; i < N; ++i) coarse.push_back(i);
    }

    ScalarField s(surf.rho.grid);
    if (contact_theta) contact_theta->assign(N, 0.0);
    if (contact_phi) contact_phi->assign(N, 0.0);

    for (int node = 0; node < N; ++node) {
        const std::array<double, 3>& z = dir[node];
        auto value = [&](int k) { return tau[k] * dot3(dir[k], z); };

        int best = coarse[0];
        double best_val = value(best);
        for (int k : coarse) {
            double val = value(k);
            if (val > best_val) {
                best_val = val;
                best = k;
            }
        }
        best = lattice_climb(g, best, +1, value);

        // Newton polish of F(p) = tanh(rho(p)) <p, z> on interpolated fields.
        double th = g.node_theta(best), ph = g.node_phi(best);
        for (int it = 0; it < 8; ++it) {
            Jet rj = eval_jet(jet, dim, th, ph);
            double t = std::tanh(rj.val), se = 1.0 - t * t;
            double t1 = se * rj.g1, t2 = se * rj.g2;
            std::array<double, 3> p = direction_vector(dim, th, ph);
            double m, m1, m2;
            if (dim == 2) {
                double st = std::sin(th), ct = std::cos(th);
                double cp = std::cos(ph), sp = std::sin(ph);
                std::array<double, 3> eth = {ct * cp, ct * sp, -st};
                std::array<double, 3> eph = {-sp, cp, 0.0};
                m = dot3(p, z);
                m1 = dot3(eth, z);
                m2 = dot3(eph, z);
            } else {
                m = std::cos(th - g.node_theta(node));
                m1 = -std::sin(th - g.node_theta(node));
                m2 = 0.0;
            }
            double F1 = t1 * m + t * m1;
            double F2 = t2 * m + t * m2;
            double F11 = se * (rj.h11 - 2.0 * t * rj.g1 * rj.g1) * m + 2.0 * t1 * m1 - t * m;
            double d1, d2 = 0.0;
            if (dim == 2) {
                double F12 = se * (rj.h12 - 2.0 * t * rj.g1 * rj.g2) * m + t1 * m2 + t2 * m1;
                double F22 = se * (rj.h22 - 2.0 * t * rj.g2 * rj.g2) * m + 2.0 * t2 * m2 - t * m;
                double det = F11 * F22 - F12 * F12;
                if (det > 0.0 && F11 < 0.0) {
                    d1 = -(F22 * F1 - F12 * F2) / det;
                    d2 = -(F11 * F2 - F12 * F1) / det;
                } else { // not concave here: plain ascent step
                    double gn = std::hypot(F1, F2);
                    if (gn == 0.0) break;
                    d1 = F1 / gn * hstep;
                    d2 = F2 / gn * hstep;
                }
            } else {
                d1 = F11 < 0.0 ? -F1 / F11 : (F1 > 0 ? hstep : -hstep);
            }
            double dn = std::hypot(d1, d2);
            if (dn > 3.0 * hstep) {
                d1 *= 3.0 * hstep / dn;
                d2 *= 3.0 * hstep / dn;
                dn = 3.0 * hstep;
            }
            sphere_step(dim, th, ph, d1, d2);
            if (dn < 1e-10) break;
        }

        std::array<double, 3> p = direction_vector(dim, th, ph);
        s[node] = std::tanh(jet.f(th, ph)) * dot3(p, z);
        if (contact_theta) (*contact_theta)[node] = th;
        if (contact_phi) (*contact_phi)[node] = ph;
    }

    // Per-node search jitter is rough in phi; left in place it is amplified
    // by the spectral d^2/dphi^2 and the 1/sin^2(theta) of the radii tensor
    // into an O(1) curvature error on the pole rings that never refines.
    // Truncating each ring to its resolvable azimuthal wavenumbers (the
    // standard polar treatment used by the flow stepper) removes the jitter
    // while keeping every mode the ring can represent.
    if (dim == 2) s = filter_azimuthal(s, 1.0);

    return make_support(std::move(s), surf.center_id);
}

RadialSurface to_radial(const SupportSurface& ss) {
    const SphereGrid& g = *ss.grid;
    int dim = g.dim();
    const int N = g.nodes();

    std::vector<std::array<double, 3>> dir(N);
    for (int k = 0; k < N; ++k)
        dir[k] = direction_vector(dim, g.node_theta(k), g.node_phi(k));

    JetInterpolator jet(ss.s, ss.grad_s, ss.hess_s);
    double hstep = kPi / (dim == 2 ? g.ntheta() : g.nodes() / 2);
    const double big = 1e30;

    ScalarField rho(ss.grid);
    for (int node = 0; node < N; ++node) {
        const std::array<double, 3>& e = dir[node];
        // q(z) = s(z)/<z, e> on the open hemisphere <z, e> > 0; its only
        // critical point there is the contact normal, so descending from
        // z = e (the node itself) cannot get trapped.
        auto value = [&](int k) {
            double m = dot3(dir[k], e);
            return m > 1e-3 ? ss.s[k] / m : big;
        };
        int best = lattice_climb(g, node, -1, value);

        double th = g.node_theta(best), ph = g.node_phi(best);
        for (int it = 0; it < 8; ++it) {
            Jet sj = eval_jet(jet, dim, th, ph);
            std::array<double, 3> p = direction_vector(dim, th, ph);
            double m, m1, m2;
            if (dim == 2) {
                double st = std::sin(th), ct = std::cos(th);
                double cp = std::cos(ph), sp = std::sin(ph);
                std::array<double, 3> eth = {ct * cp, ct * sp, -st};
                std::array<double, 3> eph = {-sp, cp, 0.0};
                m = dot3(p, e);
                m1 = dot3(eth, e);
                m2 = dot3(eph, e);
            } else {
                m = std::cos(th - g.node_theta(node));
                m1 = -std::sin(th - g.node_theta(node));
                m2 = 0.0;
            }
            if (m < 1e-3) break; // safety: should not leave the hemisphere
            double m2inv = 1.0 / (m * m);
            double q1 = sj.g1 / m - sj.val * m1 * m2inv;
            double q2 = sj.g2 / m - sj.val * m2 * m2inv;
            double q11 = sj.h11 / m - 2.0 * sj.g1 * m1 * m2inv + sj.val / m +
                         2.0 * sj.val * m1 * m1 * m2inv / m;
            double d1, d2 = 0.0;
            if (dim == 2) {
                double q12 = sj.h12 / m - (sj.g1 * m2 + sj.g2 * m1) * m2inv +
                             2.0 * sj.val * m1 * m2 * m2inv / m;
                double q22 = sj.h22 / m - 2.0 * sj.g2 * m2 * m2inv + sj.val / m +
                             2.0 * sj.val * m2 * m2 * m2inv / m;
                double det = q11 * q22 - q12 * q12;
                if (det > 0.0 && q11 > 0.0) {
                    d1 = -(q22 * q1 - q12 * q2) / det;
                    d2 = -(q11 * q2 - q12 * q1) / det;
                } else { // not convex here: plain descent step
                    double gn = std::hypot(q1, q2);
                    if (gn == 0.0) break;
                    d1 = -q1 / gn * hstep;
                    d2 = -q2 / gn * hstep;
                }
            } else {
                d1 = q11 > 0.0 ? -q1 / q11 : (q1 > 0 ? -hstep : hstep);
            }
            double dn = std::hypot(d1, d2);
            if (dn > 3.0 * hstep) {
                d1 *= 3.0 * hstep / dn;
                d2 *= 3.0 * hstep / dn;
                dn = 3.0 * hstep;
            }
            sphere_step(dim, th, ph, d1, d2);
            if (dn < 1e-10) break;
        }

        std::array<double, 3> p = direction_vector(dim, th, ph);
        double m = dot3(p, e);
        double r = jet.f(th, ph) / m;
        if (!(r > 0.0) || !(r < 1.0))
            throw OutOfModelError("reconstructed radius outside (0, 1) at node " +
                                  std::to_string(node));
        rho[node] = std::atanh(r);
    }

    // Same polar despike as in project(): the reconstruction is a per-node
    // search, and its rough error component must not reach the pole-ring
    // second derivatives of whoever differentiates rho next.
    if (dim == 2) rho = filter_azimuthal(rho, 1.0);

    return RadialSurface{std::move(rho), ss.center_id};
}

} // namespace hgf
