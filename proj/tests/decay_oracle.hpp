#pragma once

// Brute-force oracle for the linearized relaxation rates, shared by the unit
// and acceptance suites. It evolves the linearized equation directly and
// shares nothing with linear_rate() but the prefactor c.

#include <cmath>

#include "hgf/diagnostics.hpp"
#include "hgf/sphere_grid.hpp"

namespace hgf_tests {

// Decay rate of the degree-l harmonic under a direct RK4 evolution of the
// linearized equation  d eta/dt = c (Lap eta + n eta - n mean(eta))  on the
// round sphere.
inline double evolved_rate(const hgf::GridPtr& g, double alpha, double rho_inf, int l, int m,
                           double T) {
    using namespace hgf;
    int n = g->dim();
    double c = linearized_model(n, alpha, rho_inf, 0).c;
    double wtot = 0.0;
    for (int k = 0; k < g->nodes(); ++k) wtot += g->weight(k);

    auto f = [&](const ScalarField& eta) {
        ScalarField lap = laplacian(eta);
        double mean = 0.0;
        for (int k = 0; k < g->nodes(); ++k) mean += g->weight(k) * eta.v[k];
        mean /= wtot;
        ScalarField out(g);
        for (int k = 0; k < g->nodes(); ++k)
            out.v[k] = c * (lap.v[k] + n * (eta.v[k] - mean));
        if (n == 2) out = filter_azimuthal(out, 1.0);
        return out;
    };
    auto norm = [&](const ScalarField& eta) {
        double s = 0.0;
        for (int k = 0; k < g->nodes(); ++k) s += g->weight(k) * eta.v[k] * eta.v[k];
        return std::sqrt(s);
    };

    // stability: the filtered operator tops out near c (5.34/dtheta^2 + M^2/4)
    double dth = M_PI / g->ntheta();
    double lam_max = n == 2 ? c * (5.34 / (dth * dth) + 0.25 * g->nphi() * g->nphi())
                            : c * 0.25 * g->ntheta() * g->ntheta();
    double dt = 2.0 / lam_max;
    int steps = (int)std::ceil(T / dt);
    dt = T / steps;

    ScalarField eta = harmonic_field(g, l, m);
    double n0 = norm(eta);
    for (int s = 0; s < steps; ++s) {
        ScalarField k1 = f(eta);
        ScalarField y(g), k2(g), k3(g), k4(g);
        for (int k = 0; k < g->nodes(); ++k) y.v[k] = eta.v[k] + 0.5 * dt * k1.v[k];
        k2 = f(y);
        for (int k = 0; k < g->nodes(); ++k) y.v[k] = eta.v[k] + 0.5 * dt * k2.v[k];
        k3 = f(y);
        for (int k = 0; k < g->nodes(); ++k) y.v[k] = eta.v[k] + dt * k3.v[k];
        k4 = f(y);
        for (int k = 0; k < g->nodes(); ++k)
            eta.v[k] += dt / 6.0 * (k1.v[k] + 2.0 * k2.v[k] + 2.0 * k3.v[k] + k4.v[k]);
    }
    return std::log(n0 / norm(eta)) / T;
}

} // namespace hgf_tests
