#include "hgf/sampling.hpp"

#include <random>

#include "hgf/errors.hpp"

namespace hgf {

namespace {

// Uniform in [-1, 1) from the top 53 bits of the engine. The mapping is
// pinned by hand because uniform_real_distribution is implementation-defined
// and would break bit-identical reruns across standard libraries.
double unit_symmetric(std::mt19937_64& rng) {
    return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
}

bool certified_convex(const RadialSurface& s) {
    try {
        return kappa_range(geometry(s)).first > 0.0;
    } catch (const DegenerateSurfaceError&) {
        return false;  // radii collapsed under the perturbation: reject, don't fail
    }
}

} // namespace

RadialSurface sample_convex_body(const GridPtr& g, double rho0, double cap, unsigned long seed,
                                 SampleStats* stats) {
    if (!(rho0 > 0.0)) throw ConfigError("sampling needs a positive base radius");
    if (!(cap >= 0.0 && cap < 1.0)) throw ConfigError("amplitude cap must lie in [0, 1)");

    std::mt19937_64 rng(seed);
    for (int rejected = 0; rejected <= 100; ++rejected) {
        RadialSurface s;
        s.rho = ScalarField(g, rho0);
        for (int l = 2; l <= 4; ++l) {
            double amp = cap / (1.0 + l * (l + 1));
            auto add = [&](int m) {
                double a = amp * unit_symmetric(rng);
                ScalarField y = harmonic_field(g, l, m);
                for (int k = 0; k < g->nodes(); ++k) s.rho.v[k] += a * y.v[k];
            };
            if (g->dim() == 2)
                for (int m = -l; m <= l; ++m) add(m);
            else {
                add(-1);
                add(+1);
            }
        }
        if (stats) ++stats->proposed;
        if (certified_convex(s)) {
            if (stats) ++stats->accepted;
            return s;
        }
    }
    throw ConfigError("amplitude cap too large: convex acceptance rate fell below 1%");
}

std::vector<RadialSurface> sample_convex_bodies(const GridPtr& g, double rho0, double cap,
                                                unsigned long seed, int count,
                                                SampleStats* stats) {
    if (count < 0) throw ConfigError("sample count must be nonnegative");
    std::vector<RadialSurface> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i)
        out.push_back(sample_convex_body(g, rho0, cap, seed + i, stats));
    return out;
}

} // namespace hgf
