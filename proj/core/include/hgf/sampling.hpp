#pragma once

#include <vector>

#include "hgf/hyperbolic.hpp"

namespace hgf {

// Bookkeeping of a sampling campaign: proposals drawn vs bodies accepted.
struct SampleStats {
    int accepted = 0;
    int proposed = 0;
};

// One random convex body about radius rho0:
//
//   rho = rho0 + sum over degrees l = 2..4 and orders m of  a_lm Y_lm,
//   a_lm uniform in [-cap, cap] / (1 + l(l+1)),
//
// drawn from a mt19937_64 stream seeded with `seed` and rejected until the
// convexity certificate (min principal curvature > 0) passes; proposals whose
// radii degenerate are rejected the same way. Deterministic: the same
// (grid, rho0, cap, seed) yields the same body bit for bit. cap = 0 returns
// the exact ball. 100 consecutive rejections -- an acceptance rate below 1% --
// raise ConfigError: the cap is too large to sample convex bodies about rho0.
// pre: rho0 > 0, 0 <= cap < 1 (ConfigError otherwise).
RadialSurface sample_convex_body(const GridPtr& g, double rho0, double cap, unsigned long seed,
                                 SampleStats* stats = nullptr);

// Campaign of `count` bodies. Body i is drawn from the stream seed + i, so
// any body of a campaign can be regenerated alone from its recorded seed.
std::vector<RadialSurface> sample_convex_bodies(const GridPtr& g, double rho0, double cap,
                                                unsigned long seed, int count,
                                                SampleStats* stats = nullptr);

} // namespace hgf
