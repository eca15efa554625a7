#pragma once

#include <stdexcept>
#include <string>

namespace hgf {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user-facing input: resolutions below minimum, malformed config files,
// out-of-range harmonic degrees, ...
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A surface field whose derived quantities stop making sense (non-finite
// derivatives, vanishing denominators sinh^2(rho) + |grad rho|^2, ...).
class DegenerateSurfaceError : public Error {
public:
    explicit DegenerateSurfaceError(const std::string& msg) : Error(msg) {}
};

// The radii tensor r_ij = hess(s) + s*sigma stopped being positive definite.
// Carries the offending node and the eigenvalue so the time stepper can react
// (reject + halve) instead of crashing.
class ConvexityLossError : public Error {
public:
    ConvexityLossError(const std::string& msg, int node, double eigenvalue)
        : Error(msg), node_index(node), min_eigenvalue(eigenvalue) {}
    int node_index;
    double min_eigenvalue;
};

// A Klein-model point reached |Y| >= 1 (left the unit ball / the model).
class OutOfModelError : public Error {
public:
    explicit OutOfModelError(const std::string& msg) : Error(msg) {}
};

// Recentering failed: the requested center leaves the body or the recentered
// surface is no longer a radial graph.
class RecenterError : public Error {
public:
    explicit RecenterError(const std::string& msg) : Error(msg) {}
};

// Time stepping gave up: 20 consecutive halvings of dt were rejected.
class StiffnessError : public Error {
public:
    explicit StiffnessError(const std::string& msg) : Error(msg) {}
};

// The volume-correction Newton iteration failed to converge.
class CorrectionError : public Error {
public:
    explicit CorrectionError(const std::string& msg) : Error(msg) {}
};

// A decay-fit window without usable data (non-positive oscillation, too few
// samples).
class WindowError : public Error {
public:
    explicit WindowError(const std::string& msg) : Error(msg) {}
};

} // namespace hgf
