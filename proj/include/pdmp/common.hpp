#pragma once

// Shared aliases, error types and small numeric helpers used across the
// library. Everything here is header-only and allocation-light.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdmp {

#define PDMP_VERSION "0.1.0"

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Model description is inconsistent or violates a standing assumption.
struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

// ODE stepping failed (step-size underflow, NaN state, ...).
struct IntegratorError : std::runtime_error {
    explicit IntegratorError(const std::string& msg) : std::runtime_error(msg) {}
};

// Quadrature / linear algebra / estimator failure.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation not available for the given inputs (e.g. missing gauge).
struct UnsupportedError : std::runtime_error {
    explicit UnsupportedError(const std::string& msg) : std::runtime_error(msg) {}
};

// Config-file or CLI argument problem.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double norm2(const Vec& v) {
    double s = 0;
    for (double a : v) s += a * a;
    return std::sqrt(s);
}

inline double norm_inf(const Vec& v) {
    double s = 0;
    for (double a : v) s = std::max(s, std::abs(a));
    return s;
}

inline bool approx_rel(double a, double b, double tol) {
    double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) <= tol * scale;
}

// FNV-1a, used for model fingerprints.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull) {
    return fnv1a(s.data(), s.size(), h);
}

}  // namespace pdmp
