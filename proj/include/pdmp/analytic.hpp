#pragma once

// Closed-form invariant objects for two-environment switching systems:
// stationary switch distributions, one-dimensional boundary densities with
// their normalization and moments, linear-solve interior means, and invasion
// rates evaluated against any boundary-measure representation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdmp/common.hpp"
#include "pdmp/linalg.hpp"
#include "pdmp/measure.hpp"
#include "pdmp/model.hpp"
#include "pdmp/quadrature.hpp"
#include "pdmp/simulate.hpp"

namespace pdmp {

namespace detail {

// accepts either a conservative generator (rows sum to zero) or the
// off-diagonal-only storage used by SwitchLaw; returns the conservative form
inline Mat normalized_rate_matrix(Mat q) {
    const int n0 = (int)q.size();
    double scale = 0;
    for (const auto& row : q) {
        if ((int)row.size() != n0) throw ModelError("rate matrix must be square");
        for (double v : row) scale = std::max(scale, std::abs(v));
    }
    for (int i = 0; i < n0; ++i) {
        double off = 0;
        for (int j = 0; j < n0; ++j) {
            if (j != i && q[i][j] < 0) throw ModelError("negative off-diagonal rate");
            if (j != i) off += q[i][j];
        }
        double d = q[i][i];
        if (d != 0.0 && std::abs(d + off) > 1e-9 * std::max(1.0, scale))
            throw ModelError("rate matrix diagonal must be zero or minus the exit rate");
        q[i][i] = -off;
    }
    return q;
}

inline bool strongly_connected(const Mat& q) {
    const int n0 = (int)q.size();
    std::vector<std::vector<bool>> reach(n0, std::vector<bool>(n0, false));
    for (int i = 0; i < n0; ++i) {
        reach[i][i] = true;
        for (int j = 0; j < n0; ++j)
            if (j != i && q[i][j] > 0) reach[i][j] = true;
    }
    for (int m = 0; m < n0; ++m)
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n0; ++j)
                if (reach[i][m] && reach[m][j]) reach[i][j] = true;
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n0; ++j)
            if (!reach[i][j]) return false;
    return true;
}

}  // namespace detail

// stationary distribution of a constant conservative rate matrix: nu Q = 0,
// sum nu = 1. Two states reduce to the exchange-rate ratio; larger chains go
// through the null-space solve with the normalization row appended.
inline Vec stationary_switch(const Mat& q_in) {
    Mat q = detail::normalized_rate_matrix(q_in);
    if (!detail::strongly_connected(q)) throw NumericError("reducible switching matrix");
    const int n0 = (int)q.size();
    if (n0 == 1) return {1.0};
    if (n0 == 2) {
        double q12 = q[0][1], q21 = q[1][0];
        double tot = q12 + q21;
        return {q21 / tot, q12 / tot};
    }
    Mat A(n0, Vec(n0, 0.0));
    for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n0; ++j) A[j][i] = q[i][j];
    for (int j = 0; j < n0; ++j) A[n0 - 1][j] = 1.0;
    Vec rhs(n0, 0.0);
    rhs[n0 - 1] = 1.0;
    Vec nu = solve_linear(A, rhs);
    double scale = 0;
    for (const auto& row : q)
        for (double v : row) scale = std::max(scale, std::abs(v));
    for (int j = 0; j < n0; ++j) {
        double r = 0;
        for (int i = 0; i < n0; ++i) r += nu[i] * q[i][j];
        if (std::abs(r) > 1e-12 * std::max(1.0, scale))
            throw NumericError("stationary solve residual too large");
        if (nu[j] < 0) throw NumericError("stationary solve produced negative mass");
    }
    return nu;
}

inline Vec stationary_switch(const SwitchLaw& law) {
    if (law.kind != SwitchLaw::Kind::ConstantMatrix)
        throw ModelError("stationary switch law requires constant rates");
    return stationary_switch(law.q);
}

// One-dimensional boundary invariant density of a two-environment system,
// together with its exact support, exponents and normalization. Three
// absolutely-continuous shapes arise:
//   GrowthLogistic  env 1 grows linearly, env 2 is logistic with a positive
//                   intercept; support sits above the env-2 fixed point.
//   GrowthDecay     env 2 declines everywhere; support is all of (0, inf).
//   LogisticPair    both environments are logistic; support spans the two
//                   fixed points (collapsing to a PointMass when they agree).
struct ClosedFormDensity {
    enum class Kind { GrowthLogistic, GrowthDecay, LogisticPair, PointMass };

    Kind kind = Kind::PointMass;
    // generating parameters (a11, a12 are the env intercepts; b's the self-limitation)
    double a11 = 0, a12 = 0, b11 = 0, b12 = 0, q12 = 0, q21 = 0;
    // exponents: gamma and the edge power for GrowthLogistic, tau and the
    // factor power for GrowthDecay, the two edge exponents for LogisticPair
    double gamma = 0, tau = 0, gpow = 0;
    double p1 = 0, p2 = 0, g1 = 0, g2 = 0;
    double lo = 0, hi = kInf;  // support
    double point = 0;          // PointMass location
    Vec nu;                    // switch stationary weights
    double C1 = 0;             // normalization, fixed by total mass 1 (quadrature)
    double mass1 = 0, mass2 = 0;
    double beta_rel_err = 0;   // log-gamma closed form vs quadrature mismatch
    double truncation = kInf;  // beyond this the remaining mass is < 1e-10
    double split = 0;          // algebraic/tail handoff for infinite support

    // unnormalized component value with exact distances to the support ends;
    // singular factors evaluate from the distances, never from x itself
    double unnorm(int env, double x, double dlo, double dhi) const {
        switch (kind) {
            case Kind::GrowthLogistic: {
                double w = b12 * dlo;  // b12*x - a12 without cancellation
                double xs = std::pow(x, -gamma);
                return env == 0 ? std::pow(w, gpow) * xs
                                : a11 * std::pow(w, gpow - 1.0) * xs;
            }
            case Kind::GrowthDecay: {
                double w = b12 * x - a12;  // a12 < 0, so this is b12*x + |a12|
                double xs = std::pow(dlo, -tau);
                return env == 0 ? xs * std::pow(w, -gpow)
                                : a11 * xs * std::pow(w, -gpow - 1.0);
            }
            case Kind::LogisticPair: {
                double d1 = (p1 <= p2) ? dlo : dhi;  // |x - p1|
                double d2 = (p1 <= p2) ? dhi : dlo;  // |x - p2|
                double xs = std::pow(x, -(1.0 + g1 + g2));
                return env == 0 ? std::pow(d2, g2) * std::pow(d1, g1 - 1.0) * xs / b11
                                : std::pow(d2, g2 - 1.0) * std::pow(d1, g1) * xs / b12;
            }
            case Kind::PointMass: return 0.0;
        }
        return 0.0;
    }

    // integrable-singularity exponents at the support ends, in the
    // (x - end)^(alpha - 1) convention of integrate_algebraic
    double alpha_lo(int env) const {
        switch (kind) {
            case Kind::GrowthLogistic: return env == 0 ? gpow + 1.0 : gpow;
            case Kind::GrowthDecay: return 1.0 - tau;
            case Kind::LogisticPair:
                return (p1 <= p2) ? (env == 0 ? g1 : g1 + 1.0)
                                  : (env == 0 ? g2 + 1.0 : g2);
            case Kind::PointMass: return 1.0;
        }
        return 1.0;
    }
    double alpha_hi(int env) const {
        if (kind != Kind::LogisticPair) return 1.0;
        return (p1 <= p2) ? (env == 0 ? g2 + 1.0 : g2) : (env == 0 ? g1 : g1 + 1.0);
    }

    // power-law decay exponent at infinity
    double tail_power(int env) const {
        switch (kind) {
            case Kind::GrowthLogistic: return gamma - gpow + (env == 0 ? 0.0 : 1.0);
            case Kind::GrowthDecay: return tau + gpow + (env == 0 ? 0.0 : 1.0);
            default: return kInf;
        }
    }

    double value(int env, double x) const {
        if (kind == Kind::PointMass) return 0.0;
        if (x < lo || x > hi) return 0.0;
        double dlo = x - lo;
        double dhi = std::isfinite(hi) ? hi - x : kInf;
        return C1 * unnorm(env, x, dlo, dhi);
    }
    double h1(double x) const { return value(0, x); }
    double h2(double x) const { return value(1, x); }

    double mass_between(double a, double b) const;
};

namespace detail {

// integral of g(x, env) against the unnormalized component over [a, b]
// clipped to the support. Endpoint singularities go through the power-mapped
// quadrature with exact edge distances; infinite tails through block doubling
// with the known decay exponent.
inline double component_integral(const ClosedFormDensity& d, int env, double a, double b,
                                 const std::function<double(double, int)>* g, int growth_deg) {
    QuadOptions opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 0.0;  // unnormalized masses vary over many orders of magnitude
    double lo = std::max(a, d.lo);
    double hi = std::min(b, d.hi);
    if (!(hi > lo)) return 0.0;

    auto wrap = [&](double x, double dlo, double dhi) {
        double v = d.unnorm(env, x, dlo, dhi);
        return g ? v * (*g)(x, env) : v;
    };

    double off_lo = lo - d.lo;
    double alo = (off_lo == 0.0) ? d.alpha_lo(env) : 1.0;

    if (std::isfinite(d.hi)) {
        double off_hi = d.hi - hi;
        double ahi = (off_hi == 0.0) ? d.alpha_hi(env) : 1.0;
        EdgeAwareFn f = [&](double x, double da, double db) {
            return wrap(x, da + off_lo, db + off_hi);
        };
        return integrate_algebraic(f, lo, hi, alo, ahi, opt).value;
    }

    double acc = 0.0;
    double T = std::max(d.split, 2.0 * lo);
    double cap = std::min(hi, T);
    if (cap > lo) {
        EdgeAwareFn f = [&](double x, double da, double) { return wrap(x, da + off_lo, kInf); };
        acc += integrate_algebraic(f, lo, cap, alo, 1.0, opt).value;
    }
    if (std::isinf(hi)) {
        double e = d.tail_power(env) - growth_deg;
        double t0 = std::max(lo, T);
        acc += integrate_tail([&](double x) { return wrap(x, x - d.lo, kInf); }, t0, e, opt)
                   .value;
    } else if (hi > T) {
        EdgeAwareFn f = [&](double x, double da, double) { return wrap(x, da + (T - d.lo), kInf); };
        acc += integrate_algebraic(f, T, hi, 1.0, 1.0, opt).value;
    }
    return acc;
}

inline double lbeta(double u, double v) {
    return std::lgamma(u) + std::lgamma(v) - std::lgamma(u + v);
}

// log-gamma closed forms for the unnormalized component masses; used as an
// independent cross-check of the quadrature normalization, never as truth
inline void beta_masses(const ClosedFormDensity& d, double& I1, double& I2) {
    switch (d.kind) {
        case ClosedFormDensity::Kind::GrowthLogistic: {
            double s = d.lo;
            double u = d.q12 / d.a11;
            I1 = std::exp(d.gpow * std::log(d.a12) + (1.0 - d.gamma) * std::log(s) +
                          lbeta(u, d.gpow + 1.0));
            I2 = d.a11 * std::exp((d.gpow - 1.0) * std::log(d.a12) +
                                  (1.0 - d.gamma) * std::log(s) + lbeta(u + 1.0, d.gpow));
            return;
        }
        case ClosedFormDensity::Kind::GrowthDecay: {
            double A = -d.a12;
            double u = d.q12 / d.a11;
            double lb = (d.tau - 1.0) * std::log(d.b12);
            I1 = std::exp((1.0 - d.tau - d.gpow) * std::log(A) + lb + lbeta(1.0 - d.tau, u));
            I2 = d.a11 * std::exp((-d.tau - d.gpow) * std::log(A) + lb +
                                  lbeta(1.0 - d.tau, u + 1.0));
            return;
        }
        case ClosedFormDensity::Kind::LogisticPair: {
            // int (x-lo)^(a-1) (hi-x)^(b-1) x^-(a+b) dx
            //   = B(a,b) (hi-lo)^(a+b-1) lo^-b hi^-a
            double elo1 = (d.p1 <= d.p2) ? d.g1 : d.g2 + 1.0;  // env-1 exponent+1 at lo
            double ehi1 = (d.p1 <= d.p2) ? d.g2 + 1.0 : d.g1;
            double span = std::log(d.hi - d.lo);
            auto closed = [&](double ea, double eb) {
                return std::exp(lbeta(ea, eb) + (ea + eb - 1.0) * span -
                                eb * std::log(d.lo) - ea * std::log(d.hi));
            };
            I1 = closed(elo1, ehi1) / d.b11;
            I2 = closed(elo1 + 1.0, ehi1 - 1.0) / d.b12;
            return;
        }
        case ClosedFormDensity::Kind::PointMass: I1 = I2 = 0.0; return;
    }
}

inline void finalize_density(ClosedFormDensity& d) {
    double I1 = component_integral(d, 0, d.lo, kInf, nullptr, 0);
    double I2 = component_integral(d, 1, d.lo, kInf, nullptr, 0);
    if (!(I1 > 0) || !(I2 > 0) || !std::isfinite(I1) || !std::isfinite(I2))
        throw NumericError("density normalization failed");
    d.C1 = 1.0 / (I1 + I2);
    d.mass1 = d.C1 * I1;
    d.mass2 = d.C1 * I2;

    double B1 = 0, B2 = 0;
    beta_masses(d, B1, B2);
    d.beta_rel_err = std::max(std::abs(I1 / B1 - 1.0), std::abs(I2 / B2 - 1.0));

    if (std::isfinite(d.hi)) {
        d.truncation = d.hi;
        return;
    }
    double T = std::max(d.split, 2.0 * d.lo);
    for (int it = 0; it < 200; ++it) {
        double rem = 0;
        for (int env = 0; env < 2; ++env) {
            double e = d.tail_power(env);
            rem += 2.0 * d.unnorm(env, T, T - d.lo, kInf) * T / (e - 1.0);
        }
        if (d.C1 * rem < 1e-10) break;
        T *= 2.0;
    }
    d.truncation = T;
}

}  // namespace detail

inline double ClosedFormDensity::mass_between(double a, double b) const {
    if (kind == Kind::PointMass) return (a <= point && point <= b) ? 1.0 : 0.0;
    return C1 * (detail::component_integral(*this, 0, a, b, nullptr, 0) +
                 detail::component_integral(*this, 1, a, b, nullptr, 0));
}

// boundary density of the one-species system that grows linearly in env 1
// (rate a11 > 0) and follows the logistic field a12 - b12 x in env 2
inline ClosedFormDensity density_1d_logistic(double a11, double a12, double b12, double q12,
                                             double q21) {
    if (!(a11 > 0) || !(b12 > 0) || !(q12 > 0) || !(q21 > 0) || a12 == 0.0)
        throw ModelError("density needs a11, b12, q12, q21 > 0 and a12 != 0");
    ClosedFormDensity d;
    d.a11 = a11;
    d.a12 = a12;
    d.b12 = b12;
    d.q12 = q12;
    d.q21 = q21;
    d.nu = {q21 / (q12 + q21), q12 / (q12 + q21)};
    if (a12 > 0) {
        d.kind = ClosedFormDensity::Kind::GrowthLogistic;
        d.lo = a12 / b12;
        d.gpow = q21 / a12;
        d.gamma = 1.0 + q12 / a11 + q21 / a12;
        d.split = d.lo * std::max(3.0, 2.0 * d.gamma / (d.gamma - d.gpow));
    } else {
        double A = -a12;
        // the average drift of ln X must point upward or no mass can persist
        if (!(a11 * q21 > A * q12))
            throw ModelError("no interior invariant measure: decay outweighs growth");
        d.kind = ClosedFormDensity::Kind::GrowthDecay;
        d.lo = 0.0;
        d.gpow = q21 / A;
        d.tau = 1.0 - (d.gpow - q12 / a11);
        double mode = d.tau < 0 ? (-d.tau * A) / (b12 * (d.tau + d.gpow)) : 0.0;
        d.split = 2.0 * std::max({1.0, A / b12, mode});
    }
    detail::finalize_density(d);
    return d;
}

// boundary density when both environments are logistic on the same axis;
// the support spans the two fixed points. Equal fixed points give the point
// mass branch.
inline ClosedFormDensity density_lv_boundary(double a11, double a12, double b11, double b12,
                                             double q12, double q21) {
    if (!(a11 > 0) || !(a12 > 0) || !(b11 > 0) || !(b12 > 0) || !(q12 > 0) || !(q21 > 0))
        throw ModelError("boundary pair density needs positive parameters");
    ClosedFormDensity d;
    d.a11 = a11;
    d.a12 = a12;
    d.b11 = b11;
    d.b12 = b12;
    d.q12 = q12;
    d.q21 = q21;
    d.nu = {q21 / (q12 + q21), q12 / (q12 + q21)};
    d.p1 = a11 / b11;
    d.p2 = a12 / b12;
    if (std::abs(d.p1 - d.p2) <= 1e-12 * std::max(d.p1, d.p2)) {
        d.kind = ClosedFormDensity::Kind::PointMass;
        d.point = d.p1;
        d.lo = d.hi = d.p1;
        d.truncation = d.p1;
        d.mass1 = d.nu[0];
        d.mass2 = d.nu[1];
        d.C1 = 0.0;
        return d;
    }
    d.kind = ClosedFormDensity::Kind::LogisticPair;
    d.g1 = q12 / a11;
    d.g2 = q21 / a12;
    d.lo = std::min(d.p1, d.p2);
    d.hi = std::max(d.p1, d.p2);
    detail::finalize_density(d);
    return d;
}

// Closed-form invariant measure on the coordinate axis of one species, when
// the restricted dynamics fall into a solvable pattern (two constant-rate
// environments, degree <= 1 fitness). The formulas are derived with the
// unregulated (or first) environment listed first; when only the FIRST
// environment self-limits, the construction swaps environments and env_map
// records the translation back to the model's ordering.
struct AxisClosedForm {
    ClosedFormDensity density;
    std::vector<int> env_map;  // density env k -> model env (empty: identity)
};

inline std::optional<AxisClosedForm> axis_closed_form(const ModelSpec& m, int axis) {
    if (m.n0 != 2 || m.switching.kind != SwitchLaw::Kind::ConstantMatrix) return std::nullopt;
    ModelSpec sub = restrict_model(m, {axis});
    for (int k = 0; k < 2; ++k)
        if (sub.fields[k].fitness[0].degree() > 1) return std::nullopt;
    Vec zero = {0.0}, one = {1.0};
    double a0 = sub.fitness_value(zero, 0, 0), a1 = sub.fitness_value(zero, 1, 0);
    double b0 = a0 - sub.fitness_value(one, 0, 0), b1 = a1 - sub.fitness_value(one, 1, 0);
    double q12 = m.switching.q[0][1], q21 = m.switching.q[1][0];
    AxisClosedForm out;
    try {
        if (b0 == 0.0 && b1 > 0.0 && a0 > 0.0 && a1 != 0.0) {
            out.density = density_1d_logistic(a0, a1, b1, q12, q21);
        } else if (b1 == 0.0 && b0 > 0.0 && a1 > 0.0 && a0 != 0.0) {
            out.density = density_1d_logistic(a1, a0, b0, q21, q12);
            out.env_map = {1, 0};
        } else if (b0 > 0.0 && b1 > 0.0 && a0 > 0.0 && a1 > 0.0) {
            out.density = density_lv_boundary(a0, a1, b0, b1, q12, q21);
        } else {
            return std::nullopt;
        }
    } catch (const ModelError&) {
        return std::nullopt;  // the pattern matched but the closed form rejects it
    }
    return out;
}

// integral of g(x, env) against the normalized density. growth_deg bounds the
// polynomial growth of g so the tail handoff keeps a provable remainder; a
// weight that grows too fast for the tail is rejected as non-integrable.
inline double integrate_density(const ClosedFormDensity& d,
                                const std::function<double(double, int)>& g,
                                int growth_deg = 0) {
    if (d.kind == ClosedFormDensity::Kind::PointMass)
        return d.nu[0] * g(d.point, 0) + d.nu[1] * g(d.point, 1);
    double acc = 0.0;
    for (int env = 0; env < 2; ++env) {
        if (std::isinf(d.hi) && !(d.tail_power(env) - growth_deg > 1.0 + 1e-12))
            throw NumericError("weight grows too fast against the density tail");
        acc += detail::component_integral(d, env, d.lo, kInf, &g, growth_deg);
    }
    return d.C1 * acc;
}

// table export on an abscissa grid clustered toward the support edges
inline void density_to_csv(const ClosedFormDensity& d, std::ostream& os, int points = 256) {
    os << "x,h1,h2\n";
    if (d.kind == ClosedFormDensity::Kind::PointMass) return;
    char buf[96];
    double xmax = std::isfinite(d.hi) ? d.hi : d.truncation;
    for (int i = 0; i <= points; ++i) {
        double u = (double)i / points;
        double x;
        if (std::isfinite(d.hi)) {
            x = d.lo + (d.hi - d.lo) * 0.5 * (1.0 - std::cos(3.14159265358979323846 * u));
        } else {
            x = d.lo + (xmax - d.lo) * u * u * u;
        }
        double v1 = d.h1(x), v2 = d.h2(x);
        if (!std::isfinite(v1) || !std::isfinite(v2)) continue;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x, v1, v2);
        os << buf;
    }
}

inline std::string density_descriptor_json(const ClosedFormDensity& d) {
    nlohmann::json j;
    switch (d.kind) {
        case ClosedFormDensity::Kind::GrowthLogistic: j["kind"] = "growth_logistic"; break;
        case ClosedFormDensity::Kind::GrowthDecay: j["kind"] = "growth_decay"; break;
        case ClosedFormDensity::Kind::LogisticPair: j["kind"] = "logistic_pair"; break;
        case ClosedFormDensity::Kind::PointMass: j["kind"] = "point_mass"; break;
    }
    j["support"] = nlohmann::json::array();
    j["support"].push_back(d.lo);
    if (std::isfinite(d.hi))
        j["support"].push_back(d.hi);
    else
        j["support"].push_back(nullptr);
    j["normalization"] = d.C1;
    j["masses"] = {d.mass1, d.mass2};
    j["switch_weights"] = d.nu;
    if (std::isfinite(d.truncation)) j["truncation"] = d.truncation;
    nlohmann::json ex;
    switch (d.kind) {
        case ClosedFormDensity::Kind::GrowthLogistic:
            ex["gamma"] = d.gamma;
            ex["edge_power"] = d.gpow;
            break;
        case ClosedFormDensity::Kind::GrowthDecay:
            ex["tau"] = d.tau;
            ex["factor_power"] = d.gpow;
            break;
        case ClosedFormDensity::Kind::LogisticPair:
            ex["gamma1"] = d.g1;
            ex["gamma2"] = d.g2;
            break;
        case ClosedFormDensity::Kind::PointMass: j["point"] = d.point; break;
    }
    j["exponents"] = ex;
    j["beta_check_rel_err"] = d.beta_rel_err;
    return j.dump(2);
}

// fitness split as f_i(x, k) = a[k][i] + (B x)_i, valid only when every
// fitness is affine and the interaction part is shared by all environments
struct AffineFitness {
    Mat a;  // [env][species] intercepts
    Mat B;  // [species][species] interactions
};

inline AffineFitness affine_fitness(const ModelSpec& m) {
    AffineFitness af;
    af.a.assign(m.n0, Vec(m.n, 0.0));
    af.B.assign(m.n, Vec(m.n, 0.0));
    Vec zero(m.n, 0.0), probe(m.n, 0.0);
    for (int k = 0; k < m.n0; ++k) {
        for (int i = 0; i < m.n; ++i) {
            if (m.fields[k].fitness[i].degree() > 1)
                throw ModelError("fitness is not affine");
            af.a[k][i] = m.fitness_value(zero, k, i);
        }
        for (int j = 0; j < m.n; ++j) {
            probe[j] = 1.0;
            for (int i = 0; i < m.n; ++i) {
                double bij = m.fitness_value(probe, k, i) - af.a[k][i];
                if (k == 0)
                    af.B[i][j] = bij;
                else if (bij != af.B[i][j])
                    throw ModelError("interaction coefficients switch across environments");
            }
            probe[j] = 0.0;
        }
    }
    return af;
}

// means of the surviving species under the invariant measure of face I,
// from the zero-invasion-rate identities of the residents: the switch-
// averaged intercepts must balance the interactions at the mean.
inline Vec interior_means(const ModelSpec& m, const std::vector<int>& I) {
    if (I.empty()) throw ModelError("face must contain at least one species");
    for (std::size_t t = 0; t < I.size(); ++t) {
        if (I[t] < 0 || I[t] >= m.n) throw ModelError("face index out of range");
        if (t > 0 && I[t] <= I[t - 1]) throw ModelError("face indices must be increasing");
    }
    AffineFitness af = affine_fitness(m);
    Vec nu = stationary_switch(m.switching);
    const int d = (int)I.size();
    Mat M(d, Vec(d, 0.0));
    Vec rhs(d, 0.0);
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) M[r][c] = -af.B[I[r]][I[c]];
        for (int k = 0; k < m.n0; ++k) rhs[r] += nu[k] * af.a[k][I[r]];
    }
    Vec mean;
    try {
        mean = solve_linear(M, rhs);
    } catch (const NumericError&) {
        throw NumericError("singular interaction matrix on this face");
    }
    for (double v : mean)
        if (!(v > 0)) throw NumericError("subsystem mean infeasible");
    return mean;
}

// a boundary invariant measure in whichever representation is available
struct BoundaryMeasureRep {
    enum class Form { PointMass, Density, Means, MonteCarlo };

    std::vector<int> I;  // surviving species, increasing
    Form form = Form::PointMass;
    Vec nu;                                      // switch weights (defaults to stationary)
    Vec point;                                   // |I| coordinates
    const ClosedFormDensity* density = nullptr;  // |I| == 1
    std::vector<int> env_map;                    // density env k -> model env (empty: identity)
    Vec means;                                   // |I| coordinates
    const Trajectory* traj = nullptr;            // restricted-model run, dimension |I|
    double burn_in = -1.0;
};

struct LambdaEstimate {
    double value = 0;
    double se = 0;  // zero for exact representations
    std::string method;
    std::vector<std::string> warnings;
};

namespace detail {

inline Vec embed_face(const std::vector<int>& I, const Vec& coords, int n) {
    Vec x(n, 0.0);
    for (std::size_t t = 0; t < I.size(); ++t) x[I[t]] = coords[t];
    return x;
}

}  // namespace detail

// invasion rate of species j against the boundary measure held by rep:
// the average of f_j under that measure, evaluated by the cheapest faithful
// route the representation allows. A Means representation on a model whose
// interactions switch has no exact linear route; with a simulation budget it
// falls back to Monte Carlo, otherwise it reports the obstruction.
inline LambdaEstimate boundary_lambda(const ModelSpec& m, const BoundaryMeasureRep& rep, int j,
                                      const SimConfig* mc_fallback = nullptr) {
    if (j < 0 || j >= m.n) throw ModelError("species index out of range");
    // j may be a resident of the face: its rate must come out zero, and
    // callers use that as a consistency check
    LambdaEstimate out;
    auto nu_of = [&]() { return rep.nu.empty() ? stationary_switch(m.switching) : rep.nu; };

    switch (rep.form) {
        case BoundaryMeasureRep::Form::PointMass: {
            Vec nu = nu_of();
            Vec x = detail::embed_face(rep.I, rep.point, m.n);
            for (int k = 0; k < m.n0; ++k) out.value += nu[k] * m.fitness_value(x, k, j);
            out.method = "point-mass";
            return out;
        }
        case BoundaryMeasureRep::Form::Density: {
            if (rep.I.size() != 1 || rep.density == nullptr)
                throw ModelError("density representation needs exactly one surviving species");
            const ClosedFormDensity& d = *rep.density;
            // the closed form may have been built with the environments in the
            // opposite order (its formulas want the growth environment first);
            // env_map translates the density's env index back to the model's
            auto model_env = [&](int k) { return rep.env_map.empty() ? k : rep.env_map[k]; };
            if (d.kind == ClosedFormDensity::Kind::PointMass) {
                Vec x = detail::embed_face(rep.I, {d.point}, m.n);
                for (int k = 0; k < m.n0; ++k)
                    out.value += d.nu[k] * m.fitness_value(x, model_env(k), j);
                out.method = "point-mass";
                return out;
            }
            int deg = 0;
            for (int k = 0; k < m.n0; ++k)
                deg = std::max(deg, (int)m.fields[k].fitness[j].degree());
            Vec x(m.n, 0.0);
            const int axis = rep.I[0];
            out.value = integrate_density(
                d,
                [&](double s, int k) {
                    x[axis] = s;
                    return m.fitness_value(x, model_env(k), j);
                },
                deg);
            out.method = "density";
            return out;
        }
        case BoundaryMeasureRep::Form::Means: {
            if (rep.means.size() != rep.I.size())
                throw ModelError("means representation dimension mismatch");
            AffineFitness af;
            try {
                af = affine_fitness(m);
            } catch (const ModelError&) {
                if (!mc_fallback) throw;
                ModelSpec sub = restrict_model(m, rep.I);
                Trajectory traj = simulate(sub, rep.means, 0, *mc_fallback);
                Vec x(m.n, 0.0);
                AverageEstimate avg = time_average_se(
                    traj,
                    [&](const Vec& y, int k) {
                        for (std::size_t t = 0; t < rep.I.size(); ++t) x[rep.I[t]] = y[t];
                        return m.fitness_value(x, k, j);
                    },
                    rep.burn_in);
                out.value = avg.value;
                out.se = avg.se;
                out.method = "monte-carlo";
                out.warnings.push_back(
                    "interactions switch across environments; means path replaced by a "
                    "simulated average");
                return out;
            }
            Vec nu = nu_of();
            for (int k = 0; k < m.n0; ++k) out.value += nu[k] * af.a[k][j];
            for (std::size_t t = 0; t < rep.I.size(); ++t)
                out.value += af.B[j][rep.I[t]] * rep.means[t];
            out.method = "means";
            return out;
        }
        case BoundaryMeasureRep::Form::MonteCarlo: {
            if (rep.traj == nullptr || rep.traj->n != (int)rep.I.size())
                throw ModelError("trajectory representation dimension mismatch");
            Vec x(m.n, 0.0);
            AverageEstimate avg = time_average_se(
                *rep.traj,
                [&](const Vec& y, int k) {
                    for (std::size_t t = 0; t < rep.I.size(); ++t) x[rep.I[t]] = y[t];
                    return m.fitness_value(x, k, j);
                },
                rep.burn_in);
            out.value = avg.value;
            out.se = avg.se;
            out.method = "monte-carlo";
            return out;
        }
    }
    throw ModelError("unknown representation");
}

}  // namespace pdmp
