#pragma once

// Adaptive Gauss-Kronrod (G7-K15) quadrature with two helpers the density
// layer needs: an algebraic substitution that removes (x-a)^{alpha-1}
// endpoint singularities, and power-law tail integration on [a, inf) with
// an analytic truncation bound.

#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "pdmp/common.hpp"

namespace pdmp {

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_intervals = 50000;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

namespace detail {

// Kronrod-15 abscissae and weights on [-1,1]; the embedded Gauss-7 rule
// reuses the odd-indexed nodes.
constexpr double xk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double wk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GKCell {
    double a, b, value, error;
    bool operator<(const GKCell& o) const { return error < o.error; }
};

inline GKCell gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fv[15];
    fv[7] = f(c);
    double kron = wk[7] * fv[7];
    double gauss = wg[3] * fv[7];
    for (int j = 0; j < 7; ++j) {
        double off = h * xk[j];
        fv[j] = f(c - off);
        fv[14 - j] = f(c + off);
        kron += wk[j] * (fv[j] + fv[14 - j]);
        if (j % 2 == 1) gauss += wg[j / 2] * (fv[j] + fv[14 - j]);
    }
    // QUADPACK error model: scale the raw Gauss/Kronrod difference by the
    // variation of f around its interval mean, so smooth integrands are not
    // overestimated and kinked ones are not trusted too early
    double mean = kron * 0.5;
    double resasc = wk[7] * std::abs(fv[7] - mean);
    for (int j = 0; j < 7; ++j)
        resasc += wk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
    kron *= h;
    gauss *= h;
    resasc *= std::abs(h);
    double err = std::abs(kron - gauss);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    if (!std::isfinite(err)) err = kInf;
    return {a, b, kron, err};
}

}  // namespace detail

inline QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                            const QuadOptions& opt = {}) {
    if (a == b) return {0.0, 0.0, 0};
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::priority_queue<detail::GKCell> cells;
    detail::GKCell root = detail::gk15(f, a, b);
    double total = root.value, toterr = root.error;
    cells.push(root);
    int count = 1;
    while (toterr > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
        if (count >= opt.max_intervals || !std::isfinite(total))
            throw NumericError("quadrature did not converge (divergent or non-integrable)");
        detail::GKCell top = cells.top();
        cells.pop();
        double mid = 0.5 * (top.a + top.b);
        if (mid <= top.a || mid >= top.b)
            throw NumericError("quadrature interval collapsed before convergence");
        detail::GKCell l = detail::gk15(f, top.a, mid);
        detail::GKCell r = detail::gk15(f, mid, top.b);
        total += l.value + r.value - top.value;
        toterr += l.error + r.error - top.error;
        cells.push(l);
        cells.push(r);
        ++count;
    }
    if (!std::isfinite(total) || !std::isfinite(toterr))
        throw NumericError("quadrature produced a non-finite result (divergent integrand?)");
    return {sign * total, toterr, count};
}

// Edge-aware integrand form: receives x plus the exact distances (x-a, b-x).
// Singular factors written in terms of the distances keep full precision
// right up to the endpoints, which a plain f(x) cannot (x rounds onto the
// endpoint roughly one ulp away from it).
using EdgeAwareFn = std::function<double(double x, double dist_a, double dist_b)>;

// Integrate f over [a,b] when f behaves like (x-a)^{alpha_a-1} near a and
// (b-x)^{alpha_b-1} near b (alpha >= 1 means no singularity). Each half is
// mapped by x = end -+ span*u^p with p chosen so the transformed integrand
// behaves like u^4 near u = 0.
inline QuadResult integrate_algebraic(const EdgeAwareFn& f, double a, double b, double alpha_a,
                                      double alpha_b, const QuadOptions& opt = {}) {
    if (!(alpha_a > 0) || !(alpha_b > 0))
        throw NumericError("endpoint exponent must be positive for integrability");
    if (a == b) return {0.0, 0.0, 0};
    if (a > b) {
        QuadResult r = integrate_algebraic(f, b, a, alpha_b, alpha_a, opt);
        return {-r.value, r.error, r.intervals};
    }
    const double mid = 0.5 * (a + b);
    auto power = [](double alpha) {
        return (std::floor(alpha) == alpha) ? 1.0 : std::max(1.0, 5.0 / alpha);
    };
    const double pa = power(alpha_a), pb = power(alpha_b);
    const double sa = mid - a, sb = b - mid;
    auto ga = [&](double u) {
        double up = std::pow(u, pa);
        double w = pa * (u > 0 ? up / u : 0.0) * sa;
        if (up == 0.0 || w == 0.0) return 0.0;
        double d = sa * up;
        return f(a + d, d, (b - a) - d) * w;
    };
    auto gb = [&](double u) {
        double up = std::pow(u, pb);
        double w = pb * (u > 0 ? up / u : 0.0) * sb;
        if (up == 0.0 || w == 0.0) return 0.0;
        double d = sb * up;
        return f(b - d, (b - a) - d, d) * w;
    };
    QuadResult left = integrate(ga, 0.0, 1.0, opt);
    QuadResult right = integrate(gb, 0.0, 1.0, opt);
    return {left.value + right.value, left.error + right.error,
            left.intervals + right.intervals};
}

// Black-box overload; accuracy near a singular interior-located endpoint is
// limited to about ulp(endpoint)^alpha because x collapses onto it.
inline QuadResult integrate_algebraic(const std::function<double(double)>& f, double a, double b,
                                      double alpha_a, double alpha_b,
                                      const QuadOptions& opt = {}) {
    return integrate_algebraic(
        EdgeAwareFn([&f, a, b](double x, double, double) {
            if (x <= a || x >= b) return 0.0;  // collapsed onto an endpoint
            return f(x);
        }),
        a, b, alpha_a, alpha_b, opt);
}

// Integrate f over [a, inf) when |f| decays like x^{-decay_e}. Doubling
// blocks are accumulated until the analytic remainder bound
// |f(T)| T/(e-1) falls below tolerance.
inline QuadResult integrate_tail(const std::function<double(double)>& f, double a, double decay_e,
                                 const QuadOptions& opt = {}) {
    if (!(a > 0)) throw NumericError("tail integration needs a positive start");
    if (decay_e <= 1.0 + 1e-12)
        throw NumericError("tail decays too slowly to integrate (exponent <= 1)");
    QuadResult acc;
    double lo = a;
    for (int block = 0; block < 400; ++block) {
        double hi = 2.0 * lo;
        QuadResult part = integrate(f, lo, hi, opt);
        acc.value += part.value;
        acc.error += part.error;
        acc.intervals += part.intervals;
        lo = hi;
        double rem = 2.0 * std::max(std::abs(f(lo)), std::abs(f(1.5 * lo)) *
                                                         std::pow(1.5, decay_e)) *
                     lo / (decay_e - 1.0);
        if (rem <= 0.5 * std::max(opt.abs_tol, opt.rel_tol * std::abs(acc.value))) {
            acc.error += rem;
            return acc;
        }
    }
    throw NumericError("tail integration exhausted its block budget");
}

}  // namespace pdmp
