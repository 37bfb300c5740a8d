#pragma once

// Adaptive flow integration for one environment: embedded Dormand-Prince 4(5)
// on dx_i/dt = x_i f_i(x,k), with a per-component representation switch.
// Components at exactly zero never move; components below log_floor advance
// in log coordinates so deep decay keeps relative accuracy and positivity.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "pdmp/common.hpp"
#include "pdmp/model.hpp"

namespace pdmp {

struct FlowOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_max = kInf;
    double h_init = 0.0;  // 0 = pick automatically
    double h_min = 1e-14;
    double log_floor = 1e-12;       // enter log coordinates below this
    double log_exit_factor = 100;   // leave them above log_floor * factor
    std::uint64_t max_steps = 200000000;
};

enum class Rep : unsigned char { Zero, Lin, Log };

struct FlowState {
    double t = 0.0;
    Vec x;                 // exact zeros preserved; tiny values may underflow
    Vec lx;                // authoritative in Log representation; -inf at zero
    std::vector<Rep> rep;

    static FlowState from(const Vec& x0, double log_floor) {
        FlowState s;
        s.x = x0;
        s.lx.resize(x0.size());
        s.rep.resize(x0.size());
        for (std::size_t i = 0; i < x0.size(); ++i) {
            if (x0[i] == 0.0) {
                s.rep[i] = Rep::Zero;
                s.lx[i] = -kInf;
            } else if (x0[i] < log_floor) {
                s.rep[i] = Rep::Log;
                s.lx[i] = std::log(x0[i]);
            } else {
                s.rep[i] = Rep::Lin;
                s.lx[i] = std::log(x0[i]);
            }
        }
        return s;
    }
};

using StepObserver = std::function<void(const FlowState&, const FlowState&)>;

namespace dopri {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace dopri

namespace detail {

struct FlowWork {
    Vec y0, y1, k1, k2, k3, k4, k5, k6, k7, ytmp, xbuf;
    void resize(int n) {
        for (Vec* v : {&y0, &y1, &k1, &k2, &k3, &k4, &k5, &k6, &k7, &ytmp, &xbuf})
            v->resize(n);
    }
};

inline void flow_rhs(const ModelSpec& m, int k, const std::vector<Rep>& rep, const Vec& y,
                     Vec& xbuf, Vec& dy) {
    int n = m.n;
    for (int i = 0; i < n; ++i) {
        switch (rep[i]) {
            case Rep::Zero: xbuf[i] = 0.0; break;
            case Rep::Lin: xbuf[i] = y[i]; break;
            case Rep::Log: xbuf[i] = std::exp(y[i]); break;
        }
    }
    for (int i = 0; i < n; ++i) {
        if (rep[i] == Rep::Zero) {
            dy[i] = 0.0;
            continue;
        }
        double f = m.fields[k].fitness[i].eval(xbuf.data());
        dy[i] = (rep[i] == Rep::Lin) ? xbuf[i] * f : f;
    }
}

}  // namespace detail

// Advance the state under environment k until s.t reaches t_end.
// The observer, when given, sees every accepted step as (before, after).
inline void flow(const ModelSpec& m, int k, FlowState& s, double t_end,
                 const FlowOptions& opt = {}, const StepObserver& obs = nullptr) {
    if (k < 0 || k >= m.n0) throw ModelError("environment index out of range");
    if (static_cast<int>(s.x.size()) != m.n) throw ModelError("state dimension mismatch");
    if (t_end < s.t - 1e-15) throw ModelError("flow target time lies in the past");
    if (t_end <= s.t) return;

    using namespace dopri;
    detail::FlowWork w;
    w.resize(m.n);
    const double log_exit = std::log(opt.log_floor * opt.log_exit_factor);

    auto assemble = [&]() {
        for (int i = 0; i < m.n; ++i)
            w.y0[i] = (s.rep[i] == Rep::Log) ? s.lx[i] : s.x[i];
    };
    assemble();

    double h = opt.h_init > 0 ? opt.h_init : std::min(opt.h_max, 1e-6 + 0.01 * (t_end - s.t));
    h = std::min(h, opt.h_max);
    bool fsal = false;
    std::uint64_t steps = 0;
    FlowState before, after;

    while (s.t < t_end) {
        h = std::min(h, t_end - s.t);
        if (h < opt.h_min) throw IntegratorError("step size underflow during flow integration");
        if (++steps > opt.max_steps) throw IntegratorError("flow step budget exceeded");

        if (!fsal) detail::flow_rhs(m, k, s.rep, w.y0, w.xbuf, w.k1);
        const int n = m.n;
        for (int i = 0; i < n; ++i) w.ytmp[i] = w.y0[i] + h * a21 * w.k1[i];
        detail::flow_rhs(m, k, s.rep, w.ytmp, w.xbuf, w.k2);
        for (int i = 0; i < n; ++i) w.ytmp[i] = w.y0[i] + h * (a31 * w.k1[i] + a32 * w.k2[i]);
        detail::flow_rhs(m, k, s.rep, w.ytmp, w.xbuf, w.k3);
        for (int i = 0; i < n; ++i)
            w.ytmp[i] = w.y0[i] + h * (a41 * w.k1[i] + a42 * w.k2[i] + a43 * w.k3[i]);
        detail::flow_rhs(m, k, s.rep, w.ytmp, w.xbuf, w.k4);
        for (int i = 0; i < n; ++i)
            w.ytmp[i] = w.y0[i] + h * (a51 * w.k1[i] + a52 * w.k2[i] + a53 * w.k3[i] + a54 * w.k4[i]);
        detail::flow_rhs(m, k, s.rep, w.ytmp, w.xbuf, w.k5);
        for (int i = 0; i < n; ++i)
            w.ytmp[i] = w.y0[i] + h * (a61 * w.k1[i] + a62 * w.k2[i] + a63 * w.k3[i] +
                                       a64 * w.k4[i] + a65 * w.k5[i]);
        detail::flow_rhs(m, k, s.rep, w.ytmp, w.xbuf, w.k6);
        for (int i = 0; i < n; ++i)
            w.y1[i] = w.y0[i] + h * (b1 * w.k1[i] + b3 * w.k3[i] + b4 * w.k4[i] +
                                     b5 * w.k5[i] + b6 * w.k6[i]);
        detail::flow_rhs(m, k, s.rep, w.y1, w.xbuf, w.k7);

        bool bad = false;  // non-finite value or a linear component driven nonpositive
        double errsq = 0.0;
        int active = 0;
        for (int i = 0; i < n; ++i) {
            if (s.rep[i] == Rep::Zero) continue;
            if (!std::isfinite(w.y1[i])) { bad = true; break; }
            if (s.rep[i] == Rep::Lin && w.y1[i] <= 0.0) { bad = true; break; }
            double err = h * (e1 * w.k1[i] + e3 * w.k3[i] + e4 * w.k4[i] + e5 * w.k5[i] +
                              e6 * w.k6[i] + e7 * w.k7[i]);
            // Linear components are controlled relatively below unit scale:
            // a flat atol floor would let decaying species stall with O(1)
            // relative error before they ever reach log_floor.
            double sc;
            if (s.rep[i] == Rep::Lin) {
                double ym = std::max(std::abs(w.y0[i]), std::abs(w.y1[i]));
                sc = ym >= 1.0 ? opt.atol + opt.rtol * ym : (opt.atol + opt.rtol) * ym;
            } else {
                sc = opt.atol + opt.rtol;
            }
            errsq += (err / sc) * (err / sc);
            ++active;
        }
        double errnorm = active ? std::sqrt(errsq / active) : 0.0;

        if (bad) {
            // shrink hard; if that stalls, move struggling components to logs
            fsal = false;
            if (h <= 64 * opt.h_min) {
                for (int i = 0; i < n; ++i)
                    if (s.rep[i] == Rep::Lin && s.x[i] > 0 && s.x[i] < 1.0) {
                        s.rep[i] = Rep::Log;
                        s.lx[i] = std::log(s.x[i]);
                    }
                assemble();
                h *= 64;
            } else {
                h *= 0.25;
            }
            continue;
        }
        if (errnorm > 1.0) {
            fsal = false;
            h *= std::max(0.2, 0.9 * std::pow(errnorm, -0.2));
            continue;
        }

        // accepted
        if (obs) {
            before.t = s.t;
            before.x = s.x;
            before.lx = s.lx;
            before.rep = s.rep;
        }
        s.t += h;
        if (t_end - s.t < opt.h_min) s.t = t_end;
        for (int i = 0; i < n; ++i) {
            if (s.rep[i] == Rep::Zero) continue;
            if (s.rep[i] == Rep::Lin) {
                s.x[i] = w.y1[i];
                s.lx[i] = std::log(w.y1[i]);
            } else {
                s.lx[i] = w.y1[i];
                s.x[i] = std::exp(w.y1[i]);
            }
        }
        if (obs) {
            after.t = s.t;
            after.x = s.x;
            after.lx = s.lx;
            after.rep = s.rep;
            obs(before, after);
        }

        // representation upkeep (values untouched, only the coordinates used)
        bool switched = false;
        for (int i = 0; i < n; ++i) {
            if (s.rep[i] == Rep::Lin && s.x[i] < opt.log_floor) {
                s.rep[i] = Rep::Log;
                switched = true;
            } else if (s.rep[i] == Rep::Log && s.lx[i] > log_exit) {
                s.rep[i] = Rep::Lin;
                switched = true;
            }
        }
        std::swap(w.y0, w.y1);
        assemble();  // cheap, and required after any representation change
        if (switched) {
            fsal = false;
        } else {
            std::swap(w.k1, w.k7);
            fsal = true;
        }
        double grow = errnorm > 0 ? 0.9 * std::pow(errnorm, -0.2) : 5.0;
        h = std::min(opt.h_max, h * std::min(5.0, std::max(0.2, grow)));
    }
}

// One-shot form: integrate x0 for a duration tau under environment k.
inline Vec flow_segment(const ModelSpec& m, const Vec& x0, int k, double tau,
                        const FlowOptions& opt = {}) {
    check_state(m, x0, k);
    if (tau < 0) throw ModelError("flow duration must be nonnegative");
    FlowState s = FlowState::from(x0, opt.log_floor);
    flow(m, k, s, tau, opt);
    return s.x;
}

}  // namespace pdmp
