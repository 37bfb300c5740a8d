#pragma once

// Estimators over recorded trajectories: occupation histograms with exact
// segment-time attribution, jump-aware time averages, growth-rate slope
// fits, and the gauge drift identity average.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "pdmp/common.hpp"
#include "pdmp/model.hpp"
#include "pdmp/simulate.hpp"

namespace pdmp {

using StateFn = std::function<double(const Vec&, int)>;

namespace detail {

inline double resolve_burn_in(const Trajectory& traj, double burn_in) {
    if (burn_in < 0) burn_in = 0.1 * traj.t_max;
    if (!(burn_in < traj.t_max)) throw ModelError("burn-in must be below the trajectory horizon");
    return burn_in;
}

// walk segments [t_s, t_{s+1}] with the environment constant on each one
// (jump instants appear as duplicated sample times, so dt = 0 there) and
// hand each clipped piece to the sink. x at the clip point is the linear
// interpolant between the recorded samples.
template <typename Sink>
inline void for_each_segment(const Trajectory& traj, double t_lo, double t_hi, Sink&& sink) {
    const int n = traj.n;
    Vec xa(n), xb(n);
    for (std::size_t s = 0; s + 1 < traj.size(); ++s) {
        double t1 = traj.ts[s], t2 = traj.ts[s + 1];
        if (t2 <= t_lo || t1 >= t_hi || t2 == t1) continue;
        double c1 = std::max(t1, t_lo), c2 = std::min(t2, t_hi);
        if (!(c2 > c1)) continue;
        double u1 = (c1 - t1) / (t2 - t1), u2 = (c2 - t1) / (t2 - t1);
        for (int i = 0; i < n; ++i) {
            double a = traj.x(s, i), b = traj.x(s + 1, i);
            xa[i] = a + u1 * (b - a);
            xb[i] = a + u2 * (b - a);
        }
        sink(c1, c2, xa, xb, traj.ks[s], s);
    }
}

}  // namespace detail

// trapezoidal-in-time average of g(x, k) over [burn_in, t_max]; segments are
// already split at every jump, so the rule never straddles an environment
// change. Normalizes by the accumulated time, making g == 1 average to 1
// exactly.
inline double time_average(const Trajectory& traj, const StateFn& g, double burn_in = -1.0) {
    burn_in = detail::resolve_burn_in(traj, burn_in);
    double acc = 0.0, T = 0.0;
    detail::for_each_segment(traj, burn_in, traj.t_max,
                             [&](double t1, double t2, const Vec& xa, const Vec& xb, int k,
                                 std::size_t) {
                                 double dt = t2 - t1;
                                 acc += 0.5 * (g(xa, k) + g(xb, k)) * dt;
                                 T += dt;
                             });
    if (T <= 0.0) throw ModelError("empty averaging window");
    return acc / T;
}

struct AverageEstimate {
    double value = 0;
    double se = 0;
    double t_lo = 0, t_hi = 0;
};

// same average plus a conservative batch-means standard error: the window is
// cut into equal sub-windows whose averages are treated as independent draws.
inline AverageEstimate time_average_se(const Trajectory& traj, const StateFn& g,
                                       double burn_in = -1.0, int batches = 8) {
    burn_in = detail::resolve_burn_in(traj, burn_in);
    AverageEstimate est;
    est.t_lo = burn_in;
    est.t_hi = traj.t_max;
    est.value = time_average(traj, g, burn_in);
    if (batches < 2) return est;
    double span = (traj.t_max - burn_in) / batches;
    Vec bv;
    for (int b = 0; b < batches; ++b) {
        double lo = burn_in + b * span;
        double hi = (b + 1 == batches) ? traj.t_max : lo + span;
        double acc = 0.0, T = 0.0;
        detail::for_each_segment(traj, lo, hi,
                                 [&](double t1, double t2, const Vec& xa, const Vec& xb, int k,
                                     std::size_t) {
                                     double dt = t2 - t1;
                                     acc += 0.5 * (g(xa, k) + g(xb, k)) * dt;
                                     T += dt;
                                 });
        if (T > 0) bv.push_back(acc / T);
    }
    if (bv.size() >= 2) {
        double mean = 0;
        for (double v : bv) mean += v;
        mean /= (double)bv.size();
        double ss = 0;
        for (double v : bv) ss += (v - mean) * (v - mean);
        est.se = std::sqrt(ss / ((double)bv.size() * ((double)bv.size() - 1)));
    }
    return est;
}

struct HistogramGrid {
    std::vector<Vec> edges;  // strictly increasing per axis

    static HistogramGrid uniform(const Vec& lo, const Vec& hi, const std::vector<int>& nbins) {
        if (lo.size() != hi.size() || lo.size() != nbins.size())
            throw ModelError("grid dimensions disagree");
        HistogramGrid g;
        for (std::size_t i = 0; i < lo.size(); ++i) {
            if (!(hi[i] > lo[i]) || nbins[i] < 1) throw ModelError("bad grid axis");
            Vec e(nbins[i] + 1);
            for (int b = 0; b <= nbins[i]; ++b)
                e[b] = lo[i] + (hi[i] - lo[i]) * ((double)b / nbins[i]);
            g.edges.push_back(std::move(e));
        }
        return g;
    }

    int dims() const { return (int)edges.size(); }
    std::size_t bins(int axis) const { return edges[axis].size() - 1; }
    std::size_t total_bins() const {
        std::size_t t = 1;
        for (const auto& e : edges) t *= e.size() - 1;
        return t;
    }

    // flat index of the bin containing x, or -1 when outside
    long long locate(const Vec& x) const {
        long long flat = 0;
        for (int i = 0; i < dims(); ++i) {
            const Vec& e = edges[i];
            if (x[i] < e.front() || x[i] >= e.back()) return -1;
            std::size_t b = (std::size_t)(std::upper_bound(e.begin(), e.end(), x[i]) -
                                          e.begin()) - 1;
            flat = flat * (long long)(e.size() - 1) + (long long)b;
        }
        return flat;
    }

    bool operator==(const HistogramGrid& o) const { return edges == o.edges; }
};

// per-environment rectangular histogram of occupation time. Raw seconds are
// kept so that merging windows stays exact; normalized views divide by the
// accumulated time.
struct EmpiricalMeasure {
    HistogramGrid grid;
    int n0 = 0;
    std::vector<double> seconds;  // [k * total_bins + bin]
    double out_of_grid = 0.0;     // time spent outside the grid (never clipped away)
    double total_time = 0.0;
    double burn_in = 0.0;

    double mass(int k, std::size_t flat) const {
        return seconds[(std::size_t)k * grid.total_bins() + flat] / total_time;
    }
    double deficit() const { return out_of_grid / total_time; }

    Vec env_marginal() const {
        Vec m(n0, 0.0);
        std::size_t nb = grid.total_bins();
        for (int k = 0; k < n0; ++k)
            for (std::size_t b = 0; b < nb; ++b) m[k] += seconds[(std::size_t)k * nb + b];
        for (double& v : m) v /= total_time;
        return m;
    }

    // env-combined normalized bin masses
    std::vector<double> combined() const {
        std::size_t nb = grid.total_bins();
        std::vector<double> c(nb, 0.0);
        for (int k = 0; k < n0; ++k)
            for (std::size_t b = 0; b < nb; ++b) c[b] += seconds[(std::size_t)k * nb + b];
        for (double& v : c) v /= total_time;
        return c;
    }

    void to_csv(std::ostream& os) const {
        int n = grid.dims();
        os << "env";
        for (int i = 1; i <= n; ++i) os << ",bin_lo_" << i;
        for (int i = 1; i <= n; ++i) os << ",bin_hi_" << i;
        os << ",mass\n";
        char buf[32];
        std::vector<std::size_t> idx(n, 0);
        std::size_t nb = grid.total_bins();
        for (int k = 0; k < n0; ++k) {
            std::fill(idx.begin(), idx.end(), 0);
            for (std::size_t b = 0; b < nb; ++b) {
                os << (k + 1);
                for (int i = 0; i < n; ++i) {
                    std::snprintf(buf, sizeof buf, "%.17g", grid.edges[i][idx[i]]);
                    os << ',' << buf;
                }
                for (int i = 0; i < n; ++i) {
                    std::snprintf(buf, sizeof buf, "%.17g", grid.edges[i][idx[i] + 1]);
                    os << ',' << buf;
                }
                std::snprintf(buf, sizeof buf, "%.17g", mass(k, b));
                os << ',' << buf << '\n';
                for (int i = n - 1; i >= 0; --i) {
                    if (++idx[i] < grid.bins(i)) break;
                    idx[i] = 0;
                }
            }
        }
    }
};

// occupation histogram with exact segment-time attribution: each recorded
// segment is a straight line in state space, so its time in a bin is the
// parameter length between bin-edge crossings. The only discretization error
// left is the linear interpolation between samples, bounded by record_dt.
inline EmpiricalMeasure occupation_histogram(const Trajectory& traj, const HistogramGrid& grid,
                                             double burn_in = -1.0) {
    if (grid.dims() != traj.n) throw ModelError("grid dimension mismatch");
    burn_in = detail::resolve_burn_in(traj, burn_in);
    EmpiricalMeasure em;
    em.grid = grid;
    int n0 = 0;
    for (int k : traj.ks) n0 = std::max(n0, k + 1);
    em.n0 = n0;
    em.seconds.assign((std::size_t)n0 * grid.total_bins(), 0.0);
    em.burn_in = burn_in;

    const int n = traj.n;
    std::vector<double> cuts;
    Vec xm(n);
    detail::for_each_segment(
        traj, burn_in, traj.t_max,
        [&](double t1, double t2, const Vec& xa, const Vec& xb, int k, std::size_t) {
            double dt = t2 - t1;
            em.total_time += dt;
            cuts.clear();
            cuts.push_back(0.0);
            cuts.push_back(1.0);
            for (int i = 0; i < n; ++i) {
                double a = xa[i], b = xb[i];
                if (a == b) continue;
                double lo = std::min(a, b), hi = std::max(a, b);
                const Vec& e = grid.edges[i];
                auto first = std::upper_bound(e.begin(), e.end(), lo);
                for (auto it = first; it != e.end() && *it < hi; ++it)
                    cuts.push_back((*it - a) / (b - a));
            }
            std::sort(cuts.begin(), cuts.end());
            for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
                double u1 = cuts[c], u2 = cuts[c + 1];
                if (!(u2 > u1)) continue;
                double um = 0.5 * (u1 + u2);
                for (int i = 0; i < n; ++i) xm[i] = xa[i] + um * (xb[i] - xa[i]);
                long long flat = grid.locate(xm);
                double w = dt * (u2 - u1);
                if (flat < 0)
                    em.out_of_grid += w;
                else
                    em.seconds[(std::size_t)k * grid.total_bins() + (std::size_t)flat] += w;
            }
        });
    if (em.total_time <= 0.0) throw ModelError("empty histogram window");
    return em;
}

// combine histograms over disjoint windows; raw seconds add, so the result
// equals the single-pass histogram up to floating-point reassociation
inline EmpiricalMeasure merge(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    if (!(a.grid == b.grid) || a.n0 != b.n0) throw ModelError("histograms are not mergeable");
    EmpiricalMeasure out = a;
    for (std::size_t i = 0; i < out.seconds.size(); ++i) out.seconds[i] += b.seconds[i];
    out.out_of_grid += b.out_of_grid;
    out.total_time += b.total_time;
    out.burn_in = std::min(a.burn_in, b.burn_in);
    return out;
}

struct SlopeEstimate {
    double value = 0;
    double se = 0;
    double t_lo = 0, t_hi = 0;
    double cross_value = 0;  // time-average of f_i over the same window
    double cross_se = 0;
    bool floored = false;  // some sample dipped below the integrator log floor
};

// least-squares slope of ln x_i(t) over the trailing window. Because the flow
// is of Kolmogorov type, d ln x_i / dt = f_i exactly, so the time-average of
// f_i is an independent estimate of the same limit and is reported alongside.
inline SlopeEstimate lyapunov_slope(const ModelSpec& m, const Trajectory& traj, int species,
                                    double window_frac = 0.5, int batches = 8) {
    if (species < 0 || species >= traj.n) throw ModelError("species index out of range");
    if (!(traj.x(0, species) > 0.0))
        throw ModelError("slope needs a positive initial coordinate");
    SlopeEstimate est;
    est.t_lo = traj.t_max * (1.0 - window_frac);
    est.t_hi = traj.t_max;

    const double lfloor = std::log(traj.log_floor);
    // times are centered on the window to keep the normal equations
    // well-conditioned over long horizons
    auto ols = [&](double lo, double hi, double& slope_out) -> bool {
        const double mid = 0.5 * (lo + hi);
        double st = 0, sy = 0, stt = 0, sty = 0, cnt = 0;
        for (std::size_t s = 0; s < traj.size(); ++s) {
            double t = traj.ts[s];
            if (t < lo || t > hi) continue;
            double y = traj.lx(s, species);
            if (!std::isfinite(y)) {
                est.floored = true;
                continue;
            }
            if (y < lfloor) est.floored = true;
            double tc = t - mid;
            st += tc;
            sy += y;
            stt += tc * tc;
            sty += tc * y;
            cnt += 1;
        }
        if (cnt < 2) return false;
        double det = cnt * stt - st * st;
        if (det <= 0) return false;
        slope_out = (cnt * sty - st * sy) / det;
        return true;
    };

    if (!ols(est.t_lo, est.t_hi, est.value)) throw ModelError("window has too few samples");
    if (batches >= 2) {
        Vec bs;
        double span = (est.t_hi - est.t_lo) / batches;
        for (int b = 0; b < batches; ++b) {
            double lo = est.t_lo + b * span;
            double hi = (b + 1 == batches) ? est.t_hi : lo + span;
            double sl;
            if (ols(lo, hi, sl)) bs.push_back(sl);
        }
        if (bs.size() >= 2) {
            double mean = 0;
            for (double v : bs) mean += v;
            mean /= (double)bs.size();
            double ss = 0;
            for (double v : bs) ss += (v - mean) * (v - mean);
            est.se = std::sqrt(ss / ((double)bs.size() * ((double)bs.size() - 1)));
        }
    }

    // the window average of f_i telescopes exactly: since d ln x_i/dt = f_i,
    // the average is the increment of ln x_i over the window divided by its
    // length. A quadrature of f_i along the samples would carry an
    // O(record_dt^2) bias that dwarfs the tiny variance of this estimator.
    auto telescope = [&](double lo, double hi, double& out) -> bool {
        std::size_t first = traj.size(), last = 0;
        for (std::size_t s = 0; s < traj.size(); ++s) {
            double t = traj.ts[s];
            if (t < lo || t > hi) continue;
            if (first == traj.size()) first = s;
            last = s;
        }
        if (first >= last) return false;
        double span = traj.ts[last] - traj.ts[first];
        double y1 = traj.lx(first, species), y2 = traj.lx(last, species);
        if (!(span > 0) || !std::isfinite(y1) || !std::isfinite(y2)) return false;
        out = (y2 - y1) / span;
        return true;
    };
    if (telescope(est.t_lo, est.t_hi, est.cross_value)) {
        if (batches >= 2) {
            Vec bv;
            double span = (est.t_hi - est.t_lo) / batches;
            for (int b = 0; b < batches; ++b) {
                double lo = est.t_lo + b * span;
                double hi = (b + 1 == batches) ? est.t_hi : lo + span;
                double v;
                if (telescope(lo, hi, v)) bv.push_back(v);
            }
            if (bv.size() >= 2) {
                double mean = 0;
                for (double v : bv) mean += v;
                mean /= (double)bv.size();
                double ss = 0;
                for (double v : bv) ss += (v - mean) * (v - mean);
                est.cross_se = std::sqrt(ss / ((double)bv.size() * ((double)bv.size() - 1)));
            }
        }
    } else {
        // a coordinate at exact zero has no log increments; fall back to the
        // quadrature average of the fitness itself
        AverageEstimate cross = time_average_se(
            traj,
            [&](const Vec& x, int k) { return m.fitness_value(x, k, species); },
            est.t_lo, batches);
        est.cross_value = cross.value;
        est.cross_se = cross.se;
    }
    return est;
}

// time average of the generator applied to ln F along the path. Writing
// LF = flow + sum_l q_kl (F_l - F_k), the log identity collapses to
//   L ln F = flow / F_k + sum_l q_kl ln(F_l / F_k),
// whose stationary average vanishes; the magnitude of the average is a
// direct check that the run has equilibrated.
inline double lnF_drift_average(const ModelSpec& m, const Trajectory& traj,
                                double burn_in = -1.0) {
    if (!m.gauge) throw UnsupportedError("model has no gauge function");
    const GaugeFunction& g = *m.gauge;
    Vec fv(m.n);
    StateFn drift = [&](const Vec& x, int k) {
        for (int i = 0; i < m.n; ++i) fv[i] = m.fitness_value(x, k, i);
        double Fk = g.value(x, k);
        double out = g.flow_term(x, k, fv) / Fk;
        for (int l = 0; l < m.n0; ++l)
            if (l != k) out += m.switching.entry(x, k, l) * std::log(g.value(x, l) / Fk);
        return out;
    };
    return time_average(traj, drift, burn_in);
}

}  // namespace pdmp
