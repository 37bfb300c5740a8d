#pragma once

// Event-driven simulation: deterministic flow inside an environment,
// random environment jumps. Constant switch laws draw holding times
// directly; state-dependent laws are sampled by thinning against the
// declared rate bound. Every replicate owns one counter-based RNG
// stream, so paths are bit-reproducible for a fixed (seed, stream).

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "pdmp/common.hpp"
#include "pdmp/integrate.hpp"
#include "pdmp/model.hpp"
#include "pdmp/rng.hpp"

namespace pdmp {

struct SimConfig {
    double t_max = 1000.0;
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_max = kInf;
    double record_dt = 0.1;
    double log_floor = 1e-12;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    int threads = 0;  // ensemble workers; 0 = hardware concurrency

    FlowOptions flow_options() const {
        FlowOptions o;
        o.rtol = rtol;
        o.atol = atol;
        o.h_max = h_max;
        o.log_floor = log_floor;
        return o;
    }
};

struct JumpEvent {
    double t;
    int from, to;
    Vec x;
};

struct JumpDraw {
    double dt;  // time advanced from the entry state
    int to;     // target environment, -1 if the cap was hit first
};

// Sampled path. Rows are stored flat: sample s, species i -> xs[s*n+i].
// lxs carries ln x with full precision even when x underflows; jumps are
// stored exactly, and each jump also contributes a pre/post sample pair
// sharing the jump time so segment environments stay unambiguous.
struct Trajectory {
    int n = 0;
    Vec ts;
    Vec xs;
    Vec lxs;
    std::vector<int> ks;
    std::vector<JumpEvent> jumps;
    std::uint64_t seed = 0, stream = 0, model_fp = 0;
    double t_max = 0, record_dt = 0, log_floor = 1e-12;

    std::size_t size() const { return ts.size(); }
    double x(std::size_t s, int i) const { return xs[s * static_cast<std::size_t>(n) + i]; }
    double lx(std::size_t s, int i) const { return lxs[s * static_cast<std::size_t>(n) + i]; }
};

namespace detail {

inline int pick_target(const ModelSpec& m, const Vec& x, int k, Philox& rng) {
    Vec w(m.n0, 0.0);
    double total = 0.0;
    for (int j = 0; j < m.n0; ++j) {
        if (j == k) continue;
        w[j] = m.switching.entry(x, k, j);
        total += w[j];
    }
    if (total <= 0.0) throw ModelError("jump drawn from a state with zero exit rate");
    return rng.categorical(w.data(), m.n0, total);
}

}  // namespace detail

// Advance the path-state to the moment of the next environment jump (or to
// t_cap if that comes first) and report the drawn target. The environment
// change itself is left to the caller.
inline JumpDraw sample_jump(const ModelSpec& m, FlowState& s, int k, Philox& rng, double t_cap,
                            const FlowOptions& fopt) {
    const double t0 = s.t;
    if (m.switching.kind == SwitchLaw::Kind::ConstantMatrix) {
        double rate = m.exit_rate(s.x, k);
        double t_jump = rate > 0 ? t0 + rng.exponential(rate) : kInf;
        if (t_jump >= t_cap) {
            flow(m, k, s, t_cap, fopt);
            return {s.t - t0, -1};
        }
        flow(m, k, s, t_jump, fopt);
        return {s.t - t0, detail::pick_target(m, s.x, k, rng)};
    }
    const double cbar = m.switching.rate_bound;
    if (cbar <= 0) throw ModelError("state-dependent switching needs a positive rate_bound");
    while (true) {
        double tc = s.t + rng.exponential(cbar);
        if (tc >= t_cap) {
            flow(m, k, s, t_cap, fopt);
            return {s.t - t0, -1};
        }
        flow(m, k, s, tc, fopt);
        double rho = m.exit_rate(s.x, k);
        if (rho > cbar * (1 + 1e-9))
            throw ModelError("observed switching rate exceeds the declared bound");
        if (rho > 0 && rng.u01() * cbar < rho)
            return {s.t - t0, detail::pick_target(m, s.x, k, rng)};
    }
}

namespace detail {

struct Recorder {
    Trajectory& tr;
    const double record_dt;
    std::uint64_t grid_idx = 1;  // next grid time = grid_idx * record_dt

    void push(const FlowState& s, int k) {
        tr.ts.push_back(s.t);
        tr.xs.insert(tr.xs.end(), s.x.begin(), s.x.end());
        tr.lxs.insert(tr.lxs.end(), s.lx.begin(), s.lx.end());
        tr.ks.push_back(k);
    }

    // flow to `target`, stopping exactly on every grid time along the way
    void advance(const ModelSpec& m, FlowState& s, int k, double target,
                 const FlowOptions& fopt) {
        while (true) {
            double tg = static_cast<double>(grid_idx) * record_dt;
            if (tg > target) break;
            flow(m, k, s, tg, fopt);
            push(s, k);
            ++grid_idx;
        }
        if (s.t < target) flow(m, k, s, target, fopt);
    }
};

}  // namespace detail

inline Trajectory simulate(const ModelSpec& m, const Vec& x0, int k0, const SimConfig& cfg) {
    if (!(cfg.t_max > 0)) throw ModelError("t_max must be positive");
    if (!(cfg.rtol > 0) || !(cfg.atol > 0)) throw ModelError("tolerances must be positive");
    if (!(cfg.record_dt > 0)) throw ModelError("record_dt must be positive");
    check_state(m, x0, k0);

    Philox rng(cfg.seed, cfg.stream);
    FlowOptions fopt = cfg.flow_options();
    FlowState s = FlowState::from(x0, fopt.log_floor);
    int k = k0;

    Trajectory tr;
    tr.n = m.n;
    tr.seed = cfg.seed;
    tr.stream = cfg.stream;
    tr.model_fp = m.fingerprint();
    tr.t_max = cfg.t_max;
    tr.record_dt = cfg.record_dt;
    tr.log_floor = cfg.log_floor;
    detail::Recorder rec{tr, cfg.record_dt};
    rec.push(s, k);

    const bool constant_law = m.switching.kind == SwitchLaw::Kind::ConstantMatrix;
    const double cbar = m.switching.rate_bound;
    if (!constant_law && cbar <= 0)
        throw ModelError("state-dependent switching needs a positive rate_bound");

    while (s.t < cfg.t_max) {
        double t_jump;
        int target = -1;
        if (constant_law) {
            double rate = m.exit_rate(s.x, k);
            t_jump = rate > 0 ? s.t + rng.exponential(rate) : kInf;
            if (t_jump < cfg.t_max) {
                rec.advance(m, s, k, t_jump, fopt);
                target = detail::pick_target(m, s.x, k, rng);
            }
        } else {
            // thinning: walk candidate times until one is accepted
            while (true) {
                double tc = s.t + rng.exponential(cbar);
                if (tc >= cfg.t_max) {
                    t_jump = kInf;
                    break;
                }
                rec.advance(m, s, k, tc, fopt);
                double rho = m.exit_rate(s.x, k);
                if (rho > cbar * (1 + 1e-9))
                    throw ModelError("observed switching rate exceeds the declared bound");
                if (rho > 0 && rng.u01() * cbar < rho) {
                    t_jump = tc;
                    target = detail::pick_target(m, s.x, k, rng);
                    break;
                }
            }
        }
        if (target < 0) {
            rec.advance(m, s, k, cfg.t_max, fopt);
            break;
        }
        rec.push(s, k);  // pre-jump sample, old environment
        tr.jumps.push_back({s.t, k, target, s.x});
        k = target;
        rec.push(s, k);  // post-jump sample, new environment
    }
    if (tr.ts.empty() || tr.ts.back() != cfg.t_max) {
        s.t = cfg.t_max;
        rec.push(s, k);
    }
    return tr;
}

inline std::vector<Trajectory> simulate_ensemble(const ModelSpec& m, const Vec& x0, int k0,
                                                 const SimConfig& cfg, int replicates) {
    if (replicates < 1) throw ModelError("need at least one replicate");
    std::vector<Trajectory> out(replicates);
    unsigned hw = std::thread::hardware_concurrency();
    int workers = cfg.threads > 0 ? cfg.threads : static_cast<int>(hw ? hw : 1);
    workers = std::min(workers, replicates);

    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    auto body = [&]() {
        while (true) {
            int r = next.fetch_add(1);
            if (r >= replicates) return;
            try {
                SimConfig c = cfg;
                c.stream = cfg.stream + static_cast<std::uint64_t>(r);
                out[r] = simulate(m, x0, k0, c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    if (workers <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace pdmp
