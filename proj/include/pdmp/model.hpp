#pragma once

// Switched Kolmogorov systems: n interacting species driven by a finite
// random environment. Between environment jumps the state follows
//   dx_i/dt = x_i * f_i(x, k)
// where k is the current environment; the environment jumps i -> j at rate
// q_ij(x). This header holds the model description, face restriction,
// and a structural validator (rate checks, irreducibility, gauge growth
// and dissipation probes).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pdmp/common.hpp"
#include "pdmp/polynomial.hpp"
#include "pdmp/rng.hpp"

namespace pdmp {

enum class Family { Single1D, LV2Comp, PredPrey, Expl2D, LV3Comp, FoodChain, Custom };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::Single1D: return "single1d";
        case Family::LV2Comp: return "lv2comp";
        case Family::PredPrey: return "predprey";
        case Family::Expl2D: return "expl2d";
        case Family::LV3Comp: return "lv3comp";
        case Family::FoodChain: return "foodchain";
        default: return "custom";
    }
}

struct EnvironmentField {
    std::vector<Polynomial> fitness;  // per-capita growth rates f_i(., k)
};

using RateFn = std::function<double(const Vec&)>;

// Environment switching law. Off-diagonal entries are either one shared
// constant matrix or per-entry state-dependent callables/polynomials;
// diagonals are always derived so rows sum to zero.
struct SwitchLaw {
    enum class Kind { ConstantMatrix, StateDependent };
    Kind kind = Kind::ConstantMatrix;
    Mat q;                                  // used when ConstantMatrix (diagonal ignored)
    std::vector<std::vector<Polynomial>> qpoly;  // optional polynomial entries
    std::vector<std::vector<RateFn>> qfn;        // optional callable entries (win over qpoly)
    double rate_bound = 0.0;                // required upper bound on exit rates when state-dependent
    double rate_floor = 0.0;                // optional lower bound, for diagnostics

    int n0() const {
        if (kind == Kind::ConstantMatrix) return static_cast<int>(q.size());
        return static_cast<int>(std::max(qfn.size(), qpoly.size()));
    }

    double entry(const Vec& x, int i, int j) const {
        if (kind == Kind::ConstantMatrix) return q[i][j];
        if (!qfn.empty() && qfn[i][j]) {
            double v = qfn[i][j](x);
            if (v < 0.0) throw ModelError("switch rate callable returned a negative value");
            return v;
        }
        if (!qpoly.empty() && !qpoly[i][j].is_zero()) {
            double v = qpoly[i][j].eval(x.data());
            if (v < 0.0) throw ModelError("switch rate polynomial is negative at the current state");
            return v;
        }
        return 0.0;
    }

    static SwitchLaw constant(Mat offdiag) {
        SwitchLaw law;
        law.q = std::move(offdiag);
        for (std::size_t i = 0; i < law.q.size(); ++i) law.q[i][i] = 0.0;
        return law;
    }

    static SwitchLaw constant2(double q12, double q21) {
        return constant({{0.0, q12}, {q21, 0.0}});
    }
};

// Lyapunov-type gauge F(x,k) = alpha_k * (1 + sum_i w_i x_i^expo), expo in (0,1].
// Used only by diagnostics (tightness probes, log-gauge drift averages);
// sampling never depends on it.
struct GaugeFunction {
    Vec env_weight;       // alpha_k > 0, one per environment
    Vec species_weight;   // w_i > 0, one per species
    double exponent = 1.0;
    double delta0 = 0.02;  // default slack in the dissipation probe

    double base(const Vec& x) const {
        double s = 1.0;
        for (std::size_t i = 0; i < species_weight.size(); ++i)
            s += species_weight[i] * std::pow(x[i], exponent);
        return s;
    }
    double value(const Vec& x, int k) const { return env_weight[k] * base(x); }

    // sum_i x_i f_i dF/dx_i, with fitness values supplied by the caller
    double flow_term(const Vec& x, int k, const Vec& fvals) const {
        double s = 0.0;
        for (std::size_t i = 0; i < species_weight.size(); ++i)
            s += species_weight[i] * std::pow(x[i], exponent) * fvals[i];
        return env_weight[k] * exponent * s;
    }

    double ratio_bound() const {  // max_k,l F(x,k)/F(x,l)
        double lo = env_weight[0], hi = env_weight[0];
        for (double a : env_weight) { lo = std::min(lo, a); hi = std::max(hi, a); }
        return hi / lo;
    }

    double growth_exponent() const { return exponent; }

    static GaugeFunction weighted_power(Vec env_w, Vec species_w, double expo, double d0 = 0.02) {
        GaugeFunction g;
        g.env_weight = std::move(env_w);
        g.species_weight = std::move(species_w);
        g.exponent = expo;
        g.delta0 = d0;
        for (double a : g.env_weight)
            if (!(a > 0)) throw ModelError("gauge environment weights must be positive");
        for (double w : g.species_weight)
            if (!(w > 0)) throw ModelError("gauge species weights must be positive");
        if (!(expo > 0) || expo > 1.0) throw ModelError("gauge exponent must lie in (0,1]");
        return g;
    }
};

struct ModelSpec {
    int n = 0;   // number of species
    int n0 = 0;  // number of environments
    std::vector<EnvironmentField> fields;
    SwitchLaw switching;
    std::optional<GaugeFunction> gauge;
    Family family = Family::Custom;
    std::map<std::string, double> params;
    std::vector<int> species_labels;  // original indices, kept through restriction

    const Polynomial& fitness(int i, int k) const { return fields[k].fitness[i]; }

    double fitness_value(const Vec& x, int k, int i) const {
        return fields[k].fitness[i].eval(x.data());
    }

    void drift_into(const Vec& x, int k, Vec& out) const {
        out.resize(n);
        for (int i = 0; i < n; ++i) out[i] = x[i] * fields[k].fitness[i].eval(x.data());
    }

    double exit_rate(const Vec& x, int k) const {
        double s = 0.0;
        for (int j = 0; j < n0; ++j)
            if (j != k) s += switching.entry(x, k, j);
        return s;
    }

    std::string canonical_text() const {
        char buf[64];
        std::string s = "family=";
        s += family_name(family);
        auto num = [&](double v) { std::snprintf(buf, sizeof buf, "%.17g", v); s += buf; };
        s += ";n=";
        num(n);
        s += ";n0=";
        num(n0);
        s += ";labels=";
        for (int l : species_labels) { num(l); s += ","; }
        for (int k = 0; k < n0; ++k) {
            s += ";env" + std::to_string(k + 1) + ":";
            for (int i = 0; i < n; ++i) { s += fields[k].fitness[i].to_string(); s += "|"; }
        }
        s += ";switch=";
        if (switching.kind == SwitchLaw::Kind::ConstantMatrix) {
            s += "const:";
            for (int i = 0; i < n0; ++i)
                for (int j = 0; j < n0; ++j)
                    if (i != j) { num(switching.q[i][j]); s += ","; }
        } else {
            s += "statedep:";
            for (int i = 0; i < n0; ++i)
                for (int j = 0; j < n0; ++j) {
                    if (i == j) continue;
                    if (!switching.qfn.empty() && switching.qfn[i][j]) s += "<opaque>";
                    else if (!switching.qpoly.empty()) s += switching.qpoly[i][j].to_string();
                    s += ",";
                }
            s += ";bound=";
            num(switching.rate_bound);
        }
        if (gauge) {
            s += ";gauge=a:";
            for (double a : gauge->env_weight) { num(a); s += ","; }
            s += "w:";
            for (double w : gauge->species_weight) { num(w); s += ","; }
            s += "expo:";
            num(gauge->exponent);
        }
        return s;
    }

    std::uint64_t fingerprint() const { return fnv1a(canonical_text()); }
};

inline void check_state(const ModelSpec& m, const Vec& x, int k) {
    if (k < 0 || k >= m.n0) throw ModelError("environment index out of range");
    if (static_cast<int>(x.size()) != m.n) throw ModelError("state dimension mismatch");
    for (double xi : x)
        if (!(xi >= 0.0)) throw ModelError("state has a negative or non-finite component");
}

inline Vec drift(const ModelSpec& m, const Vec& x, int k) {
    check_state(m, x, k);
    Vec out;
    m.drift_into(x, k, out);
    return out;
}

inline Mat rate_matrix(const ModelSpec& m, const Vec& x) {
    if (static_cast<int>(x.size()) != m.n) throw ModelError("state dimension mismatch");
    Mat Q(m.n0, Vec(m.n0, 0.0));
    for (int i = 0; i < m.n0; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.n0; ++j) {
            if (i == j) continue;
            double v = m.switching.entry(x, i, j);
            Q[i][j] = v;
            s += v;
        }
        Q[i][i] = -s;
    }
    return Q;
}

// Restriction to the face where only the species in `keep` are present.
// Interaction terms through absent species vanish; switching is evaluated
// with the absent coordinates pinned at zero.
inline ModelSpec restrict_model(const ModelSpec& m, std::vector<int> keep) {
    std::sort(keep.begin(), keep.end());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i] < 0 || keep[i] >= m.n) throw ModelError("restriction index out of range");
        if (i > 0 && keep[i] == keep[i - 1]) throw ModelError("duplicate restriction index");
    }
    ModelSpec r;
    r.n = static_cast<int>(keep.size());
    r.n0 = m.n0;
    r.family = (r.n == m.n) ? m.family : Family::Custom;
    r.params = m.params;
    r.fields.resize(m.n0);
    for (int k = 0; k < m.n0; ++k) {
        r.fields[k].fitness.reserve(keep.size());
        for (int i : keep) r.fields[k].fitness.push_back(m.fields[k].fitness[i].restrict_to(keep));
    }
    r.switching = m.switching;
    if (m.switching.kind == SwitchLaw::Kind::StateDependent) {
        int nfull = m.n;
        if (!m.switching.qpoly.empty()) {
            for (auto& row : r.switching.qpoly)
                for (auto& p : row) p = p.restrict_to(keep);
        }
        if (!m.switching.qfn.empty()) {
            for (auto& row : r.switching.qfn)
                for (auto& fn : row)
                    if (fn) {
                        RateFn inner = fn;
                        std::vector<int> idx = keep;
                        fn = [inner, idx, nfull](const Vec& xr) {
                            Vec xf(nfull, 0.0);
                            for (std::size_t t = 0; t < idx.size(); ++t) xf[idx[t]] = xr[t];
                            return inner(xf);
                        };
                    }
        }
    }
    if (m.gauge) {
        GaugeFunction g = *m.gauge;
        Vec w;
        for (int i : keep) w.push_back(g.species_weight[i]);
        g.species_weight = std::move(w);
        r.gauge = g;
    }
    for (int i : keep)
        r.species_labels.push_back(m.species_labels.empty() ? i : m.species_labels[i]);
    return r;
}

struct ValidateOptions {
    double delta0 = -1.0;   // < 0: use the gauge's own delta0
    double shell_radius = 25.0;
    int dirs_per_shell = 48;
    std::uint64_t seed = 0x5bd1e995u;
};

struct ValidationReport {
    double rate_row_sum_max = 0.0;
    bool offdiag_nonneg = true;
    bool irreducible = true;
    bool rate_bound_ok = true;
    double rate_max_seen = 0.0;
    bool gauge_present = false;
    double gauge_growth_const = 0.0;  // empirical min of F / (1+|x|)^expo
    bool gauge_growth_ok = true;
    double gauge_ratio_max = 1.0;
    bool gauge_ratio_ok = true;
    Vec shell_radii;
    Vec dissipation_shell_max;  // max over probes and environments, per shell
    enum class Dissipation { Pass, Fail, Unknown };
    Dissipation dissipation = Dissipation::Unknown;
    std::vector<std::string> warnings;

    bool ok() const {
        bool base = rate_row_sum_max <= 1e-9 && offdiag_nonneg && irreducible && rate_bound_ok;
        if (!gauge_present) return base;
        return base && gauge_growth_ok && gauge_ratio_ok && dissipation != Dissipation::Fail;
    }
};

inline ValidationReport validate(const ModelSpec& m, ValidateOptions opt = {}) {
    ValidationReport rep;
    Philox rng(opt.seed, 7);

    // probe set: a handful of bulk points plus four shells of random directions
    std::vector<Vec> bulk;
    for (int t = 0; t < 16; ++t) {
        Vec x(m.n);
        for (int i = 0; i < m.n; ++i) x[i] = 2.0 * rng.u01();
        bulk.push_back(x);
    }
    rep.shell_radii = {opt.shell_radius, 2 * opt.shell_radius, 4 * opt.shell_radius, 8 * opt.shell_radius};
    std::vector<std::vector<Vec>> shells(rep.shell_radii.size());
    for (std::size_t s = 0; s < rep.shell_radii.size(); ++s) {
        double R = rep.shell_radii[s];
        for (int d = 0; d < opt.dirs_per_shell; ++d) {
            Vec u(m.n);
            double tot = 0.0;
            for (int i = 0; i < m.n; ++i) { u[i] = rng.exponential(1.0); tot += u[i]; }
            for (int i = 0; i < m.n; ++i) u[i] *= R / tot;
            shells[s].push_back(u);
        }
        for (int i = 0; i < m.n; ++i) {
            Vec e(m.n, 0.0);
            e[i] = R;
            shells[s].push_back(e);
        }
        if (m.n == 0) shells[s].push_back(Vec{});
    }

    std::vector<Vec> all = bulk;
    for (auto& sh : shells) all.insert(all.end(), sh.begin(), sh.end());

    // rate checks and irreducibility (edge must be present at every probe)
    Mat qmin(m.n0, Vec(m.n0, kInf));
    for (const Vec& x : all) {
        Mat Q;
        try {
            Q = rate_matrix(m, x);
        } catch (const ModelError&) {
            rep.offdiag_nonneg = false;
            continue;
        }
        for (int i = 0; i < m.n0; ++i) {
            double s = 0.0, exit = 0.0;
            for (int j = 0; j < m.n0; ++j) {
                s += Q[i][j];
                if (i != j) {
                    exit += Q[i][j];
                    if (Q[i][j] < 0.0) rep.offdiag_nonneg = false;
                    qmin[i][j] = std::min(qmin[i][j], Q[i][j]);
                }
            }
            rep.rate_row_sum_max = std::max(rep.rate_row_sum_max, std::abs(s));
            rep.rate_max_seen = std::max(rep.rate_max_seen, exit);
        }
    }
    if (m.switching.kind == SwitchLaw::Kind::StateDependent) {
        if (m.switching.rate_bound <= 0.0) {
            rep.rate_bound_ok = false;
            rep.warnings.push_back("state-dependent switching needs a positive rate_bound");
        } else if (rep.rate_max_seen > m.switching.rate_bound * (1 + 1e-12)) {
            rep.rate_bound_ok = false;
            rep.warnings.push_back("observed exit rate exceeds the declared bound");
        }
    }
    {
        // strong connectivity of the switching graph, conservative edges qmin > 0
        std::vector<std::vector<int>> reach(m.n0, std::vector<int>(m.n0, 0));
        for (int i = 0; i < m.n0; ++i) reach[i][i] = 1;
        for (int i = 0; i < m.n0; ++i)
            for (int j = 0; j < m.n0; ++j)
                if (i != j && qmin[i][j] > 1e-14) reach[i][j] = 1;
        for (int k = 0; k < m.n0; ++k)
            for (int i = 0; i < m.n0; ++i)
                for (int j = 0; j < m.n0; ++j)
                    if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
        for (int i = 0; i < m.n0 && rep.irreducible; ++i)
            for (int j = 0; j < m.n0; ++j)
                if (!reach[i][j]) { rep.irreducible = false; break; }
    }

    if (!m.gauge) {
        rep.warnings.push_back("no gauge attached; tightness probes skipped");
        return rep;
    }
    rep.gauge_present = true;
    const GaugeFunction& g = *m.gauge;
    double d0 = opt.delta0 >= 0 ? opt.delta0 : g.delta0;
    rep.gauge_ratio_max = g.ratio_bound();
    rep.gauge_ratio_ok = std::isfinite(rep.gauge_ratio_max);

    double growth_min = kInf;
    for (const Vec& x : all)
        for (int k = 0; k < m.n0; ++k)
            growth_min = std::min(growth_min, g.value(x, k) / std::pow(1.0 + norm2(x), g.exponent));
    rep.gauge_growth_const = growth_min;
    rep.gauge_growth_ok = growth_min > 0.0;

    rep.dissipation_shell_max.assign(rep.shell_radii.size(), -kInf);
    Vec fvals(m.n);
    for (std::size_t s = 0; s < shells.size(); ++s) {
        for (const Vec& x : shells[s]) {
            for (int k = 0; k < m.n0; ++k) {
                for (int i = 0; i < m.n; ++i) fvals[i] = m.fitness_value(x, k, i);
                double Fk = g.value(x, k);
                double gen = g.flow_term(x, k, fvals);
                for (int l = 0; l < m.n0; ++l)
                    if (l != k) gen += m.switching.entry(x, k, l) * (g.value(x, l) - Fk);
                double fmax = 0.0;
                for (int i = 0; i < m.n; ++i) fmax = std::max(fmax, std::abs(fvals[i]));
                double E = gen / Fk + d0 * fmax;
                rep.dissipation_shell_max[s] = std::max(rep.dissipation_shell_max[s], E);
            }
        }
    }
    std::size_t last = rep.dissipation_shell_max.size() - 1;
    double outer = rep.dissipation_shell_max[last];
    double prev = rep.dissipation_shell_max[last - 1];
    if (outer < 0.0 && outer <= prev)
        rep.dissipation = ValidationReport::Dissipation::Pass;
    else if (outer >= 0.0 && outer >= prev)
        rep.dissipation = ValidationReport::Dissipation::Fail;
    else
        rep.dissipation = ValidationReport::Dissipation::Unknown;
    return rep;
}

}  // namespace pdmp
