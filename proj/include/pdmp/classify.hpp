// Persistence/extinction classification: enumerate the boundary ergodic
// measures of a model face by face, tabulate every species' invasion rate
// against each of them, search for min-max persistence weights, and when the
// weights fail, scan for faces whose sign pattern makes them transversal
// attractors. The verdict carries the qualitative probability labels the
// asymptotic theory supports, never numeric extinction probabilities.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pdmp/analytic.hpp"
#include "pdmp/geometry.hpp"

namespace pdmp {

struct MethodConfig {
    SimConfig sim;                // budget for Monte Carlo measure representations
    double burn_frac = 0.1;       // fraction of each run discarded before averaging
    double sign_se_factor = 3.0;  // |value| <= factor * se leaves a sign unresolved
    int minmax_grid = 200;        // simplex grid resolution for up to three species
    int refine_rounds = 3;        // local refinement passes around the best cell
    int bracket_depth = 3;        // Lie bracket recursion depth for the certificate
    std::vector<std::vector<int>> lattice;  // boundary faces to examine (Custom only)
};

// one boundary (or interior) ergodic measure with its full rate column
struct TableRow {
    std::vector<int> I;       // resident species of the face, increasing
    bool interior = false;    // row is the full-dimensional invariant measure
    bool has_rep = true;      // false when existence is certified without a usable form
    std::string form;         // point-mass | density | means | monte-carlo | existence-only
    BoundaryMeasureRep rep;   // valid when has_rep
    Vec lambda;               // invasion rate of every species against this measure
    Vec se;                   // standard errors, zero on exact routes
    std::vector<std::string> method;  // per-species evaluation route
    std::vector<char> resident;
    std::vector<char> unresolved;  // Monte Carlo sign inside the error band
    std::vector<std::string> warnings;
    std::shared_ptr<ClosedFormDensity> density_store;
    std::shared_ptr<Trajectory> traj_store;
};

struct InvasionTable {
    int n = 0;
    std::uint64_t model_fp = 0;
    std::vector<TableRow> rows;              // existing measures, smallest faces first
    std::vector<std::vector<int>> rejected;  // faces examined and found empty

    bool any_unresolved() const {
        for (const TableRow& r : rows)
            for (char u : r.unresolved)
                if (u) return true;
        return false;
    }
};

struct MinMaxResult {
    Vec p;
    double rho = 0.0;
};

namespace detail {

// maximize  min_rows <p, lambda>  over the open unit simplex. Exhaustive grid
// first (every composition of `grid` into d positive parts), then a shrinking
// local grid around the winner. d above three would make the full grid heavy,
// so it backs off to a coarser initial pass; refinement recovers the accuracy.
inline MinMaxResult minmax_search(const std::vector<Vec>& rows, int d, int grid, int rounds) {
    if (rows.empty()) throw ModelError("min-max search needs at least one row");
    auto objective = [&](const Vec& p) {
        double worst = kInf;
        for (const Vec& lam : rows) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += p[i] * lam[i];
            worst = std::min(worst, s);
        }
        return worst;
    };
    MinMaxResult best;
    best.p.assign(d, 1.0 / d);
    best.rho = objective(best.p);
    if (d == 1) {
        best.p = {1.0};
        best.rho = objective(best.p);
        return best;
    }
    if (d > 3) grid = std::min(grid, 40);

    Vec p(d, 0.0);
    std::vector<int> c(d, 1);
    // enumerate compositions c_0 + ... + c_{d-1} = grid with c_i >= 1
    std::function<void(int, int)> walk = [&](int pos, int left) {
        if (pos == d - 1) {
            c[pos] = left;
            for (int i = 0; i < d; ++i) p[i] = (double)c[i] / grid;
            double v = objective(p);
            if (v > best.rho) {
                best.rho = v;
                best.p = p;
            }
            return;
        }
        for (int k = 1; left - k >= d - 1 - pos; ++k) {
            c[pos] = k;
            walk(pos + 1, left - k);
        }
    };
    walk(0, grid);

    double step = 1.0 / grid;
    for (int r = 0; r < rounds; ++r) {
        step /= 5.0;
        Vec center = best.p;
        std::vector<int> off(d - 1, -4);
        for (;;) {
            double sum = 0.0;
            bool ok = true;
            for (int i = 0; i < d - 1 && ok; ++i) {
                p[i] = center[i] + off[i] * step;
                if (p[i] < 1e-9) ok = false;
                sum += p[i];
            }
            if (ok) {
                p[d - 1] = 1.0 - sum;
                if (p[d - 1] >= 1e-9) {
                    double v = objective(p);
                    if (v > best.rho) {
                        best.rho = v;
                        best.p = p;
                    }
                }
            }
            int i = 0;
            while (i < d - 1 && ++off[i] > 4) off[i++] = -4;
            if (i == d - 1) break;
        }
    }
    return best;
}

inline std::string face_name(const std::vector<int>& I) {
    if (I.empty()) return "origin";
    std::string s = "mu{";
    for (std::size_t t = 0; t < I.size(); ++t) {
        if (t) s += ",";
        s += std::to_string(I[t] + 1);
    }
    s += "}";
    return s;
}

inline bool strict_subset(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() >= b.size()) return false;
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline std::uint64_t face_stream(const std::vector<int>& I) {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (int i : I) h = (h ^ (std::uint64_t)(i + 1)) * 0xbf58476d1ce4e5b9ull;
    return h;
}

// switch weights seen when every species is extinct
inline Vec origin_switch(const ModelSpec& m) {
    if (m.switching.kind == SwitchLaw::Kind::ConstantMatrix)
        return stationary_switch(m.switching);
    return stationary_switch(rate_matrix(m, Vec(m.n, 0.0)));
}

// attach the one-dimensional closed form for an axis face, when one exists
inline bool axis_density(const ModelSpec& m, int axis, TableRow& row) {
    std::optional<AxisClosedForm> cf = axis_closed_form(m, axis);
    if (!cf) return false;
    row.density_store = std::make_shared<ClosedFormDensity>(std::move(cf->density));
    row.rep.env_map = std::move(cf->env_map);
    row.rep.form = BoundaryMeasureRep::Form::Density;
    row.rep.density = row.density_store.get();
    // equal fixed points collapse the pair density to a point mass; tag the
    // row by what the measure actually is
    row.form = row.density_store->kind == ClosedFormDensity::Kind::PointMass ? "point-mass"
                                                                             : "density";
    return true;
}

}  // namespace detail

// min-max persistence weights over the boundary rows of the table: positive
// weights p with  min_mu sum_i p_i lambda_i(mu) = rho > 0  certify that every
// boundary measure repels the process. Returns nothing when no cell of the
// simplex grid achieves a positive margin.
inline std::optional<MinMaxResult> minmax_weights(const InvasionTable& table) {
    std::vector<Vec> rows;
    for (const TableRow& r : table.rows) {
        if (r.interior) continue;
        for (int j = 0; j < table.n; ++j)
            if (r.unresolved[j])
                throw ModelError("table has sign-unresolved entries; raise the simulation budget");
        rows.push_back(r.lambda);
    }
    if (rows.empty()) return std::nullopt;
    MinMaxResult best = detail::minmax_search(rows, table.n, 200, 3);
    if (!(best.rho > 0.0)) return std::nullopt;
    return best;
}

// Assemble the invasion-rate table bottom-up. A face carries an ergodic
// measure in its interior exactly when the measures on its own boundary can
// be repelled with positive weights (the restricted min-max criterion); the
// literal all-rates-positive reading would wrongly reject resource-consumer
// faces, where the consumer always starves at the origin. Each existing face
// gets the best exact representation available, Monte Carlo as a last
// resort, and every species' rate against it.
inline InvasionTable invasion_table(const ModelSpec& m, const MethodConfig& cfg) {
    InvasionTable table;
    table.n = m.n;
    table.model_fp = m.fingerprint();

    // candidate faces, smallest first; built-in families use the full lattice
    std::vector<std::vector<int>> faces;
    if (m.family == Family::Custom) {
        if (cfg.lattice.empty())
            throw ModelError("custom models must declare their boundary face lattice");
        faces = cfg.lattice;
        for (auto& f : faces) {
            std::sort(f.begin(), f.end());
            f.erase(std::unique(f.begin(), f.end()), f.end());
            for (int i : f)
                if (i < 0 || i >= m.n) throw ModelError("lattice face index out of range");
        }
    } else {
        for (std::uint32_t mask = 1; mask + 1 < (1u << m.n); ++mask) {
            std::vector<int> f;
            for (int i = 0; i < m.n; ++i)
                if (mask & (1u << i)) f.push_back(i);
            faces.push_back(std::move(f));
        }
    }
    std::vector<int> full(m.n);
    for (int i = 0; i < m.n; ++i) full[i] = i;
    faces.push_back(full);
    std::sort(faces.begin(), faces.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    faces.erase(std::unique(faces.begin(), faces.end()), faces.end());

    // the rate columns are needed as soon as a row exists: faces one level up
    // decide their own existence from them
    auto fill_columns = [&](TableRow& row) {
        row.lambda.assign(m.n, 0.0);
        row.se.assign(m.n, 0.0);
        row.method.assign(m.n, "resident");
        row.resident.assign(m.n, 0);
        row.unresolved.assign(m.n, 0);
        for (int i : row.I) row.resident[i] = 1;
        if (!row.has_rep) return;
        for (int j = 0; j < m.n; ++j) {
            LambdaEstimate le = boundary_lambda(m, row.rep, j, &cfg.sim);
            row.lambda[j] = le.value;
            row.se[j] = le.se;
            row.method[j] = le.method;
            for (std::string& w : le.warnings) row.warnings.push_back(std::move(w));
            if (!row.resident[j] && le.method == "monte-carlo" &&
                std::abs(le.value) <= cfg.sign_se_factor * le.se)
                row.unresolved[j] = 1;
        }
    };

    // the origin measure always exists: the environment chain alone is ergodic
    {
        TableRow row;
        row.I = {};
        row.form = "point-mass";
        row.rep.I = {};
        row.rep.form = BoundaryMeasureRep::Form::PointMass;
        row.rep.point = {};
        row.rep.nu = detail::origin_switch(m);
        fill_columns(row);
        table.rows.push_back(std::move(row));
    }

    auto project = [&](const Vec& lam, const std::vector<int>& I) {
        Vec v(I.size());
        for (std::size_t t = 0; t < I.size(); ++t) v[t] = lam[I[t]];
        return v;
    };

    // process faces one size class at a time: existence only ever looks at
    // strictly smaller faces, so the members of a class are independent and
    // their Monte Carlo runs (the only expensive representations) can go in
    // parallel on their own random substreams
    std::size_t pos = 0;
    while (pos < faces.size()) {
        std::size_t end = pos;
        while (end < faces.size() && faces[end].size() == faces[pos].size()) ++end;

        std::vector<TableRow> batch;
        std::vector<std::future<Trajectory>> pending;  // parallel to batch, may hold empties
        for (std::size_t f = pos; f < end; ++f) {
            const std::vector<int>& I = faces[f];
            if (I.empty()) continue;
            const bool is_full = (int)I.size() == m.n;

            std::vector<Vec> sub;
            for (const TableRow& r : table.rows)
                if (detail::strict_subset(r.I, I)) sub.push_back(project(r.lambda, I));
            MinMaxResult mm = detail::minmax_search(sub, (int)I.size(), cfg.minmax_grid,
                                                    cfg.refine_rounds);
            if (!(mm.rho > 0.0)) {
                table.rejected.push_back(I);
                continue;
            }

            TableRow row;
            row.I = I;
            row.interior = is_full;
            row.rep.I = I;
            bool represented = false;

            if (I.size() == 1) represented = detail::axis_density(m, I[0], row);
            if (!represented) {
                try {
                    Vec means = interior_means(m, I);
                    row.rep.form = BoundaryMeasureRep::Form::Means;
                    row.rep.means = std::move(means);
                    row.form = "means";
                    represented = true;
                } catch (const ModelError&) {
                } catch (const NumericError&) {
                }
            }
            std::future<Trajectory> fut;
            if (!represented && !is_full) {
                ModelSpec sub_model = restrict_model(m, I);
                SimConfig sc = cfg.sim;
                sc.stream ^= detail::face_stream(I);
                fut = std::async(std::launch::async,
                                 [sub_model = std::move(sub_model), sc, d = (int)I.size()] {
                                     return simulate(sub_model, Vec(d, 1.0), 0, sc);
                                 });
                row.rep.form = BoundaryMeasureRep::Form::MonteCarlo;
                row.rep.burn_in = cfg.burn_frac * sc.t_max;
                row.form = "monte-carlo";
                represented = true;
            }
            if (!represented) {
                // interior measure certified by the recursion but carrying no
                // exact representation; its own rates vanish by definition
                row.has_rep = false;
                row.form = "existence-only";
            }
            batch.push_back(std::move(row));
            pending.push_back(std::move(fut));
        }
        for (std::size_t b = 0; b < batch.size(); ++b) {
            TableRow& row = batch[b];
            if (pending[b].valid()) {
                row.traj_store = std::make_shared<Trajectory>(pending[b].get());
                row.rep.traj = row.traj_store.get();
            }
            fill_columns(row);
            table.rows.push_back(std::move(row));
        }
        pos = end;
    }
    return table;
}

enum class Outcome { PersistAll, Extinction, Inconclusive };

struct AttractorInfo {
    std::vector<int> I;
    std::string probability;             // "positive" or "one"
    bool local_attraction = true;        // exponential approach near the face
    bool accessibility_assumed = false;  // the qualitative theorems need the face reachable
};

struct Verdict {
    Outcome outcome = Outcome::Inconclusive;
    InvasionTable table;
    Vec weights;  // min-max p when persistence is certified
    double rho = 0.0;
    bool unique_measure = false;  // bracket certificate at the probe point
    int bracket_rank = 0;
    Vec bracket_point;
    std::vector<AttractorInfo> attractors;
    bool exhaustive = false;  // the attractor faces capture every limit jointly
    std::vector<std::string> qualifiers;
    std::vector<std::string> unresolved;  // entries whose signs blocked a decision
};

inline const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::PersistAll: return "persist_all";
        case Outcome::Extinction: return "extinction";
        case Outcome::Inconclusive: return "inconclusive";
    }
    return "?";
}

// Decide the long-run fate of the community. Positive min-max weights mean
// the whole boundary repels: every species persists, and a full bracket span
// upgrades that to convergence to a unique interior measure. Otherwise faces
// whose exterior rates are all negative are transversal attractors; the
// process converges to one of them with the stated qualitative probability.
inline Verdict classify(const ModelSpec& m, const MethodConfig& cfg) {
    Verdict v;
    v.table = invasion_table(m, cfg);

    for (const TableRow& r : v.table.rows)
        for (int j = 0; j < v.table.n; ++j)
            if (r.unresolved[j]) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "%s lambda_%d = %.6g +- %.2g (within %.0f se of 0)",
                              detail::face_name(r.I).c_str(), j + 1, r.lambda[j], r.se[j],
                              cfg.sign_se_factor);
                v.unresolved.push_back(buf);
            }
    if (!v.unresolved.empty()) {
        v.outcome = Outcome::Inconclusive;
        v.qualifiers.push_back("raise the simulation budget to resolve the flagged signs");
        return v;
    }

    if (auto mm = minmax_weights(v.table)) {
        v.outcome = Outcome::PersistAll;
        v.weights = mm->p;
        v.rho = mm->rho;
        Vec x0;
        try {
            std::vector<int> full(m.n);
            for (int i = 0; i < m.n; ++i) full[i] = i;
            x0 = interior_means(m, full);
        } catch (const ModelError&) {
            x0.assign(m.n, 1.0);
        } catch (const NumericError&) {
            x0.assign(m.n, 1.0);
        }
        BracketBasis bb = bracket_span_rank(m, x0, cfg.bracket_depth);
        v.bracket_rank = bb.rank;
        v.bracket_point = x0;
        v.unique_measure = bb.spans();
        if (v.unique_measure)
            v.qualifiers.push_back(
                "bracket span certified at a representative interior point, taken to lie in the "
                "support of the invariant measure");
        else
            v.qualifiers.push_back(
                "bracket condition not certified at the probe point; uniqueness of the interior "
                "measure was not established");
        return v;
    }

    // transversal attractors: existing faces whose exterior rates are all
    // negative. Their own boundary is repelled by construction (that is what
    // existence meant), which is the second half of the attractor condition.
    std::vector<const TableRow*> in_s, out_s;
    for (const TableRow& r : v.table.rows) {
        if (r.interior) continue;
        bool all_neg = true;
        for (int j = 0; j < v.table.n && all_neg; ++j)
            if (!r.resident[j] && !(r.lambda[j] < 0.0)) all_neg = false;
        if (all_neg) {
            AttractorInfo at;
            at.I = r.I;
            at.local_attraction = true;
            at.accessibility_assumed = !r.I.empty();
            v.attractors.push_back(std::move(at));
            in_s.push_back(&r);
        } else {
            out_s.push_back(&r);
        }
    }
    if (v.attractors.empty()) {
        v.outcome = Outcome::Inconclusive;
        v.qualifiers.push_back(
            "no persistence certificate and no transversal attractor; the sign pattern is outside "
            "the decidable cases");
        return v;
    }

    v.outcome = Outcome::Extinction;
    if (out_s.empty()) {
        v.exhaustive = true;
    } else {
        std::vector<Vec> rows;
        for (const TableRow* r : out_s) rows.push_back(r->lambda);
        MinMaxResult mm = detail::minmax_search(rows, v.table.n, cfg.minmax_grid,
                                                cfg.refine_rounds);
        v.exhaustive = mm.rho > 0.0;
    }
    for (AttractorInfo& at : v.attractors)
        at.probability = (v.exhaustive && v.attractors.size() == 1) ? "one" : "positive";
    if (v.exhaustive) {
        if (m.n >= 2)
            v.qualifiers.push_back(
                "probability-one coverage assumes no ergodic measure in the interior and that the "
                "attractor faces are accessible");
    } else {
        v.qualifiers.push_back(
            "attractor family may not capture every limit: some non-attractor boundary measures "
            "are not uniformly invadable");
    }
    return v;
}

// JSON view of the table rows and the rejected faces, shared by the
// standalone invasion report and the full verdict document
inline nlohmann::json table_json(const InvasionTable& t) {
    auto species_array = [](const std::vector<int>& I) {
        nlohmann::json a = nlohmann::json::array();
        for (int i : I) a.push_back(i + 1);
        return a;
    };
    nlohmann::json j;
    char fp[32];
    std::snprintf(fp, sizeof fp, "%016llx", (unsigned long long)t.model_fp);
    j["fingerprint"] = fp;
    j["table"] = nlohmann::json::array();
    for (const TableRow& r : t.rows) {
        nlohmann::json row;
        row["species"] = species_array(r.I);
        row["interior"] = r.interior;
        row["form"] = r.form;
        row["lambda"] = r.lambda;
        row["se"] = r.se;
        row["method"] = r.method;
        nlohmann::json un = nlohmann::json::array();
        for (int jj = 0; jj < t.n; ++jj)
            if (r.unresolved[jj]) un.push_back(jj + 1);
        row["unresolved"] = un;
        if (!r.warnings.empty()) row["warnings"] = r.warnings;
        j["table"].push_back(std::move(row));
    }
    j["rejected"] = nlohmann::json::array();
    for (const auto& f : t.rejected) j["rejected"].push_back(species_array(f));
    return j;
}

inline std::string verdict_json(const ModelSpec& m, const Verdict& v) {
    nlohmann::json j = table_json(v.table);
    char fp[32];
    std::snprintf(fp, sizeof fp, "%016llx", (unsigned long long)v.table.model_fp);
    j.erase("fingerprint");
    j["model"] = {{"family", family_name(m.family)},
                  {"n", m.n},
                  {"n_env", m.n0},
                  {"fingerprint", fp}};
    j["outcome"] = outcome_name(v.outcome);
    if (!v.weights.empty()) j["minmax"] = {{"p", v.weights}, {"rho", v.rho}};
    j["unique_measure"] = v.unique_measure;
    if (v.outcome == Outcome::PersistAll)
        j["bracket"] = {{"rank", v.bracket_rank}, {"dimension", m.n}, {"point", v.bracket_point}};

    auto species_array = [](const std::vector<int>& I) {
        nlohmann::json a = nlohmann::json::array();
        for (int i : I) a.push_back(i + 1);
        return a;
    };
    j["attractors"] = nlohmann::json::array();
    for (const AttractorInfo& at : v.attractors) {
        j["attractors"].push_back({{"species", species_array(at.I)},
                                   {"probability", at.probability},
                                   {"local_attraction", at.local_attraction},
                                   {"accessibility_assumed", at.accessibility_assumed}});
    }
    if (v.outcome == Outcome::Extinction) j["exhaustive"] = v.exhaustive;
    j["qualifiers"] = v.qualifiers;
    if (!v.unresolved.empty()) j["unresolved"] = v.unresolved;
    return j.dump(2);
}

}  // namespace pdmp
