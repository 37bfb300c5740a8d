#pragma once
// Command-line front door. Every command resolves its options up front,
// stores them (plus the raw model text) in a manifest next to its outputs,
// and the replay command re-executes a manifest through the same code path,
// so series files reproduce byte for byte.
//
// Exit codes: 0 success, 2 parse/validation error, 3 numerical failure,
// 4 inconclusive classification.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdmp/analytic.hpp"
#include "pdmp/classify.hpp"
#include "pdmp/common.hpp"
#include "pdmp/config.hpp"
#include "pdmp/families.hpp"
#include "pdmp/geometry.hpp"
#include "pdmp/model.hpp"
#include "pdmp/simulate.hpp"
#include "pdmp/svg.hpp"

namespace pdmp::cli {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// figure presets

struct FigurePreset {
    std::string name;
    ModelSpec model;
    Vec x0;
    int k0 = 0;
    double t_max = 0.0, record_dt = 0.1;
    int replicates = 1;
    bool shade_env = false;  // shade spells spent in environment 2
    bool log_scale = false;  // plot log10 X instead of X
    int draw_points = 1200;  // per-path polyline budget for csv/svg
};

inline const FigurePreset& figure_preset(const std::string& name) {
    static const std::vector<FigurePreset> presets = [] {
        std::vector<FigurePreset> v;
        FigurePreset f;
        f.name = "fig1";
        f.model = make_single1d(0.5, 1.0, 0.05, 2.0, 2.0);
        f.x0 = {1.0};
        f.t_max = 100.0;
        f.record_dt = 0.05;
        f.shade_env = true;
        v.push_back(f);

        f = FigurePreset{};
        f.name = "fig2a";
        f.model = make_single1d(0.5, -0.505, 0.05, 2.0, 2.0);
        f.x0 = {1.0};
        f.t_max = 5000.0;
        f.record_dt = 0.5;
        f.shade_env = true;
        f.log_scale = true;
        v.push_back(f);

        f.name = "fig2b";
        f.model = make_single1d(0.5, 0.45, 0.05, 2.0, 2.0);
        v.push_back(f);

        f = FigurePreset{};
        f.name = "fig3a";
        f.model = make_expl2d(1.0, 1.0, 0.75, 0.05, 0.5, 4.0, 0.25, 0.025, 2.0, 2.0);
        f.x0 = {1.0, 1.0};
        f.t_max = 5000.0;
        f.record_dt = 5.0;
        f.replicates = 100;
        f.draw_points = 600;
        v.push_back(f);

        f.name = "fig3b";
        f.model = make_expl2d(0.95, 80.0 / 9.0, 8.0, 7.5, 1.0, 10.0, 8.0, 10.0, 2.0, 2.0);
        f.x0 = {50.0, 100.0};
        v.push_back(f);
        return v;
    }();
    for (const FigurePreset& p : presets)
        if (p.name == name) return p;
    throw ParseError("unknown figure '" + name + "' (figures: fig1, fig2a, fig2b, fig3a, fig3b)");
}

// ---------------------------------------------------------------------------
// output writers

namespace io_detail {

inline std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw ParseError("cannot open model file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out.good()) throw ParseError("cannot write output file: " + p.string());
    out << text;
}

inline std::string trajectory_csv(const Trajectory& tr) {
    std::string s = "t";
    for (int i = 0; i < tr.n; ++i) s += ",x" + std::to_string(i + 1);
    s += ",k\n";
    for (std::size_t r = 0; r < tr.size(); ++r) {
        s += num17(tr.ts[r]);
        for (int i = 0; i < tr.n; ++i) s += "," + num17(tr.x(r, i));
        s += "," + std::to_string(tr.ks[r] + 1) + "\n";
    }
    return s;
}

inline std::string jumps_csv(const Trajectory& tr) {
    std::string s = "t,from,to";
    for (int i = 0; i < tr.n; ++i) s += ",x" + std::to_string(i + 1);
    s += "\n";
    for (const JumpEvent& j : tr.jumps) {
        s += num17(j.t) + "," + std::to_string(j.from + 1) + "," + std::to_string(j.to + 1);
        for (int i = 0; i < tr.n; ++i) s += "," + num17(j.x[i]);
        s += "\n";
    }
    return s;
}

inline std::string finals_csv(const std::vector<Trajectory>& trs) {
    int n = trs.empty() ? 0 : trs[0].n;
    std::string s = "replicate,t";
    for (int i = 0; i < n; ++i) s += ",x" + std::to_string(i + 1);
    s += ",k\n";
    for (std::size_t r = 0; r < trs.size(); ++r) {
        const Trajectory& tr = trs[r];
        std::size_t last = tr.size() - 1;
        s += std::to_string(r + 1) + "," + num17(tr.ts[last]);
        for (int i = 0; i < n; ++i) s += "," + num17(tr.x(last, i));
        s += "," + std::to_string(tr.ks[last] + 1) + "\n";
    }
    return s;
}

// evenly strided sample subset, always keeping the final state
inline std::vector<std::size_t> draw_indices(std::size_t total, std::size_t target) {
    std::vector<std::size_t> idx;
    if (total == 0) return idx;
    std::size_t stride = std::max<std::size_t>(1, total / std::max<std::size_t>(1, target));
    for (std::size_t s = 0; s < total; s += stride) idx.push_back(s);
    if (idx.back() != total - 1) idx.push_back(total - 1);
    return idx;
}

// spells spent in one environment, as vertical shading bands
inline std::vector<svg::Band> env_bands(const Trajectory& tr, int env_index) {
    std::vector<svg::Band> bands;
    if (tr.ts.empty()) return bands;
    int k = tr.ks.front();
    double start = tr.ts.front();
    for (const JumpEvent& j : tr.jumps) {
        if (k == env_index) bands.push_back({start, j.t});
        k = j.to;
        start = j.t;
    }
    if (k == env_index) bands.push_back({start, tr.t_max});
    return bands;
}

inline Vec parse_point(const std::string& text, const std::string& flag) {
    Vec out;
    std::string piece;
    std::istringstream in(text);
    while (std::getline(in, piece, ',')) {
        std::istringstream ps(piece);
        std::string tok;
        while (ps >> tok) {
            char* end = nullptr;
            double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0' || !std::isfinite(v))
                throw ParseError(flag + ": expected comma-separated numbers, got '" + text +
                                 "'");
            out.push_back(v);
        }
    }
    if (out.empty()) throw ParseError(flag + ": empty coordinate list");
    return out;
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// command runners. A RunContext is everything a command needs; the normal
// path and manifest replay both build one and go through dispatch().

struct RunContext {
    std::string command;
    std::string model_text;  // raw text, embedded in the manifest for replay
    nlohmann::json options;  // fully resolved, no implicit defaults left
    fs::path out_dir;
    std::ostream* out = nullptr;
};

struct RunResult {
    std::vector<std::string> outputs;
    int exit_code = 0;
};

namespace run_detail {

using io_detail::num17;
using io_detail::write_text;

inline SimConfig sim_config(const nlohmann::json& o) {
    SimConfig sc;
    sc.t_max = o.at("tmax").get<double>();
    if (o.contains("record_dt")) sc.record_dt = o.at("record_dt").get<double>();
    sc.seed = o.at("seed").get<std::uint64_t>();
    if (o.contains("stream")) sc.stream = o.at("stream").get<std::uint64_t>();
    if (o.contains("threads")) sc.threads = o.at("threads").get<int>();
    if (!(sc.t_max > 0.0)) throw ParseError("--tmax must be positive");
    return sc;
}

inline RunResult run_simulate(const RunContext& c) {
    ModelSpec m = parse_model_text(c.model_text);
    SimConfig sc = sim_config(c.options);
    Vec x0 = c.options.at("x0").get<Vec>();
    int k0 = c.options.at("env").get<int>() - 1;
    Trajectory tr = simulate(m, x0, k0, sc);
    write_text(c.out_dir / "trajectory.csv", io_detail::trajectory_csv(tr));
    write_text(c.out_dir / "jumps.csv", io_detail::jumps_csv(tr));
    *c.out << "trajectory.csv: " << tr.size() << " samples, " << tr.jumps.size()
           << " environment jumps over t <= " << num17(sc.t_max) << "\n";
    return {{"trajectory.csv", "jumps.csv"}, 0};
}

inline RunResult run_ensemble(const RunContext& c) {
    ModelSpec m = parse_model_text(c.model_text);
    SimConfig sc = sim_config(c.options);
    Vec x0 = c.options.at("x0").get<Vec>();
    int k0 = c.options.at("env").get<int>() - 1;
    int replicates = c.options.at("replicates").get<int>();
    std::vector<Trajectory> trs = simulate_ensemble(m, x0, k0, sc, replicates);
    write_text(c.out_dir / "finals.csv", io_detail::finals_csv(trs));
    Vec mean(m.n, 0.0);
    for (const Trajectory& tr : trs)
        for (int i = 0; i < m.n; ++i) mean[i] += tr.x(tr.size() - 1, i) / replicates;
    *c.out << "finals.csv: " << replicates << " replicates; mean final state (";
    for (int i = 0; i < m.n; ++i) *c.out << (i ? ", " : "") << mean[i];
    *c.out << ")\n";
    return {{"finals.csv"}, 0};
}

inline RunResult run_density(const RunContext& c) {
    ModelSpec m = parse_model_text(c.model_text);
    int species = c.options.at("species").get<int>();
    int points = c.options.at("points").get<int>();
    if (species < 1 || species > m.n)
        throw ParseError("--species must lie in 1.." + std::to_string(m.n));
    if (points < 2) throw ParseError("--points must be at least 2");
    std::optional<AxisClosedForm> cf = axis_closed_form(m, species - 1);
    if (!cf)
        throw ModelError("no closed form for the invariant density on axis " +
                         std::to_string(species) +
                         "; solvable axes need two constant-rate environments and fitness of "
                         "degree at most one");
    const ClosedFormDensity& d = cf->density;

    nlohmann::json j = nlohmann::json::parse(density_descriptor_json(d));
    j["species"] = species;
    j["mean"] = integrate_density(d, [](double s, int) { return s; }, 1);
    if (!cf->env_map.empty()) {
        nlohmann::json map = nlohmann::json::array();
        for (int k : cf->env_map) map.push_back(k + 1);
        j["env_map"] = map;  // density env slot -> model environment
    }
    write_text(c.out_dir / "density.json", j.dump(2) + "\n");

    // columns follow the model's environment order
    std::string csv = "x";
    for (int k = 0; k < m.n0; ++k) csv += ",h" + std::to_string(k + 1);
    csv += "\n";
    if (d.kind != ClosedFormDensity::Kind::PointMass) {
        double lo = d.lo;
        double hi = d.hi;
        if (!std::isfinite(hi)) {
            // the truncation bound is deliberately loose; bisect for a display
            // cutoff that still holds all but 1e-6 of the mass
            double a = lo, b = d.truncation;
            for (int it = 0; it < 60; ++it) {
                double mid = 0.5 * (a + b);
                (d.mass_between(lo, mid) < 1.0 - 1e-6 ? a : b) = mid;
            }
            hi = b;
        }
        for (int g = 0; g < points; ++g) {
            double x = lo + (g + 0.5) * (hi - lo) / points;
            csv += num17(x);
            for (int k = 0; k < m.n0; ++k) {
                int denv = k;
                if (!cf->env_map.empty())
                    denv = static_cast<int>(std::find(cf->env_map.begin(), cf->env_map.end(),
                                                      k) -
                                            cf->env_map.begin());
                csv += "," + num17(d.value(denv, x));
            }
            csv += "\n";
        }
    }
    write_text(c.out_dir / "density.csv", csv);
    *c.out << "density on axis " << species << ": kind " << j["kind"].get<std::string>()
           << ", masses (" << d.mass1 << ", " << d.mass2 << "), mean "
           << j["mean"].get<double>() << "\n";
    return {{"density.csv", "density.json"}, 0};
}

inline MethodConfig method_config(const RunContext& c, const std::vector<std::vector<int>>& lat) {
    MethodConfig cfg;
    cfg.sim.t_max = c.options.at("tmax").get<double>();
    cfg.sim.seed = c.options.at("seed").get<std::uint64_t>();
    if (c.options.contains("stream"))
        cfg.sim.stream = c.options.at("stream").get<std::uint64_t>();
    cfg.lattice = lat;
    if (!(cfg.sim.t_max > 0.0)) throw ParseError("--tmax must be positive");
    return cfg;
}

inline std::string invasion_csv(const InvasionTable& t) {
    std::string s = "face,species,lambda,se,method,resident,unresolved\n";
    for (const TableRow& r : t.rows) {
        if (r.form == "existence-only") continue;
        std::string face = r.interior ? "interior" : detail::face_name(r.I);
        for (int j = 0; j < t.n; ++j) {
            s += face + "," + std::to_string(j + 1) + "," + num17(r.lambda[j]) + "," +
                 num17(r.se[j]) + "," + r.method[j] + "," + (r.resident[j] ? "1" : "0") + "," +
                 (r.unresolved[j] ? "1" : "0") + "\n";
        }
    }
    return s;
}

inline RunResult run_invade(const RunContext& c) {
    std::vector<std::vector<int>> lat;
    ModelSpec m = parse_model_text(c.model_text, &lat);
    MethodConfig cfg = method_config(c, lat);
    InvasionTable t = invasion_table(m, cfg);
    nlohmann::json j = table_json(t);
    write_text(c.out_dir / "invasion.json", j.dump(2) + "\n");
    write_text(c.out_dir / "invasion.csv", invasion_csv(t));
    int unresolved = 0;
    for (const TableRow& r : t.rows)
        for (char u : r.unresolved) unresolved += u;
    *c.out << "invasion table: " << t.rows.size() << " measures, " << t.rejected.size()
           << " rejected faces, " << unresolved << " sign-unresolved entries\n";
    return {{"invasion.json", "invasion.csv"}, 0};
}

inline RunResult run_classify(const RunContext& c) {
    std::vector<std::vector<int>> lat;
    ModelSpec m = parse_model_text(c.model_text, &lat);
    MethodConfig cfg = method_config(c, lat);
    Verdict v = classify(m, cfg);
    write_text(c.out_dir / "verdict.json", verdict_json(m, v) + "\n");
    *c.out << "outcome: " << outcome_name(v.outcome);
    if (v.outcome == Outcome::PersistAll)
        *c.out << " (min-max margin rho = " << v.rho << ")";
    if (v.outcome == Outcome::Extinction) {
        *c.out << " toward";
        for (const AttractorInfo& a : v.attractors)
            *c.out << " " << (a.I.empty() ? std::string("origin") : detail::face_name(a.I));
    }
    *c.out << "\n";
    for (const std::string& q : v.qualifiers) *c.out << "note: " << q << "\n";
    for (const std::string& u : v.unresolved) *c.out << "unresolved: " << u << "\n";
    return {{"verdict.json"}, v.outcome == Outcome::Inconclusive ? 4 : 0};
}

inline RunResult run_brackets(const RunContext& c) {
    ModelSpec m = parse_model_text(c.model_text);
    Vec x = c.options.at("point").get<Vec>();
    int depth = c.options.at("depth").get<int>();
    std::string report = bracket_report_json(m, x, depth);
    write_text(c.out_dir / "brackets.json", report + "\n");
    nlohmann::json j = nlohmann::json::parse(report);
    *c.out << "bracket span rank " << j["rank"].get<int>() << " of " << m.n << " at (";
    for (std::size_t i = 0; i < x.size(); ++i) *c.out << (i ? ", " : "") << x[i];
    *c.out << ")" << (j["spans"].get<bool>() ? "; full span" : "; degenerate") << "\n";
    return {{"brackets.json"}, 0};
}

inline RunResult run_figure(const RunContext& c) {
    const FigurePreset& p = figure_preset(c.options.at("name").get<std::string>());
    SimConfig sc;
    sc.t_max = p.t_max;
    sc.record_dt = p.record_dt;
    sc.seed = c.options.at("seed").get<std::uint64_t>();
    if (c.options.contains("threads")) sc.threads = c.options.at("threads").get<int>();

    std::vector<Trajectory> trs;
    if (p.replicates == 1)
        trs.push_back(simulate(p.model, p.x0, p.k0, sc));
    else
        trs = simulate_ensemble(p.model, p.x0, p.k0, sc, p.replicates);

    // per-species rate against the extinct state, from the exact switch law
    Vec nu = detail::origin_switch(p.model);
    Vec zero(p.model.n, 0.0);
    *c.out << "lambda at the origin:";
    for (int i = 0; i < p.model.n; ++i) {
        double lam = 0.0;
        for (int k = 0; k < p.model.n0; ++k)
            lam += nu[k] * p.model.fitness_value(zero, k, i);
        char buf[32];
        std::snprintf(buf, sizeof buf, " %.6g", lam);
        *c.out << buf;
    }
    *c.out << "\n";

    std::string csv = "path,t";
    for (int i = 0; i < p.model.n; ++i) csv += ",x" + std::to_string(i + 1);
    csv += ",k\n";
    for (std::size_t r = 0; r < trs.size(); ++r) {
        const Trajectory& tr = trs[r];
        for (std::size_t s : io_detail::draw_indices(tr.size(), p.draw_points)) {
            csv += std::to_string(r + 1) + "," + num17(tr.ts[s]);
            for (int i = 0; i < p.model.n; ++i) csv += "," + num17(tr.x(s, i));
            csv += "," + std::to_string(tr.ks[s] + 1) + "\n";
        }
    }
    write_text(c.out_dir / (p.name + ".csv"), csv);

    std::vector<svg::Panel> panels(p.model.n);
    for (int i = 0; i < p.model.n; ++i) {
        svg::Panel& panel = panels[i];
        std::string var = p.model.n == 1 ? "X" : "X" + std::to_string(i + 1);
        panel.title = p.name + (p.replicates > 1
                                    ? " (" + std::to_string(p.replicates) + " paths)"
                                    : "");
        panel.xlabel = "t";
        panel.ylabel = p.log_scale ? "log10 " + var + "(t)" : var + "(t)";
        if (p.shade_env && p.replicates == 1) panel.bands = io_detail::env_bands(trs[0], 1);
        for (const Trajectory& tr : trs) {
            svg::Series s;
            if (p.replicates > 1) {
                s.width = 0.8;
                s.opacity = 0.25;
            }
            for (std::size_t idx : io_detail::draw_indices(tr.size(), p.draw_points)) {
                s.xs.push_back(tr.ts[idx]);
                s.ys.push_back(p.log_scale ? tr.lx(idx, i) / std::log(10.0) : tr.x(idx, i));
            }
            panel.series.push_back(std::move(s));
        }
    }
    std::ostringstream svg_text;
    svg::render(svg_text, panels);
    write_text(c.out_dir / (p.name + ".svg"), svg_text.str());
    return {{p.name + ".csv", p.name + ".svg"}, 0};
}

inline RunResult dispatch(const RunContext& c) {
    if (c.command == "simulate") return run_simulate(c);
    if (c.command == "ensemble") return run_ensemble(c);
    if (c.command == "density") return run_density(c);
    if (c.command == "invade") return run_invade(c);
    if (c.command == "classify") return run_classify(c);
    if (c.command == "brackets") return run_brackets(c);
    if (c.command == "figure") return run_figure(c);
    throw ParseError("unknown command '" + c.command + "' in manifest");
}

}  // namespace run_detail

// run a fully resolved context: execute, then record the manifest
inline int execute(const RunContext& c) {
    auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(c.out_dir);
    RunResult r = run_detail::dispatch(c);
    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    nlohmann::json man;
    man["command"] = c.command;
    man["version"] = PDMP_VERSION;
    man["model_text"] = c.model_text;
    man["options"] = c.options;
    man["outputs"] = r.outputs;
    man["wall_clock_s"] = wall;
    io_detail::write_text(c.out_dir / "manifest.json", man.dump(2) + "\n");
    return r.exit_code;
}

inline int cli_main(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"piecewise-deterministic population dynamics: simulation, invasion-rate "
                 "tables, invariant densities, and persistence classification"};
    app.name("pdmp");
    app.require_subcommand(1);

    std::string model_path, out_dir = ".", x0_text, point_text, fig_name, manifest_path;
    std::uint64_t seed = 0, stream = 0;
    double tmax = 0.0, record_dt = 0.1;
    int env = 1, replicates = 100, threads = 0, species = 1, points = 400, depth = 3;

    auto add_common = [&](CLI::App* cmd, double tmax_default) {
        cmd->add_option("--model", model_path, "model file")->required();
        cmd->add_option("--out", out_dir, "output directory (default .)");
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--stream", stream, "RNG stream");
        cmd->add_option("--tmax", tmax, "time horizon")->default_val(tmax_default);
        return cmd;
    };

    CLI::App* c_sim = add_common(app.add_subcommand("simulate", "integrate one sample path"),
                                 1000.0);
    c_sim->add_option("--record-dt", record_dt, "sampling interval");
    c_sim->add_option("--x0", x0_text, "initial state, comma separated (default all ones)");
    c_sim->add_option("--env", env, "initial environment, 1-based");

    CLI::App* c_ens = add_common(
        app.add_subcommand("ensemble", "integrate many replicates, keep final states"),
        1000.0);
    c_ens->add_option("--record-dt", record_dt, "sampling interval");
    c_ens->add_option("--x0", x0_text, "initial state, comma separated (default all ones)");
    c_ens->add_option("--env", env, "initial environment, 1-based");
    c_ens->add_option("--replicates", replicates, "number of paths");
    c_ens->add_option("--threads", threads, "worker threads (0 = hardware)");

    CLI::App* c_den = app.add_subcommand("density", "closed-form invariant density on an axis");
    c_den->add_option("--model", model_path, "model file")->required();
    c_den->add_option("--out", out_dir, "output directory (default .)");
    c_den->add_option("--species", species, "axis species, 1-based");
    c_den->add_option("--points", points, "grid points");

    CLI::App* c_inv = add_common(
        app.add_subcommand("invade", "invasion-rate table over the boundary measures"),
        1000.0);
    CLI::App* c_cls = add_common(
        app.add_subcommand("classify", "persistence / extinction verdict"), 1000.0);

    CLI::App* c_bra =
        app.add_subcommand("brackets", "Lie bracket span rank at a point");
    c_bra->add_option("--model", model_path, "model file")->required();
    c_bra->add_option("--out", out_dir, "output directory (default .)");
    c_bra->add_option("--point", point_text, "evaluation point, comma separated");
    c_bra->add_option("--depth", depth, "bracket depth");

    CLI::App* c_fig = app.add_subcommand("figure", "reproduce a captioned sample-path figure");
    c_fig->add_option("name", fig_name, "fig1, fig2a, fig2b, fig3a, fig3b")->required();
    c_fig->add_option("--out", out_dir, "output directory (default .)");
    c_fig->add_option("--seed", seed, "RNG seed");
    c_fig->add_option("--threads", threads, "worker threads (0 = hardware)");

    CLI::App* c_rep = app.add_subcommand("replay", "re-run a manifest byte for byte");
    c_rep->add_option("manifest", manifest_path, "manifest.json path")->required();
    std::string replay_out;
    c_rep->add_option("--out", replay_out, "output directory (default: the manifest's)");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        RunContext c;
        c.out = &out;
        c.out_dir = out_dir;

        if (c_rep->parsed()) {
            std::ifstream in(manifest_path, std::ios::binary);
            if (!in.good()) throw ParseError("cannot open manifest: " + manifest_path);
            nlohmann::json man;
            try {
                in >> man;
                c.command = man.at("command").get<std::string>();
                c.model_text = man.at("model_text").get<std::string>();
                c.options = man.at("options");
            } catch (const nlohmann::json::exception& je) {
                throw ParseError("manifest " + manifest_path + ": " + je.what());
            }
            c.out_dir = replay_out.empty() ? fs::path(manifest_path).parent_path()
                                           : fs::path(replay_out);
            if (c.out_dir.empty()) c.out_dir = ".";
            return execute(c);
        }

        CLI::App* sub = app.get_subcommands().at(0);
        c.command = sub->get_name();

        if (c_fig->parsed()) {
            const FigurePreset& p = figure_preset(fig_name);
            c.model_text = serialize_model(p.model);
            c.options = {{"name", p.name}, {"seed", seed}, {"threads", threads}};
            return execute(c);
        }

        c.model_text = io_detail::read_file(model_path);
        ModelSpec m = parse_model_text(c.model_text);  // early errors, and n for defaults

        if (c_sim->parsed() || c_ens->parsed()) {
            Vec x0 = x0_text.empty() ? Vec(m.n, 1.0)
                                     : io_detail::parse_point(x0_text, "--x0");
            if (static_cast<int>(x0.size()) != m.n)
                throw ParseError("--x0 needs " + std::to_string(m.n) + " coordinates");
            c.options = {{"tmax", tmax},     {"record_dt", record_dt}, {"x0", x0},
                         {"env", env},       {"seed", seed},           {"stream", stream}};
            if (env < 1 || env > m.n0)
                throw ParseError("--env must lie in 1.." + std::to_string(m.n0));
            if (c_ens->parsed()) {
                if (replicates < 1) throw ParseError("--replicates must be positive");
                c.options["replicates"] = replicates;
                c.options["threads"] = threads;
            }
        } else if (c_den->parsed()) {
            c.options = {{"species", species}, {"points", points}};
        } else if (c_inv->parsed() || c_cls->parsed()) {
            c.options = {{"tmax", tmax}, {"seed", seed}, {"stream", stream}};
        } else if (c_bra->parsed()) {
            Vec x = point_text.empty() ? Vec(m.n, 1.0)
                                       : io_detail::parse_point(point_text, "--point");
            if (static_cast<int>(x.size()) != m.n)
                throw ParseError("--point needs " + std::to_string(m.n) + " coordinates");
            c.options = {{"point", x}, {"depth", depth}};
        }
        return execute(c);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const IntegratorError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        // only reachable from replaying a hand-edited manifest; the normal
        // path builds its options itself
        err << "error: invalid manifest: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace pdmp::cli
