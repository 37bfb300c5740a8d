#pragma once
// Model files. A flat "key = value" block names a built-in family and its
// parameters; family=custom instead takes per-environment polynomial blocks
//
//   [env.1]
//   f1 = 2 - 1 x1 - 1 x2
//
// plus a [switch] section (entries q12, q21, ..., numeric or polynomial in
// x), an optional [gauge] section, and an optional [lattice] section naming
// the boundary faces that carry ergodic measures. '#' starts a comment.
// serialize_model writes the same format back; parse(serialize(m)) preserves
// the canonical text of m.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pdmp/common.hpp"
#include "pdmp/families.hpp"
#include "pdmp/model.hpp"
#include "pdmp/polynomial.hpp"

namespace pdmp {

namespace cfg_detail {

struct Entry {
    std::string key, value;
    int line = 0;
};

struct Section {
    std::string name;  // "" for the flat block
    int line = 0;
    std::vector<Entry> entries;
};

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] inline void fail(int line, const std::string& msg) {
    if (line > 0)
        throw ParseError("model file line " + std::to_string(line) + ": " + msg);
    throw ParseError("model file: " + msg);
}

inline std::vector<Section> scan(const std::string& text) {
    std::vector<Section> out;
    out.push_back({"", 0, {}});
    std::size_t cur = 0;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        std::size_t hash = s.find('#');
        if (hash != std::string::npos) s.erase(hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "unterminated section header '" + s + "'");
            std::string name = trim(s.substr(1, s.size() - 2));
            if (name.empty()) fail(line, "empty section header");
            out.push_back({name, line, {}});
            cur = out.size() - 1;
            continue;
        }
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + s + "'");
        Entry e{trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line};
        if (e.key.empty()) fail(line, "missing key before '='");
        if (e.value.empty()) fail(line, "missing value for key '" + e.key + "'");
        for (const Entry& prev : out[cur].entries)
            if (prev.key == e.key)
                fail(line, "duplicate key '" + e.key + "' (first on line " +
                               std::to_string(prev.line) + ")");
        out[cur].entries.push_back(std::move(e));
    }
    return out;
}

inline double number(const Entry& e) {
    const char* c = e.value.c_str();
    char* end = nullptr;
    double v = std::strtod(c, &end);
    if (end == c || *end != '\0' || !std::isfinite(v))
        fail(e.line, "key '" + e.key + "': expected a number, got '" + e.value + "'");
    return v;
}

inline int integer(const Entry& e, int lo, int hi) {
    double v = number(e);
    if (v != std::floor(v) || v < lo || v > hi)
        fail(e.line, "key '" + e.key + "': expected an integer in [" + std::to_string(lo) +
                         ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

inline std::vector<double> number_list(const Entry& e, std::size_t want) {
    std::vector<double> out;
    std::string piece;
    std::istringstream in(e.value);
    while (in >> piece) {
        if (!piece.empty() && piece.back() == ',') piece.pop_back();
        if (piece.empty()) continue;
        char* end = nullptr;
        double v = std::strtod(piece.c_str(), &end);
        if (end == piece.c_str() || *end != '\0' || !std::isfinite(v))
            fail(e.line, "key '" + e.key + "': expected numbers, got '" + piece + "'");
        out.push_back(v);
    }
    if (out.size() != want)
        fail(e.line, "key '" + e.key + "': expected " + std::to_string(want) + " values, got " +
                         std::to_string(out.size()));
    return out;
}

// evaluated key/value view of one section, with per-key line numbers
struct KeyMap {
    std::map<std::string, Entry> kv;
    std::string scope;

    const Entry* find(const std::string& k) const {
        auto it = kv.find(k);
        return it == kv.end() ? nullptr : &it->second;
    }
    const Entry& at(const std::string& k) const {
        const Entry* e = find(k);
        if (!e) throw ParseError("model file: missing required key '" + k + "'" + scope);
        return *e;
    }
};

inline KeyMap key_map(const Section& sec, const std::string& scope) {
    KeyMap m;
    m.scope = scope;
    for (const Entry& e : sec.entries) m.kv.emplace(e.key, e);
    return m;
}

inline void require_positive_rate(const KeyMap& km, const std::string& key) {
    if (const Entry* e = km.find(key)) {
        double v = number(*e);
        if (!(v > 0.0)) fail(e->line, key + " must be positive, got " + e->value);
    }
}

inline ModelSpec build_family(Family fam, const Section& flat) {
    KeyMap km = key_map(flat, " for family '" + std::string(family_name(fam)) + "'");
    km.kv.erase("family");

    std::vector<std::string> required = {"q12", "q21"};
    std::vector<std::string> optional;
    auto both = [&](const std::string& stem) {
        required.push_back(stem + "_1");
        required.push_back(stem + "_2");
    };
    int chain = 0;
    switch (fam) {
        case Family::Single1D:
            required.insert(required.end(), {"a1_1", "a1_2", "b1_2"});
            optional = {"beta"};
            break;
        case Family::LV2Comp:
        case Family::PredPrey:
            for (const char* s : {"a1", "b1", "c1", "a2", "b2", "c2"}) both(s);
            break;
        case Family::Expl2D:
            required.insert(required.end(),
                            {"a1_1", "a1_2", "b1_2", "c1_2", "a2_1", "a2_2", "b2_2", "c2_2"});
            optional = {"beta", "expo"};
            break;
        case Family::LV3Comp:
            for (const char* p : {"a", "b", "c", "d"})
                for (int i = 1; i <= 3; ++i) both(std::string(p) + std::to_string(i));
            break;
        case Family::FoodChain: {
            while (km.find("diag_" + std::to_string(chain + 1))) ++chain;
            if (chain < 2)
                throw ParseError(
                    "model file: family 'foodchain' needs diag_1..diag_n for a chain of n >= 2 "
                    "species");
            both("a10");
            for (int i = 1; i <= chain; ++i) required.push_back("diag_" + std::to_string(i));
            for (int i = 2; i <= chain; ++i) {
                required.push_back("death_" + std::to_string(i));
                required.push_back("gain_" + std::to_string(i));
            }
            for (int i = 1; i < chain; ++i) required.push_back("loss_" + std::to_string(i));
            break;
        }
        case Family::Custom:
            throw ParseError("model file: internal family dispatch error");
    }

    for (const auto& [key, entry] : km.kv) {
        bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                     std::find(optional.begin(), optional.end(), key) != optional.end();
        if (!known)
            fail(entry.line,
                 "unknown key '" + key + "' for family '" + family_name(fam) + "'");
        number(entry);  // every family parameter is numeric
    }
    require_positive_rate(km, "q12");
    require_positive_rate(km, "q21");
    for (const std::string& key : required) km.at(key);  // presence, with key context

    auto val = [&](const std::string& k) { return number(km.at(k)); };
    auto opt = [&](const std::string& k, double dflt) {
        const Entry* e = km.find(k);
        return e ? number(*e) : dflt;
    };
    auto pair = [&](const std::string& stem) {
        return std::array<double, 2>{val(stem + "_1"), val(stem + "_2")};
    };

    try {
        switch (fam) {
            case Family::Single1D:
                return make_single1d(val("a1_1"), val("a1_2"), val("b1_2"), val("q12"),
                                     val("q21"), opt("beta", 0.5));
            case Family::LV2Comp:
                return make_lv2comp(pair("a1"), pair("b1"), pair("c1"), pair("a2"), pair("b2"),
                                    pair("c2"), val("q12"), val("q21"));
            case Family::PredPrey:
                return make_predprey(pair("a1"), pair("b1"), pair("c1"), pair("a2"), pair("b2"),
                                     pair("c2"), val("q12"), val("q21"));
            case Family::Expl2D:
                return make_expl2d(val("a1_1"), val("a1_2"), val("b1_2"), val("c1_2"),
                                   val("a2_1"), val("a2_2"), val("b2_2"), val("c2_2"),
                                   val("q12"), val("q21"), opt("beta", 0.25), opt("expo", 0.25));
            case Family::LV3Comp: {
                auto mat = [&](const char* p) {
                    Mat m(3);
                    for (int i = 0; i < 3; ++i) {
                        auto v = pair(std::string(p) + std::to_string(i + 1));
                        m[i] = {v[0], v[1]};
                    }
                    return m;
                };
                return make_lv3comp(mat("a"), mat("b"), mat("c"), mat("d"), val("q12"),
                                    val("q21"));
            }
            case Family::FoodChain: {
                Vec diag(chain), death(chain - 1), gain(chain - 1), loss(chain - 1);
                for (int i = 0; i < chain; ++i) diag[i] = val("diag_" + std::to_string(i + 1));
                for (int i = 0; i + 1 < chain; ++i) {
                    death[i] = val("death_" + std::to_string(i + 2));
                    gain[i] = val("gain_" + std::to_string(i + 2));
                    loss[i] = val("loss_" + std::to_string(i + 1));
                }
                return make_foodchain({val("a10_1"), val("a10_2")}, diag, death, gain, loss,
                                      val("q12"), val("q21"));
            }
            default:
                break;
        }
    } catch (const ModelError& e) {
        throw ParseError(std::string("model validation: ") + e.what());
    }
    throw ParseError("model file: internal family dispatch error");
}

inline ModelSpec build_custom(const std::vector<Section>& secs,
                              std::vector<std::vector<int>>* lattice_out) {
    KeyMap flat = key_map(secs[0], " for family 'custom'");
    for (const auto& [key, entry] : flat.kv)
        if (key != "family" && key != "n")
            fail(entry.line, "unknown key '" + key + "' for family 'custom'");
    int n = integer(flat.at("n"), 1, 32);

    std::map<int, const Section*> envs;
    const Section* switch_sec = nullptr;
    const Section* gauge_sec = nullptr;
    const Section* lattice_sec = nullptr;
    for (std::size_t s = 1; s < secs.size(); ++s) {
        const Section& sec = secs[s];
        if (sec.name.rfind("env.", 0) == 0) {
            char* end = nullptr;
            long k = std::strtol(sec.name.c_str() + 4, &end, 10);
            if (*end != '\0' || k < 1 || k > 9)
                fail(sec.line, "bad environment section '[" + sec.name + "]'");
            if (!envs.emplace(static_cast<int>(k), &sec).second)
                fail(sec.line, "duplicate section '[" + sec.name + "]'");
            continue;
        }
        const Section** slot = sec.name == "switch"   ? &switch_sec
                               : sec.name == "gauge"  ? &gauge_sec
                               : sec.name == "lattice" ? &lattice_sec
                                                        : nullptr;
        if (!slot) fail(sec.line, "unknown section '[" + sec.name + "]'");
        if (*slot) fail(sec.line, "duplicate section '[" + sec.name + "]'");
        *slot = &sec;
    }

    int n0 = static_cast<int>(envs.size());
    if (n0 < 2) throw ParseError("model file: custom models need at least two [env.K] blocks");
    for (int k = 1; k <= n0; ++k)
        if (!envs.count(k))
            throw ParseError("model file: [env.K] blocks must cover 1.." + std::to_string(n0) +
                             "; missing env." + std::to_string(k));

    ModelSpec m;
    m.n = n;
    m.n0 = n0;
    m.family = Family::Custom;
    m.fields.resize(n0);
    for (int k = 1; k <= n0; ++k) {
        const Section& sec = *envs.at(k);
        m.fields[k - 1].fitness.assign(n, Polynomial(n));
        std::vector<char> seen(n, 0);
        for (const Entry& e : sec.entries) {
            if (e.key.size() < 2 || e.key[0] != 'f')
                fail(e.line, "unknown key '" + e.key + "' in [" + sec.name + "]");
            char* end = nullptr;
            long i = std::strtol(e.key.c_str() + 1, &end, 10);
            if (*end != '\0' || i < 1 || i > n)
                fail(e.line, "unknown key '" + e.key + "' in [" + sec.name + "]");
            try {
                m.fields[k - 1].fitness[i - 1] = Polynomial::parse(e.value, n);
            } catch (const ParseError& pe) {
                fail(e.line, e.key + ": " + pe.what());
            }
            seen[i - 1] = 1;
        }
        for (int i = 0; i < n; ++i)
            if (!seen[i])
                fail(sec.line, "missing f" + std::to_string(i + 1) + " in [" + sec.name + "]");
    }

    if (!switch_sec)
        throw ParseError("model file: custom models need a [switch] section");
    Mat qconst(n0, Vec(n0, 0.0));
    std::vector<std::vector<Polynomial>> qpoly(n0, std::vector<Polynomial>(n0, Polynomial(n)));
    std::vector<std::vector<const Entry*>> given(n0, std::vector<const Entry*>(n0, nullptr));
    bool state_dep = false;
    const Entry* bound_entry = nullptr;
    for (const Entry& e : switch_sec->entries) {
        if (e.key == "rate_bound") {
            bound_entry = &e;
            continue;
        }
        if (e.key.size() != 3 || e.key[0] != 'q' || !std::isdigit((unsigned char)e.key[1]) ||
            !std::isdigit((unsigned char)e.key[2]))
            fail(e.line, "unknown key '" + e.key + "' in [switch]");
        int i = e.key[1] - '0', j = e.key[2] - '0';
        if (i < 1 || i > n0 || j < 1 || j > n0)
            fail(e.line, "key '" + e.key + "' references an environment beyond " +
                             std::to_string(n0));
        given[i - 1][j - 1] = &e;
        char* end = nullptr;
        double v = std::strtod(e.value.c_str(), &end);
        bool numeric = end != e.value.c_str() && *end == '\0' && std::isfinite(v);
        if (numeric) {
            if (i != j && !(v >= 0.0))
                fail(e.line, e.key + " must be nonnegative, got " + e.value);
            qconst[i - 1][j - 1] = v;
        } else {
            if (i == j) fail(e.line, "diagonal switch entries are derived; omit them");
            state_dep = true;
        }
    }
    if (state_dep) {
        for (int i = 0; i < n0; ++i)
            for (int j = 0; j < n0; ++j) {
                if (i == j || !given[i][j]) continue;
                {
                    const Entry& e = *given[i][j];
                    try {
                        qpoly[i][j] = Polynomial::parse(e.value, n);
                    } catch (const ParseError& pe) {
                        fail(e.line, e.key + ": " + pe.what());
                    }
                }
            }
        for (int i = 0; i < n0; ++i)
            if (given[i][i])
                fail(given[i][i]->line, "diagonal switch entries are derived; omit them");
        if (!bound_entry)
            throw ParseError(
                "model file: state-dependent switch rates need rate_bound in [switch]");
        double bound = number(*bound_entry);
        if (!(bound > 0.0)) fail(bound_entry->line, "rate_bound must be positive");
        m.switching.kind = SwitchLaw::Kind::StateDependent;
        m.switching.qpoly = std::move(qpoly);
        m.switching.rate_bound = bound;
    } else {
        if (bound_entry)
            fail(bound_entry->line, "rate_bound applies only to state-dependent switch rates");
        for (int i = 0; i < n0; ++i) {
            if (!given[i][i]) continue;
            double offsum = 0.0;
            for (int j = 0; j < n0; ++j)
                if (j != i) offsum += qconst[i][j];
            double diag = qconst[i][i];
            if (std::abs(diag + offsum) > 1e-9 * std::max(1.0, std::abs(diag)))
                fail(given[i][i]->line, "switch matrix row " + std::to_string(i + 1) +
                                            " does not sum to zero (diagonal " +
                                            std::to_string(diag) + ", off-diagonal sum " +
                                            std::to_string(offsum) + ")");
        }
        m.switching = SwitchLaw::constant(std::move(qconst));
    }

    if (gauge_sec) {
        KeyMap gk = key_map(*gauge_sec, " in [gauge]");
        for (const auto& [key, entry] : gk.kv)
            if (key != "env_weights" && key != "species_weights" && key != "exponent")
                fail(entry.line, "unknown key '" + key + "' in [gauge]");
        Vec ew = number_list(gk.at("env_weights"), n0);
        Vec sw = number_list(gk.at("species_weights"), n);
        double expo = number(gk.at("exponent"));
        try {
            m.gauge = GaugeFunction::weighted_power(std::move(ew), std::move(sw), expo);
        } catch (const ModelError& e) {
            fail(gauge_sec->line, e.what());
        }
    }

    if (lattice_sec) {
        KeyMap lk = key_map(*lattice_sec, " in [lattice]");
        for (const auto& [key, entry] : lk.kv)
            if (key != "faces") fail(entry.line, "unknown key '" + key + "' in [lattice]");
        const Entry& e = lk.at("faces");
        std::vector<std::vector<int>> faces;
        std::istringstream in(e.value);
        std::string tok;
        while (std::getline(in, tok, ';')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            std::istringstream ft(tok);
            std::vector<int> face;
            std::string num;
            while (ft >> num) {
                if (!num.empty() && num.back() == ',') num.pop_back();
                char* end = nullptr;
                long i = std::strtol(num.c_str(), &end, 10);
                if (*end != '\0' || i < 1 || i > n)
                    fail(e.line, "face species index '" + num + "' is out of 1.." +
                                     std::to_string(n));
                face.push_back(static_cast<int>(i - 1));
            }
            if (!face.empty()) faces.push_back(std::move(face));
        }
        if (faces.empty()) fail(e.line, "empty face list");
        if (lattice_out) *lattice_out = std::move(faces);
    }

    m.species_labels.resize(n);
    for (int i = 0; i < n; ++i) m.species_labels[i] = i;
    return m;
}

}  // namespace cfg_detail

inline ModelSpec parse_model_text(const std::string& text,
                                  std::vector<std::vector<int>>* lattice_out = nullptr) {
    std::vector<cfg_detail::Section> secs = cfg_detail::scan(text);
    const cfg_detail::Entry* fam_entry = nullptr;
    for (const cfg_detail::Entry& e : secs[0].entries)
        if (e.key == "family") fam_entry = &e;
    if (!fam_entry) throw ParseError("model file: missing required key 'family'");
    const std::string& fam = fam_entry->value;

    if (fam == "custom") return cfg_detail::build_custom(secs, lattice_out);

    Family f;
    if (fam == "single1d") f = Family::Single1D;
    else if (fam == "lv2comp") f = Family::LV2Comp;
    else if (fam == "predprey") f = Family::PredPrey;
    else if (fam == "expl2d") f = Family::Expl2D;
    else if (fam == "lv3comp") f = Family::LV3Comp;
    else if (fam == "foodchain") f = Family::FoodChain;
    else cfg_detail::fail(fam_entry->line, "unknown family '" + fam + "'");

    if (secs.size() > 1)
        cfg_detail::fail(secs[1].line,
                         "[" + secs[1].name + "] sections apply to family=custom only");
    return cfg_detail::build_family(f, secs[0]);
}

inline ModelSpec parse_model_file(const std::string& path,
                                  std::vector<std::vector<int>>* lattice_out = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw ParseError("cannot open model file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_model_text(os.str(), lattice_out);
}

inline std::string serialize_model(const ModelSpec& m) {
    char buf[40];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::string s;
    if (m.family != Family::Custom) {
        s = "family = " + std::string(family_name(m.family)) + "\n";
        for (const auto& [key, value] : m.params) s += key + " = " + num(value) + "\n";
        return s;
    }
    if (m.switching.kind == SwitchLaw::Kind::StateDependent)
        for (const auto& row : m.switching.qfn)
            for (const auto& fn : row)
                if (fn)
                    throw ModelError(
                        "cannot serialize callable switch rates; express them as polynomials");
    s = "family = custom\n";
    s += "n = " + std::to_string(m.n) + "\n";
    for (int k = 0; k < m.n0; ++k) {
        s += "\n[env." + std::to_string(k + 1) + "]\n";
        for (int i = 0; i < m.n; ++i)
            s += "f" + std::to_string(i + 1) + " = " + m.fields[k].fitness[i].to_string() + "\n";
    }
    s += "\n[switch]\n";
    for (int i = 0; i < m.n0; ++i)
        for (int j = 0; j < m.n0; ++j) {
            if (i == j) continue;
            std::string key = "q" + std::to_string(i + 1) + std::to_string(j + 1);
            if (m.switching.kind == SwitchLaw::Kind::ConstantMatrix)
                s += key + " = " + num(m.switching.q[i][j]) + "\n";
            else
                s += key + " = " + m.switching.qpoly[i][j].to_string() + "\n";
        }
    if (m.switching.kind == SwitchLaw::Kind::StateDependent)
        s += "rate_bound = " + num(m.switching.rate_bound) + "\n";
    if (m.gauge) {
        s += "\n[gauge]\n";
        s += "env_weights =";
        for (double a : m.gauge->env_weight) s += " " + num(a);
        s += "\nspecies_weights =";
        for (double w : m.gauge->species_weight) s += " " + num(w);
        s += "\nexponent = " + num(m.gauge->exponent) + "\n";
    }
    return s;
}

}  // namespace pdmp
