#pragma once

// Sparse multivariate polynomials with explicit coefficient tables. Fitness
// functions, drift fields and their Lie brackets are all low-degree
// polynomials in a handful of variables, so terms are kept as (exponent
// vector, coefficient) pairs in a canonical sorted order. Evaluation is the
// hot path inside the ODE right-hand side and stays allocation-free.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "pdmp/common.hpp"

namespace pdmp {

class Polynomial {
public:
    struct Term {
        std::vector<unsigned> exp;
        double coef;
    };

    Polynomial() : nvars_(0) {}
    explicit Polynomial(unsigned nvars) : nvars_(nvars) {}

    static Polynomial constant(unsigned nvars, double c) {
        Polynomial p(nvars);
        p.add_term(std::vector<unsigned>(nvars, 0), c);
        return p;
    }

    static Polynomial variable(unsigned nvars, unsigned i) {
        Polynomial p(nvars);
        std::vector<unsigned> e(nvars, 0);
        e[i] = 1;
        p.add_term(e, 1.0);
        return p;
    }

    unsigned nvars() const { return nvars_; }
    const std::vector<Term>& terms() const { return terms_; }

    void add_term(const std::vector<unsigned>& e, double c) {
        if (c == 0.0) return;
        auto it = std::lower_bound(terms_.begin(), terms_.end(), e,
                                   [](const Term& t, const std::vector<unsigned>& key) { return t.exp < key; });
        if (it != terms_.end() && it->exp == e) {
            it->coef += c;
            if (it->coef == 0.0) terms_.erase(it);
        } else {
            terms_.insert(it, Term{e, c});
        }
    }

    double eval(const double* x) const {
        double s = 0;
        for (const Term& t : terms_) {
            double m = t.coef;
            for (unsigned v = 0; v < nvars_; ++v) {
                unsigned e = t.exp[v];
                double base = x[v];
                while (e--) m *= base;
            }
            s += m;
        }
        return s;
    }

    double eval(const Vec& x) const { return eval(x.data()); }

    unsigned degree() const {
        unsigned d = 0;
        for (const Term& t : terms_) {
            unsigned td = 0;
            for (unsigned e : t.exp) td += e;
            d = std::max(d, td);
        }
        return d;
    }

    Polynomial derivative(unsigned i) const {
        Polynomial out(nvars_);
        for (const Term& t : terms_) {
            if (t.exp[i] == 0) continue;
            std::vector<unsigned> e = t.exp;
            double c = t.coef * e[i];
            e[i] -= 1;
            out.add_term(e, c);
        }
        return out;
    }

    Polynomial times_var(unsigned i) const {
        Polynomial out(nvars_);
        for (const Term& t : terms_) {
            std::vector<unsigned> e = t.exp;
            e[i] += 1;
            out.add_term(e, t.coef);
        }
        return out;
    }

    Polynomial operator+(const Polynomial& o) const {
        Polynomial out = *this;
        for (const Term& t : o.terms_) out.add_term(t.exp, t.coef);
        return out;
    }

    Polynomial operator-(const Polynomial& o) const {
        Polynomial out = *this;
        for (const Term& t : o.terms_) out.add_term(t.exp, -t.coef);
        return out;
    }

    Polynomial operator*(const Polynomial& o) const {
        Polynomial out(nvars_);
        for (const Term& a : terms_)
            for (const Term& b : o.terms_) {
                std::vector<unsigned> e(nvars_);
                for (unsigned v = 0; v < nvars_; ++v) e[v] = a.exp[v] + b.exp[v];
                out.add_term(e, a.coef * b.coef);
            }
        return out;
    }

    Polynomial operator*(double c) const {
        Polynomial out(nvars_);
        for (const Term& t : terms_) out.add_term(t.exp, t.coef * c);
        return out;
    }

    // Substitute x_j = 0 for every variable not in `keep` (0-based, ascending)
    // and renumber the survivors in the order given.
    Polynomial restrict_to(const std::vector<int>& keep) const {
        Polynomial out(static_cast<unsigned>(keep.size()));
        for (const Term& t : terms_) {
            bool dropped = false;
            for (unsigned v = 0; v < nvars_ && !dropped; ++v) {
                if (t.exp[v] == 0) continue;
                if (std::find(keep.begin(), keep.end(), static_cast<int>(v)) == keep.end()) dropped = true;
            }
            if (dropped) continue;
            std::vector<unsigned> e(keep.size());
            for (std::size_t a = 0; a < keep.size(); ++a) e[a] = t.exp[keep[a]];
            out.add_term(e, t.coef);
        }
        return out;
    }

    bool is_zero() const { return terms_.empty(); }

    bool equals(const Polynomial& o, double tol = 0.0) const {
        if (nvars_ != o.nvars_ || terms_.size() != o.terms_.size()) return false;
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            if (terms_[i].exp != o.terms_[i].exp) return false;
            if (std::abs(terms_[i].coef - o.terms_[i].coef) > tol) return false;
        }
        return true;
    }

    // Text form: "c x1^e1 x2^e2 + ...", exact round trip through parse().
    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const Term& t : terms_) {
            double c = t.coef;
            if (first) {
                if (c < 0) os << "-";
            } else {
                os << (c < 0 ? " - " : " + ");
            }
            first = false;
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", std::abs(c));
            os << buf;
            for (unsigned v = 0; v < nvars_; ++v) {
                if (t.exp[v] == 0) continue;
                os << " x" << (v + 1);
                if (t.exp[v] > 1) os << "^" << t.exp[v];
            }
        }
        return os.str();
    }

    // Parse "1 - 0.5 x1 + 2 x1 x2^2" style expressions. Variables are x1..xN
    // (1-based in text, 0-based internally). Implicit multiplication between
    // factors; '*' is also accepted.
    static Polynomial parse(const std::string& text, unsigned nvars) {
        Polynomial out(nvars);
        std::size_t i = 0;
        auto skip_ws = [&] {
            while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        };
        skip_ws();
        if (i == text.size()) throw ParseError("empty polynomial expression");
        bool at_start = true;    // a single sign may open the expression
        bool expect_term = true; // set after a separator, cleared by any factor
        double sign = 1.0;
        double coef = 1.0;
        bool have_coef = false;
        std::vector<unsigned> exps(nvars, 0);
        bool in_term = false;

        auto flush_term = [&] {
            if (!in_term) return;
            out.add_term(exps, sign * (have_coef ? coef : 1.0));
            std::fill(exps.begin(), exps.end(), 0u);
            coef = 1.0;
            have_coef = false;
            in_term = false;
        };

        while (i < text.size()) {
            skip_ws();
            if (i == text.size()) break;
            char c = text[i];
            if (c == '+' || c == '-') {
                if (at_start) {
                    sign = (c == '-') ? -1.0 : 1.0;
                    at_start = false;
                    ++i;
                    continue;
                }
                if (expect_term) throw ParseError("polynomial parse: repeated sign in '" + text + "'");
                flush_term();
                sign = (c == '-') ? -1.0 : 1.0;
                expect_term = true;
                ++i;
                continue;
            }
            at_start = false;
            if (c == '*') {
                if (!in_term) throw ParseError("polynomial parse: stray '*' in '" + text + "'");
                ++i;
                continue;
            }
            if (c == 'x' || c == 'X') {
                ++i;
                std::size_t start = i;
                while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
                if (start == i) throw ParseError("polynomial parse: variable without index in '" + text + "'");
                int var = std::stoi(text.substr(start, i - start));
                if (var < 1 || var > static_cast<int>(nvars))
                    throw ParseError("polynomial parse: variable x" + std::to_string(var) + " out of range (n=" +
                                     std::to_string(nvars) + ")");
                unsigned e = 1;
                if (i < text.size() && text[i] == '^') {
                    ++i;
                    std::size_t es = i;
                    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
                    if (es == i) throw ParseError("polynomial parse: '^' without exponent in '" + text + "'");
                    e = static_cast<unsigned>(std::stoul(text.substr(es, i - es)));
                }
                exps[var - 1] += e;
                in_term = true;
                expect_term = false;
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t pos = 0;
                double v;
                try {
                    v = std::stod(text.substr(i), &pos);
                } catch (const std::exception&) {
                    throw ParseError("polynomial parse: bad number in '" + text + "'");
                }
                i += pos;
                if (have_coef) coef *= v;  // "2 3" is treated as 2*3
                else {
                    coef = v;
                    have_coef = true;
                }
                in_term = true;
                expect_term = false;
                continue;
            }
            throw ParseError(std::string("polynomial parse: unexpected character '") + c + "' in '" + text + "'");
        }
        if (expect_term && !in_term) throw ParseError("polynomial parse: trailing operator in '" + text + "'");
        flush_term();
        return out;
    }

private:
    unsigned nvars_;
    std::vector<Term> terms_;
};

inline Polynomial operator*(double c, const Polynomial& p) { return p * c; }

}  // namespace pdmp
