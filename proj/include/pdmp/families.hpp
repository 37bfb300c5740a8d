#pragma once

// Ready-made model families: one-species growth/logistic switches,
// two- and three-species competitive Lotka-Volterra, predator-prey,
// a two-species model with an explosive linear environment, and
// tri-trophic chains. Each constructor attaches the gauge the family
// is normally analyzed with.

#include <array>
#include <string>
#include <vector>

#include "pdmp/model.hpp"

namespace pdmp {

namespace detail {

inline Polynomial affine(unsigned nvars, double a0, const Vec& lin) {
    Polynomial p = Polynomial::constant(nvars, a0);
    for (unsigned i = 0; i < nvars; ++i)
        if (lin[i] != 0.0) p = p + Polynomial::variable(nvars, i) * lin[i];
    return p;
}

inline void require_rates(double q12, double q21) {
    if (q12 < 0 || q21 < 0) throw ModelError("switch rates must be nonnegative");
}

}  // namespace detail

// One species, two environments: f(x,1) = a11 (pure growth),
// f(x,2) = a12 - b12 x (logistic, or decay when a12 < 0).
inline ModelSpec make_single1d(double a11, double a12, double b12, double q12, double q21,
                               double beta = 0.5) {
    detail::require_rates(q12, q21);
    if (b12 <= 0) throw ModelError("the logistic environment needs b12 > 0");
    ModelSpec m;
    m.n = 1;
    m.n0 = 2;
    m.family = Family::Single1D;
    m.fields.resize(2);
    m.fields[0].fitness = {detail::affine(1, a11, {0.0})};
    m.fields[1].fitness = {detail::affine(1, a12, {-b12})};
    m.switching = SwitchLaw::constant2(q12, q21);
    m.gauge = GaugeFunction::weighted_power({1.0, beta}, {1.0}, 0.5);
    m.params = {{"a1_1", a11}, {"a1_2", a12}, {"b1_2", b12},
                {"q12", q12}, {"q21", q21}, {"beta", beta}};
    m.species_labels = {0};
    return m;
}

// Two competing species: f_i = a_i(k) - b_i(k) x_i - c_i(k) x_other.
inline ModelSpec make_lv2comp(std::array<double, 2> a1, std::array<double, 2> b1,
                              std::array<double, 2> c1, std::array<double, 2> a2,
                              std::array<double, 2> b2, std::array<double, 2> c2,
                              double q12, double q21) {
    detail::require_rates(q12, q21);
    ModelSpec m;
    m.n = 2;
    m.n0 = 2;
    m.family = Family::LV2Comp;
    m.fields.resize(2);
    for (int k = 0; k < 2; ++k) {
        m.fields[k].fitness = {detail::affine(2, a1[k], {-b1[k], -c1[k]}),
                               detail::affine(2, a2[k], {-c2[k], -b2[k]})};
    }
    m.switching = SwitchLaw::constant2(q12, q21);
    m.gauge = GaugeFunction::weighted_power({1.0, 1.0}, {1.0, 1.0}, 1.0);
    for (int k = 0; k < 2; ++k) {
        std::string s = std::to_string(k + 1);
        m.params["a1_" + s] = a1[k]; m.params["b1_" + s] = b1[k]; m.params["c1_" + s] = c1[k];
        m.params["a2_" + s] = a2[k]; m.params["b2_" + s] = b2[k]; m.params["c2_" + s] = c2[k];
    }
    m.params["q12"] = q12;
    m.params["q21"] = q21;
    m.species_labels = {0, 1};
    return m;
}

// Prey (1) and predator (2):
//   f_1 = a_1(k) - b_1(k) x_1 - c_1(k) x_2
//   f_2 = -a_2(k) - b_2(k) x_2 + c_2(k) x_1
inline ModelSpec make_predprey(std::array<double, 2> a1, std::array<double, 2> b1,
                               std::array<double, 2> c1, std::array<double, 2> a2,
                               std::array<double, 2> b2, std::array<double, 2> c2,
                               double q12, double q21) {
    detail::require_rates(q12, q21);
    ModelSpec m;
    m.n = 2;
    m.n0 = 2;
    m.family = Family::PredPrey;
    m.fields.resize(2);
    for (int k = 0; k < 2; ++k) {
        m.fields[k].fitness = {detail::affine(2, a1[k], {-b1[k], -c1[k]}),
                               detail::affine(2, -a2[k], {c2[k], -b2[k]})};
    }
    m.switching = SwitchLaw::constant2(q12, q21);
    // predator weight chosen so the predation cross term never helps the gauge grow
    double w2 = kInf;
    for (int k = 0; k < 2; ++k)
        if (c2[k] > 0) w2 = std::min(w2, c1[k] / c2[k]);
    if (!std::isfinite(w2) || w2 <= 0) w2 = 1.0;
    m.gauge = GaugeFunction::weighted_power({1.0, 1.0}, {1.0, w2}, 1.0);
    for (int k = 0; k < 2; ++k) {
        std::string s = std::to_string(k + 1);
        m.params["a1_" + s] = a1[k]; m.params["b1_" + s] = b1[k]; m.params["c1_" + s] = c1[k];
        m.params["a2_" + s] = a2[k]; m.params["b2_" + s] = b2[k]; m.params["c2_" + s] = c2[k];
    }
    m.params["q12"] = q12;
    m.params["q21"] = q21;
    m.species_labels = {0, 1};
    return m;
}

// Two species, environment 1 purely linear growth (no self-limitation),
// environment 2 fully logistic. Only fast enough switching keeps mass tight.
inline ModelSpec make_expl2d(double a1_1, double a1_2, double b1_2, double c1_2,
                             double a2_1, double a2_2, double b2_2, double c2_2,
                             double q12, double q21, double beta = 0.25, double expo = 0.25) {
    detail::require_rates(q12, q21);
    ModelSpec m;
    m.n = 2;
    m.n0 = 2;
    m.family = Family::Expl2D;
    m.fields.resize(2);
    m.fields[0].fitness = {detail::affine(2, a1_1, {0.0, 0.0}),
                           detail::affine(2, a2_1, {0.0, 0.0})};
    m.fields[1].fitness = {detail::affine(2, a1_2, {-b1_2, -c1_2}),
                           detail::affine(2, a2_2, {-c2_2, -b2_2})};
    m.switching = SwitchLaw::constant2(q12, q21);
    m.gauge = GaugeFunction::weighted_power({1.0, beta}, {1.0, 1.0}, expo);
    m.params = {{"a1_1", a1_1}, {"a1_2", a1_2}, {"b1_2", b1_2}, {"c1_2", c1_2},
                {"a2_1", a2_1}, {"a2_2", a2_2}, {"b2_2", b2_2}, {"c2_2", c2_2},
                {"q12", q12},   {"q21", q21},   {"beta", beta}, {"expo", expo}};
    m.species_labels = {0, 1};
    return m;
}

// Three competitors in a cycle:
//   f_i = a_i(k) - b_i(k) x_i - c_i(k) x_{i+1} - d_i(k) x_{i-1}  (indices mod 3)
inline ModelSpec make_lv3comp(const Mat& a, const Mat& b, const Mat& c, const Mat& d,
                              double q12, double q21) {
    detail::require_rates(q12, q21);
    for (const Mat* coef : {&a, &b, &c, &d}) {
        if (coef->size() != 3) throw ModelError("expected one coefficient row per species");
        for (const Vec& row : *coef)
            if (row.size() != 2) throw ModelError("expected one coefficient per environment");
    }
    ModelSpec m;
    m.n = 3;
    m.n0 = 2;
    m.family = Family::LV3Comp;
    m.fields.resize(2);
    for (int k = 0; k < 2; ++k) {
        for (int i = 0; i < 3; ++i) {
            Vec lin(3, 0.0);
            lin[i] = -b[i][k];
            lin[(i + 1) % 3] = -c[i][k];
            lin[(i + 2) % 3] = -d[i][k];
            m.fields[k].fitness.push_back(detail::affine(3, a[i][k], lin));
        }
    }
    m.switching = SwitchLaw::constant2(q12, q21);
    m.gauge = GaugeFunction::weighted_power({1.0, 1.0}, {1.0, 1.0, 1.0}, 1.0);
    for (int i = 0; i < 3; ++i) {
        std::string si = std::to_string(i + 1);
        for (int k = 0; k < 2; ++k) {
            std::string sk = std::to_string(k + 1);
            m.params["a" + si + "_" + sk] = a[i][k];
            m.params["b" + si + "_" + sk] = b[i][k];
            m.params["c" + si + "_" + sk] = c[i][k];
            m.params["d" + si + "_" + sk] = d[i][k];
        }
    }
    m.params["q12"] = q12;
    m.params["q21"] = q21;
    m.species_labels = {0, 1, 2};
    return m;
}

// Tri- (or longer) trophic chain. Species 1 is the basal resource; its
// intrinsic growth a10 is the only switched coefficient.
//   f_1 = a10(k) - diag_1 x_1 - loss_1 x_2
//   f_i = -death_{i-1} + gain_{i-1} x_{i-1} - diag_i x_i - loss_i x_{i+1}
//   f_n = -death_{n-1} + gain_{n-1} x_{n-1} - diag_n x_n
inline ModelSpec make_foodchain(const Vec& a10, const Vec& diag, const Vec& death,
                                const Vec& gain, const Vec& loss, double q12, double q21) {
    detail::require_rates(q12, q21);
    int n = static_cast<int>(diag.size());
    if (n < 2) throw ModelError("a chain needs at least two species");
    if (a10.size() != 2) throw ModelError("expected one basal growth rate per environment");
    if (static_cast<int>(death.size()) != n - 1 || static_cast<int>(gain.size()) != n - 1 ||
        static_cast<int>(loss.size()) != n - 1)
        throw ModelError("death/gain/loss need one entry per consumer link");
    for (int i = 0; i < n - 1; ++i)
        if (gain[i] <= 0 || loss[i] <= 0) throw ModelError("trophic links need positive rates");
    ModelSpec m;
    m.n = n;
    m.n0 = 2;
    m.family = Family::FoodChain;
    m.fields.resize(2);
    for (int k = 0; k < 2; ++k) {
        for (int i = 0; i < n; ++i) {
            Vec lin(n, 0.0);
            double a0;
            if (i == 0) {
                a0 = a10[k];
                lin[0] = -diag[0];
                lin[1] = -loss[0];
            } else {
                a0 = -death[i - 1];
                lin[i - 1] = gain[i - 1];
                lin[i] = -diag[i];
                if (i + 1 < n) lin[i + 1] = -loss[i];
            }
            m.fields[k].fitness.push_back(detail::affine(n, a0, lin));
        }
    }
    m.switching = SwitchLaw::constant2(q12, q21);
    Vec w(n, 1.0);
    for (int i = 1; i < n; ++i) w[i] = w[i - 1] * loss[i - 1] / gain[i - 1];
    m.gauge = GaugeFunction::weighted_power({1.0, 1.0}, w, 1.0);
    m.params["q12"] = q12;
    m.params["q21"] = q21;
    m.params["a10_1"] = a10[0];
    m.params["a10_2"] = a10[1];
    for (int i = 0; i < n; ++i) m.params["diag_" + std::to_string(i + 1)] = diag[i];
    for (int i = 0; i < n - 1; ++i) {
        m.params["death_" + std::to_string(i + 2)] = death[i];
        m.params["gain_" + std::to_string(i + 2)] = gain[i];
        m.params["loss_" + std::to_string(i + 1)] = loss[i];
    }
    for (int i = 0; i < n; ++i) m.species_labels.push_back(i);
    return m;
}

}  // namespace pdmp
