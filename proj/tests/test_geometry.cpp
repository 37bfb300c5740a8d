#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include <json.hpp>

#include "pdmp/families.hpp"
#include "pdmp/geometry.hpp"
#include "pdmp/rng.hpp"

using namespace pdmp;

namespace {

Vec random_point(Philox& rng, int n, double lo = 0.2, double hi = 3.0) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = lo + (hi - lo) * rng.u01();
    return x;
}

std::array<double, 2> random_pair(Philox& rng, double lo, double hi) {
    return {lo + (hi - lo) * rng.u01(), lo + (hi - lo) * rng.u01()};
}

double norm(const Vec& v) {
    double s = 0;
    for (double w : v) s += w * w;
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("bracket algebra on polynomial fields", "[geometry]") {
    ModelSpec pp = make_predprey({1.0, 2.0}, {1.0, 0.5}, {1.0, 0.7}, {0.5, 0.4}, {0.1, 0.2},
                                 {1.0, 1.5}, 2.0, 2.0);
    PolyField G1 = drift_field(pp, 0), G2 = drift_field(pp, 1);

    // a field brackets with itself to the zero polynomial
    PolyField zero = lie_bracket(G1, G1);
    Philox rng(17);
    for (int rep = 0; rep < 10; ++rep) {
        Vec x = random_point(rng, 2);
        Vec z = eval_field(zero, x);
        REQUIRE(z[0] == 0.0);
        REQUIRE(z[1] == 0.0);
    }

    // linear fields reduce to the matrix commutator: V = Ax, W = Bx with
    // A = [[0,1],[0,0]], B = [[0,0],[1,0]] gives (BA - AB)x
    PolyField V = {Polynomial::variable(2, 1), Polynomial::constant(2, 0.0)};
    PolyField W = {Polynomial::constant(2, 0.0), Polynomial::variable(2, 0)};
    Vec b = eval_field(lie_bracket(V, W), {1.0, 0.0});
    REQUIRE(b[0] == Catch::Approx(-1.0).margin(1e-15));
    REQUIRE(b[1] == Catch::Approx(0.0).margin(1e-15));

    // antisymmetry and bilinearity at random points
    PolyField VW = lie_bracket(G1, G2), WV = lie_bracket(G2, G1);
    PolyField mix;
    for (int i = 0; i < 2; ++i) mix.push_back(G1[i] * 2.0 + G2[i] * (-0.5));
    PolyField bmix = lie_bracket(mix, G1);
    PolyField b11 = lie_bracket(G1, G1), b21 = lie_bracket(G2, G1);
    for (int rep = 0; rep < 20; ++rep) {
        Vec x = random_point(rng, 2);
        Vec f = eval_field(VW, x), g = eval_field(WV, x);
        Vec h = eval_field(bmix, x), h1 = eval_field(b11, x), h2 = eval_field(b21, x);
        for (int i = 0; i < 2; ++i) {
            REQUIRE(f[i] == Catch::Approx(-g[i]).margin(1e-12 * (1 + std::abs(f[i]))));
            REQUIRE(h[i] == Catch::Approx(2.0 * h1[i] - 0.5 * h2[i])
                                .margin(1e-12 * (1 + std::abs(h[i]))));
        }
    }

    // Jacobi identity
    PolyField U = lie_bracket(G1, G2);
    PolyField j1 = lie_bracket(U, lie_bracket(G1, G2));
    PolyField t1 = lie_bracket(U, VW);
    for (int rep = 0; rep < 10; ++rep) {
        Vec x = random_point(rng, 2);
        Vec r1 = eval_field(lie_bracket(G1, lie_bracket(G2, U)), x);
        Vec r2 = eval_field(lie_bracket(G2, lie_bracket(U, G1)), x);
        Vec r3 = eval_field(lie_bracket(U, lie_bracket(G1, G2)), x);
        double scale = norm(r1) + norm(r2) + norm(r3) + 1.0;
        for (int i = 0; i < 2; ++i)
            REQUIRE(std::abs(r1[i] + r2[i] + r3[i]) <= 1e-5 * scale);
    }

    REQUIRE_THROWS_AS(lie_bracket(G1, PolyField{Polynomial::constant(1, 1.0)}), ModelError);
}

TEST_CASE("finite differences agree with the coefficient brackets", "[geometry]") {
    ModelSpec pp = make_predprey({1.3, 2.1}, {0.9, 0.5}, {1.1, 0.7}, {0.5, 0.45}, {0.12, 0.2},
                                 {1.0, 1.4}, 2.0, 2.0);
    FieldFn V1 = [&](const Vec& x) {
        Vec out;
        pp.drift_into(x, 0, out);
        return out;
    };
    FieldFn V2 = [&](const Vec& x) {
        Vec out;
        pp.drift_into(x, 1, out);
        return out;
    };
    Philox rng(23);
    for (int rep = 0; rep < 100; ++rep) {
        Vec x = random_point(rng, 2);
        Vec exact = lie_bracket(pp, 0, 1, x);
        Vec fd = lie_bracket_fd(V1, V2, x);
        double scale = norm(exact) + 1e-12;
        for (int i = 0; i < 2; ++i)
            REQUIRE(std::abs(fd[i] - exact[i]) <= 1e-6 * scale);
    }
}

TEST_CASE("bracket span rank", "[geometry]") {
    // identical environments generate nothing
    ModelSpec same = make_predprey({1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, {0.5, 0.5}, {0.1, 0.1},
                                   {1.0, 1.0}, 2.0, 2.0);
    BracketBasis b0 = bracket_span_rank(same, {1.0, 1.0});
    REQUIRE(b0.rank == 0);
    REQUIRE_FALSE(b0.spans());

    // generic prey/predator pair spans at depth one
    ModelSpec pp = make_predprey({1.0, 2.0}, {1.0, 0.5}, {1.0, 0.7}, {0.5, 0.4}, {0.1, 0.2},
                                 {1.0, 1.5}, 2.0, 2.0);
    BracketBasis b1 = bracket_span_rank(pp, {0.8, 1.2}, 1);
    REQUIRE(b1.rank == 2);
    REQUIRE(b1.spans());
    REQUIRE(b1.depth <= 1);

    // linear/logistic switching model at the persistence operating point
    ModelSpec ex = make_expl2d(1.0, 1.0, 0.75, 0.05, 0.5, 4.0, 0.25, 0.025, 2.0, 2.0);
    Vec x0 = {1.0, 1.0};
    REQUIRE(std::abs(expl2d_detM(ex, x0)) > 1e-9);
    BracketBasis b2 = bracket_span_rank(ex, x0, 1);
    REQUIRE(b2.rank == 2);

    // one-species switch: the difference field already spans
    ModelSpec one = make_single1d(0.5, 1.0, 0.05, 2.0, 2.0);
    BracketBasis b3 = bracket_span_rank(one, {25.0}, 0);
    REQUIRE(b3.rank == 1);
    REQUIRE(b3.spans());

    REQUIRE_THROWS_AS(bracket_span_rank(pp, {1.0, 1.0, 1.0}), ModelError);
    REQUIRE_THROWS_AS(bracket_span_rank(pp, {1.0, 1.0}, -1), ModelError);
}

TEST_CASE("prey/predator determinant criterion", "[geometry]") {
    Philox rng(31);

    // closed form against the generic bracket determinant
    for (int rep = 0; rep < 100; ++rep) {
        auto a1 = random_pair(rng, 0.5, 2.5), b1 = random_pair(rng, 0.2, 1.5);
        auto c1 = random_pair(rng, 0.2, 1.5), a2 = random_pair(rng, 0.2, 1.0);
        auto b2 = random_pair(rng, 0.05, 0.6), c2 = random_pair(rng, 0.3, 1.6);
        ModelSpec m = make_predprey(a1, b1, c1, a2, b2, c2, 2.0, 2.0);
        Vec x = random_point(rng, 2);

        PolyField G1 = drift_field(m, 0), G2 = drift_field(m, 1);
        PolyField W;
        for (int i = 0; i < 2; ++i) W.push_back(G1[i] - G2[i]);
        Vec w = eval_field(W, x);
        Vec br = eval_field(lie_bracket(G1, W), x);
        double direct = w[0] * br[1] - w[1] * br[0];
        double closed = pp_detM(a1, b1, c1, a2, b2, c2, x[0], x[1]);
        double scale = std::abs(direct) + norm(w) * norm(br) + 1e-12;
        REQUIRE(std::abs(closed - direct) <= 1e-8 * scale);

        // a nonzero determinant certifies the span
        if (std::abs(direct) > 1e-9 * scale) {
            BracketBasis basis = bracket_span_rank(m, x, 1);
            REQUIRE(basis.rank == 2);
        }
    }

    // identical environments: determinant vanishes identically
    for (int rep = 0; rep < 10; ++rep) {
        auto a1 = random_pair(rng, 0.5, 2.5);
        std::array<double, 2> e1 = {a1[0], a1[0]}, e2 = {0.7, 0.7}, e3 = {0.4, 0.4},
                              e4 = {0.3, 0.3}, e5 = {0.1, 0.1}, e6 = {1.1, 1.1};
        Vec x = random_point(rng, 2);
        REQUIRE(pp_detM(e1, e2, e3, e4, e5, e6, x[0], x[1]) == 0.0);
    }

    // when only the intercepts switch the determinant reduces to
    // x1 x2 (D x1 + E x2) with constant D and E, and vanishes on that line
    {
        std::array<double, 2> a1 = {2.0, 1.0}, a2 = {2.0, 1.0};
        std::array<double, 2> b1 = {1.0, 1.0}, b2 = {0.5, 0.5};
        std::array<double, 2> c1 = {0.4, 0.4}, c2 = {0.1, 0.1};
        double D = (a1[0] - a1[1]) * (b1[0] * (a2[0] - a2[1]) - c2[0] * (a1[0] - a1[1]));
        double E = -(a2[0] - a2[1]) * (b2[0] * (a1[0] - a1[1]) + c1[0] * (a2[0] - a2[1]));
        REQUIRE(D == Catch::Approx(0.9).margin(1e-15));
        REQUIRE(E == Catch::Approx(-0.9).margin(1e-15));
        for (double t : {0.5, 1.0, 2.7}) {
            // D x1 + E x2 = 0 along the diagonal for these parameters
            REQUIRE(std::abs(pp_detM(a1, b1, c1, a2, b2, c2, t, t)) <= 1e-12 * t * t * t);
            double off = pp_detM(a1, b1, c1, a2, b2, c2, t, 2.0 * t);
            REQUIRE(off == Catch::Approx(t * 2.0 * t * (D * t + E * 2.0 * t)).epsilon(1e-10));
        }
    }
}

TEST_CASE("linear/logistic determinant criterion", "[geometry]") {
    Philox rng(37);
    for (int rep = 0; rep < 100; ++rep) {
        double a1_1 = 0.5 + 2 * rng.u01(), a1_2 = 0.5 + 2 * rng.u01();
        double b1_2 = 0.2 + rng.u01(), c1_2 = 0.02 + 0.2 * rng.u01();
        double a2_1 = 0.3 + 2 * rng.u01(), a2_2 = 0.5 + 3 * rng.u01();
        double b2_2 = 0.1 + 0.5 * rng.u01(), c2_2 = 0.01 + 0.1 * rng.u01();
        ModelSpec m = make_expl2d(a1_1, a1_2, b1_2, c1_2, a2_1, a2_2, b2_2, c2_2, 2.0, 2.0);
        Vec x = random_point(rng, 2);

        PolyField G1 = drift_field(m, 0), G2 = drift_field(m, 1);
        PolyField W;
        for (int i = 0; i < 2; ++i) W.push_back(G1[i] - G2[i]);
        Vec w = eval_field(W, x);
        Vec br = eval_field(lie_bracket(G1, W), x);
        double direct = w[0] * br[1] - w[1] * br[0];
        double closed = expl2d_detM(a1_1, a1_2, b1_2, c1_2, a2_1, a2_2, b2_2, c2_2, x[0], x[1]);
        double scale = std::abs(direct) + norm(w) * norm(br) + 1e-12;
        REQUIRE(std::abs(closed - direct) <= 1e-8 * scale);
    }

    // equal growth intercepts in environment 1 kill the quartic term
    {
        double a = 0.8, b1 = 0.6, c1 = 0.1, b2 = 0.3, c2 = 0.05;
        double A1 = (a - 1.1) * a * b2 - a * c1 * (a - 0.9);
        double A2 = (a - 1.1) * a * c2 - a * b1 * (a - 0.9);
        for (double s : {0.5, 1.0, 2.0}) {
            double det = expl2d_detM(a, 1.1, b1, c1, a, 0.9, b2, c2, s, 2 * s);
            REQUIRE(det == Catch::Approx(A1 * s * 4 * s * s + A2 * s * s * 2 * s).epsilon(1e-12));
        }
    }

    // all-equal coefficients zero every term: the determinant vanishes
    // everywhere even though the two fields differ
    for (double s : {0.3, 1.0, 4.0})
        REQUIRE(expl2d_detM(1.0, 1.0, 0.75, 0.05, 1.0, 1.0, 0.25, 0.025, s, 0.5 * s) == 0.0);
}

TEST_CASE("bracket report serialization", "[geometry]") {
    ModelSpec pp = make_predprey({1.0, 2.0}, {1.0, 0.5}, {1.0, 0.7}, {0.5, 0.4}, {0.1, 0.2},
                                 {1.0, 1.5}, 2.0, 2.0);
    Vec x = {0.8, 1.2};
    auto j = nlohmann::json::parse(bracket_report_json(pp, x, 2));
    REQUIRE(j["dimension"] == 2);
    REQUIRE(j["rank"] == 2);
    REQUIRE(j["spans"] == true);
    REQUIRE(j["point"][0] == Catch::Approx(0.8));
    REQUIRE(j.contains("closed_form_det"));
    REQUIRE(j["closed_form_det"].get<double>() == Catch::Approx(pp_detM(pp, x)));
    REQUIRE(j["vectors"].size() >= 1);
}
