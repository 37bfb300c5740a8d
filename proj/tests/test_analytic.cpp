#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "pdmp/analytic.hpp"
#include "pdmp/families.hpp"
#include "pdmp/rng.hpp"

using namespace pdmp;

namespace {

// one-species-per-axis, one-environment helper with fitness a_i + s_i * x_i
ModelSpec diag_model(const Vec& a, const Vec& s) {
    ModelSpec m;
    m.n = (int)a.size();
    m.n0 = 1;
    EnvironmentField f;
    for (int i = 0; i < m.n; ++i) {
        Polynomial p = Polynomial::constant((unsigned)m.n, a[i]);
        std::vector<unsigned> mono((unsigned)m.n, 0);
        mono[(unsigned)i] = 1;
        p.add_term(mono, s[i]);
        f.fitness.push_back(p);
    }
    m.fields = {f};
    m.switching = SwitchLaw::constant(Mat{{0.0}});
    return m;
}

}  // namespace

TEST_CASE("stationary switch distributions", "[analytic]") {
    Vec nu = stationary_switch(SwitchLaw::constant2(2.0, 2.0));
    REQUIRE(nu[0] == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(nu[1] == Catch::Approx(0.5).margin(1e-15));

    nu = stationary_switch(SwitchLaw::constant2(3.0, 1.0));
    REQUIRE(nu[0] == Catch::Approx(0.25).margin(1e-15));
    REQUIRE(nu[1] == Catch::Approx(0.75).margin(1e-15));

    // cyclic rate-1 chain on three states
    Mat cyc = {{-1, 1, 0}, {0, -1, 1}, {1, 0, -1}};
    nu = stationary_switch(SwitchLaw::constant(cyc));
    for (int k = 0; k < 3; ++k) REQUIRE(nu[k] == Catch::Approx(1.0 / 3).margin(1e-13));

    // random irreducible chains: nu Q = 0 with tiny residual, nu > 0
    Philox rng(911);
    for (int rep = 0; rep < 25; ++rep) {
        int n0 = 2 + (int)(rng.next_u32() % 3);
        Mat q(n0, Vec(n0, 0.0));
        for (int i = 0; i < n0; ++i) {
            double row = 0;
            for (int j = 0; j < n0; ++j)
                if (j != i) {
                    q[i][j] = 0.05 + 3.0 * rng.u01();
                    row += q[i][j];
                }
            q[i][i] = -row;
        }
        Vec v = stationary_switch(SwitchLaw::constant(q));
        double sum = 0;
        for (double w : v) {
            REQUIRE(w > 0.0);
            sum += w;
        }
        REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
        for (int j = 0; j < n0; ++j) {
            double r = 0;
            for (int i = 0; i < n0; ++i) r += v[i] * q[i][j];
            REQUIRE(std::fabs(r) <= 1e-12);
        }
    }

    // chain whose third state never receives mass flow back: reducible
    Mat red = {{-1, 1, 0}, {1, -1, 0}, {1, 0, -1}};
    REQUIRE_THROWS_AS(stationary_switch(SwitchLaw::constant(red)), NumericError);

    // state-dependent law has no single stationary vector
    SwitchLaw dep;
    dep.kind = SwitchLaw::Kind::StateDependent;
    dep.qfn = {{nullptr, [](const Vec&) { return 1.0; }},
               {[](const Vec&) { return 1.0; }, nullptr}};
    dep.rate_bound = 1.0;
    REQUIRE_THROWS_AS(stationary_switch(dep), ModelError);
}

TEST_CASE("switch-driven logistic density, growth plus logistic regime", "[analytic]") {
    // params (0.5, 1, 0.05, 2, 2): support [20,inf), gamma 7, edge power 2
    ClosedFormDensity d = density_1d_logistic(0.5, 1.0, 0.05, 2.0, 2.0);
    REQUIRE(d.kind == ClosedFormDensity::Kind::GrowthLogistic);
    REQUIRE(d.lo == Catch::Approx(20.0).margin(1e-14));
    REQUIRE(std::isinf(d.hi));
    REQUIRE(d.gamma == Catch::Approx(7.0).margin(1e-14));

    // normalization constant and point values are exact rationals here:
    // C1 = 1.92e9, h1(40) = C1/40^7, h2(40) = h1(40)/2
    REQUIRE(d.C1 == Catch::Approx(1.92e9).epsilon(1e-9));
    REQUIRE(d.h1(40.0) == Catch::Approx(0.01171875).epsilon(1e-9));
    REQUIRE(d.h2(40.0) == Catch::Approx(0.005859375).epsilon(1e-9));
    REQUIRE(d.h1(40.0) / d.h2(40.0) == Catch::Approx(2.0).epsilon(1e-12));

    // off support and at the support edge the density vanishes
    REQUIRE(d.h1(19.9) == 0.0);
    REQUIRE(d.h2(19.9) == 0.0);
    REQUIRE(d.h1(20.0) == 0.0);

    // masses match the switch stationary law, here symmetric
    REQUIRE(d.mass1 + d.mass2 == Catch::Approx(1.0).margin(1e-10));
    REQUIRE(d.mass1 == Catch::Approx(0.5).margin(1e-8));
    REQUIRE(d.mass2 == Catch::Approx(0.5).margin(1e-8));

    // re-integration of the normalized density reproduces the masses
    REQUIRE(d.mass_between(20.0, INFINITY) == Catch::Approx(1.0).margin(1e-8));

    // exchange balance: int q12 h1 - q21 h2 dx = 0
    double ex = integrate_density(
        d, [](double, int k) { return k == 0 ? 2.0 : -2.0; }, 0);
    REQUIRE(std::fabs(ex) <= 1e-8);

    // log-gamma closed form agrees with quadrature normalization
    REQUIRE(d.beta_rel_err <= 1e-9);

    // stationary balance residual by finite differences, away from the edge:
    // d/dx (x f(x,k) h_k) = sum_l q_lk h_l - q_kl h_k
    for (double x : {25.0, 30.0, 50.0}) {
        const double step = 1e-6 * x;
        auto flux1 = [&](double y) { return y * 0.5 * d.h1(y); };
        auto flux2 = [&](double y) { return y * (1.0 - 0.05 * y) * d.h2(y); };
        double d1 = (flux1(x + step) - flux1(x - step)) / (2 * step);
        double d2 = (flux2(x + step) - flux2(x - step)) / (2 * step);
        double rhs1 = 2.0 * d.h2(x) - 2.0 * d.h1(x);
        double rhs2 = 2.0 * d.h1(x) - 2.0 * d.h2(x);
        double scale = 1.0 + std::fabs(rhs1);
        REQUIRE(d1 == Catch::Approx(rhs1).margin(1e-4 * scale));
        REQUIRE(d2 == Catch::Approx(rhs2).margin(1e-4 * scale));
    }

    // truncation point carries < 1e-10 of mass beyond it
    REQUIRE(std::isfinite(d.truncation));
    REQUIRE(d.mass_between(20.0, d.truncation) == Catch::Approx(1.0).margin(1e-9));

    // a sub-unit edge power (q21 < a1(2)) makes h2 singular at the edge;
    // masses must still come out as nu
    ClosedFormDensity e = density_1d_logistic(0.5, 2.0, 0.1, 2.0, 1.0);
    REQUIRE(e.mass1 == Catch::Approx(1.0 / 3).margin(1e-8));
    REQUIRE(e.mass2 == Catch::Approx(2.0 / 3).margin(1e-8));

    REQUIRE_THROWS_AS(density_1d_logistic(-0.5, 1.0, 0.05, 2, 2), ModelError);
    REQUIRE_THROWS_AS(density_1d_logistic(0.5, 0.0, 0.05, 2, 2), ModelError);
    REQUIRE_THROWS_AS(density_1d_logistic(0.5, 1.0, -0.05, 2, 2), ModelError);
}

TEST_CASE("switch-driven logistic density, growth versus decay regime", "[analytic]") {
    // params (0.5, -0.25, 0.05, 1, 2): support (0,inf), tau = -5
    ClosedFormDensity d = density_1d_logistic(0.5, -0.25, 0.05, 1.0, 2.0);
    REQUIRE(d.kind == ClosedFormDensity::Kind::GrowthDecay);
    REQUIRE(d.lo == 0.0);
    REQUIRE(std::isinf(d.hi));
    REQUIRE(d.tau == Catch::Approx(-5.0).margin(1e-14));

    // near zero h1 ~ x^5, at infinity h1 ~ x^-3
    REQUIRE(d.h1(2e-4) / d.h1(1e-4) == Catch::Approx(std::pow(2.0, 5.0)).epsilon(1e-3));
    REQUIRE(d.h1(2e5) / d.h1(1e5) == Catch::Approx(std::pow(2.0, -3.0)).epsilon(1e-3));

    // masses equal nu = (2/3, 1/3) for rates (1,2)
    REQUIRE(d.mass1 == Catch::Approx(2.0 / 3).margin(1e-8));
    REQUIRE(d.mass2 == Catch::Approx(1.0 / 3).margin(1e-8));
    REQUIRE(d.beta_rel_err <= 1e-9);

    // exact mean of the normalized pair is 25
    double mean = integrate_density(
        d, [](double x, int) { return x; }, 1);
    REQUIRE(mean == Catch::Approx(25.0).epsilon(1e-7));

    // finite-difference stationary balance at interior points
    for (double x : {2.0, 8.0, 40.0}) {
        const double step = 1e-6 * (1 + x);
        auto flux1 = [&](double y) { return y * 0.5 * d.h1(y); };
        auto flux2 = [&](double y) { return y * (-0.25 - 0.05 * y) * d.h2(y); };
        double d1 = (flux1(x + step) - flux1(x - step)) / (2 * step);
        double d2 = (flux2(x + step) - flux2(x - step)) / (2 * step);
        double rhs1 = 2.0 * d.h2(x) - 1.0 * d.h1(x);
        double rhs2 = 1.0 * d.h1(x) - 2.0 * d.h2(x);
        double scale = 1.0 + std::fabs(rhs1);
        REQUIRE(d1 == Catch::Approx(rhs1).margin(1e-4 * scale));
        REQUIRE(d2 == Catch::Approx(rhs2).margin(1e-4 * scale));
    }

    // rates that break a1(1) q21 > |a1(2)| q12 admit no interior measure
    REQUIRE_THROWS_WITH(density_1d_logistic(0.5, -0.25, 0.05, 2.0, 1.0),
                        Catch::Matchers::ContainsSubstring("no interior invariant measure"));
    REQUIRE_THROWS_WITH(density_1d_logistic(0.5, -0.25, 0.05, 3.0, 1.0),
                        Catch::Matchers::ContainsSubstring("no interior invariant measure"));
}

TEST_CASE("two-logistic boundary density pair", "[analytic]") {
    // fixed points 1 and 2, unit exponents: h1 = C (2-x)/x^3 on (1,2)
    ClosedFormDensity d = density_lv_boundary(1.0, 2.0, 1.0, 1.0, 1.0, 2.0);
    REQUIRE(d.kind == ClosedFormDensity::Kind::LogisticPair);
    REQUIRE(d.lo == Catch::Approx(1.0).margin(1e-14));
    REQUIRE(d.hi == Catch::Approx(2.0).margin(1e-14));

    // C = 8/3 exactly: h1(1.5) = (8/3) * 0.5 / 1.5^3
    REQUIRE(d.h1(1.5) == Catch::Approx((8.0 / 3) * 0.5 / 3.375).epsilon(1e-9));
    REQUIRE(d.mass1 == Catch::Approx(2.0 / 3).margin(1e-8));
    REQUIRE(d.mass2 == Catch::Approx(1.0 / 3).margin(1e-8));
    REQUIRE(d.beta_rel_err <= 1e-9);
    REQUIRE(d.h1(0.99) == 0.0);
    REQUIRE(d.h2(2.01) == 0.0);

    // mean of the pair is exactly 4/3
    double mean = integrate_density(
        d, [](double x, int) { return x; }, 1);
    REQUIRE(mean == Catch::Approx(4.0 / 3).epsilon(1e-8));

    // zero-flux identity: x f(x,1) h1 + x f(x,2) h2 = 0 pointwise
    for (double x : {1.1, 1.5, 1.9}) {
        double flux = x * (1.0 - x) * d.h1(x) + x * (2.0 - x) * d.h2(x);
        REQUIRE(std::fabs(flux) <= 1e-12 * (1.0 + std::fabs(x * (1.0 - x) * d.h1(x))));
    }

    // finite-difference stationary balance
    for (double x : {1.25, 1.75}) {
        const double step = 1e-7;
        auto flux1 = [&](double y) { return y * (1.0 - y) * d.h1(y); };
        double d1 = (flux1(x + step) - flux1(x - step)) / (2 * step);
        double rhs1 = 2.0 * d.h2(x) - 1.0 * d.h1(x);
        REQUIRE(d1 == Catch::Approx(rhs1).margin(1e-4 * (1 + std::fabs(rhs1))));
    }

    // swapped orientation: fixed point of env 1 above env 2
    ClosedFormDensity s = density_lv_boundary(2.0, 1.0, 1.0, 1.0, 1.3, 0.7);
    REQUIRE(s.lo == Catch::Approx(1.0).margin(1e-14));
    REQUIRE(s.hi == Catch::Approx(2.0).margin(1e-14));
    double nu1 = 0.7 / 2.0;
    REQUIRE(s.mass1 == Catch::Approx(nu1).margin(1e-8));
    for (double x : {1.2, 1.8}) {
        double flux = x * (2.0 - x) * s.h1(x) + x * (1.0 - x) * s.h2(x);
        REQUIRE(std::fabs(flux) <= 1e-12 * (1.0 + std::fabs(x * (2.0 - x) * s.h1(x))));
    }

    // equal fixed points collapse to a point mass with switch weights
    ClosedFormDensity p = density_lv_boundary(2.0, 4.0, 1.0, 2.0, 2.0, 2.0);
    REQUIRE(p.kind == ClosedFormDensity::Kind::PointMass);
    REQUIRE(p.point == Catch::Approx(2.0).margin(1e-14));
    REQUIRE(integrate_density(p, [](double x, int) { return x; }, 1) ==
            Catch::Approx(2.0).margin(1e-14));

    REQUIRE_THROWS_AS(density_lv_boundary(0.0, 2.0, 1.0, 1.0, 1.0, 1.0), ModelError);
}

TEST_CASE("density integrals with polynomial weights", "[analytic]") {
    ClosedFormDensity d = density_1d_logistic(0.5, 1.0, 0.05, 2.0, 2.0);

    REQUIRE(integrate_density(d, [](double, int) { return 1.0; }, 0) ==
            Catch::Approx(1.0).margin(1e-8));
    REQUIRE(integrate_density(d, [](double, int k) { return k == 0 ? 1.0 : 0.0; }, 0) ==
            Catch::Approx(0.5).margin(1e-8));

    // exact stationary moments: E[X] = 35 with env-conditional parts 20 + 15,
    // E[X^2] = 1500
    REQUIRE(integrate_density(d, [](double x, int) { return x; }, 1) ==
            Catch::Approx(35.0).epsilon(1e-6));
    REQUIRE(integrate_density(d, [](double x, int k) { return k == 0 ? x : 0.0; }, 1) ==
            Catch::Approx(20.0).epsilon(1e-6));
    REQUIRE(integrate_density(d, [](double x, int k) { return k == 1 ? x : 0.0; }, 1) ==
            Catch::Approx(15.0).epsilon(1e-6));
    REQUIRE(integrate_density(d, [](double x, int) { return x * x; }, 2) ==
            Catch::Approx(1500.0).epsilon(1e-6));

    // h1 tail decays like x^-5: degree-3 weights integrate, degree-5 do not
    double third = integrate_density(
        d, [](double x, int) { return x * x * x; }, 3);
    REQUIRE(std::isfinite(third));
    REQUIRE_THROWS_AS(integrate_density(
                          d, [](double x, int) { return std::pow(x, 5.0); }, 5),
                      NumericError);
}

TEST_CASE("interior means from switch-averaged growth rates", "[analytic]") {
    // identity interactions: means equal the averaged intercepts
    ModelSpec ident = diag_model({0.6, 0.8}, {-1.0, -1.0});
    Vec m = interior_means(ident, {0, 1});
    REQUIRE(m[0] == Catch::Approx(0.6).margin(1e-12));
    REQUIRE(m[1] == Catch::Approx(0.8).margin(1e-12));

    // cyclic three-species competition restricted to the first two species
    ModelSpec lv3 = make_lv3comp({{3, 3}, {3, 3}, {1, 1}}, {{2, 2}, {2, 2}, {2, 2}},
                                 {{1, 1}, {1, 1}, {1, 1}}, {{1, 1}, {1, 1}, {1, 1}}, 2.0, 2.0);
    m = interior_means(lv3, {0, 1});
    REQUIRE(m[0] == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(m[1] == Catch::Approx(1.0).margin(1e-12));

    // chain model: single-species mean is the averaged growth over self-limitation
    ModelSpec chain = make_foodchain({1.0, 2.0}, {2.0, 1.0}, {0.25}, {1.0}, {0.5}, 2.0, 2.0);
    m = interior_means(chain, {0});
    REQUIRE(m[0] == Catch::Approx(1.5 / 2.0).margin(1e-12));

    // singular interaction matrix
    ModelSpec sing = diag_model({1.0, 1.0}, {-1.0, -1.0});
    sing.fields[0].fitness[0] = Polynomial::parse("1 - x1 - x2", 2);
    sing.fields[0].fitness[1] = Polynomial::parse("1 - x1 - x2", 2);
    REQUIRE_THROWS_AS(interior_means(sing, {0, 1}), NumericError);

    // negative solve result is infeasible as a mean
    ModelSpec neg = diag_model({-1.0, 0.5}, {-1.0, -1.0});
    REQUIRE_THROWS_WITH(interior_means(neg, {0, 1}),
                        Catch::Matchers::ContainsSubstring("infeasible"));

    // interactions that switch across environments are unsupported
    ModelSpec sw = make_lv2comp({1, 1}, {1, 2}, {0.3, 0.3}, {1, 1}, {1, 1}, {0.3, 0.3}, 2, 2);
    REQUIRE_THROWS_AS(interior_means(sw, {0, 1}), ModelError);

    // non-affine fitness is rejected
    ModelSpec quad = diag_model({1.0}, {-1.0});
    quad.fields[0].fitness[0] = Polynomial::parse("1 - x1^2", 1);
    REQUIRE_THROWS_AS(interior_means(quad, {0}), ModelError);
}

TEST_CASE("invasion rates against boundary measures", "[analytic]") {
    // extinction point of the growth/logistic model: lambda = avg growth rate
    ModelSpec fig1 = make_single1d(0.5, 1.0, 0.05, 2.0, 2.0);
    BoundaryMeasureRep origin;
    origin.I = {};
    origin.form = BoundaryMeasureRep::Form::PointMass;
    origin.point = {};
    LambdaEstimate le = boundary_lambda(fig1, origin, 0);
    REQUIRE(le.value == Catch::Approx(0.75).margin(1e-12));
    REQUIRE(le.se == 0.0);

    ModelSpec fading = make_single1d(0.5, -0.505, 0.05, 2.0, 2.0);
    le = boundary_lambda(fading, origin, 0);
    REQUIRE(le.value == Catch::Approx(-0.0025).margin(1e-12));

    // degenerate prey pair: both environments share fixed point p = 2
    ModelSpec pp0 = make_predprey({2, 4}, {1, 2}, {1, 1}, {1, 1}, {0.1, 0.1}, {1, 1}, 2.0, 2.0);
    ClosedFormDensity pd = density_lv_boundary(2.0, 4.0, 1.0, 2.0, 2.0, 2.0);
    REQUIRE(pd.kind == ClosedFormDensity::Kind::PointMass);
    BoundaryMeasureRep prey;
    prey.I = {0};
    prey.form = BoundaryMeasureRep::Form::PointMass;
    prey.point = {pd.point};
    le = boundary_lambda(pp0, prey, 1);
    REQUIRE(le.value == Catch::Approx(1.0).margin(1e-12));

    // distinct prey fixed points: predator invasion rate from the density is
    // exactly 5/6 for these parameters
    ModelSpec pp = make_predprey({1, 2}, {1, 1}, {1, 1}, {0.5, 0.5}, {0.1, 0.1}, {1, 1}, 1.0, 2.0);
    ClosedFormDensity bd = density_lv_boundary(1.0, 2.0, 1.0, 1.0, 1.0, 2.0);
    BoundaryMeasureRep dens;
    dens.I = {0};
    dens.form = BoundaryMeasureRep::Form::Density;
    dens.density = &bd;
    le = boundary_lambda(pp, dens, 1);
    REQUIRE(le.value == Catch::Approx(5.0 / 6).margin(1e-8));

    // resident species invasion rate vanishes through the Means path
    ModelSpec lv3 = make_lv3comp({{2, 4}, {2, 4}, {1, 1.2}}, {{2, 2}, {2, 2}, {2, 2}},
                                 {{1, 1}, {1, 1}, {1, 1}}, {{1, 1}, {1, 1}, {1, 1}}, 2.0, 2.0);
    Vec means12 = interior_means(lv3, {0, 1});
    BoundaryMeasureRep face;
    face.I = {0, 1};
    face.form = BoundaryMeasureRep::Form::Means;
    face.means = means12;
    le = boundary_lambda(lv3, face, 2);
    REQUIRE(le.value == Catch::Approx(-0.9).margin(1e-12));
    le = boundary_lambda(lv3, face, 0);
    REQUIRE(le.value == Catch::Approx(0.0).margin(1e-12));
    le = boundary_lambda(lv3, face, 1);
    REQUIRE(le.value == Catch::Approx(0.0).margin(1e-12));

    // chain model Means path reproduces the cascade formula exactly
    ModelSpec chain = make_foodchain({1.0, 1.0}, {2.0, 1.0}, {0.25}, {1.0}, {0.5}, 2.0, 2.0);
    Vec m1 = interior_means(chain, {0});
    BoundaryMeasureRep chface;
    chface.I = {0};
    chface.form = BoundaryMeasureRep::Form::Means;
    chface.means = m1;
    le = boundary_lambda(chain, chface, 1);
    REQUIRE(le.value == Catch::Approx(1.0 * 1.0 / 2.0 - 0.25).margin(1e-12));

    // Monte Carlo dispatch agrees with the exact density value
    ModelSpec prey_only = restrict_model(pp, {0});
    SimConfig cfg;
    cfg.t_max = 4000.0;
    cfg.record_dt = 0.05;
    cfg.seed = 2024;
    Trajectory traj = simulate(prey_only, {1.5}, 0, cfg);
    BoundaryMeasureRep mc;
    mc.I = {0};
    mc.form = BoundaryMeasureRep::Form::MonteCarlo;
    mc.traj = &traj;
    le = boundary_lambda(pp, mc, 1);
    REQUIRE(le.se > 0.0);
    REQUIRE(le.value == Catch::Approx(5.0 / 6).margin(std::max(0.05, 4.0 * le.se)));

    // Means with switching interactions falls back to Monte Carlo only when
    // a simulation budget is supplied
    ModelSpec swpp =
        make_predprey({1, 2}, {1, 1}, {1, 2}, {0.5, 0.5}, {0.1, 0.1}, {1, 1}, 1.0, 2.0);
    BoundaryMeasureRep swm;
    swm.I = {0};
    swm.form = BoundaryMeasureRep::Form::Means;
    swm.means = {1.4};
    REQUIRE_THROWS_AS(boundary_lambda(swpp, swm, 1), ModelError);
    SimConfig fb;
    fb.t_max = 500.0;
    fb.seed = 7;
    le = boundary_lambda(swpp, swm, 1, &fb);
    REQUIRE_FALSE(le.warnings.empty());
    REQUIRE(le.se > 0.0);
}

TEST_CASE("density table export and descriptor", "[analytic]") {
    ClosedFormDensity d = density_1d_logistic(0.5, 1.0, 0.05, 2.0, 2.0);
    std::ostringstream csv;
    density_to_csv(d, csv);
    std::istringstream in(csv.str());
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "x,h1,h2");
    int rows = 0;
    bool checked = false;
    while (std::getline(in, line)) {
        ++rows;
        if (rows == 120) {
            std::istringstream ls(line);
            std::string xs, h1s, h2s;
            std::getline(ls, xs, ',');
            std::getline(ls, h1s, ',');
            std::getline(ls, h2s, ',');
            double x = std::stod(xs);
            REQUIRE(std::stod(h1s) == Catch::Approx(d.h1(x)).margin(1e-15));
            REQUIRE(std::stod(h2s) == Catch::Approx(d.h2(x)).margin(1e-15));
            checked = true;
        }
    }
    REQUIRE(rows >= 100);
    REQUIRE(checked);

    nlohmann::json j = nlohmann::json::parse(density_descriptor_json(d));
    REQUIRE(j["kind"] == "growth_logistic");
    REQUIRE(j["support"][0].get<double>() == Catch::Approx(20.0));
    REQUIRE(j["support"][1].is_null());
    REQUIRE(j["normalization"].get<double>() == Catch::Approx(d.C1));
    REQUIRE(j["masses"][0].get<double>() == Catch::Approx(d.mass1));
    REQUIRE(j["exponents"].contains("gamma"));

    ClosedFormDensity p = density_lv_boundary(2.0, 4.0, 1.0, 2.0, 2.0, 2.0);
    nlohmann::json jp = nlohmann::json::parse(density_descriptor_json(p));
    REQUIRE(jp["kind"] == "point_mass");
    REQUIRE(jp["point"].get<double>() == Catch::Approx(2.0));
}
