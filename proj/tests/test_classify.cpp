#include <catch2/catch_amalgamated.hpp>

#include "pdmp/classify.hpp"
#include "pdmp/families.hpp"

#include <json.hpp>

using namespace pdmp;

namespace {

const TableRow* find_row(const InvasionTable& t, const std::vector<int>& I) {
    for (const TableRow& r : t.rows)
        if (r.I == I) return &r;
    return nullptr;
}

bool was_rejected(const InvasionTable& t, const std::vector<int>& I) {
    for (const auto& r : t.rejected)
        if (r == I) return true;
    return false;
}

InvasionTable synthetic_table(int n, const std::vector<Vec>& rows) {
    InvasionTable t;
    t.n = n;
    for (const Vec& lam : rows) {
        TableRow r;
        r.I = {};
        r.lambda = lam;
        r.se.assign(n, 0.0);
        r.resident.assign(n, 0);
        r.unresolved.assign(n, 0);
        t.rows.push_back(std::move(r));
    }
    return t;
}

}  // namespace

TEST_CASE("minmax weight search on hand-built tables", "[classify]") {
    // one-species table: the simplex is a single point
    auto r = minmax_weights(synthetic_table(1, {{1.0}}));
    REQUIRE(r.has_value());
    REQUIRE(r->p.size() == 1);
    REQUIRE(r->p[0] == Catch::Approx(1.0));
    REQUIRE(r->rho == Catch::Approx(1.0));

    // symmetric two-row game: equal weights balance the two rows at 0.5
    r = minmax_weights(synthetic_table(2, {{-1.0, 2.0}, {2.0, -1.0}}));
    REQUIRE(r.has_value());
    REQUIRE(r->p[0] == Catch::Approx(0.5).margin(1e-9));
    REQUIRE(r->p[1] == Catch::Approx(0.5).margin(1e-9));
    REQUIRE(r->rho == Catch::Approx(0.5).margin(1e-9));

    // a row with no positive direction is infeasible
    REQUIRE_FALSE(minmax_weights(synthetic_table(2, {{-1.0, -1.0}})).has_value());

    // weights stay strictly positive even when one species dominates
    r = minmax_weights(synthetic_table(2, {{5.0, 0.1}}));
    REQUIRE(r.has_value());
    REQUIRE(r->p[0] > 0.0);
    REQUIRE(r->p[1] > 0.0);

    // positive scaling leaves feasibility and the argmax alone, scales rho
    auto base = minmax_weights(synthetic_table(2, {{-1.0, 2.0}, {2.0, -1.0}}));
    auto scaled = minmax_weights(synthetic_table(2, {{-3.0, 6.0}, {6.0, -3.0}}));
    REQUIRE(base.has_value());
    REQUIRE(scaled.has_value());
    REQUIRE(scaled->rho == Catch::Approx(3.0 * base->rho).margin(1e-9));
    REQUIRE(scaled->p[0] == Catch::Approx(base->p[0]).margin(1e-9));

    // three-species refinement: optimum at p = (0.25, 0.25, 0.5) is found to
    // grid accuracy; rows are built so the three constraints balance there
    r = minmax_weights(synthetic_table(3, {{4.0, 0.0, -1.0}, {0.0, 4.0, -1.0}, {-2.0, -2.0, 3.0}}));
    REQUIRE(r.has_value());
    REQUIRE(r->rho == Catch::Approx(0.5).margin(1e-6));
    REQUIRE(r->p[0] == Catch::Approx(0.25).margin(1e-6));
    REQUIRE(r->p[2] == Catch::Approx(0.5).margin(1e-6));

    // unresolved sign flags poison the search
    InvasionTable bad = synthetic_table(2, {{1.0, 1.0}});
    bad.rows[0].unresolved[1] = 1;
    REQUIRE_THROWS_AS(minmax_weights(bad), ModelError);
}

TEST_CASE("single species table and verdicts", "[classify]") {
    MethodConfig cfg;

    // growth-vs-logistic configuration: origin row plus the interior density
    ModelSpec fig1 = make_single1d(0.5, 1.0, 0.05, 2.0, 2.0);
    InvasionTable t = invasion_table(fig1, cfg);
    REQUIRE(t.rows.size() == 2);
    const TableRow* origin = find_row(t, {});
    REQUIRE(origin != nullptr);
    REQUIRE(origin->lambda[0] == Catch::Approx(0.75).margin(1e-12));
    REQUIRE(origin->form == "point-mass");
    const TableRow* interior = find_row(t, {0});
    REQUIRE(interior != nullptr);
    REQUIRE(interior->interior);
    REQUIRE(interior->form == "density");
    REQUIRE(std::abs(interior->lambda[0]) < 1e-8);  // its own rate vanishes

    Verdict v = classify(fig1, cfg);
    REQUIRE(v.outcome == Outcome::PersistAll);
    REQUIRE(v.rho == Catch::Approx(0.75).margin(1e-12));
    REQUIRE(v.weights == Vec{1.0});
    REQUIRE(v.unique_measure);  // the two drift fields differ on (0, inf)
    REQUIRE(v.bracket_rank == 1);

    // decay outweighs growth: no axis measure, extinction to the origin with
    // probability one and no accessibility caveat
    ModelSpec dies = make_single1d(0.5, -0.505, 0.05, 2.0, 2.0);
    Verdict w = classify(dies, cfg);
    REQUIRE(w.outcome == Outcome::Extinction);
    REQUIRE(w.table.rows.size() == 1);
    REQUIRE(w.table.rows[0].lambda[0] == Catch::Approx(-0.0025).margin(1e-12));
    REQUIRE(was_rejected(w.table, {0}));
    REQUIRE(w.attractors.size() == 1);
    REQUIRE(w.attractors[0].I.empty());
    REQUIRE(w.attractors[0].probability == "one");
    REQUIRE_FALSE(w.attractors[0].accessibility_assumed);
    REQUIRE(w.exhaustive);
}

TEST_CASE("predator-prey table omits the predator axis", "[classify]") {
    MethodConfig cfg;
    ModelSpec pp = make_predprey({2, 4}, {1, 2}, {1, 1}, {1, 1}, {0.1, 0.1}, {1, 1}, 2.0, 2.0);
    InvasionTable t = invasion_table(pp, cfg);

    const TableRow* origin = find_row(t, {});
    REQUIRE(origin != nullptr);
    REQUIRE(origin->lambda[0] == Catch::Approx(3.0).margin(1e-12));
    REQUIRE(origin->lambda[1] == Catch::Approx(-1.0).margin(1e-12));

    // the predator dies out without the prey
    REQUIRE(find_row(t, {1}) == nullptr);
    REQUIRE(was_rejected(t, {1}));

    // both environments share the fixed point 2, so the prey axis measure
    // degenerates to a point mass and the predator invades at 2 - 1 = 1
    const TableRow* prey = find_row(t, {0});
    REQUIRE(prey != nullptr);
    REQUIRE(prey->form == "point-mass");
    REQUIRE(prey->lambda[1] == Catch::Approx(1.0).margin(1e-12));

    Verdict v = classify(pp, cfg);
    REQUIRE(v.outcome == Outcome::PersistAll);
    // balancing 3*p1 - p2 against p2 puts the optimum at (0.4, 0.6)
    REQUIRE(v.rho == Catch::Approx(0.6).margin(1e-9));
    REQUIRE(v.weights[0] == Catch::Approx(0.4).margin(1e-9));
    REQUIRE(v.unique_measure);
}

TEST_CASE("two-species explosive-growth verdicts match the sample paths", "[classify]") {
    MethodConfig cfg;

    // coexistence configuration: every boundary measure is invadable
    ModelSpec a = make_expl2d(1.0, 1.0, 0.75, 0.05, 0.5, 4.0, 0.25, 0.025, 2.0, 2.0);
    InvasionTable ta = invasion_table(a, cfg);
    const TableRow* ax1 = find_row(ta, {0});
    const TableRow* ax2 = find_row(ta, {1});
    REQUIRE(ax1 != nullptr);
    REQUIRE(ax2 != nullptr);
    REQUIRE(ax1->form == "density");
    REQUIRE(ax2->form == "density");
    REQUIRE(ax1->lambda[1] == Catch::Approx(2.2166667).margin(1e-6));
    REQUIRE(ax2->lambda[0] == Catch::Approx(0.55).margin(1e-6));
    Verdict va = classify(a, cfg);
    REQUIRE(va.outcome == Outcome::PersistAll);
    REQUIRE(va.unique_measure);

    // steep interaction configuration: both axes are transversal attractors,
    // so the process settles on one of them; which one is an accessibility
    // question the rates alone cannot decide
    ModelSpec b = make_expl2d(0.95, 80.0 / 9.0, 8.0, 7.5, 1.0, 10.0, 8.0, 10.0, 2.0, 2.0);
    InvasionTable tb = invasion_table(b, cfg);
    REQUIRE(find_row(tb, {0})->lambda[1] == Catch::Approx(-0.6493056).margin(1e-6));
    REQUIRE(find_row(tb, {1})->lambda[0] == Catch::Approx(-0.2368056).margin(1e-6));
    Verdict vb = classify(b, cfg);
    REQUIRE(vb.outcome == Outcome::Extinction);
    REQUIRE(vb.attractors.size() == 2);
    REQUIRE(vb.exhaustive);  // together the two faces capture every limit
    for (const auto& at : vb.attractors) {
        REQUIRE(at.probability == "positive");
        REQUIRE(at.local_attraction);
        REQUIRE(at.accessibility_assumed);
    }
}

TEST_CASE("three-species competitive chain of verdicts", "[classify]") {
    MethodConfig cfg;
    ModelSpec lv3 = make_lv3comp({{2, 4}, {2, 4}, {1, 1.2}}, {{2, 2}, {2, 2}, {2, 2}},
                                 {{1, 1}, {1, 1}, {1, 1}}, {{1, 1}, {1, 1}, {1, 1}}, 2.0, 2.0);
    InvasionTable t = invasion_table(lv3, cfg);

    // all three axes carry measures; the cyclically disadvantaged pairs do not
    REQUIRE(find_row(t, {0}) != nullptr);
    REQUIRE(find_row(t, {1}) != nullptr);
    REQUIRE(find_row(t, {2}) != nullptr);
    REQUIRE(was_rejected(t, {0, 2}));
    REQUIRE(was_rejected(t, {1, 2}));

    const TableRow* pair01 = find_row(t, {0, 1});
    REQUIRE(pair01 != nullptr);
    REQUIRE(pair01->form == "means");
    REQUIRE(pair01->lambda[2] == Catch::Approx(-0.9).margin(1e-10));

    Verdict v = classify(lv3, cfg);
    REQUIRE(v.outcome == Outcome::Extinction);
    REQUIRE(v.attractors.size() == 1);
    REQUIRE(v.attractors[0].I == std::vector<int>{0, 1});
    REQUIRE(v.attractors[0].probability == "one");
    REQUIRE(v.attractors[0].accessibility_assumed);
    REQUIRE(v.exhaustive);
}

TEST_CASE("food chain recursion climbs one trophic level at a time", "[classify]") {
    MethodConfig cfg;

    // strong top link: the whole chain persists and the brackets certify a
    // unique interior measure (the switched basal growth propagates upward)
    ModelSpec up = make_foodchain({1.5, 0.5}, {2.0, 1.0, 1.0}, {0.25, 0.5}, {1.0, 3.0},
                                  {0.5, 0.5}, 2.0, 2.0);
    InvasionTable tu = invasion_table(up, cfg);
    REQUIRE(find_row(tu, {0}) != nullptr);
    REQUIRE(was_rejected(tu, {1}));
    REQUIRE(was_rejected(tu, {2}));
    REQUIRE(was_rejected(tu, {0, 2}));
    const TableRow* basal = find_row(tu, {0});
    REQUIRE(basal->form == "density");
    REQUIRE(basal->lambda[1] == Catch::Approx(0.25).margin(1e-8));
    const TableRow* pair = find_row(tu, {0, 1});
    REQUIRE(pair != nullptr);
    REQUIRE(pair->lambda[2] == Catch::Approx(0.1).margin(1e-10));
    Verdict vu = classify(up, cfg);
    REQUIRE(vu.outcome == Outcome::PersistAll);
    REQUIRE(vu.unique_measure);

    // weak top link: the top predator starves while the lower chain persists
    ModelSpec down = make_foodchain({1.5, 0.5}, {2.0, 1.0, 1.0}, {0.25, 0.5}, {1.0, 1.0},
                                    {0.5, 0.5}, 2.0, 2.0);
    Verdict vd = classify(down, cfg);
    REQUIRE(vd.outcome == Outcome::Extinction);
    REQUIRE(vd.attractors.size() == 1);
    REQUIRE(vd.attractors[0].I == std::vector<int>{0, 1});
    REQUIRE(vd.attractors[0].probability == "one");
    const TableRow* p01 = find_row(vd.table, {0, 1});
    REQUIRE(p01->lambda[2] == Catch::Approx(-0.3).margin(1e-10));
}

TEST_CASE("environment relabeling leaves the table and verdict alone", "[classify]") {
    MethodConfig cfg;
    ModelSpec m = make_single1d(0.5, 1.0, 0.05, 2.0, 3.0);

    // same model with the two environments stored in the opposite order
    ModelSpec sw = m;
    std::swap(sw.fields[0], sw.fields[1]);
    std::swap(sw.switching.q[0][1], sw.switching.q[1][0]);
    if (sw.gauge) std::swap(sw.gauge->env_weight[0], sw.gauge->env_weight[1]);

    InvasionTable t1 = invasion_table(m, cfg);
    InvasionTable t2 = invasion_table(sw, cfg);
    REQUIRE(t1.rows.size() == t2.rows.size());
    for (std::size_t r = 0; r < t1.rows.size(); ++r) {
        REQUIRE(t1.rows[r].I == t2.rows[r].I);
        REQUIRE(t1.rows[r].form == t2.rows[r].form);
        for (int j = 0; j < t1.n; ++j)
            REQUIRE(t1.rows[r].lambda[j] == Catch::Approx(t2.rows[r].lambda[j]).margin(1e-12));
    }

    Verdict v1 = classify(m, cfg);
    Verdict v2 = classify(sw, cfg);
    REQUIRE(v1.outcome == v2.outcome);
    REQUIRE(v1.rho == Catch::Approx(v2.rho).margin(1e-12));
    REQUIRE(v1.unique_measure == v2.unique_measure);
}

TEST_CASE("resident rates vanish on every representation", "[classify]") {
    MethodConfig cfg;
    std::vector<ModelSpec> models;
    models.push_back(make_single1d(0.5, 1.0, 0.05, 2.0, 2.0));
    models.push_back(make_predprey({2, 4}, {1, 2}, {1, 1}, {1, 1}, {0.1, 0.1}, {1, 1}, 2.0, 2.0));
    models.push_back(make_lv3comp({{2, 4}, {2, 4}, {1, 1.2}}, {{2, 2}, {2, 2}, {2, 2}},
                                  {{1, 1}, {1, 1}, {1, 1}}, {{1, 1}, {1, 1}, {1, 1}}, 2.0, 2.0));
    models.push_back(make_foodchain({1.5, 0.5}, {2.0, 1.0, 1.0}, {0.25, 0.5}, {1.0, 3.0},
                                    {0.5, 0.5}, 2.0, 2.0));
    for (const ModelSpec& m : models) {
        InvasionTable t = invasion_table(m, cfg);
        for (const TableRow& row : t.rows)
            for (int j = 0; j < t.n; ++j)
                if (row.resident[j]) REQUIRE(std::abs(row.lambda[j]) < 1e-8);
    }
}

TEST_CASE("custom models declare their lattice and may stay unresolved", "[classify]") {
    // one regulated species plus an invader whose rate is exactly zero: the
    // Monte Carlo representation cannot resolve its sign at any budget
    ModelSpec m;
    m.n = 2;
    m.n0 = 2;
    m.family = Family::Custom;
    m.fields.resize(2);
    m.fields[0].fitness.push_back(Polynomial::parse("0.5 - x1^2", 2));
    m.fields[1].fitness.push_back(Polynomial::parse("1.5 - x1^2", 2));
    m.fields[0].fitness.push_back(Polynomial::parse("x1^2 - 1", 2));
    m.fields[1].fitness.push_back(Polynomial::parse("x1^2 - 1", 2));
    m.switching = SwitchLaw::constant2(2.0, 2.0);

    MethodConfig cfg;
    cfg.sim.t_max = 300.0;
    cfg.sim.seed = 99;
    REQUIRE_THROWS_AS(invasion_table(m, cfg), ModelError);  // no lattice declared

    cfg.lattice = {{0}};
    InvasionTable t = invasion_table(m, cfg);
    const TableRow* axis = find_row(t, {0});
    REQUIRE(axis != nullptr);
    REQUIRE(axis->form == "monte-carlo");
    REQUIRE(axis->se[1] > 0.0);
    // E[x1^2] = E[a] = 1 along the axis measure, so lambda_2 is exactly zero
    REQUIRE(std::abs(axis->lambda[1]) < 3.5 * axis->se[1]);
    REQUIRE(axis->unresolved[1]);

    Verdict v = classify(m, cfg);
    REQUIRE(v.outcome == Outcome::Inconclusive);
    REQUIRE_FALSE(v.unresolved.empty());
}

TEST_CASE("verdict document serializes the decision trail", "[classify]") {
    MethodConfig cfg;
    ModelSpec m = make_single1d(0.5, 1.0, 0.05, 2.0, 2.0);
    Verdict v = classify(m, cfg);
    nlohmann::json j = nlohmann::json::parse(verdict_json(m, v));
    REQUIRE(j["outcome"] == "persist_all");
    REQUIRE(j["model"]["family"] == "single1d");
    REQUIRE(j["minmax"]["rho"].get<double>() == Catch::Approx(0.75));
    REQUIRE(j["unique_measure"] == true);
    REQUIRE(j["table"].size() == 2);
    REQUIRE(j["table"][0]["species"].size() == 0);
    REQUIRE(j["table"][0]["lambda"][0].get<double>() == Catch::Approx(0.75));

    ModelSpec b = make_expl2d(0.95, 80.0 / 9.0, 8.0, 7.5, 1.0, 10.0, 8.0, 10.0, 2.0, 2.0);
    Verdict vb = classify(b, cfg);
    nlohmann::json jb = nlohmann::json::parse(verdict_json(b, vb));
    REQUIRE(jb["outcome"] == "extinction");
    REQUIRE(jb["attractors"].size() == 2);
    REQUIRE(jb["attractors"][0]["probability"] == "positive");
}
