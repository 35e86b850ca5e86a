#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsl_gen.hpp"

#include "leibniz/desk.hpp"
#include "leibniz/io.hpp"
#include "leibniz/scenario.hpp"

#include <sstream>

using namespace leibniz;
using nlohmann::json;

namespace
{

Vector v1(double a)
{
    return Vector::Constant(1, a);
}

const Report* find_check(const ScenarioResult& r, const std::string& name)
{
    for (const auto& c : r.checks)
        if (c.check == name)
            return &c;
    return nullptr;
}

} // namespace

TEST_CASE("expression round trip preserves values on random trees")
{
    CounterRng rng(8);
    for (int trial = 0; trial < 100; ++trial)
    {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(3));
        const FnExpr f = testgen::random_expr(rng, n, Vector::Zero(n), 3);
        const FnExpr g = io::expr_from_json(json::parse(io::to_json(f).dump()), "f");
        for (int k = 0; k < 5; ++k)
        {
            Vector x(n);
            for (Eigen::Index i = 0; i < n; ++i)
                x[i] = rng.uniform(-2, 2);
            CHECK(eval(g, x) == eval(f, x));
        }
    }
}

TEST_CASE("set, measure and model round trips")
{
    const SetRep s(2, {Matrix::Identity(2, 2), Matrix::Constant(2, 1, 0.5)});
    const SetRep t = io::set_from_json(io::to_json(s), "s");
    CHECK(t.piece_count() == 2);
    CHECK(t.all_vertices() == s.all_vertices());

    const MeasureSpace m = io::measure_from_json(json::parse(R"({"uniform": {"n": 4, "a": 0, "b": 1}})"), "m");
    CHECK(m.size() == 4);
    CHECK(m[2].param[0] == doctest::Approx(0.625));

    for (const DPModel& d : {desk::two_shock(), desk::ge_constraint(), desk::rank_deficient(), desk::tie()})
    {
        const DPModel e = io::model_from_json(json::parse(io::to_json(d).dump()), "model");
        CHECK(e.size() == d.size());
        CHECK(e.shocks() == d.shocks());
        CHECK((value_iteration(e, 1e-10).values - value_iteration(d, 1e-10).values).cwiseAbs().maxCoeff() == 0);
    }

    const DPModel grid = io::model_from_json(json::parse(R"({
        "states": {"grid": {"lo": -1, "hi": 1, "step": 0.5}}, "beta": 0.5,
        "cost": [{"op": "affine", "a": [0, 1], "b": 1}], "constraints": {"kind": "all"}})"),
                                             "model");
    CHECK(grid.size() == 5);
}

TEST_CASE("malformed documents raise parse errors")
{
    const char* bad[] = {
        R"({"op": "nope"})",
        R"({"op": "affine"})",
        R"({"op": "sum", "args": []})",
        R"({"op": "quad", "q": [[1, 0]], "a": [0, 0]})",
    };
    for (const char* b : bad)
        CHECK_THROWS_AS(io::expr_from_json(json::parse(b), "f"), io::ParseError);
    CHECK_THROWS_AS(io::set_from_json(json::parse(R"({"dim": 2, "pieces": [[[1]]]})"), "s"), io::ParseError);
    CHECK_THROWS_AS(io::measure_from_json(json::parse(R"({"weights": [-1]})"), "m"), io::ParseError);
    CHECK_THROWS_AS(io::model_from_json(json::parse(R"({"states": [[0]], "beta": 1.5,
        "cost": [{"op": "const", "dim": 2, "b": 0}], "constraints": {"kind": "all"}})"),
                                        "model"),
                    io::ParseError);

    const char* scenarios[] = {
        R"({"scenarios": [{"name": "a", "kind": "unknown", "inputs": {}}]})",
        R"({"scenarios": [{"kind": "dp", "inputs": {}}]})",
        R"({"scenarios": [{"name": "a", "kind": "lyapunov", "inputs": {"family": "zero-one"}}]})",
        R"({"scenarios": [{"name": "a", "kind": "geometry", "inputs": {"random": {"count": 2}}}]})",
        R"({"scenarios": [{"name": "a", "kind": "leibniz", "tolerances": {"subdiff": 0},
            "inputs": {"mode": "subdiff", "f": {"op": "abs", "a": [1]}, "x": [0]}}]})",
        R"({"scenarios": [{"builtin": "neg-abs"}, {"builtin": "neg-abs"}]})",
        R"({"scenarios": [{"builtin": "no-such-thing"}]})",
        R"({"scenarios": 3})",
    };
    for (const char* s : scenarios)
        CHECK_THROWS_AS(load_scenarios(json::parse(s)), io::ParseError);
}

TEST_CASE("a seed override satisfies the sampling requirement")
{
    const json doc = json::parse(R"({"scenarios": [{"name": "g", "kind": "geometry", "inputs": {"random": {"count": 2}}}]})");
    CHECK_THROWS_AS(load_scenarios(doc), io::ParseError);
    CHECK(load_scenarios(doc, 9).size() == 1);
}

TEST_CASE("builtin catalogue")
{
    const auto& all = builtin_scenarios();
    CHECK(all.size() >= 12);
    for (const char* name : {"neg-abs", "lyapunov-01", "clarke-leibniz-regular", "euler-quadratic", "envelope-nonviable",
                             "mfcq-rank-deficient", "nlp-multipliers"})
        CHECK(find_builtin(name).has_value());
    for (std::size_t i = 1; i < all.size(); ++i)
        CHECK(all[i - 1].name < all[i].name);
    for (const auto& s : all)
    {
        CHECK_FALSE(s.description.empty());
        // Builtins survive a JSON round trip and validate as files.
        CHECK(load_scenarios(json{{"scenarios", {to_json(s)}}}).size() == 1);
    }
}

TEST_CASE("neg-abs reports the two-point limiting set")
{
    const auto r = run_scenario(*find_builtin("neg-abs"), {});
    const Report* c = find_check(r, "subdifferential");
    REQUIRE(c);
    CHECK(c->pass);
    const SetRep lim = io::set_from_json(c->extras["limiting"], "limiting");
    CHECK(lim.piece_count() == 2);
    CHECK(support(lim, v1(1)) == 1.0);
    CHECK(support(lim, v1(-1)) == 1.0);
    CHECK(distance_to_set(v1(0), lim) == doctest::Approx(1));
}

TEST_CASE("lyapunov-01 writes the gap column 1/(2N)")
{
    const auto r = run_scenario(*find_builtin("lyapunov-01"), {});
    REQUIRE(r.tables.count("lyapunov-01__lyapunov.csv") == 1);
    std::istringstream in(r.tables.at("lyapunov-01__lyapunov.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "N,gap");
    int rows = 0;
    while (std::getline(in, line))
    {
        const auto comma = line.find(',');
        const double n = std::stod(line.substr(0, comma));
        const double gap = std::stod(line.substr(comma + 1));
        CHECK(std::abs(gap - 0.5 / n) <= 1e-12);
        ++rows;
    }
    CHECK(rows == 7);
}

TEST_CASE("exit status contract")
{
    CHECK(exit_status({}) == 0);
    CHECK(render_report({}) == "{\n  \"reports\": []\n}\n");

    const auto control = run_all({*find_builtin("envelope-nonviable")}, {}, 1);
    CHECK(exit_status(control) == 0);
    RunOptions strict;
    strict.strict = true;
    CHECK(exit_status(run_all({*find_builtin("envelope-nonviable")}, strict, 1)) == 1);

    // A Clarke-Leibniz scenario whose expected outcome is wrong fails the run.
    Scenario wrong = *find_builtin("mfcq-rank-deficient");
    wrong.inputs["checks"][0]["expect_outcome"] = "pass";
    CHECK(exit_status(run_all({wrong}, {}, 1)) == 1);

    // 12 atoms of 4 generic points: 4^12 selector sums exceed the piece cap.
    json map = json::array();
    json w = json::array();
    CounterRng rng(3);
    for (int i = 0; i < 12; ++i)
    {
        json piece = json::array();
        for (int k = 0; k < 4; ++k)
            piece.push_back(json::array({json::array({rng.uniform(), rng.uniform()})}));
        map.push_back({{"dim", 2}, {"pieces", piece}});
        w.push_back(1.0 / 12);
    }
    const auto big = load_scenarios(
        json{{"scenarios", {{{"name", "big"}, {"kind", "integral"}, {"inputs", {{"map", map}, {"measure", {{"weights", w}}}}}}}}});
    const auto res = run_all(big, {}, 1);
    CHECK(res[0].capacity_exceeded);
    CHECK(exit_status(res) == 3);
}

TEST_CASE("tolerance scaling and seeds")
{
    Scenario s = *find_builtin("geometry-support");
    RunOptions a;
    a.seed = 1;
    RunOptions b;
    b.seed = 2;
    const auto ra = render_report(run_all({s}, a, 1));
    CHECK(ra == render_report(run_all({s}, a, 1)));
    CHECK(ra != render_report(run_all({s}, b, 1)));

    // Shrinking tolerances by 1e-30 turns rounding-level residuals into failures.
    RunOptions tight;
    tight.tol_scale = 1e-30;
    const auto r = run_scenario(*find_builtin("euler-quadratic"), tight);
    const Report* c = find_check(r, "euler_inclusion(x=0.3, w=0)");
    REQUIRE(c);
    CHECK(c->pass == (c->max_residual <= 1e-36));
}
