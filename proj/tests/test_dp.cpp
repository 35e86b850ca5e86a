#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "leibniz/desk.hpp"
#include "leibniz/dp.hpp"
#include "leibniz/random.hpp"

#include <cmath>
#include <functional>

using namespace leibniz;

namespace
{

Vector v1(double a)
{
    return Vector::Constant(1, a);
}

std::size_t state_at(const DPModel& m, double x)
{
    const std::size_t i = m.nearest_state(v1(x));
    REQUIRE(std::abs(m.states[i][0] - x) < 1e-9);
    return i;
}

// Deterministic single-shock problem: min over all action sequences of
// sum_t beta^t u(x_t, x_{t+1}), by exhaustive enumeration.
double brute_force_horizon(const DPModel& m, std::size_t x, std::size_t horizon)
{
    if (horizon == 0)
        return 0;
    double best = INFINITY;
    for (std::size_t y : m.feasible(x, 0))
    {
        Vector z(2);
        z << m.states[x][0], m.states[y][0];
        best = std::min(best, eval(m.cost[0], z) + m.beta * brute_force_horizon(m, y, horizon - 1));
    }
    return best;
}

// Random 1-D model: grid of k points, random convex-ish quadratic costs,
// random kernel, either every state admissible or a random box.
DPModel random_model(CounterRng& rng)
{
    DPModel m;
    const std::size_t k = 3 + rng.below(5);
    for (std::size_t i = 0; i < k; ++i)
        m.states.push_back(v1(-1 + 2.0 * static_cast<double>(i) / static_cast<double>(k - 1)));
    const std::size_t s = 1 + rng.below(3);
    Matrix p(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
    for (Eigen::Index r = 0; r < p.rows(); ++r)
    {
        for (Eigen::Index c = 0; c < p.cols(); ++c)
            p(r, c) = rng.uniform(0.05, 1.0);
        p.row(r) /= p.row(r).sum();
    }
    m.kernel = StochasticKernel(p);
    m.beta = rng.uniform(0.0, 0.95);
    for (std::size_t w = 0; w < s; ++w)
    {
        Matrix q(2, 2);
        q << rng.uniform(0, 2), rng.uniform(-0.5, 0.5), 0, rng.uniform(0, 2);
        q(1, 0) = q(0, 1);
        Vector a(2);
        a << rng.uniform(-1, 1), rng.uniform(-1, 1);
        m.cost.push_back(FnExpr::quadratic(q, a, rng.uniform(-1, 1)));
    }
    if (rng.below(2) == 0)
        m.constraints = ConstraintMap::all_states(s);
    else
    {
        std::vector<BoxBounds> boxes;
        for (std::size_t w = 0; w < s; ++w)
            boxes.push_back({v1(rng.uniform(-1, -0.2)), v1(rng.uniform(0.2, 1)), {}, {}});
        m.constraints = ConstraintMap::box(boxes);
    }
    return m;
}

Matrix random_table(CounterRng& rng, const DPModel& m)
{
    Matrix t(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.shocks()));
    for (Eigen::Index i = 0; i < t.size(); ++i)
        t.data()[i] = rng.uniform(-5, 5);
    return t;
}

} // namespace

TEST_CASE("bellman operator on the unit-cost model")
{
    const DPModel m = desk::unit_cost();
    const Matrix t0 = bellman_operator(m, Matrix::Zero(2, 1));
    CHECK(t0(0, 0) == 1.0);
    CHECK(t0(1, 0) == 1.0);

    const ValueTable v = value_iteration(m, 1e-8);
    CHECK(std::abs(v.values(0, 0) - 2) <= 1e-8);
    CHECK(std::abs(v.values(1, 0) - 2) <= 1e-8);
    const PolicyTable g = policy_multifunction(m, v);
    for (std::size_t x = 0; x < 2; ++x)
    {
        CHECK(g.argmin[0][x] == std::vector<std::size_t>{0});
        CHECK(g.selector[0][x] == 0);
    }
    CHECK(finite_horizon_oracle(m, 3, 0, 0) == doctest::Approx(1.75).epsilon(1e-15));
    CHECK(finite_horizon_oracle(m, 1, 1, 0) == doctest::Approx(1).epsilon(1e-15));
}

TEST_CASE("beta = 0 and constant costs")
{
    DPModel m = desk::quadratic(0.6, 0.0);
    const ValueTable v = value_iteration(m, 1e-10);
    CHECK(v.iterations == 1);
    for (std::size_t x = 0; x < m.size(); ++x)
        CHECK(std::abs(v.values(static_cast<Eigen::Index>(x), 0) - std::pow(m.states[x][0] - 0.6, 2)) < 1e-12);
    CHECK(v.min_gap >= 0);
    CHECK(v.min_gap < 1e-12);

    m = desk::unit_cost();
    m.cost = {FnExpr::constant(2, 1)};
    const ValueTable c = value_iteration(m, 1e-10);
    CHECK(std::abs(c.values(0, 0) - 2) <= 1e-10);
}

TEST_CASE("contraction, monotonicity and constant shifts on random tables")
{
    CounterRng rng(4242);
    for (int trial = 0; trial < 100; ++trial)
    {
        const DPModel m = random_model(rng);
        const Matrix a = random_table(rng, m);
        const Matrix b = random_table(rng, m);
        const Matrix ta = bellman_operator(m, a);
        const Matrix tb = bellman_operator(m, b);
        CHECK((ta - tb).cwiseAbs().maxCoeff() <= m.beta * (a - b).cwiseAbs().maxCoeff() + 1e-12);

        const Matrix hi = a.cwiseMax(b);
        CHECK(((bellman_operator(m, hi) - ta).array() >= -1e-12).all());

        const double c = rng.uniform(-3, 3);
        const Matrix shifted = bellman_operator(m, (a.array() + c).matrix());
        CHECK(((shifted - ta).array() - m.beta * c).abs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("fixed-point certificate and closed forms")
{
    CounterRng rng(99);
    for (int trial = 0; trial < 30; ++trial)
    {
        const DPModel m = random_model(rng);
        const double tol = 1e-9;
        const ValueTable v = value_iteration(m, tol);
        const double bound = m.beta == 0 ? tol : (1 - m.beta) * tol / m.beta;
        CHECK(v.bellman_residual <= bound + 1e-14);
        for (std::size_t w = 0; w < m.shocks(); ++w)
        {
            REQUIRE(v.closed_form[w].has_value());
            for (std::size_t x = 0; x < m.size(); ++x)
                CHECK(std::abs(eval(*v.closed_form[w], m.states[x]) -
                               v.values(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(w))) <=
                      v.bellman_residual + 1e-12);
        }
    }
}

TEST_CASE("finite-horizon oracle against exhaustive search and the tail bound")
{
    for (const DPModel& m : {desk::unit_cost(), desk::quadratic()})
    {
        const std::size_t x = m.size() - 1;
        for (std::size_t t = 1; t <= 3; ++t)
            CHECK(finite_horizon_oracle(m, t, x, 0) == doctest::Approx(brute_force_horizon(m, x, t)).epsilon(1e-12));
    }
    for (const DPModel& m : {desk::unit_cost(), desk::quadratic(), desk::two_shock(), desk::stay_put(),
                             desk::nonsmooth(), desk::boundary()})
    {
        const ValueTable v = value_iteration(m, 1e-12);
        const double sup = cost_sup_norm(m);
        for (std::size_t t = 1; t <= 8; ++t)
        {
            const double bound = std::pow(m.beta, static_cast<double>(t)) * sup / (1 - m.beta) + 1e-10;
            for (std::size_t w = 0; w < m.shocks(); ++w)
                for (std::size_t x = 0; x < m.size(); x += 7)
                    CHECK(std::abs(v.values(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(w)) -
                                   finite_horizon_oracle(m, t, x, w)) <= bound);
        }
    }
}

TEST_CASE("policy ties and lexicographic selector")
{
    const DPModel m = desk::tie();
    const ValueTable v = value_iteration(m, 1e-10);
    const PolicyTable g = policy_multifunction(m, v);
    CHECK(g.argmin[0][0] == std::vector<std::size_t>{0, 1});
    CHECK(g.selector[0][0] == 0);
    const Report r = strict_value_derivative_check(m, v, g, 0, 0);
    CHECK(r.verdict == Verdict::Inapplicable);
}

TEST_CASE("scaling and shifting costs leaves the policy unchanged")
{
    for (const DPModel& base : {desk::unit_cost(), desk::tie()})
    {
        DPModel scaled = base;
        const double c = 2.5;
        const double k = 3;
        scaled.cost = {c * base.cost[0] + FnExpr::constant(2, k)};
        const ValueTable v = value_iteration(base, 1e-12);
        const ValueTable vs = value_iteration(scaled, 1e-12);
        CHECK(policy_multifunction(base, v).argmin == policy_multifunction(scaled, vs).argmin);
        const Matrix expect = (c * v.values).array() + k / (1 - base.beta);
        CHECK((vs.values - expect).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("viability on full grids, x-independent boxes and y >= x")
{
    const DPModel full = desk::unit_cost();
    const ValueTable vf = value_iteration(full, 1e-10);
    const Viability a = check_viability(full, policy_multifunction(full, vf), 0, 0, 2.0);
    CHECK(a.lower);
    CHECK(a.upper);

    const DPModel box = desk::quadratic();
    const ValueTable vb = value_iteration(box, 1e-10);
    const Viability b = check_viability(box, policy_multifunction(box, vb), 10, 0, 0.15);
    CHECK(b.upper_automatic);
    CHECK(b.upper);

    const DPModel ge = desk::ge_constraint();
    const ValueTable vg = value_iteration(ge, 1e-10);
    const PolicyTable gg = policy_multifunction(ge, vg);
    for (std::size_t x = 0; x < ge.size(); ++x)
        CHECK(gg.selector[0][x] == x);
    const Viability c = check_viability(ge, gg, 10, 0, 0.15);
    CHECK_FALSE(c.lower);
    CHECK_FALSE(c.upper_automatic);
}

TEST_CASE("value-function subdifferentials")
{
    // beta = 0, u = |x| + y^2: best y = 0 and v = |x|.
    DPModel m = desk::quadratic(0.0, 0.0);
    Matrix q = Matrix::Zero(2, 2);
    q(1, 1) = 2;
    Vector ex(2), emx(2);
    ex << 1, 0;
    emx << -1, 0;
    m.cost = {FnExpr::quadratic(q, Vector::Zero(2)) + FnExpr::max_of({FnExpr::affine(ex), FnExpr::affine(emx)})};
    const ValueTable v = value_iteration(m, 1e-10);
    const SubdiffResult c = value_function_subdiff(m, v, 0, v1(0), SubdiffKind::Clarke);
    CHECK(support(c.set, v1(1)) == doctest::Approx(1));
    CHECK(support(c.set, v1(-1)) == doctest::Approx(1));

    const DPModel qm = desk::quadratic();
    const ValueTable vq = value_iteration(qm, 1e-10);
    for (double xb : {-0.7, 0.0, 0.35, 0.9})
    {
        const SubdiffResult s = value_function_subdiff(qm, vq, 0, v1(xb), SubdiffKind::Clarke);
        CHECK(s.exact);
        CHECK(support(s.set, v1(1)) == doctest::Approx(2 * (xb - 0.6)).epsilon(1e-12));
        CHECK(-support(s.set, v1(-1)) == doctest::Approx(2 * (xb - 0.6)).epsilon(1e-12));
    }
}

TEST_CASE("envelope inclusion: quadratic pass and y >= x negative control")
{
    const auto dirs = default_directions(1);
    const DPModel qm = desk::quadratic();
    const ValueTable vq = value_iteration(qm, 1e-10);
    const PolicyTable gq = policy_multifunction(qm, vq);
    const std::size_t x = state_at(qm, 0.3);
    CHECK(qm.states[gq.selector[0][x]][0] == doctest::Approx(0.2));
    const Report r = envelope_check(qm, vq, gq, x, 0, dirs);
    CHECK(r.pass);
    CHECK(r.verdict == Verdict::Pass);
    const Report sd = strict_value_derivative_check(qm, vq, gq, x, 0);
    CHECK(sd.pass);
    CHECK(sd.extras["grad_v"][0].get<double>() == doctest::Approx(2 * (0.3 - 0.6)).epsilon(1e-12));

    const DPModel ge = desk::ge_constraint();
    const ValueTable vg = value_iteration(ge, 1e-10);
    const PolicyTable gg = policy_multifunction(ge, vg);
    const Report n = envelope_check(ge, vg, gg, 10, 0, dirs);
    CHECK_FALSE(n.pass);
    CHECK_FALSE(n.hypotheses.at("lower_viability"));
    CHECK(n.verdict == Verdict::HypothesisViolation);
    CHECK(n.max_residual == doctest::Approx(1));
}

TEST_CASE("Euler residuals at optimal and perturbed policies")
{
    struct Case
    {
        DPModel model;
        double x;
    };
    for (const Case& c : {Case{desk::quadratic(), 0.3}, Case{desk::two_shock(), -0.4}, Case{desk::stay_put(), 0.2}})
    {
        const ValueTable v = value_iteration(c.model, 1e-12);
        const PolicyTable g = policy_multifunction(c.model, v);
        const std::size_t x = state_at(c.model, c.x);
        for (std::size_t w = 0; w < c.model.shocks(); ++w)
        {
            CHECK(euler_inclusion_residual(c.model, v, g, x, w, 1.0) <= 1e-6);
            const std::size_t y = g.selector[w][x];
            CHECK(euler_inclusion_residual(c.model, v, g, x, w, 1.0, y + 1) > 0.1);
        }
    }
    // Hand values for the two-shock optima: y = beta E[a | w] / (1 + beta).
    const DPModel ts = desk::two_shock();
    const ValueTable vt = value_iteration(ts, 1e-12);
    const PolicyTable gt = policy_multifunction(ts, vt);
    CHECK(ts.states[gt.selector[0][3]][0] == doctest::Approx(0.15));
    CHECK(ts.states[gt.selector[1][3]][0] == doctest::Approx(0.25));
}

TEST_CASE("boundary minimizer: the cone absorbs the gradient")
{
    const DPModel m = desk::boundary();
    const ValueTable v = value_iteration(m, 1e-12);
    const PolicyTable g = policy_multifunction(m, v);
    double prev = INFINITY;
    for (double r : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0})
    {
        const double res = euler_inclusion_residual(m, v, g, 4, 0, r);
        CHECK(res == doctest::Approx(std::max(0.0, 2 - r)).epsilon(1e-12));
        CHECK(res <= prev + 1e-15);
        prev = res;
    }
}

TEST_CASE("limiting Euler relations")
{
    const auto dirs = default_directions(1);
    const DPModel qm = desk::quadratic();
    const ValueTable vq = value_iteration(qm, 1e-12);
    const PolicyTable gq = policy_multifunction(qm, vq);
    const Report r = limiting_euler_check(qm, vq, gq, state_at(qm, 0.3), 0, dirs, 1.0);
    CHECK(r.pass);
    const double graph = r.extras["graph_residual_convexified"].get<double>();
    const double split = r.extras["split_residual_convexified"].get<double>();
    CHECK(graph <= 1e-6);
    CHECK(std::abs(graph - split) <= 1e-9);

    const DPModel ns = desk::nonsmooth();
    const ValueTable vn = value_iteration(ns, 1e-12);
    const PolicyTable gn = policy_multifunction(ns, vn);
    const std::size_t x = state_at(ns, 0.5);
    CHECK(ns.states[gn.selector[0][x]][0] == doctest::Approx(0).epsilon(1e-12));
    const Report n = limiting_euler_check(ns, vn, gn, x, 0, dirs, 1.0);
    const double raw = n.extras["split_residual_raw"].get<double>();
    const double conv = n.extras["split_residual_convexified"].get<double>();
    CHECK(raw >= conv);
    CHECK(raw == doctest::Approx(0.5));
    CHECK(conv <= 1e-12);
    CHECK(euler_inclusion_residual(ns, vn, gn, x, 0, 1.0) <= 1e-12);
}

TEST_CASE("MFCQ certificates and the rank-deficient control")
{
    const DPModel ge = desk::ge_constraint();
    const MfcqResult a = mfcq_check(ge, v1(0.3), v1(0.3), 0);
    CHECK(a.holds);
    CHECK(a.active == std::vector<std::size_t>{0});
    Vector grad(2);
    grad << 1, -1;
    CHECK(grad.dot(a.xi) < 0);
    CHECK(a.xi.cwiseAbs().maxCoeff() == doctest::Approx(1));

    const MfcqResult inactive = mfcq_check(ge, v1(0.3), v1(0.8), 0);
    CHECK(inactive.holds);
    CHECK(inactive.active.empty());

    const DPModel rd = desk::rank_deficient();
    const MfcqResult b = mfcq_check(rd, v1(0.3), v1(0.3), 0);
    CHECK_FALSE(b.rank_ok);
    CHECK_FALSE(b.holds);

    // x - y <= 0 together with y - x <= 0: both active, no strict direction.
    DPModel both = ge;
    Vector opp(2);
    opp << -1, 1;
    both.constraints.nlp[0].inequalities.push_back(FnExpr::affine(opp));
    const MfcqResult c = mfcq_check(both, v1(0.3), v1(0.3), 0);
    CHECK(c.rank_ok);
    CHECK_FALSE(c.direction_ok);
}

TEST_CASE("Lagrange multiplier sets")
{
    const DPModel ge = desk::ge_constraint();
    const ValueTable vg = value_iteration(ge, 1e-10);
    const MultiplierSet a = lagrange_multiplier_set(ge, vg, v1(0.3), v1(0.3), 0);
    REQUIRE(a.vertices.size() == 1);
    CHECK(std::abs(a.vertices[0][0] - 1) <= 1e-8);

    const DPModel tw = desk::twin_constraint();
    const ValueTable vt = value_iteration(tw, 1e-10);
    const MultiplierSet b = lagrange_multiplier_set(tw, vt, v1(0.3), v1(0.3), 0);
    REQUIRE(b.vertices.size() == 2);
    for (const auto& l : b.vertices)
    {
        CHECK(l.sum() == doctest::Approx(1));
        CHECK(l.minCoeff() >= 0);
        CHECK(l.cwiseAbs().maxCoeff() == doctest::Approx(1));
    }

    // Interior stationary point with inactive constraint: u = (y - 0.5)^2, y >= x at x = 0.
    DPModel in = ge;
    Matrix q = Matrix::Zero(2, 2);
    q(1, 1) = 2;
    Vector lin(2);
    lin << 0, -1;
    in.cost = {FnExpr::quadratic(q, lin, 0.25)};
    const ValueTable vi = value_iteration(in, 1e-10);
    const MultiplierSet c = lagrange_multiplier_set(in, vi, v1(0.0), v1(0.5), 0);
    REQUIRE(c.vertices.size() == 1);
    CHECK(c.vertices[0].norm() <= 1e-12);
}

TEST_CASE("NLP value-function formula")
{
    const auto dirs = default_directions(1);
    for (const DPModel& m : {desk::ge_constraint(), desk::twin_constraint()})
    {
        const ValueTable v = value_iteration(m, 1e-10);
        const PolicyTable g = policy_multifunction(m, v);
        const std::size_t x = state_at(m, 0.3);
        const SubdiffResult dv = value_function_subdiff(m, v, 0, m.states[x], SubdiffKind::Limiting);
        CHECK(support(dv.set, v1(1)) == doctest::Approx(1));
        CHECK(-support(dv.set, v1(-1)) == doctest::Approx(1));
        const Report r = nlp_value_subdiff_check(m, v, g, x, 0, dirs);
        CHECK(r.pass);
        CHECK(r.verdict == Verdict::Pass);
        CHECK(r.extras["finite_difference"][0].get<double>() == doctest::Approx(1));
        CHECK(r.extras["equality_asserted"].get<bool>());
    }
}

TEST_CASE("model validation and empty feasible sets")
{
    DPModel m = desk::quadratic();
    m.beta = 1.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m = desk::quadratic();
    m.constraints.boxes[0] = {v1(0.5), v1(0.2), {}, {}};
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m = desk::quadratic();
    m.constraints.boxes[0] = {v1(0.01), v1(0.02), {}, {}};
    CHECK_THROWS_AS(value_iteration(m, 1e-8), InapplicableError);
    m = desk::ge_constraint();
    m.cost = {FnExpr::affine(v1(1))};
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}
