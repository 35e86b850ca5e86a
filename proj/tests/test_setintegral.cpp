#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsl_gen.hpp"
#include "leibniz/random.hpp"
#include "leibniz/setintegral.hpp"

#include <cmath>
#include <numbers>

using namespace leibniz;

namespace
{

Vector v1(double a)
{
    return Vector::Constant(1, a);
}

Vector v2(double a, double b)
{
    Vector v(2);
    v << a, b;
    return v;
}

FnExpr abs_shift(double t)
{
    return FnExpr::max_of({FnExpr::affine(v1(1), -t), FnExpr::affine(v1(-1), t)});
}

// Every selector sum, enumerated by mixed-radix counting over atom points.
std::vector<Vector> selector_sums(const std::vector<std::vector<Vector>>& pts, const std::vector<double>& w)
{
    std::vector<Vector> out;
    std::vector<std::size_t> idx(pts.size(), 0);
    while (true)
    {
        Vector s = Vector::Zero(pts[0][0].size());
        for (std::size_t i = 0; i < pts.size(); ++i)
            s += w[i] * pts[i][idx[i]];
        out.push_back(s);
        std::size_t k = 0;
        while (k < pts.size() && ++idx[k] == pts[k].size())
            idx[k++] = 0;
        if (k == pts.size())
            break;
    }
    return out;
}

MeasureSpace weights_measure(const std::vector<double>& w)
{
    std::vector<Atom> atoms;
    for (double x : w)
        atoms.push_back({Vector::Zero(1), x});
    return MeasureSpace(atoms);
}

} // namespace

TEST_CASE("integral functional")
{
    const auto m = uniform_discretization(2, 0, 1);
    const auto f = integral_functional(Integrand({abs_shift(0.25), abs_shift(0.75)}), m);
    CHECK(f(v1(0.5)) == doctest::Approx(0.25));
    CHECK(f(v1(0.0)) == doctest::Approx(0.5));
    const auto sq = FnExpr::quadratic(Matrix::Constant(1, 1, 2.0), v1(0));
    const auto g = integral_functional(Integrand({sq, sq, sq, sq}), uniform_discretization(4, 0, 1));
    for (double x : {-1.0, 0.3, 2.0})
        CHECK(g(v1(x)) == doctest::Approx(x * x));
}

TEST_CASE("aumann and w*-integrals")
{
    const auto m = uniform_discretization(2, 0, 1);
    const auto pm = SetRep::points1d({-1, 1});
    const auto a = aumann_integral(SetValuedMap({pm, pm}), m);
    CHECK(a.piece_count() == 3);
    CHECK(a.is_finite_point_set());
    CHECK(support(a, v1(1)) == 1);
    CHECK(distance_to_set(v1(0), a) == 0);
    CHECK(distance_to_set(v1(0.5), a) == 0.5);

    const auto w = wstar_integral(SetValuedMap({pm, pm}), m);
    CHECK(w.is_single_piece());
    CHECK(distance_to_set(v1(0.5), w) == 0);
    CHECK(support(w, v1(-1)) == 1);

    const auto iv = SetRep::interval(0, 1);
    const auto ai = aumann_integral(SetValuedMap({iv, iv}), m);
    CHECK(ai.is_single_piece());
    CHECK(support(ai, v1(1)) == 1);
    CHECK(support(ai, v1(-1)) == 0);

    const auto c = SetRep::point(v2(0.3, -2));
    const auto single = aumann_integral(SetValuedMap({c, c}), m);
    CHECK(single.vertex_count() == 1);
    CHECK(single.pieces()[0].col(0).isApprox(v2(0.3, -2)));

    const auto tri = SetRep::polytope({v2(0, 0), v2(1, 0), v2(0, 1)});
    const auto tri2 = SetRep::polytope({v2(0, 0), v2(-1, 0), v2(0, -1)});
    const auto wt = wstar_integral(SetValuedMap({tri, tri2}), m);
    // Oracle: hull of all pairwise vertex sums, compared through supports.
    const auto oracle = convexify(minkowski_sum(scale(tri, 0.5), scale(tri2, 0.5)));
    for (const auto& d : default_directions(2))
        CHECK(std::abs(support(wt, d) - support(oracle, d)) <= 1e-12);
    CHECK(wt.pieces()[0].cols() == 6);
}

TEST_CASE("aumann integral equals brute-force selector enumeration")
{
    CounterRng rng(404);
    for (int trial = 0; trial < 50; ++trial)
    {
        const std::size_t atoms = 1 + rng.below(3);
        std::vector<std::vector<Vector>> pts(atoms);
        std::vector<SetRep> sets;
        std::vector<double> w;
        for (std::size_t i = 0; i < atoms; ++i)
        {
            const int k = 1 + static_cast<int>(rng.below(4));
            for (int j = 0; j < k; ++j)
                pts[i].push_back(v2(std::round(rng.uniform(-4, 4)), std::round(rng.uniform(-4, 4))));
            sets.push_back(SetRep::points(pts[i]));
            w.push_back(rng.uniform(0.1, 1));
        }
        const auto a = aumann_integral(SetValuedMap(sets), weights_measure(w));
        const auto brute = selector_sums(pts, w);
        for (const auto& s : brute)
            CHECK(distance_to_set(s, a) <= 1e-12);
        for (const auto& p : a.pieces())
        {
            double best = 1e9;
            for (const auto& s : brute)
                best = std::min(best, (s - p.col(0)).norm());
            CHECK(best <= 1e-12);
        }
    }
}

TEST_CASE("supremum representation")
{
    const auto m = uniform_discretization(2, 0, 1);
    const auto pm = SetRep::points1d({-1, 1});
    const auto r = check_supremum_representation(SetValuedMap({pm, pm}), m, default_directions(1));
    CHECK(r.pass);
    CHECK(r.max_residual == 0);

    CounterRng rng(11);
    const auto dirs = default_directions(2);
    for (int trial = 0; trial < 30; ++trial)
    {
        std::vector<std::vector<Vector>> pts(3);
        std::vector<SetRep> sets;
        std::vector<double> w;
        for (std::size_t i = 0; i < 3; ++i)
        {
            for (int j = 0; j < 3; ++j)
                pts[i].push_back(v2(rng.uniform(-1, 1), rng.uniform(-1, 1)));
            sets.push_back(SetRep::points(pts[i]));
            w.push_back(rng.uniform(0.1, 1));
        }
        const auto rep = check_supremum_representation(SetValuedMap(sets), weights_measure(w), dirs);
        CHECK(rep.pass);
        // Oracle: support of the brute-force selector sums.
        const auto brute = selector_sums(pts, w);
        for (const auto& d : dirs)
        {
            const Vector h = d.vec().normalized();
            double best = -1e9;
            for (const auto& s : brute)
                best = std::max(best, s.dot(h));
            double lhs = 0;
            for (std::size_t i = 0; i < 3; ++i)
                lhs += w[i] * support(sets[i], h);
            CHECK(std::abs(best - lhs) <= 1e-9);
        }
    }
}

TEST_CASE("lyapunov gap for {0,1} is 1/(2N)")
{
    auto family = [](std::size_t n) {
        std::vector<SetRep> vals(n, SetRep::points1d({0, 1}));
        return MapInstance{SetValuedMap(vals), uniform_discretization(n, 0, 1)};
    };
    const std::size_t ns[] = {1, 2, 4};
    const auto r = check_lyapunov_convexification(family, ns, default_directions(1));
    CHECK(r.pass);
    for (std::size_t k = 0; k < 3; ++k)
    {
        const double n = static_cast<double>(ns[k]);
        // Oracle: Aumann set {j/N}; sup over [0,1] of the distance on a fine grid.
        double oracle = 0;
        for (int g = 0; g <= 100000; ++g)
        {
            const double x = g / 100000.0;
            oracle = std::max(oracle, std::abs(x - std::round(x * n) / n));
        }
        CHECK(r.per_direction[k] == doctest::Approx(oracle).epsilon(1e-9));
        CHECK(std::abs(r.per_direction[k] - 1.0 / (2.0 * n)) <= 1e-12);
    }
}

TEST_CASE("lyapunov gap for convex values is zero and for the antipodal circle shrinks")
{
    auto convex = [](std::size_t n) {
        std::vector<SetRep> vals(n, SetRep::interval(-1, 2));
        return MapInstance{SetValuedMap(vals), uniform_discretization(n, 0, 1)};
    };
    const std::size_t ns[] = {1, 2, 4, 8};
    const auto rc = check_lyapunov_convexification(convex, ns, default_directions(1));
    CHECK(rc.pass);
    CHECK(rc.max_residual == 0);

    auto circle = [](std::size_t n) {
        const auto m = uniform_discretization(n, 0, 1);
        std::vector<SetRep> vals;
        for (const auto& a : m.atoms())
        {
            const double t = a.param[0];
            const Vector p = v2(std::cos(2 * std::numbers::pi * t), std::sin(2 * std::numbers::pi * t));
            vals.push_back(SetRep::points({p, Vector(-p)}));
        }
        return MapInstance{SetValuedMap(vals), m};
    };
    const auto rs = check_lyapunov_convexification(circle, ns, default_directions(2));
    for (std::size_t k = 1; k < 4; ++k)
        CHECK(rs.per_direction[k] <= rs.per_direction[k - 1] + 1e-12);
    // Oracle at N = 2: atoms at t = 1/4, 3/4 give points +-(0,1)/2, so the
    // selector sums are {(0,0), (0,0), (0,1), (0,-1)} and the gap is 1/2.
    CHECK(rs.per_direction[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("property: aumann inside w*, equal supports after convexification")
{
    CounterRng rng(606);
    for (int trial = 0; trial < 60; ++trial)
    {
        const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng.below(2));
        const std::size_t atoms = 1 + rng.below(3);
        std::vector<SetRep> sets;
        std::vector<double> w;
        for (std::size_t i = 0; i < atoms; ++i)
        {
            std::vector<Matrix> pieces;
            const int np = 1 + static_cast<int>(rng.below(3));
            for (int p = 0; p < np; ++p)
            {
                Matrix piece(dim, 1 + static_cast<Eigen::Index>(rng.below(3)));
                for (Eigen::Index j = 0; j < piece.size(); ++j)
                    piece.data()[j] = rng.uniform(-2, 2);
                pieces.push_back(piece);
            }
            sets.emplace_back(dim, pieces);
            w.push_back(rng.uniform(0, 1));
        }
        w[0] += 0.1;
        const SetValuedMap map(sets);
        const auto m = weights_measure(w);
        const auto a = aumann_integral(map, m);
        const auto ws = wstar_integral(map, m);
        const Matrix verts = a.all_vertices();
        for (Eigen::Index j = 0; j < verts.cols(); ++j)
            CHECK(distance_to_set(verts.col(j), ws) <= 1e-12);
        for (int k = 0; k < 20; ++k)
        {
            Vector h(dim);
            for (Eigen::Index i = 0; i < dim; ++i)
                h[i] = rng.normal();
            double expected = 0;
            for (std::size_t i = 0; i < atoms; ++i)
                expected += w[i] * support(sets[i], h);
            CHECK(std::abs(support(ws, h) - expected) <= 1e-12 * (1 + std::abs(expected)));
            CHECK(std::abs(support(convexify(a), h) - support(ws, h)) <= 1e-12 * (1 + std::abs(expected)));
        }
    }
}

TEST_CASE("clarke leibniz examples")
{
    const auto m = uniform_discretization(2, 0, 1);
    const auto dirs = default_directions(1);
    const auto r = clarke_leibniz_check(Integrand({abs_shift(0.25), abs_shift(0.75)}), m, v1(0.5), dirs);
    CHECK(r.pass);
    CHECK(r.extras["equality_asserted"].get<bool>());
    CHECK(r.max_residual <= 1e-12);

    // -|x - t| with the atom at the base point: Clarke sides agree, while the
    // unconvexified subdifferential {-w, w} sits at Hausdorff distance w from
    // the right-hand side [-w, w].
    const auto m1 = uniform_discretization(1, 0, 1);
    const auto neg = clarke_leibniz_check(Integrand({-abs_shift(0.5)}), m1, v1(0.5), dirs);
    CHECK(neg.pass);
    CHECK(neg.extras["limiting_gap"].get<double>() == doctest::Approx(1.0));
    CHECK(neg.extras["clarke_gap"].get<double>() <= 1e-12);

    // |x| and -|x| cancel: {0} is strictly inside [-1, 1].
    const auto mix = clarke_leibniz_check(Integrand({abs_shift(0), -abs_shift(0)}), m, v1(0), dirs);
    CHECK(mix.pass);
    CHECK(mix.extras["clarke_gap"].get<double>() == doctest::Approx(1.0));

    const auto sq = FnExpr::quadratic(Matrix::Constant(1, 1, 2.0), v1(-1));
    const auto smooth = clarke_leibniz_check(Integrand({sq, FnExpr::affine(v1(3))}), m, v1(0.2), dirs);
    CHECK(smooth.pass);
    CHECK(smooth.max_residual <= 1e-12);
}

TEST_CASE("property: clarke leibniz inclusion on random integrands")
{
    CounterRng rng(31337);
    int equality_cases = 0;
    for (int trial = 0; trial < 100; ++trial)
    {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(2));
        Vector x(n);
        for (Eigen::Index i = 0; i < n; ++i)
            x[i] = rng.uniform(-1, 1);
        const std::size_t atoms = 1 + rng.below(5);
        std::vector<FnExpr> fs;
        std::vector<double> w;
        for (std::size_t i = 0; i < atoms; ++i)
        {
            fs.push_back(testgen::random_expr(rng, n, x, 2));
            w.push_back(rng.uniform(0.05, 1));
        }
        const auto r = clarke_leibniz_check(Integrand(fs), weights_measure(w), x, default_directions(n));
        CHECK(r.pass);
        if (r.extras["equality_asserted"].get<bool>())
            ++equality_cases;
    }
    CHECK(equality_cases > 10);
}

TEST_CASE("strict leibniz")
{
    const auto sq = [](double t) { return FnExpr::quadratic(Matrix::Constant(1, 1, 2.0), v1(-2 * t), t * t); };
    const auto m = uniform_discretization(2, 0, 1);
    const auto g = strict_leibniz(Integrand({sq(0.25), sq(0.75)}), m, v1(0));
    CHECK(g[0] == doctest::Approx(-1.0));

    const auto c = FnExpr::constant(1, 3);
    CHECK(strict_leibniz(Integrand({c, c}), m, v1(0.4))[0] == 0);

    const auto m4 = uniform_discretization(4, 0, 1);
    std::vector<FnExpr> tx;
    for (const auto& a : m4.atoms())
        tx.push_back(FnExpr::affine(v1(a.param[0])));
    CHECK(strict_leibniz(Integrand(tx), m4, v1(1.0))[0] == doctest::Approx(0.5));

    CHECK_THROWS_AS(strict_leibniz(Integrand({abs_shift(0), sq(0)}), m, v1(0)), InapplicableError);
}

TEST_CASE("limiting leibniz examples")
{
    const auto dirs = default_directions(1);
    // Convex regular atoms: equality and zero unconvexified gap.
    std::vector<IntegrandInstance> convex;
    for (std::size_t n : {1u, 2u, 4u})
    {
        const auto m = uniform_discretization(n, 0, 1);
        std::vector<FnExpr> fs;
        for (const auto& a : m.atoms())
            fs.push_back(abs_shift(a.param[0]));
        convex.push_back({Integrand(fs), m});
    }
    const auto rc = limiting_leibniz_check(convex, v1(0.5), dirs);
    CHECK(rc.pass);

    // -|x - t| with atoms straddling the base point.
    std::vector<IntegrandInstance> neg;
    for (std::size_t n : {2u, 4u, 8u})
    {
        const auto m = uniform_discretization(n, 0, 1);
        std::vector<FnExpr> fs;
        for (const auto& a : m.atoms())
            fs.push_back(-abs_shift(a.param[0]));
        neg.push_back({Integrand(fs), m});
    }
    const auto rn = limiting_leibniz_check(neg, v1(0.5), dirs);
    CHECK(rn.pass);

    // Mixed: smooth atom plus one -|.| atom at the base point.
    const auto m2 = uniform_discretization(2, 0, 1);
    const auto sq = FnExpr::quadratic(Matrix::Constant(1, 1, 2.0), v1(0));
    std::vector<IntegrandInstance> mixed{{Integrand({sq, -abs_shift(0.5)}), m2}};
    const auto rm = limiting_leibniz_check(mixed, v1(0.5), dirs);
    CHECK(rm.pass);
    const auto lim = limiting_subdiff(integral_functional(mixed[0].integrand, m2), v1(0.5));
    std::vector<double> pts;
    for (const auto& p : lim.set.pieces())
        pts.push_back(p(0, 0));
    std::sort(pts.begin(), pts.end());
    REQUIRE(pts.size() == 2);
    CHECK(pts[0] == doctest::Approx(0.5 * 1.0 - 0.5));
    CHECK(pts[1] == doctest::Approx(0.5 * 1.0 + 0.5));
}

TEST_CASE("property: integral functional is linear in the integrand")
{
    CounterRng rng(12);
    for (int trial = 0; trial < 50; ++trial)
    {
        const Vector anchor = v2(0, 0);
        const auto m = uniform_discretization(3, 0, 1);
        std::vector<FnExpr> phi, psi, combo;
        const double alpha = rng.uniform(0, 3);
        for (std::size_t i = 0; i < 3; ++i)
        {
            phi.push_back(testgen::random_expr(rng, 2, anchor, 2));
            psi.push_back(testgen::random_expr(rng, 2, anchor, 2));
            combo.push_back(FnExpr::sum({FnExpr::scale(alpha, phi.back()), psi.back()}));
        }
        const auto ip = integral_functional(Integrand(phi), m);
        const auto iq = integral_functional(Integrand(psi), m);
        const auto ic = integral_functional(Integrand(combo), m);
        for (int k = 0; k < 5; ++k)
        {
            const Vector x = v2(rng.uniform(-1, 1), rng.uniform(-1, 1));
            CHECK(std::abs(ic(x) - (alpha * ip(x) + iq(x))) <= 1e-12 * (1 + std::abs(ic(x))));
        }
    }
}
