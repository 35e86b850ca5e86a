#include "leibniz/desk.hpp"

#include <cmath>

namespace leibniz::desk
{

namespace
{

Vector vec(std::initializer_list<Scalar> xs)
{
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (Scalar x : xs)
        v[i++] = x;
    return v;
}

/// (x - a)^2 + k y^2 + c on (x, y) in R^2.
FnExpr quad_xy(Scalar a, Scalar k, Scalar c)
{
    Matrix q = Matrix::Zero(2, 2);
    q(0, 0) = 2;
    q(1, 1) = 2 * k;
    return FnExpr::quadratic(q, vec({-2 * a, 0}), a * a + c);
}

BoxBounds unit_box()
{
    return {vec({-1}), vec({1}), {}, {}};
}

StochasticKernel single()
{
    return StochasticKernel(Matrix::Identity(1, 1));
}

DPModel nlp_model(NlpConstraints block)
{
    DPModel m;
    m.states = grid1d(-1, 1, 0.1);
    m.kernel = single();
    m.beta = 0;
    m.cost = {FnExpr::affine(vec({0, 1}))};
    m.constraints = ConstraintMap::nonlinear({std::move(block)});
    return m;
}

} // namespace

std::vector<Vector> grid1d(Scalar lo, Scalar hi, Scalar step)
{
    std::vector<Vector> out;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i)
        out.push_back(Vector::Constant(1, lo + static_cast<Scalar>(i) * step));
    return out;
}

DPModel unit_cost()
{
    DPModel m;
    m.states = {vec({0}), vec({1})};
    m.kernel = single();
    m.beta = 0.5;
    m.cost = {FnExpr::affine(vec({0, 1}), 1)};
    m.constraints = ConstraintMap::all_states(1);
    return m;
}

DPModel quadratic(Scalar a, Scalar beta)
{
    DPModel m;
    m.states = grid1d(-1, 1, 0.1);
    m.kernel = single();
    m.beta = beta;
    m.cost = {quad_xy(a, 1, 0)};
    m.constraints = ConstraintMap::box({unit_box()});
    return m;
}

DPModel two_shock()
{
    DPModel m;
    m.states = grid1d(-1, 1, 0.05);
    Matrix p(2, 2);
    p << 0.75, 0.25, 0.25, 0.75;
    m.kernel = StochasticKernel(p);
    m.beta = 0.5;
    m.cost = {quad_xy(0.3, 1, 0), quad_xy(0.9, 1, 0)};
    m.constraints = ConstraintMap::box({unit_box(), unit_box()});
    return m;
}

DPModel stay_put()
{
    DPModel m;
    m.states = grid1d(-1, 1, 0.1);
    m.kernel = StochasticKernel(Matrix::Constant(2, 2, 0.5));
    m.beta = 0.5;
    Matrix q(2, 2);
    q << 2, -2, -2, 2;
    m.cost = {FnExpr::quadratic(q, vec({0, 0}), 0), FnExpr::quadratic(q, vec({0, 0}), 1)};
    m.constraints = ConstraintMap::box({unit_box(), unit_box()});
    return m;
}

DPModel boundary()
{
    DPModel m;
    m.states = grid1d(-1, 1, 0.1);
    m.kernel = single();
    m.beta = 0;
    Matrix q = Matrix::Zero(2, 2);
    q(1, 1) = 2;
    m.cost = {FnExpr::quadratic(q, vec({0, -4}), 4)};
    m.constraints = ConstraintMap::box({unit_box()});
    return m;
}

DPModel nonsmooth()
{
    DPModel m;
    m.states = grid1d(-1, 1, 0.1);
    m.kernel = single();
    m.beta = 0.5;
    Matrix q = Matrix::Zero(2, 2);
    q(1, 1) = 20;
    const FnExpr abs_x = FnExpr::max_of({FnExpr::affine(vec({1, 0})), FnExpr::affine(vec({-1, 0}))});
    m.cost = {FnExpr::quadratic(q, vec({0, 0})) - abs_x};
    m.constraints = ConstraintMap::box({unit_box()});
    return m;
}

DPModel ge_constraint()
{
    return nlp_model({{FnExpr::affine(vec({1, -1}))}, {}});
}

DPModel twin_constraint()
{
    return nlp_model({{FnExpr::affine(vec({1, -1})), FnExpr::affine(vec({1, -1}))}, {}});
}

DPModel rank_deficient()
{
    return nlp_model({{}, {FnExpr::affine(vec({-1, 1})), FnExpr::affine(vec({-1, 1}))}});
}

DPModel tie()
{
    DPModel m;
    m.states = {vec({-1}), vec({1})};
    m.kernel = single();
    m.beta = 0.5;
    m.cost = {FnExpr::max_of({FnExpr::affine(vec({0, 1})), FnExpr::affine(vec({0, -1}))})};
    m.constraints = ConstraintMap::all_states(1);
    return m;
}

} // namespace leibniz::desk
