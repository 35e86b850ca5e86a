#pragma once

// Random expression generator shared by the property tests. Max/Min nodes
// are tied at a chosen point with probability 0.6 so that kinks are hit.

#include "leibniz/nonsmooth.hpp"
#include "leibniz/random.hpp"

namespace testgen
{

using leibniz::CounterRng;
using leibniz::FnExpr;
using leibniz::Matrix;
using leibniz::Vector;

inline FnExpr random_leaf(CounterRng& rng, Eigen::Index n)
{
    Vector a(n);
    for (Eigen::Index i = 0; i < n; ++i)
        a[i] = rng.uniform(-2, 2);
    const double b = rng.uniform(-1, 1);
    if (rng.uniform() < 0.5)
        return FnExpr::affine(a, b);
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = rng.uniform(-1, 1);
    return FnExpr::quadratic(m + m.transpose(), a, b);
}

inline FnExpr random_expr(CounterRng& rng, Eigen::Index n, const Vector& tie_at, int depth)
{
    if (depth == 0 || rng.uniform() < 0.25)
        return random_leaf(rng, n);
    const auto pick = rng.below(5);
    if (pick == 0)
        return FnExpr::scale(rng.uniform(0, 2), random_expr(rng, n, tie_at, depth - 1));
    if (pick == 1)
        return FnExpr::neg(random_expr(rng, n, tie_at, depth - 1));
    const int k = 2 + static_cast<int>(rng.below(2));
    std::vector<FnExpr> kids;
    for (int i = 0; i < k; ++i)
        kids.push_back(random_expr(rng, n, tie_at, depth - 1));
    if (pick == 2)
        return FnExpr::sum(kids);
    if (rng.uniform() < 0.6)
    {
        const double target = kids.front()(tie_at);
        for (auto& kid : kids)
            kid = FnExpr::sum({kid, FnExpr::constant(n, target - kid(tie_at))});
    }
    return pick == 3 ? FnExpr::max_of(kids) : FnExpr::min_of(kids);
}

} // namespace testgen
