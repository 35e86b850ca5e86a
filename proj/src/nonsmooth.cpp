#include "leibniz/nonsmooth.hpp"

#include "leibniz/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace leibniz
{

// --- construction ---------------------------------------------------------

FnExpr FnExpr::affine(Vector a, Scalar b)
{
    if (a.size() == 0)
        throw std::invalid_argument("FnExpr::affine: empty coefficient vector");
    if (!a.allFinite() || !std::isfinite(b))
        throw std::invalid_argument("FnExpr::affine: coefficients must be finite");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Affine;
    n->dim = a.size();
    n->a = std::move(a);
    n->b = b;
    return FnExpr(std::move(n));
}

FnExpr FnExpr::constant(Eigen::Index dim, Scalar b)
{
    return affine(Vector::Zero(dim), b);
}

FnExpr FnExpr::quadratic(Matrix q, Vector a, Scalar b)
{
    if (q.rows() != q.cols())
        throw std::invalid_argument("FnExpr::quadratic: Q must be square");
    require_dim(q.rows(), a.size(), "FnExpr::quadratic");
    if (!q.allFinite() || !a.allFinite() || !std::isfinite(b))
        throw std::invalid_argument("FnExpr::quadratic: coefficients must be finite");
    const Scalar asym = (q - q.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * (1.0 + q.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("FnExpr::quadratic: Q must be symmetric");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Quadratic;
    n->dim = a.size();
    n->q = 0.5 * (q + q.transpose());
    n->a = std::move(a);
    n->b = b;
    return FnExpr(std::move(n));
}

FnExpr FnExpr::combine(Kind kind, std::vector<FnExpr> children)
{
    if (children.empty())
        throw std::invalid_argument("FnExpr: combinator needs at least one child");
    const Eigen::Index dim = children.front().dim();
    bool smooth = kind == Kind::Sum || kind == Kind::Scale || kind == Kind::Neg;
    for (const auto& c : children)
    {
        require_dim(dim, c.dim(), "FnExpr child");
        smooth = smooth && c.is_smooth();
    }
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->dim = dim;
    n->children = std::move(children);
    n->smooth = smooth;
    return FnExpr(std::move(n));
}

FnExpr FnExpr::sum(std::vector<FnExpr> children)
{
    return combine(Kind::Sum, std::move(children));
}

FnExpr FnExpr::scale(Scalar c, FnExpr child)
{
    if (!(c >= 0) || !std::isfinite(c))
        throw std::invalid_argument("FnExpr::scale: coefficient must be finite and nonnegative (use neg)");
    auto f = combine(Kind::Scale, {std::move(child)});
    auto n = std::make_shared<Node>(*f.node_);
    n->c = c;
    return FnExpr(std::move(n));
}

FnExpr FnExpr::neg(FnExpr child)
{
    return combine(Kind::Neg, {std::move(child)});
}

FnExpr FnExpr::max_of(std::vector<FnExpr> children)
{
    return combine(Kind::Max, std::move(children));
}

FnExpr FnExpr::min_of(std::vector<FnExpr> children)
{
    return combine(Kind::Min, std::move(children));
}

FnExpr operator+(const FnExpr& f, const FnExpr& g)
{
    return FnExpr::sum({f, g});
}

FnExpr operator-(const FnExpr& f)
{
    return FnExpr::neg(f);
}

FnExpr operator-(const FnExpr& f, const FnExpr& g)
{
    return FnExpr::sum({f, FnExpr::neg(g)});
}

FnExpr operator*(Scalar c, const FnExpr& f)
{
    return c >= 0 ? FnExpr::scale(c, f) : FnExpr::neg(FnExpr::scale(-c, f));
}

// --- evaluation -----------------------------------------------------------

Scalar FnExpr::operator()(const Vector& x) const
{
    return eval(*this, x);
}

Scalar eval(const FnExpr& f, const Vector& x)
{
    require_dim(f.dim(), x.size(), "eval");
    switch (f.kind())
    {
    case FnExpr::Kind::Affine:
        return f.a().dot(x) + f.b();
    case FnExpr::Kind::Quadratic:
        return 0.5 * x.dot(f.q() * x) + f.a().dot(x) + f.b();
    case FnExpr::Kind::Sum: {
        Scalar s = 0;
        for (const auto& c : f.children())
            s += eval(c, x);
        return s;
    }
    case FnExpr::Kind::Scale:
        return f.coeff() * eval(f.children().front(), x);
    case FnExpr::Kind::Neg:
        return -eval(f.children().front(), x);
    case FnExpr::Kind::Max: {
        Scalar m = -std::numeric_limits<Scalar>::infinity();
        for (const auto& c : f.children())
            m = std::max(m, eval(c, x));
        return m;
    }
    case FnExpr::Kind::Min: {
        Scalar m = std::numeric_limits<Scalar>::infinity();
        for (const auto& c : f.children())
            m = std::min(m, eval(c, x));
        return m;
    }
    }
    throw std::logic_error("eval: unknown node kind");
}

Vector gradient(const FnExpr& f, const Vector& x)
{
    require_dim(f.dim(), x.size(), "gradient");
    if (!f.is_smooth())
        throw InapplicableError("gradient: expression contains max/min nodes");
    switch (f.kind())
    {
    case FnExpr::Kind::Affine:
        return f.a();
    case FnExpr::Kind::Quadratic:
        return f.q() * x + f.a();
    case FnExpr::Kind::Sum: {
        Vector g = Vector::Zero(f.dim());
        for (const auto& c : f.children())
            g += gradient(c, x);
        return g;
    }
    case FnExpr::Kind::Scale:
        return f.coeff() * gradient(f.children().front(), x);
    case FnExpr::Kind::Neg:
        return -gradient(f.children().front(), x);
    default:
        break;
    }
    throw std::logic_error("gradient: unreachable");
}

FnExpr compose_affine(const FnExpr& f, const Matrix& m, const Vector& c)
{
    require_dim(f.dim(), m.rows(), "compose_affine");
    require_dim(f.dim(), c.size(), "compose_affine offset");
    switch (f.kind())
    {
    case FnExpr::Kind::Affine:
        return FnExpr::affine(m.transpose() * f.a(), f.a().dot(c) + f.b());
    case FnExpr::Kind::Quadratic: {
        const Matrix mq = m.transpose() * f.q();
        Matrix q = mq * m;
        q = 0.5 * (q + q.transpose());
        return FnExpr::quadratic(q, mq * c + m.transpose() * f.a(), 0.5 * c.dot(f.q() * c) + f.a().dot(c) + f.b());
    }
    case FnExpr::Kind::Scale:
        return FnExpr::scale(f.coeff(), compose_affine(f.children().front(), m, c));
    default:
        break;
    }
    std::vector<FnExpr> kids;
    kids.reserve(f.children().size());
    for (const auto& ch : f.children())
        kids.push_back(compose_affine(ch, m, c));
    switch (f.kind())
    {
    case FnExpr::Kind::Sum:
        return FnExpr::sum(std::move(kids));
    case FnExpr::Kind::Neg:
        return FnExpr::neg(std::move(kids.front()));
    case FnExpr::Kind::Max:
        return FnExpr::max_of(std::move(kids));
    case FnExpr::Kind::Min:
        return FnExpr::min_of(std::move(kids));
    default:
        break;
    }
    throw std::logic_error("compose_affine: unreachable");
}

namespace
{

FnExpr push(const FnExpr& f, bool negate)
{
    switch (f.kind())
    {
    case FnExpr::Kind::Affine:
        return negate ? FnExpr::affine(-f.a(), -f.b()) : f;
    case FnExpr::Kind::Quadratic:
        return negate ? FnExpr::quadratic(-f.q(), -f.a(), -f.b()) : f;
    case FnExpr::Kind::Neg:
        return push(f.children().front(), !negate);
    case FnExpr::Kind::Scale:
        return FnExpr::scale(f.coeff(), push(f.children().front(), negate));
    default:
        break;
    }
    std::vector<FnExpr> kids;
    for (const auto& ch : f.children())
        kids.push_back(push(ch, negate));
    if (f.kind() == FnExpr::Kind::Sum)
        return FnExpr::sum(std::move(kids));
    const bool is_max = (f.kind() == FnExpr::Kind::Max) != negate;
    return is_max ? FnExpr::max_of(std::move(kids)) : FnExpr::min_of(std::move(kids));
}

} // namespace

FnExpr push_negations(const FnExpr& f)
{
    return push(f, false);
}

Scalar directional_derivative(const FnExpr& f, const Vector& x, const Vector& h)
{
    require_dim(f.dim(), h.size(), "directional_derivative");
    switch (f.kind())
    {
    case FnExpr::Kind::Affine:
    case FnExpr::Kind::Quadratic:
        return gradient(f, x).dot(h);
    case FnExpr::Kind::Sum: {
        Scalar s = 0;
        for (const auto& c : f.children())
            s += directional_derivative(c, x, h);
        return s;
    }
    case FnExpr::Kind::Scale:
        return f.coeff() == 0 ? 0.0 : f.coeff() * directional_derivative(f.children().front(), x, h);
    case FnExpr::Kind::Neg:
        return -directional_derivative(f.children().front(), x, h);
    case FnExpr::Kind::Max:
    case FnExpr::Kind::Min: {
        const bool is_max = f.kind() == FnExpr::Kind::Max;
        const Scalar v = eval(f, x);
        const Scalar tol = active_tolerance(v);
        Scalar best = is_max ? -std::numeric_limits<Scalar>::infinity() : std::numeric_limits<Scalar>::infinity();
        for (const auto& c : f.children())
        {
            if (std::abs(eval(c, x) - v) > tol)
                continue;
            const Scalar d = directional_derivative(c, x, h);
            best = is_max ? std::max(best, d) : std::min(best, d);
        }
        return best;
    }
    }
    throw std::logic_error("directional_derivative: unreachable");
}

namespace
{

void find_obstruction(const FnExpr& f, int enclosing, std::string& reason)
{
    if (!reason.empty() || f.is_smooth())
        return;
    switch (f.kind())
    {
    case FnExpr::Kind::Sum: {
        const auto nonsmooth = std::count_if(f.children().begin(), f.children().end(),
                                             [](const FnExpr& c) { return !c.is_smooth(); });
        if (nonsmooth > 1)
        {
            reason = "sum with several nonsmooth terms";
            return;
        }
        break;
    }
    case FnExpr::Kind::Max:
    case FnExpr::Kind::Min: {
        const int sense = f.kind() == FnExpr::Kind::Max ? 1 : -1;
        if (enclosing == -sense)
        {
            reason = "max and min nested inside each other";
            return;
        }
        enclosing = sense;
        break;
    }
    default:
        break;
    }
    for (const auto& c : f.children())
        find_obstruction(c, enclosing, reason);
}

} // namespace

std::string exactness_obstruction(const FnExpr& f)
{
    std::string reason;
    find_obstruction(push_negations(f), 0, reason);
    return reason;
}

// --- pointwise calculus ---------------------------------------------------

namespace
{

struct Local
{
    Scalar value = 0;
    SetRep set;
    bool exact = true;
    bool regular = true;
    /// Exact singleton: the function is strictly differentiable here.
    [[nodiscard]] bool strict() const { return exact && set.vertex_count() == 1; }
    [[nodiscard]] Vector point() const { return set.pieces().front().col(0); }
};

Local smooth_local(Scalar value, const Vector& g)
{
    return {value, SetRep::point(g), true, true};
}

std::vector<Vector> distinct(const std::vector<Vector>& pts)
{
    std::vector<Vector> out;
    for (const auto& p : pts)
        if (std::none_of(out.begin(), out.end(), [&](const Vector& q) { return (p - q).cwiseAbs().maxCoeff() <= kVertexTol; }))
            out.push_back(p);
    return out;
}

Eigen::Index affine_rank(const std::vector<Vector>& pts)
{
    if (pts.size() < 2)
        return 0;
    Matrix d(pts.front().size(), static_cast<Eigen::Index>(pts.size() - 1));
    for (std::size_t i = 1; i < pts.size(); ++i)
        d.col(static_cast<Eigen::Index>(i - 1)) = pts[i] - pts.front();
    Eigen::FullPivLU<Matrix> lu(d);
    lu.setThreshold(1e-10);
    return lu.rank();
}

// Limiting subdifferential of a min of C^1 functions with the given active
// gradients: extreme points of their hull always belong; gradients in the
// interior of a full-dimensional hull never do; anything else depends on
// second-order terms and makes the result inexact.
Local min_of_smooth(Scalar value, const std::vector<Vector>& grads)
{
    const auto g = distinct(grads);
    if (g.size() == 1)
        return smooth_local(value, g.front());
    const Eigen::Index n = g.front().size();
    Scalar scale = 1;
    for (const auto& p : g)
        scale = std::max(scale, p.cwiseAbs().maxCoeff());
    const bool full = affine_rank(g) == n;

    std::vector<Vector> keep;
    bool exact = true;
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        std::vector<Vector> rest;
        for (std::size_t j = 0; j < g.size(); ++j)
            if (j != i)
                rest.push_back(g[j]);
        const Matrix others = SetRep::polytope(rest).pieces().front();
        const Scalar d = (nearest_point_in_hull(g[i], others) - g[i]).norm();
        if (d > 1e-12 * scale)
        {
            keep.push_back(g[i]);
            continue;
        }
        bool interior = full;
        const Scalar eps = 1e-7 * scale;
        const Matrix all = SetRep::polytope(g).pieces().front();
        for (Eigen::Index k = 0; interior && k < n; ++k)
            for (Scalar sgn : {-1.0, 1.0})
            {
                Vector probe = g[i];
                probe[k] += sgn * eps;
                if ((nearest_point_in_hull(probe, all) - probe).norm() > 1e-13 * scale)
                    interior = false;
            }
        if (!interior)
        {
            keep.push_back(g[i]);
            exact = false;
        }
    }
    return {value, SetRep::points(keep), exact, false};
}

Local analyze(const FnExpr& f, const Vector& x);

std::vector<Local> analyze_active(const FnExpr& f, const Vector& x, Scalar& value)
{
    const bool is_max = f.kind() == FnExpr::Kind::Max;
    std::vector<Scalar> vals;
    for (const auto& c : f.children())
        vals.push_back(eval(c, x));
    value = is_max ? *std::max_element(vals.begin(), vals.end()) : *std::min_element(vals.begin(), vals.end());
    const Scalar tol = active_tolerance(value);
    std::vector<Local> active;
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (std::abs(vals[i] - value) <= tol)
            active.push_back(analyze(f.children()[i], x));
    return active;
}

SetRep union_of(const std::vector<Local>& parts, bool convex)
{
    SetRep acc = parts.front().set;
    for (std::size_t i = 1; i < parts.size(); ++i)
        acc = set_union(acc, parts[i].set);
    return convex ? convexify(acc) : acc;
}

Local analyze(const FnExpr& f, const Vector& x)
{
    const Eigen::Index n = f.dim();
    switch (f.kind())
    {
    case FnExpr::Kind::Affine:
    case FnExpr::Kind::Quadratic:
        return smooth_local(eval(f, x), gradient(f, x));
    case FnExpr::Kind::Neg:
        // Callers normalize first; keep a safe answer regardless.
        return analyze(push_negations(f), x);
    case FnExpr::Kind::Scale: {
        if (f.coeff() == 0)
            return smooth_local(0, Vector::Zero(n));
        Local c = analyze(f.children().front(), x);
        return {f.coeff() * c.value, scale(c.set, f.coeff()), c.exact, c.regular};
    }
    case FnExpr::Kind::Sum: {
        std::vector<Local> parts;
        Scalar value = 0;
        for (const auto& c : f.children())
        {
            parts.push_back(analyze(c, x));
            value += parts.back().value;
        }
        Vector shift = Vector::Zero(n);
        std::vector<std::size_t> rough;
        for (std::size_t i = 0; i < parts.size(); ++i)
        {
            if (parts[i].strict())
                shift += parts[i].point();
            else
                rough.push_back(i);
        }
        if (rough.empty())
            return smooth_local(value, shift);
        if (rough.size() == 1)
        {
            const Local& r = parts[rough.front()];
            return {value, translate(r.set, shift), r.exact, r.regular};
        }
        const bool all_regular = std::all_of(rough.begin(), rough.end(),
                                             [&](std::size_t i) { return parts[i].exact && parts[i].regular; });
        SetRep acc = SetRep::point(shift);
        for (std::size_t i : rough)
        {
            const SetRep term = all_regular ? convexify(parts[i].set) : parts[i].set;
            try
            {
                acc = minkowski_sum(acc, term);
            }
            catch (const CapacityError&)
            {
                acc = minkowski_sum(convexify(acc), convexify(term));
            }
        }
        return {value, all_regular ? convexify(acc) : acc, all_regular, all_regular};
    }
    case FnExpr::Kind::Max: {
        Scalar value = 0;
        auto active = analyze_active(f, x, value);
        if (active.size() == 1)
            return active.front();
        const bool all_regular = std::all_of(active.begin(), active.end(),
                                             [](const Local& l) { return l.exact && l.regular; });
        return {value, union_of(active, true), all_regular, all_regular};
    }
    case FnExpr::Kind::Min: {
        Scalar value = 0;
        auto active = analyze_active(f, x, value);
        if (active.size() == 1)
            return active.front();
        if (std::all_of(active.begin(), active.end(), [](const Local& l) { return l.strict(); }))
        {
            std::vector<Vector> grads;
            for (const auto& l : active)
                grads.push_back(l.point());
            return min_of_smooth(value, grads);
        }
        return {value, union_of(active, false), false, false};
    }
    }
    throw std::logic_error("analyze: unreachable");
}

// Exact limiting subdifferential of a one-dimensional piecewise-polynomial
// function from its one-sided derivatives d- <= or > d+.
SubdiffResult one_dimensional(const FnExpr& f, const Vector& x)
{
    const Scalar dplus = directional_derivative(f, x, Vector::Constant(1, 1.0));
    const Scalar dminus = -directional_derivative(f, x, Vector::Constant(1, -1.0));
    const bool regular = dminus <= dplus + 1e-12;
    if (regular)
        return {SetRep::interval(std::min(dminus, dplus), std::max(dminus, dplus)), true, true};
    return {SetRep::points1d({dminus, dplus}), true, false};
}

} // namespace

SubdiffResult limiting_subdiff(const FnExpr& f, const Vector& x, bool strict)
{
    require_dim(f.dim(), x.size(), "limiting_subdiff");
    Local l = analyze(push_negations(f), x);
    if (!l.exact && f.dim() == 1)
        return one_dimensional(f, x);
    if (!l.exact && strict)
        throw InexactError("limiting_subdiff: expression is outside the exact calculus class at this point");
    if (l.strict())
        l.regular = true;
    return {l.set, l.exact, l.regular};
}

SubdiffResult clarke_gradient(const FnExpr& f, const Vector& x, bool strict)
{
    auto r = limiting_subdiff(f, x, strict);
    r.set = convexify(r.set);
    return r;
}

Scalar clarke_dd(const FnExpr& f, const Vector& x, const Vector& h, bool strict)
{
    require_dim(f.dim(), h.size(), "clarke_dd");
    return support(clarke_gradient(f, x, strict).set, h);
}

Scalar sampled_clarke_dd(const FnExpr& f, const Vector& x, const Vector& h, Scalar radius,
                         std::size_t n_samples, std::uint64_t seed)
{
    require_dim(f.dim(), x.size(), "sampled_clarke_dd");
    require_dim(f.dim(), h.size(), "sampled_clarke_dd direction");
    if (!(radius > 0))
        throw std::invalid_argument("sampled_clarke_dd: radius must be positive");
    if (n_samples == 0)
        throw std::invalid_argument("sampled_clarke_dd: need at least one sample");
    CounterRng rng(seed);
    const Eigen::Index n = x.size();
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    for (std::size_t s = 0; s < n_samples; ++s)
    {
        Vector dir(n);
        for (Eigen::Index i = 0; i < n; ++i)
            dir[i] = rng.normal();
        const Scalar norm = dir.norm();
        const Scalar r = radius * std::pow(rng.uniform(), 1.0 / static_cast<Scalar>(n));
        const Vector xp = norm > 0 ? Vector(x + (r / norm) * dir) : x;
        const Scalar theta = radius * rng.uniform_open();
        best = std::max(best, (eval(f, xp + theta * h) - eval(f, xp)) / theta);
    }
    return best;
}

bool is_regular(const FnExpr& f, const Vector& x)
{
    const auto r = limiting_subdiff(f, x, false);
    return r.exact && r.regular;
}

std::optional<Vector> strict_derivative(const FnExpr& f, const Vector& x)
{
    const auto r = clarke_gradient(f, x, false);
    if (!r.exact)
        return std::nullopt;
    const Matrix v = r.set.all_vertices();
    Scalar diam = 0;
    for (Eigen::Index i = 1; i < v.cols(); ++i)
        diam = std::max(diam, (v.col(i) - v.col(0)).norm());
    if (diam > 1e-12)
        return std::nullopt;
    return Vector(v.col(0));
}

Scalar lipschitz_modulus(const FnExpr& f, const Box& box)
{
    require_dim(f.dim(), box.dim(), "lipschitz_modulus");
    if ((box.upper.array() < box.lower.array()).any())
        throw std::invalid_argument("lipschitz_modulus: box lower bound exceeds upper bound");
    switch (f.kind())
    {
    case FnExpr::Kind::Affine:
        return f.a().norm();
    case FnExpr::Kind::Quadratic: {
        // |Qx + a| is convex in x, so its maximum over the box is at a corner.
        const Eigen::Index n = f.dim();
        if (n <= 16)
        {
            Scalar best = 0;
            for (std::uint32_t mask = 0; mask < (1u << n); ++mask)
            {
                Vector corner(n);
                for (Eigen::Index i = 0; i < n; ++i)
                    corner[i] = (mask >> i) & 1u ? box.upper[i] : box.lower[i];
                best = std::max(best, (f.q() * corner + f.a()).norm());
            }
            return best;
        }
        const Scalar radius = box.lower.cwiseAbs().cwiseMax(box.upper.cwiseAbs()).norm();
        return f.q().operatorNorm() * radius + f.a().norm();
    }
    case FnExpr::Kind::Scale:
        return f.coeff() * lipschitz_modulus(f.children().front(), box);
    case FnExpr::Kind::Neg:
        return lipschitz_modulus(f.children().front(), box);
    case FnExpr::Kind::Sum: {
        Scalar s = 0;
        for (const auto& c : f.children())
            s += lipschitz_modulus(c, box);
        return s;
    }
    case FnExpr::Kind::Max:
    case FnExpr::Kind::Min: {
        Scalar m = 0;
        for (const auto& c : f.children())
            m = std::max(m, lipschitz_modulus(c, box));
        return m;
    }
    }
    throw std::logic_error("lipschitz_modulus: unreachable");
}

} // namespace leibniz
