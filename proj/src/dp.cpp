#include "leibniz/dp.hpp"

#include "leibniz/setintegral.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace leibniz
{

namespace
{

constexpr Scalar kLipschitzCap = 100.0;

Eigen::Index idx(std::size_t i)
{
    return static_cast<Eigen::Index>(i);
}

Vector stack(const Vector& x, const Vector& y)
{
    Vector z(x.size() + y.size());
    z << x, y;
    return z;
}

bool lex_less(const Vector& a, const Vector& b)
{
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

std::string cell(std::size_t x, std::size_t w)
{
    return "(x#" + std::to_string(x) + ", w#" + std::to_string(w) + ")";
}

/// True when f(x, y) has no x-dependence, decided structurally from the leaves.
bool depends_on_x(const FnExpr& f, Eigen::Index n)
{
    switch (f.kind())
    {
    case FnExpr::Kind::Affine:
        return f.a().head(n).cwiseAbs().maxCoeff() > 0;
    case FnExpr::Kind::Quadratic:
        return f.a().head(n).cwiseAbs().maxCoeff() > 0 || f.q().topRows(n).cwiseAbs().maxCoeff() > 0;
    default:
        return std::any_of(f.children().begin(), f.children().end(),
                           [n](const FnExpr& c) { return depends_on_x(c, n); });
    }
}

bool is_affine_tree(const FnExpr& f)
{
    if (f.kind() == FnExpr::Kind::Quadratic)
        return f.q().cwiseAbs().maxCoeff() == 0;
    if (f.kind() == FnExpr::Kind::Max || f.kind() == FnExpr::Kind::Min)
        return false;
    return std::all_of(f.children().begin(), f.children().end(), is_affine_tree);
}

/// Feasible candidates and stage costs: feas[w][x] and cost[w][x], aligned.
struct Stage
{
    std::vector<std::vector<std::vector<std::size_t>>> feas;
    std::vector<std::vector<std::vector<Scalar>>> cost;
};

Stage prepare(const DPModel& model)
{
    Stage s;
    const std::size_t ns = model.size();
    const std::size_t nw = model.shocks();
    s.feas.assign(nw, std::vector<std::vector<std::size_t>>(ns));
    s.cost.assign(nw, std::vector<std::vector<Scalar>>(ns));
    for (std::size_t w = 0; w < nw; ++w)
        for (std::size_t x = 0; x < ns; ++x)
        {
            auto f = model.feasible(x, w);
            if (f.empty())
                throw InapplicableError("bellman: empty feasible set at " + cell(x, w));
            std::vector<Scalar> c;
            c.reserve(f.size());
            for (std::size_t y : f)
            {
                const Scalar val = eval(model.cost[w], stack(model.states[x], model.states[y]));
                if (!std::isfinite(val))
                    throw std::domain_error("bellman: non-finite cost at " + cell(x, w) + " -> y#" +
                                            std::to_string(y));
                c.push_back(val);
            }
            s.feas[w][x] = std::move(f);
            s.cost[w][x] = std::move(c);
        }
    return s;
}

/// C(y, w) = sum_w' P(w, w') phi(y, w').
Matrix continuation(const DPModel& model, const Matrix& phi)
{
    return phi * model.kernel.matrix().transpose();
}

Matrix apply(const DPModel& model, const Stage& s, const Matrix& phi)
{
    const Matrix c = continuation(model, phi);
    Matrix out(idx(model.size()), idx(model.shocks()));
    for (std::size_t w = 0; w < model.shocks(); ++w)
        for (std::size_t x = 0; x < model.size(); ++x)
        {
            Scalar best = std::numeric_limits<Scalar>::infinity();
            const auto& f = s.feas[w][x];
            for (std::size_t k = 0; k < f.size(); ++k)
                best = std::min(best, s.cost[w][x][k] + model.beta * c(idx(f[k]), idx(w)));
            out(idx(x), idx(w)) = best;
        }
    return out;
}

bool admits(const DPModel& model, std::size_t x, std::size_t w, std::size_t y)
{
    const ConstraintMap& g = model.constraints;
    const Vector& xv = model.states[x];
    const Vector& yv = model.states[y];
    switch (g.kind)
    {
    case ConstraintMap::Kind::Finite: {
        const auto& lists = g.finite[w];
        if (lists.empty())
            return true;
        return std::find(lists[x].begin(), lists[x].end(), y) != lists[x].end();
    }
    case ConstraintMap::Kind::Box: {
        const BoxBounds& b = g.boxes[w];
        return (yv.array() >= b.lower_at(xv).array() - kFeasTol).all() &&
               (yv.array() <= b.upper_at(xv).array() + kFeasTol).all();
    }
    case ConstraintMap::Kind::Nlp: {
        const Vector z = stack(xv, yv);
        for (const auto& phi : g.nlp[w].inequalities)
            if (eval(phi, z) > kFeasTol)
                return false;
        for (const auto& phi : g.nlp[w].equalities)
            if (std::abs(eval(phi, z)) > kFeasTol)
                return false;
        return true;
    }
    }
    return false;
}

/// Active constraint of Gamma(., w) at (x, y) with its gradient in (x, y).
struct Active
{
    Vector grad;
    bool equality = false;
    bool affine = true;
};

std::vector<Active> active_constraints(const DPModel& model, const Vector& x, const Vector& y, std::size_t w)
{
    const Eigen::Index n = model.dim();
    std::vector<Active> out;
    const ConstraintMap& g = model.constraints;
    if (g.kind == ConstraintMap::Kind::Box)
    {
        const BoxBounds& b = g.boxes[w];
        const Vector lo = b.lower_at(x);
        const Vector hi = b.upper_at(x);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            if (std::abs(y[i] - lo[i]) <= kFeasTol)
            {
                // lo_i(x) - y_i <= 0
                Vector grad = Vector::Zero(2 * n);
                if (b.lower_gain.size() > 0)
                    grad.head(n) = b.lower_gain.row(i).transpose();
                grad[n + i] = -1;
                out.push_back({grad, false, true});
            }
            if (std::abs(y[i] - hi[i]) <= kFeasTol)
            {
                // y_i - hi_i(x) <= 0
                Vector grad = Vector::Zero(2 * n);
                if (b.upper_gain.size() > 0)
                    grad.head(n) = -b.upper_gain.row(i).transpose();
                grad[n + i] = 1;
                out.push_back({grad, false, true});
            }
        }
    }
    else if (g.kind == ConstraintMap::Kind::Nlp)
    {
        const Vector z = stack(x, y);
        for (const auto& phi : g.nlp[w].inequalities)
            if (eval(phi, z) >= -kFeasTol)
                out.push_back({gradient(phi, z), false, is_affine_tree(phi)});
        for (const auto& phi : g.nlp[w].equalities)
            out.push_back({gradient(phi, z), true, is_affine_tree(phi)});
    }
    return out;
}

/// Conic combinations of the given gradients (inequalities with coefficients
/// in [0, r], equalities in [-r, r]) after applying `proj`.
SetRep truncated_cone(const std::vector<Active>& act, const Matrix& proj, Scalar radius)
{
    SetRep cone = SetRep::point(Vector::Zero(proj.rows()));
    for (const auto& a : act)
    {
        const Vector g = radius * (proj * a.grad);
        const Vector lo = a.equality ? Vector(-g) : Vector(Vector::Zero(g.size()));
        cone = minkowski_sum(cone, SetRep::polytope({lo, g}));
    }
    return cone;
}

std::vector<std::size_t> neighbours(const DPModel& model, std::size_t x, Scalar radius)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < model.size(); ++i)
        if ((model.states[i] - model.states[x]).norm() <= radius + 1e-12)
            out.push_back(i);
    return out;
}

MeasureSpace kernel_row(const DPModel& model, std::size_t w, std::vector<std::size_t>& support)
{
    std::vector<Atom> atoms;
    support.clear();
    for (std::size_t w2 = 0; w2 < model.shocks(); ++w2)
    {
        const Scalar p = model.kernel(w, w2);
        if (p <= 0)
            continue;
        Vector label(1);
        label[0] = static_cast<Scalar>(w2);
        atoms.push_back({label, p});
        support.push_back(w2);
    }
    return MeasureSpace(std::move(atoms));
}

/// Clarke or limiting d_x u(y, g(y, w'), w') over the support of P(. | w).
SetValuedMap next_period_x_subdiffs(const DPModel& model, const PolicyTable& g, std::size_t y,
                                    const std::vector<std::size_t>& support, bool clarke, bool& exact)
{
    std::vector<SetRep> sets;
    for (std::size_t w2 : support)
    {
        const std::size_t y2 = g.selector[w2][y];
        const FnExpr f = cost_in_x(model, w2, model.states[y2]);
        const SubdiffResult r = clarke ? clarke_gradient(f, model.states[y]) : limiting_subdiff(f, model.states[y]);
        exact = exact && r.exact;
        sets.push_back(r.set);
    }
    return SetValuedMap(std::move(sets));
}

/// sup over pairs a, b near x of the Lipschitz-like test for Gamma(., w) around y.
bool gamma_lipschitz_like(const DPModel& model, std::size_t x, std::size_t y, std::size_t w, Scalar radius)
{
    const auto u = neighbours(model, x, radius);
    for (std::size_t a : u)
        for (std::size_t b : u)
        {
            if (a == b)
                continue;
            const Scalar dx = (model.states[a] - model.states[b]).norm();
            const auto fb = model.feasible(b, w);
            for (std::size_t yy : model.feasible(a, w))
            {
                if ((model.states[yy] - model.states[y]).norm() > radius + 1e-12)
                    continue;
                Scalar d = std::numeric_limits<Scalar>::infinity();
                for (std::size_t z : fb)
                    d = std::min(d, (model.states[z] - model.states[yy]).norm());
                if (d > kLipschitzCap * dx + 1e-12)
                    return false;
            }
        }
    return true;
}

/// dist(y, G(x')) <= cap * |x' - x| for grid x' near x.
bool policy_inner_semicontinuous(const DPModel& model, const PolicyTable& g, std::size_t x, std::size_t y,
                                 std::size_t w, Scalar radius)
{
    for (std::size_t b : neighbours(model, x, radius))
    {
        if (b == x)
            continue;
        Scalar d = std::numeric_limits<Scalar>::infinity();
        for (std::size_t z : g.argmin[w][b])
            d = std::min(d, (model.states[z] - model.states[y]).norm());
        if (d > kLipschitzCap * (model.states[b] - model.states[x]).norm() + 1e-12)
            return false;
    }
    return true;
}

Scalar polish_gap(const DPModel& model, std::size_t w, std::size_t x, std::size_t y0)
{
    const BoxBounds& b = model.constraints.boxes[w];
    const Vector lo = b.lower_at(model.states[x]);
    const Vector hi = b.upper_at(model.states[x]);
    const FnExpr f = cost_in_y(model, w, model.states[x]);
    Vector y = model.states[y0];
    const Scalar start = eval(f, y);
    Scalar fy = start;
    for (int it = 0; it < 50; ++it)
    {
        const Vector grad = gradient(f, y);
        Scalar t = 1.0;
        bool moved = false;
        for (int k = 0; k < 40; ++k, t *= 0.5)
        {
            const Vector cand = (y - t * grad).cwiseMax(lo).cwiseMin(hi);
            const Scalar fc = eval(f, cand);
            if (fc <= fy - 1e-4 * (cand - y).squaredNorm() / t && (cand - y).norm() > 0)
            {
                y = cand;
                fy = fc;
                moved = true;
                break;
            }
        }
        if (!moved)
            break;
    }
    return start - fy;
}

} // namespace

bool BoxBounds::depends_on_x() const
{
    const auto nonzero = [](const Matrix& m) { return m.size() > 0 && m.cwiseAbs().maxCoeff() > 0; };
    return nonzero(lower_gain) || nonzero(upper_gain);
}

Vector BoxBounds::lower_at(const Vector& x) const
{
    return lower_gain.size() > 0 ? Vector(lower + lower_gain * x) : lower;
}

Vector BoxBounds::upper_at(const Vector& x) const
{
    return upper_gain.size() > 0 ? Vector(upper + upper_gain * x) : upper;
}

ConstraintMap ConstraintMap::all_states(std::size_t shocks)
{
    ConstraintMap g;
    g.kind = Kind::Finite;
    g.finite.assign(shocks, {});
    return g;
}

ConstraintMap ConstraintMap::box(std::vector<BoxBounds> per_shock)
{
    ConstraintMap g;
    g.kind = Kind::Box;
    g.boxes = std::move(per_shock);
    return g;
}

ConstraintMap ConstraintMap::nonlinear(std::vector<NlpConstraints> per_shock)
{
    ConstraintMap g;
    g.kind = Kind::Nlp;
    g.nlp = std::move(per_shock);
    return g;
}

void DPModel::validate() const
{
    if (states.empty())
        throw std::invalid_argument("DPModel: empty state grid");
    const Eigen::Index n = dim();
    if (n == 0)
        throw std::invalid_argument("DPModel: zero-dimensional states");
    for (const auto& s : states)
    {
        if (s.size() != n)
            throw std::invalid_argument("DPModel: states have mixed dimensions");
        if (!s.allFinite())
            throw std::invalid_argument("DPModel: non-finite state");
    }
    if (!(beta >= 0 && beta < 1))
        throw std::invalid_argument("DPModel: discount must lie in [0, 1)");
    if (cost.size() != shocks())
        throw std::invalid_argument("DPModel: need one cost expression per shock");
    for (const auto& u : cost)
        if (u.dim() != 2 * n)
            throw std::invalid_argument("DPModel: cost must be a function of (x, y) in R^" + std::to_string(2 * n));
    const ConstraintMap& g = constraints;
    switch (g.kind)
    {
    case ConstraintMap::Kind::Finite:
        if (g.finite.size() != shocks())
            throw std::invalid_argument("ConstraintMap: need one finite list family per shock");
        for (const auto& lists : g.finite)
        {
            if (lists.empty())
                continue;
            if (lists.size() != size())
                throw std::invalid_argument("ConstraintMap: finite lists must cover every state");
            for (const auto& l : lists)
            {
                if (l.empty())
                    throw std::invalid_argument("ConstraintMap: empty candidate list");
                for (std::size_t y : l)
                    if (y >= size())
                        throw std::invalid_argument("ConstraintMap: candidate index out of range");
            }
        }
        break;
    case ConstraintMap::Kind::Box:
        if (g.boxes.size() != shocks())
            throw std::invalid_argument("ConstraintMap: need one box per shock");
        for (const auto& b : g.boxes)
        {
            if (b.lower.size() != n || b.upper.size() != n)
                throw std::invalid_argument("ConstraintMap: box bound dimension mismatch");
            for (const Matrix* m : {&b.lower_gain, &b.upper_gain})
                if (m->size() > 0 && (m->rows() != n || m->cols() != n))
                    throw std::invalid_argument("ConstraintMap: box gain must be n x n");
            for (const auto& s : states)
                if (!(b.lower_at(s).array() < b.upper_at(s).array()).all())
                    throw std::invalid_argument("ConstraintMap: box requires lower < upper");
        }
        break;
    case ConstraintMap::Kind::Nlp:
        if (g.nlp.size() != shocks())
            throw std::invalid_argument("ConstraintMap: need one NLP block per shock");
        for (const auto& block : g.nlp)
            for (const auto* fs : {&block.inequalities, &block.equalities})
                for (const auto& phi : *fs)
                {
                    if (phi.dim() != 2 * n)
                        throw std::invalid_argument("ConstraintMap: NLP function must act on (x, y)");
                    if (!phi.is_smooth())
                        throw std::invalid_argument("ConstraintMap: NLP functions must be smooth");
                }
        break;
    }
}

std::vector<std::size_t> DPModel::feasible(std::size_t x, std::size_t w) const
{
    const ConstraintMap& g = constraints;
    if (g.kind == ConstraintMap::Kind::Finite && !g.finite[w].empty())
    {
        auto l = g.finite[w][x];
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
        return l;
    }
    std::vector<std::size_t> out;
    for (std::size_t y = 0; y < size(); ++y)
        if (admits(*this, x, w, y))
            out.push_back(y);
    return out;
}

bool DPModel::constraints_independent_of_x(std::size_t w) const
{
    const ConstraintMap& g = constraints;
    switch (g.kind)
    {
    case ConstraintMap::Kind::Finite: {
        const auto& lists = g.finite[w];
        if (lists.empty())
            return true;
        const auto first = feasible(0, w);
        for (std::size_t x = 1; x < size(); ++x)
            if (feasible(x, w) != first)
                return false;
        return true;
    }
    case ConstraintMap::Kind::Box:
        return !g.boxes[w].depends_on_x();
    case ConstraintMap::Kind::Nlp: {
        const auto& block = g.nlp[w];
        const auto dep = [this](const FnExpr& f) { return depends_on_x(f, dim()); };
        return std::none_of(block.inequalities.begin(), block.inequalities.end(), dep) &&
               std::none_of(block.equalities.begin(), block.equalities.end(), dep);
    }
    }
    return false;
}

std::size_t DPModel::nearest_state(const Vector& x) const
{
    std::size_t best = 0;
    Scalar d = std::numeric_limits<Scalar>::infinity();
    for (std::size_t i = 0; i < size(); ++i)
    {
        const Scalar di = (states[i] - x).norm();
        if (di < d)
        {
            d = di;
            best = i;
        }
    }
    return best;
}

Box DPModel::grid_box() const
{
    Vector lo = states.front();
    Vector hi = states.front();
    for (const auto& s : states)
    {
        lo = lo.cwiseMin(s);
        hi = hi.cwiseMax(s);
    }
    return {lo, hi};
}

FnExpr cost_in_x(const DPModel& model, std::size_t w, const Vector& y)
{
    const Eigen::Index n = model.dim();
    Matrix m = Matrix::Zero(2 * n, n);
    m.topRows(n).setIdentity();
    return compose_affine(model.cost[w], m, stack(Vector::Zero(n), y));
}

FnExpr cost_in_y(const DPModel& model, std::size_t w, const Vector& x)
{
    const Eigen::Index n = model.dim();
    Matrix m = Matrix::Zero(2 * n, n);
    m.bottomRows(n).setIdentity();
    return compose_affine(model.cost[w], m, stack(x, Vector::Zero(n)));
}

Matrix bellman_operator(const DPModel& model, const Matrix& phi)
{
    model.validate();
    if (phi.rows() != idx(model.size()) || phi.cols() != idx(model.shocks()))
        throw DimensionError("bellman_operator: table must be states x shocks");
    if (!phi.allFinite())
        throw std::domain_error("bellman_operator: table must be finite");
    return apply(model, prepare(model), phi);
}

ValueTable value_iteration(const DPModel& model, Scalar tol)
{
    model.validate();
    if (!(tol > 0))
        throw std::invalid_argument("value_iteration: tolerance must be positive");
    const Stage s = prepare(model);
    ValueTable out;
    out.tolerance = tol;
    Matrix v = Matrix::Zero(idx(model.size()), idx(model.shocks()));
    constexpr std::size_t kMaxIter = 1'000'000;
    for (;;)
    {
        const Matrix next = apply(model, s, v);
        ++out.iterations;
        if (!next.allFinite())
            throw std::domain_error("value_iteration: non-finite values");
        const Scalar step = (next - v).cwiseAbs().maxCoeff();
        v = next;
        if (model.beta == 0 || model.beta / (1 - model.beta) * step <= tol)
            break;
        if (out.iterations >= kMaxIter)
            throw std::runtime_error("value_iteration: no convergence within the iteration cap");
    }
    out.values = v;
    out.bellman_residual = (apply(model, s, v) - v).cwiseAbs().maxCoeff();
    out.closed_form.resize(model.shocks());
    for (std::size_t w = 0; w < model.shocks(); ++w)
        if (model.constraints_independent_of_x(w))
            out.closed_form[w] = value_form(model, out, w, model.states.front()).expr;

    if (model.beta == 0 && model.constraints.kind == ConstraintMap::Kind::Box &&
        std::all_of(model.cost.begin(), model.cost.end(), [](const FnExpr& u) { return u.is_smooth(); }))
    {
        out.min_gap = 0;
        for (std::size_t w = 0; w < model.shocks(); ++w)
            for (std::size_t x = 0; x < model.size(); ++x)
            {
                const auto& f = s.feas[w][x];
                const auto& c = s.cost[w][x];
                const std::size_t k = static_cast<std::size_t>(std::min_element(c.begin(), c.end()) - c.begin());
                out.min_gap = std::max(out.min_gap, polish_gap(model, w, x, f[k]));
            }
    }
    return out;
}

Scalar finite_horizon_oracle(const DPModel& model, std::size_t horizon, std::size_t x, std::size_t w)
{
    model.validate();
    if (x >= model.size() || w >= model.shocks())
        throw std::out_of_range("finite_horizon_oracle: state or shock out of range");
    if (horizon == 0)
        return 0;
    const Stage s = prepare(model);
    const auto stage_min = [&](std::size_t shock, const Vector* cont) {
        Vector out(idx(model.size()));
        for (std::size_t xi = 0; xi < model.size(); ++xi)
        {
            Scalar best = std::numeric_limits<Scalar>::infinity();
            const auto& f = s.feas[shock][xi];
            for (std::size_t k = 0; k < f.size(); ++k)
                best = std::min(best, s.cost[shock][xi][k] + (cont ? model.beta * (*cont)[idx(f[k])] : 0.0));
            out[idx(xi)] = best;
        }
        return out;
    };
    if (horizon == 1)
        return stage_min(w, nullptr)[idx(x)];

    // Nodes are shock histories after w; values are functions of the state.
    std::map<std::vector<std::size_t>, Vector> level;
    for (const auto& path : iterate_kernel(model.kernel, horizon - 1, w))
        level[path.labels] = stage_min(path.labels.back(), nullptr);
    for (std::size_t depth = horizon - 1; depth >= 1; --depth)
    {
        std::map<std::vector<std::size_t>, Vector> cont;
        for (const auto& [hist, val] : level)
        {
            std::vector<std::size_t> parent(hist.begin(), hist.end() - 1);
            const std::size_t from = parent.empty() ? w : parent.back();
            auto [it, fresh] = cont.try_emplace(parent, Vector::Zero(idx(model.size())));
            it->second += model.kernel(from, hist.back()) * val;
        }
        std::map<std::vector<std::size_t>, Vector> up;
        for (const auto& [hist, c] : cont)
            up[hist] = stage_min(hist.empty() ? w : hist.back(), &c);
        level = std::move(up);
    }
    return level.at({})[idx(x)];
}

Scalar cost_sup_norm(const DPModel& model)
{
    model.validate();
    const Stage s = prepare(model);
    Scalar m = 0;
    for (const auto& per_x : s.cost)
        for (const auto& c : per_x)
            for (Scalar val : c)
                m = std::max(m, std::abs(val));
    return m;
}

PolicyTable policy_multifunction(const DPModel& model, const ValueTable& v, Scalar tol_scale)
{
    model.validate();
    const Stage s = prepare(model);
    const Matrix c = continuation(model, v.values);
    PolicyTable p;
    p.argmin.assign(model.shocks(), std::vector<std::vector<std::size_t>>(model.size()));
    p.selector.assign(model.shocks(), std::vector<std::size_t>(model.size()));
    for (std::size_t w = 0; w < model.shocks(); ++w)
        for (std::size_t x = 0; x < model.size(); ++x)
        {
            const auto& f = s.feas[w][x];
            std::vector<Scalar> q(f.size());
            for (std::size_t k = 0; k < f.size(); ++k)
                q[k] = s.cost[w][x][k] + model.beta * c(idx(f[k]), idx(w));
            const Scalar m = *std::min_element(q.begin(), q.end());
            auto& g = p.argmin[w][x];
            for (std::size_t k = 0; k < f.size(); ++k)
                if (q[k] <= m + tol_scale * (1 + std::abs(m)))
                    g.push_back(f[k]);
            std::sort(g.begin(), g.end(),
                      [&](std::size_t a, std::size_t b) { return lex_less(model.states[a], model.states[b]); });
            p.selector[w][x] = g.front();
        }
    return p;
}

Viability check_viability(const DPModel& model, const PolicyTable& g, std::size_t x, std::size_t w, Scalar radius)
{
    if (x >= model.size() || w >= model.shocks())
        throw std::out_of_range("check_viability: state or shock out of range");
    Viability out;
    out.upper_automatic = model.constraints_independent_of_x(w);
    const auto u = neighbours(model, x, radius);
    for (std::size_t a : u)
        for (std::size_t b : u)
        {
            ++out.pairs;
            const auto& ga = g.argmin[w][a];
            bool any = false;
            bool all = true;
            for (std::size_t y : ga)
            {
                const bool ok = admits(model, b, w, y);
                any = any || ok;
                all = all && ok;
            }
            out.lower = out.lower && any;
            if (!out.upper_automatic)
                out.upper = out.upper && all;
        }
    return out;
}

ValueForm value_form(const DPModel& model, const ValueTable& v, std::size_t w, const Vector& x)
{
    require_dim(model.dim(), x.size(), "value_form");
    if (w >= model.shocks())
        throw std::out_of_range("value_form: shock out of range");
    const Eigen::Index n = model.dim();
    const Matrix c = continuation(model, v.values);
    ValueForm out{FnExpr::constant(n, 0), true};
    std::vector<FnExpr> branches;

    if (model.constraints_independent_of_x(w))
    {
        for (std::size_t y : model.feasible(0, w))
            branches.push_back(cost_in_x(model, w, model.states[y]) +
                               FnExpr::constant(n, model.beta * c(idx(y), idx(w))));
    }
    else
    {
        const std::size_t xi = model.nearest_state(x);
        if ((model.states[xi] - x).norm() > 1e-12)
            throw InapplicableError("value_form: constraints depend on x, so the local form needs a grid state");
        for (std::size_t y : model.feasible(xi, w))
        {
            const Vector& yv = model.states[y];
            std::vector<Active> moving;
            for (auto& a : active_constraints(model, x, yv, w))
                if (a.grad.head(n).cwiseAbs().maxCoeff() > 0)
                    moving.push_back(std::move(a));
            const FnExpr cont = FnExpr::constant(n, model.beta * c(idx(y), idx(w)));
            if (moving.empty())
            {
                branches.push_back(cost_in_x(model, w, yv) + cont);
                continue;
            }
            // Keep the active constraints satisfied to first order: A_y D = -A_x.
            Matrix ay(idx(moving.size()), n);
            Matrix ax(idx(moving.size()), n);
            for (std::size_t r = 0; r < moving.size(); ++r)
            {
                ax.row(idx(r)) = moving[r].grad.head(n).transpose();
                ay.row(idx(r)) = moving[r].grad.tail(n).transpose();
                out.exact = out.exact && moving[r].affine;
            }
            const Matrix d = ay.completeOrthogonalDecomposition().solve(Matrix(-ax));
            Matrix m(2 * n, n);
            m.topRows(n).setIdentity();
            m.bottomRows(n) = d;
            branches.push_back(compose_affine(model.cost[w], m, stack(Vector::Zero(n), yv - d * x)) + cont);
            if (model.beta > 0)
                out.exact = false;
        }
    }
    out.expr = branches.size() == 1 ? branches.front() : FnExpr::min_of(std::move(branches));
    return out;
}

SubdiffResult value_function_subdiff(const DPModel& model, const ValueTable& v, std::size_t w, const Vector& x,
                                     SubdiffKind kind)
{
    const ValueForm f = value_form(model, v, w, x);
    SubdiffResult r = kind == SubdiffKind::Clarke ? clarke_gradient(f.expr, x) : limiting_subdiff(f.expr, x);
    r.exact = r.exact && f.exact;
    return r;
}

Scalar default_radius(const DPModel& model)
{
    Scalar h = std::numeric_limits<Scalar>::infinity();
    for (std::size_t i = 0; i < model.size(); ++i)
        for (std::size_t j = i + 1; j < model.size(); ++j)
        {
            const Scalar d = (model.states[i] - model.states[j]).norm();
            if (d > 0)
                h = std::min(h, d);
        }
    return std::isfinite(h) ? 1.5 * h : 1.0;
}

Report envelope_check(const DPModel& model, const ValueTable& v, const PolicyTable& g, std::size_t x, std::size_t w,
                      std::span<const Direction> dirs)
{
    Report r;
    r.check = "envelope";
    r.paper_ref = "Clarke envelope inclusion for the value function; local Lipschitz continuity";
    const Vector& xv = model.states[x];
    const std::size_t y = g.selector[w][x];
    const Vector& yv = model.states[y];
    const SubdiffResult cv = value_function_subdiff(model, v, w, xv, SubdiffKind::Clarke);
    const SubdiffResult cu = clarke_gradient(cost_in_x(model, w, yv), xv);
    for (const auto& h : dirs)
    {
        const Scalar gap = support(cv.set, h) - support(cu.set, h);
        r.per_direction.push_back(gap);
        r.max_residual = std::max(r.max_residual, gap);
    }
    const bool inclusion = r.max_residual <= 1e-8;

    const Scalar radius = default_radius(model);
    const Viability via = check_viability(model, g, x, w, radius);
    const Box gb = model.grid_box();
    const Scalar lip_u = lipschitz_modulus(model.cost[w], Box{stack(gb.lower, gb.lower), stack(gb.upper, gb.upper)});
    Scalar lip_v = 0;
    const auto u = neighbours(model, x, radius);
    for (std::size_t a : u)
        for (std::size_t b : u)
            if (a != b)
                lip_v = std::max(lip_v, std::abs(v.values(idx(a), idx(w)) - v.values(idx(b), idx(w))) /
                                            (model.states[a] - model.states[b]).norm());
    const bool lipschitz = lip_v <= lip_u + 1e-6;

    r.pass = inclusion && lipschitz;
    r.hypotheses["lower_viability"] = via.lower;
    r.hypotheses["upper_viability"] = via.upper;
    r.hypotheses["cost_regular"] = is_regular(model.cost[w], stack(xv, yv));
    r.hypotheses["value_form_exact"] = cv.exact && cu.exact;
    r.extras["x"] = x;
    r.extras["shock"] = w;
    r.extras["selector"] = y;
    r.extras["inclusion"] = inclusion;
    r.extras["lipschitz_estimate"] = lip_v;
    r.extras["lipschitz_bound"] = lip_u;
    r.extras["upper_viability_automatic"] = via.upper_automatic;
    if (!cv.exact)
        r.warnings.push_back("value-function subdifferential is an outer estimate");
    r.classify();
    return r;
}

Report strict_value_derivative_check(const DPModel& model, const ValueTable& v, const PolicyTable& g, std::size_t x,
                                     std::size_t w)
{
    Report r;
    r.check = "strict_value_derivative";
    r.paper_ref = "strict differentiability of the value function under upper viability";
    const Vector& xv = model.states[x];
    r.extras["x"] = x;
    r.extras["shock"] = w;
    if (g.argmin[w][x].size() > 1)
    {
        r.pass = false;
        r.verdict = Verdict::Inapplicable;
        r.warnings.push_back("policy tie at " + cell(x, w) + ": no strict derivative expected");
        return r;
    }
    const std::size_t y = g.selector[w][x];
    const auto du = strict_derivative(cost_in_x(model, w, model.states[y]), xv);
    if (!du)
    {
        r.pass = false;
        r.verdict = Verdict::Inapplicable;
        r.warnings.push_back("u(., y, w) is not strictly differentiable at x");
        return r;
    }
    const ValueForm f = value_form(model, v, w, xv);
    const auto dv = strict_derivative(f.expr, xv);
    const Scalar h = 1e-6;
    Vector fd(xv.size());
    for (Eigen::Index k = 0; k < xv.size(); ++k)
    {
        Vector e = Vector::Zero(xv.size());
        e[k] = h;
        fd[k] = (eval(f.expr, xv + e) - eval(f.expr, xv - e)) / (2 * h);
    }
    const Scalar fd_err = (fd - *du).cwiseAbs().maxCoeff();
    r.extras["grad_u"] = std::vector<Scalar>(du->data(), du->data() + du->size());
    r.extras["finite_difference"] = std::vector<Scalar>(fd.data(), fd.data() + fd.size());
    r.extras["fd_error"] = fd_err;
    if (dv)
    {
        r.max_residual = (*dv - *du).cwiseAbs().maxCoeff();
        r.extras["grad_v"] = std::vector<Scalar>(dv->data(), dv->data() + dv->size());
    }
    else
    {
        r.max_residual = std::numeric_limits<Scalar>::infinity();
        r.warnings.push_back("value form has no strict derivative at x");
    }
    const Viability via = check_viability(model, g, x, w, default_radius(model));
    r.hypotheses["upper_viability"] = via.upper;
    r.hypotheses["value_form_exact"] = f.exact;
    r.pass = dv.has_value() && r.max_residual <= 1e-8 && fd_err <= 1e-4;
    r.classify();
    return r;
}

Scalar euler_inclusion_residual(const DPModel& model, const ValueTable& v, const PolicyTable& g, std::size_t x,
                                std::size_t w, Scalar cone_radius, std::optional<std::size_t> y)
{
    if (!(cone_radius >= 0))
        throw std::invalid_argument("euler_inclusion_residual: cone radius must be nonnegative");
    (void)v;
    const Eigen::Index n = model.dim();
    const std::size_t yi = y.value_or(g.selector[w][x]);
    const Vector& xv = model.states[x];
    const Vector& yv = model.states[yi];

    SetRep rhs = clarke_gradient(cost_in_y(model, w, xv), yv).set;
    std::vector<std::size_t> support_w;
    const MeasureSpace m = kernel_row(model, w, support_w);
    bool exact = true;
    const SetValuedMap dx = next_period_x_subdiffs(model, g, yi, support_w, true, exact);
    rhs = minkowski_sum(rhs, scale(wstar_integral(dx, m), model.beta));

    if (model.constraints.kind == ConstraintMap::Kind::Nlp && !mfcq_check(model, xv, yv, w).holds)
        throw InapplicableError("euler_inclusion_residual: normal cone unavailable because MFCQ fails at " +
                                cell(x, w) + "; see mfcq_check");
    Matrix proj = Matrix::Zero(n, 2 * n);
    proj.rightCols(n).setIdentity();
    if (model.constraints.kind == ConstraintMap::Kind::Box)
    {
        const BoxBounds& b = model.constraints.boxes[w];
        rhs = minkowski_sum(rhs, normal_cone_box(b.lower_at(xv), b.upper_at(xv), yv, cone_radius));
    }
    else if (model.constraints.kind == ConstraintMap::Kind::Nlp)
        rhs = minkowski_sum(rhs, truncated_cone(active_constraints(model, xv, yv, w), proj, cone_radius));
    return distance_to_set(Vector::Zero(n), rhs);
}

Report euler_inclusion_check(const DPModel& model, const ValueTable& v, const PolicyTable& g, std::size_t x,
                             std::size_t w, Scalar cone_radius, Scalar tol)
{
    Report r;
    r.check = "euler_inclusion";
    r.paper_ref = "stochastic Euler inclusion with Clarke gradients and w*-integral";
    const std::size_t y = g.selector[w][x];
    r.max_residual = euler_inclusion_residual(model, v, g, x, w, cone_radius);
    r.pass = r.max_residual <= tol;
    const Vector z = stack(model.states[x], model.states[y]);
    r.hypotheses["cost_regular"] = is_regular(model.cost[w], z);
    r.hypotheses["upper_viability"] = check_viability(model, g, x, w, default_radius(model)).upper;
    r.extras["x"] = x;
    r.extras["shock"] = w;
    r.extras["selector"] = y;
    r.extras["cone_radius"] = cone_radius;
    if (model.constraints.kind == ConstraintMap::Kind::Finite)
        r.warnings.push_back("finite constraint map: normal cone taken as {0}, valid at interior minimizers only");
    r.classify();
    return r;
}

Report limiting_euler_check(const DPModel& model, const ValueTable& v, const PolicyTable& g, std::size_t x,
                            std::size_t w, std::span<const Direction> dirs, Scalar cone_radius, Scalar tol)
{
    (void)dirs;
    Report r;
    r.check = "limiting_euler";
    r.paper_ref = "limiting-subdifferential Euler relations: graph form and enhanced splitting";
    const Eigen::Index n = model.dim();
    const std::size_t yi = g.selector[w][x];
    const Vector& xv = model.states[x];
    const Vector& yv = model.states[yi];
    const Vector z = stack(xv, yv);
    Matrix proj = Matrix::Zero(n, 2 * n);
    proj.rightCols(n).setIdentity();
    const Vector origin = Vector::Zero(n);
    bool exact = true;

    bool cone_ok = true;
    if (model.constraints.kind == ConstraintMap::Kind::Nlp)
    {
        const MfcqResult mf = mfcq_check(model, xv, yv, w);
        r.hypotheses["mfcq"] = mf.holds;
        cone_ok = mf.holds;
    }
    if (!cone_ok)
    {
        r.pass = false;
        r.verdict = Verdict::Inapplicable;
        r.warnings.push_back("graph normal cone unavailable without MFCQ; see mfcq_check");
        return r;
    }
    const auto act = active_constraints(model, xv, yv, w);
    const SetRep cone_y = truncated_cone(act, proj, cone_radius);

    std::vector<std::size_t> support_w;
    const MeasureSpace m = kernel_row(model, w, support_w);

    // Graph form: y-projection of du + (0, beta int dv) + N(gph Gamma).
    const SubdiffResult du = limiting_subdiff(model.cost[w], z);
    exact = exact && du.exact;
    std::vector<SetRep> dv_sets;
    for (std::size_t w2 : support_w)
    {
        const SubdiffResult s = value_function_subdiff(model, v, w2, yv, SubdiffKind::Limiting);
        exact = exact && s.exact;
        dv_sets.push_back(s.set);
    }
    const SetValuedMap dv(std::move(dv_sets));
    const SetRep graph_base = minkowski_sum(linear_image(du.set, proj), cone_y);

    // Enhanced splitting: d_y u + beta int d_x u(y, g(y, w'), w') + N(y; Gamma(x, w)).
    const SubdiffResult duy = limiting_subdiff(cost_in_y(model, w, xv), yv);
    exact = exact && duy.exact;
    const SetValuedMap dux = next_period_x_subdiffs(model, g, yi, support_w, false, exact);
    const SetRep split_base = minkowski_sum(duy.set, cone_y);

    const auto residual = [&](const SetRep& base, const SetRep& integral) {
        return distance_to_set(origin, minkowski_sum(base, scale(integral, model.beta)));
    };
    const Scalar graph_conv = residual(graph_base, wstar_integral(dv, m));
    const Scalar split_conv = residual(split_base, wstar_integral(dux, m));
    nlohmann::json graph_raw = nullptr;
    nlohmann::json split_raw = nullptr;
    try
    {
        graph_raw = residual(graph_base, aumann_integral(dv, m));
        split_raw = residual(split_base, aumann_integral(dux, m));
    }
    catch (const CapacityError& e)
    {
        r.warnings.push_back(std::string("raw residual skipped: ") + e.what());
    }

    r.max_residual = std::max(graph_conv, split_conv);
    r.per_direction = {graph_conv, split_conv};
    r.pass = graph_conv <= tol && split_conv <= tol;
    r.extras["x"] = x;
    r.extras["shock"] = w;
    r.extras["selector"] = yi;
    r.extras["graph_residual_convexified"] = graph_conv;
    r.extras["graph_residual_raw"] = graph_raw;
    r.extras["split_residual_convexified"] = split_conv;
    r.extras["split_residual_raw"] = split_raw;
    r.extras["cone_radius"] = cone_radius;

    const Scalar radius = default_radius(model);
    const Viability via = check_viability(model, g, x, w, radius);
    r.hypotheses["lower_viability"] = via.lower;
    r.hypotheses["upper_viability"] = via.upper;
    r.hypotheses["cost_regular"] = is_regular(model.cost[w], z);
    r.hypotheses["gamma_lipschitz_like"] = gamma_lipschitz_like(model, x, yi, w, radius);
    r.hypotheses["policy_inner_semicontinuous"] = policy_inner_semicontinuous(model, g, x, yi, w, radius);
    r.hypotheses["subdifferentials_exact"] = exact;
    r.classify();
    return r;
}

MfcqResult mfcq_check(const DPModel& model, const Vector& x, const Vector& y, std::size_t w)
{
    if (model.constraints.kind != ConstraintMap::Kind::Nlp)
        throw std::invalid_argument("mfcq_check: constraint map is not in NLP form");
    const Eigen::Index n = model.dim();
    require_dim(n, x.size(), "mfcq_check");
    require_dim(n, y.size(), "mfcq_check");
    const auto& block = model.constraints.nlp[w];
    const Vector z = stack(x, y);
    MfcqResult out;
    out.xi = Vector::Zero(2 * n);

    const Eigen::Index r = idx(block.equalities.size());
    Matrix e(r, 2 * n);
    for (Eigen::Index i = 0; i < r; ++i)
        e.row(i) = gradient(block.equalities[static_cast<std::size_t>(i)], z).transpose();
    Matrix null_basis = Matrix::Identity(2 * n, 2 * n);
    if (r > 0)
    {
        Eigen::JacobiSVD<Matrix> svd(e, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const Scalar cut = 1e-10 * std::max<Scalar>(1.0, sv.size() > 0 ? sv[0] : 0.0);
        Eigen::Index rank = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            rank += sv[i] > cut ? 1 : 0;
        out.rank_ok = rank == r;
        null_basis = svd.matrixV().rightCols(2 * n - rank);
    }
    else
        out.rank_ok = true;

    std::vector<Vector> grads;
    for (std::size_t i = 0; i < block.inequalities.size(); ++i)
        if (eval(block.inequalities[i], z) >= -kFeasTol)
        {
            out.active.push_back(i);
            grads.push_back(gradient(block.inequalities[i], z));
        }
    if (grads.empty())
        out.direction_ok = true;
    else if (null_basis.cols() > 0)
    {
        // Gordan: a direction exists iff 0 is outside co{N^T a_i}; the
        // negated min-norm point p then has <N^T a_i, -p> <= -|p|^2.
        Matrix b(null_basis.cols(), idx(grads.size()));
        for (std::size_t i = 0; i < grads.size(); ++i)
            b.col(idx(i)) = null_basis.transpose() * grads[i];
        const Vector p = nearest_point_in_hull(Vector::Zero(b.rows()), b);
        if (p.norm() > 1e-10)
        {
            Vector xi = -(null_basis * p);
            xi /= xi.cwiseAbs().maxCoeff();
            Scalar slack = std::numeric_limits<Scalar>::infinity();
            for (const auto& a : grads)
                slack = std::min(slack, -a.dot(xi));
            out.xi = xi;
            out.slack = slack;
            out.direction_ok = slack > 1e-10;
        }
    }
    out.holds = out.rank_ok && out.direction_ok;
    return out;
}

MultiplierSet lagrange_multiplier_set(const DPModel& model, const ValueTable& v, const Vector& x, const Vector& y,
                                      std::size_t w)
{
    if (model.constraints.kind != ConstraintMap::Kind::Nlp)
        throw std::invalid_argument("lagrange_multiplier_set: constraint map is not in NLP form");
    const Eigen::Index n = model.dim();
    const auto& block = model.constraints.nlp[w];
    const Vector z = stack(x, y);
    MultiplierSet out;

    const auto du = strict_derivative(cost_in_y(model, w, x), y);
    if (!du)
        throw InapplicableError("lagrange_multiplier_set: u(x, ., w) is not strictly differentiable at y");
    Vector grad = *du;
    if (model.beta > 0)
        for (std::size_t w2 = 0; w2 < model.shocks(); ++w2)
        {
            const Scalar p = model.kernel(w, w2);
            if (p <= 0)
                continue;
            const auto dv = strict_derivative(value_form(model, v, w2, y).expr, y);
            if (!dv)
                throw InapplicableError("lagrange_multiplier_set: v(., w#" + std::to_string(w2) +
                                        ") is not strictly differentiable at y");
            grad += model.beta * p * *dv;
        }
    out.objective_gradient = grad;

    std::vector<std::size_t> act;
    for (std::size_t i = 0; i < block.inequalities.size(); ++i)
        if (eval(block.inequalities[i], z) >= -kFeasTol)
            act.push_back(i);
    if (act.size() > 16)
        throw CapacityError("lagrange_multiplier_set: more than 2^16 active subsets; simplify the model");
    const std::size_t m_ineq = block.inequalities.size();
    const std::size_t r_eq = block.equalities.size();
    std::vector<Vector> gy_ineq(m_ineq);
    for (std::size_t i : act)
        gy_ineq[i] = gradient(block.inequalities[i], z).tail(n);
    std::vector<Vector> gy_eq(r_eq);
    for (std::size_t j = 0; j < r_eq; ++j)
        gy_eq[j] = gradient(block.equalities[j], z).tail(n);

    for (std::uint32_t mask = 0; mask < (1u << act.size()); ++mask)
    {
        std::vector<std::size_t> subset;
        for (std::size_t k = 0; k < act.size(); ++k)
            if ((mask >> k) & 1u)
                subset.push_back(act[k]);
        const Eigen::Index cols = idx(subset.size() + r_eq);
        Vector lam_full = Vector::Zero(idx(m_ineq + r_eq));
        if (cols == 0)
        {
            if (grad.norm() > 1e-8)
                continue;
        }
        else
        {
            Matrix mat(n, cols);
            for (std::size_t k = 0; k < subset.size(); ++k)
                mat.col(idx(k)) = gy_ineq[subset[k]];
            for (std::size_t j = 0; j < r_eq; ++j)
                mat.col(idx(subset.size() + j)) = gy_eq[j];
            const auto cod = mat.completeOrthogonalDecomposition();
            if (cod.rank() < cols)
                continue;
            const Vector lam = cod.solve(Vector(-grad));
            if ((mat * lam + grad).norm() > 1e-8)
                continue;
            bool sign_ok = true;
            for (std::size_t k = 0; k < subset.size(); ++k)
            {
                if (lam[idx(k)] < -1e-10)
                    sign_ok = false;
                lam_full[idx(subset[k])] = std::max<Scalar>(lam[idx(k)], 0);
            }
            if (!sign_ok)
                continue;
            for (std::size_t j = 0; j < r_eq; ++j)
                lam_full[idx(m_ineq + j)] = lam[idx(subset.size() + j)];
        }
        const bool dup = std::any_of(out.vertices.begin(), out.vertices.end(), [&](const Vector& u) {
            return (u - lam_full).cwiseAbs().maxCoeff() <= 1e-9;
        });
        if (!dup)
        {
            out.vertices.push_back(lam_full);
            out.active_sets.push_back(subset);
        }
    }
    if (out.vertices.empty() && mfcq_check(model, x, y, w).holds)
        throw ConsistencyError("lagrange_multiplier_set: empty multiplier set although MFCQ holds");
    return out;
}

Report nlp_value_subdiff_check(const DPModel& model, const ValueTable& v, const PolicyTable& g, std::size_t x,
                               std::size_t w, std::span<const Direction> dirs)
{
    Report r;
    r.check = "nlp_value_subdiff";
    r.paper_ref = "limiting subgradients of the value function with NLP constraints via Lagrange multipliers";
    const Eigen::Index n = model.dim();
    const std::size_t yi = g.selector[w][x];
    const Vector& xv = model.states[x];
    const Vector& yv = model.states[yi];
    const Vector z = stack(xv, yv);
    r.extras["x"] = x;
    r.extras["shock"] = w;
    r.extras["selector"] = yi;

    const MfcqResult mf = mfcq_check(model, xv, yv, w);
    r.hypotheses["mfcq"] = mf.holds;
    r.extras["mfcq_certificate"] = std::vector<Scalar>(mf.xi.data(), mf.xi.data() + mf.xi.size());

    const auto dux = strict_derivative(cost_in_x(model, w, yv), xv);
    const bool smooth = strict_derivative(model.cost[w], z).has_value();
    r.hypotheses["strict_differentiability"] = smooth && dux.has_value();
    const Scalar radius = default_radius(model);
    r.hypotheses["policy_inner_semicontinuous"] = policy_inner_semicontinuous(model, g, x, yi, w, radius);

    MultiplierSet lam;
    try
    {
        if (!dux)
            throw InapplicableError("u(., y, w) is not strictly differentiable at x");
        lam = lagrange_multiplier_set(model, v, xv, yv, w);
    }
    catch (const InapplicableError& e)
    {
        r.pass = false;
        r.verdict = Verdict::Inapplicable;
        r.warnings.push_back(e.what());
        return r;
    }
    const auto& block = model.constraints.nlp[w];
    std::vector<Vector> gx;
    for (const auto& phi : block.inequalities)
        gx.push_back(gradient(phi, z).head(n));
    for (const auto& phi : block.equalities)
        gx.push_back(gradient(phi, z).head(n));
    std::vector<Vector> images;
    nlohmann::json lam_json = nlohmann::json::array();
    for (const auto& l : lam.vertices)
    {
        Vector p = *dux;
        for (std::size_t i = 0; i < gx.size(); ++i)
            p += l[idx(i)] * gx[i];
        images.push_back(p);
        lam_json.push_back(std::vector<Scalar>(l.data(), l.data() + l.size()));
    }
    r.extras["multipliers"] = lam_json;
    if (images.empty())
    {
        r.pass = false;
        r.warnings.push_back("empty multiplier set");
        r.classify();
        return r;
    }
    const SetRep rhs = SetRep::polytope(images);

    const SubdiffResult dv = value_function_subdiff(model, v, w, xv, SubdiffKind::Limiting);
    const Matrix verts = dv.set.all_vertices();
    for (Eigen::Index k = 0; k < verts.cols(); ++k)
    {
        const Scalar d = distance_to_set(verts.col(k), rhs);
        r.per_direction.push_back(d);
        r.max_residual = std::max(r.max_residual, d);
    }
    bool pass = r.max_residual <= 1e-6;

    // Central differences of the table along grid lines through x.
    nlohmann::json fd_json = nlohmann::json::array();
    Vector fd = Vector::Zero(n);
    bool fd_complete = true;
    for (Eigen::Index k = 0; k < n; ++k)
    {
        std::optional<std::size_t> lo, hi;
        for (std::size_t i = 0; i < model.size(); ++i)
        {
            Vector d = model.states[i] - xv;
            const Scalar t = d[k];
            d[k] = 0;
            if (d.norm() > 1e-12 || t == 0)
                continue;
            if (t > 0 && (!hi || t < model.states[*hi][k] - xv[k]))
                hi = i;
            if (t < 0 && (!lo || t > model.states[*lo][k] - xv[k]))
                lo = i;
        }
        if (!lo || !hi)
        {
            fd_complete = false;
            fd_json.push_back(nullptr);
            continue;
        }
        fd[k] = (v.values(idx(*hi), idx(w)) - v.values(idx(*lo), idx(w))) /
                (model.states[*hi][k] - model.states[*lo][k]);
        fd_json.push_back(fd[k]);
    }
    r.extras["finite_difference"] = fd_json;
    if (fd_complete)
    {
        const Scalar fd_dist = distance_to_set(fd, rhs);
        r.extras["fd_distance"] = fd_dist;
        pass = pass && fd_dist <= 1e-4;
    }

    Scalar ell = 0;
    for (std::size_t b : neighbours(model, x, radius))
        if (b != x)
            ell = std::max(ell, (model.states[g.selector[w][b]] - yv).norm() / (model.states[b] - xv).norm());
    const bool upper_lip = ell <= kLipschitzCap;
    r.extras["selector_lipschitz_estimate"] = ell;
    r.extras["equality_asserted"] = upper_lip;
    if (upper_lip)
    {
        const Scalar hd = hausdorff_distance(dv.set, rhs, dirs);
        r.extras["hausdorff"] = hd;
        pass = pass && hd <= 1e-6;
    }
    r.hypotheses["subdifferential_exact"] = dv.exact;
    r.pass = pass;
    r.classify();
    return r;
}

} // namespace leibniz
