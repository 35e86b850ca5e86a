#include "leibniz/setintegral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace leibniz
{

SetValuedMap::SetValuedMap(std::vector<SetRep> values) : values_(std::move(values))
{
    if (values_.empty())
        throw std::invalid_argument("SetValuedMap: at least one atom is required");
    for (const auto& v : values_)
        require_dim(values_.front().dim(), v.dim(), "SetValuedMap value");
}

Integrand::Integrand(std::vector<FnExpr> atoms) : atoms_(std::move(atoms))
{
    if (atoms_.empty())
        throw std::invalid_argument("Integrand: at least one atom is required");
    for (const auto& f : atoms_)
        require_dim(atoms_.front().dim(), f.dim(), "Integrand atom");
}

namespace
{

void require_atoms(std::size_t have, const MeasureSpace& m, const char* what)
{
    if (have != m.size())
        throw DimensionError(std::string(what) + ": " + std::to_string(have) + " atom values for a measure with " +
                             std::to_string(m.size()) + " atoms");
}

double max_abs(std::span<const double> xs)
{
    double m = 0;
    for (double x : xs)
        m = std::max(m, std::abs(x));
    return m;
}

} // namespace

FnExpr integral_functional(const Integrand& phi, const MeasureSpace& m)
{
    require_atoms(phi.size(), m, "integral_functional");
    std::vector<FnExpr> terms;
    terms.reserve(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
        terms.push_back(FnExpr::scale(m[i].weight, phi[i]));
    return FnExpr::sum(std::move(terms));
}

SetRep aumann_integral(const SetValuedMap& gamma, const MeasureSpace& m)
{
    require_atoms(gamma.size(), m, "aumann_integral");
    SetRep acc = scale(gamma[0], m[0].weight);
    for (std::size_t i = 1; i < gamma.size(); ++i)
    {
        try
        {
            acc = minkowski_sum(acc, scale(gamma[i], m[i].weight));
        }
        catch (const CapacityError& e)
        {
            throw CapacityError(std::string(e.what()) + "; the selector integral is too large, use wstar_integral");
        }
    }
    return acc;
}

SetRep wstar_integral(const SetValuedMap& gamma, const MeasureSpace& m)
{
    require_atoms(gamma.size(), m, "wstar_integral");
    SetRep acc = scale(convexify(gamma[0]), m[0].weight);
    for (std::size_t i = 1; i < gamma.size(); ++i)
        acc = convexify(minkowski_sum(acc, scale(convexify(gamma[i]), m[i].weight)));
    return acc;
}

Report check_supremum_representation(const SetValuedMap& gamma, const MeasureSpace& m,
                                     std::span<const Direction> dirs)
{
    Report r;
    r.check = "supremum_representation";
    r.paper_ref = "supremum representation of the integral of support functions";
    if (dirs.empty())
        throw std::invalid_argument("check_supremum_representation: no directions");
    const SetRep integral = aumann_integral(gamma, m);
    for (const auto& d : dirs)
    {
        const Vector h = d.vec().normalized();
        double lhs = 0;
        for (std::size_t i = 0; i < gamma.size(); ++i)
            lhs += m[i].weight * support(gamma[i], h);
        r.per_direction.push_back(lhs - support(integral, h));
    }
    r.max_residual = max_abs(r.per_direction);
    r.pass = r.max_residual <= 1e-9;
    r.extras["selector_sums"] = integral.piece_count();
    r.classify();
    return r;
}

Report check_lyapunov_convexification(const std::function<MapInstance(std::size_t)>& family,
                                      std::span<const std::size_t> ns, std::span<const Direction> dirs)
{
    Report r;
    r.check = "lyapunov_convexification";
    r.paper_ref = "convexity of the set integral under refinement (nonatomic/saturated limit)";
    if (ns.empty())
        throw std::invalid_argument("check_lyapunov_convexification: empty refinement list");
    nlohmann::json table = nlohmann::json::array();
    std::vector<double> gaps;
    for (std::size_t n : ns)
    {
        const auto inst = family(n);
        const SetRep a = aumann_integral(inst.map, inst.measure);
        const SetRep w = wstar_integral(inst.map, inst.measure);
        const double gap = hausdorff_distance(a, w, dirs);
        gaps.push_back(gap);
        table.push_back({{"N", n}, {"gap", gap}});
    }
    r.per_direction = gaps;
    bool monotone = true;
    bool contracting = true;
    for (std::size_t k = 1; k < gaps.size(); ++k)
    {
        if (gaps[k] > gaps[k - 1] + 1e-12)
            monotone = false;
        if (ns[k] == 2 * ns[k - 1] && gaps[k - 1] > 1e-12 && gaps[k] > 0.75 * gaps[k - 1] + 1e-12)
            contracting = false;
    }
    if (!monotone)
        r.warnings.push_back("gap increased along the refinement sequence");
    if (!contracting)
        r.warnings.push_back("gap did not shrink by the factor 0.75 on some doubling step");
    r.pass = monotone && contracting;
    r.max_residual = gaps.back();
    r.extras["table"] = table;
    r.classify();
    return r;
}

Report clarke_leibniz_check(const Integrand& phi, const MeasureSpace& m, const Vector& x,
                            std::span<const Direction> dirs)
{
    Report r;
    r.check = "clarke_leibniz";
    r.paper_ref = "Clarke subdifferential Leibniz rule (inclusion; equality under regularity)";
    if (dirs.empty())
        throw std::invalid_argument("clarke_leibniz_check: no directions");
    require_atoms(phi.size(), m, "clarke_leibniz_check");

    const FnExpr total = integral_functional(phi, m);
    const SubdiffResult lhs = clarke_gradient(total, x);
    std::vector<SetRep> atom_sets;
    bool atoms_exact = true;
    bool atoms_regular = true;
    for (std::size_t i = 0; i < phi.size(); ++i)
    {
        const auto g = clarke_gradient(phi[i], x);
        atoms_exact = atoms_exact && g.exact;
        atoms_regular = atoms_regular && g.exact && g.regular;
        if (!g.exact)
            r.warnings.push_back("atom " + std::to_string(i) + ": inexact subdifferential, inclusion-only check");
        atom_sets.push_back(g.set);
    }
    const SetRep rhs = wstar_integral(SetValuedMap(atom_sets), m);
    if (!lhs.exact)
        r.warnings.push_back("integral functional: outer estimate of the subdifferential");

    const bool equality = atoms_exact && atoms_regular && lhs.exact;
    double worst_excess = 0;
    double worst_gap = 0;
    for (const auto& d : dirs)
    {
        const Vector h = d.vec().normalized();
        const double sl = support(lhs.set, h);
        const double sr = support(rhs, h);
        const double tol = inclusion_tol(std::max(std::abs(sl), std::abs(sr)));
        r.per_direction.push_back(sl - sr);
        worst_excess = std::max(worst_excess, sl - sr - tol);
        worst_gap = std::max(worst_gap, std::abs(sl - sr) - tol);
    }
    const bool inclusion = worst_excess <= 0;
    const bool equal = worst_gap <= 0;
    r.pass = inclusion && (!equality || equal);
    r.max_residual = std::max(0.0, equality ? max_abs(r.per_direction) : *std::max_element(r.per_direction.begin(), r.per_direction.end()));
    r.hypotheses["atoms_exact"] = atoms_exact;
    r.hypotheses["lhs_exact"] = lhs.exact;
    r.extras["all_atoms_regular"] = atoms_regular;
    r.extras["equality_asserted"] = equality;
    r.extras["equality_observed"] = equal;

    double clarke_gap = 0;
    for (double v : r.per_direction)
        clarke_gap = std::max(clarke_gap, -v);
    r.extras["clarke_gap"] = clarke_gap;
    const auto lim = limiting_subdiff(total, x);
    r.extras["limiting_gap"] = hausdorff_distance(lim.set, rhs, dirs);
    r.classify();
    return r;
}

Vector strict_leibniz(const Integrand& phi, const MeasureSpace& m, const Vector& x)
{
    require_atoms(phi.size(), m, "strict_leibniz");
    Vector sum = Vector::Zero(phi.dim());
    for (std::size_t i = 0; i < phi.size(); ++i)
    {
        const auto g = strict_derivative(phi[i], x);
        if (!g)
            throw InapplicableError("strict_leibniz: atom " + std::to_string(i) +
                                    " is not strictly differentiable at the base point");
        sum += m[i].weight * *g;
    }
    const auto whole = strict_derivative(integral_functional(phi, m), x);
    if (!whole)
        throw ConsistencyError("strict_leibniz: integral functional lacks a strict derivative although every atom has one");
    const double diff = (*whole - sum).cwiseAbs().maxCoeff();
    if (diff > 1e-10)
    {
        std::ostringstream msg;
        msg << "strict_leibniz: integral of gradients differs from the strict derivative by " << diff;
        throw ConsistencyError(msg.str());
    }
    return sum;
}

Report limiting_leibniz_check(std::span<const IntegrandInstance> refinements, const Vector& x,
                              std::span<const Direction> dirs)
{
    Report r;
    r.check = "limiting_leibniz";
    r.paper_ref = "limiting subdifferential Leibniz rule and its unconvexified form";
    if (refinements.empty() || dirs.empty())
        throw std::invalid_argument("limiting_leibniz_check: need refinements and directions");

    bool part_a = true;
    bool part_b = true;
    bool part_c = true;
    bool all_exact = true;
    nlohmann::json table = nlohmann::json::array();
    double prev_e = std::numeric_limits<double>::infinity();
    double worst = 0;
    for (const auto& inst : refinements)
    {
        const auto& phi = inst.integrand;
        const auto& m = inst.measure;
        const FnExpr total = integral_functional(phi, m);
        const auto lhs = limiting_subdiff(total, x);
        all_exact = all_exact && lhs.exact;
        std::vector<SetRep> atom_sets;
        bool regular = true;
        for (std::size_t i = 0; i < phi.size(); ++i)
        {
            const auto s = limiting_subdiff(phi[i], x);
            all_exact = all_exact && s.exact;
            regular = regular && s.exact && s.regular;
            atom_sets.push_back(s.set);
        }
        const SetValuedMap map(atom_sets);
        const SetRep convexified = wstar_integral(map, m);

        // (a) every vertex of the left side lies in the convexified integral.
        const Matrix verts = lhs.set.all_vertices();
        double a_res = 0;
        for (Eigen::Index j = 0; j < verts.cols(); ++j)
            a_res = std::max(a_res, distance_to_set(verts.col(j), convexified));
        part_a = part_a && a_res <= 1e-9;
        worst = std::max(worst, a_res);

        // (b) distance to the raw selector integral versus the convexification gap.
        nlohmann::json row{{"atoms", m.size()}, {"inclusion_residual", a_res}};
        try
        {
            const SetRep raw = aumann_integral(map, m);
            double e = 0;
            for (Eigen::Index j = 0; j < verts.cols(); ++j)
                e = std::max(e, distance_to_set(verts.col(j), raw));
            const double d = hausdorff_distance(raw, convexified, dirs);
            row["raw_distance"] = e;
            row["convexification_gap"] = d;
            if (e > prev_e + 1e-12 || e > d + 1e-9)
                part_b = false;
            prev_e = e;
        }
        catch (const CapacityError&)
        {
            r.warnings.push_back("selector integral too large at " + std::to_string(m.size()) +
                                 " atoms; raw-distance part skipped");
        }

        // (c) equality when all atoms are regular.
        if (regular && lhs.exact)
        {
            double gap = 0;
            for (const auto& dvec : dirs)
            {
                const Vector h = dvec.vec().normalized();
                gap = std::max(gap, std::abs(support(lhs.set, h) - support(convexified, h)));
            }
            row["support_gap"] = gap;
            if (gap > inclusion_tol(1.0))
                part_c = false;
            worst = std::max(worst, gap);
        }
        row["all_atoms_regular"] = regular;
        table.push_back(row);
    }
    if (!all_exact)
        r.warnings.push_back("some limiting subdifferentials are outer estimates");
    r.hypotheses["limiting_sets_exact"] = all_exact;
    r.extras["table"] = table;
    r.extras["inclusion"] = part_a;
    r.extras["unconvexified_bound"] = part_b;
    r.extras["regular_equality"] = part_c;
    r.pass = part_a && part_b && part_c;
    r.max_residual = worst;
    r.classify();
    return r;
}

} // namespace leibniz
