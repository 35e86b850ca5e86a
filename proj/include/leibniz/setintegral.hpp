#pragma once

#include "leibniz/convexgeom.hpp"
#include "leibniz/measure.hpp"
#include "leibniz/nonsmooth.hpp"
#include "leibniz/report.hpp"

#include <functional>
#include <span>
#include <vector>

namespace leibniz
{

/// One compact set per measure atom, all of the same dimension.
class SetValuedMap
{
public:
    explicit SetValuedMap(std::vector<SetRep> values);

    [[nodiscard]] Eigen::Index dim() const { return values_.front().dim(); }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] const SetRep& operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] const std::vector<SetRep>& values() const { return values_; }

private:
    std::vector<SetRep> values_;
};

/// phi(., w_i) for every atom, all with the same input dimension.
class Integrand
{
public:
    explicit Integrand(std::vector<FnExpr> atoms);

    [[nodiscard]] Eigen::Index dim() const { return atoms_.front().dim(); }
    [[nodiscard]] std::size_t size() const { return atoms_.size(); }
    [[nodiscard]] const FnExpr& operator[](std::size_t i) const { return atoms_[i]; }
    [[nodiscard]] const std::vector<FnExpr>& atoms() const { return atoms_; }

private:
    std::vector<FnExpr> atoms_;
};

/// Sum_i w_i phi(., w_i) as an expression.
FnExpr integral_functional(const Integrand& phi, const MeasureSpace& m);

/// {Sum_i w_i s_i : s_i in Gamma(w_i)}, by iterated Minkowski sums.
SetRep aumann_integral(const SetValuedMap& gamma, const MeasureSpace& m);

/// Sum_i w_i co Gamma(w_i): the convex set whose support function is the
/// integral of the atom support functions.
SetRep wstar_integral(const SetValuedMap& gamma, const MeasureSpace& m);

/// Inclusion tolerance used by the set-integral checks.
inline double inclusion_tol(double scale)
{
    return 1e-9 + 1e-9 * (scale < 0 ? -scale : scale);
}

Report check_supremum_representation(const SetValuedMap& gamma, const MeasureSpace& m,
                                     std::span<const Direction> dirs);

/// A set-valued map together with the measure it lives on.
struct MapInstance
{
    SetValuedMap map;
    MeasureSpace measure;
};

/// Gap d_N between the Aumann and w*-integrals along a refinement sequence.
/// Passes when d_N is nonincreasing and d_{2N} <= 0.75 d_N whenever d_N > 0.
/// extras["table"] holds rows {N, gap}.
Report check_lyapunov_convexification(const std::function<MapInstance(std::size_t)>& family,
                                      std::span<const std::size_t> ns, std::span<const Direction> dirs);

/// Clarke gradient of the integral functional against the w*-integral of the
/// atom Clarke gradients; equality is additionally required when every atom
/// is regular at x. extras carry the limiting-level gap
/// H(limiting subdiff of I_phi, right-hand side).
Report clarke_leibniz_check(const Integrand& phi, const MeasureSpace& m, const Vector& x,
                            std::span<const Direction> dirs);

/// Sum_i w_i grad phi(x, w_i); throws InapplicableError naming the first atom
/// without a strict derivative and ConsistencyError if the result differs
/// from the strict derivative of I_phi by more than 1e-10.
Vector strict_leibniz(const Integrand& phi, const MeasureSpace& m, const Vector& x);

struct IntegrandInstance
{
    Integrand integrand;
    MeasureSpace measure;
};

/// Limiting-subdifferential Leibniz checks over a list of refinements:
/// (a) limiting subdiff of I_phi inside the w*-integral of atom limiting sets,
/// (b) its distance to the unconvexified (Aumann) integral is nonincreasing
///     and bounded by the convexification gap,
/// (c) support equality when every atom is regular.
Report limiting_leibniz_check(std::span<const IntegrandInstance> refinements, const Vector& x,
                              std::span<const Direction> dirs);

} // namespace leibniz
