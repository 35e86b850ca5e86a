#pragma once

#include "leibniz/convexgeom.hpp"
#include "leibniz/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace leibniz
{

/**
 * Immutable expression tree for a locally Lipschitz function R^n -> R.
 *
 * Leaves are affine a.x + b and quadratic x'Qx/2 + a.x + b (Q symmetric).
 * Inner nodes are Sum, Scale (c >= 0), Neg, Max and Min. Copies share the
 * underlying tree.
 */
class FnExpr
{
public:
    enum class Kind
    {
        Affine,
        Quadratic,
        Sum,
        Scale,
        Neg,
        Max,
        Min
    };

    static FnExpr affine(Vector a, Scalar b = 0);
    static FnExpr constant(Eigen::Index dim, Scalar b);
    static FnExpr quadratic(Matrix q, Vector a, Scalar b = 0);
    static FnExpr sum(std::vector<FnExpr> children);
    static FnExpr scale(Scalar c, FnExpr child);
    static FnExpr neg(FnExpr child);
    static FnExpr max_of(std::vector<FnExpr> children);
    static FnExpr min_of(std::vector<FnExpr> children);

    [[nodiscard]] Kind kind() const { return node_->kind; }
    [[nodiscard]] Eigen::Index dim() const { return node_->dim; }
    [[nodiscard]] const Vector& a() const { return node_->a; }
    [[nodiscard]] const Matrix& q() const { return node_->q; }
    [[nodiscard]] Scalar b() const { return node_->b; }
    [[nodiscard]] Scalar coeff() const { return node_->c; }
    [[nodiscard]] const std::vector<FnExpr>& children() const { return node_->children; }

    /// Built only from leaves, Sum, Scale and Neg (hence C^2 everywhere).
    [[nodiscard]] bool is_smooth() const { return node_->smooth; }

    Scalar operator()(const Vector& x) const;

private:
    struct Node
    {
        Kind kind = Kind::Affine;
        Eigen::Index dim = 0;
        Matrix q;
        Vector a;
        Scalar b = 0;
        Scalar c = 1;
        std::vector<FnExpr> children;
        bool smooth = true;
    };

    explicit FnExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    static FnExpr combine(Kind kind, std::vector<FnExpr> children);

    std::shared_ptr<const Node> node_;
};

FnExpr operator+(const FnExpr& f, const FnExpr& g);
FnExpr operator-(const FnExpr& f);
FnExpr operator-(const FnExpr& f, const FnExpr& g);
/// c * f; negative c is expressed through Neg.
FnExpr operator*(Scalar c, const FnExpr& f);

Scalar eval(const FnExpr& f, const Vector& x);

/// Gradient of a smooth expression; throws InapplicableError otherwise.
Vector gradient(const FnExpr& f, const Vector& x);

/// z -> f(M z + c). With M = [I; 0], c = [0; y] this restricts f(x, y) to x.
FnExpr compose_affine(const FnExpr& f, const Matrix& m, const Vector& c);

/// Pushes every Neg down to the leaves (max <-> min by De Morgan).
FnExpr push_negations(const FnExpr& f);

/// One-sided directional derivative f'(x; h), computed exactly by recursion
/// over active branches.
Scalar directional_derivative(const FnExpr& f, const Vector& x, const Vector& h);

/// Structural exactness certificate: every Sum has at most one nonsmooth
/// child and no nonsmooth node sits below combinators of opposite sense.
/// Returns the empty string when certified, else the reason.
std::string exactness_obstruction(const FnExpr& f);

struct SubdiffResult
{
    SetRep set;
    bool exact = true;
    bool regular = true;
};

/// Active-branch tolerance for Max/Min at value v.
inline Scalar active_tolerance(Scalar v)
{
    return 1e-9 * (1.0 + (v < 0 ? -v : v));
}

/// Limiting subdifferential by the pointwise calculus rules. In one
/// dimension results outside the exact rule class are completed from the
/// one-sided derivatives. strict=true throws InexactError instead of
/// returning an outer estimate.
SubdiffResult limiting_subdiff(const FnExpr& f, const Vector& x, bool strict = false);

/// Convex hull of the limiting subdifferential.
SubdiffResult clarke_gradient(const FnExpr& f, const Vector& x, bool strict = false);

/// Support function of the Clarke gradient in direction h.
Scalar clarke_dd(const FnExpr& f, const Vector& x, const Vector& h, bool strict = false);

/// Max over sampled (x', theta) of (f(x' + theta h) - f(x')) / theta with x'
/// uniform in the ball B(x, radius) and theta uniform in (0, radius).
Scalar sampled_clarke_dd(const FnExpr& f, const Vector& x, const Vector& h, Scalar radius,
                         std::size_t n_samples, std::uint64_t seed);

bool is_regular(const FnExpr& f, const Vector& x);

/// The gradient when the Clarke gradient is an exactly computed point.
std::optional<Vector> strict_derivative(const FnExpr& f, const Vector& x);

/// Upper bound on the Lipschitz constant of f over the box.
Scalar lipschitz_modulus(const FnExpr& f, const Box& box);

} // namespace leibniz
