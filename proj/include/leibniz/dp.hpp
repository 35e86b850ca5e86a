#pragma once

#include "leibniz/convexgeom.hpp"
#include "leibniz/measure.hpp"
#include "leibniz/nonsmooth.hpp"
#include "leibniz/report.hpp"

#include <optional>
#include <span>
#include <vector>

namespace leibniz
{

/// Feasibility tolerance for grid candidates.
inline constexpr Scalar kFeasTol = 1e-10;

/// y in [lower + lower_gain x, upper + upper_gain x] for one shock. Empty
/// gain matrices mean the bound does not depend on x.
struct BoxBounds
{
    Vector lower;
    Vector upper;
    Matrix lower_gain;
    Matrix upper_gain;

    [[nodiscard]] bool depends_on_x() const;
    [[nodiscard]] Vector lower_at(const Vector& x) const;
    [[nodiscard]] Vector upper_at(const Vector& x) const;
};

/// phi_i(x, y) <= 0 (inequalities) and phi_j(x, y) = 0 (equalities), each a
/// smooth expression on R^{2n} with argument (x, y).
struct NlpConstraints
{
    std::vector<FnExpr> inequalities;
    std::vector<FnExpr> equalities;
};

/**
 * Constraint map Gamma(x, w). Finite lists index into the state grid and
 * are given per shock and per state; an empty per-shock list means every
 * state is admissible. Box and NLP forms are given per shock.
 */
struct ConstraintMap
{
    enum class Kind
    {
        Finite,
        Box,
        Nlp
    };

    Kind kind = Kind::Finite;
    std::vector<std::vector<std::vector<std::size_t>>> finite;
    std::vector<BoxBounds> boxes;
    std::vector<NlpConstraints> nlp;

    static ConstraintMap all_states(std::size_t shocks);
    static ConstraintMap box(std::vector<BoxBounds> per_shock);
    static ConstraintMap nonlinear(std::vector<NlpConstraints> per_shock);
};

/// Discounted stochastic DP on a finite state grid. cost[w] is u(x, y, w)
/// as an expression on R^{2n} with argument (x, y).
struct DPModel
{
    std::vector<Vector> states;
    StochasticKernel kernel{Matrix::Identity(1, 1)};
    Scalar beta = 0;
    std::vector<FnExpr> cost;
    ConstraintMap constraints;

    [[nodiscard]] Eigen::Index dim() const { return states.front().size(); }
    [[nodiscard]] std::size_t shocks() const { return kernel.states(); }
    [[nodiscard]] std::size_t size() const { return states.size(); }

    /// Throws std::invalid_argument describing the first violated invariant.
    void validate() const;

    /// Grid indices y feasible at (x, w).
    [[nodiscard]] std::vector<std::size_t> feasible(std::size_t x, std::size_t w) const;
    /// True when Gamma(., w) does not depend on x.
    [[nodiscard]] bool constraints_independent_of_x(std::size_t w) const;
    /// Index of the grid state closest to x.
    [[nodiscard]] std::size_t nearest_state(const Vector& x) const;
    /// Box enclosing the grid.
    [[nodiscard]] Box grid_box() const;
};

/// u(., y, w) as an expression in x alone.
FnExpr cost_in_x(const DPModel& model, std::size_t w, const Vector& y);
/// u(x, ., w) as an expression in y alone.
FnExpr cost_in_y(const DPModel& model, std::size_t w, const Vector& x);

/// v[x, w] on the grid with the closed forms of v(., w) where Gamma(., w)
/// does not depend on x.
struct ValueTable
{
    Matrix values;
    std::size_t iterations = 0;
    Scalar tolerance = 0;
    /// ||v - Tv||_inf at the returned table.
    Scalar bellman_residual = 0;
    /// For beta = 0 box models with smooth costs: largest gap between the grid
    /// minimum and a projected-gradient polish of it. Negative when unused.
    Scalar min_gap = -1;
    std::vector<std::optional<FnExpr>> closed_form;
};

/// (T phi)(x, w) = min over feasible grid y of u(x, y, w) + beta E[phi(y, .) | w].
/// phi is states x shocks. Throws InapplicableError on an empty feasible set.
Matrix bellman_operator(const DPModel& model, const Matrix& phi);

/// Iterates T from 0 until beta/(1-beta) ||v_{k+1} - v_k|| <= tol.
ValueTable value_iteration(const DPModel& model, Scalar tol);

/// Exact optimum of the T-period truncated problem by backward induction over
/// the enumerated shock-path tree.
Scalar finite_horizon_oracle(const DPModel& model, std::size_t horizon, std::size_t x, std::size_t w);

/// sup over feasible (x, y, w) on the grid of |u|.
Scalar cost_sup_norm(const DPModel& model);

struct PolicyTable
{
    /// argmin[w][x]: minimizing grid indices, ascending lexicographically in y.
    std::vector<std::vector<std::vector<std::size_t>>> argmin;
    /// selector[w][x]: lexicographically smallest minimizer.
    std::vector<std::vector<std::size_t>> selector;
};

/// Minimizers within tol_scale * (1 + |min|) of the Bellman minimum.
PolicyTable policy_multifunction(const DPModel& model, const ValueTable& v, Scalar tol_scale = 1e-8);

struct Viability
{
    bool lower = true;
    bool upper = true;
    bool upper_automatic = false;
    std::size_t pairs = 0;
};

/// Grid test of lower/upper viability of G(., w) around state x within radius.
Viability check_viability(const DPModel& model, const PolicyTable& g, std::size_t x, std::size_t w, Scalar radius);

/// Expression for v(., w) near x. Global when Gamma(., w) ignores x; otherwise
/// built at the grid state x with candidates moving along active affine
/// constraints (exact = false when beta > 0 and some candidate moves, since
/// the continuation value is then frozen).
struct ValueForm
{
    FnExpr expr;
    bool exact = true;
};

ValueForm value_form(const DPModel& model, const ValueTable& v, std::size_t w, const Vector& x);

enum class SubdiffKind
{
    Clarke,
    Limiting
};

SubdiffResult value_function_subdiff(const DPModel& model, const ValueTable& v, std::size_t w, const Vector& x,
                                     SubdiffKind kind);

/// Default neighbourhood radius for grid tests: 1.5 grid spacings.
Scalar default_radius(const DPModel& model);

Report envelope_check(const DPModel& model, const ValueTable& v, const PolicyTable& g, std::size_t x, std::size_t w,
                      std::span<const Direction> dirs);

Report strict_value_derivative_check(const DPModel& model, const ValueTable& v, const PolicyTable& g, std::size_t x,
                                     std::size_t w);

/// Distance from 0 to d_y u(x, y, w) + beta * w*-int d_x u(y, g(y, w'), w') dP(w'|w) + N(y; Gamma(x, w)),
/// all Clarke, with the cone truncated at cone_radius. y defaults to g(x, w).
Scalar euler_inclusion_residual(const DPModel& model, const ValueTable& v, const PolicyTable& g, std::size_t x,
                                std::size_t w, Scalar cone_radius, std::optional<std::size_t> y = std::nullopt);

Report euler_inclusion_check(const DPModel& model, const ValueTable& v, const PolicyTable& g, std::size_t x,
                             std::size_t w, Scalar cone_radius, Scalar tol = 1e-6);

/// Limiting-subdifferential Euler relations: the graph form (y-projection)
/// and the refined form, each with raw (selector) and convexified integrals.
Report limiting_euler_check(const DPModel& model, const ValueTable& v, const PolicyTable& g, std::size_t x,
                            std::size_t w, std::span<const Direction> dirs, Scalar cone_radius, Scalar tol = 1e-6);

struct MfcqResult
{
    bool holds = false;
    bool rank_ok = false;
    bool direction_ok = false;
    /// Certificate in R^{2n} = (x, y) directions, scaled to sup norm 1.
    Vector xi;
    /// min over active inequalities of -<grad phi_i, xi>.
    Scalar slack = 0;
    std::vector<std::size_t> active;
};

MfcqResult mfcq_check(const DPModel& model, const Vector& x, const Vector& y, std::size_t w);

struct MultiplierSet
{
    /// Vertices of Lambda in R^{m+r}: inequalities first, then equalities.
    std::vector<Vector> vertices;
    std::vector<std::vector<std::size_t>> active_sets;
    /// grad_y u + beta E[grad v(y, .)] used in the stationarity system.
    Vector objective_gradient;
};

MultiplierSet lagrange_multiplier_set(const DPModel& model, const ValueTable& v, const Vector& x, const Vector& y,
                                      std::size_t w);

Report nlp_value_subdiff_check(const DPModel& model, const ValueTable& v, const PolicyTable& g, std::size_t x,
                               std::size_t w, std::span<const Direction> dirs);

} // namespace leibniz
