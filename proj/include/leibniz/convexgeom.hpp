#pragma once

#include "leibniz/types.hpp"

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace leibniz
{

/// Absolute tolerance used when de-duplicating vertices.
inline constexpr Scalar kVertexTol = 1e-12;

/// Cap on the number of pieces a Minkowski product may create.
inline constexpr std::size_t kMaxPieces = 1'000'000;

/**
 * Compact set in R^n stored as a finite union of polytopes in vertex form.
 *
 * Each piece is a dim x k matrix whose columns are vertices; the represented
 * set is the union over pieces of the convex hull of the piece's columns.
 * Duplicate vertices inside a piece are dropped on construction, and in one
 * and two dimensions every piece is reduced to its extreme points.
 */
class SetRep
{
public:
    SetRep(Eigen::Index dim, std::vector<Matrix> pieces);

    /// {p}
    static SetRep point(const Vector& p);
    /// Finite point set; every point is its own piece.
    static SetRep points(const std::vector<Vector>& pts);
    /// Single convex polytope co{vertices}.
    static SetRep polytope(const std::vector<Vector>& vertices);
    /// Convenience for 1-D sets: points({x...}) or the interval co{lo, hi}.
    static SetRep points1d(std::initializer_list<Scalar> xs);
    static SetRep interval(Scalar lo, Scalar hi);

    [[nodiscard]] Eigen::Index dim() const { return dim_; }
    [[nodiscard]] const std::vector<Matrix>& pieces() const { return pieces_; }
    [[nodiscard]] std::size_t piece_count() const { return pieces_.size(); }
    [[nodiscard]] std::size_t vertex_count() const;
    /// True when the set is stored as a single polytope (hence convex).
    [[nodiscard]] bool is_single_piece() const { return pieces_.size() == 1; }
    /// True when every piece is a single point.
    [[nodiscard]] bool is_finite_point_set() const;
    /// All vertices of all pieces as columns of one matrix.
    [[nodiscard]] Matrix all_vertices() const;

private:
    Eigen::Index dim_;
    std::vector<Matrix> pieces_;
};

/// Nonzero direction vector.
class Direction
{
public:
    explicit Direction(Vector h);

    [[nodiscard]] const Vector& vec() const { return h_; }
    [[nodiscard]] Eigen::Index dim() const { return h_.size(); }
    [[nodiscard]] Direction normalized() const { return Direction(h_.normalized()); }

private:
    Vector h_;
};

/// s(S, h) = max over vertices of <v, h>.
Scalar support(const SetRep& set, const Direction& h);
Scalar support(const SetRep& set, const Vector& h);

SetRep minkowski_sum(const SetRep& a, const SetRep& b);
SetRep scale(const SetRep& set, Scalar c);
SetRep translate(const SetRep& set, const Vector& offset);
/// Convex hull of all vertices, as a single piece.
SetRep convexify(const SetRep& set);
/// Union of two sets of the same dimension.
SetRep set_union(const SetRep& a, const SetRep& b);
/// Image under the linear map x -> map * x.
SetRep linear_image(const SetRep& set, const Matrix& map);

/// Euclidean distance from p to the set (exact projection onto each piece).
Scalar distance_to_set(const Vector& p, const SetRep& set);

/// Nearest point of co{columns of vertices} to p.
Vector nearest_point_in_hull(const Vector& p, const Matrix& vertices);

/// max over x in `from` of dist(x, to). Exact when `to` is a single polytope,
/// in 1-D, and in 2-D when `to` is a finite point set; otherwise a sampled
/// lower bound.
Scalar excess(const SetRep& from, const SetRep& to);

/// Hausdorff distance. For two single-piece sets this is the support-function
/// gap over the (normalized) directions, a lower bound that is exact when the
/// directions are dense enough; otherwise the two-sided excess is used.
Scalar hausdorff_distance(const SetRep& a, const SetRep& b, std::span<const Direction> dirs);

/// Diameter of the vertex cloud.
Scalar vertex_diameter(const SetRep& set);

/**
 * Normal cone to the box [lower, upper] at y, truncated to the sup-norm ball
 * of the given radius. Coordinates strictly inside contribute {0}; a
 * coordinate at the upper (lower) bound contributes [0, r] ([-r, 0]).
 */
SetRep normal_cone_box(const Vector& lower, const Vector& upper, const Vector& y, Scalar radius);

/// Unit directions: 1-D gives {+1, -1}; 2-D gives `count` equally spaced angles;
/// higher dimensions give `count` seeded random unit vectors.
std::vector<Direction> default_directions(Eigen::Index dim, std::size_t count = 0, std::uint64_t seed = 0x5eed);

} // namespace leibniz
