#include "leibniz/convexgeom.hpp"

#include "leibniz/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

namespace leibniz
{
namespace
{

bool same_vertex(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b)
{
    return (a - b).cwiseAbs().maxCoeff() <= kVertexTol;
}

bool lex_less(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b)
{
    for (Eigen::Index i = 0; i < a.size(); ++i)
    {
        if (a[i] < b[i])
            return true;
        if (a[i] > b[i])
            return false;
    }
    return false;
}

Matrix columns_of(const std::vector<Vector>& cols, Eigen::Index dim)
{
    Matrix m(dim, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
        m.col(static_cast<Eigen::Index>(j)) = cols[j];
    return m;
}

std::vector<Vector> unique_columns(const Matrix& piece)
{
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(piece.cols()));
    for (Eigen::Index j = 0; j < piece.cols(); ++j)
    {
        const bool dup = std::any_of(out.begin(), out.end(),
                                     [&](const Vector& v) { return same_vertex(v, piece.col(j)); });
        if (!dup)
            out.emplace_back(piece.col(j));
    }
    return out;
}

Scalar cross2(const Vector& o, const Vector& a, const Vector& b)
{
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain; counter-clockwise, starting at the lexicographic
// minimum, collinear points dropped.
std::vector<Vector> hull2d(std::vector<Vector> pts)
{
    std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) { return lex_less(a, b); });
    if (pts.size() <= 2)
        return pts;
    Scalar scale = 1.0;
    for (const auto& p : pts)
        scale = std::max(scale, p.cwiseAbs().maxCoeff());
    const Scalar eps = 1e-13 * scale * scale;

    std::vector<Vector> h(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts)
    {
        while (k >= 2 && cross2(h[k - 2], h[k - 1], p) <= eps)
            --k;
        h[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;)
    {
        while (k >= t && cross2(h[k - 2], h[k - 1], pts[i]) <= eps)
            --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

Matrix reduce_piece(const Matrix& piece, Eigen::Index dim)
{
    auto verts = unique_columns(piece);
    if (dim == 1 && verts.size() > 2)
    {
        auto [lo, hi] = std::minmax_element(verts.begin(), verts.end(),
                                            [](const Vector& a, const Vector& b) { return a[0] < b[0]; });
        verts = {*lo, *hi};
    }
    else if (dim == 2 && verts.size() > 2)
    {
        verts = hull2d(std::move(verts));
    }
    if (dim == 1 && verts.size() == 2 && verts[1][0] < verts[0][0])
        std::swap(verts[0], verts[1]);
    else if (dim != 2)
        std::sort(verts.begin(), verts.end(), [](const Vector& a, const Vector& b) { return lex_less(a, b); });
    return columns_of(verts, dim);
}

bool same_piece(const Matrix& a, const Matrix& b)
{
    if (a.cols() != b.cols())
        return false;
    return (a - b).cwiseAbs().maxCoeff() <= kVertexTol;
}

std::vector<Matrix> dedup_pieces(std::vector<Matrix> pieces)
{
    if (pieces.size() < 2)
        return pieces;
    // Bucket by a coarse quantization of the first vertex; exact comparison
    // within a bucket. Near-duplicates straddling a bucket boundary survive,
    // which is harmless for the represented union.
    std::map<std::vector<long long>, std::vector<std::size_t>> buckets;
    std::vector<Matrix> out;
    out.reserve(pieces.size());
    for (auto& piece : pieces)
    {
        std::vector<long long> key;
        key.reserve(static_cast<std::size_t>(piece.rows()) + 1);
        key.push_back(piece.cols());
        for (Eigen::Index i = 0; i < piece.rows(); ++i)
            key.push_back(std::llround(piece(i, 0) * 1e9));
        auto& bucket = buckets[key];
        const bool dup = std::any_of(bucket.begin(), bucket.end(),
                                     [&](std::size_t idx) { return same_piece(out[idx], piece); });
        if (!dup)
        {
            bucket.push_back(out.size());
            out.push_back(std::move(piece));
        }
    }
    return out;
}

// Affine minimum-norm point on the affine hull of the selected columns:
// minimize |Q w|^2 subject to sum(w) = 1.
Vector affine_min_norm_weights(const Matrix& q)
{
    const Eigen::Index k = q.cols();
    Matrix kkt = Matrix::Zero(k + 1, k + 1);
    kkt.topLeftCorner(k, k) = q.transpose() * q;
    kkt.block(0, k, k, 1).setOnes();
    kkt.block(k, 0, 1, k).setOnes();
    Vector rhs = Vector::Zero(k + 1);
    rhs[k] = 1.0;
    Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    return sol.head(k);
}

// Wolfe's minimum-norm-point algorithm on the columns of q.
Vector wolfe_min_norm(const Matrix& q)
{
    const Eigen::Index n = q.cols();
    if (n == 1)
        return q.col(0);
    const Scalar scale = std::max<Scalar>(1.0, q.colwise().squaredNorm().maxCoeff());
    const Scalar tol = 1e-15 * scale;

    Eigen::Index start = 0;
    q.colwise().squaredNorm().minCoeff(&start);
    std::vector<Eigen::Index> active{start};
    std::vector<Scalar> lambda{1.0};
    Vector x = q.col(start);

    for (int major = 0; major < 1000; ++major)
    {
        Eigen::Index j = 0;
        const Scalar best = (q.transpose() * x).minCoeff(&j);
        if (x.squaredNorm() - best <= 1e-13 * scale)
            break;
        if (std::find(active.begin(), active.end(), j) != active.end())
            break;
        active.push_back(j);
        lambda.push_back(0.0);

        for (int minor = 0; minor < 1000; ++minor)
        {
            Matrix qs(q.rows(), static_cast<Eigen::Index>(active.size()));
            for (std::size_t i = 0; i < active.size(); ++i)
                qs.col(static_cast<Eigen::Index>(i)) = q.col(active[i]);
            const Vector mu = affine_min_norm_weights(qs);
            if ((mu.array() > tol).all())
            {
                for (std::size_t i = 0; i < active.size(); ++i)
                    lambda[i] = mu[static_cast<Eigen::Index>(i)];
                break;
            }
            Scalar theta = 1.0;
            for (std::size_t i = 0; i < active.size(); ++i)
            {
                const Scalar m = mu[static_cast<Eigen::Index>(i)];
                if (m <= tol)
                {
                    const Scalar denom = lambda[i] - m;
                    if (denom > 0)
                        theta = std::min(theta, lambda[i] / denom);
                }
            }
            std::vector<Eigen::Index> next_active;
            std::vector<Scalar> next_lambda;
            for (std::size_t i = 0; i < active.size(); ++i)
            {
                const Scalar l = lambda[i] + theta * (mu[static_cast<Eigen::Index>(i)] - lambda[i]);
                if (l > tol)
                {
                    next_active.push_back(active[i]);
                    next_lambda.push_back(l);
                }
            }
            if (next_active.empty())
            {
                next_active.push_back(active.back());
                next_lambda.push_back(1.0);
            }
            const Scalar total = std::accumulate(next_lambda.begin(), next_lambda.end(), 0.0);
            for (auto& l : next_lambda)
                l /= total;
            active = std::move(next_active);
            lambda = std::move(next_lambda);
        }
        Vector nx = Vector::Zero(q.rows());
        for (std::size_t i = 0; i < active.size(); ++i)
            nx += lambda[i] * q.col(active[i]);
        if (nx.squaredNorm() >= x.squaredNorm() - 1e-18 * scale && major > 0)
        {
            x = nx.squaredNorm() < x.squaredNorm() ? nx : x;
            break;
        }
        x = nx;
    }
    return x;
}

Scalar distance_to_piece(const Vector& p, const Matrix& piece)
{
    if (piece.cols() == 1)
        return (piece.col(0) - p).norm();
    if (piece.rows() == 1)
    {
        const Scalar lo = piece.row(0).minCoeff();
        const Scalar hi = piece.row(0).maxCoeff();
        return std::max({lo - p[0], p[0] - hi, Scalar{0}});
    }
    return (nearest_point_in_hull(p, piece) - p).norm();
}

// --- excess helpers -------------------------------------------------------

Scalar excess_1d(const SetRep& from, const SetRep& to)
{
    std::vector<std::pair<Scalar, Scalar>> iv;
    for (const auto& piece : to.pieces())
        iv.emplace_back(piece.row(0).minCoeff(), piece.row(0).maxCoeff());
    std::sort(iv.begin(), iv.end());
    std::vector<std::pair<Scalar, Scalar>> merged;
    for (const auto& [lo, hi] : iv)
    {
        if (!merged.empty() && lo <= merged.back().second)
            merged.back().second = std::max(merged.back().second, hi);
        else
            merged.emplace_back(lo, hi);
    }
    auto dist = [&](Scalar x) {
        Scalar d = std::numeric_limits<Scalar>::infinity();
        for (const auto& [lo, hi] : merged)
            d = std::min(d, std::max({lo - x, x - hi, Scalar{0}}));
        return d;
    };
    Scalar worst = 0;
    for (const auto& piece : from.pieces())
    {
        const Scalar a = piece.row(0).minCoeff();
        const Scalar b = piece.row(0).maxCoeff();
        worst = std::max({worst, dist(a), dist(b)});
        for (std::size_t i = 0; i + 1 < merged.size(); ++i)
        {
            const Scalar mid = 0.5 * (merged[i].second + merged[i + 1].first);
            if (mid > a && mid < b)
                worst = std::max(worst, dist(mid));
        }
    }
    return worst;
}

bool inside_polygon(const Vector& x, const std::vector<Vector>& poly)
{
    if (poly.size() < 3)
        return false;
    for (std::size_t i = 0; i < poly.size(); ++i)
    {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        if (cross2(a, b, x) < -1e-12)
            return false;
    }
    return true;
}

Scalar nearest_point_distance(const Vector& x, const std::vector<Vector>& pts)
{
    Scalar d = std::numeric_limits<Scalar>::infinity();
    for (const auto& q : pts)
        d = std::min(d, (x - q).squaredNorm());
    return std::sqrt(d);
}

constexpr std::size_t kExact2dPointCap = 300;

// sup over a convex polygon of the distance to a finite point set: the
// maximum sits at a polygon vertex, at a Voronoi edge crossing the boundary,
// or at a Voronoi vertex inside.
Scalar excess_2d_points(const SetRep& from, const std::vector<Vector>& pts)
{
    Scalar worst = 0;
    for (const auto& piece : from.pieces())
    {
        std::vector<Vector> poly;
        for (Eigen::Index j = 0; j < piece.cols(); ++j)
            poly.emplace_back(piece.col(j));
        for (const auto& v : poly)
            worst = std::max(worst, nearest_point_distance(v, pts));
        if (poly.size() < 2)
            continue;
        const std::size_t edges = poly.size() == 2 ? 1 : poly.size();
        for (std::size_t i = 0; i < pts.size(); ++i)
        {
            for (std::size_t j = i + 1; j < pts.size(); ++j)
            {
                const Vector n = pts[j] - pts[i];
                const Scalar c = 0.5 * (pts[j].squaredNorm() - pts[i].squaredNorm());
                for (std::size_t e = 0; e < edges; ++e)
                {
                    const Vector& a = poly[e];
                    const Vector& b = poly[(e + 1) % poly.size()];
                    const Scalar da = n.dot(a) - c;
                    const Scalar db = n.dot(b) - c;
                    if ((da > 0 && db > 0) || (da < 0 && db < 0) || da == db)
                        continue;
                    const Scalar t = da / (da - db);
                    worst = std::max(worst, nearest_point_distance(a + t * (b - a), pts));
                }
            }
        }
        if (poly.size() < 3)
            continue;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                for (std::size_t k = j + 1; k < pts.size(); ++k)
                {
                    const Vector ab = pts[j] - pts[i];
                    const Vector ac = pts[k] - pts[i];
                    const Scalar det = 2.0 * (ab[0] * ac[1] - ab[1] * ac[0]);
                    if (std::abs(det) < 1e-14)
                        continue;
                    const Scalar b2 = ab.squaredNorm();
                    const Scalar c2 = ac.squaredNorm();
                    Vector center(2);
                    center << pts[i][0] + (ac[1] * b2 - ab[1] * c2) / det,
                        pts[i][1] + (ab[0] * c2 - ac[0] * b2) / det;
                    if (inside_polygon(center, poly))
                        worst = std::max(worst, nearest_point_distance(center, pts));
                }
    }
    return worst;
}

Scalar excess_sampled(const SetRep& from, const SetRep& to)
{
    CounterRng rng(0xe8ce55);
    Scalar worst = 0;
    auto dist = [&](const Vector& x) {
        Scalar d = std::numeric_limits<Scalar>::infinity();
        for (const auto& piece : to.pieces())
            d = std::min(d, distance_to_piece(x, piece));
        return d;
    };
    for (const auto& piece : from.pieces())
    {
        for (Eigen::Index j = 0; j < piece.cols(); ++j)
            worst = std::max(worst, dist(piece.col(j)));
        if (piece.cols() == 1)
            continue;
        for (int s = 0; s < 2000; ++s)
        {
            Vector w(piece.cols());
            for (Eigen::Index j = 0; j < w.size(); ++j)
                w[j] = -std::log(rng.uniform_open());
            w /= w.sum();
            worst = std::max(worst, dist(piece * w));
        }
    }
    return worst;
}

} // namespace

// --- SetRep ---------------------------------------------------------------

SetRep::SetRep(Eigen::Index dim, std::vector<Matrix> pieces) : dim_(dim)
{
    if (dim <= 0)
        throw std::invalid_argument("SetRep: dimension must be positive");
    if (pieces.empty())
        throw std::invalid_argument("SetRep: at least one piece is required");
    for (auto& piece : pieces)
    {
        if (piece.cols() == 0)
            throw std::invalid_argument("SetRep: every piece needs at least one vertex");
        require_dim(dim, piece.rows(), "SetRep vertex");
        if (!piece.allFinite())
            throw std::invalid_argument("SetRep: vertices must be finite");
        piece = reduce_piece(piece, dim);
    }
    pieces_ = dedup_pieces(std::move(pieces));
}

SetRep SetRep::point(const Vector& p)
{
    return SetRep(p.size(), {Matrix(p)});
}

SetRep SetRep::points(const std::vector<Vector>& pts)
{
    if (pts.empty())
        throw std::invalid_argument("SetRep::points: empty point list");
    std::vector<Matrix> pieces;
    pieces.reserve(pts.size());
    for (const auto& p : pts)
        pieces.emplace_back(p);
    return SetRep(pts.front().size(), std::move(pieces));
}

SetRep SetRep::polytope(const std::vector<Vector>& vertices)
{
    if (vertices.empty())
        throw std::invalid_argument("SetRep::polytope: empty vertex list");
    const Eigen::Index dim = vertices.front().size();
    for (const auto& v : vertices)
        require_dim(dim, v.size(), "SetRep::polytope");
    return SetRep(dim, {columns_of(vertices, dim)});
}

SetRep SetRep::points1d(std::initializer_list<Scalar> xs)
{
    std::vector<Vector> pts;
    for (Scalar x : xs)
        pts.push_back(Vector::Constant(1, x));
    return points(pts);
}

SetRep SetRep::interval(Scalar lo, Scalar hi)
{
    return polytope({Vector::Constant(1, lo), Vector::Constant(1, hi)});
}

std::size_t SetRep::vertex_count() const
{
    std::size_t n = 0;
    for (const auto& p : pieces_)
        n += static_cast<std::size_t>(p.cols());
    return n;
}

bool SetRep::is_finite_point_set() const
{
    return std::all_of(pieces_.begin(), pieces_.end(), [](const Matrix& p) { return p.cols() == 1; });
}

Matrix SetRep::all_vertices() const
{
    Matrix out(dim_, static_cast<Eigen::Index>(vertex_count()));
    Eigen::Index c = 0;
    for (const auto& p : pieces_)
    {
        out.middleCols(c, p.cols()) = p;
        c += p.cols();
    }
    return out;
}

Direction::Direction(Vector h) : h_(std::move(h))
{
    if (h_.size() == 0 || !(h_.norm() > 0) || !h_.allFinite())
        throw std::invalid_argument("Direction: vector must be finite and nonzero");
}

// --- operations -----------------------------------------------------------

Scalar support(const SetRep& set, const Vector& h)
{
    require_dim(set.dim(), h.size(), "support");
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    for (const auto& piece : set.pieces())
        best = std::max(best, (h.transpose() * piece).maxCoeff());
    return best;
}

Scalar support(const SetRep& set, const Direction& h)
{
    return support(set, h.vec());
}

SetRep minkowski_sum(const SetRep& a, const SetRep& b)
{
    require_dim(a.dim(), b.dim(), "minkowski_sum");
    const double product = static_cast<double>(a.piece_count()) * static_cast<double>(b.piece_count());
    if (product > static_cast<double>(kMaxPieces))
        throw CapacityError("minkowski_sum: " + std::to_string(a.piece_count()) + " x " +
                            std::to_string(b.piece_count()) +
                            " pieces exceeds the enumeration cap; convexify the operands first "
                            "(or use the support-function integral)");
    std::vector<Matrix> pieces;
    pieces.reserve(a.piece_count() * b.piece_count());
    for (const auto& pa : a.pieces())
        for (const auto& pb : b.pieces())
        {
            Matrix sum(a.dim(), pa.cols() * pb.cols());
            for (Eigen::Index i = 0; i < pa.cols(); ++i)
                for (Eigen::Index j = 0; j < pb.cols(); ++j)
                    sum.col(i * pb.cols() + j) = pa.col(i) + pb.col(j);
            pieces.push_back(std::move(sum));
        }
    return SetRep(a.dim(), std::move(pieces));
}

SetRep scale(const SetRep& set, Scalar c)
{
    if (c == 0)
        return SetRep::point(Vector::Zero(set.dim()));
    std::vector<Matrix> pieces;
    for (const auto& p : set.pieces())
        pieces.emplace_back(c * p);
    return SetRep(set.dim(), std::move(pieces));
}

SetRep translate(const SetRep& set, const Vector& offset)
{
    require_dim(set.dim(), offset.size(), "translate");
    std::vector<Matrix> pieces;
    for (const auto& p : set.pieces())
        pieces.emplace_back(p.colwise() + offset);
    return SetRep(set.dim(), std::move(pieces));
}

SetRep convexify(const SetRep& set)
{
    if (set.is_single_piece())
        return set;
    return SetRep(set.dim(), {set.all_vertices()});
}

SetRep set_union(const SetRep& a, const SetRep& b)
{
    require_dim(a.dim(), b.dim(), "set_union");
    auto pieces = a.pieces();
    pieces.insert(pieces.end(), b.pieces().begin(), b.pieces().end());
    return SetRep(a.dim(), std::move(pieces));
}

SetRep linear_image(const SetRep& set, const Matrix& map)
{
    require_dim(set.dim(), map.cols(), "linear_image");
    std::vector<Matrix> pieces;
    for (const auto& p : set.pieces())
        pieces.emplace_back(map * p);
    return SetRep(map.rows(), std::move(pieces));
}

Vector nearest_point_in_hull(const Vector& p, const Matrix& vertices)
{
    require_dim(vertices.rows(), p.size(), "nearest_point_in_hull");
    const Matrix q = vertices.colwise() - p;
    return wolfe_min_norm(q) + p;
}

Scalar distance_to_set(const Vector& p, const SetRep& set)
{
    require_dim(set.dim(), p.size(), "distance_to_set");
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (const auto& piece : set.pieces())
    {
        best = std::min(best, distance_to_piece(p, piece));
        if (best == 0)
            break;
    }
    return best;
}

Scalar excess(const SetRep& from, const SetRep& to)
{
    require_dim(from.dim(), to.dim(), "excess");
    if (to.is_single_piece() || from.is_finite_point_set())
    {
        // dist(., to) is convex when `to` is convex, so the sup over a polytope
        // is attained at a vertex; a finite `from` has only vertices.
        Scalar worst = 0;
        for (const auto& piece : from.pieces())
            for (Eigen::Index j = 0; j < piece.cols(); ++j)
                worst = std::max(worst, distance_to_set(piece.col(j), to));
        return worst;
    }
    if (from.dim() == 1)
        return excess_1d(from, to);
    if (from.dim() == 2 && to.is_finite_point_set() && to.piece_count() <= kExact2dPointCap)
    {
        std::vector<Vector> pts;
        for (const auto& p : to.pieces())
            pts.emplace_back(p.col(0));
        return excess_2d_points(from, pts);
    }
    return excess_sampled(from, to);
}

Scalar hausdorff_distance(const SetRep& a, const SetRep& b, std::span<const Direction> dirs)
{
    require_dim(a.dim(), b.dim(), "hausdorff_distance");
    if (dirs.empty())
        throw std::invalid_argument("hausdorff_distance: direction list is empty");
    if (a.is_single_piece() && b.is_single_piece())
    {
        Scalar gap = 0;
        for (const auto& d : dirs)
        {
            const Vector h = d.vec().normalized();
            gap = std::max(gap, std::abs(support(a, h) - support(b, h)));
        }
        return gap;
    }
    return std::max(excess(a, b), excess(b, a));
}

Scalar vertex_diameter(const SetRep& set)
{
    const Matrix v = set.all_vertices();
    Scalar d = 0;
    for (Eigen::Index i = 0; i < v.cols(); ++i)
        for (Eigen::Index j = i + 1; j < v.cols(); ++j)
            d = std::max(d, (v.col(i) - v.col(j)).norm());
    return d;
}

SetRep normal_cone_box(const Vector& lower, const Vector& upper, const Vector& y, Scalar radius)
{
    require_dim(lower.size(), upper.size(), "normal_cone_box");
    require_dim(lower.size(), y.size(), "normal_cone_box");
    if (radius < 0)
        throw std::invalid_argument("normal_cone_box: radius must be nonnegative");
    const Eigen::Index n = y.size();
    std::vector<std::pair<Scalar, Scalar>> sides(static_cast<std::size_t>(n));
    std::vector<Eigen::Index> free_coords;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const Scalar tol = 1e-10 * (1.0 + std::abs(lower[i]) + std::abs(upper[i]));
        if (y[i] < lower[i] - tol || y[i] > upper[i] + tol)
            throw std::invalid_argument("normal_cone_box: point lies outside the box");
        const bool at_lo = std::abs(y[i] - lower[i]) <= tol;
        const bool at_hi = std::abs(y[i] - upper[i]) <= tol;
        auto& [lo, hi] = sides[static_cast<std::size_t>(i)];
        lo = at_lo ? -radius : 0.0;
        hi = at_hi ? radius : 0.0;
        if (hi > lo)
            free_coords.push_back(i);
    }
    if (free_coords.size() > 20)
        throw CapacityError("normal_cone_box: too many active coordinates");
    const std::size_t count = std::size_t{1} << free_coords.size();
    Matrix verts(n, static_cast<Eigen::Index>(count));
    for (std::size_t mask = 0; mask < count; ++mask)
    {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v[i] = sides[static_cast<std::size_t>(i)].first;
        for (std::size_t k = 0; k < free_coords.size(); ++k)
            if (mask & (std::size_t{1} << k))
                v[free_coords[k]] = sides[static_cast<std::size_t>(free_coords[k])].second;
        verts.col(static_cast<Eigen::Index>(mask)) = v;
    }
    return SetRep(n, {verts});
}

std::vector<Direction> default_directions(Eigen::Index dim, std::size_t count, std::uint64_t seed)
{
    std::vector<Direction> dirs;
    if (dim == 1)
    {
        dirs.emplace_back(Vector::Constant(1, 1.0));
        dirs.emplace_back(Vector::Constant(1, -1.0));
        return dirs;
    }
    if (dim == 2)
    {
        const std::size_t n = count == 0 ? 64 : count;
        for (std::size_t k = 0; k < n; ++k)
        {
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            Vector h(2);
            h << std::cos(angle), std::sin(angle);
            dirs.emplace_back(h);
        }
        return dirs;
    }
    const std::size_t n = count == 0 ? 256 : count;
    CounterRng rng(seed);
    while (dirs.size() < n)
    {
        Vector h(dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            h[i] = rng.normal();
        if (h.norm() > 1e-12)
            dirs.emplace_back(h.normalized());
    }
    return dirs;
}

} // namespace leibniz
