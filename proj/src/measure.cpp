#include "leibniz/measure.hpp"

#include <cmath>
#include <string>

namespace leibniz
{

MeasureSpace::MeasureSpace(std::vector<Atom> atoms) : atoms_(std::move(atoms))
{
    if (atoms_.empty())
        throw std::invalid_argument("MeasureSpace: at least one atom is required");
    const Eigen::Index pdim = atoms_.front().param.size();
    for (const auto& a : atoms_)
    {
        if (!(a.weight >= 0) || !std::isfinite(a.weight))
            throw std::invalid_argument("MeasureSpace: weights must be finite and nonnegative");
        require_dim(pdim, a.param.size(), "MeasureSpace atom parameter");
        total_ += a.weight;
    }
    if (!(total_ > 0) || !std::isfinite(total_))
        throw std::invalid_argument("MeasureSpace: total mass must be positive and finite");
}

MeasureSpace uniform_discretization(std::size_t n, Scalar a, Scalar b)
{
    if (n == 0)
        throw std::invalid_argument("uniform_discretization: N must be at least 1");
    if (!(a < b))
        throw std::invalid_argument("uniform_discretization: need a < b");
    const Scalar h = (b - a) / static_cast<Scalar>(n);
    std::vector<Atom> atoms;
    atoms.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        atoms.push_back({Vector::Constant(1, a + (static_cast<Scalar>(i) + 0.5) * h), h});
    return MeasureSpace(std::move(atoms));
}

StochasticKernel::StochasticKernel(Matrix rows) : p_(std::move(rows))
{
    if (p_.rows() == 0 || p_.rows() != p_.cols())
        throw std::invalid_argument("StochasticKernel: matrix must be square and nonempty");
    for (Eigen::Index i = 0; i < p_.rows(); ++i)
    {
        if ((p_.row(i).array() < 0).any() || !p_.row(i).allFinite())
            throw std::invalid_argument("StochasticKernel: entries must be finite and nonnegative");
        if (std::abs(p_.row(i).sum() - 1.0) > 1e-12)
            throw std::invalid_argument("StochasticKernel: row " + std::to_string(i) + " does not sum to 1");
    }
}

std::vector<ShockPath> iterate_kernel(const StochasticKernel& p, std::size_t t, std::size_t w0)
{
    if (t == 0)
        throw std::invalid_argument("iterate_kernel: t must be at least 1");
    if (w0 >= p.states())
        throw std::out_of_range("iterate_kernel: initial shock out of range");
    std::vector<ShockPath> paths{{{}, 1.0}};
    for (std::size_t step = 0; step < t; ++step)
    {
        std::vector<ShockPath> next;
        for (const auto& path : paths)
        {
            const std::size_t from = path.labels.empty() ? w0 : path.labels.back();
            for (std::size_t to = 0; to < p.states(); ++to)
            {
                const Scalar q = p(from, to);
                if (q == 0)
                    continue;
                if (next.size() >= kMaxPaths)
                    throw CapacityError("iterate_kernel: more than 1e7 shock paths; shorten the horizon");
                ShockPath child{path.labels, path.mass * q};
                child.labels.push_back(to);
                next.push_back(std::move(child));
            }
        }
        paths = std::move(next);
    }
    return paths;
}

Vector kernel_marginal(const StochasticKernel& p, std::size_t t, std::size_t w0)
{
    if (w0 >= p.states())
        throw std::out_of_range("kernel_marginal: initial shock out of range");
    Vector row = Vector::Zero(static_cast<Eigen::Index>(p.states()));
    row[static_cast<Eigen::Index>(w0)] = 1.0;
    for (std::size_t s = 0; s < t; ++s)
        row = (row.transpose() * p.matrix()).transpose();
    return row;
}

} // namespace leibniz
