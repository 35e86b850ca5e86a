#pragma once

#include "leibniz/types.hpp"

#include <cstddef>
#include <vector>

namespace leibniz
{

/// One atom of a finite measure: sample parameter t and mass w >= 0.
struct Atom
{
    Vector param;
    Scalar weight = 0;
};

/// Finite weighted atom list; total mass is positive and finite.
class MeasureSpace
{
public:
    explicit MeasureSpace(std::vector<Atom> atoms);

    [[nodiscard]] const std::vector<Atom>& atoms() const { return atoms_; }
    [[nodiscard]] std::size_t size() const { return atoms_.size(); }
    [[nodiscard]] const Atom& operator[](std::size_t i) const { return atoms_[i]; }
    [[nodiscard]] Scalar total_mass() const { return total_; }

private:
    std::vector<Atom> atoms_;
    Scalar total_ = 0;
};

/// Midpoint rule on [a, b]: t_i = a + (i - 1/2)(b - a)/N, each weight (b - a)/N.
MeasureSpace uniform_discretization(std::size_t n, Scalar a, Scalar b);

/// Sum of w_i f(atom_i).
template <class F>
Scalar integrate_scalar(F&& f, const MeasureSpace& m)
{
    Scalar total = 0;
    for (const auto& atom : m.atoms())
        total += atom.weight * static_cast<Scalar>(f(atom));
    return total;
}

/// Row-stochastic matrix P(w' | w); rows sum to 1 within 1e-12.
class StochasticKernel
{
public:
    explicit StochasticKernel(Matrix rows);

    [[nodiscard]] const Matrix& matrix() const { return p_; }
    [[nodiscard]] std::size_t states() const { return static_cast<std::size_t>(p_.rows()); }
    [[nodiscard]] Scalar operator()(std::size_t from, std::size_t to) const
    {
        return p_(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
    }

private:
    Matrix p_;
};

/// A shock path (w_1, ..., w_t) with its probability under P^t(. | w_0).
struct ShockPath
{
    std::vector<std::size_t> labels;
    Scalar mass = 0;
};

inline constexpr std::size_t kMaxPaths = 10'000'000;

/// Enumerates the length-t shock paths started at w0 with positive mass.
/// Labels are 0-based. Throws CapacityError beyond kMaxPaths.
std::vector<ShockPath> iterate_kernel(const StochasticKernel& p, std::size_t t, std::size_t w0);

/// Marginal of the t-th shock: row w0 of P^t.
Vector kernel_marginal(const StochasticKernel& p, std::size_t t, std::size_t w0);

} // namespace leibniz
