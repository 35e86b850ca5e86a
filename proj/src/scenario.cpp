#include "leibniz/scenario.hpp"

#include "leibniz/desk.hpp"
#include "leibniz/random.hpp"
#include "leibniz/setintegral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace leibniz
{

namespace
{

using json = nlohmann::json;
using io::ParseError;

const std::set<std::string> kKinds = {"geometry", "integral", "lyapunov", "leibniz", "dp", "euler", "nlp"};

[[noreturn]] void fail(const std::string& where, const std::string& what)
{
    throw ParseError(where + ": " + what);
}

const json& req(const json& j, const char* key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key))
        fail(where, std::string("missing field \"") + key + "\"");
    return j.at(key);
}

double num(const json& j, const std::string& where)
{
    if (!j.is_number())
        fail(where, "expected a number");
    return j.get<double>();
}

double num_or(const json& j, const char* key, double fallback, const std::string& where)
{
    return j.contains(key) ? num(j.at(key), where + "." + key) : fallback;
}

std::size_t count(const json& j, const std::string& where)
{
    if (!j.is_number_integer() || j.get<long long>() < 0)
        fail(where, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

std::size_t count_or(const json& j, const char* key, std::size_t fallback, const std::string& where)
{
    return j.contains(key) ? count(j.at(key), where + "." + key) : fallback;
}

Vector point(const json& j, const std::string& where)
{
    if (j.is_number())
        return Vector::Constant(1, j.get<double>());
    return io::vector_from_json(j, where);
}

std::string fmt(double x)
{
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
}

std::string fmt(const Vector& v)
{
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + fmt(v[i]);
    return s;
}

Report make(std::string check, std::string ref)
{
    Report r;
    r.check = std::move(check);
    r.paper_ref = std::move(ref);
    return r;
}

/// Per-run state handed to every planned task.
struct Context
{
    const Scenario& s;
    const RunOptions& opt;
    std::uint64_t seed;
    ScenarioResult& out;

    [[nodiscard]] double tol(const std::string& key, double fallback) const
    {
        const auto it = s.tolerances.find(key);
        return (it == s.tolerances.end() ? fallback : it->second) * opt.tol_scale;
    }

    [[nodiscard]] CounterRng rng(std::uint64_t stream) const { return CounterRng(seed).split(stream); }

    void add(Report r)
    {
        r.classify();
        out.checks.push_back(std::move(r));
    }

    void table(const std::string& tag, const std::string& csv)
    {
        out.tables[s.name + "__" + tag + ".csv"] = csv;
    }
};

using Task = std::function<void(Context&)>;

// --- random generators --------------------------------------------------

SetRep random_set(CounterRng& rng, Eigen::Index dim, std::size_t max_pieces, std::size_t max_vertices)
{
    std::vector<Matrix> pieces;
    const std::size_t np = 1 + rng.below(max_pieces);
    for (std::size_t p = 0; p < np; ++p)
    {
        Matrix piece(dim, static_cast<Eigen::Index>(1 + rng.below(max_vertices)));
        for (Eigen::Index j = 0; j < piece.size(); ++j)
            piece.data()[j] = rng.uniform(-2, 2);
        pieces.push_back(piece);
    }
    return SetRep(dim, pieces);
}

/// Weights in [0.05, 1) normalized to a probability vector.
MeasureSpace random_measure(CounterRng& rng, std::size_t atoms)
{
    std::vector<Atom> out;
    double total = 0;
    for (std::size_t i = 0; i < atoms; ++i)
    {
        out.push_back({Vector::Constant(1, static_cast<double>(i)), rng.uniform(0.05, 1)});
        total += out.back().weight;
    }
    for (auto& a : out)
        a.weight /= total;
    return MeasureSpace(std::move(out));
}

// --- geometry -------------------------------------------------------------

void plan_geometry(const Scenario& s, bool seeded, std::vector<Task>& tasks)
{
    const std::string w = s.name + ".inputs";
    std::vector<SetRep> fixed;
    if (s.inputs.contains("sets"))
    {
        const json& sets = s.inputs["sets"];
        if (!sets.is_array())
            fail(w + ".sets", "expected an array");
        for (std::size_t i = 0; i < sets.size(); ++i)
            fixed.push_back(io::set_from_json(sets[i], w + ".sets[" + std::to_string(i) + "]"));
    }
    std::size_t random_count = 0;
    std::size_t max_dim = 2;
    std::size_t max_vertices = 4;
    if (s.inputs.contains("random"))
    {
        if (!seeded)
            fail(s.name, "random geometry needs a seed");
        const json& r = s.inputs["random"];
        random_count = count(req(r, "count", w + ".random"), w + ".random.count");
        max_dim = std::max<std::size_t>(1, count_or(r, "max_dim", 2, w + ".random"));
        max_vertices = std::max<std::size_t>(1, count_or(r, "max_vertices", 4, w + ".random"));
    }
    if (fixed.empty() && random_count == 0)
        fail(w, "need \"sets\" or \"random\"");

    tasks.push_back([=](Context& ctx) {
        std::vector<std::pair<SetRep, SetRep>> pairs;
        for (std::size_t i = 0; i < fixed.size(); ++i)
            for (std::size_t j = i; j < fixed.size(); ++j)
                if (fixed[i].dim() == fixed[j].dim())
                    pairs.emplace_back(fixed[i], fixed[j]);
        CounterRng rng = ctx.rng(1);
        for (std::size_t k = 0; k < random_count; ++k)
        {
            const auto dim = static_cast<Eigen::Index>(1 + rng.below(max_dim));
            SetRep a = random_set(rng, dim, 3, max_vertices);
            SetRep b = random_set(rng, dim, 3, max_vertices);
            pairs.emplace_back(std::move(a), std::move(b));
        }

        Report mink = make("minkowski_support", "support function of a Minkowski sum is the sum of supports");
        Report conv = make("convexify_support", "a set and its convex hull share the support function");
        Report affine = make("scale_translate_support", "support function is positively homogeneous and shifts linearly");
        Report haus = make("hausdorff_support_identity", "Hausdorff distance of convex sets as sup-norm of support differences");
        const double tol = ctx.tol("support", 1e-12);
        for (const auto& [a, b] : pairs)
        {
            const auto dirs = default_directions(a.dim(), 64);
            const SetRep sum = minkowski_sum(a, b);
            const SetRep ca = convexify(a);
            const SetRep cb = convexify(b);
            Vector shift = Vector::Constant(a.dim(), 0.5);
            const SetRep moved = translate(scale(a, 2.5), shift);
            double h_sup = 0;
            for (const auto& d : dirs)
            {
                const Vector h = d.vec().normalized();
                const double sa = support(a, h);
                const double sb = support(b, h);
                const double rel = 1 + std::abs(sa) + std::abs(sb);
                mink.max_residual = std::max(mink.max_residual, std::abs(support(sum, h) - sa - sb) / rel);
                conv.max_residual = std::max(conv.max_residual, std::abs(support(ca, h) - sa) / rel);
                affine.max_residual =
                    std::max(affine.max_residual, std::abs(support(moved, h) - 2.5 * sa - shift.dot(h)) / rel);
                h_sup = std::max(h_sup, std::abs(support(ca, h) - support(cb, h)));
            }
            // Exact two-sided excess between the hulls bounds the sampled value from above.
            const double exact = std::max(excess(ca, cb), excess(cb, ca));
            haus.max_residual = std::max(haus.max_residual, std::max(0.0, h_sup - exact));
        }
        for (Report* r : {&mink, &conv, &affine, &haus})
        {
            r->pass = r->max_residual <= tol;
            r->extras["pairs"] = pairs.size();
            ctx.add(*r);
        }
    });
}

// --- integral -------------------------------------------------------------

void plan_integral(const Scenario& s, bool seeded, std::vector<Task>& tasks)
{
    const std::string w = s.name + ".inputs";
    if (s.inputs.contains("map"))
    {
        const json& mj = s.inputs["map"];
        if (!mj.is_array() || mj.empty())
            fail(w + ".map", "expected a nonempty array of sets");
        std::vector<SetRep> sets;
        for (std::size_t i = 0; i < mj.size(); ++i)
            sets.push_back(io::set_from_json(mj[i], w + ".map[" + std::to_string(i) + "]"));
        const MeasureSpace m = io::measure_from_json(req(s.inputs, "measure", w), w + ".measure");
        if (m.size() != sets.size())
            fail(w, "map and measure differ in atom count");
        for (const auto& set : sets)
            if (set.dim() != sets.front().dim())
                fail(w + ".map", "sets differ in dimension");
        const SetValuedMap map(sets);
        tasks.push_back([map, m](Context& ctx) {
            const auto dirs = default_directions(map.dim(), 64);
            Report r = check_supremum_representation(map, m, dirs);
            r.pass = r.max_residual <= ctx.tol("support", 1e-9);
            r.extras["aumann_integral"] = io::to_json(aumann_integral(map, m));
            r.extras["wstar_integral"] = io::to_json(wstar_integral(map, m));
            ctx.add(r);
        });
    }
    if (s.inputs.contains("random"))
    {
        if (!seeded)
            fail(s.name, "random set-valued maps need a seed");
        const json& r = s.inputs["random"];
        const std::size_t n = count(req(r, "count", w + ".random"), w + ".random.count");
        const std::size_t max_atoms = std::max<std::size_t>(1, count_or(r, "max_atoms", 3, w + ".random"));
        const std::size_t max_vertices = std::max<std::size_t>(1, count_or(r, "max_vertices", 4, w + ".random"));
        const std::size_t max_dim = std::max<std::size_t>(1, count_or(r, "max_dim", 2, w + ".random"));
        tasks.push_back([=](Context& ctx) {
            CounterRng rng = ctx.rng(2);
            Report agg = make("supremum_representation_random",
                              "supremum representation of the integral of support functions");
            std::size_t failed = 0;
            const double tol = ctx.tol("support", 1e-9);
            for (std::size_t k = 0; k < n; ++k)
            {
                const auto dim = static_cast<Eigen::Index>(1 + rng.below(max_dim));
                const std::size_t atoms = 1 + rng.below(max_atoms);
                std::vector<SetRep> sets;
                for (std::size_t i = 0; i < atoms; ++i)
                    sets.push_back(random_set(rng, dim, 1, max_vertices));
                const MeasureSpace m = random_measure(rng, atoms);
                const Report one = check_supremum_representation(SetValuedMap(sets), m, default_directions(dim, 64));
                agg.max_residual = std::max(agg.max_residual, one.max_residual);
                if (one.max_residual > tol)
                    ++failed;
            }
            agg.pass = failed == 0;
            agg.extras["instances"] = n;
            agg.extras["failed"] = failed;
            ctx.add(agg);
        });
    }
    if (!s.inputs.contains("map") && !s.inputs.contains("random"))
        fail(w, "need \"map\" or \"random\"");
}

// --- lyapunov -------------------------------------------------------------

void plan_lyapunov(const Scenario& s, std::vector<Task>& tasks)
{
    const std::string w = s.name + ".inputs";
    if (s.refinements.empty())
        fail(s.name, "lyapunov studies need a refinement list");
    std::function<MapInstance(std::size_t)> family;
    Eigen::Index dim = 1;
    if (s.inputs.contains("set"))
    {
        const SetRep set = io::set_from_json(s.inputs["set"], w + ".set");
        dim = set.dim();
        family = [set](std::size_t n) {
            return MapInstance{SetValuedMap(std::vector<SetRep>(n, set)), uniform_discretization(n, 0, 1)};
        };
    }
    else
    {
        const json& fj = req(s.inputs, "family", w);
        const std::string f = fj.is_string() ? fj.get<std::string>() : "";
        if (f == "zero-one")
            family = [](std::size_t n) {
                return MapInstance{SetValuedMap(std::vector<SetRep>(n, SetRep::points1d({0, 1}))),
                                   uniform_discretization(n, 0, 1)};
            };
        else if (f == "antipodal-circle")
        {
            dim = 2;
            family = [](std::size_t n) {
                const auto m = uniform_discretization(n, 0, 1);
                std::vector<SetRep> vals;
                for (const auto& a : m.atoms())
                {
                    const double t = 2 * std::numbers::pi * a.param[0];
                    Vector p(2);
                    p << std::cos(t), std::sin(t);
                    vals.push_back(SetRep::points({p, Vector(-p)}));
                }
                return MapInstance{SetValuedMap(vals), m};
            };
        }
        else
            fail(w + ".family", "unknown family");
    }
    bool half_over_n = false;
    if (s.inputs.contains("expected_gap"))
    {
        if (s.inputs["expected_gap"] != "half_over_n")
            fail(w + ".expected_gap", "only \"half_over_n\" is supported");
        half_over_n = true;
    }
    const auto ns = s.refinements;
    tasks.push_back([=](Context& ctx) {
        const auto dirs = default_directions(dim);
        const Report r = check_lyapunov_convexification(family, ns, dirs);
        std::ostringstream csv;
        csv << std::setprecision(17) << "N,gap\n";
        for (const auto& row : r.extras["table"])
            csv << row["N"].get<std::size_t>() << "," << row["gap"].get<double>() << "\n";
        ctx.table("lyapunov", csv.str());
        ctx.add(r);
        if (half_over_n)
        {
            Report f = make("lyapunov_gap_formula", "refinement gap of the two-point map {0,1} is 1/(2N)");
            for (std::size_t k = 0; k < ns.size(); ++k)
            {
                const double e = std::abs(r.per_direction[k] - 0.5 / static_cast<double>(ns[k]));
                f.per_direction.push_back(e);
                f.max_residual = std::max(f.max_residual, e);
            }
            f.pass = f.max_residual <= ctx.tol("gap", 1e-12);
            ctx.add(f);
        }
    });
}

// --- leibniz --------------------------------------------------------------

/// Max of the two excesses; exact for finite unions of polytopes in 1-D and 2-D.
double set_distance(const SetRep& a, const SetRep& b)
{
    return std::max(excess(a, b), excess(b, a));
}

std::vector<FnExpr> integrand_list(const json& j, const std::string& where)
{
    if (!j.is_array() || j.empty())
        fail(where, "expected a nonempty array of expressions");
    std::vector<FnExpr> fs;
    for (std::size_t i = 0; i < j.size(); ++i)
        fs.push_back(io::expr_from_json(j[i], where + "[" + std::to_string(i) + "]"));
    for (const auto& f : fs)
        if (f.dim() != fs.front().dim())
            fail(where, "atoms differ in input dimension");
    return fs;
}

void plan_leibniz(const Scenario& s, std::vector<Task>& tasks)
{
    const std::string w = s.name + ".inputs";
    const json& mj = req(s.inputs, "mode", w);
    const std::string mode = mj.is_string() ? mj.get<std::string>() : "";
    const Vector x = point(req(s.inputs, "x", w), w + ".x");

    if (mode == "subdiff")
    {
        const FnExpr f = io::expr_from_json(req(s.inputs, "f", w), w + ".f");
        if (f.dim() != x.size())
            fail(w, "x does not match the input dimension of f");
        std::optional<SetRep> want_lim, want_cl;
        if (s.inputs.contains("expect_limiting"))
            want_lim = io::set_from_json(s.inputs["expect_limiting"], w + ".expect_limiting");
        if (s.inputs.contains("expect_clarke"))
            want_cl = io::set_from_json(s.inputs["expect_clarke"], w + ".expect_clarke");
        tasks.push_back([=](Context& ctx) {
            Report r = make("subdifferential", "limiting subdifferential and its convex hull, the Clarke gradient");
            const auto lim = limiting_subdiff(f, x);
            const auto cl = clarke_gradient(f, x);
            const SetRep hull = convexify(lim.set);
            for (const auto& d : default_directions(x.size(), 64))
            {
                const double e = std::abs(support(cl.set, d) - support(hull, d));
                r.per_direction.push_back(e);
                r.max_residual = std::max(r.max_residual, e);
            }
            if (want_lim)
            {
                const double e = set_distance(lim.set, *want_lim);
                r.extras["limiting_distance_to_expected"] = e;
                r.max_residual = std::max(r.max_residual, e);
            }
            if (want_cl)
            {
                const double e = set_distance(cl.set, convexify(*want_cl));
                r.extras["clarke_distance_to_expected"] = e;
                r.max_residual = std::max(r.max_residual, e);
            }
            r.pass = r.max_residual <= ctx.tol("subdiff", 1e-12);
            r.hypotheses["exact"] = lim.exact && cl.exact;
            r.extras["limiting"] = io::to_json(lim.set);
            r.extras["clarke"] = io::to_json(cl.set);
            r.extras["regular"] = lim.regular;
            ctx.add(r);
        });
        return;
    }
    if (mode == "clarke" || mode == "strict")
    {
        const auto fs = integrand_list(req(s.inputs, "integrand", w), w + ".integrand");
        const MeasureSpace m = io::measure_from_json(req(s.inputs, "measure", w), w + ".measure");
        if (m.size() != fs.size())
            fail(w, "integrand and measure differ in atom count");
        if (fs.front().dim() != x.size())
            fail(w, "x does not match the integrand dimension");
        const Integrand phi(fs);
        if (mode == "clarke")
        {
            std::optional<std::pair<double, std::size_t>> witness;
            if (s.inputs.contains("witness_gap_factor"))
            {
                const std::size_t atom = count(req(s.inputs, "witness_atom", w), w + ".witness_atom");
                if (atom >= m.size())
                    fail(w + ".witness_atom", "no such atom");
                witness = {num(s.inputs["witness_gap_factor"], w + ".witness_gap_factor"), atom};
            }
            tasks.push_back([=](Context& ctx) {
                Report r = clarke_leibniz_check(phi, m, x, default_directions(x.size(), 64));
                ctx.add(r);
                if (witness)
                {
                    Report g = make("strictness_witness",
                                    "unconvexified subdifferential of the integral is strictly smaller than the set integral");
                    const double gap = r.extras["limiting_gap"].get<double>();
                    const double need = witness->first * m[witness->second].weight;
                    g.max_residual = std::max(0.0, need - gap);
                    g.pass = gap >= need;
                    g.extras["limiting_gap"] = gap;
                    g.extras["required"] = need;
                    ctx.add(g);
                }
            });
        }
        else
            tasks.push_back([=](Context& ctx) {
                Report r = make("strict_leibniz", "strict derivative of the integral functional is the integral of gradients");
                try
                {
                    const Vector g = strict_leibniz(phi, m, x);
                    const FnExpr total = integral_functional(phi, m);
                    const auto sd = strict_derivative(total, x);
                    const double e_strict = sd ? (g - *sd).cwiseAbs().maxCoeff() : INFINITY;
                    const double h = 1e-6;
                    Vector fd(x.size());
                    for (Eigen::Index i = 0; i < x.size(); ++i)
                    {
                        Vector e = Vector::Zero(x.size());
                        e[i] = h;
                        fd[i] = (eval(total, x + e) - eval(total, x - e)) / (2 * h);
                    }
                    const double e_fd = (g - fd).cwiseAbs().maxCoeff();
                    r.per_direction = {e_strict, e_fd};
                    r.max_residual = e_strict;
                    r.pass = e_strict <= ctx.tol("strict", 1e-10) && e_fd <= ctx.tol("fd", 1e-4);
                    r.extras["gradient"] = io::to_json(g);
                    r.extras["finite_difference"] = io::to_json(fd);
                    r.extras["fd_error"] = e_fd;
                    r.hypotheses["atoms_strictly_differentiable"] = true;
                }
                catch (const InapplicableError& e)
                {
                    r.pass = false;
                    r.verdict = Verdict::Inapplicable;
                    r.warnings.emplace_back(e.what());
                    r.hypotheses["atoms_strictly_differentiable"] = false;
                }
                catch (const ConsistencyError& e)
                {
                    r.pass = false;
                    r.warnings.emplace_back(e.what());
                }
                ctx.add(r);
            });
        return;
    }
    if (mode == "limiting")
    {
        if (s.refinements.empty())
            fail(s.name, "limiting Leibniz studies need a refinement list");
        if (x.size() != 1)
            fail(w + ".x", "the shifted-|x| families are one-dimensional");
        const json& fj = req(s.inputs, "family", w);
        const std::string fam = fj.is_string() ? fj.get<std::string>() : "";
        if (fam != "abs-shift" && fam != "neg-abs-shift")
            fail(w + ".family", "unknown family");
        const double sign = fam == "abs-shift" ? 1 : -1;
        const auto ns = s.refinements;
        tasks.push_back([=](Context& ctx) {
            std::vector<IntegrandInstance> inst;
            for (std::size_t n : ns)
            {
                const auto m = uniform_discretization(n, 0, 1);
                std::vector<FnExpr> fs;
                for (const auto& a : m.atoms())
                {
                    const double t = a.param[0];
                    const FnExpr abs = FnExpr::max_of(
                        {FnExpr::affine(Vector::Constant(1, 1), -t), FnExpr::affine(Vector::Constant(1, -1), t)});
                    fs.push_back(sign * abs);
                }
                inst.push_back({Integrand(fs), m});
            }
            const Report r = limiting_leibniz_check(inst, x, default_directions(1));
            std::ostringstream csv;
            csv << std::setprecision(17) << "atoms,inclusion_residual,raw_distance,convexification_gap\n";
            for (const auto& row : r.extras["table"])
            {
                csv << row["atoms"].get<std::size_t>() << "," << row["inclusion_residual"].get<double>() << ",";
                csv << (row.contains("raw_distance") ? fmt(row["raw_distance"].get<double>()) : "") << ",";
                csv << (row.contains("convexification_gap") ? fmt(row["convexification_gap"].get<double>()) : "")
                    << "\n";
            }
            ctx.table("limiting_leibniz", csv.str());
            ctx.add(r);
        });
        return;
    }
    fail(w + ".mode", "unknown mode \"" + mode + "\"");
}

// --- dp / euler / nlp -----------------------------------------------------

/// Shared solution of one DP scenario, filled by the first task.
struct DpState
{
    DPModel model;
    double value_tol = 1e-10;
    ValueTable v;
    PolicyTable g;
};

struct Where
{
    std::size_t x;
    std::vector<std::size_t> shocks;
    std::string label(std::size_t w, const DPModel& m) const
    {
        return "(x=" + fmt(m.states[x]) + ", w=" + std::to_string(w) + ")";
    }
};

Where locate(const DPModel& m, const json& c, const std::string& where)
{
    Where at{0, {}};
    if (c.contains("x"))
    {
        at.x = count(c["x"], where + ".x");
        if (at.x >= m.size())
            fail(where + ".x", "state index out of range");
    }
    else if (c.contains("x_at"))
    {
        const Vector p = point(c["x_at"], where + ".x_at");
        if (p.size() != m.dim())
            fail(where + ".x_at", "dimension mismatch");
        at.x = m.nearest_state(p);
    }
    else
        fail(where, "need \"x\" (state index) or \"x_at\" (coordinates)");
    if (!c.contains("shock") || c["shock"] == "all")
        for (std::size_t w = 0; w < m.shocks(); ++w)
            at.shocks.push_back(w);
    else
    {
        const std::size_t w = count(c["shock"], where + ".shock");
        if (w >= m.shocks())
            fail(where + ".shock", "shock index out of range");
        at.shocks.push_back(w);
    }
    return at;
}

/// Appends a report comparing the verdict of `r` with the declared expectation.
void expectation(Context& ctx, const Report& r, const std::string& expect)
{
    Report e = make(r.check + ":expected-" + expect, "negative control");
    const std::string got = r.verdict == Verdict::Inapplicable ? "inapplicable" : (r.pass ? "pass" : "fail");
    e.pass = got == expect;
    e.max_residual = e.pass ? 0 : 1;
    e.extras["observed"] = got;
    e.extras["observed_verdict"] = to_string(r.verdict);
    ctx.add(e);
}

void plan_dp(const Scenario& s, bool seeded, std::vector<Task>& tasks)
{
    const std::string w = s.name + ".inputs";
    auto st = std::make_shared<DpState>();
    st->model = io::model_from_json(req(s.inputs, "model", w), w + ".model");
    st->value_tol = num_or(s.inputs, "value_tol", 1e-10, w);
    if (!(st->value_tol > 0))
        fail(w + ".value_tol", "must be positive");

    tasks.push_back([st](Context& ctx) {
        st->v = value_iteration(st->model, st->value_tol * ctx.opt.tol_scale);
        st->g = policy_multifunction(st->model, st->v);
        ctx.out.results["value_table"] = io::to_json(st->v);
        ctx.out.results["policy_table"] = io::to_json(st->g);
        Report r = make("value_iteration", "Bellman fixed point by contraction");
        const double beta = st->model.beta;
        const double bound = beta == 0 ? st->v.tolerance : (1 - beta) * st->v.tolerance / beta;
        r.max_residual = st->v.bellman_residual;
        r.pass = st->v.bellman_residual <= bound + 1e-14;
        r.extras["iterations"] = st->v.iterations;
        r.extras["certified_bound"] = bound;
        ctx.add(r);
    });

    const json& checks = req(s.inputs, "checks", w);
    if (!checks.is_array())
        fail(w + ".checks", "expected an array");
    const DPModel& m = st->model;
    for (std::size_t ci = 0; ci < checks.size(); ++ci)
    {
        const json& c = checks[ci];
        const std::string cw = w + ".checks[" + std::to_string(ci) + "]";
        const json& tj = req(c, "type", cw);
        const std::string type = tj.is_string() ? tj.get<std::string>() : "";
        std::string expect;
        if (c.contains("expect_outcome"))
        {
            expect = c["expect_outcome"].is_string() ? c["expect_outcome"].get<std::string>() : "";
            if (expect != "pass" && expect != "fail" && expect != "inapplicable")
                fail(cw + ".expect_outcome", "must be pass, fail or inapplicable");
        }
        auto finish = [expect](Context& ctx, Report r) {
            ctx.add(r);
            if (!expect.empty())
                expectation(ctx, ctx.out.checks.back(), expect);
        };

        if (type == "constant_value")
        {
            const double c0 = num(req(c, "value", cw), cw + ".value");
            tasks.push_back([st, c0](Context& ctx) {
                Report r = make("constant_value", "value function of the constant-cost model");
                r.max_residual = (st->v.values.array() - c0).abs().maxCoeff();
                r.pass = r.max_residual <= ctx.tol("value", 1e-8);
                r.extras["expected"] = c0;
                ctx.add(r);
            });
        }
        else if (type == "invariants")
        {
            if (!seeded)
                fail(s.name, "random Bellman tables need a seed");
            const std::size_t pairs = count_or(c, "pairs", 100, cw);
            tasks.push_back([st, pairs, ci](Context& ctx) {
                const DPModel& md = st->model;
                CounterRng rng = ctx.rng(100 + ci);
                const auto rows = static_cast<Eigen::Index>(md.size());
                const auto cols = static_cast<Eigen::Index>(md.shocks());
                auto table = [&] {
                    Matrix t(rows, cols);
                    for (Eigen::Index i = 0; i < t.size(); ++i)
                        t.data()[i] = rng.uniform(-5, 5);
                    return t;
                };
                double contraction = 0, monotone = 0, shift = 0;
                for (std::size_t k = 0; k < pairs; ++k)
                {
                    const Matrix a = table();
                    const Matrix b = table();
                    const double cst = rng.uniform(-3, 3);
                    const Matrix ta = bellman_operator(md, a);
                    const Matrix tb = bellman_operator(md, b);
                    contraction = std::max(contraction, (ta - tb).cwiseAbs().maxCoeff() -
                                                            md.beta * (a - b).cwiseAbs().maxCoeff());
                    monotone = std::max(monotone, (ta - bellman_operator(md, a.cwiseMax(b))).maxCoeff());
                    const Matrix ts = bellman_operator(md, (a.array() + cst).matrix());
                    shift = std::max(shift, ((ts - ta).array() - md.beta * cst).abs().maxCoeff());
                }
                Report r = make("bellman_invariants", "Bellman operator is a monotone beta-contraction commuting with constants");
                r.per_direction = {contraction, monotone, shift};
                r.max_residual = std::max({contraction, monotone, shift, 0.0});
                r.pass = r.max_residual <= ctx.tol("invariant", 1e-12);
                r.extras["pairs"] = pairs;
                ctx.add(r);
            });
        }
        else if (type == "finite_horizon")
        {
            const std::size_t horizon = std::max<std::size_t>(1, count_or(c, "horizon", 8, cw));
            tasks.push_back([st, horizon](Context& ctx) {
                const DPModel& md = st->model;
                const double sup = cost_sup_norm(md);
                Report r = make("finite_horizon_oracle", "value function as the limit of finite-horizon optimal costs");
                std::ostringstream csv;
                csv << std::setprecision(17) << "T,bound,max_abs_diff\n";
                double worst = -INFINITY;
                for (std::size_t t = 1; t <= horizon; ++t)
                {
                    const double bound = std::pow(md.beta, static_cast<double>(t)) * sup / (1 - md.beta);
                    double diff = 0;
                    for (std::size_t w0 = 0; w0 < md.shocks(); ++w0)
                        for (std::size_t x = 0; x < md.size(); ++x)
                            diff = std::max(diff, std::abs(st->v.values(static_cast<Eigen::Index>(x),
                                                                        static_cast<Eigen::Index>(w0)) -
                                                           finite_horizon_oracle(md, t, x, w0)));
                    csv << t << "," << bound << "," << diff << "\n";
                    r.per_direction.push_back(diff - bound);
                    worst = std::max(worst, diff - bound);
                }
                // Value iteration error enters once on top of the tail bound.
                r.max_residual = std::max(0.0, worst);
                r.pass = worst <= st->v.tolerance + ctx.tol("value", 1e-10);
                ctx.table("finite_horizon", csv.str());
                ctx.add(r);
            });
        }
        else if (type == "policy")
        {
            std::vector<std::tuple<Where, double>> want;
            if (c.contains("expect"))
                for (const auto& e : c["expect"])
                    want.emplace_back(locate(m, e, cw + ".expect"), num(req(e, "y", cw + ".expect"), cw + ".expect.y"));
            tasks.push_back([st, want](Context& ctx) {
                const DPModel& md = st->model;
                Report r = make("policy", "policy multifunction and lexicographic selector");
                std::size_t ties = 0;
                for (const auto& per_w : st->g.argmin)
                    for (const auto& l : per_w)
                        ties += l.size() > 1 ? 1 : 0;
                for (const auto& [at, y] : want)
                    for (std::size_t w0 : at.shocks)
                    {
                        const double e = std::abs(md.states[st->g.selector[w0][at.x]][0] - y);
                        r.per_direction.push_back(e);
                        r.max_residual = std::max(r.max_residual, e);
                    }
                r.pass = r.max_residual <= 1e-9;
                r.extras["ties"] = ties;
                ctx.add(r);
            });
        }
        else if (type == "viability")
        {
            const Where at = locate(m, c, cw);
            const double radius = num_or(c, "radius", default_radius(m), cw);
            for (std::size_t w0 : at.shocks)
                tasks.push_back([st, at, w0, radius, finish](Context& ctx) {
                    const Viability v = check_viability(st->model, st->g, at.x, w0, radius);
                    Report r = make("viability" + at.label(w0, st->model), "lower and upper viability of the policy");
                    r.hypotheses["lower_viability"] = v.lower;
                    r.hypotheses["upper_viability"] = v.upper;
                    r.pass = v.lower && v.upper;
                    r.max_residual = r.pass ? 0 : 1;
                    r.extras["upper_automatic"] = v.upper_automatic;
                    r.extras["pairs"] = v.pairs;
                    finish(ctx, r);
                });
        }
        else if (type == "envelope" || type == "strict_derivative" || type == "nlp_subdiff")
        {
            const Where at = locate(m, c, cw);
            for (std::size_t w0 : at.shocks)
                tasks.push_back([st, at, w0, type, finish](Context& ctx) {
                    const auto dirs = default_directions(st->model.dim(), 64);
                    Report r = type == "envelope"            ? envelope_check(st->model, st->v, st->g, at.x, w0, dirs)
                               : type == "strict_derivative" ? strict_value_derivative_check(st->model, st->v, st->g, at.x, w0)
                                                             : nlp_value_subdiff_check(st->model, st->v, st->g, at.x, w0, dirs);
                    r.check += at.label(w0, st->model);
                    finish(ctx, r);
                });
        }
        else if (type == "euler")
        {
            const Where at = locate(m, c, cw);
            const double radius = num_or(c, "cone_radius", 1.0, cw);
            std::optional<long> perturb;
            if (c.contains("perturb"))
            {
                if (!c["perturb"].is_number_integer())
                    fail(cw + ".perturb", "expected an integer state offset");
                perturb = c["perturb"].get<long>();
            }
            for (std::size_t w0 : at.shocks)
                tasks.push_back([st, at, w0, radius, perturb, finish](Context& ctx) {
                    const DPModel& md = st->model;
                    finish(ctx, [&] {
                        Report r = euler_inclusion_check(md, st->v, st->g, at.x, w0, radius, ctx.tol("euler", 1e-6));
                        r.check += at.label(w0, md);
                        return r;
                    }());
                    if (!perturb)
                        return;
                    const long y = static_cast<long>(st->g.selector[w0][at.x]) + *perturb;
                    Report p = make("euler_perturbed" + at.label(w0, md), "Euler residual detects a non-optimal choice");
                    if (y < 0 || y >= static_cast<long>(md.size()))
                    {
                        p.verdict = Verdict::Inapplicable;
                        p.pass = false;
                        p.warnings.emplace_back("perturbed state is off the grid");
                    }
                    else
                    {
                        const double res =
                            euler_inclusion_residual(md, st->v, st->g, at.x, w0, radius, static_cast<std::size_t>(y));
                        p.max_residual = res;
                        p.pass = res >= ctx.tol("perturbed_min", 0.1);
                        p.extras["perturbed_y"] = io::to_json(md.states[static_cast<std::size_t>(y)]);
                    }
                    ctx.add(p);
                });
        }
        else if (type == "limiting_euler")
        {
            const Where at = locate(m, c, cw);
            const double radius = num_or(c, "cone_radius", 1.0, cw);
            for (std::size_t w0 : at.shocks)
                tasks.push_back([st, at, w0, radius, finish](Context& ctx) {
                    const DPModel& md = st->model;
                    Report r = limiting_euler_check(md, st->v, st->g, at.x, w0, default_directions(md.dim(), 64), radius,
                                                    ctx.tol("euler", 1e-6));
                    r.check += at.label(w0, md);
                    finish(ctx, r);
                    Report d = make("raw_dominates_convexified" + at.label(w0, md),
                                    "the unconvexified Euler residual dominates the convexified one");
                    for (const char* form : {"graph", "split"})
                    {
                        const std::string raw = std::string(form) + "_residual_raw";
                        const std::string conv = std::string(form) + "_residual_convexified";
                        if (!r.extras.contains(raw) || r.extras[raw].is_null())
                            continue;
                        const double e = r.extras[conv].get<double>() - r.extras[raw].get<double>();
                        d.per_direction.push_back(e);
                        d.max_residual = std::max(d.max_residual, e);
                    }
                    d.pass = d.max_residual <= 1e-12;
                    ctx.add(d);
                });
        }
        else if (type == "mfcq" || type == "multipliers")
        {
            const Where at = locate(m, c, cw);
            std::optional<std::size_t> y;
            if (c.contains("y"))
            {
                y = count(c["y"], cw + ".y");
                if (*y >= m.size())
                    fail(cw + ".y", "state index out of range");
            }
            std::vector<Vector> want;
            if (c.contains("expect"))
                for (const auto& e : c["expect"])
                    want.push_back(point(e, cw + ".expect"));
            if (m.constraints.kind != ConstraintMap::Kind::Nlp)
                fail(cw, "needs NLP constraints");
            for (std::size_t w0 : at.shocks)
                tasks.push_back([st, at, w0, y, want, type, finish](Context& ctx) {
                    const DPModel& md = st->model;
                    const std::size_t yi = y ? *y : st->g.selector[w0][at.x];
                    const Vector& xs = md.states[at.x];
                    const Vector& ys = md.states[yi];
                    if (type == "mfcq")
                    {
                        const MfcqResult q = mfcq_check(md, xs, ys, w0);
                        Report r = make("mfcq" + at.label(w0, md),
                                        "Mangasarian-Fromovitz constraint qualification at the chosen action");
                        r.hypotheses["equality_gradients_independent"] = q.rank_ok;
                        r.hypotheses["strict_direction"] = q.direction_ok;
                        r.pass = q.holds;
                        r.max_residual = q.holds ? 0 : 1;
                        r.extras["certificate"] = q.xi.size() ? io::to_json(q.xi) : json(nullptr);
                        r.extras["slack"] = q.slack;
                        r.extras["active"] = q.active;
                        finish(ctx, r);
                        return;
                    }
                    Report r = make("lagrange_multipliers" + at.label(w0, md),
                                    "Lagrange multiplier set of the inner minimization");
                    const MultiplierSet lam = lagrange_multiplier_set(md, st->v, xs, ys, w0);
                    json verts = json::array();
                    for (const auto& l : lam.vertices)
                        verts.push_back(io::to_json(l));
                    r.extras["vertices"] = verts;
                    r.extras["active_sets"] = lam.active_sets;
                    if (!want.empty())
                    {
                        const auto dist = [](const Vector& p, const std::vector<Vector>& set) {
                            double d = INFINITY;
                            for (const auto& q : set)
                                if (q.size() == p.size())
                                    d = std::min(d, (q - p).cwiseAbs().maxCoeff());
                            return d;
                        };
                        for (const auto& p : want)
                            r.max_residual = std::max(r.max_residual, dist(p, lam.vertices));
                        for (const auto& p : lam.vertices)
                            r.max_residual = std::max(r.max_residual, dist(p, want));
                    }
                    r.pass = r.max_residual <= ctx.tol("multiplier", 1e-8);
                    finish(ctx, r);
                });
        }
        else
            fail(cw + ".type", "unknown check \"" + type + "\"");
    }
}

std::vector<Task> plan(const Scenario& s, bool seeded)
{
    std::vector<Task> tasks;
    if (s.kind == "geometry")
        plan_geometry(s, seeded, tasks);
    else if (s.kind == "integral")
        plan_integral(s, seeded, tasks);
    else if (s.kind == "lyapunov")
        plan_lyapunov(s, tasks);
    else if (s.kind == "leibniz")
        plan_leibniz(s, tasks);
    else
        plan_dp(s, seeded, tasks);
    return tasks;
}

} // namespace

Scenario parse_scenario(const json& j)
{
    if (!j.is_object())
        throw ParseError("scenario: expected an object");
    Scenario s;
    const json& name = req(j, "name", "scenario");
    if (!name.is_string() || name.get<std::string>().empty())
        fail("scenario", "name must be a nonempty string");
    s.name = name.get<std::string>();
    const json& kind = req(j, "kind", s.name);
    if (!kind.is_string() || !kKinds.contains(kind.get<std::string>()))
        fail(s.name, "unrecognized kind");
    s.kind = kind.get<std::string>();
    if (j.contains("description"))
    {
        if (!j["description"].is_string())
            fail(s.name, "description must be a string");
        s.description = j["description"].get<std::string>();
    }
    s.inputs = req(j, "inputs", s.name);
    if (!s.inputs.is_object())
        fail(s.name, "inputs must be an object");
    if (j.contains("tolerances"))
    {
        if (!j["tolerances"].is_object())
            fail(s.name, "tolerances must be an object");
        for (const auto& [k, v] : j["tolerances"].items())
        {
            const double t = num(v, s.name + ".tolerances." + k);
            if (!(t > 0) || !std::isfinite(t))
                fail(s.name + ".tolerances." + k, "must be positive");
            s.tolerances[k] = t;
        }
    }
    if (j.contains("seed"))
    {
        if (!j["seed"].is_number_unsigned())
            fail(s.name, "seed must be a nonnegative integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("refinements"))
    {
        if (!j["refinements"].is_array())
            fail(s.name, "refinements must be an array");
        for (const auto& n : j["refinements"])
        {
            const std::size_t v = count(n, s.name + ".refinements");
            if (v == 0)
                fail(s.name + ".refinements", "entries must be positive");
            s.refinements.push_back(v);
        }
    }
    if (j.contains("strict"))
    {
        if (!j["strict"].is_boolean())
            fail(s.name, "strict must be a boolean");
        s.strict = j["strict"].get<bool>();
    }
    return s;
}

json to_json(const Scenario& s)
{
    json j = {{"name", s.name}, {"kind", s.kind}, {"inputs", s.inputs}};
    if (!s.description.empty())
        j["description"] = s.description;
    if (!s.tolerances.empty())
        j["tolerances"] = s.tolerances;
    if (s.seed)
        j["seed"] = *s.seed;
    if (!s.refinements.empty())
        j["refinements"] = s.refinements;
    if (s.strict)
        j["strict"] = true;
    return j;
}

std::vector<Scenario> load_scenarios(const json& doc, std::optional<std::uint64_t> seed_override)
{
    json list;
    if (doc.is_object() && doc.contains("scenarios"))
        list = doc["scenarios"];
    else if (doc.is_array())
        list = doc;
    else if (doc.is_object())
        list = json::array({doc});
    else
        throw ParseError("document: expected {\"scenarios\": [...]}");
    if (!list.is_array())
        throw ParseError("document: \"scenarios\" must be an array");

    std::vector<Scenario> out;
    std::set<std::string> names;
    for (const auto& entry : list)
    {
        Scenario s;
        if (entry.is_object() && entry.contains("builtin"))
        {
            const json& b = entry["builtin"];
            const auto found = b.is_string() ? find_builtin(b.get<std::string>()) : std::nullopt;
            if (!found)
                throw ParseError("unknown builtin " + b.dump());
            s = *found;
        }
        else
            s = parse_scenario(entry);
        if (!names.insert(s.name).second)
            throw ParseError("duplicate scenario name \"" + s.name + "\"");
        (void)plan(s, s.seed.has_value() || seed_override.has_value());
        out.push_back(std::move(s));
    }
    return out;
}

ScenarioResult run_scenario(const Scenario& s, const RunOptions& opt)
{
    ScenarioResult out;
    out.name = s.name;
    out.kind = s.kind;
    out.strict = s.strict || opt.strict;
    const std::uint64_t seed = opt.seed ? *opt.seed : s.seed.value_or(0);
    Context ctx{s, opt, seed, out};
    try
    {
        for (auto& task : plan(s, s.seed.has_value() || opt.seed.has_value()))
            task(ctx);
    }
    catch (const CapacityError& e)
    {
        out.capacity_exceeded = true;
        Report r = make("scenario_error", "capacity");
        r.pass = false;
        r.verdict = Verdict::Inapplicable;
        r.warnings.emplace_back(e.what());
        out.checks.push_back(r);
    }
    catch (const std::exception& e)
    {
        Report r = make("scenario_error", "execution");
        r.pass = false;
        r.verdict = Verdict::TheoremViolation;
        r.warnings.emplace_back(e.what());
        out.checks.push_back(r);
    }
    return out;
}

bool fails_run(const Report& r, bool strict)
{
    return r.verdict == Verdict::TheoremViolation || (strict && r.verdict == Verdict::HypothesisViolation);
}

json to_json(const ScenarioResult& r)
{
    json checks = json::array();
    bool failed = false;
    for (const auto& c : r.checks)
    {
        checks.push_back(to_json(c));
        failed = failed || fails_run(c, r.strict);
    }
    json j = {{"scenario", r.name},
              {"kind", r.kind},
              {"strict", r.strict},
              {"status", r.capacity_exceeded ? "capacity" : (failed ? "fail" : "pass")},
              {"checks", checks}};
    if (!r.results.empty())
        j["results"] = r.results;
    if (!r.tables.empty())
    {
        json names = json::array();
        for (const auto& [k, _] : r.tables)
            names.push_back("tables/" + k);
        j["tables"] = names;
    }
    return j;
}

std::vector<ScenarioResult> run_all(const std::vector<Scenario>& scenarios, const RunOptions& opt, std::size_t jobs)
{
    std::vector<ScenarioResult> out(scenarios.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++)
            out[i] = run_scenario(scenarios[i], opt);
    };
    const std::size_t n = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, scenarios.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

std::string render_report(const std::vector<ScenarioResult>& results)
{
    json reports = json::array();
    for (const auto& r : results)
        reports.push_back(to_json(r));
    return json{{"reports", reports}}.dump(2) + "\n";
}

int exit_status(const std::vector<ScenarioResult>& results)
{
    bool failed = false;
    for (const auto& r : results)
    {
        if (r.capacity_exceeded)
            return 3;
        for (const auto& c : r.checks)
            failed = failed || fails_run(c, r.strict);
    }
    return failed ? 1 : 0;
}

// --- builtins -----------------------------------------------------------------

namespace
{

json pts1d(std::initializer_list<double> xs)
{
    json pieces = json::array();
    for (double x : xs)
        pieces.push_back(json::array({json::array({x})}));
    return {{"dim", 1}, {"pieces", pieces}};
}

json interval(double lo, double hi)
{
    return {{"dim", 1}, {"pieces", json::array({json::array({json::array({lo}), json::array({hi})})})}};
}

json abs_at(double t, double sign = 1)
{
    const json a = {{"op", "abs"}, {"a", {1.0}}, {"b", -t}};
    return sign > 0 ? a : json{{"op", "neg"}, {"arg", a}};
}

Scenario scenario(std::string name, std::string kind, std::string description, json inputs)
{
    Scenario s;
    s.name = std::move(name);
    s.kind = std::move(kind);
    s.description = std::move(description);
    s.inputs = std::move(inputs);
    return s;
}

Scenario dp_scenario(std::string name, std::string kind, std::string description, const DPModel& m, json checks)
{
    return scenario(std::move(name), std::move(kind), std::move(description),
                    {{"model", io::to_json(m)}, {"value_tol", 1e-12}, {"checks", std::move(checks)}});
}

std::vector<Scenario> make_builtins()
{
    std::vector<Scenario> b;
    b.push_back(scenario("neg-abs", "leibniz",
                         "-|x| at 0: limiting subdifferential {-1,1}, Clarke gradient [-1,1] as its convex hull",
                         {{"mode", "subdiff"},
                          {"f", abs_at(0, -1)},
                          {"x", {0.0}},
                          {"expect_limiting", pts1d({-1, 1})},
                          {"expect_clarke", interval(-1, 1)}}));
    b.push_back(scenario("abs-regular", "leibniz", "|x| at 0: regular, limiting subdifferential equals [-1,1]",
                         {{"mode", "subdiff"},
                          {"f", abs_at(0)},
                          {"x", {0.0}},
                          {"expect_limiting", interval(-1, 1)},
                          {"expect_clarke", interval(-1, 1)}}));

    Scenario geo = scenario("geometry-support", "geometry",
                            "support-function calculus of finite unions of polytopes on seeded random sets",
                            {{"sets", {pts1d({-1, 1}), interval(0, 2)}},
                             {"random", {{"count", 100}, {"max_dim", 3}, {"max_vertices", 4}}}});
    geo.seed = 7;
    b.push_back(geo);

    Scenario sup = scenario("supremum-representation", "integral",
                            "supremum representation: support of the selector integral is the integral of supports",
                            {{"map", {pts1d({-1, 1}), pts1d({0, 2})}},
                             {"measure", {{"weights", {0.5, 0.5}}}},
                             {"random", {{"count", 200}, {"max_atoms", 3}, {"max_vertices", 4}, {"max_dim", 2}}}});
    sup.seed = 2024;
    b.push_back(sup);

    Scenario ly = scenario("lyapunov-01", "lyapunov",
                           "convexification under refinement: Gamma = {0,1} on N uniform atoms, gap 1/(2N)",
                           {{"family", "zero-one"}, {"expected_gap", "half_over_n"}});
    ly.refinements = {1, 2, 4, 8, 16, 32, 64};
    b.push_back(ly);
    Scenario circ = scenario("lyapunov-circle", "lyapunov",
                             "convexification under refinement for antipodal points on the circle",
                             {{"family", "antipodal-circle"}});
    circ.refinements = {1, 2, 4, 8, 16};
    b.push_back(circ);

    b.push_back(scenario("clarke-leibniz-regular", "leibniz",
                         "Clarke Leibniz rule, equality case: regular atoms |x - t|",
                         {{"mode", "clarke"},
                          {"integrand", {abs_at(0.25), abs_at(0.75)}},
                          {"measure", {{"uniform", {{"n", 2}, {"a", 0}, {"b", 1}}}}},
                          {"x", {0.5}}}));
    b.push_back(scenario("clarke-leibniz-nonregular", "leibniz",
                         "Clarke Leibniz rule with a nonregular atom -|x - t| at the base point: strictness witness",
                         {{"mode", "clarke"},
                          {"integrand", {abs_at(0.25, -1), abs_at(0.75, -1)}},
                          {"measure", {{"uniform", {{"n", 2}, {"a", 0}, {"b", 1}}}}},
                          {"x", {0.75}},
                          {"witness_gap_factor", 0.1},
                          {"witness_atom", 1}}));

    json smooth = json::array();
    for (double t : {0.125, 0.375, 0.625, 0.875})
        smooth.push_back({{"op", "quad"}, {"q", {{2.0}}}, {"a", {-2 * t}}, {"b", t * t}});
    b.push_back(scenario("strict-leibniz", "leibniz",
                         "strict Leibniz rule: gradient of the integral of smooth atoms (x - t)^2",
                         {{"mode", "strict"},
                          {"integrand", smooth},
                          {"measure", {{"uniform", {{"n", 4}, {"a", 0}, {"b", 1}}}}},
                          {"x", {0.3}}}));
    Scenario lim = scenario("limiting-leibniz", "leibniz",
                            "limiting Leibniz rule for -|x - t| under refinement, with the unconvexified bound",
                            {{"mode", "limiting"}, {"family", "neg-abs-shift"}, {"x", {0.5}}});
    lim.refinements = {2, 4, 8};
    b.push_back(lim);

    Scenario bell = dp_scenario("bellman", "dp", "Bellman fixed point: u = 1 + y, beta = 0.5, v = 2, invariants",
                                desk::unit_cost(),
                                {{{"type", "constant_value"}, {"value", 2.0}},
                                 {{"type", "invariants"}, {"pairs", 100}},
                                 {{"type", "finite_horizon"}, {"horizon", 8}},
                                 {{"type", "policy"}, {"expect", {{{"x", 0}, {"y", 0.0}}, {{"x", 1}, {"y", 0.0}}}}}});
    bell.seed = 11;
    b.push_back(bell);
    b.push_back(dp_scenario("policy-tie", "dp", "policy ties: lexicographic selector, strict derivative not applicable",
                            desk::tie(),
                            {{{"type", "policy"}, {"expect", {{{"x", 0}, {"y", -1.0}}}}},
                             {{"type", "strict_derivative"}, {"x", 0}, {"expect_outcome", "inapplicable"}}}));

    b.push_back(dp_scenario("envelope-quadratic", "dp",
                            "envelope theorem on u = (x - 0.6)^2 + y^2: dv = 2(x - 0.6), finite differences",
                            desk::quadratic(),
                            {{{"type", "policy"}, {"expect", {{{"x_at", 0.3}, {"y", 0.2}}}}},
                             {{"type", "viability"}, {"x_at", 0.3}},
                             {{"type", "envelope"}, {"x_at", 0.3}},
                             {{"type", "strict_derivative"}, {"x_at", 0.3}},
                             {{"type", "envelope"}, {"x_at", -0.7}},
                             {{"type", "finite_horizon"}, {"horizon", 8}}}));
    b.push_back(dp_scenario("envelope-nonviable", "dp",
                            "negative control for the envelope theorem: Gamma(x) = {y >= x}, u = y violates viability",
                            desk::ge_constraint(),
                            {{{"type", "envelope"}, {"x_at", 0.0}, {"expect_outcome", "fail"}},
                             {{"type", "viability"}, {"x_at", 0.0}, {"expect_outcome", "fail"}}}));

    b.push_back(dp_scenario("euler-quadratic", "euler",
                            "stochastic Euler inclusion residual at the optimal and a perturbed policy",
                            desk::quadratic(),
                            {{{"type", "euler"}, {"x_at", 0.3}, {"perturb", 1}},
                             {{"type", "limiting_euler"}, {"x_at", 0.3}}}));
    b.push_back(dp_scenario("euler-two-shock", "euler", "stochastic Euler inclusion with a two-state Markov kernel",
                            desk::two_shock(),
                            {{{"type", "policy"}, {"expect", {{{"x", 3}, {"shock", 0}, {"y", 0.15}}, {{"x", 3}, {"shock", 1}, {"y", 0.25}}}}},
                             {{"type", "euler"}, {"x_at", -0.4}, {"perturb", 1}},
                             {{"type", "finite_horizon"}, {"horizon", 8}}}));
    b.push_back(dp_scenario("euler-stay-put", "euler", "stochastic Euler inclusion for u = (y - x)^2 + c_w",
                            desk::stay_put(),
                            {{{"type", "euler"}, {"x_at", 0.2}, {"perturb", 1}},
                             {{"type", "finite_horizon"}, {"horizon", 8}}}));
    b.push_back(dp_scenario("euler-boundary", "euler",
                            "Euler inclusion at a boundary minimizer: the normal cone absorbs the gradient",
                            desk::boundary(),
                            {{{"type", "euler"}, {"x", 4}, {"cone_radius", 3.0}},
                             {{"type", "finite_horizon"}, {"horizon", 8}}}));
    b.push_back(dp_scenario("euler-nonsmooth", "euler",
                            "limiting Euler relations on u = -|x| + 10y^2: unconvexified residual dominates",
                            desk::nonsmooth(),
                            {{{"type", "limiting_euler"}, {"x_at", 0.5}},
                             {{"type", "euler"}, {"x_at", 0.5}},
                             {{"type", "finite_horizon"}, {"horizon", 8}}}));

    b.push_back(dp_scenario("nlp-multipliers", "nlp",
                            "value-function subgradients via Lagrange multipliers on Gamma(x) = {y >= x}, u = y",
                            desk::ge_constraint(),
                            {{{"type", "mfcq"}, {"x_at", 0.3}, {"expect_outcome", "pass"}},
                             {{"type", "multipliers"}, {"x_at", 0.3}, {"expect", {{1.0}}}},
                             {{"type", "nlp_subdiff"}, {"x_at", 0.3}}}));
    b.push_back(dp_scenario("nlp-twin", "nlp", "duplicated active inequality: a segment of multipliers, same subgradient",
                            desk::twin_constraint(),
                            {{{"type", "multipliers"}, {"x_at", 0.3}, {"expect", {{1.0, 0.0}, {0.0, 1.0}}}},
                             {{"type", "nlp_subdiff"}, {"x_at", 0.3}}}));
    b.push_back(dp_scenario("mfcq-rank-deficient", "nlp",
                            "negative control: duplicated equality constraints violate the constraint qualification",
                            desk::rank_deficient(),
                            {{{"type", "mfcq"}, {"x_at", 0.3}, {"expect_outcome", "fail"}}}));

    std::sort(b.begin(), b.end(), [](const Scenario& l, const Scenario& r) { return l.name < r.name; });
    return b;
}

} // namespace

const std::vector<Scenario>& builtin_scenarios()
{
    static const std::vector<Scenario> all = make_builtins();
    return all;
}

std::optional<Scenario> find_builtin(const std::string& name)
{
    for (const auto& s : builtin_scenarios())
        if (s.name == name)
            return s;
    return std::nullopt;
}

} // namespace leibniz
