#include "leibniz/io.hpp"

#include "leibniz/desk.hpp"

namespace leibniz::io
{

namespace
{

[[noreturn]] void fail(const std::string& where, const std::string& what)
{
    throw ParseError(where + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& where)
{
    if (!j.is_object())
        fail(where, "expected an object");
    const auto it = j.find(key);
    if (it == j.end())
        fail(where, std::string("missing field \"") + key + "\"");
    return *it;
}

Scalar number(const json& j, const std::string& where)
{
    if (!j.is_number())
        fail(where, "expected a number");
    return j.get<Scalar>();
}

Scalar number_or(const json& j, const char* key, Scalar fallback, const std::string& where)
{
    const auto it = j.find(key);
    return it == j.end() ? fallback : number(*it, where + "." + key);
}

std::size_t index(const json& j, const std::string& where)
{
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        fail(where, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

std::vector<FnExpr> expr_list(const json& j, const std::string& where)
{
    if (!j.is_array() || j.empty())
        fail(where, "expected a nonempty array of expressions");
    std::vector<FnExpr> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(expr_from_json(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

} // namespace

Vector vector_from_json(const json& j, const std::string& where)
{
    if (!j.is_array() || j.empty())
        fail(where, "expected a nonempty array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = number(j[i], where);
    return v;
}

json to_json(const Vector& v)
{
    return json(std::vector<Scalar>(v.data(), v.data() + v.size()));
}

Matrix matrix_from_json(const json& j, const std::string& where)
{
    if (!j.is_array() || j.empty())
        fail(where, "expected a nonempty array of rows");
    const Vector first = vector_from_json(j[0], where + "[0]");
    Matrix m(static_cast<Eigen::Index>(j.size()), first.size());
    for (std::size_t r = 0; r < j.size(); ++r)
    {
        const Vector row = vector_from_json(j[r], where + "[" + std::to_string(r) + "]");
        if (row.size() != first.size())
            fail(where, "ragged matrix");
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

json to_json(const Matrix& m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        rows.push_back(to_json(Vector(m.row(r).transpose())));
    return rows;
}

SetRep set_from_json(const json& j, const std::string& where)
{
    const Eigen::Index dim = static_cast<Eigen::Index>(index(field(j, "dim", where), where + ".dim"));
    const json& pieces = field(j, "pieces", where);
    if (!pieces.is_array() || pieces.empty())
        fail(where, "expected a nonempty list of pieces");
    std::vector<Matrix> out;
    for (std::size_t p = 0; p < pieces.size(); ++p)
    {
        const std::string w = where + ".pieces[" + std::to_string(p) + "]";
        const Matrix verts = matrix_from_json(pieces[p], w);
        if (verts.cols() != dim)
            fail(w, "vertex dimension differs from dim");
        out.push_back(verts.transpose());
    }
    try
    {
        return SetRep(dim, std::move(out));
    }
    catch (const std::exception& e)
    {
        fail(where, e.what());
    }
}

json to_json(const SetRep& s)
{
    json pieces = json::array();
    for (const auto& p : s.pieces())
        pieces.push_back(to_json(Matrix(p.transpose())));
    return {{"dim", s.dim()}, {"pieces", pieces}};
}

FnExpr expr_from_json(const json& j, const std::string& where)
{
    const json& opj = field(j, "op", where);
    if (!opj.is_string())
        fail(where, "op must be a string");
    const std::string op = opj.get<std::string>();
    try
    {
        if (op == "affine")
            return FnExpr::affine(vector_from_json(field(j, "a", where), where + ".a"), number_or(j, "b", 0, where));
        if (op == "quad")
            return FnExpr::quadratic(matrix_from_json(field(j, "q", where), where + ".q"),
                                     vector_from_json(field(j, "a", where), where + ".a"), number_or(j, "b", 0, where));
        if (op == "const")
            return FnExpr::constant(static_cast<Eigen::Index>(index(field(j, "dim", where), where + ".dim")),
                                    number_or(j, "b", 0, where));
        if (op == "abs")
        {
            const Vector a = vector_from_json(field(j, "a", where), where + ".a");
            const Scalar b = number_or(j, "b", 0, where);
            return FnExpr::max_of({FnExpr::affine(a, b), FnExpr::affine(-a, -b)});
        }
        if (op == "sum")
            return FnExpr::sum(expr_list(field(j, "args", where), where + ".args"));
        if (op == "max")
            return FnExpr::max_of(expr_list(field(j, "args", where), where + ".args"));
        if (op == "min")
            return FnExpr::min_of(expr_list(field(j, "args", where), where + ".args"));
        if (op == "neg")
            return FnExpr::neg(expr_from_json(field(j, "arg", where), where + ".arg"));
        if (op == "scale")
            return FnExpr::scale(number(field(j, "c", where), where + ".c"),
                                 expr_from_json(field(j, "arg", where), where + ".arg"));
    }
    catch (const ParseError&)
    {
        throw;
    }
    catch (const std::exception& e)
    {
        fail(where, e.what());
    }
    fail(where, "unknown op \"" + op + "\"");
}

json to_json(const FnExpr& f)
{
    const auto kids = [&f] {
        json a = json::array();
        for (const auto& c : f.children())
            a.push_back(to_json(c));
        return a;
    };
    switch (f.kind())
    {
    case FnExpr::Kind::Affine:
        return {{"op", "affine"}, {"a", to_json(f.a())}, {"b", f.b()}};
    case FnExpr::Kind::Quadratic:
        return {{"op", "quad"}, {"q", to_json(f.q())}, {"a", to_json(f.a())}, {"b", f.b()}};
    case FnExpr::Kind::Sum:
        return {{"op", "sum"}, {"args", kids()}};
    case FnExpr::Kind::Max:
        return {{"op", "max"}, {"args", kids()}};
    case FnExpr::Kind::Min:
        return {{"op", "min"}, {"args", kids()}};
    case FnExpr::Kind::Neg:
        return {{"op", "neg"}, {"arg", to_json(f.children().front())}};
    case FnExpr::Kind::Scale:
        return {{"op", "scale"}, {"c", f.coeff()}, {"arg", to_json(f.children().front())}};
    }
    return nullptr;
}

MeasureSpace measure_from_json(const json& j, const std::string& where)
{
    try
    {
        if (j.is_object() && j.contains("uniform"))
        {
            const json& u = j["uniform"];
            return uniform_discretization(index(field(u, "n", where + ".uniform"), where + ".uniform.n"),
                                          number(field(u, "a", where + ".uniform"), where + ".uniform.a"),
                                          number(field(u, "b", where + ".uniform"), where + ".uniform.b"));
        }
        const Vector w = vector_from_json(field(j, "weights", where), where + ".weights");
        std::vector<Atom> atoms;
        const auto it = j.find("atoms");
        if (it != j.end() && it->size() != static_cast<std::size_t>(w.size()))
            fail(where, "atoms and weights differ in length");
        for (Eigen::Index i = 0; i < w.size(); ++i)
        {
            Vector t = Vector::Constant(1, static_cast<Scalar>(i));
            if (it != j.end())
                t = vector_from_json((*it)[static_cast<std::size_t>(i)], where + ".atoms");
            atoms.push_back({t, w[i]});
        }
        return MeasureSpace(std::move(atoms));
    }
    catch (const ParseError&)
    {
        throw;
    }
    catch (const std::exception& e)
    {
        fail(where, e.what());
    }
}

json to_json(const MeasureSpace& m)
{
    json atoms = json::array();
    json weights = json::array();
    for (const auto& a : m.atoms())
    {
        atoms.push_back(to_json(a.param));
        weights.push_back(a.weight);
    }
    return {{"atoms", atoms}, {"weights", weights}};
}

StochasticKernel kernel_from_json(const json& j, const std::string& where)
{
    try
    {
        return StochasticKernel(matrix_from_json(field(j, "rows", where), where + ".rows"));
    }
    catch (const ParseError&)
    {
        throw;
    }
    catch (const std::exception& e)
    {
        fail(where, e.what());
    }
}

DPModel model_from_json(const json& j, const std::string& where)
{
    DPModel m;
    const json& st = field(j, "states", where);
    if (st.is_object())
    {
        const json& g = field(st, "grid", where + ".states");
        const std::string w = where + ".states.grid";
        const Scalar step = number(field(g, "step", w), w + ".step");
        if (!(step > 0))
            fail(w, "step must be positive");
        m.states = desk::grid1d(number(field(g, "lo", w), w + ".lo"), number(field(g, "hi", w), w + ".hi"), step);
    }
    else
    {
        if (!st.is_array() || st.empty())
            fail(where + ".states", "expected a nonempty list of states");
        for (std::size_t i = 0; i < st.size(); ++i)
            m.states.push_back(vector_from_json(st[i], where + ".states[" + std::to_string(i) + "]"));
    }
    m.kernel = j.contains("kernel") ? kernel_from_json(j["kernel"], where + ".kernel")
                                    : StochasticKernel(Matrix::Identity(1, 1));
    m.beta = number(field(j, "beta", where), where + ".beta");
    m.cost = expr_list(field(j, "cost", where), where + ".cost");

    const std::string cw = where + ".constraints";
    const json& c = field(j, "constraints", where);
    const json& kind = field(c, "kind", cw);
    if (!kind.is_string())
        fail(cw, "kind must be a string");
    const std::string k = kind.get<std::string>();
    const std::size_t shocks = m.kernel.states();
    if (k == "all")
        m.constraints = ConstraintMap::all_states(shocks);
    else if (k == "finite")
    {
        m.constraints = ConstraintMap::all_states(shocks);
        const json& lists = field(c, "lists", cw);
        if (!lists.is_array() || lists.size() != shocks)
            fail(cw, "need one list family per shock");
        for (std::size_t w = 0; w < shocks; ++w)
        {
            if (lists[w].is_null())
                continue;
            for (std::size_t x = 0; x < lists[w].size(); ++x)
            {
                std::vector<std::size_t> l;
                for (const auto& y : lists[w][x])
                    l.push_back(index(y, cw + ".lists"));
                m.constraints.finite[w].push_back(std::move(l));
            }
        }
    }
    else if (k == "box")
    {
        std::vector<BoxBounds> boxes;
        const json& bj = field(c, "boxes", cw);
        if (!bj.is_array())
            fail(cw, "boxes must be an array");
        for (std::size_t w = 0; w < bj.size(); ++w)
        {
            const std::string bw = cw + ".boxes[" + std::to_string(w) + "]";
            BoxBounds b{vector_from_json(field(bj[w], "lower", bw), bw + ".lower"),
                        vector_from_json(field(bj[w], "upper", bw), bw + ".upper"),
                        {},
                        {}};
            if (bj[w].contains("lower_gain"))
                b.lower_gain = matrix_from_json(bj[w]["lower_gain"], bw + ".lower_gain");
            if (bj[w].contains("upper_gain"))
                b.upper_gain = matrix_from_json(bj[w]["upper_gain"], bw + ".upper_gain");
            boxes.push_back(std::move(b));
        }
        m.constraints = ConstraintMap::box(std::move(boxes));
    }
    else if (k == "nlp")
    {
        std::vector<NlpConstraints> blocks;
        const json& bj = field(c, "blocks", cw);
        if (!bj.is_array())
            fail(cw, "blocks must be an array");
        for (std::size_t w = 0; w < bj.size(); ++w)
        {
            const std::string bw = cw + ".blocks[" + std::to_string(w) + "]";
            NlpConstraints block;
            for (const char* key : {"inequalities", "equalities"})
                if (bj[w].contains(key) && !bj[w][key].empty())
                {
                    auto fs = expr_list(bj[w][key], bw + "." + key);
                    (std::string(key) == "inequalities" ? block.inequalities : block.equalities) = std::move(fs);
                }
            blocks.push_back(std::move(block));
        }
        m.constraints = ConstraintMap::nonlinear(std::move(blocks));
    }
    else
        fail(cw, "unknown constraint kind \"" + k + "\"");

    try
    {
        m.validate();
    }
    catch (const std::exception& e)
    {
        fail(where, e.what());
    }
    return m;
}

json to_json(const DPModel& m)
{
    json states = json::array();
    for (const auto& s : m.states)
        states.push_back(to_json(s));
    json cost = json::array();
    for (const auto& u : m.cost)
        cost.push_back(to_json(u));
    json c;
    const ConstraintMap& g = m.constraints;
    switch (g.kind)
    {
    case ConstraintMap::Kind::Finite: {
        const bool all = std::all_of(g.finite.begin(), g.finite.end(), [](const auto& l) { return l.empty(); });
        if (all)
            c = {{"kind", "all"}};
        else
        {
            json lists = json::array();
            for (const auto& l : g.finite)
                lists.push_back(l.empty() ? json(nullptr) : json(l));
            c = {{"kind", "finite"}, {"lists", lists}};
        }
        break;
    }
    case ConstraintMap::Kind::Box: {
        json boxes = json::array();
        for (const auto& b : g.boxes)
        {
            json bj = {{"lower", to_json(b.lower)}, {"upper", to_json(b.upper)}};
            if (b.lower_gain.size() > 0)
                bj["lower_gain"] = to_json(b.lower_gain);
            if (b.upper_gain.size() > 0)
                bj["upper_gain"] = to_json(b.upper_gain);
            boxes.push_back(bj);
        }
        c = {{"kind", "box"}, {"boxes", boxes}};
        break;
    }
    case ConstraintMap::Kind::Nlp: {
        json blocks = json::array();
        for (const auto& b : g.nlp)
        {
            json ineq = json::array();
            json eq = json::array();
            for (const auto& f : b.inequalities)
                ineq.push_back(to_json(f));
            for (const auto& f : b.equalities)
                eq.push_back(to_json(f));
            blocks.push_back({{"inequalities", ineq}, {"equalities", eq}});
        }
        c = {{"kind", "nlp"}, {"blocks", blocks}};
        break;
    }
    }
    return {{"states", states},
            {"kernel", {{"rows", to_json(m.kernel.matrix())}}},
            {"beta", m.beta},
            {"cost", cost},
            {"constraints", c}};
}

json to_json(const ValueTable& v)
{
    return {{"values", to_json(v.values)},
            {"iterations", v.iterations},
            {"tolerance", v.tolerance},
            {"bellman_residual", v.bellman_residual},
            {"min_gap", v.min_gap < 0 ? json(nullptr) : json(v.min_gap)}};
}

json to_json(const PolicyTable& p)
{
    return {{"argmin", p.argmin}, {"selector", p.selector}};
}

} // namespace leibniz::io
