#pragma once

#include "leibniz/dp.hpp"
#include "leibniz/measure.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace leibniz::io
{

using nlohmann::json;

/// Malformed or invalid interchange document.
struct ParseError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// [x1, ..., xn]
Vector vector_from_json(const json& j, const std::string& where);
json to_json(const Vector& v);
/// [[row], ...]
Matrix matrix_from_json(const json& j, const std::string& where);
json to_json(const Matrix& m);

/// {"dim": n, "pieces": [[vertex, ...], ...]}
SetRep set_from_json(const json& j, const std::string& where);
json to_json(const SetRep& s);

/**
 * {"op": "affine", "a": [...], "b": c} | {"op": "quad", "q": [[...]], "a": [...], "b": c}
 * | {"op": "const", "dim": n, "b": c} | {"op": "abs", "a": [...], "b": c} (|a.x + b|)
 * | {"op": "sum" | "max" | "min", "args": [...]} | {"op": "neg", "arg": f}
 * | {"op": "scale", "c": c, "arg": f}
 */
FnExpr expr_from_json(const json& j, const std::string& where);
json to_json(const FnExpr& f);

/// {"weights": [...], "atoms": [[t], ...]} or {"uniform": {"n": N, "a": a, "b": b}}
MeasureSpace measure_from_json(const json& j, const std::string& where);
json to_json(const MeasureSpace& m);

/// {"rows": [[...], ...]}
StochasticKernel kernel_from_json(const json& j, const std::string& where);

/**
 * {"states": [[...], ...] | {"grid": {"lo", "hi", "step"}}, "kernel": {"rows": ...},
 *  "beta": b, "cost": [expr per shock], "constraints": {"kind": "all" | "finite" | "box" | "nlp", ...}}
 * Finite: "lists": per shock, null (every state) or one index list per state.
 * Box: "boxes": per shock {"lower", "upper", "lower_gain"?, "upper_gain"?}.
 * NLP: "blocks": per shock {"inequalities": [...], "equalities": [...]}.
 * The result is validated.
 */
DPModel model_from_json(const json& j, const std::string& where);
json to_json(const DPModel& m);

json to_json(const ValueTable& v);
json to_json(const PolicyTable& p);

} // namespace leibniz::io
