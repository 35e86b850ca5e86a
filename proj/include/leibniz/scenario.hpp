#pragma once

#include "leibniz/io.hpp"
#include "leibniz/report.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace leibniz
{

/**
 * One declarative experiment. `inputs` is kind-specific:
 *  geometry   {"sets": [set...]} and/or {"random": {"count", "max_dim", "max_vertices"}}
 *  integral   {"map": [set per atom], "measure": m} and/or {"random": {"count", "max_atoms", "max_vertices", "max_dim"}}
 *  lyapunov   {"family": "zero-one" | "antipodal-circle"} or {"set": set}; "expected_gap": "half_over_n"?
 *  leibniz    {"mode": "subdiff", "f", "x", "expect_limiting"?, "expect_clarke"?}
 *             {"mode": "clarke", "integrand": [expr...], "measure", "x", "witness_min_gap"?}
 *             {"mode": "strict", "integrand", "measure", "x"}
 *             {"mode": "limiting", "family": "abs-shift" | "neg-abs-shift", "x"} over the refinements
 *  dp / euler / nlp  {"model": model, "value_tol"?, "checks": [{"type": ...}, ...]}
 * The refinement list drives lyapunov and limiting Leibniz studies.
 */
struct Scenario
{
    std::string name;
    std::string kind;
    std::string description;
    nlohmann::json inputs = nlohmann::json::object();
    std::map<std::string, double> tolerances;
    std::optional<std::uint64_t> seed;
    std::vector<std::size_t> refinements;
    bool strict = false;
};

struct RunOptions
{
    std::optional<std::uint64_t> seed;
    double tol_scale = 1;
    bool strict = false;
};

struct ScenarioResult
{
    std::string name;
    std::string kind;
    std::vector<Report> checks;
    nlohmann::json results = nlohmann::json::object();
    /// File name (without directory) to CSV text.
    std::map<std::string, std::string> tables;
    bool strict = false;
    bool capacity_exceeded = false;
};

/// Parses and validates one entry; throws io::ParseError.
Scenario parse_scenario(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);

/// Accepts {"scenarios": [...]}, a bare array, or a single scenario object;
/// {"builtin": "name"} entries expand to the bundled scenario. Names must be
/// unique. `seed_override` counts as a seed for the sampling requirement.
std::vector<Scenario> load_scenarios(const nlohmann::json& doc, std::optional<std::uint64_t> seed_override = {});

/// Runs every check of one scenario. Capacity errors are recorded, other
/// errors become a failing "scenario_error" check.
ScenarioResult run_scenario(const Scenario& s, const RunOptions& opt);

/// True when the check fails the run: a theorem violation, or a hypothesis
/// violation under strict mode. Inapplicable checks are telemetry.
bool fails_run(const Report& r, bool strict);

nlohmann::json to_json(const ScenarioResult& r);

/// Runs the scenarios on up to `jobs` threads; results are sorted by name.
std::vector<ScenarioResult> run_all(const std::vector<Scenario>& scenarios, const RunOptions& opt, std::size_t jobs);

/// {"reports": [...]} with two-space indentation and a trailing newline.
std::string render_report(const std::vector<ScenarioResult>& results);

/// 3 on a capacity error, else 1 when some check fails the run, else 0.
int exit_status(const std::vector<ScenarioResult>& results);

/// The bundled catalogue, sorted by name.
const std::vector<Scenario>& builtin_scenarios();
std::optional<Scenario> find_builtin(const std::string& name);

} // namespace leibniz
