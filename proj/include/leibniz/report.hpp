#pragma once

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace leibniz
{

enum class Verdict
{
    Pass,
    TheoremViolation,
    HypothesisViolation,
    Inapplicable
};

const char* to_string(Verdict v);

/// Outcome of one verification check. `hypotheses` records which
/// assumptions of the underlying result were verified on the data; a failure
/// with a false hypothesis is classified as expected.
struct Report
{
    std::string check;
    std::string paper_ref;
    bool pass = true;
    double max_residual = 0;
    std::vector<double> per_direction;
    std::vector<std::string> warnings;
    std::map<std::string, bool> hypotheses;
    Verdict verdict = Verdict::Pass;
    nlohmann::json extras = nlohmann::json::object();

    /// Sets `verdict` from `pass` and `hypotheses`.
    void classify();
    [[nodiscard]] bool all_hypotheses() const;
};

nlohmann::json to_json(const Report& r);

} // namespace leibniz
