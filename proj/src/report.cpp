#include "leibniz/report.hpp"

#include <algorithm>

namespace leibniz
{

const char* to_string(Verdict v)
{
    switch (v)
    {
    case Verdict::Pass:
        return "pass";
    case Verdict::TheoremViolation:
        return "theorem-violation";
    case Verdict::HypothesisViolation:
        return "hypothesis-violation";
    case Verdict::Inapplicable:
        return "inapplicable";
    }
    return "unknown";
}

bool Report::all_hypotheses() const
{
    return std::all_of(hypotheses.begin(), hypotheses.end(), [](const auto& kv) { return kv.second; });
}

void Report::classify()
{
    if (verdict == Verdict::Inapplicable)
        return;
    if (pass)
        verdict = Verdict::Pass;
    else
        verdict = all_hypotheses() ? Verdict::TheoremViolation : Verdict::HypothesisViolation;
}

nlohmann::json to_json(const Report& r)
{
    nlohmann::json j;
    j["name"] = r.check;
    j["paper_ref"] = r.paper_ref;
    j["pass"] = r.pass;
    j["residual"] = r.max_residual;
    j["per_direction"] = r.per_direction;
    j["warnings"] = r.warnings;
    j["hypotheses"] = r.hypotheses;
    j["verdict"] = to_string(r.verdict);
    if (!r.extras.empty())
        j["details"] = r.extras;
    return j;
}

} // namespace leibniz
