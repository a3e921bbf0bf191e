#pragma once

#include <algorithm>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "covering/decision.hpp"
#include "covering/decomposition.hpp"
#include "covering/simulation.hpp"

// JSON and plain-text renderings of plans, decisions and simulation reports.
namespace covering {

using Json = nlohmann::ordered_json;

inline Json to_json(const HypothesisSet& s) { return Json(s.ids()); }

inline Json to_json(const DecompositionPlan& plan) {
    Json leaves = Json::array();
    for (const auto& l : plan.leaves) leaves.push_back(to_json(l));
    Json steps = Json::array();
    for (const auto& [family, step] : plan.steps) {
        Json children = Json::array();
        for (const auto& c : step.children) children.push_back(to_json(c));
        steps.push_back({{"family", to_json(family)},
                         {"I", to_json(step.dominated)},
                         {"J", to_json(step.dominating)},
                         {"children", std::move(children)}});
    }
    return {{"leaves", std::move(leaves)}, {"steps", std::move(steps)}};
}

inline Json to_json(const DecisionResult& r) {
    Json psi = Json::array();
    for (bool b : r.psi) psi.push_back(b);
    Json explanations = Json::array();
    for (const auto& e : r.explanations) {
        Json leaves = Json::array();
        for (const auto& v : e.leaves) leaves.push_back({{"leaf", to_json(v.leaf)}, {"rejected", v.rejected}});
        Json gate = nullptr;
        if (e.gated) gate = {{"satisfied_by", e.satisfied_by ? Json(*e.satisfied_by) : Json(nullptr)}};
        explanations.push_back({{"id", e.id}, {"leaves", std::move(leaves)}, {"gate", std::move(gate)}});
    }
    return {{"alpha", r.alpha},
            {"local_test", r.local_test.to_string()},
            {"psi", std::move(psi)},
            {"explanations", std::move(explanations)}};
}

inline Json to_json(const AdjustedPValues& a) { return {{"adjusted", a.adj}, {"tolerance", a.tolerance}}; }

inline Json to_json(const FWERReport& r) {
    Json truth = Json::array();
    for (bool t : r.truth) truth.push_back(t);
    return {{"fwer_hat", r.fwer_hat},
            {"se", r.se},
            {"bound", r.bound()},
            {"within_bound", r.within_bound()},
            {"per_hypothesis_rejection_rate", r.per_hypothesis_rejection_rate},
            {"truth", std::move(truth)},
            {"reps", r.reps},
            {"seed", r.seed},
            {"alpha", r.alpha}};
}

inline Json to_json(const SubsetReport& r) {
    Json subsets = Json::array();
    for (const auto& s : r.subsets)
        subsets.push_back({{"nulls", to_json(s.nulls)},
                           {"estimate", s.estimate},
                           {"se", s.se},
                           {"bound", s.bound},
                           {"pass", s.pass}});
    return {{"alpha", r.alpha},
            {"reps", r.reps},
            {"seed", r.seed},
            {"delta_false", r.delta_false},
            {"all_pass", r.all_pass()},
            {"subsets", std::move(subsets)}};
}

inline Json to_json(const PowerReport& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"id", row.id},
                        {"null", row.null_true},
                        {"covering", row.covering_rate},
                        {"closure", row.closure_rate}});
    return {{"alpha", r.alpha},
            {"local_test", r.local_test},
            {"reps", r.reps},
            {"seed", r.seed},
            {"covering_fwer", r.covering_fwer},
            {"covering_se", r.covering_se},
            {"closure_fwer", r.closure_fwer},
            {"closure_se", r.closure_se},
            {"rows", std::move(rows)}};
}

namespace detail {

inline std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

}  // namespace detail

inline std::string to_text(const DecompositionPlan& plan) {
    std::string out = "steps:\n";
    if (plan.steps.empty()) out += "  (none)\n";
    for (const auto& [family, step] : plan.steps) {
        out += "  " + family.to_string() + "  I=" + step.dominated.to_string() + " J=" + step.dominating.to_string() +
               " ->";
        for (const auto& c : step.children) out += " " + c.to_string();
        out += "\n";
    }
    out += "leaves (" + std::to_string(plan.leaves.size()) + "):\n";
    for (const auto& l : plan.leaves) out += "  " + l.to_string() + "\n";
    return out;
}

inline std::string to_text(const DecisionResult& r, const FamilySpec& spec) {
    std::string out = "alpha " + detail::format_double(r.alpha) + ", local test " + r.local_test.to_string() + "\n";
    std::size_t width = 0;
    for (HypothesisId i = 1; i <= spec.n; ++i) width = std::max(width, spec.display_name(i).size());
    for (const auto& e : r.explanations) {
        out += detail::pad(spec.display_name(e.id), width + 2) + (r.rejected(e.id) ? "REJECT" : "accept");
        out += "  leaves:";
        for (const auto& v : e.leaves) out += " " + v.leaf.to_string() + (v.rejected ? "+" : "-");
        if (e.gated)
            out += e.satisfied_by ? "  gate: satisfied by " + std::to_string(*e.satisfied_by) : "  gate: closed";
        out += "\n";
    }
    return out;
}

inline std::string to_text(const AdjustedPValues& a, const PValueVector& p, const FamilySpec& spec) {
    std::size_t width = 10;
    for (HypothesisId i = 1; i <= spec.n; ++i) width = std::max(width, spec.display_name(i).size());
    std::string out = detail::pad("hypothesis", width + 2) + detail::pad("raw", 12) + "adjusted\n";
    for (HypothesisId i = 1; i <= spec.n; ++i)
        out += detail::pad(spec.display_name(i), width + 2) + detail::pad(detail::fixed(p[i], 6), 12) +
               detail::fixed(a.adj[static_cast<std::size_t>(i - 1)], 6) + "\n";
    out += "tolerance " + detail::format_double(a.tolerance) + "\n";
    return out;
}

inline std::string to_text(const FWERReport& r) {
    std::string out = "fwer_hat " + detail::fixed(r.fwer_hat, 5) + "  se " + detail::fixed(r.se, 5) + "  bound " +
                      detail::fixed(r.bound(), 5) + (r.within_bound() ? "  ok" : "  EXCEEDED") + "\n";
    out += "reps " + std::to_string(r.reps) + "  seed " + std::to_string(r.seed) + "  alpha " +
           detail::format_double(r.alpha) + "\n";
    out += detail::pad("hypothesis", 12) + detail::pad("null", 6) + "rejection rate\n";
    for (std::size_t i = 0; i < r.per_hypothesis_rejection_rate.size(); ++i)
        out += detail::pad("H" + std::to_string(i + 1), 12) + detail::pad(r.truth[i] ? "yes" : "no", 6) +
               detail::fixed(r.per_hypothesis_rejection_rate[i], 5) + "\n";
    return out;
}

inline std::string to_text(const SubsetReport& r) {
    std::string out = "reps " + std::to_string(r.reps) + "  seed " + std::to_string(r.seed) + "  alpha " +
                      detail::format_double(r.alpha) + "  delta_false " + detail::format_double(r.delta_false) + "\n";
    out += detail::pad("true nulls", 22) + detail::pad("estimate", 10) + detail::pad("bound", 10) + "status\n";
    for (const auto& s : r.subsets)
        out += detail::pad(s.nulls.to_string(), 22) + detail::pad(detail::fixed(s.estimate, 5), 10) +
               detail::pad(detail::fixed(s.bound, 5), 10) + (s.pass ? "pass" : "FAIL") + "\n";
    out += r.all_pass() ? "all subsets within bound\n" : "some subsets exceed bound\n";
    return out;
}

inline std::string to_text(const PowerReport& r) {
    std::string out = "reps " + std::to_string(r.reps) + "  seed " + std::to_string(r.seed) + "  alpha " +
                      detail::format_double(r.alpha) + "  local " + r.local_test + "\n";
    out += detail::pad("hypothesis", 12) + detail::pad("null", 6) + detail::pad("covering", 10) + "closure\n";
    for (const auto& row : r.rows)
        out += detail::pad("H" + std::to_string(row.id), 12) + detail::pad(row.null_true ? "yes" : "no", 6) +
               detail::pad(detail::fixed(row.covering_rate, 5), 10) + detail::fixed(row.closure_rate, 5) + "\n";
    out += detail::pad("FWER", 18) + detail::pad(detail::fixed(r.covering_fwer, 5), 10) +
           detail::fixed(r.closure_fwer, 5) + "\n";
    return out;
}

}  // namespace covering
