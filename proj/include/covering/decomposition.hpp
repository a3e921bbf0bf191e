#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "covering/error.hpp"
#include "covering/family.hpp"
#include "covering/hypothesis_set.hpp"

namespace covering {

/// One application of the covering split to `family`: the members in
/// `dominated` (I) have their rejection regions covered by those of
/// `dominating` (J), so the family splits into family\I and family\{j} for
/// every j in J.
struct CoveringStep {
    HypothesisSet family;
    HypothesisSet dominated;   // I
    HypothesisSet dominating;  // J
    std::vector<HypothesisSet> children;  // family\I, then family\{j} for ascending j

    friend bool operator==(const CoveringStep&, const CoveringStep&) = default;
};

struct DecompositionPlan {
    HypothesisSet root;
    std::map<HypothesisSet, CoveringStep> steps;  // memoized by family
    std::vector<HypothesisSet> leaves;            // lexicographic, duplicate-free
    std::vector<std::vector<std::size_t>> membership;  // id-1 -> indices into leaves

    int n() const { return root.empty() ? 0 : root.back(); }

    const std::vector<std::size_t>& leaves_containing(HypothesisId id) const {
        return membership.at(static_cast<std::size_t>(id - 1));
    }

    /// The step applied to the root family, if the root is not itself a leaf.
    const CoveringStep* root_step() const {
        auto it = steps.find(root);
        return it == steps.end() ? nullptr : &it->second;
    }

    friend bool operator==(const DecompositionPlan&, const DecompositionPlan&) = default;
};

/// I(F): members of F whose whole (nonempty) gate set lies inside F.
inline HypothesisSet dominated_within(const FamilySpec& spec, const HypothesisSet& family) {
    std::vector<HypothesisId> out;
    for (HypothesisId i : family) {
        const auto& g = spec.gates_of(i);
        if (!g.empty() && family.includes(g)) out.push_back(i);
    }
    return HypothesisSet(std::move(out));
}

/// Canonical covering step: I is everything dominated within the family, J is
/// every transitive gate ancestor of I that lies in family\I. Returns nullopt
/// when the family is a leaf.
inline std::optional<CoveringStep> covering_step(const FamilySpec& spec, const HypothesisSet& family) {
    if (family.empty()) throw UsageError("covering_step on an empty family");
    HypothesisSet dominated = dominated_within(spec, family);
    if (dominated.empty()) return std::nullopt;
    HypothesisSet dominating = gate_ancestors(spec, dominated).intersect(family.minus(dominated));
    if (dominating.empty())
        throw InternalError("covering step on " + family.to_string() + " found dominated members " +
                            dominated.to_string() + " without dominating ones");
    CoveringStep step{family, dominated, dominating, {}};
    step.children.reserve(dominating.size() + 1);
    step.children.push_back(family.minus(dominated));
    for (HypothesisId j : dominating) step.children.push_back(family.without(j));
    return step;
}

/// Recursively splits {1..n} until no family has an internally dominated
/// member. Families reached along several branches are split once.
inline DecompositionPlan decompose(const FamilySpec& spec) {
    DecompositionPlan plan;
    plan.root = spec.all();
    std::set<HypothesisSet> leaves;
    std::set<HypothesisSet> visited;
    std::vector<HypothesisSet> pending{plan.root};
    while (!pending.empty()) {
        HypothesisSet family = std::move(pending.back());
        pending.pop_back();
        if (!visited.insert(family).second) continue;
        auto step = covering_step(spec, family);
        if (!step) {
            leaves.insert(family);
            continue;
        }
        for (const auto& child : step->children)
            if (!visited.contains(child)) pending.push_back(child);
        plan.steps.emplace(family, std::move(*step));
    }
    plan.leaves.assign(leaves.begin(), leaves.end());
    plan.membership.assign(static_cast<std::size_t>(spec.n), {});
    for (std::size_t k = 0; k < plan.leaves.size(); ++k)
        for (HypothesisId i : plan.leaves[k]) plan.membership[static_cast<std::size_t>(i - 1)].push_back(k);
    return plan;
}

/// Symbolic check of the coverage condition behind a step: expanding any
/// member of I through its gates (repeatedly, while the expansion stays in I)
/// must only ever reach members of I or J.
inline bool verify_coverage(const FamilySpec& spec, const CoveringStep& step) {
    if (step.dominated.empty() || step.dominating.empty()) return false;
    if (!step.dominated.disjoint(step.dominating)) return false;
    const HypothesisSet allowed = step.dominated.unite(step.dominating);
    for (HypothesisId start : step.dominated) {
        std::set<HypothesisId> seen{start};
        std::vector<HypothesisId> stack{start};
        while (!stack.empty()) {
            HypothesisId i = stack.back();
            stack.pop_back();
            const auto& g = spec.gates_of(i);
            if (g.empty()) return false;  // an ungated member of I is covered by nothing
            for (HypothesisId h : g) {
                if (!allowed.contains(h)) return false;
                if (step.dominated.contains(h) && seen.insert(h).second) stack.push_back(h);
            }
        }
    }
    return true;
}

namespace detail {

inline std::string dot_node_name(const HypothesisSet& s) {
    std::string name = "f";
    for (HypothesisId i : s) name += "_" + std::to_string(i);
    return name;
}

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace detail

/// Graphviz rendering: the decomposition tree (leaves filled) and, in a
/// second cluster, the gate DAG.
inline std::string export_dot(const DecompositionPlan& plan, const FamilySpec& spec) {
    std::set<HypothesisSet> families{plan.root};
    for (const auto& [family, step] : plan.steps) {
        families.insert(family);
        for (const auto& c : step.children) families.insert(c);
    }
    const std::set<HypothesisSet> leaves(plan.leaves.begin(), plan.leaves.end());

    std::string out = "digraph covering {\n  compound=true;\n";
    out += "  subgraph cluster_decomposition {\n    label=\"decomposition\";\n";
    for (const auto& f : families) {
        out += "    " + detail::dot_node_name(f) + " [label=\"" + f.to_string() + "\"";
        out += leaves.contains(f) ? ", shape=box, style=\"rounded,filled\", fillcolor=\"#d9ead3\"" : ", shape=box";
        out += "];\n";
    }
    for (const auto& [family, step] : plan.steps) {
        for (const auto& c : step.children) {
            out += "    " + detail::dot_node_name(family) + " -> " + detail::dot_node_name(c) + ";\n";
        }
    }
    out += "  }\n  subgraph cluster_gates {\n    label=\"gates\";\n";
    for (HypothesisId i = 1; i <= spec.n; ++i)
        out += "    h" + std::to_string(i) + " [label=\"" + detail::dot_escape(spec.display_name(i)) +
               "\", shape=ellipse];\n";
    for (HypothesisId i = 1; i <= spec.n; ++i)
        for (HypothesisId g : spec.gates_of(i))
            out += "    h" + std::to_string(g) + " -> h" + std::to_string(i) + ";\n";
    out += "  }\n}\n";
    return out;
}

}  // namespace covering
