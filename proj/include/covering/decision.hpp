#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "covering/decomposition.hpp"
#include "covering/error.hpp"
#include "covering/family.hpp"
#include "covering/local_tests.hpp"

namespace covering {

struct LeafOutcome {
    HypothesisSet leaf;
    HypothesisSet rejected;
    std::vector<double> thresholds;  // aligned with leaf members
};

/// Local-test results on every leaf, with the level and procedure that produced them.
struct LeafEvaluation {
    double alpha = 0.0;
    LocalTestSpec local_test;
    std::map<HypothesisSet, LeafOutcome> outcomes;
};

struct LeafVerdict {
    HypothesisSet leaf;
    bool rejected;
};

struct Explanation {
    HypothesisId id;
    std::vector<LeafVerdict> leaves;
    bool gated = false;
    std::optional<HypothesisId> satisfied_by;  // smallest rejected gate member
};

struct DecisionResult {
    std::vector<bool> psi;  // index id-1
    std::vector<Explanation> explanations;
    double alpha = 0.0;
    LocalTestSpec local_test;

    bool rejected(HypothesisId id) const { return psi.at(static_cast<std::size_t>(id - 1)); }
};

struct AdjustedPValues {
    std::vector<double> adj;  // index id-1
    double tolerance = 0.0;
};

inline LeafEvaluation evaluate_leaves(const DecompositionPlan& plan, const LocalTestSpec& test,
                                      const PValueVector& p, double alpha) {
    if (p.size() != static_cast<std::size_t>(plan.n()))
        throw UsageError("expected " + std::to_string(plan.n()) + " p-values, got " + std::to_string(p.size()));
    LeafEvaluation eval{alpha, test, {}};
    for (const auto& leaf : plan.leaves) {
        auto r = run_local_test(test, leaf, p, alpha);
        eval.outcomes.emplace(leaf, LeafOutcome{leaf, std::move(r.rejected), std::move(r.thresholds)});
    }
    return eval;
}

namespace detail {

// psi_i = (i rejected in every leaf containing it) and (G_i empty or some gate
// member already has psi = true), evaluated gates-first.
template <typename RejectedInLeaf>
std::vector<bool> compose_psi(const FamilySpec& spec, const DecompositionPlan& plan,
                              const std::vector<HypothesisId>& topo, RejectedInLeaf&& rejected_in_leaf) {
    std::vector<bool> psi(static_cast<std::size_t>(spec.n), false);
    for (HypothesisId i : topo) {
        bool all_leaves = true;
        for (std::size_t leaf : plan.leaves_containing(i))
            if (!rejected_in_leaf(leaf, i)) {
                all_leaves = false;
                break;
            }
        if (!all_leaves) continue;
        const auto& gates = spec.gates_of(i);
        bool gate_open = gates.empty();
        for (HypothesisId g : gates)
            if (psi[static_cast<std::size_t>(g - 1)]) {
                gate_open = true;
                break;
            }
        psi[static_cast<std::size_t>(i - 1)] = gate_open;
    }
    return psi;
}

}  // namespace detail

/// Combines leaf outcomes into the composed decision: a hypothesis is
/// rejected when every leaf containing it rejects it and, if it is gated, at
/// least one of its gate members has been rejected.
inline DecisionResult combine(const FamilySpec& spec, const DecompositionPlan& plan, const LeafEvaluation& eval) {
    if (eval.outcomes.size() != plan.leaves.size())
        throw UsageError("leaf outcomes do not match the plan's leaves");
    std::vector<const LeafOutcome*> by_index;
    by_index.reserve(plan.leaves.size());
    for (const auto& leaf : plan.leaves) {
        auto it = eval.outcomes.find(leaf);
        if (it == eval.outcomes.end()) throw UsageError("no outcome for leaf " + leaf.to_string());
        by_index.push_back(&it->second);
    }
    DecisionResult result;
    result.alpha = eval.alpha;
    result.local_test = eval.local_test;
    result.psi = detail::compose_psi(spec, plan, topological_order(spec), [&](std::size_t leaf, HypothesisId i) {
        return by_index[leaf]->rejected.contains(i);
    });
    for (HypothesisId i = 1; i <= spec.n; ++i) {
        Explanation e{i, {}, spec.gated(i), std::nullopt};
        for (std::size_t leaf : plan.leaves_containing(i))
            e.leaves.push_back({plan.leaves[leaf], by_index[leaf]->rejected.contains(i)});
        for (HypothesisId g : spec.gates_of(i))
            if (result.psi[static_cast<std::size_t>(g - 1)]) {
                e.satisfied_by = g;
                break;
            }
        result.explanations.push_back(std::move(e));
    }
    return result;
}

/// A family and local test bound to their decomposition, so repeated
/// decisions (simulation, bisection) reuse the plan.
class CoveringProcedure {
public:
    CoveringProcedure(FamilySpec spec, LocalTestSpec test)
        : spec_(std::move(spec)), test_(std::move(test)) {
        auto violations = validate(spec_);
        if (!violations.empty()) throw UsageError("invalid family: " + violations.front().rule);
        plan_ = decompose(spec_);
        topo_ = topological_order(spec_);
    }

    const FamilySpec& spec() const noexcept { return spec_; }
    const LocalTestSpec& local_test() const noexcept { return test_; }
    const DecompositionPlan& plan() const noexcept { return plan_; }

    DecisionResult decide(const PValueVector& p, double alpha) const {
        return combine(spec_, plan_, evaluate_leaves(plan_, test_, p, alpha));
    }

    /// Decision vector only; same rule as decide() without the explanations.
    std::vector<bool> psi(const PValueVector& p, double alpha) const {
        if (p.size() != static_cast<std::size_t>(spec_.n))
            throw UsageError("expected " + std::to_string(spec_.n) + " p-values, got " + std::to_string(p.size()));
        std::vector<HypothesisSet> rejected;
        rejected.reserve(plan_.leaves.size());
        for (const auto& leaf : plan_.leaves) rejected.push_back(run_local_test(test_, leaf, p, alpha).rejected);
        return detail::compose_psi(spec_, plan_, topo_, [&](std::size_t leaf, HypothesisId i) {
            return rejected[leaf].contains(i);
        });
    }

    /// Smallest level in (0,1] at which hypothesis `id` is rejected, by
    /// bisection to absolute tolerance `tol` (at most 60 halvings). The upper
    /// bracket is reported, so adj <= alpha implies rejection at alpha.
    double adjusted_pvalue(const PValueVector& p, HypothesisId id, double tol) const {
        if (!(tol > 0.0)) throw UsageError("tolerance must be positive");
        const auto k = static_cast<std::size_t>(id - 1);
        auto rejects = [&](double a) -> bool { return psi(p, a)[k]; };
        double hi = std::nextafter(1.0, 0.0);
        if (!rejects(hi)) return 1.0;
        double lo = 0.0;
        for (int it = 0; it < 60 && hi - lo > tol; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (rejects(mid))
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }

    AdjustedPValues adjusted_pvalues(const PValueVector& p, double tol) const {
        AdjustedPValues out{{}, tol};
        for (HypothesisId i = 1; i <= spec_.n; ++i) out.adj.push_back(adjusted_pvalue(p, i, tol));
        return out;
    }

private:
    FamilySpec spec_;
    LocalTestSpec test_;
    DecompositionPlan plan_;
    std::vector<HypothesisId> topo_;
};

inline DecisionResult test_family(const FamilySpec& spec, const PValueVector& p, double alpha,
                                  const LocalTestSpec& test) {
    return CoveringProcedure(spec, test).decide(p, alpha);
}

inline AdjustedPValues adjusted_pvalues(const FamilySpec& spec, const PValueVector& p, const LocalTestSpec& test,
                                        double tol) {
    return CoveringProcedure(spec, test).adjusted_pvalues(p, tol);
}

}  // namespace covering
