#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "covering/family.hpp"
#include "covering/local_tests.hpp"

namespace covering::testing {

// Parallel gatekeeper: H3 gated by {H1, H2}.
inline FamilySpec example1() { return FamilySpec(3, {{3, {1, 2}}}); }

// Two serial chains 1 -> 3 -> 5 and 2 -> 4 -> 6.
inline FamilySpec example2() { return FamilySpec(6, {{3, {1}}, {5, {3}}, {4, {2}}, {6, {4}}}); }

inline FamilySpec gate_free(int n) { return FamilySpec(n); }

// Random acyclic spec: gates only point to smaller ids, so any draw is a DAG.
inline FamilySpec random_dag(std::mt19937_64& gen, int n, double edge_prob = 0.35) {
    FamilySpec spec(n);
    std::bernoulli_distribution edge(edge_prob);
    for (HypothesisId i = 2; i <= n; ++i) {
        std::vector<HypothesisId> g;
        for (HypothesisId j = 1; j < i; ++j)
            if (edge(gen)) g.push_back(j);
        spec.gates[static_cast<std::size_t>(i - 1)] = HypothesisSet(std::move(g));
    }
    return spec;
}

// Same DAG under a random relabeling of the ids.
inline FamilySpec relabel(const FamilySpec& spec, const std::vector<HypothesisId>& perm) {
    FamilySpec out(spec.n);
    for (HypothesisId i = 1; i <= spec.n; ++i) {
        std::vector<HypothesisId> g;
        for (HypothesisId h : spec.gates_of(i)) g.push_back(perm[static_cast<std::size_t>(h - 1)]);
        out.gates[static_cast<std::size_t>(perm[static_cast<std::size_t>(i - 1)] - 1)] = HypothesisSet(std::move(g));
    }
    return out;
}

// p-values mixing uniform draws with small values and exact ties, so the
// interesting threshold region near alpha/m gets exercised.
inline PValueVector random_pvalues(std::mt19937_64& gen, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> mode(0, 3);
    std::vector<double> p(static_cast<std::size_t>(n));
    for (auto& v : p) {
        switch (mode(gen)) {
            case 0: v = u(gen); break;
            case 1: v = 0.06 * u(gen); break;
            case 2: v = 0.01 * std::floor(u(gen) * 8.0); break;
            default: v = 0.02 * u(gen); break;
        }
    }
    return PValueVector(std::move(p));
}

inline std::vector<LocalTestSpec> all_local_tests(int n) {
    std::vector<HypothesisId> order;
    for (HypothesisId i = n; i >= 1; --i) order.push_back(i);
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += (w[static_cast<std::size_t>(i)] = 1.0 + i);
    for (auto& x : w) x /= total;
    return {LocalTestSpec::bonferroni(), LocalTestSpec::holm(), LocalTestSpec::hochberg(true),
            LocalTestSpec::fixed_sequence(order), LocalTestSpec::weighted_bonferroni(w)};
}

}  // namespace covering::testing
