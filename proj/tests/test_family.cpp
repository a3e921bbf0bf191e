#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "covering/family.hpp"
#include "support/fixtures.hpp"

using namespace covering;
using covering::testing::example1;
using covering::testing::example2;

namespace {

ParseError::Kind parse_error_kind(const std::string& text) {
    try {
        parse_family_spec(text);
    } catch (const ParseError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no ParseError for:\n" << text;
    return ParseError::Kind::syntax;
}

// One-step gate expansion repeated until nothing changes.
HypothesisSet ancestors_fixed_point(const FamilySpec& spec, const HypothesisSet& seed) {
    std::set<HypothesisId> acc;
    for (HypothesisId s : seed)
        for (HypothesisId g : spec.gates_of(s)) acc.insert(g);
    for (bool changed = true; changed;) {
        changed = false;
        for (HypothesisId a : std::set<HypothesisId>(acc))
            for (HypothesisId g : spec.gates_of(a)) changed |= acc.insert(g).second;
    }
    return HypothesisSet(std::vector<HypothesisId>(acc.begin(), acc.end()));
}

}  // namespace

TEST(ParseFamilySpec, ParallelGatekeeper) {
    const auto spec = parse_family_spec("hypothesis 1\nhypothesis 2\nhypothesis 3 gates=[1,2]");
    EXPECT_EQ(spec.n, 3);
    EXPECT_EQ(spec.gates_of(3), (HypothesisSet{1, 2}));
    EXPECT_TRUE(spec.gates_of(1).empty());
    EXPECT_EQ(spec, example1());
}

TEST(ParseFamilySpec, Singleton) {
    const auto spec = parse_family_spec("hypothesis 1");
    EXPECT_EQ(spec.n, 1);
    EXPECT_TRUE(spec.gates_of(1).empty());
    EXPECT_FALSE(spec.alpha_default);
}

TEST(ParseFamilySpec, TwoCycleIsRejected) {
    EXPECT_EQ(parse_error_kind("hypothesis 1 gates=[2]\nhypothesis 2 gates=[1]"), ParseError::Kind::cycle);
}

TEST(ParseFamilySpec, LongerCycle) {
    EXPECT_EQ(parse_error_kind("hypothesis 1 gates=[3]\nhypothesis 2 gates=[1]\nhypothesis 3 gates=[2]\n"),
              ParseError::Kind::cycle);
}

TEST(ParseFamilySpec, LabelsCommentsAlphaAndWhitespace) {
    const auto spec = parse_family_spec(
        "# header comment\n"
        "alpha   =   0.025\n"
        "\n"
        "hypothesis 2   label = \"second # not a comment\"  # trailing\n"
        "hypothesis 1 label=\"first \\\"quoted\\\"\"\n"
        "hypothesis 3 gates = [ 1 , 2 ] label=\"third\"\r\n");
    EXPECT_EQ(spec.n, 3);
    ASSERT_TRUE(spec.alpha_default);
    EXPECT_DOUBLE_EQ(*spec.alpha_default, 0.025);
    EXPECT_EQ(spec.labels[1], "second # not a comment");
    EXPECT_EQ(spec.labels[0], "first \"quoted\"");
    EXPECT_EQ(spec.display_name(3), "third");
    EXPECT_EQ(spec.gates_of(3), (HypothesisSet{1, 2}));
}

TEST(ParseFamilySpec, DeclarationOrderDoesNotMatter) {
    const auto a = parse_family_spec("hypothesis 1\nhypothesis 2\nhypothesis 3 gates=[1,2]\n");
    const auto b = parse_family_spec("hypothesis 3 gates=[2,1]\nhypothesis 1\nhypothesis 2\n");
    EXPECT_EQ(a, b);
}

TEST(ParseFamilySpec, Errors) {
    using K = ParseError::Kind;
    EXPECT_EQ(parse_error_kind("hypothesis 1\nhypothesis 1"), K::duplicate_id);
    EXPECT_EQ(parse_error_kind("hypothesis 1\nhypothesis 3"), K::missing_id);
    EXPECT_EQ(parse_error_kind("hypothesis 1 gates=[7]"), K::unknown_id);
    EXPECT_EQ(parse_error_kind("alpha = 1.5\nhypothesis 1"), K::alpha_range);
    EXPECT_EQ(parse_error_kind("alpha = 0\nhypothesis 1"), K::alpha_range);
    EXPECT_EQ(parse_error_kind("hypothesis"), K::syntax);
    EXPECT_EQ(parse_error_kind("hypothesis 1 gates=[1"), K::syntax);
    EXPECT_EQ(parse_error_kind("hypothesis 1 gates=[]"), K::syntax);
    EXPECT_EQ(parse_error_kind("hypothesis 1 color=red"), K::syntax);
    EXPECT_EQ(parse_error_kind("hypothesis 1 label=\"open"), K::syntax);
    EXPECT_EQ(parse_error_kind(""), K::missing_id);
    EXPECT_EQ(parse_error_kind("# only a comment\n"), K::missing_id);
}

TEST(ParseFamilySpec, SyntaxErrorReportsLineAndColumn) {
    try {
        parse_family_spec("hypothesis 1\nhypothesis 2 gates=[1;]\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.column(), 22u);
        EXPECT_NE(std::string(e.what()).find("2:22"), std::string::npos);
    }
}

TEST(Validate, Example1IsValid) { EXPECT_TRUE(validate(example1()).empty()); }

TEST(Validate, SelfGate) {
    FamilySpec spec(3, {{2, {2}}});
    const auto v = validate(spec);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].id, 2);
    EXPECT_EQ(v[0].rule, "self-gate at 2");
}

TEST(Validate, UnknownId) {
    FamilySpec spec(3, {{3, {7}}});
    const auto v = validate(spec);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].id, 3);
    EXPECT_EQ(v[0].rule, "unknown id 7");
}

TEST(Validate, CycleAndEmptyFamily) {
    const auto v = validate(FamilySpec(2, {{1, {2}}, {2, {1}}}));
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].rule.rfind("gate cycle", 0), 0u);
    EXPECT_FALSE(validate(FamilySpec(0)).empty());
}

TEST(GateAncestors, SerialChain) { EXPECT_EQ(gate_ancestors(example2(), {5}), (HypothesisSet{1, 3})); }

TEST(GateAncestors, UngatedSeedHasNone) { EXPECT_TRUE(gate_ancestors(example2(), {1}).empty()); }

TEST(GateAncestors, ParallelGate) { EXPECT_EQ(gate_ancestors(example1(), {3}), (HypothesisSet{1, 2})); }

TEST(GateAncestors, SeedMemberIncludedOnlyWhenReachable) {
    EXPECT_EQ(gate_ancestors(example2(), {3, 5}), (HypothesisSet{1, 3}));
}

TEST(GateAncestors, MatchesFixedPointAndIsMonotone) {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 400; ++trial) {
        const int n = 1 + static_cast<int>(gen() % 8);
        const auto spec = covering::testing::random_dag(gen, n);
        const std::uint32_t m1 = static_cast<std::uint32_t>(gen() % (1u << n));
        const std::uint32_t m2 = m1 | static_cast<std::uint32_t>(gen() % (1u << n));
        HypothesisSet s1, s2;
        for (int i = 0; i < n; ++i) {
            if (m1 & (1u << i)) s1.insert(i + 1);
            if (m2 & (1u << i)) s2.insert(i + 1);
        }
        const auto a1 = gate_ancestors(spec, s1);
        const auto a2 = gate_ancestors(spec, s2);
        EXPECT_EQ(a1, ancestors_fixed_point(spec, s1));
        EXPECT_TRUE(a2.includes(a1));
    }
}

TEST(TopologicalOrder, GatesComeFirst) {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(gen() % 8);
        std::vector<HypothesisId> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 1);
        std::shuffle(perm.begin(), perm.end(), gen);
        const auto spec = covering::testing::relabel(covering::testing::random_dag(gen, n), perm);
        const auto order = topological_order(spec);
        ASSERT_EQ(order.size(), static_cast<std::size_t>(n));
        std::vector<int> pos(static_cast<std::size_t>(n) + 1);
        for (std::size_t k = 0; k < order.size(); ++k) pos[static_cast<std::size_t>(order[k])] = static_cast<int>(k);
        for (HypothesisId i = 1; i <= n; ++i)
            for (HypothesisId g : spec.gates_of(i)) EXPECT_LT(pos[g], pos[i]);
    }
}

TEST(Serialize, RoundTripProperty) {
    std::mt19937_64 gen(5);
    const std::string alphabet = "abc XYZ_#=[],\"\\019";
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(gen() % 9);
        std::vector<HypothesisId> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 1);
        std::shuffle(perm.begin(), perm.end(), gen);
        auto spec = covering::testing::relabel(covering::testing::random_dag(gen, n), perm);
        for (auto& label : spec.labels) {
            if (gen() % 2) continue;
            std::string s;
            for (std::size_t k = gen() % 12; k > 0; --k) s += alphabet[gen() % alphabet.size()];
            label = s;
        }
        if (gen() % 2) spec.alpha_default = std::uniform_real_distribution<double>(1e-6, 0.999)(gen);
        const auto text = serialize(spec);
        const auto back = parse_family_spec(text);
        EXPECT_EQ(back, spec) << text;
        EXPECT_EQ(serialize(back), text);
    }
}
