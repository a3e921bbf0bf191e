#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "covering/detail/lexer.hpp"
#include "covering/error.hpp"
#include "covering/hypothesis_set.hpp"

namespace covering {

/// A family of null hypotheses H_1..H_n together with their gate sets.
///
/// A gate set G_i declares that the rejection region of H_i is covered by the
/// union of the rejection regions of its gates: H_i may only be rejected once
/// at least one member of G_i has been rejected. A multi-member gate set is a
/// parallel gatekeeper; serial gatekeeping is a chain of singleton gates.
struct FamilySpec {
    int n = 0;
    std::vector<std::optional<std::string>> labels;  // index id-1
    std::vector<HypothesisSet> gates;                // index id-1
    std::optional<double> alpha_default;

    FamilySpec() = default;

    /// n hypotheses, no labels, gate sets taken from `gate_map` (id -> G_id).
    FamilySpec(int count, const std::map<HypothesisId, HypothesisSet>& gate_map = {})
        : n(count), labels(static_cast<std::size_t>(count > 0 ? count : 0)),
          gates(static_cast<std::size_t>(count > 0 ? count : 0)) {
        for (const auto& [id, g] : gate_map)
            if (id >= 1 && id <= count) gates[static_cast<std::size_t>(id - 1)] = g;
    }

    const HypothesisSet& gates_of(HypothesisId id) const { return gates.at(static_cast<std::size_t>(id - 1)); }
    bool gated(HypothesisId id) const { return !gates_of(id).empty(); }
    HypothesisSet all() const { return HypothesisSet::range(n); }

    std::string display_name(HypothesisId id) const {
        const auto& l = labels.at(static_cast<std::size_t>(id - 1));
        return l ? *l : "H" + std::to_string(id);
    }

    friend bool operator==(const FamilySpec&, const FamilySpec&) = default;
};

struct Violation {
    HypothesisId id;  // 0 when the rule concerns the family as a whole
    std::string rule;
};

namespace detail {

// Kahn's algorithm, smallest ready id first. Returns the ids that could be
// ordered; anything missing sits on or behind a cycle.
inline std::vector<HypothesisId> kahn_order(const FamilySpec& spec) {
    const auto n = static_cast<std::size_t>(spec.n);
    std::vector<int> indegree(n, 0);
    std::vector<std::vector<HypothesisId>> gated_by(n);
    for (HypothesisId i = 1; i <= spec.n; ++i) {
        for (HypothesisId g : spec.gates_of(i)) {
            if (g < 1 || g > spec.n || g == i) continue;
            ++indegree[static_cast<std::size_t>(i - 1)];
            gated_by[static_cast<std::size_t>(g - 1)].push_back(i);
        }
    }
    std::priority_queue<HypothesisId, std::vector<HypothesisId>, std::greater<>> ready;
    for (HypothesisId i = 1; i <= spec.n; ++i)
        if (indegree[static_cast<std::size_t>(i - 1)] == 0) ready.push(i);
    std::vector<HypothesisId> order;
    order.reserve(n);
    while (!ready.empty()) {
        HypothesisId g = ready.top();
        ready.pop();
        order.push_back(g);
        for (HypothesisId i : gated_by[static_cast<std::size_t>(g - 1)])
            if (--indegree[static_cast<std::size_t>(i - 1)] == 0) ready.push(i);
    }
    return order;
}

}  // namespace detail

/// Checks every FamilySpec invariant. An empty result means the spec is valid.
inline std::vector<Violation> validate(const FamilySpec& spec) {
    std::vector<Violation> out;
    if (spec.n < 1) {
        out.push_back({0, "family must contain at least one hypothesis"});
        return out;
    }
    if (spec.gates.size() != static_cast<std::size_t>(spec.n) ||
        spec.labels.size() != static_cast<std::size_t>(spec.n)) {
        out.push_back({0, "gate/label tables do not match n"});
        return out;
    }
    if (spec.alpha_default && !(*spec.alpha_default > 0.0 && *spec.alpha_default < 1.0))
        out.push_back({0, "alpha outside (0,1)"});
    for (HypothesisId i = 1; i <= spec.n; ++i) {
        for (HypothesisId g : spec.gates_of(i)) {
            if (g == i)
                out.push_back({i, "self-gate at " + std::to_string(i)});
            else if (g < 1 || g > spec.n)
                out.push_back({i, "unknown id " + std::to_string(g)});
        }
    }
    auto order = detail::kahn_order(spec);
    if (order.size() != static_cast<std::size_t>(spec.n)) {
        HypothesisSet placed(order);
        for (HypothesisId i = 1; i <= spec.n; ++i)
            if (!placed.contains(i)) {
                out.push_back({i, "gate cycle through " + std::to_string(i)});
                break;
            }
    }
    return out;
}

/// Gates before the hypotheses they gate; ties broken by ascending id.
/// Requires a valid (acyclic) spec.
inline std::vector<HypothesisId> topological_order(const FamilySpec& spec) {
    auto order = detail::kahn_order(spec);
    if (order.size() != static_cast<std::size_t>(spec.n)) throw UsageError("gate graph is cyclic");
    return order;
}

/// Transitive gate closure of `seed`: every hypothesis reachable by following
/// gate sets from the seed. Seed members appear only if reachable from another
/// seed member.
inline HypothesisSet gate_ancestors(const FamilySpec& spec, const HypothesisSet& seed) {
    std::vector<char> seen(static_cast<std::size_t>(spec.n) + 1, 0);
    std::vector<HypothesisId> stack;
    for (HypothesisId s : seed)
        for (HypothesisId g : spec.gates_of(s)) stack.push_back(g);
    std::vector<HypothesisId> found;
    while (!stack.empty()) {
        HypothesisId g = stack.back();
        stack.pop_back();
        if (g < 1 || g > spec.n || seen[static_cast<std::size_t>(g)]) continue;
        seen[static_cast<std::size_t>(g)] = 1;
        found.push_back(g);
        for (HypothesisId h : spec.gates_of(g)) stack.push_back(h);
    }
    return HypothesisSet(std::move(found));
}

/// Reads the line-oriented family-spec format:
///
///     # comment
///     alpha = 0.025
///     hypothesis 1 label="vertebral fractures"
///     hypothesis 2
///     hypothesis 3 gates=[1,2]
///
/// Declarations may appear in any order; ids must form 1..n.
inline FamilySpec parse_family_spec(std::string_view text) {
    using detail::Token;
    using Kind = ParseError::Kind;

    struct Decl {
        std::optional<std::string> label;
        std::vector<std::pair<HypothesisId, std::size_t>> gates;  // id, column
        std::size_t line;
    };
    std::map<HypothesisId, Decl> decls;
    std::optional<double> alpha;

    detail::for_each_line(text, [&](detail::TokenCursor& cur) {
        const Token* head = cur.peek();
        if (head->type != Token::Type::ident) cur.fail("expected 'alpha' or 'hypothesis'");
        if (head->text == "alpha") {
            cur.expect_keyword("alpha");
            cur.expect(Token::Type::equals, "'='");
            const std::size_t col = cur.column();
            double a = cur.real();
            if (!cur.done()) cur.fail("unexpected trailing input");
            if (alpha) throw ParseError(Kind::syntax, cur.line(), 1, "alpha declared twice");
            if (!(a > 0.0 && a < 1.0)) throw ParseError(Kind::alpha_range, cur.line(), col, "alpha outside (0,1)");
            alpha = a;
            return;
        }
        cur.expect_keyword("hypothesis");
        const std::size_t id_col = cur.column();
        const std::int64_t raw_id = cur.integer();
        if (raw_id < 1 || raw_id > 1'000'000)
            throw ParseError(Kind::invalid_value, cur.line(), id_col, "hypothesis id must be a positive integer");
        const auto id = static_cast<HypothesisId>(raw_id);
        Decl decl{std::nullopt, {}, cur.line()};
        bool have_gates = false;
        while (!cur.done()) {
            const Token* key = cur.peek();
            if (key->type == Token::Type::ident && key->text == "label" && !decl.label) {
                cur.expect_keyword("label");
                cur.expect(Token::Type::equals, "'='");
                decl.label = cur.expect(Token::Type::string, "quoted label").text;
            } else if (key->type == Token::Type::ident && key->text == "gates" && !have_gates) {
                cur.expect_keyword("gates");
                cur.expect(Token::Type::equals, "'='");
                cur.expect(Token::Type::lbracket, "'['");
                do {
                    const std::size_t col = cur.column();
                    const std::int64_t g = cur.integer();
                    if (g < 1 || g > 1'000'000)
                        throw ParseError(Kind::unknown_id, cur.line(), col, "unknown id " + std::to_string(g));
                    decl.gates.emplace_back(static_cast<HypothesisId>(g), col);
                } while (cur.accept(Token::Type::comma));
                cur.expect(Token::Type::rbracket, "']'");
                have_gates = true;
            } else {
                cur.fail("expected 'label=' or 'gates=['");
            }
        }
        if (decls.contains(id))
            throw ParseError(Kind::duplicate_id, cur.line(), id_col, "duplicate hypothesis id " + std::to_string(id));
        decls.emplace(id, std::move(decl));
    });

    if (decls.empty()) throw ParseError(Kind::missing_id, 0, 0, "family declares no hypotheses");
    const int n = static_cast<int>(decls.size());
    if (decls.rbegin()->first != n) {
        for (HypothesisId i = 1; i <= n; ++i)
            if (!decls.contains(i))
                throw ParseError(Kind::missing_id, 0, 0,
                                 "hypothesis ids must form 1..n; id " + std::to_string(i) + " is missing");
    }

    FamilySpec spec(n);
    spec.alpha_default = alpha;
    for (auto& [id, decl] : decls) {
        std::vector<HypothesisId> g;
        for (auto [gid, col] : decl.gates) {
            if (gid > n) throw ParseError(Kind::unknown_id, decl.line, col, "unknown id " + std::to_string(gid));
            if (gid == id)
                throw ParseError(Kind::invalid_value, decl.line, col, "self-gate at " + std::to_string(id));
            g.push_back(gid);
        }
        spec.gates[static_cast<std::size_t>(id - 1)] = HypothesisSet(std::move(g));
        spec.labels[static_cast<std::size_t>(id - 1)] = std::move(decl.label);
    }
    for (const auto& v : validate(spec)) {
        if (v.rule.starts_with("gate cycle")) throw ParseError(Kind::cycle, 0, 0, v.rule);
        throw ParseError(Kind::invalid_value, 0, 0, v.rule);
    }
    return spec;
}

/// Canonical text form; parse_family_spec(serialize(s)) == s.
inline std::string serialize(const FamilySpec& spec) {
    std::string out;
    if (spec.alpha_default) out += "alpha = " + detail::format_double(*spec.alpha_default) + "\n";
    for (HypothesisId i = 1; i <= spec.n; ++i) {
        out += "hypothesis " + std::to_string(i);
        if (const auto& l = spec.labels[static_cast<std::size_t>(i - 1)]) {
            out += " label=\"";
            for (char c : *l) {
                if (c == '"' || c == '\\') out += '\\';
                out += c;
            }
            out += '"';
        }
        const auto& g = spec.gates_of(i);
        if (!g.empty()) {
            out += " gates=[";
            bool first = true;
            for (HypothesisId id : g) {
                if (!first) out += ',';
                out += std::to_string(id);
                first = false;
            }
            out += ']';
        }
        out += '\n';
    }
    return out;
}

}  // namespace covering
