#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "covering/decision.hpp"
#include "covering/detail/lexer.hpp"
#include "covering/error.hpp"
#include "covering/family.hpp"
#include "covering/local_tests.hpp"

namespace covering {

/// Dense row-major square matrix.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows) : n_(rows.size()), data_() {
        data_.reserve(n_ * n_);
        for (const auto& r : rows) {
            if (r.size() != n_) throw UsageError("matrix must be square");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    /// Unit diagonal, `rho` everywhere else.
    static Matrix exchangeable(std::size_t n, double rho) {
        Matrix m(n, rho);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// Lower-triangular L with L*L^T = a. Pivots at or below 1e-12 are rejected.
inline Matrix cholesky(const Matrix& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(a(i, j) - a(j, i)) > 1e-12) throw UsageError("correlation matrix is not symmetric");
    Matrix l(n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 1e-12))
            throw NotPositiveDefinite("matrix is not positive definite (pivot " + std::to_string(j + 1) + ")");
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

/// One-sided upper-tail p-value 1 - Phi(z), via the complementary error
/// function (relative error near machine precision, so absolute error far
/// below 1e-10 everywhere).
inline double upper_tail_pvalue(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

/// Monte Carlo scenario: which nulls are true, the mean shift of each false
/// null's test statistic, and the statistics' correlation.
struct ScenarioConfig {
    std::vector<bool> truth;    // true = H_i holds
    std::vector<double> effect; // mean shift; ignored (zero) for true nulls
    Matrix correlation;
    std::uint64_t reps = 10'000;
    std::uint64_t seed = 0;
    double alpha = 0.05;

    std::size_t n() const noexcept { return truth.size(); }

    /// Throws UsageError / NotPositiveDefinite on a broken configuration.
    void validate() const {
        if (truth.empty()) throw UsageError("scenario has no hypotheses");
        if (effect.size() != truth.size()) throw UsageError("effect and truth lengths differ");
        if (correlation.size() != truth.size()) throw UsageError("correlation dimension does not match truth");
        for (std::size_t i = 0; i < n(); ++i) {
            if (std::abs(correlation(i, i) - 1.0) > 1e-12) throw UsageError("correlation diagonal must be 1");
            if (!(effect[i] >= 0.0) || !std::isfinite(effect[i])) throw UsageError("effects must be finite and >= 0");
        }
        if (reps < 1) throw UsageError("reps must be at least 1");
        if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha outside (0,1)");
        (void)cholesky(correlation);
    }

    /// Scenario text, one `key = value` per line:
    ///   truth = [1,1,0]     effect = [0,0,4]
    ///   rho = 0.5           (or corr = [[1,0.5,0.5],[0.5,1,0.5],[0.5,0.5,1]])
    ///   reps = 100000       seed = 7       alpha = 0.05
    static ScenarioConfig parse(std::string_view text);
};

inline ScenarioConfig ScenarioConfig::parse(std::string_view text) {
    using detail::Token;
    using Kind = ParseError::Kind;
    ScenarioConfig sc;
    std::optional<double> rho;
    std::optional<std::vector<std::vector<double>>> corr;
    bool have_effect = false;
    std::vector<std::string> seen;

    auto real_list = [](detail::TokenCursor& cur) {
        std::vector<double> v;
        cur.expect(Token::Type::lbracket, "'['");
        if (!cur.accept(Token::Type::rbracket)) {
            do v.push_back(cur.real());
            while (cur.accept(Token::Type::comma));
            cur.expect(Token::Type::rbracket, "']'");
        }
        return v;
    };

    detail::for_each_line(text, [&](detail::TokenCursor& cur) {
        const std::size_t key_col = cur.column();
        const std::string key = cur.expect(Token::Type::ident, "key").text;
        for (const auto& s : seen)
            if (s == key) throw ParseError(Kind::syntax, cur.line(), key_col, "'" + key + "' given twice");
        seen.push_back(key);
        cur.expect(Token::Type::equals, "'='");
        const std::size_t val_col = cur.column();
        if (key == "truth") {
            sc.truth.clear();
            for (double v : real_list(cur)) {
                if (v != 0.0 && v != 1.0) throw ParseError(Kind::invalid_value, cur.line(), val_col, "truth entries are 0 or 1");
                sc.truth.push_back(v == 1.0);
            }
        } else if (key == "effect") {
            sc.effect = real_list(cur);
            have_effect = true;
        } else if (key == "rho") {
            rho = cur.real();
        } else if (key == "corr") {
            std::vector<std::vector<double>> rows;
            cur.expect(Token::Type::lbracket, "'['");
            do rows.push_back(real_list(cur));
            while (cur.accept(Token::Type::comma));
            cur.expect(Token::Type::rbracket, "']'");
            corr = std::move(rows);
        } else if (key == "reps") {
            sc.reps = cur.unsigned_integer();
        } else if (key == "seed") {
            sc.seed = cur.unsigned_integer();
        } else if (key == "alpha") {
            sc.alpha = cur.real();
            if (!(sc.alpha > 0.0 && sc.alpha < 1.0))
                throw ParseError(Kind::alpha_range, cur.line(), val_col, "alpha outside (0,1)");
        } else {
            throw ParseError(Kind::syntax, cur.line(), key_col, "unknown key '" + key + "'");
        }
        if (!cur.done()) cur.fail("unexpected trailing input");
    });

    if (sc.truth.empty()) throw ParseError(Kind::missing_id, 0, 0, "scenario needs truth=[...]");
    const std::size_t n = sc.truth.size();
    if (!have_effect) sc.effect.assign(n, 0.0);
    if (sc.effect.size() != n) throw ParseError(Kind::invalid_value, 0, 0, "effect length differs from truth");
    for (std::size_t i = 0; i < n; ++i)
        if (sc.truth[i]) sc.effect[i] = 0.0;
    if (rho && corr) throw ParseError(Kind::syntax, 0, 0, "give either rho or corr, not both");
    if (corr) {
        if (corr->size() != n) throw ParseError(Kind::invalid_value, 0, 0, "corr dimension differs from truth");
        sc.correlation = Matrix(n);
        for (std::size_t i = 0; i < n; ++i) {
            if ((*corr)[i].size() != n) throw ParseError(Kind::invalid_value, 0, 0, "corr must be square");
            for (std::size_t j = 0; j < n; ++j) sc.correlation(i, j) = (*corr)[i][j];
        }
    } else {
        sc.correlation = Matrix::exchangeable(n, rho.value_or(0.0));
    }
    try {
        sc.validate();
    } catch (const Error& e) {
        throw ParseError(Kind::invalid_value, 0, 0, e.what());
    }
    return sc;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Per-replicate stream: mt19937_64 keyed on (seed, rep) so replicates can be
// generated in any order or on any worker.
inline std::mt19937_64 replicate_stream(std::uint64_t seed, std::uint64_t rep) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ (rep * 0xd1b54a32d192ed03ULL + 1)));
}

// Open interval (0,1) from the top 53 bits.
inline double open_unit(std::mt19937_64& gen) {
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

/// Draws test statistics z = effect + L g and their upper-tail p-values.
/// Standard normals come from Box-Muller on the replicate's own stream
/// (std::normal_distribution is not reproducible across standard libraries).
class PValueSampler {
public:
    explicit PValueSampler(const ScenarioConfig& scenario)
        : effect_(scenario.effect), seed_(scenario.seed), chol_(cholesky(scenario.correlation)) {
        for (std::size_t i = 0; i < scenario.n(); ++i)
            if (scenario.truth[i]) effect_[i] = 0.0;
    }

    std::size_t n() const noexcept { return effect_.size(); }

    std::vector<double> statistics(std::uint64_t rep) const {
        auto gen = detail::replicate_stream(seed_, rep);
        const std::size_t n = effect_.size();
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; i += 2) {
            const double r = std::sqrt(-2.0 * std::log(detail::open_unit(gen)));
            const double theta = 2.0 * std::numbers::pi * detail::open_unit(gen);
            g[i] = r * std::cos(theta);
            if (i + 1 < n) g[i + 1] = r * std::sin(theta);
        }
        std::vector<double> z(effect_);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k <= i; ++k) z[i] += chol_(i, k) * g[k];
        return z;
    }

    PValueVector pvalues(std::uint64_t rep) const {
        auto z = statistics(rep);
        for (double& v : z) v = upper_tail_pvalue(v);
        return PValueVector(std::move(z));
    }

private:
    std::vector<double> effect_;
    std::uint64_t seed_;
    Matrix chol_;
};

inline PValueVector sample_pvalues(const ScenarioConfig& scenario, std::uint64_t rep_index) {
    if (rep_index >= scenario.reps) throw UsageError("rep_index beyond scenario reps");
    return PValueSampler(scenario).pvalues(rep_index);
}

struct FWERReport {
    double fwer_hat = 0.0;
    double se = 0.0;
    std::vector<double> per_hypothesis_rejection_rate;
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    std::vector<bool> truth;
    std::uint64_t familywise_errors = 0;

    /// alpha + 3 * se
    double bound() const { return alpha + 3.0 * se; }
    bool within_bound() const { return fwer_hat <= bound(); }
};

inline double binomial_se(double rate, std::uint64_t reps) {
    return std::sqrt(rate * (1.0 - rate) / static_cast<double>(reps));
}

namespace detail {

struct RejectionCounts {
    std::uint64_t familywise = 0;
    std::vector<std::uint64_t> per_hypothesis;
};

// Replicates [first, last) accumulated on the calling thread.
inline RejectionCounts count_rejections(const CoveringProcedure& proc, const PValueSampler& sampler,
                                        const std::vector<bool>& truth, double alpha, std::uint64_t first,
                                        std::uint64_t last) {
    RejectionCounts c{0, std::vector<std::uint64_t>(truth.size(), 0)};
    for (std::uint64_t r = first; r < last; ++r) {
        const auto psi = proc.psi(sampler.pvalues(r), alpha);
        bool error = false;
        for (std::size_t i = 0; i < psi.size(); ++i) {
            if (!psi[i]) continue;
            ++c.per_hypothesis[i];
            if (truth[i]) error = true;
        }
        if (error) ++c.familywise;
    }
    return c;
}

}  // namespace detail

/// Monte Carlo FWER of the covering procedure under `scenario`. Replicates
/// may be sharded over `workers` threads; the counts are merged by addition,
/// so the report does not depend on the worker count.
inline FWERReport estimate_fwer(const CoveringProcedure& proc, const ScenarioConfig& scenario, unsigned workers = 1) {
    scenario.validate();
    if (scenario.n() != static_cast<std::size_t>(proc.spec().n))
        throw UsageError("scenario dimension does not match the family");
    const PValueSampler sampler(scenario);
    workers = std::max(1u, workers);

    detail::RejectionCounts total{0, std::vector<std::uint64_t>(scenario.n(), 0)};
    if (workers == 1) {
        total = detail::count_rejections(proc, sampler, scenario.truth, scenario.alpha, 0, scenario.reps);
    } else {
        std::vector<detail::RejectionCounts> parts(workers);
        {
            std::vector<std::jthread> pool;
            const std::uint64_t chunk = (scenario.reps + workers - 1) / workers;
            for (unsigned w = 0; w < workers; ++w) {
                const std::uint64_t first = std::min<std::uint64_t>(scenario.reps, w * chunk);
                const std::uint64_t last = std::min<std::uint64_t>(scenario.reps, first + chunk);
                pool.emplace_back([&, w, first, last] {
                    parts[w] = detail::count_rejections(proc, sampler, scenario.truth, scenario.alpha, first, last);
                });
            }
        }
        for (const auto& p : parts) {
            total.familywise += p.familywise;
            for (std::size_t i = 0; i < p.per_hypothesis.size(); ++i) total.per_hypothesis[i] += p.per_hypothesis[i];
        }
    }

    FWERReport rep;
    const auto reps = static_cast<double>(scenario.reps);
    rep.familywise_errors = total.familywise;
    rep.fwer_hat = static_cast<double>(total.familywise) / reps;
    rep.se = binomial_se(rep.fwer_hat, scenario.reps);
    for (auto c : total.per_hypothesis) rep.per_hypothesis_rejection_rate.push_back(static_cast<double>(c) / reps);
    rep.reps = scenario.reps;
    rep.seed = scenario.seed;
    rep.alpha = scenario.alpha;
    rep.truth = scenario.truth;
    return rep;
}

inline FWERReport estimate_fwer(const FamilySpec& spec, const ScenarioConfig& scenario, const LocalTestSpec& test,
                                unsigned workers = 1) {
    return estimate_fwer(CoveringProcedure(spec, test), scenario, workers);
}

struct SubsetResult {
    HypothesisSet nulls;  // S: the true nulls of this configuration
    double estimate = 0.0;
    double se = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct SubsetReport {
    double alpha = 0.0;
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
    double delta_false = 0.0;
    std::vector<SubsetResult> subsets;

    bool all_pass() const {
        for (const auto& s : subsets)
            if (!s.pass) return false;
        return true;
    }
};

/// For every nonempty S of {1..n}: make exactly the hypotheses in S true
/// nulls, shift every other statistic by `delta_false`, and estimate
/// P(some member of S is rejected). Each estimate passes when it does not
/// exceed alpha + 3 se. Subsets are listed in increasing bitmask order
/// (bit i-1 set for hypothesis i).
inline SubsetReport subsetwise_check(const FamilySpec& spec, const LocalTestSpec& test, double alpha,
                                     std::uint64_t reps, double delta_false, const Matrix& correlation,
                                     std::uint64_t seed, unsigned workers = 1) {
    if (spec.n > 12) throw UsageError("subset-wise check enumerates 2^n - 1 subsets; n must be at most 12");
    const CoveringProcedure proc(spec, test);
    SubsetReport report{alpha, reps, seed, delta_false, {}};
    const auto n = static_cast<std::size_t>(spec.n);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        ScenarioConfig sc;
        sc.truth.assign(n, false);
        sc.effect.assign(n, delta_false);
        std::vector<HypothesisId> nulls;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                sc.truth[i] = true;
                sc.effect[i] = 0.0;
                nulls.push_back(static_cast<HypothesisId>(i + 1));
            }
        sc.correlation = correlation;
        sc.reps = reps;
        sc.seed = seed;
        sc.alpha = alpha;
        const auto fwer = estimate_fwer(proc, sc, workers);
        report.subsets.push_back(
            {HypothesisSet(std::move(nulls)), fwer.fwer_hat, fwer.se, fwer.bound(), fwer.within_bound()});
    }
    return report;
}

/// Closed testing with Bonferroni intersection tests: H_i is rejected when
/// every intersection hypothesis H_K (K a subset of `members` containing i)
/// has min_{k in K} p_k <= alpha/|K|.
inline HypothesisSet closure_oracle(const PValueVector& p, double alpha, const HypothesisSet& members) {
    const std::size_t m = members.size();
    if (m == 0) return {};
    if (m > 20) throw UsageError("closure oracle enumerates 2^m intersections; m must be at most 20");
    const auto& ids = members.ids();
    const std::uint32_t full = (1u << m) - 1;
    // rejected_all[i]: every intersection containing member i rejected so far
    std::vector<bool> rejected_all(m, true);
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        double min_p = 1.0;
        int size = 0;
        for (std::size_t k = 0; k < m; ++k)
            if (mask & (1u << k)) {
                min_p = std::min(min_p, p[ids[k]]);
                ++size;
            }
        if (min_p <= alpha / size) continue;
        for (std::size_t k = 0; k < m; ++k)
            if (mask & (1u << k)) rejected_all[k] = false;
    }
    std::vector<HypothesisId> out;
    for (std::size_t k = 0; k < m; ++k)
        if (rejected_all[k]) out.push_back(ids[k]);
    return HypothesisSet(std::move(out));
}

struct PowerRow {
    HypothesisId id;
    bool null_true;
    double covering_rate;
    double closure_rate;
};

struct PowerReport {
    std::vector<PowerRow> rows;
    double covering_fwer = 0.0;
    double closure_fwer = 0.0;
    double covering_se = 0.0;
    double closure_se = 0.0;
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    std::string local_test;
};

/// Per-hypothesis rejection rates of the covering procedure next to plain
/// closed testing (Bonferroni intersections, gates ignored) on the same draws.
inline PowerReport power_report(const FamilySpec& spec, const ScenarioConfig& scenario, const LocalTestSpec& test) {
    scenario.validate();
    if (scenario.n() != static_cast<std::size_t>(spec.n))
        throw UsageError("scenario dimension does not match the family");
    const CoveringProcedure proc(spec, test);
    const PValueSampler sampler(scenario);
    const auto n = static_cast<std::size_t>(spec.n);
    const HypothesisSet all = spec.all();
    std::vector<std::uint64_t> cov(n, 0), clo(n, 0);
    std::uint64_t cov_err = 0, clo_err = 0;
    for (std::uint64_t r = 0; r < scenario.reps; ++r) {
        const auto p = sampler.pvalues(r);
        const auto psi = proc.psi(p, scenario.alpha);
        const auto closed = closure_oracle(p, scenario.alpha, all);
        bool ce = false, ke = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (psi[i]) {
                ++cov[i];
                ce = ce || scenario.truth[i];
            }
            if (closed.contains(static_cast<HypothesisId>(i + 1))) {
                ++clo[i];
                ke = ke || scenario.truth[i];
            }
        }
        cov_err += ce;
        clo_err += ke;
    }
    PowerReport out;
    const auto reps = static_cast<double>(scenario.reps);
    for (std::size_t i = 0; i < n; ++i)
        out.rows.push_back({static_cast<HypothesisId>(i + 1), scenario.truth[i], static_cast<double>(cov[i]) / reps,
                            static_cast<double>(clo[i]) / reps});
    out.covering_fwer = static_cast<double>(cov_err) / reps;
    out.closure_fwer = static_cast<double>(clo_err) / reps;
    out.covering_se = binomial_se(out.covering_fwer, scenario.reps);
    out.closure_se = binomial_se(out.closure_fwer, scenario.reps);
    out.reps = scenario.reps;
    out.seed = scenario.seed;
    out.alpha = scenario.alpha;
    out.local_test = test.to_string();
    return out;
}

}  // namespace covering
