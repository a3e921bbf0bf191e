// covering: command-line front end for covering-principle multiple testing.
//
// Exit status: 0 success, 2 invalid input (parse, validation, usage),
// 3 when `verify` sees a subset whose estimated error exceeds alpha + 3 se,
// 1 on anything unexpected.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "covering/covering.hpp"
#include "covering/report.hpp"

namespace {

using namespace covering;

constexpr int kExitInvalid = 2;
constexpr int kExitVerifyFailed = 3;

struct Options {
    std::string spec_path;
    std::string p_inline;
    std::string p_file;
    std::optional<double> alpha;
    std::string local = "holm";
    bool ack_dependence = false;
    std::string scenario_path;
    std::string format = "text";
    std::string dot_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> reps;
    std::optional<double> rho;
    double delta_false = 6.0;
    double tol = 1e-9;
    unsigned workers = 1;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path + "'");
    out << text;
}

FamilySpec load_spec(const Options& o) { return parse_family_spec(read_file(o.spec_path)); }

LocalTestSpec load_local(const Options& o) { return LocalTestSpec::parse(o.local, o.ack_dependence); }

double resolve_alpha(const Options& o, const FamilySpec& spec) {
    const double a = o.alpha.value_or(spec.alpha_default.value_or(0.05));
    if (!(a > 0.0 && a < 1.0)) throw UsageError("alpha outside (0,1)");
    return a;
}

double parse_real(std::string_view s) {
    s = covering::detail::trim(s);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw UsageError("bad p-value '" + std::string(s) + "'");
    return v;
}

PValueVector load_pvalues(const Options& o, const FamilySpec& spec) {
    std::vector<double> p;
    if (!o.p_inline.empty() && !o.p_file.empty()) throw UsageError("give --p or --p-file, not both");
    if (!o.p_inline.empty()) {
        for (auto part : covering::detail::split_commas(o.p_inline)) p.push_back(parse_real(part));
    } else if (!o.p_file.empty()) {
        std::istringstream in(read_file(o.p_file));
        std::string line;
        while (std::getline(in, line)) {
            auto t = covering::detail::trim(line);
            if (t.empty() || t.front() == '#') continue;
            p.push_back(parse_real(t));
        }
    } else {
        throw UsageError("p-values required (--p or --p-file)");
    }
    if (p.size() != static_cast<std::size_t>(spec.n))
        throw UsageError("family has " + std::to_string(spec.n) + " hypotheses but " + std::to_string(p.size()) +
                         " p-values were given");
    return PValueVector(std::move(p));
}

ScenarioConfig load_scenario(const Options& o) {
    ScenarioConfig sc = ScenarioConfig::parse(read_file(o.scenario_path));
    if (o.seed) sc.seed = *o.seed;
    if (o.reps) sc.reps = *o.reps;
    if (o.alpha) sc.alpha = *o.alpha;
    sc.validate();
    return sc;
}

void emit(const Options& o, const Json& json, const std::string& text) {
    if (o.format == "json")
        std::cout << json.dump(2) << "\n";
    else
        std::cout << text;
}

int run_decompose(const Options& o) {
    const auto spec = load_spec(o);
    const auto plan = decompose(spec);
    if (!o.dot_path.empty()) write_file(o.dot_path, export_dot(plan, spec));
    emit(o, to_json(plan), to_text(plan));
    return 0;
}

int run_test(const Options& o) {
    const auto spec = load_spec(o);
    const auto p = load_pvalues(o, spec);
    const auto result = test_family(spec, p, resolve_alpha(o, spec), load_local(o));
    emit(o, to_json(result), to_text(result, spec));
    return 0;
}

int run_adjust(const Options& o) {
    const auto spec = load_spec(o);
    const auto p = load_pvalues(o, spec);
    const auto adj = adjusted_pvalues(spec, p, load_local(o), o.tol);
    emit(o, to_json(adj), to_text(adj, p, spec));
    return 0;
}

int run_simulate(const Options& o) {
    const auto spec = load_spec(o);
    const auto sc = load_scenario(o);
    const auto report = estimate_fwer(spec, sc, load_local(o), o.workers);
    emit(o, to_json(report), to_text(report));
    return 0;
}

int run_verify(const Options& o) {
    const auto spec = load_spec(o);
    double alpha = resolve_alpha(o, spec);
    std::uint64_t reps = o.reps.value_or(10'000);
    std::uint64_t seed = o.seed.value_or(0);
    Matrix corr = Matrix::exchangeable(static_cast<std::size_t>(spec.n), o.rho.value_or(0.0));
    if (!o.scenario_path.empty()) {
        if (o.rho) throw UsageError("give --rho or --scenario, not both");
        const auto sc = load_scenario(o);
        if (sc.n() != static_cast<std::size_t>(spec.n)) throw UsageError("scenario dimension does not match the family");
        corr = sc.correlation;
        reps = sc.reps;
        seed = sc.seed;
        alpha = sc.alpha;
    }
    const auto report = subsetwise_check(spec, load_local(o), alpha, reps, o.delta_false, corr, seed, o.workers);
    emit(o, to_json(report), to_text(report));
    return report.all_pass() ? 0 : kExitVerifyFailed;
}

int run_compare(const Options& o) {
    const auto spec = load_spec(o);
    const auto report = power_report(spec, load_scenario(o), load_local(o));
    emit(o, to_json(report), to_text(report));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Covering-principle multiple testing: decompose gated hypothesis families, test, adjust, simulate"};
    app.set_version_flag("--version", std::string("covering ") + COVERING_VERSION);
    app.require_subcommand(1);

    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--spec", o.spec_path, "Family-spec file")->required();
        sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    };
    auto add_local = [&](CLI::App* sub) {
        sub->add_option("--alpha", o.alpha, "Significance level");
        sub->add_option("--local", o.local, "Local test: bonferroni|holm|hochberg|fixed:ORDER|wbonf:WEIGHTS");
        sub->add_flag("--ack-dependence", o.ack_dependence,
                      "Accept hochberg's non-negative dependence assumption");
    };
    auto add_p = [&](CLI::App* sub) {
        sub->add_option("--p", o.p_inline, "Comma-separated p-values, in id order");
        sub->add_option("--p-file", o.p_file, "File with one p-value per line");
    };
    auto add_mc = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "Random seed (default 0, or the scenario's)");
        sub->add_option("--reps", o.reps, "Monte Carlo replicates");
        sub->add_option("--workers", o.workers, "Worker threads (results do not depend on this)");
    };

    auto* dec = app.add_subcommand("decompose", "Show the covering decomposition");
    add_common(dec);
    dec->add_option("--dot", o.dot_path, "Write a Graphviz rendering to PATH");

    auto* tst = app.add_subcommand("test", "Test the family on observed p-values");
    add_common(tst);
    add_local(tst);
    add_p(tst);

    auto* adj = app.add_subcommand("adjust", "Adjusted p-values");
    add_common(adj);
    add_local(adj);
    add_p(adj);
    adj->add_option("--tol", o.tol, "Bisection tolerance")->check(CLI::PositiveNumber);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo familywise error rate");
    add_common(sim);
    add_local(sim);
    add_mc(sim);
    sim->add_option("--scenario", o.scenario_path, "Scenario file")->required();

    auto* ver = app.add_subcommand("verify", "Subset-wise familywise error check over every null configuration");
    add_common(ver);
    add_local(ver);
    add_mc(ver);
    ver->add_option("--scenario", o.scenario_path, "Scenario file supplying correlation, reps, seed, alpha");
    ver->add_option("--rho", o.rho, "Exchangeable correlation");
    ver->add_option("--delta-false", o.delta_false, "Mean shift of false nulls")->check(CLI::NonNegativeNumber);

    auto* cmp = app.add_subcommand("compare", "Covering procedure vs closed testing, per-hypothesis rates");
    add_common(cmp);
    add_local(cmp);
    add_mc(cmp);
    cmp->add_option("--scenario", o.scenario_path, "Scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    try {
        if (*dec) return run_decompose(o);
        if (*tst) return run_test(o);
        if (*adj) return run_adjust(o);
        if (*sim) return run_simulate(o);
        if (*ver) return run_verify(o);
        if (*cmp) return run_compare(o);
    } catch (const covering::InternalError& e) {
        std::cerr << "covering: internal error: " << e.what() << "\n";
        return 1;
    } catch (const covering::Error& e) {
        std::cerr << "covering: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "covering: internal error: " << e.what() << "\n";
        return 1;
    }
    return kExitInvalid;
}
