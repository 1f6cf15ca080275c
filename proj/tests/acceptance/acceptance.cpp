// Acceptance checks for the primary modules. `--criterion N` runs one check;
// without it every check runs. Prints one PASS/FAIL line per criterion and
// exits non-zero when any of them fails.

#include "kcq/check.hpp"
#include "kcq/experiment.hpp"
#include "kcq/oracle.hpp"
#include "kcq/product.hpp"

#include "invariants.hpp"
#include "random_models.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace kcq;
using namespace kcq::testing;

namespace {

// Pinned tolerances and budgets.
constexpr double kOracleTol = 1e-9;
constexpr double kOracleSeconds = 60.0;
constexpr std::size_t kRandomProducts = 100;

constexpr std::size_t kSeeds = 20;
constexpr std::size_t kSeedQuorum = 15;
constexpr double kGateTol = 0.02;

constexpr double kFrozenTol = 0.05;
constexpr std::uint64_t kFrozenBudget = 300'000;

constexpr double kOfficeTol = 0.05;
constexpr std::uint64_t kOfficeBudget = 6'000'000;

constexpr double kSensitivityGap = 0.05;

constexpr double kTelescopeTol = 1e-9;
constexpr double kReturnSlack = 1e-12;
constexpr double kAdvisorTol = 1e-12;

constexpr std::size_t kInvariantProducts = 50;
constexpr double kPrismTol = 1e-12;

struct Verdict {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

Ldba shipped_automaton(const std::string& env) { return load_ldba_file(default_automaton(env)); }

double oracle_for(const std::string& env) { return optimal_satisfaction(resolve_env(env), shipped_automaton(env)); }

std::vector<SeedRun> train_seeds(const std::string& env, Algorithm algo, TrainConfig cfg) {
    ExperimentSpec spec;
    spec.env = env;
    spec.algo = algo;
    spec.cfg = cfg;
    spec.num_seeds = kSeeds;
    return run_seeds(spec);
}

double final_value(const SeedRun& r) { return r.result.curve.empty() ? 0.0 : r.result.curve.back().sat_prob; }

// First evaluation step after which every evaluation stays within tol of target.
std::optional<std::uint64_t> convergence_step(const TrainingCurve& curve, double target, double tol) {
    std::optional<std::uint64_t> step;
    for (const auto& p : curve) {
        if (std::abs(p.sat_prob - target) <= tol) {
            if (!step) step = p.step;
        } else {
            step.reset();
        }
    }
    return step;
}

std::size_t count_if_runs(const std::vector<SeedRun>& runs, const std::function<bool(const SeedRun&)>& pred) {
    return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), pred));
}

// -- 1 ----------------------------------------------------------------------

Verdict oracle_vs_enumeration() {
    const auto t0 = Clock::now();
    Rng rng(2024);
    double worst = 0.0;
    std::size_t policies = 0;
    for (std::size_t i = 0; i < kRandomProducts; ++i) {
        const LabeledMdp env = random_env(rng, 4, 2);
        const Ldba aut = random_ldba(rng, 3);
        const auto p = make_product(env, aut, 0, RewardSchedule::constant(0, 1.0), 1.0);
        double best = 0.0;
        policies += for_each_policy(
            p, [&](const Policy& pi) { best = std::max(best, satisfaction_probability(induce_chain(p, pi))); });
        worst = std::max(worst, std::abs(optimal_satisfaction(env, aut) - best));
    }
    const double secs = seconds_since(t0);
    Verdict o;
    o.pass = worst <= kOracleTol && secs < kOracleSeconds;
    o.detail = std::to_string(kRandomProducts) + " products, " + std::to_string(policies) +
               " policies, max error " + [&] { std::ostringstream os; os << worst; return os.str(); }() + ", " + fmt(secs) + "s";
    return o;
}

// -- 2 ----------------------------------------------------------------------

Verdict gate_convergence() {
    const double opt = oracle_for("gate");
    Verdict o;
    o.detail = "optimum " + fmt(opt) + ";";
    for (Algorithm algo : {Algorithm::KC, Algorithm::CF, Algorithm::CFKC}) {
        const auto runs = train_seeds("gate", algo, TrainConfig{});
        const auto ok = count_if_runs(runs, [&](const SeedRun& r) { return std::abs(final_value(r) - opt) <= kGateTol; });
        o.pass = o.pass && ok >= kSeedQuorum;
        o.detail += " " + std::string(algorithm_name(algo)) + " " + std::to_string(ok) + "/" + std::to_string(kSeeds);
    }
    return o;
}

// -- 3 ----------------------------------------------------------------------

Verdict frozen_lake_efficiency() {
    const double opt = oracle_for("frozen-lake");
    TrainConfig cfg;
    cfg.K = 10;
    cfg.max_timestep = 200;
    cfg.max_episode = kFrozenBudget / cfg.max_timestep;
    const auto runs = train_seeds("frozen-lake", Algorithm::CFKC, cfg);
    // Value at the end of the budget; the curve ends at exactly kFrozenBudget steps.
    const auto ok = count_if_runs(runs, [&](const SeedRun& r) {
        return !r.result.curve.empty() && r.result.curve.back().step == kFrozenBudget &&
               std::abs(final_value(r) - opt) <= kFrozenTol;
    });
    Verdict o;
    o.pass = ok >= kSeedQuorum;
    o.detail = "optimum " + fmt(opt) + "; cf-kc " + std::to_string(ok) + "/" + std::to_string(kSeeds) + " within " +
               fmt(kFrozenTol) + " at " + std::to_string(kFrozenBudget) + " steps";
    return o;
}

// -- 4 ----------------------------------------------------------------------

Verdict office_convergence() {
    const double opt = oracle_for("office");
    TrainConfig cfg;
    cfg.K = 5;
    cfg.max_timestep = 1000;
    cfg.max_episode = kOfficeBudget / cfg.max_timestep;
    Verdict o;
    o.detail = "optimum " + fmt(opt) + ";";
    std::vector<std::pair<Algorithm, double>> medians;
    for (Algorithm algo : {Algorithm::KC, Algorithm::CF, Algorithm::CFKC}) {
        const auto runs = train_seeds("office", algo, cfg);
        std::vector<double> steps;
        for (const auto& r : runs) {
            const auto s = convergence_step(r.result.curve, opt, kOfficeTol);
            // Unconverged seeds count as infinitely slow for the median.
            steps.push_back(s && *s <= kOfficeBudget ? static_cast<double>(*s) : INFINITY);
        }
        const auto ok = static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](double s) { return std::isfinite(s); }));
        std::sort(steps.begin(), steps.end());
        const double median = (steps[kSeeds / 2 - 1] + steps[kSeeds / 2]) / 2;
        medians.emplace_back(algo, median);
        o.pass = o.pass && ok >= kSeedQuorum;
        o.detail += " " + std::string(algorithm_name(algo)) + " " + std::to_string(ok) + "/" + std::to_string(kSeeds) +
                    " median " + (std::isfinite(median) ? std::to_string(static_cast<std::uint64_t>(median)) : "inf");
    }
    const double cfkc = medians.back().second;
    const bool fastest = std::isfinite(cfkc) && cfkc < medians[0].second && cfkc < medians[1].second;
    o.pass = o.pass && fastest;
    o.detail += fastest ? "; cf-kc median strictly smallest" : "; cf-kc median not strictly smallest";
    return o;
}

// -- 5 ----------------------------------------------------------------------

Verdict gate_sensitivity() {
    const double opt = oracle_for("gate");
    Verdict o;
    o.detail = "kc;";
    const auto run = [&](const std::string& param, double value) {
        return train_seeds("gate", Algorithm::KC, with_override(TrainConfig{}, param, value));
    };
    for (auto [param, value] : {std::pair{"U", 0.5}, {"gamma", 0.9}}) {
        const auto runs = run(param, value);
        const auto below = count_if_runs(runs, [&](const SeedRun& r) { return final_value(r) <= opt - kSensitivityGap; });
        o.pass = o.pass && below * 2 > kSeeds;
        std::ostringstream os;
        os << " " << param << "=" << value << " below " << below << "/" << kSeeds;
        o.detail += os.str();
    }
    for (auto [param, value] : {std::pair{"U", 0.01}, {"gamma", 0.995}, {"K", 5.0}, {"K", 20.0}}) {
        const auto runs = run(param, value);
        const auto near = count_if_runs(runs, [&](const SeedRun& r) { return std::abs(final_value(r) - opt) <= kGateTol; });
        o.pass = o.pass && near >= kSeedQuorum;
        std::ostringstream os;
        os << " " << param << "=" << value << " near " << near << "/" << kSeeds;
        o.detail += os.str();
    }
    return o;
}

// -- 6 ----------------------------------------------------------------------

Verdict reward_identities() {
    Verdict o;
    // One state with a self-loop; the automaton guesses once into an accepting state that reads anything.
    const LabeledMdp env = load_mdp("states: 1\ninitial: 0\nactions: stay\nedge: 0 stay 0 1\n");
    const Ldba aut = parse_ldba("ap:\nstates: 2\ninitial: 0\nnondet: 0\naccepting: 1\nedge: 0 eps 1\nedge: 1 true 1\n");
    double worst_telescope = 0.0;
    for (auto [K, U] : {std::pair{10u, 0.1}, {5u, 0.5}, {0u, 0.05}, {1u, 1.0}}) {
        const auto p = make_product(env, aut, K, RewardSchedule::linear(K, U), 0.99);
        Rng rng(0);
        ProductState st = p.initial_state();
        double ret = 0.0, disc = 1.0;
        for (std::size_t t = 0; t < 10'000; ++t) {
            const auto r = p.step(st, t == 0 ? ProductAction::epsilon(1) : ProductAction::env(0), rng);
            ret += disc * r.reward;
            disc *= r.discount;
            st = r.next;
        }
        worst_telescope = std::max(worst_telescope, std::abs(ret - 1.0));
    }

    Rng rng(6);
    double lo = 0.0, hi = 0.0;
    std::size_t walks = 0, walk_violations = 0;
    for (std::size_t i = 0; i < 200; ++i) {
        const auto p = random_product(rng);
        for (int w = 0; w < 5; ++w, ++walks) {
            const auto path = random_walk(p, rng, 2000);
            lo = std::min(lo, path.discounted_return);
            hi = std::max(hi, path.discounted_return);
            walk_violations += path.violations.size();
        }
    }
    const auto gate = make_product(build_probabilistic_gate(), shipped_automaton("gate"), 10, RewardSchedule::linear(10, 0.1), 0.99);
    for (int w = 0; w < 200; ++w, ++walks) {
        const auto path = random_walk(gate, rng, 10'000);
        lo = std::min(lo, path.discounted_return);
        hi = std::max(hi, path.discounted_return);
        walk_violations += path.violations.size();
    }

    const auto adv = advise_parameters(8, 0.8, 1.0);
    const bool advisor_ok = std::abs(adv.U - 0.1) <= kAdvisorTol && std::abs(adv.gamma - 0.95) <= kAdvisorTol;

    o.pass = worst_telescope <= kTelescopeTol && lo >= 0.0 && hi <= 1.0 + kReturnSlack && walk_violations == 0 &&
             advisor_ok;
    std::ostringstream os;
    os << "telescoping error " << worst_telescope << "; " << walks << " walks, returns in [" << lo << ", " << hi
       << "], " << walk_violations << " rule violations; advisor (" << adv.U << ", " << adv.gamma << ")";
    o.detail = os.str();
    return o;
}

// -- 7 ----------------------------------------------------------------------

Verdict product_invariants() {
    std::size_t violations = 0, products = 0;
    std::string first;
    const auto check = [&](const ProductMdp& p) {
        ++products;
        const auto v = product_violations(p);
        if (!v.empty() && first.empty()) first = v.front();
        violations += v.size();
    };
    const LabeledMdp gate = build_probabilistic_gate();
    const Ldba aut = shipped_automaton("gate");
    for (std::uint32_t K : {0u, 1u, 5u, 10u}) check(make_product(gate, aut, K, RewardSchedule::linear(K, 0.1), 0.99));
    Rng rng(7);
    for (std::size_t i = 0; i < kInvariantProducts; ++i) check(random_product(rng));
    Verdict o;
    o.pass = violations == 0;
    o.detail = std::to_string(products) + " products, " + std::to_string(violations) + " violations" +
               (first.empty() ? "" : " (first: " + first + ")");
    return o;
}

// -- 8 ----------------------------------------------------------------------

Verdict prism_round_trip() {
    const LabeledMdp env = build_probabilistic_gate();
    const Ldba aut = shipped_automaton("gate");
    const auto opt = solve_optimal(env, aut);
    const auto chain = induce_chain(env, aut, opt.witness);
    const std::string text = export_prism(chain, label_map_of(env));
    const auto back = chain_from_prism(parse_prism(text), aut.accepting);
    const bool equal = structurally_equal(chain, back, kPrismTol);
    const bool shape = text.rfind("dtmc", 0) == 0 && text.find("module ProductMDP") != std::string::npos &&
                       text.find("\nlabel ") != std::string::npos;
    const double p = satisfaction_probability(back);
    Verdict o;
    o.pass = equal && shape;
    o.detail = std::to_string(chain.size()) + " nodes, structural match " + (equal ? "yes" : "no") + ", grammar " +
               (shape ? "ok" : "bad") + ", re-parsed probability " + fmt(p);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    int criterion = 0;
    app.add_option("--criterion", criterion, "criterion to run (1-8); all when omitted")->check(CLI::Range(1, 8));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::function<Verdict()>> checks = {oracle_vs_enumeration, gate_convergence,
                                                           frozen_lake_efficiency, office_convergence,
                                                           gate_sensitivity,       reward_identities,
                                                           product_invariants,     prism_round_trip};
    bool all = true;
    for (int n = 1; n <= 8; ++n) {
        if (criterion != 0 && n != criterion) continue;
        const auto t0 = Clock::now();
        Verdict o;
        try {
            o = checks[n - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %d: %s (%s; %.1fs)\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
