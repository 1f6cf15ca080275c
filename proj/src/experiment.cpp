#include "kcq/experiment.hpp"
#include "kcq/check.hpp"
#include "kcq/errors.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace kcq {

std::string_view algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::KC: return "kc";
        case Algorithm::CF: return "cf";
        case Algorithm::CFKC: return "cf-kc";
    }
    return "kc";
}

Algorithm parse_algorithm(std::string_view name) {
    if (name == "kc") return Algorithm::KC;
    if (name == "cf") return Algorithm::CF;
    if (name == "cf-kc" || name == "cfkc") return Algorithm::CFKC;
    throw Error("unknown algorithm '" + std::string(name) + "' (expected kc, cf or cf-kc)");
}

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("KCQ_DATA_DIR"); env && *env) return env;
    return KCQ_DATA_DIR;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

LabeledMdp resolve_env(const std::string& selector) {
    if (selector == "gate") return build_probabilistic_gate();
    if (selector == "frozen-lake")
        return build_frozen_lake(parse_grid_spec(read_file(data_dir() / "envs" / "frozen_lake.grid")));
    if (selector == "office")
        return build_office_world(parse_grid_spec(read_file(data_dir() / "envs" / "office.grid")));
    return load_mdp(read_file(selector));
}

std::filesystem::path default_automaton(const std::string& selector) {
    if (selector == "gate") return data_dir() / "automata" / "gate.ldba";
    if (selector == "frozen-lake") return data_dir() / "automata" / "frozen_lake.ldba";
    if (selector == "office") return data_dir() / "automata" / "office.ldba";
    return {};
}

Ldba load_ldba_file(const std::filesystem::path& path) { return parse_ldba(read_file(path)); }

std::uint32_t effective_k(Algorithm algo, std::uint32_t K) { return algo == Algorithm::CF ? 0 : K; }

ProductMdp build_product(const LabeledMdp& env, const Ldba& aut, Algorithm algo, const TrainConfig& cfg) {
    const std::uint32_t K = effective_k(algo, cfg.K);
    return make_product(env, aut, K, RewardSchedule::linear(K, cfg.U), cfg.gamma);
}

Evaluator make_evaluator(const ProductMdp& product) {
    return [&product](const Policy& pi) { return satisfaction_probability(induce_chain(product, pi)); };
}

TrainResult run_training(const ProductMdp& product, Algorithm algo, const TrainConfig& cfg, const Evaluator& evaluator) {
    TrainConfig c = cfg;
    c.K = effective_k(algo, cfg.K);
    return algo == Algorithm::KC ? train_kc(product, c, evaluator) : train_cf_kc(product, c, evaluator);
}

std::vector<SeedRun> run_seeds(const ExperimentSpec& spec) {
    if (spec.num_seeds == 0) throw Error("at least one seed is required");
    validate_config(spec.cfg);
    const LabeledMdp env = resolve_env(spec.env);
    const std::filesystem::path aut_path =
        spec.automaton.empty() ? default_automaton(spec.env) : std::filesystem::path(spec.automaton);
    if (aut_path.empty()) throw Error("an automaton file is required for environment '" + spec.env + "'");
    const Ldba aut = load_ldba_file(aut_path);
    const ProductMdp product = build_product(env, aut, spec.algo, spec.cfg);

    std::vector<SeedRun> runs(spec.num_seeds);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        const Evaluator eval = make_evaluator(product);
        for (std::size_t i = next++; i < spec.num_seeds; i = next++) {
            TrainConfig cfg = spec.cfg;
            cfg.seed = spec.cfg.seed + i;
            runs[i] = {cfg.seed, run_training(product, spec.algo, cfg, eval)};
        }
    };
    std::size_t threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, spec.num_seeds);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return runs;
}

std::string format_curve_csv(Algorithm algo, const std::vector<SeedRun>& runs) {
    std::string out = "algorithm,seed,step,sat_prob\n";
    char buf[64];
    for (const auto& run : runs) {
        for (const auto& pt : run.result.curve) {
            const auto res = std::to_chars(buf, buf + sizeof buf, pt.sat_prob);
            out += std::string(algorithm_name(algo)) + "," + std::to_string(run.seed) + "," + std::to_string(pt.step) +
                   "," + std::string(buf, res.ptr) + "\n";
        }
    }
    return out;
}

std::filesystem::path run_experiment(const ExperimentSpec& spec) {
    const auto runs = run_seeds(spec);
    std::filesystem::create_directories(spec.out_dir);
    std::string name(algorithm_name(spec.algo));
    if (!spec.tag.empty()) name += "_" + spec.tag;
    const auto path = spec.out_dir / (name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << format_curve_csv(spec.algo, runs);
    return path;
}

TrainConfig with_override(TrainConfig cfg, const std::string& param, double value) {
    if (param == "U") cfg.U = value;
    else if (param == "gamma") cfg.gamma = value;
    else if (param == "K") {
        if (value < 0 || value != std::floor(value)) throw Error("K must be a non-negative integer");
        cfg.K = static_cast<std::uint32_t>(value);
    } else {
        throw Error("sensitivity parameter must be U, gamma or K (got '" + param + "')");
    }
    validate_config(cfg);
    return cfg;
}

std::vector<std::filesystem::path> run_sensitivity(const ExperimentSpec& base,
                                                   const std::vector<std::pair<std::string, double>>& overrides) {
    std::vector<ExperimentSpec> specs;
    ExperimentSpec baseline = base;
    if (baseline.tag.empty()) baseline.tag = "baseline";
    specs.push_back(baseline);
    for (const auto& [param, value] : overrides) {
        ExperimentSpec s = base;
        s.cfg = with_override(base.cfg, param, value);
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, value);
        s.tag = param + "=" + std::string(buf, res.ptr);
        specs.push_back(std::move(s));
    }
    std::vector<std::filesystem::path> paths;
    for (const auto& s : specs) paths.push_back(run_experiment(s));
    return paths;
}

}  // namespace kcq
