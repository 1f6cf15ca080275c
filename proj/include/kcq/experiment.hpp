#pragma once

// Multi-seed training runs with periodic exact evaluation and CSV output.

#include "kcq/automata.hpp"
#include "kcq/envs.hpp"
#include "kcq/learn.hpp"
#include "kcq/product.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kcq {

enum class Algorithm { KC, CF, CFKC };

std::string_view algorithm_name(Algorithm a);  // "kc", "cf", "cf-kc"
Algorithm parse_algorithm(std::string_view name);

/// Directory holding the shipped environment and automaton files.
std::filesystem::path data_dir();

std::string read_file(const std::filesystem::path& path);

/// "gate", "frozen-lake", "office", or a path to a grid / generic MDP config.
LabeledMdp resolve_env(const std::string& selector);

/// Shipped automaton for a named environment; empty for config paths.
std::filesystem::path default_automaton(const std::string& selector);

Ldba load_ldba_file(const std::filesystem::path& path);

/// Counter cap used by an algorithm (CF always runs with K = 0).
std::uint32_t effective_k(Algorithm algo, std::uint32_t K);

/// Product with the linear reward schedule for the algorithm's K.
ProductMdp build_product(const LabeledMdp& env, const Ldba& aut, Algorithm algo, const TrainConfig& cfg);

/// Satisfaction probability of a policy on the product's environment and automaton.
Evaluator make_evaluator(const ProductMdp& product);

TrainResult run_training(const ProductMdp& product, Algorithm algo, const TrainConfig& cfg, const Evaluator& evaluator);

struct ExperimentSpec {
    std::string env = "gate";
    std::string automaton;  // empty: default for the environment
    Algorithm algo = Algorithm::KC;
    TrainConfig cfg;
    std::size_t num_seeds = 20;
    std::filesystem::path out_dir = ".";
    std::size_t threads = 0;  // 0: hardware concurrency
    std::string tag;          // appended to the CSV file name
};

struct SeedRun {
    std::uint64_t seed;
    TrainResult result;
};

/// Trains every seed (cfg.seed + i). Runs are independent and ordered by seed.
std::vector<SeedRun> run_seeds(const ExperimentSpec& spec);

/// `algorithm,seed,step,sat_prob` rows, ordered by seed then step.
std::string format_curve_csv(Algorithm algo, const std::vector<SeedRun>& runs);

/// Runs the experiment and writes `<out>/<algo>[_<tag>].csv`; returns that path.
std::filesystem::path run_experiment(const ExperimentSpec& spec);

/// Baseline plus one run per (param, value) override, param among U, gamma, K.
/// Returns the written CSV paths, baseline first.
std::vector<std::filesystem::path> run_sensitivity(const ExperimentSpec& base,
                                                   const std::vector<std::pair<std::string, double>>& overrides);

/// Applies one sensitivity override to a config.
TrainConfig with_override(TrainConfig cfg, const std::string& param, double value);

}  // namespace kcq
