#include "kcq/errors.hpp"
#include "kcq/experiment.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace kcq;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() / ("kcq_test_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

ExperimentSpec gate_spec(const std::filesystem::path& out) {
    ExperimentSpec spec;
    spec.env = "gate";
    spec.algo = Algorithm::KC;
    spec.cfg.max_episode = 1000;
    spec.num_seeds = 3;
    spec.out_dir = out;
    return spec;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("algorithm names") {
    for (auto a : {Algorithm::KC, Algorithm::CF, Algorithm::CFKC}) CHECK(parse_algorithm(algorithm_name(a)) == a);
    CHECK(algorithm_name(Algorithm::CFKC) == "cf-kc");
    CHECK_THROWS_AS(parse_algorithm("dqn"), Error);
    CHECK(effective_k(Algorithm::CF, 10) == 0);
    CHECK(effective_k(Algorithm::KC, 10) == 10);
    CHECK(effective_k(Algorithm::CFKC, 5) == 5);
}

TEST_CASE("environment selectors") {
    CHECK(resolve_env("gate") == build_probabilistic_gate());
    CHECK(resolve_env("frozen-lake").num_states == 64);
    CHECK(resolve_env("office").num_states == 120);
    CHECK(default_automaton("gate").filename() == "gate.ldba");
    CHECK(default_automaton("some/file.mdp").empty());
    CHECK_THROWS_AS(resolve_env("/nonexistent/env.mdp"), Error);

    ExperimentSpec spec;
    spec.env = (data_dir() / "envs" / "gate.grid").string();
    spec.num_seeds = 1;
    CHECK_THROWS_AS(run_seeds(spec), Error);  // config paths need an explicit automaton
}

TEST_CASE("CSV rows and layout") {
    TempDir tmp;
    const auto path = run_experiment(gate_spec(tmp.path));
    CHECK(path.filename() == "kc.csv");
    const std::string text = read_file(path);
    CHECK(text.find('\r') == std::string::npos);
    const auto rows = lines(text);
    REQUIRE(rows.size() == 1 + 3 * 10);
    CHECK(rows[0] == "algorithm,seed,step,sat_prob");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::size_t seed = (i - 1) / 10;
        const std::size_t step = ((i - 1) % 10 + 1) * 10000;
        CHECK(rows[i].rfind("kc," + std::to_string(seed) + "," + std::to_string(step) + ",", 0) == 0);
        const double p = std::stod(rows[i].substr(rows[i].rfind(',') + 1));
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("runs are deterministic regardless of thread count") {
    TempDir a, b;
    auto spec = gate_spec(a.path);
    spec.algo = Algorithm::CFKC;
    spec.threads = 1;
    const std::string first = read_file(run_experiment(spec));
    spec.out_dir = b.path;
    spec.threads = 3;
    const std::string second = read_file(run_experiment(spec));
    CHECK(first == second);
}

TEST_CASE("seed runs match single training runs") {
    auto spec = gate_spec(".");
    spec.algo = Algorithm::CF;
    spec.cfg.seed = 7;
    spec.num_seeds = 2;
    const auto runs = run_seeds(spec);
    REQUIRE(runs.size() == 2);
    CHECK(runs[1].seed == 8);
    const LabeledMdp env = build_probabilistic_gate();
    const Ldba aut = load_ldba_file(default_automaton("gate"));
    const auto product = build_product(env, aut, Algorithm::CF, spec.cfg);
    CHECK(product.K() == 0);
    TrainConfig cfg = spec.cfg;
    cfg.seed = 8;
    const auto single = run_training(product, Algorithm::CF, cfg, make_evaluator(product));
    CHECK(single.curve == runs[1].result.curve);
    CHECK(single.table == runs[1].result.table);
}

TEST_CASE("sensitivity writes one file per override") {
    TempDir tmp;
    auto spec = gate_spec(tmp.path);
    spec.num_seeds = 1;
    spec.cfg.max_episode = 100;
    const auto paths = run_sensitivity(spec, {{"U", 0.5}, {"gamma", 0.9}, {"K", 5}});
    REQUIRE(paths.size() == 4);
    std::vector<std::string> names;
    for (const auto& p : paths) names.push_back(p.filename().string());
    CHECK(names == std::vector<std::string>{"kc_baseline.csv", "kc_U=0.5.csv", "kc_gamma=0.9.csv", "kc_K=5.csv"});
    for (const auto& p : paths) CHECK(lines(read_file(p)).size() == 2);

    CHECK_THROWS_AS(with_override(spec.cfg, "alpha", 0.5), Error);
    CHECK_THROWS_AS(with_override(spec.cfg, "K", 2.5), Error);
    CHECK_THROWS_AS(with_override(spec.cfg, "U", 0.0), Error);
    CHECK(with_override(spec.cfg, "gamma", 0.995).gamma == 0.995);
}
