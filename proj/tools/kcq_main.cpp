// kcq: train, evaluate and export LTL-guided Q-learning policies.

#include "kcq/check.hpp"
#include "kcq/errors.hpp"
#include "kcq/experiment.hpp"
#include "kcq/learn.hpp"
#include "kcq/oracle.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

struct Common {
    std::string env = "gate";
    std::string automaton;
};

void add_env_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--env", c.env, "gate | frozen-lake | office | path to a grid or MDP config")->capture_default_str();
    cmd->add_option("--automaton", c.automaton, "LDBA file (defaults to the shipped automaton of a named env)");
}

void add_train_options(CLI::App* cmd, kcq::ExperimentSpec& spec, std::string& algo) {
    auto& cfg = spec.cfg;
    cmd->add_option("--algo", algo, "kc | cf | cf-kc")->capture_default_str();
    cmd->add_option("--seeds", spec.num_seeds, "number of seeds")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "first seed")->capture_default_str();
    cmd->add_option("--out", spec.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--threads", spec.threads, "worker threads (0: all cores)")->capture_default_str();
    cmd->add_option("--alpha", cfg.alpha, "learning rate")->capture_default_str();
    cmd->add_option("--epsilon", cfg.epsilon, "exploration rate")->capture_default_str();
    cmd->add_option("-K,--K", cfg.K, "counter cap")->capture_default_str();
    cmd->add_option("-U,--U", cfg.U, "reward upper bound")->capture_default_str();
    cmd->add_option("--gamma", cfg.gamma, "discount for non-accepting steps")->capture_default_str();
    cmd->add_option("--episodes", cfg.max_episode, "number of episodes")->capture_default_str();
    cmd->add_option("--timesteps", cfg.max_timestep, "steps per episode")->capture_default_str();
    cmd->add_option("--eval-every", cfg.eval_every, "evaluation cadence in training steps")->capture_default_str();
}

kcq::Ldba automaton_for(const Common& c) {
    const auto path = c.automaton.empty() ? kcq::default_automaton(c.env) : std::filesystem::path(c.automaton);
    if (path.empty()) throw kcq::Error("--automaton is required for config-file environments");
    return kcq::load_ldba_file(path);
}

kcq::Policy policy_from_table(const std::string& qtable_path, const kcq::LabeledMdp& env, const kcq::Ldba& aut) {
    const auto product = kcq::make_product(env, aut, 0, kcq::RewardSchedule::constant(0, 1.0), 1.0);
    const auto table = kcq::parse_qtable(kcq::read_file(qtable_path));
    if (table.num_env_states() != product.num_env_states() || table.num_aut_states() != product.num_aut_states() ||
        table.num_slots() != product.num_slots())
        throw kcq::Error("Q-table dimensions do not match the environment and automaton");
    return kcq::greedy_policy(table, product);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"K-counter Q-learning for LTL objectives with exact policy checking"};
    app.require_subcommand(1);

    Common common;
    kcq::ExperimentSpec spec;
    std::string algo = "kc";
    std::string qtable_dir;
    std::vector<std::string> overrides;
    std::string qtable_path;
    std::string out_file;

    auto* train = app.add_subcommand("train", "train on several seeds and write the evaluation curve CSV");
    add_env_options(train, common);
    add_train_options(train, spec, algo);
    train->add_option("--save-qtables", qtable_dir, "directory for the final Q-table of each seed");

    auto* sens = app.add_subcommand("sensitivity", "baseline plus one run per parameter override");
    add_env_options(sens, common);
    add_train_options(sens, spec, algo);
    sens->add_option("--override", overrides, "PARAM=VALUE with PARAM among U, gamma, K")->required();

    auto* oracle = app.add_subcommand("oracle", "print the optimal satisfaction probability and accepting MECs");
    add_env_options(oracle, common);

    auto* exp = app.add_subcommand("export-prism", "export the greedy policy's induced chain as a PRISM DTMC");
    add_env_options(exp, common);
    exp->add_option("--qtable", qtable_path, "Q-table file")->required();
    exp->add_option("--out", out_file, "output file (stdout when omitted)");

    auto* check = app.add_subcommand("check", "satisfaction probability of a Q-table's greedy policy");
    add_env_options(check, common);
    check->add_option("--qtable", qtable_path, "Q-table file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        spec.env = common.env;
        spec.automaton = common.automaton;
        if (*train || *sens) spec.algo = kcq::parse_algorithm(algo);

        if (*train) {
            const auto runs = kcq::run_seeds(spec);
            std::filesystem::create_directories(spec.out_dir);
            const auto path = spec.out_dir / (std::string(kcq::algorithm_name(spec.algo)) + ".csv");
            std::ofstream(path, std::ios::binary) << kcq::format_curve_csv(spec.algo, runs);
            if (!qtable_dir.empty()) {
                std::filesystem::create_directories(qtable_dir);
                for (const auto& run : runs)
                    std::ofstream(std::filesystem::path(qtable_dir) / ("qtable_seed" + std::to_string(run.seed) + ".txt"),
                                  std::ios::binary)
                        << kcq::format_qtable(run.result.table);
            }
            for (const auto& run : runs) {
                const double last = run.result.curve.empty() ? 0.0 : run.result.curve.back().sat_prob;
                std::cout << "seed " << run.seed << ": final sat_prob " << last << "\n";
            }
            std::cout << "wrote " << path.string() << "\n";
        } else if (*sens) {
            std::vector<std::pair<std::string, double>> parsed;
            for (const auto& o : overrides) {
                const auto eq = o.find('=');
                if (eq == std::string::npos) throw kcq::Error("override must be PARAM=VALUE: " + o);
                parsed.emplace_back(o.substr(0, eq), std::stod(o.substr(eq + 1)));
            }
            for (const auto& p : kcq::run_sensitivity(spec, parsed)) std::cout << "wrote " << p.string() << "\n";
        } else if (*oracle) {
            const auto env = kcq::resolve_env(common.env);
            const auto aut = automaton_for(common);
            const auto res = kcq::solve_optimal(env, aut);
            std::cout << "optimal satisfaction probability: " << res.probability << "\n";
            std::size_t n_acc = 0;
            for (const auto& mec : res.mecs.mecs) {
                if (!mec.accepting) continue;
                ++n_acc;
                std::cout << "accepting MEC:";
                for (const auto& m : mec.members) std::cout << " (s=" << m.s << ",q=" << m.q << ")";
                std::cout << "\n";
            }
            std::cout << res.mecs.mecs.size() << " MECs, " << n_acc << " accepting\n";
        } else if (*exp || *check) {
            const auto env = kcq::resolve_env(common.env);
            const auto aut = automaton_for(common);
            const auto chain = kcq::induce_chain(env, aut, policy_from_table(qtable_path, env, aut));
            if (*check) {
                std::cout << kcq::satisfaction_probability(chain) << "\n";
            } else {
                const auto text = kcq::export_prism(chain, kcq::label_map_of(env));
                if (out_file.empty()) std::cout << text;
                else std::ofstream(out_file, std::ios::binary) << text;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
