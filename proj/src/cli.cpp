#include "mhb/cli.hpp"

#include <optional>
#include <string>

#include "CLI11.hpp"

#include "mhb/concentration.hpp"
#include "mhb/error.hpp"
#include "mhb/harness.hpp"
#include "mhb/io.hpp"

namespace mhb::cli {

namespace {

using io::Json;

struct BoundArgs {
  std::string chain;
  std::string rewards;
  std::uint64_t n = 0;
  std::optional<double> t;
  std::optional<double> eps;
  std::optional<double> delta;
  bool mean_form = false;
  bool pair = false;
  bool invert = false;
};

struct BanditArgs {
  std::string instance;
  std::optional<double> eps;
  std::optional<double> delta;
  std::uint64_t horizon = 0;
  std::string beta = "auto";
  bool force = false;
  std::uint64_t runs = 1;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  unsigned threads = 1;
};

Json run_bound(const BoundArgs& a) {
  const MarkovChain chain = io::load_chain(a.chain);
  double range = 0.0;
  double hit = 0.0;
  if (a.pair) {
    const PairProblem lifted = lift_pair_problem(chain, io::load_pair_reward(a.rewards));
    range = lifted.reward.range();
    hit = max_hitting_time(lifted.pairs.chain);
  } else {
    const RewardFunction f = io::load_reward(a.rewards);
    if (f.size() != chain.n_states()) {
      throw Error(ErrorCode::BadReward,
                  "reward function length differs from the number of states");
    }
    range = f.range();
    hit = max_hitting_time(chain);
  }

  if (a.invert) {
    if (!a.eps || !a.delta) {
      throw Error(ErrorCode::BadParameter, "--invert needs --eps and --delta");
    }
    return Json{{"n_required", invert_for_n(range, hit, *a.eps, *a.delta)}};
  }
  if (a.n == 0) throw Error(ErrorCode::BadParameter, "--n must be positive");
  const auto spec = a.pair ? HoeffdingBoundSpec::for_pair_chain(a.n, range, hit)
                           : HoeffdingBoundSpec::for_chain(a.n, range, hit);
  BoundForm form;
  double deviation;
  if (a.mean_form) {
    if (!a.eps) throw Error(ErrorCode::BadParameter, "--mean-form needs --eps");
    form = a.pair ? BoundForm::PairMeanForm : BoundForm::MeanForm;
    deviation = *a.eps;
  } else {
    if (!a.t) throw Error(ErrorCode::BadParameter, "sum form needs --t");
    form = a.pair ? BoundForm::PairSumForm : BoundForm::SumForm;
    deviation = *a.t;
  }
  return Json{{"nu_sq", spec.nu_sq()},
              {"bound", hoeffding_bound(spec, TailQuery(deviation, form))},
              {"hit", hit},
              {"form", to_string(form)}};
}

harness::ExperimentConfig bandit_config(const BanditArgs& a, bool ucb) {
  harness::ExperimentConfig c;
  c.kind = ucb ? harness::ExperimentKind::BanditUCB
               : harness::ExperimentKind::BanditME;
  c.id = ucb ? "bandit_ucb" : "bandit_me";
  c.instance = a.instance;
  c.runs = a.runs;
  c.horizon = a.horizon;
  if (!ucb) {
    if (!a.eps || !a.delta) {
      throw Error(ErrorCode::ConfigParse, "bandit me needs --eps and --delta");
    }
    c.epsilon = *a.eps;
    c.delta = *a.delta;
  }
  if (a.beta == "auto") {
    c.beta.automatic = true;
  } else {
    c.beta.automatic = false;
    try {
      std::size_t used = 0;
      c.beta.value = std::stod(a.beta, &used);
      if (used != a.beta.size()) throw std::invalid_argument(a.beta);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigParse, "--beta must be a number or auto");
    }
  }
  c.beta.force = a.force;
  if (!a.seed) throw Error(ErrorCode::ConfigParse, "--seed is required");
  c.seed = *a.seed;
  c.parallelism = a.threads;
  c.output = a.out;
  if (a.format == "json") {
    c.format = harness::OutputFormat::Json;
  } else if (a.format != "csv") {
    throw Error(ErrorCode::ConfigParse, "--format must be csv or json");
  }
  return c;
}

void add_bandit_options(CLI::App& cmd, BanditArgs& a, bool ucb) {
  cmd.add_option("--instance", a.instance, "Bandit instance JSON")->required();
  if (ucb) {
    cmd.add_option("--horizon", a.horizon, "Horizon T")->required();
  } else {
    cmd.add_option("--eps", a.eps, "Accuracy epsilon");
    cmd.add_option("--delta", a.delta, "Confidence delta");
  }
  cmd.add_option("--beta", a.beta, "Exploration parameter, or auto");
  cmd.add_flag("--force", a.force, "Allow beta below the theoretical floor");
  cmd.add_option("--runs", a.runs, "Independent runs");
  cmd.add_option("--seed", a.seed, "Master seed");
  cmd.add_option("--out", a.out, "Per-run output file");
  cmd.add_option("--format", a.format, "csv or json");
  cmd.add_option("--threads", a.threads, "Worker threads");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Hitting-time Hoeffding bounds and Markovian bandits", "mhb"};
  app.require_subcommand(1);

  std::string analyze_chain;
  bool analyze_pair = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "Analyze a chain");
  analyze_cmd->add_option("--chain", analyze_chain, "Chain JSON")->required();
  analyze_cmd->add_flag("--pair", analyze_pair, "Also analyze the pair chain");

  BoundArgs bound;
  auto* bound_cmd = app.add_subcommand("bound", "Evaluate or invert the bound");
  bound_cmd->add_option("--chain", bound.chain, "Chain JSON")->required();
  bound_cmd->add_option("--f", bound.rewards, "Reward JSON")->required();
  bound_cmd->add_option("--n", bound.n, "Number of samples");
  bound_cmd->add_option("--t", bound.t, "Deviation of the sum");
  bound_cmd->add_flag("--mean-form", bound.mean_form, "Bound the mean instead");
  bound_cmd->add_option("--eps", bound.eps, "Deviation of the mean");
  bound_cmd->add_flag("--pair", bound.pair, "Reward is a function of transitions");
  bound_cmd->add_flag("--invert", bound.invert, "Solve for the required n");
  bound_cmd->add_option("--delta", bound.delta, "Target failure probability");

  std::string config_path;
  unsigned verify_threads = 0;
  auto* verify_cmd = app.add_subcommand("verify", "Run an experiment config");
  verify_cmd->add_option("--config", config_path, "Experiment JSON")->required();
  verify_cmd->add_option("--threads", verify_threads, "Worker threads");

  auto* bandit_cmd = app.add_subcommand("bandit", "Run a bandit algorithm");
  bandit_cmd->require_subcommand(1);
  BanditArgs me_args;
  BanditArgs ucb_args;
  auto* me_cmd = bandit_cmd->add_subcommand("me", "Median elimination");
  add_bandit_options(*me_cmd, me_args, false);
  auto* ucb_cmd = bandit_cmd->add_subcommand("ucb", "UCB allocation rule");
  add_bandit_options(*ucb_cmd, ucb_args, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    Json result;
    if (*analyze_cmd) {
      harness::ExperimentConfig c;
      c.kind = harness::ExperimentKind::Analyze;
      c.id = "analyze";
      c.chain = analyze_chain;
      c.pair = analyze_pair;
      result = harness::run_config(c);
    } else if (*bound_cmd) {
      result = run_bound(bound);
    } else if (*verify_cmd) {
      harness::ExperimentConfig c = harness::load_config(config_path);
      if (verify_threads > 0) c.parallelism = verify_threads;
      result = harness::run_config(c);
    } else if (*me_cmd) {
      result = harness::run_config(bandit_config(me_args, false));
    } else if (*ucb_cmd) {
      result = harness::run_config(bandit_config(ucb_args, true));
    }
    out << io::dump(result, 2) << "\n";
    return 0;
  } catch (const Error& e) {
    err << io::dump(Json{{"error", to_string(e.code())},
                         {"module", module_of(e.code())},
                         {"message", e.what()}})
        << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << io::dump(Json{{"error", "Internal"},
                         {"module", "mhb"},
                         {"message", e.what()}})
        << "\n";
    return 3;
  }
}

}  // namespace mhb::cli
