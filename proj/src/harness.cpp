#include "mhb/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "mhb/bandits.hpp"
#include "mhb/concentration.hpp"
#include "mhb/error.hpp"
#include "mhb/parallel.hpp"

namespace mhb::harness {

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigParse, what);
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "analyze") return ExperimentKind::Analyze;
  if (s == "bound_sweep") return ExperimentKind::BoundSweep;
  if (s == "tail_verify") return ExperimentKind::TailVerify;
  if (s == "bandit_me") return ExperimentKind::BanditME;
  if (s == "bandit_ucb") return ExperimentKind::BanditUCB;
  config_error("unknown experiment kind '" + s + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const Json& value) {
  if (!value.is_string()) config_error("file paths must be strings");
  std::filesystem::path p = value.get<std::string>();
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

template <typename T>
T get_as(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error(std::string("config field \"") + key + "\" has the wrong type");
  }
}

void require_file(const std::filesystem::path& p, const char* what) {
  if (p.empty()) config_error(std::string("config needs \"") + what + "\"");
}

template <typename T>
void require_increasing(const std::vector<T>& grid, const char* what) {
  if (grid.empty()) config_error(std::string(what) + " must be nonempty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i - 1] < grid[i])) {
      config_error(std::string(what) + " must be strictly increasing");
    }
  }
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json vector_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::string csv_cell(const Json& v) {
  if (v.is_number_float()) return io::format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// --- Analyze ---------------------------------------------------------------

ExperimentOutput run_analyze(const ExperimentConfig& config) {
  const MarkovChain chain = io::load_chain(config.chain);
  const ChainAnalysis analysis = analyze(chain);
  ExperimentOutput out;
  Json& s = out.summary;
  s["id"] = config.id;
  s["kind"] = to_string(config.kind);
  s["n_states"] = chain.n_states();
  s["irreducible"] = analysis.irreducible;
  out.table.columns = {"n_states", "irreducible", "period", "hit"};
  if (!analysis.irreducible) {
    s["period"] = nullptr;
    s["hit"] = nullptr;
    out.table.rows.push_back({chain.n_states(), false, nullptr, nullptr});
    return out;
  }
  const HittingTimeTable table = hitting_times(chain);
  s["period"] = *analysis.period;
  s["hit"] = table.max_hit;
  s["stationary"] = vector_json(*analysis.stationary);
  s["max_residual"] = table.max_residual;
  std::vector<Json> row{chain.n_states(), true, *analysis.period,
                        table.max_hit};
  if (config.pair) {
    const PairChain pairs = pair_chain(chain);
    const double pair_hit = max_hitting_time(pairs.chain);
    s["pair_states"] = pairs.pair_states.size();
    s["pair_hit"] = pair_hit;
    out.table.columns.push_back("pair_hit");
    row.push_back(pair_hit);
  }
  out.table.rows.push_back(std::move(row));
  return out;
}

// --- Bound sweeps and tail verification -------------------------------------

// The chain, reward and start the bound is evaluated on: the base chain, or
// the pair chain for functions of transitions.
struct BoundTarget {
  MarkovChain chain;
  std::optional<RewardFunction> reward;
  std::optional<Vector> start;  // absent: stationary start
  double hit = 0.0;
  bool lifted = false;
};

BoundTarget load_target(const ExperimentConfig& config) {
  require_file(config.chain, "chain");
  require_file(config.rewards, "rewards");
  const MarkovChain base = io::load_chain(config.chain);
  if (config.pair) {
    PairProblem lifted = lift_pair_problem(base, io::load_pair_reward(config.rewards));
    BoundTarget target{lifted.pairs.chain, lifted.reward, std::nullopt,
                       max_hitting_time(lifted.pairs.chain), true};
    if (config.start) {
      target.start = lifted.pairs.lift_distribution(
          base, base.with_initial(to_vector(*config.start)).initial().value());
    }
    return target;
  }
  RewardFunction reward = io::load_reward(config.rewards);
  BoundTarget target{base, std::move(reward), std::nullopt,
                     max_hitting_time(base), false};
  if (config.start) {
    target.start = base.with_initial(to_vector(*config.start)).initial();
  }
  return target;
}

BoundForm form_for(bool mean_form, bool lifted) {
  if (lifted) return mean_form ? BoundForm::PairMeanForm : BoundForm::PairSumForm;
  return mean_form ? BoundForm::MeanForm : BoundForm::SumForm;
}

ExperimentOutput run_bound_sweep(const ExperimentConfig& config) {
  const BoundTarget target = load_target(config);
  const BoundForm form = form_for(config.mean_form, target.lifted);
  ExperimentOutput out;
  out.table.columns = {"n", "deviation", "form", "hit", "nu_sq", "bound"};
  for (std::uint64_t n : config.n_grid) {
    const auto spec =
        target.lifted
            ? HoeffdingBoundSpec::for_pair_chain(n, target.reward->range(), target.hit)
            : HoeffdingBoundSpec::for_chain(n, target.reward->range(), target.hit);
    for (double dev : config.t_grid) {
      const double bound = hoeffding_bound(spec, TailQuery(dev, form));
      out.table.rows.push_back(
          {n, dev, to_string(form), target.hit, spec.nu_sq(), bound});
    }
  }
  out.summary["id"] = config.id;
  out.summary["kind"] = to_string(config.kind);
  out.summary["form"] = to_string(form);
  out.summary["hit"] = target.hit;
  out.summary["rows"] = out.table.rows.size();
  return out;
}

ExperimentOutput run_tail_verify(const ExperimentConfig& config) {
  const BoundTarget target = load_target(config);
  const BoundForm form = form_for(config.mean_form, target.lifted);
  const unsigned threads = effective_parallelism(config);
  const Vector stationary = stationary_distribution(target.chain);
  const Vector& exact_start = target.start ? *target.start : stationary;

  ExperimentOutput out;
  out.table.columns = {"n",    "deviation",      "t",     "form",  "mode",
                       "tail", "standard_error", "bound", "ratio", "hit"};
  std::size_t violations = 0;
  std::size_t exact_rows = 0;
  double max_ratio = 0.0;
  std::uint64_t row_index = 0;
  for (std::uint64_t n : config.n_grid) {
    const auto spec =
        target.lifted
            ? HoeffdingBoundSpec::for_pair_chain(n, target.reward->range(), target.hit)
            : HoeffdingBoundSpec::for_chain(n, target.reward->range(), target.hit);
    const double paths = std::pow(static_cast<double>(target.chain.n_states()),
                                  static_cast<double>(n));
    const bool exact = config.mode == TailMode::Exact ||
                       (config.mode == TailMode::Auto && paths <= kMaxEnumeratedPaths);
    for (double dev : config.t_grid) {
      const double t = config.mean_form ? static_cast<double>(n) * dev : dev;
      const double bound = hoeffding_bound(spec, TailQuery(dev, form));
      double tail = 0.0;
      double se = 0.0;
      if (exact) {
        tail = exact_tail(target.chain, *target.reward, n, t, exact_start);
        ++exact_rows;
        if (tail > bound) ++violations;
      } else {
        const TailEstimate est = empirical_tail(
            target.chain, *target.reward, n, t, config.trials,
            derived_seed(config.seed, row_index),
            target.start ? &*target.start : nullptr, threads);
        tail = est.estimate;
        se = est.standard_error;
        if (tail > bound + 4.0 * se) ++violations;
      }
      const double ratio = tail / bound;
      max_ratio = std::max(max_ratio, ratio);
      out.table.rows.push_back({n, dev, t, to_string(form),
                                exact ? "exact" : "empirical", tail, se, bound,
                                ratio, target.hit});
      ++row_index;
    }
  }
  Json& s = out.summary;
  s["id"] = config.id;
  s["kind"] = to_string(config.kind);
  s["form"] = to_string(form);
  s["hit"] = target.hit;
  s["rows"] = out.table.rows.size();
  s["exact_rows"] = exact_rows;
  s["empirical_rows"] = out.table.rows.size() - exact_rows;
  s["violations"] = violations;
  s["max_ratio"] = max_ratio;
  return out;
}

// --- Bandits ---------------------------------------------------------------

BetaParameter me_beta(const BanditInstance& instance, const BetaPolicy& policy) {
  if (policy.automatic) return BetaParameter::auto_median_elimination(instance);
  return BetaParameter::for_median_elimination(instance, policy.value,
                                               policy.force);
}

BetaParameter ucb_beta(const BanditInstance& instance, const BetaPolicy& policy) {
  if (policy.automatic) return BetaParameter::auto_ucb(instance);
  return BetaParameter::for_ucb(instance, policy.value, policy.force);
}

ExperimentOutput run_bandit_me(const ExperimentConfig& config) {
  require_file(config.instance, "instance");
  const BanditInstance instance = io::load_instance(config.instance);
  const BetaParameter beta = me_beta(instance, config.beta);

  std::vector<MEResult> results(config.runs);
  parallel_for(config.runs, effective_parallelism(config), [&](std::size_t i) {
    RandomStream rng = seed_stream(config.seed, i);
    results[i] = median_elimination(instance, config.epsilon, config.delta,
                                    beta, rng);
    results[i].arms.clear();
    results[i].rounds.shrink_to_fit();
  });

  const SampleComplexityBound bound = me_sample_complexity_bound(
      instance.n_arms(), config.epsilon, config.delta, beta.beta);
  ExperimentOutput out;
  out.table.columns = {"run_id", "chosen_arm", "is_eps_good", "total_samples",
                       "rounds"};
  std::uint64_t failures = 0;
  std::uint64_t max_samples = 0;
  double sample_sum = 0.0;
  for (std::uint64_t i = 0; i < config.runs; ++i) {
    const MEResult& r = results[i];
    const bool good = is_eps_good(instance, r.chosen_arm, config.epsilon);
    failures += good ? 0 : 1;
    max_samples = std::max(max_samples, r.total_samples);
    sample_sum += static_cast<double>(r.total_samples);
    out.table.rows.push_back(
        {i, r.chosen_arm, good, r.total_samples, r.rounds.size()});
    out.trials.push_back(TrialRecord{
        config.id, i, derived_seed(config.seed, i),
        {{"chosen_arm", static_cast<double>(r.chosen_arm)},
         {"is_eps_good", good ? 1.0 : 0.0},
         {"total_samples", static_cast<double>(r.total_samples)},
         {"rounds", static_cast<double>(r.rounds.size())}}});
  }
  const Interval ci = wilson_interval(failures, config.runs);
  Json& s = out.summary;
  s["id"] = config.id;
  s["kind"] = to_string(config.kind);
  s["runs"] = config.runs;
  s["beta"] = beta.beta;
  s["beta_floor"] = beta.floor;
  s["satisfies_hypothesis"] = beta.satisfies_hypothesis;
  s["failures"] = failures;
  s["failure_rate"] =
      static_cast<double>(failures) / static_cast<double>(config.runs);
  s["wilson_ci"] = Json::array({ci.lower, ci.upper});
  s["mean_samples"] = sample_sum / static_cast<double>(config.runs);
  s["max_samples"] = max_samples;
  s["analytic_bound"] = bound.analytic;
  s["finite_accumulation"] = bound.finite_accumulation;
  s["within_analytic_bound"] = static_cast<double>(max_samples) <= bound.analytic;
  return out;
}

ExperimentOutput run_bandit_ucb(const ExperimentConfig& config) {
  require_file(config.instance, "instance");
  const BanditInstance instance = io::load_instance(config.instance);
  const BetaParameter beta = ucb_beta(instance, config.beta);
  if (config.horizon < instance.n_arms()) {
    throw Error(ErrorCode::HorizonTooSmall,
                "horizon must be at least the number of arms");
  }
  const auto checkpoints = ucb_checkpoints(config.horizon);

  struct Checkpointed {
    std::vector<Arm> arms;
    std::vector<double> regret;
  };
  std::vector<Checkpointed> results(config.runs);
  parallel_for(config.runs, effective_parallelism(config), [&](std::size_t i) {
    RandomStream rng = seed_stream(config.seed, i);
    const UCBTrace trace =
        ucb_run(instance, config.horizon, beta, rng, /*record_indices=*/false);
    for (std::uint64_t t : checkpoints) {
      results[i].arms.push_back(trace.chosen[t - 1]);
      results[i].regret.push_back(trace.regret_at(t));
    }
  });

  ExperimentOutput out;
  out.table.columns = {"run_id", "t", "chosen_arm", "cum_regret"};
  std::vector<double> mean_regret(checkpoints.size(), 0.0);
  for (std::uint64_t i = 0; i < config.runs; ++i) {
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      out.table.rows.push_back(
          {i, checkpoints[c], results[i].arms[c], results[i].regret[c]});
      mean_regret[c] += results[i].regret[c];
    }
    out.trials.push_back(TrialRecord{
        config.id, i, derived_seed(config.seed, i),
        {{"cum_regret", results[i].regret.back()}}});
  }
  Json curve = Json::array();
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    mean_regret[c] /= static_cast<double>(config.runs);
    curve.push_back(Json{{"t", checkpoints[c]}, {"mean_regret", mean_regret[c]}});
  }
  Json& s = out.summary;
  s["id"] = config.id;
  s["kind"] = to_string(config.kind);
  s["runs"] = config.runs;
  s["horizon"] = config.horizon;
  s["beta"] = beta.beta;
  s["beta_floor"] = beta.floor;
  s["satisfies_hypothesis"] = beta.satisfies_hypothesis;
  const double gamma = ucb_gamma(instance, beta.beta);
  s["gamma"] = gamma;
  s["mean_regret_at_T"] = mean_regret.back();
  if (gamma > 2.0) {
    s["regret_upper_bound"] =
        regret_upper_bound(instance, beta.beta, static_cast<double>(config.horizon));
  } else {
    s["regret_upper_bound"] = nullptr;
  }
  s["upper_bound_log_coefficient"] = regret_upper_constant(instance, beta.beta);
  const RegretLowerBound lower = regret_lower_bound_constant(instance);
  s["regret_lower_bound_constant"] = lower.constant;
  s["lower_bound_degenerate_arms"] = lower.degenerate_arms;
  s["mean_regret"] = std::move(curve);
  return out;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Analyze: return "analyze";
    case ExperimentKind::BoundSweep: return "bound_sweep";
    case ExperimentKind::TailVerify: return "tail_verify";
    case ExperimentKind::BanditME: return "bandit_me";
    case ExperimentKind::BanditUCB: return "bandit_ucb";
  }
  return "unknown";
}

ExperimentConfig parse_config(const Json& j,
                              const std::filesystem::path& base_dir) {
  if (!j.is_object()) config_error("config must be a JSON object");
  ExperimentConfig c;
  if (!j.contains("kind")) config_error("config needs \"kind\"");
  c.kind = parse_kind(get_as<std::string>(j, "kind"));
  if (j.contains("id")) c.id = get_as<std::string>(j, "id");
  if (j.contains("chain")) c.chain = resolve(base_dir, j.at("chain"));
  if (j.contains("rewards")) c.rewards = resolve(base_dir, j.at("rewards"));
  if (j.contains("instance")) c.instance = resolve(base_dir, j.at("instance"));
  if (j.contains("pair")) c.pair = get_as<bool>(j, "pair");
  if (j.contains("n_grid")) c.n_grid = get_as<std::vector<std::uint64_t>>(j, "n_grid");
  if (j.contains("t_grid")) c.t_grid = get_as<std::vector<double>>(j, "t_grid");
  if (j.contains("mean_form")) c.mean_form = get_as<bool>(j, "mean_form");
  if (j.contains("mode")) {
    const auto m = get_as<std::string>(j, "mode");
    if (m == "auto") c.mode = TailMode::Auto;
    else if (m == "exact") c.mode = TailMode::Exact;
    else if (m == "empirical") c.mode = TailMode::Empirical;
    else config_error("mode must be auto, exact or empirical");
  }
  if (j.contains("start") && !j.at("start").is_null()) {
    c.start = get_as<std::vector<double>>(j, "start");
  }
  if (j.contains("trials")) c.trials = get_as<std::uint64_t>(j, "trials");
  if (j.contains("runs")) c.runs = get_as<std::uint64_t>(j, "runs");
  if (j.contains("horizon")) c.horizon = get_as<std::uint64_t>(j, "horizon");
  if (j.contains("epsilon")) c.epsilon = get_as<double>(j, "epsilon");
  if (j.contains("delta")) c.delta = get_as<double>(j, "delta");
  if (j.contains("beta")) {
    const Json& b = j.at("beta");
    if (b.is_string() && b.get<std::string>() == "auto") {
      c.beta.automatic = true;
    } else if (b.is_number()) {
      c.beta.automatic = false;
      c.beta.value = b.get<double>();
    } else {
      config_error("beta must be a number or \"auto\"");
    }
  }
  if (j.contains("force")) c.beta.force = get_as<bool>(j, "force");
  if (!j.contains("seed")) config_error("config needs an explicit \"seed\"");
  c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("parallelism")) c.parallelism = get_as<unsigned>(j, "parallelism");
  if (j.contains("output")) c.output = resolve(base_dir, j.at("output"));
  if (j.contains("format")) {
    const auto f = get_as<std::string>(j, "format");
    if (f == "csv") c.format = OutputFormat::Csv;
    else if (f == "json") c.format = OutputFormat::Json;
    else config_error("format must be csv or json");
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(io::load_json(path), path.parent_path());
}

void validate_config(const ExperimentConfig& c) {
  if (c.trials < 1) config_error("trials must be at least 1");
  if (c.parallelism < 1) config_error("parallelism must be at least 1");
  switch (c.kind) {
    case ExperimentKind::Analyze:
      require_file(c.chain, "chain");
      break;
    case ExperimentKind::BoundSweep:
    case ExperimentKind::TailVerify:
      require_file(c.chain, "chain");
      require_file(c.rewards, "rewards");
      require_increasing(c.n_grid, "n_grid");
      require_increasing(c.t_grid, "t_grid");
      if (c.n_grid.front() < 1) config_error("n_grid entries must be positive");
      if (!(c.t_grid.front() > 0.0)) config_error("t_grid entries must be positive");
      break;
    case ExperimentKind::BanditME:
      require_file(c.instance, "instance");
      if (c.runs < 1) config_error("runs must be at least 1");
      if (!(c.epsilon > 0.0)) config_error("epsilon must be positive");
      if (!(c.delta > 0.0 && c.delta < 1.0)) config_error("delta must lie in (0, 1)");
      break;
    case ExperimentKind::BanditUCB:
      require_file(c.instance, "instance");
      if (c.runs < 1) config_error("runs must be at least 1");
      if (c.horizon < 2) config_error("horizon must be at least 2");
      break;
  }
}

unsigned effective_parallelism(const ExperimentConfig& config) {
  if (const char* env = std::getenv("MHB_THREADS"); env != nullptr && *env) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0 || v > 4096) {
      config_error("MHB_THREADS must be a positive integer");
    }
    return static_cast<unsigned>(v);
  }
  return config.parallelism;
}

double TrialRecord::metric(const std::string& name) const {
  for (const auto& [key, value] : metrics) {
    if (key == name) return value;
  }
  throw Error(ErrorCode::BadParameter, "trial has no metric '" + name + "'");
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out += ',';
    out += columns[c];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv_cell(row[c]);
    }
    out += '\n';
  }
  return out;
}

Json Table::to_json() const {
  Json arr = Json::array();
  for (const auto& row : rows) {
    Json obj = Json::object();
    for (std::size_t c = 0; c < columns.size(); ++c) obj[columns[c]] = row[c];
    arr.push_back(std::move(obj));
  }
  return arr;
}

std::string ExperimentOutput::render(OutputFormat format) const {
  if (format == OutputFormat::Csv) return table.to_csv();
  return io::dump(Json{{"summary", summary}, {"rows", table.to_json()}}, 2) + "\n";
}

ExperimentOutput execute(const ExperimentConfig& config) {
  validate_config(config);
  switch (config.kind) {
    case ExperimentKind::Analyze: return run_analyze(config);
    case ExperimentKind::BoundSweep: return run_bound_sweep(config);
    case ExperimentKind::TailVerify: return run_tail_verify(config);
    case ExperimentKind::BanditME: return run_bandit_me(config);
    case ExperimentKind::BanditUCB: return run_bandit_ucb(config);
  }
  config_error("unknown experiment kind");
}

Json run_config(const ExperimentConfig& config) {
  const ExperimentOutput out = execute(config);
  if (!config.output.empty()) {
    if (config.output.has_parent_path()) {
      std::filesystem::create_directories(config.output.parent_path());
    }
    std::ofstream file(config.output, std::ios::binary);
    if (!file) {
      throw Error(ErrorCode::FileNotFound,
                  "cannot write '" + config.output.string() + "'");
    }
    file << out.render(config.format);
    Json meta{{"id", config.id},
              {"kind", to_string(config.kind)},
              {"created_at", utc_timestamp()},
              {"parallelism", effective_parallelism(config)},
              {"seed", config.seed},
              {"output", config.output.filename().string()}};
    std::ofstream sidecar(config.output.string() + ".meta.json", std::ios::binary);
    sidecar << io::dump(meta, 2) << "\n";
  }
  return out.summary;
}

std::vector<std::uint64_t> ucb_checkpoints(std::uint64_t horizon) {
  std::vector<std::uint64_t> points;
  for (std::uint64_t t = 1; t < horizon; t *= 2) points.push_back(t);
  points.push_back(horizon);
  return points;
}

}  // namespace mhb::harness
