// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "mhb/bandits.hpp"
#include "mhb/chain.hpp"
#include "mhb/concentration.hpp"
#include "mhb/error.hpp"
#include "mhb/harness.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace mhb;
using mhb::test::random_irreducible;
using mhb::test::two_state;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

/// Runs one criterion, prints its line, and folds in the runtime limit.
bool criterion(const char* id, const char* title, double limit_seconds,
               const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = Outcome{false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  const bool in_time = limit_seconds <= 0.0 || secs < limit_seconds;
  const bool pass = o.pass && in_time;
  char timing[96];
  if (limit_seconds > 0.0) {
    std::snprintf(timing, sizeof timing, "%.2f s, limit %.0f s", secs, limit_seconds);
  } else {
    std::snprintf(timing, sizeof timing, "%.2f s", secs);
  }
  std::printf("%s %s  %s: %s (%s)\n", id, pass ? "PASS" : "FAIL", title, o.detail.c_str(),
              timing);
  std::fflush(stdout);
  return pass;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

/// Fixed suite of small chains, five on two states and five on three.
std::vector<MarkovChain> small_chain_suite() {
  std::vector<MarkovChain> chains;
  chains.push_back(two_state(0.5, 0.25));
  chains.push_back(two_state(1.0, 1.0));
  chains.push_back(two_state(0.1, 0.9));
  chains.push_back(two_state(0.05, 0.02));
  chains.push_back(two_state(0.7, 0.7));
  chains.push_back(mhb::test::cycle_walk(3));
  Matrix rotation(3, 3);
  rotation << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  chains.push_back(MarkovChain::validate(rotation));
  std::mt19937_64 gen(31337);
  for (double density : {0.2, 0.5, 1.0}) chains.push_back(random_irreducible(3, gen, density));
  return chains;
}

/// Five rewards on [0, 1] for a chain on `n` states.
std::vector<RewardFunction> reward_suite(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RewardFunction> out;
  std::vector<double> indicator(n, 0.0);
  indicator.back() = 1.0;
  out.emplace_back(indicator, 0.0, 1.0);
  std::vector<double> ramp(n);
  for (std::size_t i = 0; i < n; ++i) ramp[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  out.emplace_back(ramp, 0.0, 1.0);
  std::vector<double> flat(n, 0.5);
  flat.front() = 0.0;
  out.emplace_back(flat, -1.0, 1.0);
  for (int k = 0; k < 2; ++k) {
    std::vector<double> v(n);
    for (auto& x : v) x = u(gen);
    out.emplace_back(v, 0.0, 1.0);
  }
  return out;
}

/// Five transition rewards on [0, 1] over the support of `chain`.
std::vector<PairRewardFunction> pair_reward_suite(const MarkovChain& chain,
                                                  std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Transition> support;
  for (State x = 0; x < chain.n_states(); ++x)
    for (State y = 0; y < chain.n_states(); ++y)
      if (chain.prob(x, y) > 0.0) support.emplace_back(x, y);
  std::vector<PairRewardFunction> out(5);
  for (auto& f : out) f.lower = 0.0, f.upper = 1.0;
  for (const auto& [x, y] : support) {
    out[0].values[{x, y}] = x == y ? 1.0 : 0.0;
    out[1].values[{x, y}] = y > x ? 1.0 : 0.0;
    out[2].values[{x, y}] = static_cast<double>(x + y) / static_cast<double>(2 * (chain.n_states() - 1));
    out[3].values[{x, y}] = u(gen);
    out[4].values[{x, y}] = u(gen) < 0.5 ? 0.0 : 1.0;
  }
  return out;
}

std::vector<Vector> starts_for(const MarkovChain& chain) {
  return {stationary_distribution(chain), mhb::test::point_mass(chain.n_states(), 0)};
}

// ---------------------------------------------------------------------------

Outcome ac1() {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double p = 1.0 - u(gen);  // (0, 1]
    const double r = 1.0 - u(gen);
    const double hit = max_hitting_time(two_state(p, r));
    worst = std::max(worst, std::abs(hit - 1.0 / std::min(p, r)));
  }
  int cycle_mismatches = 0;
  for (std::size_t m = 2; m <= 12; ++m) {
    const double hit = max_hitting_time(mhb::test::cycle_walk(m));
    if (hit != static_cast<double>(m * m / 4)) ++cycle_mismatches;
  }
  return {worst <= 1e-9 && cycle_mismatches == 0,
          fmt("two-state max abs error %.3g over 50 draws, %d of 11 cycles differ from floor(m^2/4)",
              worst, cycle_mismatches)};
}

Outcome ac2() {
  std::mt19937_64 gen(2);
  std::size_t checked = 0, violations = 0;
  double worst_ratio = 0.0;
  for (const auto& chain : small_chain_suite()) {
    const double hit = max_hitting_time(chain);
    for (const auto& f : reward_suite(chain.n_states(), gen)) {
      for (const auto& start : starts_for(chain)) {
        for (std::size_t n = 2; n <= 8; ++n) {
          const auto spec = HoeffdingBoundSpec::for_chain(n, f.range(), hit);
          for (int k = 1; k <= 20; ++k) {
            const double t = static_cast<double>(k) / 20.0 * static_cast<double>(n) * f.range();
            const double tail = exact_tail(chain, f, n, t, start);
            const double bound = hoeffding_bound(spec, TailQuery(t, BoundForm::SumForm));
            ++checked;
            if (tail > bound) ++violations;
            if (bound > 0.0) worst_ratio = std::max(worst_ratio, tail / bound);
          }
        }
      }
    }
  }
  return {violations == 0 && checked > 0,
          fmt("%zu exact tails, %zu above the bound, max tail/bound %.4f", checked, violations,
              worst_ratio)};
}

Outcome ac3() {
  std::mt19937_64 gen(3);
  std::size_t checked = 0, violations = 0, skipped = 0;
  double worst_ratio = 0.0;
  for (const auto& chain : small_chain_suite()) {
    const PairChain pairs = pair_chain(chain);
    if (!analyze(pairs.chain).irreducible) return {false, "pair chain not irreducible"};
    for (const auto& f2 : pair_reward_suite(chain, gen)) {
      for (const auto& start : starts_for(chain)) {
        for (std::size_t n = 2; n <= 8; ++n) {
          if (std::pow(static_cast<double>(pairs.pair_states.size()), static_cast<double>(n)) >
              kMaxEnumeratedPaths) {
            skipped += 20;
            continue;
          }
          const auto spec = pair_bound_inputs(chain, f2, n);
          const double range = f2.upper - f2.lower;
          for (int k = 1; k <= 20; ++k) {
            const double t = static_cast<double>(k) / 20.0 * static_cast<double>(n) * range;
            const double tail = exact_pair_tail(chain, f2, n, t, start);
            const double bound = hoeffding_bound(spec, TailQuery(t, BoundForm::PairSumForm));
            ++checked;
            if (tail > bound) ++violations;
            if (bound > 0.0) worst_ratio = std::max(worst_ratio, tail / bound);
          }
        }
      }
    }
  }
  return {violations == 0 && checked > 0,
          fmt("%zu exact pair tails, %zu above the bound, %zu skipped over the 1e7 cap, "
              "max tail/bound %.4f",
              checked, violations, skipped, worst_ratio)};
}

Outcome ac4() {
  const auto chain = two_state(0.5, 0.25);
  const RewardFunction f({0.0, 1.0}, 0.0, 1.0);
  const std::size_t n = 200;
  const double hit = max_hitting_time(chain);
  const auto spec = HoeffdingBoundSpec::for_chain(n, f.range(), hit);
  bool ok = true;
  std::string detail;
  std::uint64_t seed = 4000;
  for (double eps : {0.05, 0.1, 0.15, 0.2, 0.25}) {
    const auto est = empirical_tail(chain, f, n, eps * static_cast<double>(n), 100000, seed++);
    const double bound = hoeffding_bound(spec, TailQuery(eps, BoundForm::MeanForm));
    const bool within = est.estimate <= bound + 4.0 * est.standard_error;
    ok = ok && within;
    detail += fmt("%seps=%.2f tail=%.5f bound=%.5f", detail.empty() ? "" : "; ", eps,
                  est.estimate, bound);
  }
  return {ok, detail};
}

Outcome ac5() {
  const auto inst = mhb::test::standard_instance();
  const auto beta = BetaParameter::auto_median_elimination(inst);
  const double eps = 0.25, delta = 0.1;
  const auto est = pac_failure_rate(inst, eps, delta, beta, 500, 5000);
  const auto bound = me_sample_complexity_bound(inst.n_arms(), eps, delta, beta.beta);
  const bool pac = est.wilson.upper <= delta;
  const bool samples = static_cast<double>(est.max_samples) <= bound.analytic;
  return {pac && samples,
          fmt("beta=%.4g, %llu/500 failures, Wilson upper %.4f <= 0.1; max samples %llu <= "
              "analytic bound %.6g",
              beta.beta, static_cast<unsigned long long>(est.failures), est.wilson.upper,
              static_cast<unsigned long long>(est.max_samples), bound.analytic)};
}

Outcome ac6() {
  const auto inst = mhb::test::standard_instance();
  const auto beta = BetaParameter::auto_ucb(inst);
  const std::uint64_t horizon = 10000;
  const std::size_t runs = 200;
  double at_t = 0.0, at_tenth = 0.0;
  for (std::size_t i = 0; i < runs; ++i) {
    RandomStream rng = seed_stream(6000, i);
    const auto trace = ucb_run(inst, horizon, beta, rng, false);
    at_t += trace.regret_at(horizon);
    at_tenth += trace.regret_at(horizon / 10);
  }
  at_t /= static_cast<double>(runs);
  at_tenth /= static_cast<double>(runs);
  const double upper = regret_upper_bound(inst, beta.beta, static_cast<double>(horizon));
  const double growth_limit = 1.1 * regret_upper_constant(inst, beta.beta) * std::log(10.0);
  const auto lower = regret_lower_bound_constant(inst);
  const bool ok = at_t <= upper && at_t - at_tenth <= growth_limit &&
                  std::isfinite(lower.constant) && lower.constant > 0.0;
  return {ok, fmt("beta=%.4g, mean regret %.2f <= bound %.2f; growth 1e3->1e4 %.2f <= %.2f; "
                  "lower-bound constant %.4f",
                  beta.beta, at_t, upper, at_t - at_tenth, growth_limit, lower.constant)};
}

Outcome ac7() {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    const auto chain = random_irreducible(1 + i % 6, gen, u(gen));
    const PairChain pairs = pair_chain(chain);
    const bool lib = analyze(pairs.chain).irreducible;
    const bool ref = oracle::strongly_connected(oracle::to_grid(pairs.chain));
    if (!lib || !ref) ++failures;
  }
  return {failures == 0, fmt("%d of 100 lifted chains not irreducible", failures)};
}

Outcome ac8() {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> failed;

  double residual = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto chain = random_irreducible(2 + i % 7, gen, u(gen));
    const Vector pi = stationary_distribution(chain);
    const Eigen::RowVectorXd drift = pi.transpose() * chain.transition() - pi.transpose();
    residual = std::max(residual, drift.lpNorm<Eigen::Infinity>());
  }
  if (residual > 1e-10) failed.push_back("stationary residual");

  double form_gap = 0.0;
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(u(gen) * 1000);
    const double range = 0.1 + 5 * u(gen), hit = 1 + 20 * u(gen), eps = 0.01 + u(gen);
    const auto spec = HoeffdingBoundSpec::for_chain(n, range, hit);
    const double sum = hoeffding_bound(spec, TailQuery(eps * static_cast<double>(n), BoundForm::SumForm));
    const double mean = hoeffding_bound(spec, TailQuery(eps, BoundForm::MeanForm));
    if (sum > 0.0) form_gap = std::max(form_gap, std::abs(sum - mean) / sum);
  }
  if (form_gap > 1e-12) failed.push_back("sum/mean consistency");

  int invert_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const double range = 0.1 + 2 * u(gen), hit = 1 + 10 * u(gen);
    const double eps = 0.02 + 0.5 * u(gen), delta = 0.001 + 0.9 * u(gen);
    const std::uint64_t n = invert_for_n(range, hit, eps, delta);
    const auto at = HoeffdingBoundSpec::for_chain(n, range, hit);
    const bool meets = hoeffding_bound(at, TailQuery(eps, BoundForm::MeanForm)) <= delta;
    bool minimal = true;
    if (n > 1) {
      const auto before = HoeffdingBoundSpec::for_chain(n - 1, range, hit);
      minimal = hoeffding_bound(before, TailQuery(eps, BoundForm::MeanForm)) > delta;
    }
    if (!meets || !minimal) ++invert_bad;
  }
  if (invert_bad > 0) failed.push_back("invert_for_n boundary");

  int kl_bad = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + i % 5;
    const auto a = random_irreducible(n, gen, u(gen));
    const auto b = random_irreducible(n, gen, u(gen));
    if (kl_rate(a, a) != 0.0 || !(kl_rate(a, b) >= 0.0)) ++kl_bad;
  }
  if (kl_bad > 0) failed.push_back("kl_rate");

  // One config per experiment kind, serial against four workers.
  mhb::test::ScratchDir dir("acceptance");
  const auto chain = dir.write("chain.json", mhb::test::two_state_json(0.5, 0.25));
  const auto f = dir.write("f.json", mhb::test::indicator_reward_json());
  const auto inst = dir.write("inst.json", mhb::test::standard_instance_json());
  using harness::ExperimentConfig;
  using harness::ExperimentKind;
  std::vector<ExperimentConfig> configs(5);
  configs[0].kind = ExperimentKind::Analyze;
  configs[1].kind = ExperimentKind::BoundSweep;
  configs[2].kind = ExperimentKind::TailVerify;
  configs[2].mode = harness::TailMode::Empirical;
  configs[2].trials = 5000;
  configs[3].kind = ExperimentKind::BanditME;
  configs[3].epsilon = 0.5;
  configs[3].delta = 0.2;
  configs[3].runs = 8;
  configs[4].kind = ExperimentKind::BanditUCB;
  configs[4].horizon = 2000;
  configs[4].runs = 8;
  int byte_mismatch = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    auto& c = configs[i];
    c.seed = 8000 + i;
    c.chain = chain;
    c.rewards = f;
    c.instance = inst;
    c.n_grid = {10, 50};
    c.t_grid = {2.0, 5.0};
    c.parallelism = 1;
    const auto serial = harness::execute(c);
    c.parallelism = 4;
    const auto parallel = harness::execute(c);
    for (auto format : {harness::OutputFormat::Csv, harness::OutputFormat::Json}) {
      if (serial.render(format) != parallel.render(format)) ++byte_mismatch;
    }
  }
  if (byte_mismatch > 0) failed.push_back("parallel/serial bytes");

  std::string detail = fmt(
      "stationary residual %.2g, sum/mean rel gap %.2g, %d/1000 invert failures, %d/100 kl "
      "failures, %d parallel/serial byte mismatches over 5 kinds",
      residual, form_gap, invert_bad, kl_bad, byte_mismatch);
  return {failed.empty(), detail};
}

}  // namespace

int main() {
  bool all = true;
  all &= criterion("AC1", "closed-form hitting times", 1.0, ac1);
  all &= criterion("AC2", "exact dominance, state functions", 60.0, ac2);
  all &= criterion("AC3", "exact dominance, transition functions", 120.0, ac3);
  all &= criterion("AC4", "Monte Carlo mean-form tail", 30.0, ac4);
  all &= criterion("AC5", "median elimination PAC", 0.0, ac5);
  all &= criterion("AC6", "UCB regret", 0.0, ac6);
  all &= criterion("AC7", "pair-chain irreducibility", 0.0, ac7);
  all &= criterion("AC8", "property suite", 0.0, ac8);
  std::printf("%s\n", all ? "ALL PASS" : "SOME CRITERIA FAILED");
  return all ? 0 : 1;
}
