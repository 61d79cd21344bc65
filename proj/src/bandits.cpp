#include "mhb/bandits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mhb/error.hpp"
#include "mhb/parallel.hpp"

namespace mhb {

namespace {

double relative_slack(double x) { return 1e-12 * std::max(1.0, std::abs(x)); }

std::vector<MarkovChain> at_stationarity(std::vector<MarkovChain> arms,
                                         std::vector<Vector>& stationary) {
  std::vector<MarkovChain> result;
  result.reserve(arms.size());
  for (const auto& chain : arms) {
    stationary.push_back(stationary_distribution(chain));
    result.push_back(chain.with_initial(stationary.back()));
  }
  return result;
}

}  // namespace

BanditInstance::BanditInstance(std::vector<MarkovChain> arms,
                               RewardFunction reward)
    : reward_(std::move(reward)) {
  if (arms.size() < 2) {
    throw Error(ErrorCode::BadInstance, "a bandit needs at least two arms");
  }
  for (const auto& chain : arms) {
    if (chain.n_states() != reward_.size()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "every arm must share the reward function's state space");
    }
  }
  arms_ = at_stationarity(std::move(arms), stationary_);
  for (std::size_t a = 0; a < arms_.size(); ++a) {
    means_.push_back(expectation(reward_, stationary_[a]));
    hits_.push_back(max_hitting_time(arms_[a]));
  }
  best_ = static_cast<Arm>(
      std::max_element(means_.begin(), means_.end()) - means_.begin());
  for (std::size_t a = 0; a < arms_.size(); ++a) {
    if (a != best_ && means_[best_] - means_[a] <= relative_slack(means_[best_])) {
      std::ostringstream msg;
      msg << "arms " << best_ << " and " << a
          << " tie for the best stationary mean";
      throw Error(ErrorCode::TiedBestArm, msg.str());
    }
  }
  for (double m : means_) gaps_.push_back(means_[best_] - m);
  gaps_[best_] = 0.0;
  max_hit_ = *std::max_element(hits_.begin(), hits_.end());
}

std::vector<double> BanditInstance::suboptimal_gaps() const {
  std::vector<double> out;
  for (std::size_t a = 0; a < gaps_.size(); ++a) {
    if (a != best_) out.push_back(gaps_[a]);
  }
  return out;
}

double beta_floor(const BanditInstance& instance) {
  const double range = instance.reward().range();
  const double hit = instance.max_hit();
  return 0.5 * range * range * hit * hit;
}

double ucb_gamma(const BanditInstance& instance, double beta) {
  const double range = instance.reward().range();
  const double hit = instance.max_hit();
  return 4.0 * beta / (range * range * hit * hit);
}

BetaParameter BetaParameter::for_median_elimination(
    const BanditInstance& instance, double beta, bool force) {
  BetaParameter p{beta, beta_floor(instance), true};
  // The floor comes out of linear solves; allow its rounding error.
  p.satisfies_hypothesis = beta >= p.floor - relative_slack(p.floor);
  if (!p.satisfies_hypothesis && !force) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "beta " << beta << " is below the floor " << p.floor;
    throw Error(ErrorCode::BetaBelowFloor, msg.str());
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::BadParameter, "beta must be positive and finite");
  }
  return p;
}

BetaParameter BetaParameter::for_ucb(const BanditInstance& instance,
                                     double beta, bool force) {
  BetaParameter p{beta, beta_floor(instance), true};
  p.satisfies_hypothesis = beta > p.floor;
  if (!p.satisfies_hypothesis && !force) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "beta " << beta << " is not above the floor " << p.floor;
    throw Error(ErrorCode::BetaNotAboveFloor, msg.str());
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::BadParameter, "beta must be positive and finite");
  }
  return p;
}

BetaParameter BetaParameter::auto_median_elimination(
    const BanditInstance& instance) {
  return for_median_elimination(instance, beta_floor(instance));
}

BetaParameter BetaParameter::auto_ucb(const BanditInstance& instance) {
  return for_ucb(instance, 1.01 * beta_floor(instance));
}

double ArmState::pull(const BanditInstance& instance, RandomStream& rng) {
  const MarkovChain& chain = instance.arm(arm_);
  cursor_ = cursor_ ? chain.step(*cursor_, rng)
                    : draw_from(instance.stationary(arm_), rng);
  const double y = instance.reward()(*cursor_);
  ++pulls_;
  sum_ += y;
  return y;
}

std::uint64_t me_round_samples(double beta, double epsilon_r, double delta_r) {
  const double n =
      std::ceil(4.0 * beta / (epsilon_r * epsilon_r) * std::log(3.0 / delta_r));
  if (!std::isfinite(n) || n > 0x1.0p53) {
    throw Error(ErrorCode::BadParameter,
                "median elimination round is too large to sample");
  }
  return static_cast<std::uint64_t>(n);
}

MEResult median_elimination(const BanditInstance& instance, double epsilon,
                            double delta, const BetaParameter& beta,
                            RandomStream& rng) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::BadParameter, "epsilon must be positive");
  }
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw Error(ErrorCode::BadParameter, "delta must lie in (0, 1)");
  }
  if (!(beta.beta > 0.0)) {
    throw Error(ErrorCode::BadParameter, "beta must be positive");
  }
  const std::size_t k = instance.n_arms();
  MEResult result;
  result.arms.reserve(k);
  for (Arm a = 0; a < k; ++a) result.arms.emplace_back(a);

  std::vector<Arm> active(k);
  std::iota(active.begin(), active.end(), Arm{0});
  double eps_r = epsilon / 4.0;
  double delta_r = delta / 2.0;
  std::size_t round = 1;
  while (active.size() >= 2) {
    MERoundLog log;
    log.round = round;
    log.active = active;
    log.epsilon = eps_r;
    log.delta = delta_r;
    log.samples_per_arm = me_round_samples(beta.beta, eps_r, delta_r);

    for (Arm a : active) {
      double window = 0.0;
      for (std::uint64_t i = 0; i < log.samples_per_arm; ++i) {
        window += result.arms[a].pull(instance, rng);
      }
      log.round_means.push_back(window /
                                static_cast<double>(log.samples_per_arm));
    }
    result.total_samples += log.samples_per_arm * active.size();

    std::vector<std::size_t> order(active.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) {
                       return log.round_means[i] > log.round_means[j];
                     });
    const std::size_t keep = active.size() / 2;
    const std::size_t median_rank = (active.size() + 1) / 2;
    log.median = log.round_means[order[median_rank - 1]];
    for (std::size_t i = 0; i < keep; ++i) {
      log.survivors.push_back(active[order[i]]);
    }
    std::sort(log.survivors.begin(), log.survivors.end());

    active = log.survivors;
    result.rounds.push_back(std::move(log));
    eps_r = 3.0 * eps_r / 4.0;
    delta_r = delta_r / 2.0;
    ++round;
  }
  result.chosen_arm = active.front();
  return result;
}

SampleComplexityBound me_sample_complexity_bound(std::size_t n_arms,
                                                 double epsilon, double delta,
                                                 double beta) {
  if (n_arms < 2 || !(epsilon > 0.0) || !(delta > 0.0) || !(delta < 1.0) ||
      !(beta > 0.0)) {
    throw Error(ErrorCode::BadParameter,
                "sample complexity bound needs K >= 2, eps > 0, "
                "delta in (0, 1), beta > 0");
  }
  SampleComplexityBound bound;
  const double k = static_cast<double>(n_arms);
  std::size_t rounds = 0;
  while ((std::size_t{1} << rounds) < n_arms) ++rounds;
  bound.rounds = rounds;

  double eps_r = epsilon / 4.0;
  double delta_r = delta / 2.0;
  double weight = 1.0;
  for (std::size_t r = 1; r <= rounds; ++r) {
    bound.finite_accumulation +=
        k * static_cast<double>(me_round_samples(beta, eps_r, delta_r)) *
        weight;
    eps_r *= 0.75;
    delta_r /= 2.0;
    weight /= 2.0;
  }
  // sum_{r>=1} x^(r-1) (r ln 2 + ln(3/delta)) with x = 8/9 equals
  // ln 2 / (1-x)^2 + ln(3/delta) / (1-x).
  const double series = 81.0 * std::log(2.0) + 9.0 * std::log(3.0 / delta);
  bound.analytic = 2.0 * k + 64.0 * beta * k / (epsilon * epsilon) * series;
  return bound;
}

double ucb_index(double mean, std::uint64_t pulls, std::uint64_t t,
                 double beta) {
  return mean + std::sqrt(2.0 * beta * std::log(static_cast<double>(t)) /
                          static_cast<double>(pulls));
}

Arm ucb_select(std::span<const double> indices) {
  Arm best = 0;
  for (Arm a = 1; a < indices.size(); ++a) {
    if (indices[a] > indices[best]) best = a;
  }
  return best;
}

UCBTrace ucb_run(const BanditInstance& instance, std::uint64_t horizon,
                 const BetaParameter& beta, RandomStream& rng,
                 bool record_indices) {
  const std::size_t k = instance.n_arms();
  if (horizon < k) {
    throw Error(ErrorCode::HorizonTooSmall,
                "horizon must be at least the number of arms");
  }
  UCBTrace trace;
  trace.n_arms = k;
  trace.chosen.reserve(horizon);
  trace.cumulative_regret.reserve(horizon);
  if (record_indices) trace.indices.reserve((horizon - k) * k);

  std::vector<ArmState> arms;
  arms.reserve(k);
  for (Arm a = 0; a < k; ++a) arms.emplace_back(a);
  std::vector<std::uint64_t> counts(k, 0);
  auto pull = [&](Arm a) {
    arms[a].pull(instance, rng);
    trace.chosen.push_back(a);
    ++counts[a];
    trace.cumulative_regret.push_back(pseudo_regret_from_counts(instance, counts));
  };

  for (Arm a = 0; a < k; ++a) pull(a);
  std::vector<double> index(k);
  for (std::uint64_t t = k; t < horizon; ++t) {
    for (Arm a = 0; a < k; ++a) {
      index[a] = ucb_index(arms[a].mean(), arms[a].pulls(), t, beta.beta);
    }
    if (record_indices) {
      trace.indices.insert(trace.indices.end(), index.begin(), index.end());
    }
    pull(ucb_select(index));
  }
  trace.pulls.reserve(k);
  for (const auto& arm : arms) trace.pulls.push_back(arm.pulls());
  return trace;
}

double pseudo_regret_from_counts(const BanditInstance& instance,
                                 std::span<const std::uint64_t> pulls) {
  double total = 0.0;
  for (Arm b = 0; b < pulls.size(); ++b) {
    if (b != instance.best_arm()) {
      total += static_cast<double>(pulls[b]) * instance.gap(b);
    }
  }
  return total;
}

double regret_upper_bound(std::span<const double> suboptimal_gaps, double beta,
                          double gamma, double horizon) {
  if (!(gamma > 2.0)) {
    throw Error(ErrorCode::GammaNotAboveTwo,
                "regret bound requires gamma > 2");
  }
  if (!(horizon >= 1.0)) {
    throw Error(ErrorCode::BadParameter, "horizon must be at least 1");
  }
  double inverse_gaps = 0.0;
  double gaps = 0.0;
  for (double g : suboptimal_gaps) {
    inverse_gaps += 1.0 / g;
    gaps += g;
  }
  return 8.0 * beta * inverse_gaps * std::log(horizon) +
         gamma / (gamma - 2.0) * gaps;
}

double regret_upper_bound(const BanditInstance& instance, double beta,
                          double horizon) {
  return regret_upper_bound(instance.suboptimal_gaps(), beta,
                            ucb_gamma(instance, beta), horizon);
}

double regret_upper_constant(const BanditInstance& instance, double beta) {
  double inverse_gaps = 0.0;
  for (double g : instance.suboptimal_gaps()) inverse_gaps += 1.0 / g;
  return 8.0 * beta * inverse_gaps;
}

double kl_rate(const MarkovChain& theta, const MarkovChain& lambda) {
  if (theta.n_states() != lambda.n_states()) {
    throw Error(ErrorCode::DimensionMismatch,
                "divergence rate needs chains on the same state space");
  }
  if (!is_irreducible(lambda)) {
    throw Error(ErrorCode::NotIrreducible,
                "divergence rate requires irreducible chains");
  }
  const Vector pi = stationary_distribution(theta);
  const std::size_t n = theta.n_states();
  double total = 0.0;
  for (State x = 0; x < n; ++x) {
    double row = 0.0;
    for (State y = 0; y < n; ++y) {
      const double p = theta.prob(x, y);
      if (p <= 0.0) continue;
      const double q = lambda.prob(x, y);
      if (q <= 0.0) return std::numeric_limits<double>::infinity();
      row += p * std::log(p / q);
    }
    // Each row term is a divergence between distributions, hence >= 0.
    total += pi(static_cast<Eigen::Index>(x)) * std::max(0.0, row);
  }
  return total;
}

RegretLowerBound regret_lower_bound_constant(const BanditInstance& instance) {
  RegretLowerBound result;
  const Arm best = instance.best_arm();
  result.kl_to_best.assign(instance.n_arms(), 0.0);
  for (Arm b = 0; b < instance.n_arms(); ++b) {
    if (b == best) continue;
    const double kl = kl_rate(instance.arm(b), instance.arm(best));
    result.kl_to_best[b] = kl;
    if (!(kl > 0.0) || !std::isfinite(kl)) {
      result.degenerate_arms.push_back(b);
      continue;
    }
    result.constant += instance.gap(b) / kl;
  }
  return result;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                         double z) {
  if (trials == 0) return Interval{0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return Interval{std::max(0.0, center - half), std::min(1.0, center + half)};
}

bool is_eps_good(const BanditInstance& instance, Arm a, double epsilon) {
  return !(instance.best_mean() >= instance.mean(a) + epsilon);
}

PacEstimate pac_failure_rate(const BanditInstance& instance, double epsilon,
                             double delta, const BetaParameter& beta,
                             std::uint64_t runs, std::uint64_t seed,
                             unsigned threads) {
  if (runs < 100) {
    throw Error(ErrorCode::BadParameter, "PAC estimate needs at least 100 runs");
  }
  std::vector<unsigned char> failed(runs, 0);
  std::vector<std::uint64_t> samples(runs, 0);
  parallel_for(runs, threads, [&](std::size_t i) {
    RandomStream rng = seed_stream(seed, i);
    const MEResult r = median_elimination(instance, epsilon, delta, beta, rng);
    failed[i] = is_eps_good(instance, r.chosen_arm, epsilon) ? 0 : 1;
    samples[i] = r.total_samples;
  });
  PacEstimate est;
  est.runs = runs;
  double sample_sum = 0.0;
  for (std::size_t i = 0; i < runs; ++i) {
    est.failures += failed[i];
    sample_sum += static_cast<double>(samples[i]);
    est.max_samples = std::max(est.max_samples, samples[i]);
  }
  est.failure_rate =
      static_cast<double>(est.failures) / static_cast<double>(runs);
  est.wilson = wilson_interval(est.failures, runs);
  est.mean_samples = sample_sum / static_cast<double>(runs);
  return est;
}

}  // namespace mhb
