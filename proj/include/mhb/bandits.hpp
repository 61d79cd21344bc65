#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mhb/chain.hpp"
#include "mhb/random.hpp"

namespace mhb {

using Arm = std::size_t;

/// K >= 2 irreducible arms over one state space, a shared bounded reward,
/// and the derived stationary quantities. Each arm starts at its own
/// stationary distribution; any initial distribution in the input chains
/// is replaced.
class BanditInstance {
 public:
  /// Throws BadInstance (K < 2), DimensionMismatch, NotIrreducible, or
  /// TiedBestArm when the maximum stationary mean is not unique.
  BanditInstance(std::vector<MarkovChain> arms, RewardFunction reward);

  std::size_t n_arms() const noexcept { return arms_.size(); }
  const MarkovChain& arm(Arm a) const { return arms_[a]; }
  const RewardFunction& reward() const noexcept { return reward_; }
  const Vector& stationary(Arm a) const { return stationary_[a]; }
  double mean(Arm a) const { return means_[a]; }
  double gap(Arm a) const { return gaps_[a]; }
  double hit(Arm a) const { return hits_[a]; }
  Arm best_arm() const noexcept { return best_; }
  double best_mean() const { return means_[best_]; }
  double max_hit() const noexcept { return max_hit_; }
  std::span<const double> means() const noexcept { return means_; }
  std::span<const double> gaps() const noexcept { return gaps_; }

  /// Gaps of the suboptimal arms, in arm order.
  std::vector<double> suboptimal_gaps() const;

 private:
  std::vector<MarkovChain> arms_;
  RewardFunction reward_;
  std::vector<Vector> stationary_;
  std::vector<double> means_;
  std::vector<double> gaps_;
  std::vector<double> hits_;
  Arm best_ = 0;
  double max_hit_ = 0.0;
};

/// (d - c)^2 max_a HitT(P_a)^2 / 2.
double beta_floor(const BanditInstance& instance);

/// 4 beta / ((d - c)^2 max_a HitT(P_a)^2).
double ucb_gamma(const BanditInstance& instance, double beta);

/// Exploration parameter validated against the instance's floor.
struct BetaParameter {
  double beta = 0.0;
  double floor = 0.0;
  /// False only when a forced value violates the algorithm's hypothesis.
  bool satisfies_hypothesis = true;

  /// Requires beta >= floor (BetaBelowFloor) unless `force`.
  static BetaParameter for_median_elimination(const BanditInstance& instance,
                                              double beta, bool force = false);
  /// Requires beta > floor (BetaNotAboveFloor) unless `force`.
  static BetaParameter for_ucb(const BanditInstance& instance, double beta,
                               bool force = false);

  /// beta = floor.
  static BetaParameter auto_median_elimination(const BanditInstance& instance);
  /// beta = 1.01 floor.
  static BetaParameter auto_ucb(const BanditInstance& instance);
};

/// Private per-run state of one rested arm: the chain evolves only when
/// the arm is pulled. The first pull draws X_1 from the stationary
/// distribution; each later pull applies one transition.
class ArmState {
 public:
  explicit ArmState(Arm arm) : arm_(arm) {}

  /// Advances the arm and returns the observed reward f(X_k).
  double pull(const BanditInstance& instance, RandomStream& rng);

  Arm arm() const noexcept { return arm_; }
  std::optional<State> cursor() const noexcept { return cursor_; }
  std::uint64_t pulls() const noexcept { return pulls_; }
  double reward_sum() const noexcept { return sum_; }
  double mean() const {
    return pulls_ > 0 ? sum_ / static_cast<double>(pulls_) : 0.0;
  }

 private:
  Arm arm_;
  std::optional<State> cursor_;
  std::uint64_t pulls_ = 0;
  double sum_ = 0.0;
};

// ---------------------------------------------------------------------------
// Median elimination

struct MERoundLog {
  std::size_t round = 0;
  std::vector<Arm> active;
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t samples_per_arm = 0;
  /// Round means of `active`, aligned with it.
  std::vector<double> round_means;
  double median = 0.0;
  std::vector<Arm> survivors;
};

struct MEResult {
  Arm chosen_arm = 0;
  std::uint64_t total_samples = 0;
  std::vector<MERoundLog> rounds;
  std::vector<ArmState> arms;
};

/// ceil(4 beta / eps_r^2 * ln(3 / delta_r)).
std::uint64_t me_round_samples(double beta, double epsilon_r, double delta_r);

/// Median elimination with fresh per-round sample windows. Survivors are
/// the top floor(|A_r|/2) arms by round mean (ties to the lower index);
/// the median is the ceil(|A_r|/2)-th largest round mean.
MEResult median_elimination(const BanditInstance& instance, double epsilon,
                            double delta, const BetaParameter& beta,
                            RandomStream& rng);

struct SampleComplexityBound {
  /// Number of rounds the accumulation is taken over, ceil(log2 K).
  std::size_t rounds = 0;
  /// K * sum_{r <= rounds} N_r / 2^(r-1).
  double finite_accumulation = 0.0;
  /// 2K + (64 beta K / eps^2) sum_{r >= 1} (8/9)^(r-1) ln(2^r 3 / delta).
  double analytic = 0.0;
};

SampleComplexityBound me_sample_complexity_bound(std::size_t n_arms,
                                                 double epsilon, double delta,
                                                 double beta);

// ---------------------------------------------------------------------------
// UCB

/// Ybar + sqrt(2 beta ln t / N).
double ucb_index(double mean, std::uint64_t pulls, std::uint64_t t,
                 double beta);

/// argmax with ties broken by the lowest arm index.
Arm ucb_select(std::span<const double> indices);

struct UCBTrace {
  std::size_t n_arms = 0;
  /// chosen[t - 1] is the arm pulled at time t, t = 1..T.
  std::vector<Arm> chosen;
  /// Index values computed at t = K..T-1, row-major (T - K) x K; empty when
  /// not recorded.
  std::vector<double> indices;
  /// cumulative_regret[t - 1] = sum of gaps of the arms pulled up to t.
  std::vector<double> cumulative_regret;
  /// N_a(T).
  std::vector<std::uint64_t> pulls;

  std::uint64_t horizon() const noexcept { return chosen.size(); }
  double regret_at(std::uint64_t t) const { return cumulative_regret[t - 1]; }
};

UCBTrace ucb_run(const BanditInstance& instance, std::uint64_t horizon,
                 const BetaParameter& beta, RandomStream& rng,
                 bool record_indices = true);

/// sum_{b != a*} N_b * gap_b.
double pseudo_regret_from_counts(const BanditInstance& instance,
                                 std::span<const std::uint64_t> pulls);

/// 8 beta (sum 1/gap) ln T + gamma/(gamma - 2) sum gap, over the given
/// suboptimal gaps. Throws GammaNotAboveTwo when gamma <= 2.
double regret_upper_bound(std::span<const double> suboptimal_gaps, double beta,
                          double gamma, double horizon);

double regret_upper_bound(const BanditInstance& instance, double beta,
                          double horizon);

/// 8 beta sum_{b != a*} 1/gap_b, the coefficient of ln T above.
double regret_upper_constant(const BanditInstance& instance, double beta);

// ---------------------------------------------------------------------------
// Information-theoretic constants

/// Kullback-Leibler divergence rate
/// sum_{x,y} pi_theta(x) P_theta(x,y) ln(P_theta(x,y) / P_lambda(x,y)),
/// +infinity when P_lambda vanishes on a transition theta can take.
double kl_rate(const MarkovChain& theta, const MarkovChain& lambda);

struct RegretLowerBound {
  /// sum_{b != a*} gap_b / KL(theta_b || theta_a*), with infinite-KL arms
  /// contributing 0.
  double constant = 0.0;
  /// Indexed by arm; 0 for the best arm.
  std::vector<double> kl_to_best;
  /// Suboptimal arms whose divergence rate is zero or infinite.
  std::vector<Arm> degenerate_arms;
};

RegretLowerBound regret_lower_bound_constant(const BanditInstance& instance);

// ---------------------------------------------------------------------------
// PAC verification

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

inline constexpr double kWilsonZ95 = 1.959963984540054;

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                         double z = kWilsonZ95);

/// True when arm `a` is within epsilon of the best stationary mean.
bool is_eps_good(const BanditInstance& instance, Arm a, double epsilon);

struct PacEstimate {
  std::uint64_t runs = 0;
  std::uint64_t failures = 0;
  double failure_rate = 0.0;
  Interval wilson;
  double mean_samples = 0.0;
  std::uint64_t max_samples = 0;
};

/// Fraction of independent median-elimination runs (run i seeded by
/// seed_stream(seed, i)) that return an arm that is not epsilon-good.
/// Requires runs >= 100.
PacEstimate pac_failure_rate(const BanditInstance& instance, double epsilon,
                             double delta, const BetaParameter& beta,
                             std::uint64_t runs, std::uint64_t seed,
                             unsigned threads = 1);

}  // namespace mhb
