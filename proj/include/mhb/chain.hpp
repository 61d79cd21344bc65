#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mhb/random.hpp"

namespace mhb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using State = std::size_t;

/// Rows of a raw matrix may deviate from stochastic by this much and still
/// be accepted (and renormalized). Larger deviations are rejected.
inline constexpr double kRowRepairTolerance = 1e-9;

/// Finite Markov chain: row-stochastic transition matrix over states
/// 0..n-1, with an optional initial distribution and optional labels.
/// Immutable after construction.
class MarkovChain {
 public:
  /// Validates `raw` (square, finite, nonnegative, rows within
  /// kRowRepairTolerance of 1) and renormalizes the rows. Throws
  /// mhb::Error with NotSquare, NegativeEntry, NonStochasticRow or
  /// BadInitial.
  static MarkovChain validate(const Matrix& raw,
                              std::optional<Vector> initial = std::nullopt,
                              std::vector<std::string> labels = {});

  std::size_t n_states() const noexcept {
    return static_cast<std::size_t>(transition_.rows());
  }
  const Matrix& transition() const noexcept { return transition_; }
  double prob(State from, State to) const {
    return transition_(static_cast<Eigen::Index>(from),
                       static_cast<Eigen::Index>(to));
  }
  const std::optional<Vector>& initial() const noexcept { return initial_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Same chain with a different (validated) initial distribution.
  MarkovChain with_initial(const Vector& initial) const;

  /// Draws the successor of `from`.
  State step(State from, RandomStream& rng) const;

 private:
  MarkovChain() = default;

  Matrix transition_;
  std::optional<Vector> initial_;
  std::vector<std::string> labels_;
  // Row-major cumulative sums; the last positive entry of each row is 1.
  std::vector<double> cumulative_;
};

MarkovChain validate_chain(const Matrix& raw,
                           std::optional<Vector> initial = std::nullopt);

/// Draws an index from a probability vector.
State draw_from(const Vector& distribution, RandomStream& rng);

struct ChainAnalysis {
  bool irreducible = false;
  // Both are present only for irreducible chains.
  std::optional<std::size_t> period;
  std::optional<Vector> stationary;

  /// Stationary distribution, or Error(NoStationary) for reducible chains.
  const Vector& require_stationary() const;
};

ChainAnalysis analyze(const MarkovChain& chain);

/// Strong connectivity of the support digraph (entries > 0 exactly).
bool is_irreducible(const MarkovChain& chain);

/// Unique stationary distribution of an irreducible chain, via a direct
/// solve of piP = pi with one balance equation replaced by sum(pi) = 1.
Vector stationary_distribution(const MarkovChain& chain);

/// Expected hitting times E[T_y | X_1 = x] where T_y counts transitions
/// until the first visit to y (0 when starting at y).
struct HittingTimeTable {
  Matrix expected_hits;
  double max_hit = 0.0;
  /// Largest infinity-norm residual over the per-target solves.
  double max_residual = 0.0;
};

/// One dense LU solve per target state. Throws NotIrreducible, or
/// SingularSystem when a residual exceeds 1e-9.
HittingTimeTable hitting_times(const MarkovChain& chain);

/// The maximum expected hitting time, HitT(P).
double max_hitting_time(const MarkovChain& chain);

/// Bounded real function on the states.
class RewardFunction {
 public:
  /// Throws BadReward unless lower < upper and every value lies in
  /// [lower, upper] and is finite.
  RewardFunction(std::vector<double> values, double lower, double upper);

  std::size_t size() const noexcept { return values_.size(); }
  double operator()(State x) const { return values_[x]; }
  std::span<const double> values() const noexcept { return values_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  double range() const noexcept { return upper_ - lower_; }

 private:
  std::vector<double> values_;
  double lower_;
  double upper_;
};

/// Expectation of f under a distribution over states.
double expectation(const RewardFunction& f, const Vector& distribution);

using Transition = std::pair<State, State>;

/// Lift of a chain to its positive-probability transitions.
struct PairChain {
  std::vector<Transition> pair_states;
  MarkovChain chain;

  std::optional<std::size_t> index_of(State from, State to) const;

  /// Distribution of (X_1, X_2) on the pair states when X_1 ~ q.
  Vector lift_distribution(const MarkovChain& base, const Vector& q) const;
};

PairChain pair_chain(const MarkovChain& chain);

/// Function on transitions (x, y) with bounds [lower, upper].
struct PairRewardFunction {
  std::map<Transition, double> values;
  double lower = 0.0;
  double upper = 1.0;
};

/// Re-expresses f2 as a RewardFunction on the pair-chain states. Throws
/// SupportMismatch when the keys of f2 differ from the pair states.
RewardFunction lift_pair_reward(const PairChain& pairs,
                                const PairRewardFunction& f2);

/// X_1..X_length with X_1 drawn from `start` (or the chain's initial
/// distribution when `start` is null). Throws MissingInitial if neither
/// exists.
std::vector<State> sample_path(const MarkovChain& chain, std::size_t length,
                               RandomStream& rng,
                               const Vector* start = nullptr);

}  // namespace mhb
