#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mhb/chain.hpp"

namespace mhb {

enum class BoundForm { SumForm, MeanForm, PairSumForm, PairMeanForm };

const char* to_string(BoundForm form);

inline bool is_pair_form(BoundForm form) {
  return form == BoundForm::PairSumForm || form == BoundForm::PairMeanForm;
}

/// Inputs of the hitting-time Hoeffding bound for sums of n samples of a
/// function with range (b - a) on a chain with maximum hitting time `hit`:
/// nu^2 = n (b - a)^2 hit^2 / 4.
///
/// A spec is tagged with the chain it was built for. Pair forms of the
/// bound only accept specs built by for_pair_chain, whose `hit` is the
/// maximum hitting time of the lifted chain.
class HoeffdingBoundSpec {
 public:
  static HoeffdingBoundSpec for_chain(std::size_t n, double range, double hit);
  static HoeffdingBoundSpec for_pair_chain(std::size_t n, double range,
                                           double hit);

  std::size_t n() const noexcept { return n_; }
  double range() const noexcept { return range_; }
  double hit() const noexcept { return hit_; }
  double nu_sq() const noexcept { return nu_sq_; }
  bool lifted() const noexcept { return lifted_; }

  static double compute_nu_sq(std::size_t n, double range, double hit);

 private:
  HoeffdingBoundSpec(std::size_t n, double range, double hit, bool lifted);

  std::size_t n_;
  double range_;
  double hit_;
  double nu_sq_;
  bool lifted_;
};

/// Deviation t of the sum (sum forms) or epsilon of the mean (mean forms).
struct TailQuery {
  TailQuery(double deviation, BoundForm form);

  double deviation;
  BoundForm form;
};

/// 2 exp(-t^2 / (2 nu^2)) for sum forms and
/// 2 exp(-2 n eps^2 / ((b - a)^2 hit^2)) for mean forms. Not clipped at 1.
/// Throws FormMismatch when a pair form is evaluated on a spec that was
/// not built for a pair chain, or the reverse.
double hoeffding_bound(const HoeffdingBoundSpec& spec, const TailQuery& query);

/// Smallest n with 2 exp(-2 n eps^2 / (range^2 hit^2)) <= delta.
std::uint64_t invert_for_n(double range, double hit, double epsilon,
                           double delta);

/// Paths beyond this count are not enumerated by exact_tail.
inline constexpr double kMaxEnumeratedPaths = 1e7;

/// Deviations within this relative band of t count as reaching t.
inline constexpr double kTieBand = 1e-12;

/// E_q[f(X_k)] for k = 1..n.
std::vector<double> step_means(const MarkovChain& chain,
                               const RewardFunction& f, std::size_t n,
                               const Vector& start);

/// Exact Pr_q(|sum_k f(X_k) - E_q f(X_k)| >= t) by enumerating all
/// length-n paths. Throws TooLarge when |S|^n exceeds kMaxEnumeratedPaths.
double exact_tail(const MarkovChain& chain, const RewardFunction& f,
                  std::size_t n, double t, const Vector& start);

/// Lifted problem for functions of transitions: the pair chain together
/// with f2 re-expressed on its states.
struct PairProblem {
  PairChain pairs;
  RewardFunction reward;
};

PairProblem lift_pair_problem(const MarkovChain& chain,
                              const PairRewardFunction& f2);

/// exact_tail for sum_k f2(X_k, X_{k+1}) with X_1 ~ start, evaluated on the
/// pair chain (so the enumeration cap applies to |S2|^n).
double exact_pair_tail(const MarkovChain& chain, const PairRewardFunction& f2,
                       std::size_t n, double t, const Vector& start);

struct TailEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t exceedances = 0;
  std::uint64_t trials = 0;
};

/// Monte Carlo estimate of the same tail probability as exact_tail. Trial i
/// draws its path from seed_stream(seed, i), so the result does not depend
/// on `threads`. `start` defaults to the stationary distribution.
TailEstimate empirical_tail(const MarkovChain& chain, const RewardFunction& f,
                            std::size_t n, double t, std::uint64_t trials,
                            std::uint64_t seed, const Vector* start = nullptr,
                            unsigned threads = 1);

/// Bound inputs for a function of transitions: builds the pair chain and
/// uses its maximum hitting time. The returned spec is pair-tagged.
HoeffdingBoundSpec pair_bound_inputs(const MarkovChain& chain,
                                     const PairRewardFunction& f2,
                                     std::size_t n);

}  // namespace mhb
