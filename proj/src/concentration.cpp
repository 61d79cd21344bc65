#include "mhb/concentration.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

#include "mhb/error.hpp"
#include "mhb/parallel.hpp"

namespace mhb {

namespace {

double mean_form_value(std::size_t n, double range, double hit,
                       double epsilon) {
  const double scale = range * hit;
  return 2.0 * std::exp(-2.0 * static_cast<double>(n) * epsilon * epsilon /
                        (scale * scale));
}

bool reaches(double deviation, double t) {
  return std::abs(deviation) >= t - kTieBand * std::max(1.0, std::abs(t));
}

// Depth-first enumeration of all positive-probability paths.
class PathEnumerator {
 public:
  PathEnumerator(const MarkovChain& chain, const RewardFunction& f,
                 std::size_t n, double center, double t)
      : chain_(chain), f_(f), n_(n), center_(center), t_(t) {}

  double run(const Vector& start) {
    for (State x = 0; x < chain_.n_states(); ++x) {
      const double p = start(static_cast<Eigen::Index>(x));
      if (p > 0.0) visit(x, 1, p, f_(x));
    }
    return total_;
  }

 private:
  void visit(State x, std::size_t depth, double prob, double sum) {
    if (depth == n_) {
      if (reaches(sum - center_, t_)) total_ += prob;
      return;
    }
    for (State y = 0; y < chain_.n_states(); ++y) {
      const double p = chain_.prob(x, y);
      if (p > 0.0) visit(y, depth + 1, prob * p, sum + f_(y));
    }
  }

  const MarkovChain& chain_;
  const RewardFunction& f_;
  std::size_t n_;
  double center_;
  double t_;
  double total_ = 0.0;
};

void check_deviation(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::BadQuery, "deviation must be positive and finite");
  }
}

void check_reward_matches(const MarkovChain& chain, const RewardFunction& f) {
  if (f.size() != chain.n_states()) {
    throw Error(ErrorCode::BadReward,
                "reward function length differs from the number of states");
  }
}

}  // namespace

const char* to_string(BoundForm form) {
  switch (form) {
    case BoundForm::SumForm: return "sum";
    case BoundForm::MeanForm: return "mean";
    case BoundForm::PairSumForm: return "pair_sum";
    case BoundForm::PairMeanForm: return "pair_mean";
  }
  return "unknown";
}

double HoeffdingBoundSpec::compute_nu_sq(std::size_t n, double range,
                                         double hit) {
  return 0.25 * static_cast<double>(n) * range * range * hit * hit;
}

HoeffdingBoundSpec::HoeffdingBoundSpec(std::size_t n, double range, double hit,
                                       bool lifted)
    : n_(n), range_(range), hit_(hit), nu_sq_(0.0), lifted_(lifted) {
  if (n == 0) {
    throw Error(ErrorCode::BadBoundSpec, "sample count must be positive");
  }
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw Error(ErrorCode::BadBoundSpec, "range must be positive and finite");
  }
  // hit == 0 only for a single-state chain, whose sums are deterministic.
  if (!(hit >= 0.0) || !std::isfinite(hit)) {
    throw Error(ErrorCode::BadBoundSpec,
                "hitting time must be nonnegative and finite");
  }
  nu_sq_ = compute_nu_sq(n, range, hit);
}

HoeffdingBoundSpec HoeffdingBoundSpec::for_chain(std::size_t n, double range,
                                                 double hit) {
  return HoeffdingBoundSpec(n, range, hit, false);
}

HoeffdingBoundSpec HoeffdingBoundSpec::for_pair_chain(std::size_t n,
                                                      double range,
                                                      double hit) {
  return HoeffdingBoundSpec(n, range, hit, true);
}

TailQuery::TailQuery(double deviation_, BoundForm form_)
    : deviation(deviation_), form(form_) {
  check_deviation(deviation);
}

double hoeffding_bound(const HoeffdingBoundSpec& spec, const TailQuery& query) {
  if (is_pair_form(query.form) != spec.lifted()) {
    throw Error(ErrorCode::FormMismatch,
                std::string("bound form '") + to_string(query.form) +
                    "' does not match a spec built for the " +
                    (spec.lifted() ? "pair" : "base") + " chain");
  }
  switch (query.form) {
    case BoundForm::SumForm:
    case BoundForm::PairSumForm: {
      const double t = query.deviation;
      return 2.0 * std::exp(-t * t / (2.0 * spec.nu_sq()));
    }
    case BoundForm::MeanForm:
    case BoundForm::PairMeanForm: {
      const double value = mean_form_value(spec.n(), spec.range(), spec.hit(),
                                           query.deviation);
#ifndef NDEBUG
      const double t = static_cast<double>(spec.n()) * query.deviation;
      const double via_sum = 2.0 * std::exp(-t * t / (2.0 * spec.nu_sq()));
      assert(std::abs(via_sum - value) <= 1e-12 * std::max(value, 1e-300) ||
             via_sum == value);
#endif
      return value;
    }
  }
  return 2.0;
}

std::uint64_t invert_for_n(double range, double hit, double epsilon,
                           double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw Error(ErrorCode::BadDelta, "delta must lie in (0, 1)");
  }
  if (!(range > 0.0) || !(hit > 0.0) || !(epsilon > 0.0) ||
      !std::isfinite(range) || !std::isfinite(hit) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::BadParameter,
                "range, hit and epsilon must be positive and finite");
  }
  const double scale = range * hit;
  const double exact =
      scale * scale * std::log(2.0 / delta) / (2.0 * epsilon * epsilon);
  auto n = static_cast<std::uint64_t>(std::max(1.0, std::ceil(exact)));
  // Settle rounding at the boundary against the bound itself.
  while (mean_form_value(n, range, hit, epsilon) > delta) ++n;
  while (n > 1 && mean_form_value(n - 1, range, hit, epsilon) <= delta) --n;
  return n;
}

std::vector<double> step_means(const MarkovChain& chain,
                               const RewardFunction& f, std::size_t n,
                               const Vector& start) {
  check_reward_matches(chain, f);
  if (static_cast<std::size_t>(start.size()) != chain.n_states()) {
    throw Error(ErrorCode::BadInitial, "start distribution has wrong length");
  }
  std::vector<double> means;
  means.reserve(n);
  Eigen::RowVectorXd dist = start.transpose();
  for (std::size_t k = 0; k < n; ++k) {
    means.push_back(expectation(f, dist.transpose()));
    dist = dist * chain.transition();
  }
  return means;
}

double exact_tail(const MarkovChain& chain, const RewardFunction& f,
                  std::size_t n, double t, const Vector& start) {
  check_deviation(t);
  if (n == 0) {
    throw Error(ErrorCode::BadParameter, "sample count must be positive");
  }
  const double paths =
      std::pow(static_cast<double>(chain.n_states()), static_cast<double>(n));
  if (paths > kMaxEnumeratedPaths) {
    std::ostringstream msg;
    msg << chain.n_states() << "^" << n << " paths exceed the enumeration cap";
    throw Error(ErrorCode::TooLarge, msg.str());
  }
  const auto means = step_means(chain, f, n, start);
  double center = 0.0;
  for (double m : means) center += m;
  return PathEnumerator(chain, f, n, center, t).run(start);
}

PairProblem lift_pair_problem(const MarkovChain& chain,
                              const PairRewardFunction& f2) {
  PairChain pairs = pair_chain(chain);
  RewardFunction reward = lift_pair_reward(pairs, f2);
  return PairProblem{std::move(pairs), std::move(reward)};
}

double exact_pair_tail(const MarkovChain& chain, const PairRewardFunction& f2,
                       std::size_t n, double t, const Vector& start) {
  const PairProblem lifted = lift_pair_problem(chain, f2);
  const Vector pair_start = lifted.pairs.lift_distribution(chain, start);
  return exact_tail(lifted.pairs.chain, lifted.reward, n, t, pair_start);
}

TailEstimate empirical_tail(const MarkovChain& chain, const RewardFunction& f,
                            std::size_t n, double t, std::uint64_t trials,
                            std::uint64_t seed, const Vector* start,
                            unsigned threads) {
  check_deviation(t);
  check_reward_matches(chain, f);
  if (n == 0 || trials == 0) {
    throw Error(ErrorCode::BadParameter,
                "sample count and trial count must be positive");
  }
  const Vector pi = stationary_distribution(chain);
  const Vector& q = start != nullptr ? *start : pi;
  double center = 0.0;
  if (start == nullptr) {
    center = static_cast<double>(n) * expectation(f, pi);
  } else {
    for (double m : step_means(chain, f, n, q)) center += m;
  }

  std::vector<unsigned char> hit(trials, 0);
  parallel_for(trials, threads, [&](std::size_t i) {
    RandomStream rng = seed_stream(seed, i);
    State x = draw_from(q, rng);
    double sum = f(x);
    for (std::size_t k = 1; k < n; ++k) {
      x = chain.step(x, rng);
      sum += f(x);
    }
    hit[i] = reaches(sum - center, t) ? 1 : 0;
  });

  TailEstimate result;
  result.trials = trials;
  for (unsigned char h : hit) result.exceedances += h;
  const double p = static_cast<double>(result.exceedances) /
                   static_cast<double>(trials);
  result.estimate = p;
  result.standard_error = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  return result;
}

HoeffdingBoundSpec pair_bound_inputs(const MarkovChain& chain,
                                     const PairRewardFunction& f2,
                                     std::size_t n) {
  const PairProblem lifted = lift_pair_problem(chain, f2);
  const double hit = max_hitting_time(lifted.pairs.chain);
  return HoeffdingBoundSpec::for_pair_chain(n, lifted.reward.range(), hit);
}

}  // namespace mhb
