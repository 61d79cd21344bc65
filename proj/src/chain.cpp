#include "mhb/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "mhb/error.hpp"

namespace mhb {

namespace {

using Index = Eigen::Index;

Vector validate_distribution(const Vector& v, std::size_t n) {
  if (static_cast<std::size_t>(v.size()) != n) {
    std::ostringstream msg;
    msg << "initial distribution has length " << v.size() << ", expected "
        << n;
    throw Error(ErrorCode::BadInitial, msg.str());
  }
  double sum = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i)) || v(i) < 0.0) {
      throw Error(ErrorCode::BadInitial,
                  "initial distribution has a negative or non-finite entry");
    }
    sum += v(i);
  }
  if (std::abs(sum - 1.0) > kRowRepairTolerance) {
    throw Error(ErrorCode::BadInitial,
                "initial distribution does not sum to 1");
  }
  return v / sum;
}

// States reachable from `source` along positive entries, forward or
// against the edge direction.
std::vector<bool> reachable(const Matrix& p, Index source, bool reverse) {
  const Index n = p.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<Index> frontier;
  seen[static_cast<std::size_t>(source)] = true;
  frontier.push(source);
  while (!frontier.empty()) {
    const Index u = frontier.front();
    frontier.pop();
    for (Index v = 0; v < n; ++v) {
      const double w = reverse ? p(v, u) : p(u, v);
      if (w > 0.0 && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        frontier.push(v);
      }
    }
  }
  return seen;
}

// gcd over support edges (u, v) of level(u) + 1 - level(v), with levels
// from a BFS rooted at state 0. Requires strong connectivity.
std::size_t period_of(const Matrix& p) {
  const Index n = p.rows();
  std::vector<long> level(static_cast<std::size_t>(n), -1);
  std::queue<Index> frontier;
  level[0] = 0;
  frontier.push(0);
  while (!frontier.empty()) {
    const Index u = frontier.front();
    frontier.pop();
    for (Index v = 0; v < n; ++v) {
      if (p(u, v) > 0.0 && level[static_cast<std::size_t>(v)] < 0) {
        level[static_cast<std::size_t>(v)] =
            level[static_cast<std::size_t>(u)] + 1;
        frontier.push(v);
      }
    }
  }
  long g = 0;
  for (Index u = 0; u < n; ++u) {
    for (Index v = 0; v < n; ++v) {
      if (p(u, v) > 0.0) {
        const long diff = level[static_cast<std::size_t>(u)] + 1 -
                          level[static_cast<std::size_t>(v)];
        g = std::gcd(g, std::abs(diff));
      }
    }
  }
  return static_cast<std::size_t>(g);
}

void require_irreducible(const MarkovChain& chain, const char* what) {
  if (!is_irreducible(chain)) {
    throw Error(ErrorCode::NotIrreducible,
                std::string(what) + " requires an irreducible chain");
  }
}

}  // namespace

MarkovChain MarkovChain::validate(const Matrix& raw,
                                  std::optional<Vector> initial,
                                  std::vector<std::string> labels) {
  if (raw.rows() == 0 || raw.rows() != raw.cols()) {
    throw Error(ErrorCode::NotSquare,
                "transition matrix must be square and nonempty");
  }
  const Index n = raw.rows();
  MarkovChain chain;
  chain.transition_ = raw;
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double v = raw(i, j);
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonStochasticRow,
                    "transition matrix has a non-finite entry");
      }
      if (v < 0.0) {
        std::ostringstream msg;
        msg << "negative transition probability at (" << i << ", " << j
            << ")";
        throw Error(ErrorCode::NegativeEntry, msg.str());
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowRepairTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row " << i << " sums to " << sum;
      throw Error(ErrorCode::NonStochasticRow, msg.str());
    }
    chain.transition_.row(i) /= sum;
  }
  if (initial) {
    chain.initial_ =
        validate_distribution(*initial, static_cast<std::size_t>(n));
  }
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::NotSquare,
                "state label list must have one entry per state");
  }
  chain.labels_ = std::move(labels);

  chain.cumulative_.resize(static_cast<std::size_t>(n * n));
  for (Index i = 0; i < n; ++i) {
    double acc = 0.0;
    Index last_positive = 0;
    for (Index j = 0; j < n; ++j) {
      acc += chain.transition_(i, j);
      chain.cumulative_[static_cast<std::size_t>(i * n + j)] = acc;
      if (chain.transition_(i, j) > 0.0) last_positive = j;
    }
    for (Index j = last_positive; j < n; ++j) {
      chain.cumulative_[static_cast<std::size_t>(i * n + j)] = 1.0;
    }
  }
  return chain;
}

MarkovChain MarkovChain::with_initial(const Vector& initial) const {
  MarkovChain copy = *this;
  copy.initial_ = validate_distribution(initial, n_states());
  return copy;
}

State MarkovChain::step(State from, RandomStream& rng) const {
  const std::size_t n = n_states();
  const double u = rng.uniform();
  const double* row = cumulative_.data() + from * n;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (u < row[j]) return j;
  }
  return n - 1;
}

MarkovChain validate_chain(const Matrix& raw, std::optional<Vector> initial) {
  return MarkovChain::validate(raw, std::move(initial));
}

State draw_from(const Vector& distribution, RandomStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  Index last_positive = 0;
  for (Index j = 0; j < distribution.size(); ++j) {
    if (distribution(j) <= 0.0) continue;
    last_positive = j;
    acc += distribution(j);
    if (u < acc) return static_cast<State>(j);
  }
  return static_cast<State>(last_positive);
}

const Vector& ChainAnalysis::require_stationary() const {
  if (!stationary) {
    throw Error(ErrorCode::NoStationary,
                "reducible chain has no unique stationary distribution");
  }
  return *stationary;
}

bool is_irreducible(const MarkovChain& chain) {
  const Matrix& p = chain.transition();
  const auto forward = reachable(p, 0, false);
  const auto backward = reachable(p, 0, true);
  return std::all_of(forward.begin(), forward.end(), [](bool b) { return b; }) &&
         std::all_of(backward.begin(), backward.end(), [](bool b) { return b; });
}

Vector stationary_distribution(const MarkovChain& chain) {
  require_irreducible(chain, "stationary distribution");
  const Index n = static_cast<Index>(chain.n_states());
  Matrix a = chain.transition().transpose() - Matrix::Identity(n, n);
  a.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;
  Vector pi = a.partialPivLu().solve(rhs);
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(pi(i)) || pi(i) <= 0.0) {
      throw Error(ErrorCode::SingularSystem,
                  "stationary solve produced a non-positive entry");
    }
  }
  pi /= pi.sum();
  return pi;
}

ChainAnalysis analyze(const MarkovChain& chain) {
  ChainAnalysis result;
  result.irreducible = is_irreducible(chain);
  if (result.irreducible) {
    result.period = period_of(chain.transition());
    result.stationary = stationary_distribution(chain);
  }
  return result;
}

HittingTimeTable hitting_times(const MarkovChain& chain) {
  require_irreducible(chain, "hitting times");
  const Index n = static_cast<Index>(chain.n_states());
  const Matrix& p = chain.transition();
  HittingTimeTable table;
  table.expected_hits = Matrix::Zero(n, n);
  if (n == 1) return table;

  const Index m = n - 1;
  Matrix system(m, m);
  const Vector ones = Vector::Ones(m);
  for (Index target = 0; target < n; ++target) {
    // Rows/columns of P with the target removed.
    auto full = [target](Index k) { return k < target ? k : k + 1; };
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < m; ++j) {
        system(i, j) = (i == j ? 1.0 : 0.0) - p(full(i), full(j));
      }
    }
    const Eigen::PartialPivLU<Matrix> lu = system.partialPivLu();
    Vector h = lu.solve(ones);
    // Refinement with the residual accumulated in extended precision.
    for (int step = 0; step < 3 && h.allFinite(); ++step) {
      Vector r(m);
      for (Index i = 0; i < m; ++i) {
        long double acc = 1.0L;
        for (Index j = 0; j < m; ++j) {
          acc -= static_cast<long double>(system(i, j)) * h(j);
        }
        r(i) = static_cast<double>(acc);
      }
      const Vector correction = lu.solve(r);
      if (!correction.allFinite() || (h + correction) == h) break;
      h += correction;
    }
    const double residual = (system * h - ones).lpNorm<Eigen::Infinity>();
    if (!std::isfinite(residual) || residual > 1e-9 || !h.allFinite() ||
        h.minCoeff() < 0.0) {
      std::ostringstream msg;
      msg << "hitting-time system for target " << target
          << " is numerically singular (residual " << residual << ")";
      throw Error(ErrorCode::SingularSystem, msg.str());
    }
    table.max_residual = std::max(table.max_residual, residual);
    for (Index i = 0; i < m; ++i) {
      table.expected_hits(full(i), target) = h(i);
    }
  }
  table.max_hit = table.expected_hits.maxCoeff();
  return table;
}

double max_hitting_time(const MarkovChain& chain) {
  return hitting_times(chain).max_hit;
}

RewardFunction::RewardFunction(std::vector<double> values, double lower,
                               double upper)
    : values_(std::move(values)), lower_(lower), upper_(upper) {
  if (!std::isfinite(lower_) || !std::isfinite(upper_) || !(lower_ < upper_)) {
    throw Error(ErrorCode::BadReward,
                "reward bounds must be finite with lower < upper");
  }
  if (values_.empty()) {
    throw Error(ErrorCode::BadReward, "reward function has no values");
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < lower_ || v > upper_) {
      throw Error(ErrorCode::BadReward, "reward value outside its bounds");
    }
  }
}

double expectation(const RewardFunction& f, const Vector& distribution) {
  if (static_cast<std::size_t>(distribution.size()) != f.size()) {
    throw Error(ErrorCode::BadReward,
                "reward function and distribution differ in length");
  }
  double total = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    total += f(x) * distribution(static_cast<Index>(x));
  }
  return total;
}

std::optional<std::size_t> PairChain::index_of(State from, State to) const {
  const auto it = std::lower_bound(pair_states.begin(), pair_states.end(),
                                   Transition{from, to});
  if (it == pair_states.end() || *it != Transition{from, to}) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - pair_states.begin());
}

Vector PairChain::lift_distribution(const MarkovChain& base,
                                    const Vector& q) const {
  Vector lifted(static_cast<Index>(pair_states.size()));
  for (std::size_t k = 0; k < pair_states.size(); ++k) {
    const auto [x, y] = pair_states[k];
    lifted(static_cast<Index>(k)) = q(static_cast<Index>(x)) * base.prob(x, y);
  }
  return lifted;
}

PairChain pair_chain(const MarkovChain& chain) {
  require_irreducible(chain, "pair chain");
  const std::size_t n = chain.n_states();
  std::vector<Transition> pairs;
  for (State x = 0; x < n; ++x) {
    for (State y = 0; y < n; ++y) {
      if (chain.prob(x, y) > 0.0) pairs.emplace_back(x, y);
    }
  }
  // Row-major enumeration keeps `pairs` sorted for index_of.
  std::vector<std::vector<std::size_t>> outgoing(n);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    outgoing[pairs[k].first].push_back(k);
  }
  const Index m = static_cast<Index>(pairs.size());
  Matrix lifted = Matrix::Zero(m, m);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const State y = pairs[k].second;
    for (std::size_t next : outgoing[y]) {
      lifted(static_cast<Index>(k), static_cast<Index>(next)) =
          chain.prob(y, pairs[next].second);
    }
  }
  std::vector<std::string> labels;
  labels.reserve(pairs.size());
  for (const auto& [x, y] : pairs) {
    labels.push_back("(" + std::to_string(x) + "," + std::to_string(y) + ")");
  }
  return PairChain{pairs, MarkovChain::validate(lifted, std::nullopt,
                                                std::move(labels))};
}

RewardFunction lift_pair_reward(const PairChain& pairs,
                                const PairRewardFunction& f2) {
  if (f2.values.size() != pairs.pair_states.size()) {
    throw Error(ErrorCode::SupportMismatch,
                "pair reward must be defined on exactly the positive "
                "transitions");
  }
  std::vector<double> values;
  values.reserve(pairs.pair_states.size());
  for (const auto& transition : pairs.pair_states) {
    const auto it = f2.values.find(transition);
    if (it == f2.values.end()) {
      throw Error(ErrorCode::SupportMismatch,
                  "pair reward missing transition (" +
                      std::to_string(transition.first) + "," +
                      std::to_string(transition.second) + ")");
    }
    values.push_back(it->second);
  }
  return RewardFunction(std::move(values), f2.lower, f2.upper);
}

std::vector<State> sample_path(const MarkovChain& chain, std::size_t length,
                               RandomStream& rng, const Vector* start) {
  if (length == 0) {
    throw Error(ErrorCode::BadParameter, "path length must be positive");
  }
  if (start == nullptr) {
    if (!chain.initial()) {
      throw Error(ErrorCode::MissingInitial,
                  "chain has no initial distribution and none was supplied");
    }
    start = &*chain.initial();
  }
  if (static_cast<std::size_t>(start->size()) != chain.n_states()) {
    throw Error(ErrorCode::BadInitial, "start distribution has wrong length");
  }
  std::vector<State> path;
  path.reserve(length);
  path.push_back(draw_from(*start, rng));
  for (std::size_t k = 1; k < length; ++k) {
    path.push_back(chain.step(path.back(), rng));
  }
  return path;
}

}  // namespace mhb
