#pragma once

// Reference computations used only by tests. They deliberately avoid the
// library's solvers: everything here is plain loops over the raw matrix.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "mhb/chain.hpp"

namespace mhb::oracle {

using Grid = std::vector<std::vector<double>>;

inline Grid to_grid(const MarkovChain& chain) {
  const std::size_t n = chain.n_states();
  Grid g(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g[i][j] = chain.prob(i, j);
  return g;
}

/// E[T_y | X_1 = x] = sum_k k Pr(T_y = k), accumulated by propagating the
/// mass of paths that have avoided y until less than `residual` remains.
inline double hitting_time_series(const Grid& p, std::size_t x, std::size_t y,
                                  double residual = 1e-10) {
  if (x == y) return 0.0;
  const std::size_t n = p.size();
  std::vector<double> alive(n, 0.0);
  alive[x] = 1.0;
  double expected = 0.0;
  double remaining = 1.0;
  for (std::size_t k = 1; remaining >= residual && k < 100000000; ++k) {
    std::vector<double> next(n, 0.0);
    double first_hit = 0.0;
    for (std::size_t z = 0; z < n; ++z) {
      if (alive[z] == 0.0) continue;
      for (std::size_t w = 0; w < n; ++w) {
        const double m = alive[z] * p[z][w];
        if (w == y) first_hit += m;
        else next[w] += m;
      }
    }
    expected += static_cast<double>(k) * first_hit;
    alive = std::move(next);
    remaining = std::accumulate(alive.begin(), alive.end(), 0.0);
  }
  return expected;
}

/// Transitive closure by Warshall's algorithm; strongly connected iff every
/// entry is reachable.
inline bool strongly_connected(const Grid& p) {
  const std::size_t n = p.size();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r[i][j] = (i == j) || p[i][j] > 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!r[i][j]) return false;
  return true;
}

/// gcd of k <= 3n with P^k(0,0) > 0, via boolean matrix powers.
inline std::size_t period_by_powers(const Grid& p) {
  const std::size_t n = p.size();
  std::vector<bool> reach(n, false);
  reach[0] = true;
  std::size_t g = 0;
  for (std::size_t k = 1; k <= 3 * n; ++k) {
    std::vector<bool> next(n, false);
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i])
        for (std::size_t j = 0; j < n; ++j)
          if (p[i][j] > 0.0) next[j] = true;
    reach = std::move(next);
    if (reach[0]) g = std::gcd(g, k);
  }
  return g;
}

/// Pr_q(|sum_{k=1}^n f(X_k) - sum_k E_q f(X_k)| >= t) by iterating over all
/// |S|^n index tuples with a mixed-radix counter.
inline double brute_force_tail(const Grid& p, const std::vector<double>& f,
                               const std::vector<double>& q, std::size_t n,
                               double t) {
  const std::size_t s = p.size();
  // Time-marginal means from explicit distribution propagation.
  std::vector<double> dist = q;
  double center = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t x = 0; x < s; ++x) center += dist[x] * f[x];
    std::vector<double> next(s, 0.0);
    for (std::size_t x = 0; x < s; ++x)
      for (std::size_t y = 0; y < s; ++y) next[y] += dist[x] * p[x][y];
    dist = std::move(next);
  }
  const double threshold = t - 1e-12 * std::max(1.0, std::abs(t));
  std::vector<std::size_t> path(n, 0);
  double tail = 0.0;
  while (true) {
    double prob = q[path[0]];
    double sum = f[path[0]];
    for (std::size_t k = 1; k < n; ++k) {
      prob *= p[path[k - 1]][path[k]];
      sum += f[path[k]];
    }
    if (prob > 0.0 && std::abs(sum - center) >= threshold) tail += prob;
    std::size_t pos = 0;
    while (pos < n && ++path[pos] == s) path[pos++] = 0;
    if (pos == n) break;
  }
  return tail;
}

}  // namespace mhb::oracle
