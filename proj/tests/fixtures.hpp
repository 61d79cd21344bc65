#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "mhb/bandits.hpp"
#include "mhb/chain.hpp"

namespace mhb::test {

/// S = {0, 1}, P(0,1) = p, P(1,0) = r.
inline MarkovChain two_state(double p, double r) {
  Matrix m(2, 2);
  m << 1.0 - p, p, r, 1.0 - r;
  return MarkovChain::validate(m);
}

/// Simple random walk on the m-cycle.
inline MarkovChain cycle_walk(std::size_t m) {
  Matrix p = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t x = 0; x < m; ++x) {
    const auto i = static_cast<Eigen::Index>(x);
    p(i, static_cast<Eigen::Index>((x + 1) % m)) += 0.5;
    p(i, static_cast<Eigen::Index>((x + m - 1) % m)) += 0.5;
  }
  return MarkovChain::validate(p);
}

/// Random irreducible chain: a random cyclic permutation guarantees strong
/// connectivity, other entries are kept with probability `density`.
inline MarkovChain random_irreducible(std::size_t n, std::mt19937_64& gen,
                                      double density = 0.5) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), gen);
  const auto N = static_cast<Eigen::Index>(n);
  Matrix p = Matrix::Zero(N, N);
  for (std::size_t k = 0; k < n; ++k) {
    p(static_cast<Eigen::Index>(perm[k]),
      static_cast<Eigen::Index>(perm[(k + 1) % n])) = 0.2 + u(gen);
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      if (p(i, j) == 0.0 && u(gen) < density) p(i, j) = u(gen);
    }
    p.row(i) /= p.row(i).sum();
  }
  return MarkovChain::validate(p);
}

inline Vector uniform_distribution(std::size_t n) {
  return Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
}

inline Vector point_mass(std::size_t n, std::size_t at) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
  v(static_cast<Eigen::Index>(at)) = 1.0;
  return v;
}

/// Two-state arms (p, r) sharing f = (0, 1) on [0, 1]; arm mean p/(p+r).
inline BanditInstance two_state_instance(
    const std::vector<std::pair<double, double>>& arms) {
  std::vector<MarkovChain> chains;
  for (const auto& [p, r] : arms) chains.push_back(two_state(p, r));
  return BanditInstance(std::move(chains), RewardFunction({0.0, 1.0}, 0.0, 1.0));
}

/// Means 0.8, 0.5, 0.4, 0.2 with HitT 4, 1, 1.5, 4.
inline BanditInstance standard_instance() {
  return two_state_instance({{1.0, 0.25}, {1.0, 1.0}, {2.0 / 3.0, 1.0}, {0.25, 1.0}});
}

}  // namespace mhb::test
