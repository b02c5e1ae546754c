#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "covfit/gaussian.hpp"
#include "covfit/graph.hpp"

namespace covfit {

/// splitmix64; fully specified so streams are identical across platforms.
struct SplitMix64 {
  std::uint64_t state = 0;
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

/// Deterministic uniform / normal generator (Box-Muller on splitmix64
/// output). Avoids std::normal_distribution, whose stream is
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : sm_{seed} {}

  std::uint64_t next_u64() { return sm_.next(); }
  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(sm_.next() >> 11) * 0x1.0p-53; }
  double normal();

 private:
  SplitMix64 sm_;
  std::optional<double> cached_;
};

/// Stable 64-bit mix of a base seed and an instance index.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t k);

/// A reproducible benchmark instance: an Erdos-Renyi bi-directed graph, a
/// true covariance inside the model, and the empirical covariance of n
/// samples drawn from it. Everything is a pure function of (seed, p,
/// edge_prob, n).
struct RandomInstance {
  std::uint64_t seed = 0;
  int p = 0;
  double edge_prob = 0.0;
  int n = 0;
  BidirectedGraph graph;
  Eigen::MatrixXd sigma_true;
  SampleSummary summary;
};

/// Builds the instance: graph ~ ER(p, edge_prob); sigma_true is the Gram
/// matrix of a random square matrix projected into the model by a fit
/// (fallback: zero the non-edges and boost the diagonal until positive
/// definite); the summary holds the zero-mean empirical covariance of n
/// draws from N(0, sigma_true). Requires n >= p.
RandomInstance make_instance(std::uint64_t seed, int p, double edge_prob, int n);

}  // namespace covfit
