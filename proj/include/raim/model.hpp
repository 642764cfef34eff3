#pragma once

// 1D snapshot measurement model y_i = x + b_i + n_i with a Bernoulli-Gaussian
// fault prior on each bias b_i.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "raim/numerics.hpp"

namespace raim {

/// Per-base-station prior parameters.
struct BsParams {
  double theta = 0.05;      // prior fault probability
  double bias_mean = 0.0;   // m_b (m)
  double bias_std = 50.0;   // sigma_b (m)
  double noise_std = 1.0;   // sigma_n (m)
};

struct FlatPrior {};
struct GaussianPrior {
  double mean = 0.0;
  double variance = 1.0;
};
using PositionPrior = std::variant<FlatPrior, GaussianPrior>;

struct Scenario {
  std::vector<BsParams> stations;
  double tir = 1e-3;
  double theta_threshold = 0.5;
  double p_fa = 5e-2;
  PositionPrior prior_x = FlatPrior{};
  double true_x = 0.0;

  std::size_t size() const noexcept { return stations.size(); }

  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
  /// Soft violations (bias spread not dominating the noise).
  std::vector<std::string> warnings() const;

  Eigen::VectorXd noise_stds() const;
  /// Same scenario restricted to the given station indices, in order.
  Scenario subset(const std::vector<std::size_t>& keep) const;
};

struct Epoch {
  double true_x = 0.0;
  std::vector<std::uint8_t> lambda;
  Eigen::VectorXd bias;
  Eigen::VectorXd noise;
  Eigen::VectorXd y;
};

/// Stateless 64-bit mixer used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Draws one epoch. Every station consumes the same number of variates
/// whatever its fault state, so the noise stream for a seed does not depend
/// on theta.
Epoch sample_epoch(const Scenario& s, std::uint64_t rng_seed);

/// (1 - theta) delta(b) + theta N(b; m_b, sigma_b^2), zero-weight terms dropped.
GaussianMixture bias_prior_mixture(const BsParams& b);

}  // namespace raim
