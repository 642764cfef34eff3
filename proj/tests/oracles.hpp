#pragma once

// Test-only reference computations. Nothing here goes through the mixture
// algebra under test.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "raim/model.hpp"

namespace raim::oracle {

inline double log_pdf(double t, double mean, double variance) {
  const double d = t - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * d * d / variance;
}

inline double pdf(double t, double mean, double variance) {
  return std::exp(log_pdf(t, mean, variance));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// log of the unnormalized posterior p(x | y) by direct enumeration of every
/// fault pattern: sum over lambda of prior(lambda) * prod_i p(y_i | x, lambda_i).
inline double log_unnormalized_posterior(const Scenario& s, const Eigen::VectorXd& y, double x) {
  const std::size_t m = s.size();
  std::vector<double> terms;
  terms.reserve(std::size_t{1} << m);
  for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << m); ++pattern) {
    double lt = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& st = s.stations[i];
      const bool faulty = (pattern >> i) & 1;
      const double prior = faulty ? st.theta : 1.0 - st.theta;
      if (prior == 0.0) {
        lt = -std::numeric_limits<double>::infinity();
        break;
      }
      lt += std::log(prior);
      const double var = st.noise_std * st.noise_std + (faulty ? st.bias_std * st.bias_std : 0.0);
      const double mean = x + (faulty ? st.bias_mean : 0.0);
      lt += log_pdf(y[static_cast<Eigen::Index>(i)], mean, var);
    }
    if (const auto* g = std::get_if<GaussianPrior>(&s.prior_x)) lt += log_pdf(x, g->mean, g->variance);
    terms.push_back(lt);
  }
  const double peak = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  return peak + std::log(acc);
}

/// Posterior fault probability of station k by enumeration, integrating x
/// out with composite Simpson on a wide grid.
inline double fault_posterior_by_enumeration(const Scenario& s, const Eigen::VectorXd& y,
                                             std::size_t k, double lo, double hi, int n = 20000) {
  const std::size_t m = s.size();
  double mass[2] = {0.0, 0.0};
  const double h = (hi - lo) / n;
  for (int j = 0; j <= n; ++j) {
    const double x = lo + j * h;
    const double wgt = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << m); ++pattern) {
      double p = 1.0;
      for (std::size_t i = 0; i < m; ++i) {
        const auto& st = s.stations[i];
        const bool faulty = (pattern >> i) & 1;
        p *= faulty ? st.theta : 1.0 - st.theta;
        const double var = st.noise_std * st.noise_std + (faulty ? st.bias_std * st.bias_std : 0.0);
        p *= pdf(y[static_cast<Eigen::Index>(i)], x + (faulty ? st.bias_mean : 0.0), var);
      }
      mass[(pattern >> k) & 1] += wgt * p;
    }
  }
  return mass[1] / (mass[0] + mass[1]);
}

/// Random heterogeneous scenario and a measurement vector drawn from it.
struct RandomInstance {
  Scenario scenario;
  Eigen::VectorXd y;
};

inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> theta(0.01, 0.3), bias_mean(-50.0, 50.0),
      bias_std(5.0, 60.0), noise_std(0.5, 10.0);
  RandomInstance r;
  for (std::size_t i = 0; i < m; ++i) {
    r.scenario.stations.push_back({theta(rng), bias_mean(rng), bias_std(rng), noise_std(rng)});
  }
  r.y = sample_epoch(r.scenario, rng()).y;
  return r;
}

}  // namespace raim::oracle
