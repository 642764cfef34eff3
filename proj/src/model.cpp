#include "raim/model.hpp"

#include <random>
#include <sstream>
#include <stdexcept>

namespace raim {

void Scenario::validate() const {
  if (stations.empty()) throw std::invalid_argument("scenario has no stations");
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const auto& b = stations[i];
    std::ostringstream where;
    where << "station " << i << ": ";
    if (!(b.theta >= 0.0 && b.theta <= 1.0)) {
      throw std::invalid_argument(where.str() + "theta must lie in [0, 1]");
    }
    if (!(b.noise_std > 0.0)) throw std::invalid_argument(where.str() + "noise_std must be > 0");
    if (!(b.bias_std > 0.0)) throw std::invalid_argument(where.str() + "bias_std must be > 0");
    if (!std::isfinite(b.bias_mean)) throw std::invalid_argument(where.str() + "bias_mean not finite");
  }
  if (!(tir > 0.0 && tir <= 1.0)) throw std::invalid_argument("tir must lie in (0, 1]");
  if (!(theta_threshold >= 0.0 && theta_threshold <= 1.0)) {
    throw std::invalid_argument("theta_threshold must lie in [0, 1]");
  }
  if (!(p_fa > 0.0 && p_fa < 1.0)) throw std::invalid_argument("p_fa must lie in (0, 1)");
  if (const auto* g = std::get_if<GaussianPrior>(&prior_x); g && !(g->variance > 0.0)) {
    throw std::invalid_argument("Gaussian position prior needs variance > 0");
  }
}

std::vector<std::string> Scenario::warnings() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    if (stations[i].bias_std <= stations[i].noise_std) {
      out.push_back("station " + std::to_string(i) + ": bias_std does not exceed noise_std");
    }
  }
  return out;
}

Eigen::VectorXd Scenario::noise_stds() const {
  Eigen::VectorXd s(static_cast<Eigen::Index>(stations.size()));
  for (std::size_t i = 0; i < stations.size(); ++i) s[static_cast<Eigen::Index>(i)] = stations[i].noise_std;
  return s;
}

Scenario Scenario::subset(const std::vector<std::size_t>& keep) const {
  Scenario out = *this;
  out.stations.clear();
  for (auto i : keep) out.stations.push_back(stations.at(i));
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

Epoch sample_epoch(const Scenario& s, std::uint64_t rng_seed) {
  const auto m = static_cast<Eigen::Index>(s.size());
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  Epoch e;
  e.true_x = s.true_x;
  e.lambda.resize(s.size());
  e.bias.resize(m);
  e.noise.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& b = s.stations[static_cast<std::size_t>(i)];
    const double u = unit(rng);
    const double zb = normal(rng);
    const double zn = normal(rng);
    const bool faulty = u < b.theta;
    e.lambda[static_cast<std::size_t>(i)] = faulty ? 1 : 0;
    e.bias[i] = faulty ? b.bias_mean + b.bias_std * zb : 0.0;
    e.noise[i] = b.noise_std * zn;
  }
  e.y = (e.bias + e.noise).array() + e.true_x;
  return e;
}

GaussianMixture bias_prior_mixture(const BsParams& b) {
  GaussianMixture m({{1.0 - b.theta, 0.0, 0.0},
                     {b.theta, b.bias_mean, b.bias_std * b.bias_std}});
  return m.drop_zero_weights();
}

}  // namespace raim
