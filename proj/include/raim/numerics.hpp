#pragma once

// Scalar Gaussian and Gaussian-mixture algebra shared by both RAIM families.
//
// A component with variance 0 is a Dirac delta at its mean. Products and
// convolutions special-case deltas symbolically; no infinite precision ever
// enters the arithmetic.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace raim {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

struct WeightedGaussian {
  double weight = 1.0;
  double mean = 0.0;
  double variance = 0.0;

  bool is_delta() const noexcept { return variance == 0.0; }
  double stddev() const noexcept { return std::sqrt(variance); }
};

/// Weighted sum of scalar Gaussians, scaled by exp(log_scale).
///
/// The log scale lets long product chains keep exact unnormalized mass
/// without underflowing the linear weights. normalize() folds it away.
class GaussianMixture {
 public:
  GaussianMixture() = default;
  explicit GaussianMixture(std::vector<WeightedGaussian> components,
                           double log_scale = 0.0);

  static GaussianMixture single(double weight, double mean, double variance) {
    return GaussianMixture({WeightedGaussian{weight, mean, variance}});
  }

  std::span<const WeightedGaussian> components() const noexcept {
    return components_;
  }
  const WeightedGaussian& operator[](std::size_t i) const { return components_[i]; }
  std::size_t size() const noexcept { return components_.size(); }
  bool empty() const noexcept { return components_.empty(); }
  double log_scale() const noexcept { return log_scale_; }

  /// Sum of linear weights, ignoring the log scale.
  double weight_sum() const noexcept;
  /// log of the total mass, including the log scale.
  double log_mass() const noexcept;

  GaussianMixture& normalize();
  GaussianMixture& sort_by_weight();
  /// Drops zero-weight components. Keeps at least one component.
  GaussianMixture& drop_zero_weights();

 private:
  std::vector<WeightedGaussian> components_;
  double log_scale_ = 0.0;
};

double normal_pdf(double t, double mean, double variance);
double log_normal_pdf(double t, double mean, double variance);

WeightedGaussian gaussian_product(const WeightedGaussian& g1, const WeightedGaussian& g2);

/// All L1*L2 pairwise component products, unnormalized.
GaussianMixture mixture_product(const GaussianMixture& a, const GaussianMixture& b);

/// Maps each component (w, mu, var) to (w, offset +/- mu, var + extra_variance).
GaussianMixture mixture_shift_convolve(const GaussianMixture& m, double offset,
                                       double extra_variance, bool negate);

double mixture_eval(const GaussianMixture& m, double t);
/// log of mixture_eval, computed with log-sum-exp. -inf when the density is 0.
double mixture_log_eval(const GaussianMixture& m, double t);

double mixture_mean(const GaussianMixture& m);

/// Pr(|t - center| > radius) under the mixture.
double mixture_interval_risk(const GaussianMixture& m, double center, double radius);

// Standard normal upper tail and its inverse.
double q_function(double u);
double q_inverse(double p);

struct Bracket {
  double lo = 0.0;
  double hi = 1.0;
  double tolerance = 1e-6;
  int max_iterations = 200;
};

class PlUnavailable : public std::runtime_error {
 public:
  explicit PlUnavailable(const std::string& what) : std::runtime_error(what) {}
};

/// Initial bracket for a radius search around `center`.
Bracket default_bracket(const GaussianMixture& m, double center);

/// Smallest radius r in the bracket with risk(r) <= target, to within
/// bracket.tolerance. `risk` must be non-increasing. The upper end is doubled
/// until it brackets the target, at most 40 times.
template <class RiskFn>
double bisect_min_radius(RiskFn&& risk, double target, Bracket bracket) {
  if (!(bracket.lo < bracket.hi) || !(bracket.tolerance > 0.0)) {
    throw std::invalid_argument("bisect_min_radius: invalid bracket");
  }
  double lo = bracket.lo;
  double hi = bracket.hi;
  if (risk(lo) <= target) return lo;

  const double hi_cap = std::ldexp(bracket.hi, 40);
  while (risk(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > hi_cap || !std::isfinite(hi)) {
      throw PlUnavailable("PL unavailable: risk never drops to target");
    }
  }
  for (int it = 0; it < bracket.max_iterations && hi - lo > bracket.tolerance; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (risk(mid) <= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace raim
