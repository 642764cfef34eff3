#include "raim/numerics.hpp"

#include <algorithm>
#include <numeric>

namespace raim {

namespace {

constexpr double kTinyWeight = 1e-300;
constexpr double kInf = std::numeric_limits<double>::infinity();

double log_or_neg_inf(double w) { return w > 0.0 ? std::log(w) : -kInf; }

// log of the product weight s in w1*w2*s; -inf for the delta*delta mismatch.
double log_overlap(const WeightedGaussian& g1, const WeightedGaussian& g2) {
  if (g1.is_delta() && g2.is_delta()) return g1.mean == g2.mean ? 0.0 : -kInf;
  return log_normal_pdf(g1.mean, g2.mean, g1.variance + g2.variance);
}

}  // namespace

GaussianMixture::GaussianMixture(std::vector<WeightedGaussian> components, double log_scale)
    : components_(std::move(components)), log_scale_(log_scale) {
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0) || !(c.variance >= 0.0)) {
      throw std::invalid_argument("GaussianMixture: negative weight or variance");
    }
  }
}

double GaussianMixture::weight_sum() const noexcept {
  double s = 0.0;
  for (const auto& c : components_) s += c.weight;
  return s;
}

double GaussianMixture::log_mass() const noexcept {
  return log_or_neg_inf(weight_sum()) + log_scale_;
}

GaussianMixture& GaussianMixture::normalize() {
  const double s = weight_sum();
  if (!(s > 0.0)) throw std::domain_error("GaussianMixture::normalize: zero total mass");
  for (auto& c : components_) c.weight /= s;
  log_scale_ = 0.0;
  return *this;
}

GaussianMixture& GaussianMixture::sort_by_weight() {
  std::stable_sort(components_.begin(), components_.end(),
                   [](const WeightedGaussian& a, const WeightedGaussian& b) {
                     return a.weight > b.weight;
                   });
  return *this;
}

GaussianMixture& GaussianMixture::drop_zero_weights() {
  if (components_.empty()) return *this;
  std::vector<WeightedGaussian> kept;
  kept.reserve(components_.size());
  std::copy_if(components_.begin(), components_.end(), std::back_inserter(kept),
               [](const WeightedGaussian& c) { return c.weight > 0.0; });
  if (kept.empty()) kept.push_back(components_.front());
  components_ = std::move(kept);
  return *this;
}

double normal_pdf(double t, double mean, double variance) {
  if (variance == 0.0) return t == mean ? kInf : 0.0;
  const double d = t - mean;
  return kInvSqrt2Pi / std::sqrt(variance) * std::exp(-0.5 * d * d / variance);
}

double log_normal_pdf(double t, double mean, double variance) {
  if (variance == 0.0) return t == mean ? kInf : -kInf;
  const double d = t - mean;
  return -kLogSqrt2Pi - 0.5 * std::log(variance) - 0.5 * d * d / variance;
}

WeightedGaussian gaussian_product(const WeightedGaussian& g1, const WeightedGaussian& g2) {
  const double w = g1.weight * g2.weight;
  if (g1.is_delta() && g2.is_delta()) {
    return {g1.mean == g2.mean ? w : 0.0, g1.mean, 0.0};
  }
  if (g1.is_delta()) return {w * normal_pdf(g1.mean, g2.mean, g2.variance), g1.mean, 0.0};
  if (g2.is_delta()) return {w * normal_pdf(g2.mean, g1.mean, g1.variance), g2.mean, 0.0};

  const double sum = g1.variance + g2.variance;
  const double variance = g1.variance * g2.variance / sum;
  const double mean = (g1.mean * g2.variance + g2.mean * g1.variance) / sum;
  return {w * normal_pdf(g1.mean, g2.mean, sum), mean, variance};
}

GaussianMixture mixture_product(const GaussianMixture& a, const GaussianMixture& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("mixture_product: empty mixture");

  std::vector<WeightedGaussian> out;
  out.reserve(a.size() * b.size());
  bool underflow = false;
  for (const auto& ga : a.components()) {
    for (const auto& gb : b.components()) {
      const auto g = gaussian_product(ga, gb);
      if (g.weight < kTinyWeight && ga.weight > 0.0 && gb.weight > 0.0 &&
          std::isfinite(log_overlap(ga, gb))) {
        underflow = true;
      }
      out.push_back(g);
    }
  }
  double log_scale = a.log_scale() + b.log_scale();
  if (!underflow) return GaussianMixture(std::move(out), log_scale);

  // Redo the weights in log domain and factor the largest into the scale.
  std::vector<double> log_w(out.size());
  std::size_t k = 0;
  for (const auto& ga : a.components()) {
    for (const auto& gb : b.components()) {
      log_w[k++] = log_or_neg_inf(ga.weight) + log_or_neg_inf(gb.weight) + log_overlap(ga, gb);
    }
  }
  const double peak = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(peak)) return GaussianMixture(std::move(out), log_scale);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].weight = std::exp(log_w[i] - peak);
  return GaussianMixture(std::move(out), log_scale + peak);
}

GaussianMixture mixture_shift_convolve(const GaussianMixture& m, double offset,
                                       double extra_variance, bool negate) {
  if (m.empty()) throw std::invalid_argument("mixture_shift_convolve: empty mixture");
  if (!(extra_variance >= 0.0)) {
    throw std::invalid_argument("mixture_shift_convolve: negative extra variance");
  }
  std::vector<WeightedGaussian> out;
  out.reserve(m.size());
  for (const auto& c : m.components()) {
    out.push_back({c.weight, offset + (negate ? -c.mean : c.mean), c.variance + extra_variance});
  }
  return GaussianMixture(std::move(out), m.log_scale());
}

double mixture_eval(const GaussianMixture& m, double t) {
  double s = 0.0;
  for (const auto& c : m.components()) {
    if (c.weight == 0.0) continue;
    s += c.weight * normal_pdf(t, c.mean, c.variance);
  }
  return s * std::exp(m.log_scale());
}

double mixture_log_eval(const GaussianMixture& m, double t) {
  std::vector<double> terms;
  terms.reserve(m.size());
  double peak = -kInf;
  for (const auto& c : m.components()) {
    const double lt = log_or_neg_inf(c.weight) + log_normal_pdf(t, c.mean, c.variance);
    terms.push_back(lt);
    peak = std::max(peak, lt);
  }
  if (!std::isfinite(peak)) return peak;
  double s = 0.0;
  for (double lt : terms) s += std::exp(lt - peak);
  return peak + std::log(s) + m.log_scale();
}

double mixture_mean(const GaussianMixture& m) {
  const double scale = std::exp(m.log_scale());
  if (std::abs(m.weight_sum() * scale - 1.0) > 1e-9) {
    throw std::domain_error("mixture_mean: mixture is not normalized");
  }
  double mean = 0.0;
  for (const auto& c : m.components()) mean += c.weight * c.mean;
  return mean * scale;
}

double mixture_interval_risk(const GaussianMixture& m, double center, double radius) {
  double risk = 0.0;
  for (const auto& c : m.components()) {
    if (c.weight == 0.0) continue;
    if (c.is_delta()) {
      if (std::abs(c.mean - center) > radius) risk += c.weight;
      continue;
    }
    const double sd = c.stddev();
    risk += c.weight * (q_function((center + radius - c.mean) / sd) +
                        q_function((c.mean - center + radius) / sd));
  }
  return risk * std::exp(m.log_scale());
}

double q_function(double u) { return 0.5 * std::erfc(u * 0.70710678118654752440); }

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("q_inverse: p must lie in (0, 1)");
  if (p > 0.5) return -q_inverse(1.0 - p);
  if (p == 0.5) return 0.0;

  // Acklam's rational approximation for the lower normal quantile.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  double lower;
  if (p < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(p));
    lower = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    lower = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  double u = -lower;

  // Halley refinement against the erfc-based tail.
  for (int it = 0; it < 3; ++it) {
    const double density = kInvSqrt2Pi * std::exp(-0.5 * u * u);
    if (density == 0.0) break;
    const double step = (p - q_function(u)) / density;  // Newton step is u - step
    u -= step / (1.0 + 0.5 * u * step);
  }
  return u;
}

Bracket default_bracket(const GaussianMixture& m, double center) {
  double max_sd = 0.0;
  double max_offset = 0.0;
  for (const auto& c : m.components()) {
    max_sd = std::max(max_sd, c.stddev());
    max_offset = std::max(max_offset, std::abs(c.mean - center));
  }
  Bracket br;
  br.lo = 0.0;
  br.hi = 10.0 * (max_sd + max_offset);
  if (!(br.hi > 0.0)) br.hi = 1.0;
  return br;
}

}  // namespace raim
