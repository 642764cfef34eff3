#include "raim/bayes.hpp"

#include <cmath>
#include <stdexcept>

namespace raim {

namespace {

std::optional<GaussianMixture> prior_message(const Scenario& s) {
  if (const auto* g = std::get_if<GaussianPrior>(&s.prior_x)) {
    return GaussianMixture::single(1.0, g->mean, g->variance);
  }
  return std::nullopt;
}

// Multiplies `msg` into an accumulator where nullopt stands for the unit message.
void accumulate(std::optional<GaussianMixture>& acc, const GaussianMixture& msg) {
  acc = acc ? mixture_product(*acc, msg) : msg;
}

GaussianMixture finish_posterior(std::optional<GaussianMixture> product) {
  if (!product) throw std::runtime_error("posterior is the improper flat prior");
  product->normalize().sort_by_weight();
  return std::move(*product);
}

double fault_posterior(double theta, double log_lambda0, double log_lambda1) {
  const double log_faulty = (theta > 0.0 ? std::log(theta) : -INFINITY) + log_lambda1;
  const double log_clean = (theta < 1.0 ? std::log1p(-theta) : -INFINITY) + log_lambda0;
  if (log_faulty == -INFINITY && log_clean == -INFINITY) {
    throw std::runtime_error("lambda posterior: both hypotheses have zero mass");
  }
  if (log_faulty >= log_clean) return 1.0 / (1.0 + std::exp(log_clean - log_faulty));
  const double r = std::exp(log_faulty - log_clean);
  return r / (1.0 + r);
}

}  // namespace

MessagePassing run_message_passing(const Scenario& s, const Eigen::Ref<const Eigen::VectorXd>& y,
                                   LeaveOneOut schedule) {
  const std::size_t m = s.size();
  if (m == 0) throw std::invalid_argument("run_message_passing: no measurements");
  if (static_cast<std::size_t>(y.size()) != m) {
    throw std::invalid_argument("run_message_passing: measurement count does not match scenario");
  }

  MessagePassing mp;
  mp.branches.resize(m);
  const auto prior = prior_message(s);

  // Steps 1-3: bias priors to the b nodes, then likelihoods of x.
  for (std::size_t i = 0; i < m; ++i) {
    const auto& st = s.stations[i];
    auto& br = mp.branches[i];
    br.f_to_b = bias_prior_mixture(st);
    br.g_to_x = mixture_shift_convolve(br.f_to_b, y[static_cast<Eigen::Index>(i)],
                                       st.noise_std * st.noise_std, /*negate=*/true);
  }

  // Step 4: leave-one-out products at the x node.
  std::optional<GaussianMixture> full;
  if (schedule == LeaveOneOut::Independent) {
    for (std::size_t i = 0; i < m; ++i) {
      auto acc = prior;
      for (std::size_t j = 0; j < m; ++j) {
        if (j != i) accumulate(acc, mp.branches[j].g_to_x);
      }
      mp.branches[i].x_to_g = std::move(acc);
    }
    full = prior;
    for (const auto& br : mp.branches) accumulate(full, br.g_to_x);
  } else {
    std::vector<std::optional<GaussianMixture>> prefix(m + 1), suffix(m + 1);
    prefix[0] = prior;
    for (std::size_t i = 0; i < m; ++i) {
      prefix[i + 1] = prefix[i];
      accumulate(prefix[i + 1], mp.branches[i].g_to_x);
    }
    for (std::size_t i = m; i-- > 0;) {
      suffix[i] = suffix[i + 1] ? mixture_product(mp.branches[i].g_to_x, *suffix[i + 1])
                                : mp.branches[i].g_to_x;
    }
    for (std::size_t i = 0; i < m; ++i) {
      auto acc = prefix[i];
      if (suffix[i + 1]) accumulate(acc, *suffix[i + 1]);
      mp.branches[i].x_to_g = std::move(acc);
    }
    full = std::move(prefix[m]);
  }

  // Steps 5-6: back to the bias node, then the two lambda hypotheses.
  for (std::size_t i = 0; i < m; ++i) {
    const auto& st = s.stations[i];
    auto& br = mp.branches[i];
    if (!br.x_to_g) {
      br.log_lambda0 = 0.0;
      br.log_lambda1 = 0.0;
      continue;
    }
    br.x_to_g->normalize();
    br.g_to_b = mixture_shift_convolve(*br.x_to_g, y[static_cast<Eigen::Index>(i)],
                                       st.noise_std * st.noise_std, /*negate=*/true);
    br.log_lambda0 = mixture_log_eval(*br.g_to_b, 0.0);
    // Integral of N(b; m_b, sigma_b^2) against each component, in closed form.
    br.log_lambda1 = mixture_log_eval(
        mixture_shift_convolve(*br.g_to_b, 0.0, st.bias_std * st.bias_std, false), st.bias_mean);
  }

  const auto theta_post = lambda_posteriors(s, mp);
  for (std::size_t i = 0; i < m; ++i) mp.branches[i].theta_post = theta_post[i];
  mp.posterior = finish_posterior(std::move(full));
  return mp;
}

std::vector<double> lambda_posteriors(const Scenario& s, const MessagePassing& mp) {
  std::vector<double> out(mp.branches.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& br = mp.branches[i];
    out[i] = fault_posterior(s.stations[i].theta, br.log_lambda0, br.log_lambda1);
  }
  return out;
}

ExclusionResult exclude_faults(const Scenario& s, const MessagePassing& mp,
                               double theta_threshold) {
  ExclusionResult r;
  auto acc = prior_message(s);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < mp.branches.size(); ++i) {
    if (mp.branches[i].theta_post > theta_threshold) {
      r.excluded.push_back(i);
    } else {
      accumulate(acc, mp.branches[i].g_to_x);
      ++kept;
    }
  }
  if (kept == 0) throw std::runtime_error("all measurements excluded");
  if (r.excluded.empty()) {
    r.posterior = mp.posterior;
    return r;
  }
  r.posterior = finish_posterior(std::move(acc));
  return r;
}

EstimateAndPl estimate_and_pl(const GaussianMixture& posterior, double tir) {
  EstimateAndPl out;
  out.estimate = mixture_mean(posterior);
  const double center = out.estimate;
  out.pl = bisect_min_radius(
      [&](double r) { return mixture_interval_risk(posterior, center, r); }, tir,
      default_bracket(posterior, center));
  return out;
}

namespace {

BayesResult finish(const MessagePassing& mp, ExclusionResult ex, double tir) {
  BayesResult r;
  const auto est = estimate_and_pl(ex.posterior, tir);
  r.estimate = est.estimate;
  r.pl = est.pl;
  r.posterior = std::move(ex.posterior);
  r.excluded = std::move(ex.excluded);
  r.theta_post.reserve(mp.branches.size());
  for (const auto& br : mp.branches) r.theta_post.push_back(br.theta_post);
  return r;
}

}  // namespace

BayesResult bayes_raim(const Scenario& s, const Eigen::Ref<const Eigen::VectorXd>& y,
                       double theta_threshold) {
  const auto mp = run_message_passing(s, y);
  return finish(mp, exclude_faults(s, mp, theta_threshold), s.tir);
}

BayesPair bayes_raim_both(const Scenario& s, const Eigen::Ref<const Eigen::VectorXd>& y) {
  const auto mp = run_message_passing(s, y);
  BayesPair out{std::nullopt, finish(mp, ExclusionResult{{}, mp.posterior}, s.tir)};
  std::optional<ExclusionResult> ex;
  try {
    ex = exclude_faults(s, mp, s.theta_threshold);
  } catch (const std::runtime_error&) {
    return out;
  }
  if (ex->excluded.empty()) {
    out.fe = out.nfe;
  } else {
    out.fe = finish(mp, std::move(*ex), s.tir);
  }
  return out;
}

}  // namespace raim
