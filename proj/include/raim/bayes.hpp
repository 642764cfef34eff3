#pragma once

// Bayesian RAIM: exact sum-product message passing on the star-shaped factor
// graph p(x) * prod_i p(y_i | x, b_i) p(b_i | lambda_i) p(lambda_i).
//
// Every message is a Gaussian mixture. The x-posterior has one component per
// fault pattern, so nothing is pruned or merged.

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "raim/model.hpp"
#include "raim/numerics.hpp"

namespace raim {

/// How the leave-one-out products at the x node are formed.
enum class LeaveOneOut {
  Independent,   // M separate products of M-1 messages
  PrefixSuffix,  // cached prefix/suffix products
};

struct BranchMessages {
  GaussianMixture f_to_b;  // bias prior, sent f_i -> b_i -> g_i
  GaussianMixture g_to_x;  // likelihood of x with b_i integrated out
  // Messages carrying a flat, unnormalizable density are left empty. This
  // only happens for a single station under a flat position prior.
  std::optional<GaussianMixture> x_to_g;
  std::optional<GaussianMixture> g_to_b;
  double log_lambda0 = 0.0;  // log mu_{f->lambda}(0), up to a branch constant
  double log_lambda1 = 0.0;  // log mu_{f->lambda}(1), same constant
  double theta_post = 0.0;
};

struct MessagePassing {
  std::vector<BranchMessages> branches;
  GaussianMixture posterior;  // normalized, sorted by decreasing weight
};

MessagePassing run_message_passing(const Scenario& s,
                                   const Eigen::Ref<const Eigen::VectorXd>& y,
                                   LeaveOneOut schedule = LeaveOneOut::Independent);

/// Posterior fault probability of each measurement from the lambda messages.
std::vector<double> lambda_posteriors(const Scenario& s, const MessagePassing& mp);

struct ExclusionResult {
  std::vector<std::size_t> excluded;
  GaussianMixture posterior;  // normalized, sorted by decreasing weight
};

/// Drops every branch with theta_post > theta_threshold and re-multiplies the
/// cached g->x messages of the survivors. Throws std::runtime_error if every
/// branch is dropped.
ExclusionResult exclude_faults(const Scenario& s, const MessagePassing& mp,
                               double theta_threshold);

struct EstimateAndPl {
  double estimate = 0.0;
  double pl = 0.0;
};

/// Weighted-mean estimate and the smallest PL with two-sided risk <= tir.
EstimateAndPl estimate_and_pl(const GaussianMixture& posterior, double tir);

struct BayesResult {
  GaussianMixture posterior;
  double estimate = 0.0;
  double pl = 0.0;
  std::vector<double> theta_post;
  std::vector<std::size_t> excluded;
};

/// Full pipeline. theta_threshold = 1 gives the no-exclusion variant.
BayesResult bayes_raim(const Scenario& s, const Eigen::Ref<const Eigen::VectorXd>& y,
                       double theta_threshold);

/// Both variants from a single message-passing pass.
struct BayesPair {
  std::optional<BayesResult> fe;   // empty when every branch was excluded
  BayesResult nfe;
};
BayesPair bayes_raim_both(const Scenario& s, const Eigen::Ref<const Eigen::VectorXd>& y);

}  // namespace raim
