#include "raim/baseline.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "raim/numerics.hpp"

namespace raim {

std::vector<std::size_t> mask_indices(IndexMask mask) {
  std::vector<std::size_t> out;
  while (mask) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return out;
}

IndexMask indices_mask(const std::vector<std::size_t>& indices) {
  IndexMask m = 0;
  for (auto i : indices) m |= IndexMask{1} << i;
  return m;
}

AllInView all_in_view(const Eigen::Ref<const Eigen::VectorXd>& y,
                      const Eigen::Ref<const Eigen::VectorXd>& noise_stds) {
  if (y.size() == 0 || y.size() != noise_stds.size()) {
    throw std::invalid_argument("all_in_view: size mismatch or empty input");
  }
  AllInView out;
  out.c = noise_stds.array().square().inverse().matrix();
  out.w = 1.0 / out.c.sum();
  out.estimate = out.w * out.c.dot(y);
  return out;
}

namespace {

// Multiplies the factors in sorted order so equal multisets give equal bits.
double mode_probability(const Scenario& s, IndexMask survivors, IndexMask faulted) {
  std::vector<double> factors;
  for (auto i : mask_indices(survivors)) {
    const double th = s.stations[i].theta;
    factors.push_back((faulted >> i) & 1 ? th : 1.0 - th);
  }
  std::sort(factors.begin(), factors.end());
  double p = 1.0;
  for (double f : factors) p *= f;
  return p;
}

FaultMode make_mode(const Scenario& s, const Eigen::VectorXd& variances, IndexMask survivors,
                    IndexMask faulted) {
  FaultMode mode;
  mode.faulted = faulted;
  mode.indices = mask_indices(faulted);
  mode.p_fm = mode_probability(s, survivors, faulted);
  const IndexMask used = survivors & ~faulted;
  mode.c = Eigen::VectorXd::Zero(variances.size());
  for (auto i : mask_indices(used)) {
    mode.c[static_cast<Eigen::Index>(i)] = 1.0 / variances[static_cast<Eigen::Index>(i)];
  }
  mode.w = 1.0 / mode.c.sum();
  mode.sigma = mode.w * std::sqrt(mode.c.dot(variances.asDiagonal() * mode.c));
  return mode;
}

}  // namespace

std::vector<FaultMode> enumerate_fault_modes(const Scenario& s, IndexMask survivors,
                                             const BaselineOptions& opt) {
  if (s.size() > 63) throw std::invalid_argument("enumerate_fault_modes: at most 63 stations");
  survivors &= full_mask(s.size());
  const auto n = static_cast<std::size_t>(std::popcount(survivors));
  if (n < 3) throw std::invalid_argument("fault mode monitoring needs at least 3 measurements");

  std::size_t max_size = n - 2;
  if (opt.max_fault_size > 0) max_size = std::min(max_size, opt.max_fault_size);

  const Eigen::VectorXd variances = s.noise_stds().array().square();
  std::vector<FaultMode> modes;
  modes.push_back(make_mode(s, variances, survivors, 0));

  // Every non-empty submask of the survivors up to the size cap.
  for (IndexMask sub = survivors; sub; sub = (sub - 1) & survivors) {
    if (static_cast<std::size_t>(std::popcount(sub)) <= max_size) {
      modes.push_back(make_mode(s, variances, survivors, sub));
    }
  }
  std::sort(modes.begin() + 1, modes.end(), [](const FaultMode& a, const FaultMode& b) {
    if (a.p_fm != b.p_fm) return a.p_fm > b.p_fm;
    return a.indices < b.indices;
  });
  return modes;
}

std::vector<FaultMode> enumerate_fault_modes(const Scenario& s, const BaselineOptions& opt) {
  return enumerate_fault_modes(s, full_mask(s.size()), opt);
}

double subset_solution(const Eigen::Ref<const Eigen::VectorXd>& y, const FaultMode& mode) {
  return mode.solution(y);
}

void ss_test_statistics(const Scenario& s, std::vector<FaultMode>& modes) {
  if (modes.empty()) return;
  const Eigen::VectorXd variances = s.noise_stds().array().square();
  const std::size_t n_fm = modes.size() - 1;
  const double k_fa = n_fm > 0 ? q_inverse(s.p_fa / (2.0 * static_cast<double>(n_fm))) : 0.0;

  const Eigen::VectorXd gain0 = modes[0].w * modes[0].c;
  modes[0].sigma_ss = 0.0;
  modes[0].threshold = 0.0;
  for (std::size_t k = 1; k < modes.size(); ++k) {
    const Eigen::VectorXd diff = modes[k].w * modes[k].c - gain0;
    modes[k].sigma_ss = std::sqrt(diff.dot(variances.asDiagonal() * diff));
    modes[k].threshold = modes[k].sigma_ss * k_fa;
  }
}

Detection detect(const Eigen::Ref<const Eigen::VectorXd>& y, const std::vector<FaultMode>& modes) {
  Detection d;
  if (modes.empty()) return d;
  const double x0 = modes[0].solution(y);
  for (std::size_t k = 1; k < modes.size(); ++k) {
    ++d.tests_run;
    if (std::abs(x0 - modes[k].solution(y)) > modes[k].threshold) {
      d.passed = false;
      d.failed.push_back(k);
    }
  }
  return d;
}

double baseline_pl_lhs(const std::vector<FaultMode>& modes, double pl) {
  double lhs = 2.0 * q_function(pl / modes.at(0).sigma);
  for (std::size_t k = 1; k < modes.size(); ++k) {
    lhs += modes[k].p_fm * q_function((pl - modes[k].threshold) / modes[k].sigma);
  }
  return lhs;
}

double baseline_pl(const std::vector<FaultMode>& modes, double tir) {
  double reach = modes.at(0).sigma;
  for (std::size_t k = 1; k < modes.size(); ++k) {
    reach = std::max(reach, modes[k].threshold + modes[k].sigma);
  }
  Bracket br;
  br.lo = 0.0;
  br.hi = 10.0 * reach;
  // Tight enough that the equation residual sits well below 1e-9.
  br.tolerance = 1e-12 * std::max(1.0, br.hi);
  br.max_iterations = 200;
  return bisect_min_radius([&](double pl) { return baseline_pl_lhs(modes, pl); }, tir, br);
}

FaultModeTable build_fault_mode_table(const Scenario& s, IndexMask survivors,
                                      const BaselineOptions& opt) {
  FaultModeTable t;
  t.survivors = survivors & full_mask(s.size());
  t.modes = enumerate_fault_modes(s, t.survivors, opt);
  ss_test_statistics(s, t.modes);
  t.pl = baseline_pl(t.modes, s.tir);
  return t;
}

BaselineMonitor::BaselineMonitor(Scenario s, BaselineOptions opt)
    : scenario_(std::move(s)), opt_(opt) {
  scenario_.validate();
  full_ = build_fault_mode_table(scenario_, full_mask(scenario_.size()), opt_);
}

const FaultModeTable* BaselineMonitor::table_for(IndexMask survivors) const {
  if (survivors == full_.survivors) return &full_;
  if (std::popcount(survivors) < 3) return nullptr;
  std::lock_guard lock(mutex_);
  auto& slot = reduced_[survivors];
  if (!slot) {
    slot = std::make_unique<FaultModeTable>(build_fault_mode_table(scenario_, survivors, opt_));
  }
  return slot.get();
}

BaselineResult BaselineMonitor::evaluate(const Eigen::Ref<const Eigen::VectorXd>& y) const {
  if (static_cast<std::size_t>(y.size()) != scenario_.size()) {
    throw std::invalid_argument("baseline: measurement count does not match scenario");
  }
  BaselineResult r;
  const auto first = detect(y, full_.modes);
  r.tests_run = first.tests_run;
  r.estimate = full_.modes[0].solution(y);
  if (first.passed) {
    r.trusted = true;
    r.pl = full_.pl;
    return r;
  }

  for (std::size_t k = 1; k < full_.modes.size(); ++k) {
    const auto& candidate = full_.modes[k];
    const auto* table = table_for(full_.survivors & ~candidate.faulted);
    if (!table) continue;
    const auto retry = detect(y, table->modes);
    r.tests_run += retry.tests_run;
    if (retry.passed) {
      r.trusted = true;
      r.estimate = table->modes[0].solution(y);
      r.pl = table->pl;
      r.excluded = candidate.indices;
      return r;
    }
  }
  return r;
}

BaselineResult exclude_and_retry(const Eigen::Ref<const Eigen::VectorXd>& y, const Scenario& s,
                                 const BaselineOptions& opt) {
  return BaselineMonitor(s, opt).evaluate(y);
}

}  // namespace raim
