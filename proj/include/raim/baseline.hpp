#pragma once

// Solution-separation RAIM adapted to the 1D model: all-in-view WLS, fault
// mode enumeration, SS tests, one round of exclusion attempts, and the
// conservative PL equation.
//
// Index sets are bitmasks over the original station indices, and every WLS
// coefficient vector spans all M stations (zeros on excluded ones), so tables
// for reduced problems apply directly to the full measurement vector.

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "raim/model.hpp"

namespace raim {

using IndexMask = std::uint64_t;

std::vector<std::size_t> mask_indices(IndexMask mask);
IndexMask indices_mask(const std::vector<std::size_t>& indices);
inline IndexMask full_mask(std::size_t m) {
  return m >= 64 ? ~IndexMask{0} : (IndexMask{1} << m) - 1;
}

struct FaultMode {
  IndexMask faulted = 0;
  std::vector<std::size_t> indices;
  double p_fm = 0.0;
  double w = 0.0;            // W_k, m^2
  Eigen::VectorXd c;         // c_k, m^-2, length M
  double sigma_ss = 0.0;     // SS statistic std under no fault
  double threshold = 0.0;    // T_k
  double sigma = 0.0;        // std of the subset solution

  /// W_k c_k^T y.
  double solution(const Eigen::Ref<const Eigen::VectorXd>& y) const { return w * c.dot(y); }
};

struct AllInView {
  double estimate = 0.0;
  double w = 0.0;
  Eigen::VectorXd c;
};

AllInView all_in_view(const Eigen::Ref<const Eigen::VectorXd>& y,
                      const Eigen::Ref<const Eigen::VectorXd>& noise_stds);

struct BaselineOptions {
  /// Largest fault-mode size to monitor; 0 means all modes up to n - 2.
  std::size_t max_fault_size = 0;
};

/// Mode 0 (no fault) first, then every monitorable mode of the surviving
/// stations sorted by non-increasing p_fm, ties broken lexicographically.
/// Fills p_fm, w, c and sigma. Throws if fewer than 3 stations survive.
std::vector<FaultMode> enumerate_fault_modes(const Scenario& s, IndexMask survivors,
                                             const BaselineOptions& opt = {});
std::vector<FaultMode> enumerate_fault_modes(const Scenario& s, const BaselineOptions& opt = {});

double subset_solution(const Eigen::Ref<const Eigen::VectorXd>& y, const FaultMode& mode);

/// Fills sigma_ss and threshold on modes 1..N, splitting p_fa evenly over both
/// tails of every monitored mode.
void ss_test_statistics(const Scenario& s, std::vector<FaultMode>& modes);

struct Detection {
  bool passed = true;
  std::size_t tests_run = 0;
  std::vector<std::size_t> failed;  // positions in the mode list
};

Detection detect(const Eigen::Ref<const Eigen::VectorXd>& y, const std::vector<FaultMode>& modes);

/// Left-hand side of the PL equation at a candidate PL.
double baseline_pl_lhs(const std::vector<FaultMode>& modes, double pl);
/// Root of the PL equation. Depends only on the mode table, never on y.
double baseline_pl(const std::vector<FaultMode>& modes, double tir);

/// Everything precomputable for one set of surviving stations.
struct FaultModeTable {
  IndexMask survivors = 0;
  std::vector<FaultMode> modes;
  double pl = 0.0;

  std::size_t n_fm() const noexcept { return modes.empty() ? 0 : modes.size() - 1; }
};

FaultModeTable build_fault_mode_table(const Scenario& s, IndexMask survivors,
                                      const BaselineOptions& opt = {});

struct BaselineResult {
  double estimate = 0.0;
  std::optional<double> pl;
  std::vector<std::size_t> excluded;
  bool trusted = false;
  std::size_t tests_run = 0;
};

/// Holds the full-set table and lazily caches reduced-problem tables, so a
/// fixed scenario's mode tables are built once and shared across threads.
class BaselineMonitor {
 public:
  explicit BaselineMonitor(Scenario s, BaselineOptions opt = {});

  BaselineResult evaluate(const Eigen::Ref<const Eigen::VectorXd>& y) const;

  const Scenario& scenario() const noexcept { return scenario_; }
  const FaultModeTable& full_table() const noexcept { return full_; }
  /// Table for a reduced problem, or nullptr if fewer than 3 stations survive.
  const FaultModeTable* table_for(IndexMask survivors) const;

 private:
  Scenario scenario_;
  BaselineOptions opt_;
  FaultModeTable full_;
  mutable std::mutex mutex_;
  mutable std::map<IndexMask, std::unique_ptr<FaultModeTable>> reduced_;
};

/// Detection on the full set, then exclusion attempts in mode order.
BaselineResult exclude_and_retry(const Eigen::Ref<const Eigen::VectorXd>& y, const Scenario& s,
                                 const BaselineOptions& opt = {});

}  // namespace raim
