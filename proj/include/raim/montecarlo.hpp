#pragma once

// Seeded Monte-Carlo evaluation of the three RAIM variants on paired epochs.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "raim/baseline.hpp"
#include "raim/model.hpp"

namespace raim {

enum class Algorithm : std::uint8_t { BayesFE, BayesNFE, Baseline };

std::string_view algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);
inline std::vector<Algorithm> all_algorithms() {
  return {Algorithm::BayesFE, Algorithm::BayesNFE, Algorithm::Baseline};
}

/// Homogeneous station parameters for one sweep cell. Bias means are either
/// given explicitly or drawn once per cell from uniform[-range, range].
struct ScenarioTemplate {
  double theta = 0.05;
  double bias_std = 50.0;
  double bias_mean_range = 50.0;
  std::vector<double> bias_means;  // empty: random; size 1: broadcast; else size M
  double tir = 1e-3;
  double theta_threshold = 0.5;
  double p_fa = 5e-2;
  PositionPrior prior_x = FlatPrior{};
  double true_x = 0.0;
};

std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t m, double sigma_n);
Scenario build_cell_scenario(const ScenarioTemplate& t, std::size_t m, double sigma_n,
                             std::uint64_t master_seed);

struct RunConfig {
  Scenario scenario;
  std::size_t n_epochs = 1;
  std::uint64_t master_seed = 0;
  std::vector<Algorithm> algorithms = all_algorithms();
  std::size_t workers = 0;  // 0: hardware concurrency; RAIM_THREADS caps either way
  double stanford_pixel = 0.01;
  std::optional<double> sampler_theta;  // replaces theta when drawing epochs only
  BaselineOptions baseline;
};

struct AlgorithmOutcome {
  double estimate = 0.0;
  double abs_error = 0.0;
  std::optional<double> pl;
  bool trusted = false;
  std::uint32_t excluded_count = 0;
  IndexMask excluded = 0;
};

struct EpochRecord {
  std::size_t epoch_index = 0;
  std::vector<AlgorithmOutcome> outcomes;  // parallel to RunConfig::algorithms
};

struct StanfordCell {
  std::uint64_t count = 0;
  std::uint64_t failures = 0;  // PL < |error|
};

/// Sparse (error, PL) histogram. Keys are (error bin, PL bin).
struct StanfordHistogram {
  double pixel = 0.01;
  std::map<std::pair<std::int64_t, std::int64_t>, StanfordCell> cells;
  std::uint64_t total = 0;
  std::uint64_t failures = 0;
};

StanfordHistogram stanford_bins(std::span<const AlgorithmOutcome> outcomes, double pixel);

struct CcdfPoint {
  double pl = 0.0;
  double ccdf = 0.0;  // fraction of samples strictly above pl
};

std::vector<CcdfPoint> empirical_ccdf(std::vector<double> samples);
/// Nearest-rank percentile: the ceil(q n)-th smallest sample.
double percentile_nearest_rank(std::vector<double> samples, double q);

struct AlgorithmSummary {
  Algorithm algorithm = Algorithm::BayesFE;
  std::uint64_t epochs = 0;
  std::uint64_t with_pl = 0;
  std::uint64_t failures = 0;
  double simulated_ir = 0.0;   // failures / with_pl
  double no_trust_rate = 0.0;  // (epochs - with_pl) / epochs
  double pl_p99 = 0.0;
  std::uint64_t distinct_pl = 0;
  std::uint64_t distinct_exclusions = 0;
  StanfordHistogram stanford;
  std::vector<CcdfPoint> ccdf;
};

struct SummaryStats {
  std::vector<AlgorithmSummary> algorithms;
  const AlgorithmSummary& at(Algorithm a) const;
};

struct RunOutput {
  SummaryStats summary;
  std::vector<EpochRecord> records;
};

std::size_t resolve_workers(std::size_t requested);

/// Runs every requested algorithm on the same epochs. Output is identical for
/// any worker count.
RunOutput run(const RunConfig& config);

SummaryStats summarize(const RunConfig& config, std::span<const EpochRecord> records);

}  // namespace raim
