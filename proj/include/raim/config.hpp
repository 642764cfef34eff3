#pragma once

// Flat key = value run configuration with dotted sections:
//
//   # comment
//   scenario.M = 5, 8
//   scenario.sigma_n = 1, 3, 5, 7, 9
//   scenario.bias_mean = random
//   run.epochs = 200000
//   algorithms.enabled = bayes_fe, bayes_nfe, baseline
//
// Lists are comma separated. Unknown keys are errors.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "raim/baseline.hpp"
#include "raim/montecarlo.hpp"

namespace raim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunSpec {
  ScenarioTemplate scenario;
  std::vector<std::size_t> sweep_m{5};
  std::vector<double> sweep_sigma_n{1.0};
  std::size_t epochs = 1000;
  std::uint64_t seed = 0;
  std::vector<Algorithm> algorithms = all_algorithms();
  double stanford_pixel = 0.01;
  std::size_t workers = 0;
  bool write_epochs = true;
  std::optional<double> sampler_theta;
  BaselineOptions baseline;

  /// Run configuration for one sweep cell.
  RunConfig cell(std::size_t m, double sigma_n) const;
};

/// Parses a configuration; `source` names the input in diagnostics.
RunSpec parse_run_spec(std::istream& in, std::string_view source = "<config>");
RunSpec load_run_spec(const std::filesystem::path& path);

/// Canonical text of a spec; parses back to the same spec.
std::string to_config_text(const RunSpec& spec);

std::vector<Algorithm> parse_algorithm_list(std::string_view text);

}  // namespace raim
