#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "raim/montecarlo.hpp"

namespace raim {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kRuntime = 1;
inline constexpr int kUsage = 2;
}  // namespace exit_code

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::vector<Algorithm>> algorithms;
};

/// Runs every sweep cell of the configuration and writes the CSVs and
/// manifest.json into out_dir. Diagnostics go to `err`.
int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            const RunOverrides& overrides, std::ostream& err);

/// Prints the exact x-posterior, fault posteriors, and both Bayesian
/// estimates/PLs for one measurement vector (comma separated).
int cmd_posterior(const std::filesystem::path& config_path, std::string_view y_values,
                  std::ostream& out, std::ostream& err);

}  // namespace raim
