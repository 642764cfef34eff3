#pragma once

// CSV and manifest emission for Monte-Carlo runs.
//
//   summary.csv                 one row per (M, sigma_n, algorithm)
//   stanford_<alg>_<M>_<sn>.csv "pixel_m,<p>" row, then error_bin,pl_bin,count,failures
//   ccdf_<alg>_<M>_<sn>.csv     pl_m,ccdf at every distinct PL
//   epochs_<M>_<sn>.csv         one row per epoch (optional)
//   manifest.json               resolved configuration, seeds and file list

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "raim/montecarlo.hpp"

namespace raim {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

struct SummaryRow {
  std::size_t m = 0;
  double sigma_n = 0.0;
  std::string algorithm;
  std::uint64_t epochs = 0;
  std::uint64_t with_pl = 0;
  std::uint64_t failures = 0;
  double simulated_ir = 0.0;
  double no_trust_rate = 0.0;
  double pl_p99 = 0.0;
  std::uint64_t distinct_pl = 0;
  std::uint64_t distinct_exclusions = 0;

  bool operator==(const SummaryRow&) const = default;
};

SummaryRow summary_row(std::size_t m, double sigma_n, const AlgorithmSummary& s);

inline constexpr const char* kSummaryHeader =
    "M,sigma_n,algorithm,epochs,with_pl,failures,simulated_ir,no_trust_rate,pl_p99,distinct_pl,"
    "distinct_exclusions";

void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows);
std::vector<SummaryRow> read_summary_csv(std::istream& is);

void write_stanford_csv(std::ostream& os, const StanfordHistogram& h);
void write_ccdf_csv(std::ostream& os, std::span<const CcdfPoint> ccdf);
void write_epochs_csv(std::ostream& os, std::span<const Algorithm> algorithms,
                      std::span<const EpochRecord> records);

std::string cell_tag(std::size_t m, double sigma_n);

}  // namespace raim
