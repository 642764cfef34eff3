#include "raim/report.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace raim {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

SummaryRow summary_row(std::size_t m, double sigma_n, const AlgorithmSummary& s) {
  return SummaryRow{m,
                    sigma_n,
                    std::string(algorithm_name(s.algorithm)),
                    s.epochs,
                    s.with_pl,
                    s.failures,
                    s.simulated_ir,
                    s.no_trust_rate,
                    s.pl_p99,
                    s.distinct_pl,
                    s.distinct_exclusions};
}

void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows) {
  os << kSummaryHeader << "\n";
  for (const auto& r : rows) {
    os << r.m << ',' << format_double(r.sigma_n) << ',' << r.algorithm << ',' << r.epochs << ','
       << r.with_pl << ',' << r.failures << ',' << format_double(r.simulated_ir) << ','
       << format_double(r.no_trust_rate) << ',' << format_double(r.pl_p99) << ','
       << r.distinct_pl << ',' << r.distinct_exclusions << "\n";
  }
}

namespace {

template <class T>
T parse_field(const std::string& s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("bad CSV field '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<SummaryRow> read_summary_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kSummaryHeader) {
    throw std::runtime_error("summary CSV: unexpected header");
  }
  std::vector<SummaryRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 11) throw std::runtime_error("summary CSV: expected 11 fields");
    rows.push_back(SummaryRow{parse_field<std::size_t>(f[0]), parse_field<double>(f[1]), f[2],
                              parse_field<std::uint64_t>(f[3]), parse_field<std::uint64_t>(f[4]),
                              parse_field<std::uint64_t>(f[5]), parse_field<double>(f[6]),
                              parse_field<double>(f[7]), parse_field<double>(f[8]),
                              parse_field<std::uint64_t>(f[9]), parse_field<std::uint64_t>(f[10])});
  }
  return rows;
}

void write_stanford_csv(std::ostream& os, const StanfordHistogram& h) {
  os << "pixel_m," << format_double(h.pixel) << "\n";
  os << "error_bin,pl_bin,count,failures\n";
  for (const auto& [key, cell] : h.cells) {
    os << key.first << ',' << key.second << ',' << cell.count << ',' << cell.failures << "\n";
  }
}

void write_ccdf_csv(std::ostream& os, std::span<const CcdfPoint> ccdf) {
  os << "pl_m,ccdf\n";
  for (const auto& p : ccdf) os << format_double(p.pl) << ',' << format_double(p.ccdf) << "\n";
}

void write_epochs_csv(std::ostream& os, std::span<const Algorithm> algorithms,
                      std::span<const EpochRecord> records) {
  os << "epoch";
  for (auto a : algorithms) {
    const auto n = algorithm_name(a);
    os << ',' << n << "_estimate," << n << "_abs_error," << n << "_pl," << n << "_trusted," << n
       << "_excluded";
  }
  os << "\n";
  for (const auto& r : records) {
    os << r.epoch_index;
    for (const auto& o : r.outcomes) {
      os << ',' << format_double(o.estimate) << ',' << format_double(o.abs_error) << ','
         << (o.pl ? format_double(*o.pl) : std::string()) << ',' << (o.trusted ? 1 : 0) << ','
         << o.excluded;
    }
    os << "\n";
  }
}

std::string cell_tag(std::size_t m, double sigma_n) {
  return std::to_string(m) + "_" + format_double(sigma_n);
}

}  // namespace raim
