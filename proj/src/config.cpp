#include "raim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <variant>

#include "raim/report.hpp"

namespace raim {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

double to_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t to_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

bool to_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("expected true or false, got '" + std::string(s) + "'");
}

double probability(std::string_view s, bool allow_zero, bool allow_one) {
  const double p = to_double(s);
  if (p < 0.0 || p > 1.0 || (!allow_zero && p == 0.0) || (!allow_one && p == 1.0)) {
    throw ConfigError("probability out of range: " + std::string(s));
  }
  return p;
}

double positive(std::string_view s) {
  const double v = to_double(s);
  if (!(v > 0.0)) throw ConfigError("expected a positive number, got '" + std::string(s) + "'");
  return v;
}

using Handler = std::function<void(RunSpec&, std::string_view)>;

const std::map<std::string, Handler, std::less<>>& handlers() {
  static const std::map<std::string, Handler, std::less<>> table = {
      {"scenario.M",
       [](RunSpec& r, std::string_view v) {
         r.sweep_m.clear();
         for (auto item : split_list(v)) {
           const auto m = to_u64(item);
           if (m < 1 || m > 20) throw ConfigError("M must lie in [1, 20]");
           r.sweep_m.push_back(m);
         }
       }},
      {"scenario.sigma_n",
       [](RunSpec& r, std::string_view v) {
         r.sweep_sigma_n.clear();
         for (auto item : split_list(v)) r.sweep_sigma_n.push_back(positive(item));
       }},
      {"scenario.theta", [](RunSpec& r, std::string_view v) { r.scenario.theta = probability(v, true, true); }},
      {"scenario.sigma_b", [](RunSpec& r, std::string_view v) { r.scenario.bias_std = positive(v); }},
      {"scenario.bias_mean",
       [](RunSpec& r, std::string_view v) {
         r.scenario.bias_means.clear();
         if (v == "random") return;
         for (auto item : split_list(v)) r.scenario.bias_means.push_back(to_double(item));
       }},
      {"scenario.bias_mean_range",
       [](RunSpec& r, std::string_view v) { r.scenario.bias_mean_range = positive(v); }},
      {"scenario.tir", [](RunSpec& r, std::string_view v) { r.scenario.tir = probability(v, false, true); }},
      {"scenario.theta_threshold",
       [](RunSpec& r, std::string_view v) { r.scenario.theta_threshold = probability(v, true, true); }},
      {"scenario.p_fa", [](RunSpec& r, std::string_view v) { r.scenario.p_fa = probability(v, false, false); }},
      {"scenario.prior_x",
       [](RunSpec& r, std::string_view v) {
         if (v == "flat") {
           r.scenario.prior_x = FlatPrior{};
         } else if (v == "gaussian") {
           if (!std::holds_alternative<GaussianPrior>(r.scenario.prior_x)) {
             r.scenario.prior_x = GaussianPrior{};
           }
         } else {
           throw ConfigError("prior_x must be 'flat' or 'gaussian'");
         }
       }},
      {"scenario.prior_mean",
       [](RunSpec& r, std::string_view v) {
         auto* g = std::get_if<GaussianPrior>(&r.scenario.prior_x);
         if (!g) throw ConfigError("prior_mean needs prior_x = gaussian first");
         g->mean = to_double(v);
       }},
      {"scenario.prior_variance",
       [](RunSpec& r, std::string_view v) {
         auto* g = std::get_if<GaussianPrior>(&r.scenario.prior_x);
         if (!g) throw ConfigError("prior_variance needs prior_x = gaussian first");
         g->variance = positive(v);
       }},
      {"scenario.true_x", [](RunSpec& r, std::string_view v) { r.scenario.true_x = to_double(v); }},
      {"run.epochs",
       [](RunSpec& r, std::string_view v) {
         r.epochs = to_u64(v);
         if (r.epochs == 0) throw ConfigError("epochs must be >= 1");
       }},
      {"run.seed", [](RunSpec& r, std::string_view v) { r.seed = to_u64(v); }},
      {"run.stanford_pixel", [](RunSpec& r, std::string_view v) { r.stanford_pixel = positive(v); }},
      {"run.workers", [](RunSpec& r, std::string_view v) { r.workers = to_u64(v); }},
      {"run.write_epochs", [](RunSpec& r, std::string_view v) { r.write_epochs = to_bool(v); }},
      {"run.sampler_theta",
       [](RunSpec& r, std::string_view v) {
         if (v == "none") {
           r.sampler_theta.reset();
         } else {
           r.sampler_theta = probability(v, true, true);
         }
       }},
      {"algorithms.enabled", [](RunSpec& r, std::string_view v) { r.algorithms = parse_algorithm_list(v); }},
      {"baseline.max_fault_size",
       [](RunSpec& r, std::string_view v) { r.baseline.max_fault_size = to_u64(v); }},
  };
  return table;
}

template <class T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(items[i]);
    } else {
      out += std::to_string(items[i]);
    }
  }
  return out;
}

}  // namespace

std::vector<Algorithm> parse_algorithm_list(std::string_view text) {
  std::vector<Algorithm> out;
  for (auto item : split_list(text)) {
    const auto a = parse_algorithm(item);
    if (!a) throw ConfigError("unknown algorithm '" + std::string(item) + "'");
    if (std::find(out.begin(), out.end(), *a) == out.end()) out.push_back(*a);
  }
  if (out.empty()) throw ConfigError("no algorithms listed");
  return out;
}

RunConfig RunSpec::cell(std::size_t m, double sigma_n) const {
  RunConfig c;
  c.scenario = build_cell_scenario(scenario, m, sigma_n, seed);
  c.n_epochs = epochs;
  c.master_seed = seed;
  c.algorithms = algorithms;
  c.workers = workers;
  c.stanford_pixel = stanford_pixel;
  c.sampler_theta = sampler_theta;
  c.baseline = baseline;
  return c;
}

RunSpec parse_run_spec(std::istream& in, std::string_view source) {
  RunSpec spec;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;

    const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = trim(text.substr(0, eq));
    const auto value = trim(text.substr(eq + 1));
    const auto it = handlers().find(key);
    if (it == handlers().end()) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
    if (value.empty()) throw ConfigError(where + std::string(key) + ": empty value");
    try {
      it->second(spec, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + std::string(key) + ": " + e.what());
    }
  }
  for (auto m : spec.sweep_m) {
    if (!spec.scenario.bias_means.empty() && spec.scenario.bias_means.size() != 1 &&
        spec.scenario.bias_means.size() != m) {
      throw ConfigError(std::string(source) + ": scenario.bias_mean: needs 1 or M values");
    }
  }
  return spec;
}

RunSpec load_run_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  return parse_run_spec(in, path.string());
}

std::string to_config_text(const RunSpec& r) {
  std::ostringstream os;
  const auto& s = r.scenario;
  os << "scenario.M = " << join(r.sweep_m) << "\n";
  os << "scenario.sigma_n = " << join(r.sweep_sigma_n) << "\n";
  os << "scenario.theta = " << format_double(s.theta) << "\n";
  os << "scenario.sigma_b = " << format_double(s.bias_std) << "\n";
  os << "scenario.bias_mean = " << (s.bias_means.empty() ? "random" : join(s.bias_means)) << "\n";
  os << "scenario.bias_mean_range = " << format_double(s.bias_mean_range) << "\n";
  os << "scenario.tir = " << format_double(s.tir) << "\n";
  os << "scenario.theta_threshold = " << format_double(s.theta_threshold) << "\n";
  os << "scenario.p_fa = " << format_double(s.p_fa) << "\n";
  if (const auto* g = std::get_if<GaussianPrior>(&s.prior_x)) {
    os << "scenario.prior_x = gaussian\n";
    os << "scenario.prior_mean = " << format_double(g->mean) << "\n";
    os << "scenario.prior_variance = " << format_double(g->variance) << "\n";
  } else {
    os << "scenario.prior_x = flat\n";
  }
  os << "scenario.true_x = " << format_double(s.true_x) << "\n";
  os << "run.epochs = " << r.epochs << "\n";
  os << "run.seed = " << r.seed << "\n";
  os << "run.stanford_pixel = " << format_double(r.stanford_pixel) << "\n";
  os << "run.workers = " << r.workers << "\n";
  os << "run.write_epochs = " << (r.write_epochs ? "true" : "false") << "\n";
  os << "run.sampler_theta = " << (r.sampler_theta ? format_double(*r.sampler_theta) : "none") << "\n";
  os << "algorithms.enabled = ";
  for (std::size_t i = 0; i < r.algorithms.size(); ++i) {
    os << (i ? ", " : "") << algorithm_name(r.algorithms[i]);
  }
  os << "\n";
  os << "baseline.max_fault_size = " << r.baseline.max_fault_size << "\n";
  return os.str();
}

}  // namespace raim
