#include "raim/commands.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "raim/bayes.hpp"
#include "raim/config.hpp"
#include "raim/report.hpp"

namespace raim {

namespace {

constexpr const char* kFormatVersion = "raim-run/1";

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

}  // namespace

int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            const RunOverrides& overrides, std::ostream& err) {
  RunSpec spec;
  try {
    spec = load_run_spec(config_path);
    if (overrides.seed) spec.seed = *overrides.seed;
    if (overrides.epochs) {
      if (*overrides.epochs == 0) throw ConfigError("--epochs must be >= 1");
      spec.epochs = *overrides.epochs;
    }
    if (overrides.algorithms) spec.algorithms = *overrides.algorithms;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::kUsage;
  }

  try {
    std::filesystem::create_directories(out_dir);
    nlohmann::json manifest;
    manifest["format"] = kFormatVersion;
    manifest["config_path"] = config_path.string();
    manifest["output_dir"] = out_dir.string();
    manifest["master_seed"] = spec.seed;
    manifest["resolved_config"] = to_config_text(spec);
    nlohmann::json cells = nlohmann::json::array();
    nlohmann::json files = nlohmann::json::array({"summary.csv"});

    std::vector<SummaryRow> rows;
    for (auto m : spec.sweep_m) {
      for (auto sigma_n : spec.sweep_sigma_n) {
        RunConfig cfg;
        try {
          cfg = spec.cell(m, sigma_n);
          const bool baseline = std::find(cfg.algorithms.begin(), cfg.algorithms.end(),
                                          Algorithm::Baseline) != cfg.algorithms.end();
          if (baseline && m < 3) {
            throw std::invalid_argument("scenario.M: baseline monitoring needs M >= 3");
          }
        } catch (const std::invalid_argument& e) {
          err << "config error: " << e.what() << "\n";
          return exit_code::kUsage;
        }
        for (const auto& w : cfg.scenario.warnings()) err << "warning: " << w << "\n";
        err << "cell M=" << m << " sigma_n=" << format_double(sigma_n) << ": " << cfg.n_epochs
            << " epochs\n";
        const auto out = run(cfg);

        const auto tag = cell_tag(m, sigma_n);
        nlohmann::json cell;
        cell["M"] = m;
        cell["sigma_n"] = sigma_n;
        cell["cell_seed"] = cell_seed(spec.seed, m, sigma_n);
        std::vector<double> means;
        for (const auto& st : cfg.scenario.stations) means.push_back(st.bias_mean);
        cell["bias_means"] = means;
        nlohmann::json cell_files = nlohmann::json::array();

        for (const auto& s : out.summary.algorithms) {
          rows.push_back(summary_row(m, sigma_n, s));
          const auto alg = std::string(algorithm_name(s.algorithm));
          const auto stanford = "stanford_" + alg + "_" + tag + ".csv";
          const auto ccdf = "ccdf_" + alg + "_" + tag + ".csv";
          write_file(out_dir / stanford, render([&](std::ostream& os) { write_stanford_csv(os, s.stanford); }));
          write_file(out_dir / ccdf, render([&](std::ostream& os) { write_ccdf_csv(os, s.ccdf); }));
          cell_files.push_back(stanford);
          cell_files.push_back(ccdf);
        }
        if (spec.write_epochs) {
          const auto epochs = "epochs_" + tag + ".csv";
          write_file(out_dir / epochs, render([&](std::ostream& os) {
                       write_epochs_csv(os, cfg.algorithms, out.records);
                     }));
          cell_files.push_back(epochs);
        }
        for (const auto& f : cell_files) files.push_back(f);
        cell["files"] = std::move(cell_files);
        cells.push_back(std::move(cell));
      }
    }
    write_file(out_dir / "summary.csv", render([&](std::ostream& os) { write_summary_csv(os, rows); }));
    files.push_back("manifest.json");
    manifest["cells"] = std::move(cells);
    manifest["files"] = std::move(files);
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kRuntime;
  }
  return exit_code::kOk;
}

int cmd_posterior(const std::filesystem::path& config_path, std::string_view y_values,
                  std::ostream& out, std::ostream& err) {
  RunSpec spec;
  std::vector<double> y;
  try {
    spec = load_run_spec(config_path);
    std::string_view rest = y_values;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      auto item = rest.substr(0, comma);
      while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
      while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc{} || ptr != item.data() + item.size()) {
        throw ConfigError("--y: bad number '" + std::string(item) + "'");
      }
      y.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_code::kUsage;
  }

  const auto m = spec.sweep_m.front();
  const auto sigma_n = spec.sweep_sigma_n.front();
  if (y.size() != m) {
    err << "usage error: got " << y.size() << " measurements, scenario has M = " << m << "\n";
    return exit_code::kUsage;
  }

  try {
    const auto cfg = spec.cell(m, sigma_n);
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    const auto mp = run_message_passing(cfg.scenario, yv);
    const auto nfe = estimate_and_pl(mp.posterior, cfg.scenario.tir);

    out << "M = " << m << ", sigma_n = " << format_double(sigma_n) << "\n";
    out << "bias_means =";
    for (const auto& st : cfg.scenario.stations) out << ' ' << format_double(st.bias_mean);
    out << "\ncomponents = " << mp.posterior.size() << "\n";
    out << "weight,mean,std\n";
    for (const auto& c : mp.posterior.components()) {
      out << format_double(c.weight) << ',' << format_double(c.mean) << ','
          << format_double(c.stddev()) << "\n";
    }
    out << "theta_post =";
    for (const auto& br : mp.branches) out << ' ' << format_double(br.theta_post);
    out << "\nbayes_nfe estimate = " << format_double(nfe.estimate)
        << " pl = " << format_double(nfe.pl) << "\n";
    try {
      const auto ex = exclude_faults(cfg.scenario, mp, cfg.scenario.theta_threshold);
      const auto fe = estimate_and_pl(ex.posterior, cfg.scenario.tir);
      out << "bayes_fe estimate = " << format_double(fe.estimate) << " pl = " << format_double(fe.pl)
          << " excluded =";
      for (auto i : ex.excluded) out << ' ' << i;
      out << "\n";
    } catch (const std::runtime_error&) {
      out << "bayes_fe no output: all measurements excluded\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kRuntime;
  }
  return exit_code::kOk;
}

}  // namespace raim
