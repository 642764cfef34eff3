// raim: Monte-Carlo driver and posterior inspector.
//
//   raim run --config cfg.txt --out results/ [--seed N] [--epochs N] [--algs a,b]
//   raim posterior --config cfg.txt --y 0.1,-0.3,2.0,0.4,55

#include <iostream>

#include <CLI11.hpp>

#include "raim/commands.hpp"
#include "raim/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bayesian and solution-separation RAIM simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::string algs;
  auto* run = app.add_subcommand("run", "Run the Monte-Carlo sweep in a configuration");
  run->add_option("--config", config_path, "Configuration file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override run.seed");
  run->add_option("--epochs", epochs, "Override run.epochs");
  run->add_option("--algs", algs, "Override algorithms.enabled (comma separated)");

  std::string y_values;
  auto* posterior = app.add_subcommand("posterior", "Print the exact posterior for one epoch");
  posterior->add_option("--config", config_path, "Configuration file")->required();
  posterior->add_option("--y", y_values, "Measurements, comma separated")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? raim::exit_code::kOk : raim::exit_code::kUsage;
  }

  if (*run) {
    raim::RunOverrides ov;
    ov.seed = seed;
    ov.epochs = epochs;
    if (!algs.empty()) {
      try {
        ov.algorithms = raim::parse_algorithm_list(algs);
      } catch (const raim::ConfigError& e) {
        std::cerr << "usage error: --algs: " << e.what() << "\n";
        return raim::exit_code::kUsage;
      }
    }
    return raim::cmd_run(config_path, out_dir, ov, std::cerr);
  }
  return raim::cmd_posterior(config_path, y_values, std::cout, std::cerr);
}
