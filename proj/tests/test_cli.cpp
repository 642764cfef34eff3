#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "raim/bayes.hpp"
#include "raim/commands.hpp"
#include "raim/config.hpp"
#include "raim/report.hpp"

using namespace raim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("raim_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const auto p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(RAIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

constexpr const char* kMinimal =
    "# minimal run\n"
    "scenario.M = 5\n"
    "scenario.sigma_n = 1\n"
    "scenario.tir = 0.01\n"
    "run.epochs = 1000\n"
    "run.seed = 42\n";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
  std::istringstream in(
      "scenario.M = 5, 8\n"
      "scenario.sigma_n = 1, 3.5\n"
      "  # indented comment\n"
      "\n"
      "scenario.bias_mean = 3\n"
      "run.sampler_theta = 0\n"
      "algorithms.enabled = baseline, bayes_fe\n");
  const auto spec = parse_run_spec(in);
  CHECK(spec.sweep_m == std::vector<std::size_t>{5, 8});
  CHECK(spec.sweep_sigma_n == std::vector<double>{1.0, 3.5});
  CHECK(spec.sampler_theta == 0.0);
  CHECK(spec.algorithms == std::vector<Algorithm>{Algorithm::Baseline, Algorithm::BayesFE});
}

TEST_CASE("config errors carry line numbers") {
  auto error_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_run_spec(in, "cfg");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(error_of("scenario.M = 5\nscenario.bogus = 1\n").rfind("cfg:2:", 0) == 0);
  CHECK(error_of("run.epochs = 0\n").rfind("cfg:1: run.epochs", 0) == 0);
  CHECK(error_of("scenario.theta = 1.5\n").rfind("cfg:1: scenario.theta", 0) == 0);
  CHECK(error_of("\n\nno equals sign\n").rfind("cfg:3:", 0) == 0);
  CHECK(error_of("algorithms.enabled = bayes_fe, magic\n").find("magic") != std::string::npos);
  CHECK_FALSE(error_of("scenario.M = 5\nscenario.bias_mean = 1, 2\n").empty());
}

TEST_CASE("config text round trip") {
  std::istringstream in(
      "scenario.M = 4, 6\nscenario.sigma_n = 0.5, 9\nscenario.prior_x = gaussian\n"
      "scenario.prior_mean = 1.5\nscenario.prior_variance = 0.25\nrun.seed = 123456789\n"
      "baseline.max_fault_size = 2\n");
  const auto spec = parse_run_spec(in);
  const auto text = to_config_text(spec);
  std::istringstream again(text);
  CHECK(to_config_text(parse_run_spec(again)) == text);
}

TEST_CASE("summary CSV round trip") {
  std::vector<SummaryRow> rows{
      {5, 1.0, "bayes_fe", 200000, 199990, 2011, 2011.0 / 199990.0, 1e-5 / 3.0, 3.141592653589793, 199990, 7},
      {8, 9.0, "baseline", 10, 9, 0, 0.0, 0.1, 12.5, 2, 3}};
  std::ostringstream os;
  write_summary_csv(os, rows);
  CHECK(os.str().rfind(std::string(kSummaryHeader) + "\n", 0) == 0);
  std::istringstream is(os.str());
  CHECK(read_summary_csv(is) == rows);
}

TEST_CASE("format_double is shortest round trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  const double x = 2.0 / 3.0;
  CHECK(std::stod(format_double(x)) == x);
  CHECK(cell_tag(5, 1.0) == "5_1");
  CHECK(cell_tag(8, 0.5) == "8_0.5");
}

TEST_CASE("cmd_run writes every listed file") {
  const auto dir = scratch("run");
  const auto cfg = write_config(dir, kMinimal);
  std::ostringstream err;
  REQUIRE(cmd_run(cfg, dir / "out", {}, err) == exit_code::kOk);

  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["format"] == "raim-run/1");
  CHECK(manifest["master_seed"] == 42);
  for (const auto& f : manifest["files"]) CHECK(fs::exists(dir / "out" / f.get<std::string>()));
  CHECK(fs::exists(dir / "out" / "stanford_bayes_fe_5_1.csv"));
  CHECK(fs::exists(dir / "out" / "ccdf_baseline_5_1.csv"));
  CHECK(line_count(dir / "out" / "epochs_5_1.csv") == 1001);
  CHECK(line_count(dir / "out" / "summary.csv") == 4);

  std::ifstream summary(dir / "out" / "summary.csv");
  for (const auto& row : read_summary_csv(summary)) CHECK(row.epochs == 1000);

  // The resolved configuration reproduces the run.
  std::istringstream resolved(manifest["resolved_config"].get<std::string>());
  CHECK(load_run_spec(cfg).epochs == parse_run_spec(resolved).epochs);
}

TEST_CASE("cmd_run is reproducible and honours overrides") {
  const auto dir = scratch("rerun");
  const auto cfg = write_config(dir, kMinimal);
  std::ostringstream err;
  REQUIRE(cmd_run(cfg, dir / "a", {}, err) == exit_code::kOk);
  REQUIRE(cmd_run(cfg, dir / "b", {}, err) == exit_code::kOk);
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    if (entry.path().extension() != ".csv") continue;
    CHECK(slurp(entry.path()) == slurp(dir / "b" / entry.path().filename()));
  }

  RunOverrides ov;
  ov.seed = 7;
  ov.epochs = 300;
  ov.algorithms = std::vector<Algorithm>{Algorithm::BayesNFE};
  REQUIRE(cmd_run(cfg, dir / "c", ov, err) == exit_code::kOk);
  REQUIRE(cmd_run(cfg, dir / "d", ov, err) == exit_code::kOk);
  const auto manifest = nlohmann::json::parse(slurp(dir / "c" / "manifest.json"));
  CHECK(manifest["master_seed"] == 7);
  CHECK(line_count(dir / "c" / "epochs_5_1.csv") == 301);
  CHECK_FALSE(fs::exists(dir / "c" / "stanford_baseline_5_1.csv"));
  CHECK(slurp(dir / "c" / "epochs_5_1.csv") == slurp(dir / "d" / "epochs_5_1.csv"));
  CHECK(slurp(dir / "c" / "epochs_5_1.csv") != slurp(dir / "a" / "epochs_5_1.csv"));
}

TEST_CASE("cmd_run rejects bad configurations") {
  const auto dir = scratch("bad");
  std::ostringstream err;
  CHECK(cmd_run(write_config(dir, "scenario.M = 5\nwhat = 1\n"), dir / "o", {}, err) == exit_code::kUsage);
  CHECK(err.str().find("run.cfg:2:") != std::string::npos);
  CHECK(cmd_run(dir / "missing.cfg", dir / "o", {}, err) == exit_code::kUsage);
  CHECK(cmd_run(write_config(dir, "scenario.M = 2\n"), dir / "o", {}, err) == exit_code::kUsage);
}

TEST_CASE("cmd_posterior") {
  const auto dir = scratch("posterior");
  SUBCASE("full mixture") {
    const auto cfg = write_config(dir, "scenario.M = 3\nscenario.bias_mean = 5\nscenario.tir = 0.001\n");
    std::ostringstream out, err;
    REQUIRE(cmd_posterior(cfg, "0.1,-0.3,40", out, err) == exit_code::kOk);
    CHECK(out.str().find("components = 8\n") != std::string::npos);

    const auto spec = load_run_spec(cfg);
    const auto rc = spec.cell(3, 1.0);
    Eigen::VectorXd y(3);
    y << 0.1, -0.3, 40;
    const auto mp = run_message_passing(rc.scenario, y);
    const auto nfe = estimate_and_pl(mp.posterior, 0.001);
    const auto expected = "bayes_nfe estimate = " + format_double(nfe.estimate) +
                          " pl = " + format_double(nfe.pl) + "\n";
    CHECK(out.str().find(expected) != std::string::npos);
    const auto fe = bayes_raim(rc.scenario, y, rc.scenario.theta_threshold);
    CHECK(out.str().find("bayes_fe estimate = " + format_double(fe.estimate) + " pl = " +
                         format_double(fe.pl) + " excluded = 2\n") != std::string::npos);
  }
  SUBCASE("fault-free prior gives one component") {
    const auto cfg = write_config(dir, "scenario.M = 2\nscenario.theta = 0\n");
    std::ostringstream out, err;
    REQUIRE(cmd_posterior(cfg, "1,2", out, err) == exit_code::kOk);
    CHECK(out.str().find("components = 1\n") != std::string::npos);
  }
  SUBCASE("arity mismatch") {
    const auto cfg = write_config(dir, "scenario.M = 3\n");
    std::ostringstream out, err;
    CHECK(cmd_posterior(cfg, "1,2", out, err) == exit_code::kUsage);
    CHECK(cmd_posterior(cfg, "1,2,x", out, err) == exit_code::kUsage);
  }
}

TEST_CASE("executable exit codes") {
  const auto dir = scratch("exe");
  const auto cfg = write_config(dir, "scenario.M = 4\nrun.epochs = 20\n");
  CHECK(cli("run --config " + cfg.string() + " --out " + (dir / "o").string()) == 0);
  CHECK(cli("") == 2);
  CHECK(cli("run --config " + cfg.string()) == 2);
  CHECK(cli("run --config " + cfg.string() + " --out " + (dir / "o").string() + " --algs nope") == 2);
  CHECK(cli("posterior --config " + cfg.string() + " --y 1,2,3") == 2);
  CHECK(cli("posterior --config " + cfg.string() + " --y 1,2,3,4") == 0);
  // A file where the output directory should go is a runtime failure.
  std::ofstream(dir / "blocker") << "x";
  CHECK(cli("run --config " + cfg.string() + " --out " + (dir / "blocker").string()) == 1);
}

}  // TEST_SUITE
