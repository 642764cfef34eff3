#include <doctest.h>

#include <numeric>

#include "raim/montecarlo.hpp"

using namespace raim;

namespace {

RunConfig small_config(std::size_t m, double sigma_n, std::size_t n, std::uint64_t seed = 42) {
  ScenarioTemplate t;
  t.tir = 1e-2;
  RunConfig c;
  c.scenario = build_cell_scenario(t, m, sigma_n, seed);
  c.n_epochs = n;
  c.master_seed = seed;
  return c;
}

bool same_outcome(const AlgorithmOutcome& a, const AlgorithmOutcome& b) {
  return a.estimate == b.estimate && a.abs_error == b.abs_error && a.pl == b.pl &&
         a.trusted == b.trusted && a.excluded == b.excluded && a.excluded_count == b.excluded_count;
}

}  // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("one epoch gives one record") {
  const auto out = run(small_config(5, 1.0, 1));
  REQUIRE(out.records.size() == 1);
  CHECK(out.records[0].outcomes.size() == 3);
  for (const auto& s : out.summary.algorithms) CHECK(s.epochs == 1);
  auto zero = small_config(5, 1.0, 1);
  zero.n_epochs = 0;
  CHECK_THROWS_AS(run(zero), std::invalid_argument);
}

TEST_CASE("cell scenario") {
  ScenarioTemplate t;
  const auto a = build_cell_scenario(t, 5, 3.0, 9);
  const auto b = build_cell_scenario(t, 5, 3.0, 9);
  const auto c = build_cell_scenario(t, 5, 5.0, 9);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a.stations[i].bias_mean == b.stations[i].bias_mean);
    CHECK(std::abs(a.stations[i].bias_mean) <= 50.0);
    CHECK(a.stations[i].noise_std == 3.0);
  }
  CHECK(a.stations[0].bias_mean != c.stations[0].bias_mean);
  t.bias_means = {7.0};
  CHECK(build_cell_scenario(t, 4, 1.0, 9).stations[3].bias_mean == 7.0);
  t.bias_means = {1.0, 2.0};
  CHECK_THROWS_AS(build_cell_scenario(t, 4, 1.0, 9), std::invalid_argument);
}

TEST_CASE("stanford bins") {
  AlgorithmOutcome o;
  o.abs_error = 0.5;
  o.pl = 1.0;
  const std::vector<AlgorithmOutcome> one{o};
  const auto h = stanford_bins(one, 0.01);
  REQUIRE(h.cells.size() == 1);
  CHECK(h.cells.begin()->first == std::pair<std::int64_t, std::int64_t>{50, 100});
  CHECK(h.cells.begin()->second.count == 1);
  CHECK(h.failures == 0);

  std::vector<AlgorithmOutcome> mixed(4, o);
  mixed[1].pl.reset();
  mixed[2].abs_error = 1.004;  // same pixel as the PL but strictly above it
  mixed[3].abs_error = 1.0;    // on the diagonal is not a failure
  const auto hm = stanford_bins(mixed, 0.01);
  CHECK(hm.total == 3);
  CHECK(hm.failures == 1);
  CHECK_THROWS(stanford_bins(mixed, 0.0));
}

TEST_CASE("stanford totals agree with the IR counters") {
  const auto cfg = small_config(5, 3.0, 3000);
  const auto out = run(cfg);
  for (const auto& s : out.summary.algorithms) {
    std::uint64_t count = 0, failures = 0;
    for (const auto& [key, cell] : s.stanford.cells) {
      count += cell.count;
      failures += cell.failures;
    }
    CHECK(count == s.with_pl);
    CHECK(failures == s.failures);
    if (s.with_pl) {
      CHECK(static_cast<double>(failures) / static_cast<double>(count) == s.simulated_ir);
    }
    CHECK(s.no_trust_rate == doctest::Approx(static_cast<double>(s.epochs - s.with_pl) /
                                             static_cast<double>(s.epochs)));
  }
}

TEST_CASE("ccdf and percentile") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(percentile_nearest_rank(v, 0.99) == 99.0);
  CHECK(percentile_nearest_rank(v, 1.0) == 100.0);
  CHECK(percentile_nearest_rank(v, 0.001) == 1.0);
  CHECK(percentile_nearest_rank(std::vector<double>(10, 4.2), 0.99) == 4.2);
  CHECK_THROWS(percentile_nearest_rank({}, 0.5));

  const auto step = empirical_ccdf(std::vector<double>(10, 4.2));
  REQUIRE(step.size() == 1);
  CHECK(step[0].ccdf == 0.0);

  const auto c = empirical_ccdf({3.0, 1.0, 2.0, 2.0});
  REQUIRE(c.size() == 3);
  CHECK(c[0].pl == 1.0);
  CHECK(c[0].ccdf == 0.75);
  CHECK(c[1].pl == 2.0);
  CHECK(c[1].ccdf == 0.25);
  CHECK(c[2].ccdf == 0.0);
}

TEST_CASE("identical records for any worker count") {
  auto cfg = small_config(5, 5.0, 1500, 3);
  cfg.workers = 1;
  const auto a = run(cfg);
  cfg.workers = 4;
  const auto b = run(cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].epoch_index == i);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(same_outcome(a.records[i].outcomes[k], b.records[i].outcomes[k]));
    }
  }
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(a.summary.algorithms[k].pl_p99 == b.summary.algorithms[k].pl_p99);
    CHECK(a.summary.algorithms[k].failures == b.summary.algorithms[k].failures);
  }
}

TEST_CASE("algorithms see the same epochs") {
  auto all = small_config(5, 1.0, 400, 8);
  auto only_nfe = all;
  only_nfe.algorithms = {Algorithm::BayesNFE};
  const auto a = run(all);
  const auto b = run(only_nfe);
  for (std::size_t i = 0; i < 400; ++i) {
    CHECK(same_outcome(a.records[i].outcomes[1], b.records[i].outcomes[0]));
  }
}

TEST_CASE("baseline PLs are discrete") {
  const auto out = run(small_config(5, 2.0, 5000, 11));
  const auto& s = out.summary.at(Algorithm::Baseline);
  CHECK(s.distinct_pl <= s.distinct_exclusions);
  CHECK(s.distinct_pl >= 1);
}

TEST_CASE("sampler theta overrides fault draws only") {
  auto cfg = small_config(5, 1.0, 2000, 5);
  cfg.sampler_theta = 0.0;
  const auto out = run(cfg);
  const auto& nfe = out.summary.at(Algorithm::BayesNFE);
  CHECK(nfe.with_pl == 2000);
  // Without faults the Bayes error is tiny compared with any bias.
  for (const auto& r : out.records) CHECK(r.outcomes[1].abs_error < 10.0);
}

TEST_CASE("algorithm names") {
  for (auto a : all_algorithms()) CHECK(parse_algorithm(algorithm_name(a)) == a);
  CHECK_FALSE(parse_algorithm("nope").has_value());
}

}  // TEST_SUITE
