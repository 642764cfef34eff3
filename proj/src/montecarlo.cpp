#include "raim/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

#include "raim/bayes.hpp"

namespace raim {

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::BayesFE: return "bayes_fe";
    case Algorithm::BayesNFE: return "bayes_nfe";
    case Algorithm::Baseline: return "baseline";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (auto a : all_algorithms()) {
    if (algorithm_name(a) == name) return a;
  }
  return std::nullopt;
}

std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t m, double sigma_n) {
  return derive_seed(derive_seed(master_seed, m), std::bit_cast<std::uint64_t>(sigma_n));
}

Scenario build_cell_scenario(const ScenarioTemplate& t, std::size_t m, double sigma_n,
                             std::uint64_t master_seed) {
  Scenario s;
  s.tir = t.tir;
  s.theta_threshold = t.theta_threshold;
  s.p_fa = t.p_fa;
  s.prior_x = t.prior_x;
  s.true_x = t.true_x;

  std::vector<double> means = t.bias_means;
  if (means.empty()) {
    std::mt19937_64 rng(cell_seed(master_seed, m, sigma_n));
    std::uniform_real_distribution<double> u(-t.bias_mean_range, t.bias_mean_range);
    for (std::size_t i = 0; i < m; ++i) means.push_back(u(rng));
  } else if (means.size() == 1) {
    means.assign(m, means.front());
  } else if (means.size() != m) {
    throw std::invalid_argument("bias_means must have 1 or M entries");
  }
  for (std::size_t i = 0; i < m; ++i) {
    s.stations.push_back(BsParams{t.theta, means[i], t.bias_std, sigma_n});
  }
  s.validate();
  return s;
}

const AlgorithmSummary& SummaryStats::at(Algorithm a) const {
  for (const auto& s : algorithms) {
    if (s.algorithm == a) return s;
  }
  throw std::out_of_range("algorithm not part of this run");
}

StanfordHistogram stanford_bins(std::span<const AlgorithmOutcome> outcomes, double pixel) {
  if (!(pixel > 0.0)) throw std::invalid_argument("stanford_bins: pixel must be > 0");
  StanfordHistogram h;
  h.pixel = pixel;
  for (const auto& o : outcomes) {
    if (!o.pl) continue;
    const auto eb = static_cast<std::int64_t>(std::floor(o.abs_error / pixel));
    const auto pb = static_cast<std::int64_t>(std::floor(*o.pl / pixel));
    auto& cell = h.cells[{eb, pb}];
    const bool fail = *o.pl < o.abs_error;
    ++cell.count;
    ++h.total;
    if (fail) {
      ++cell.failures;
      ++h.failures;
    }
  }
  return h;
}

std::vector<CcdfPoint> empirical_ccdf(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  std::vector<CcdfPoint> out;
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size();) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    out.push_back({samples[i], static_cast<double>(samples.size() - j) / n});
    i = j;
  }
  return out;
}

double percentile_nearest_rank(std::vector<double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("percentile of an empty sample");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("percentile level must lie in (0, 1]");
  const auto n = samples.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   samples.end());
  return samples[rank - 1];
}

std::size_t resolve_workers(std::size_t requested) {
  std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RAIM_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return n;
}

namespace {

AlgorithmOutcome from_bayes(const BayesResult& r, double true_x) {
  AlgorithmOutcome o;
  o.estimate = r.estimate;
  o.abs_error = std::abs(true_x - r.estimate);
  o.pl = r.pl;
  o.trusted = true;
  o.excluded_count = static_cast<std::uint32_t>(r.excluded.size());
  o.excluded = indices_mask(r.excluded);
  return o;
}

struct EpochEvaluator {
  const RunConfig& config;
  Scenario sampling;
  std::optional<BaselineMonitor> monitor;
  bool needs_bayes = false;

  explicit EpochEvaluator(const RunConfig& c) : config(c), sampling(c.scenario) {
    if (c.sampler_theta) {
      for (auto& st : sampling.stations) st.theta = *c.sampler_theta;
    }
    for (auto a : c.algorithms) {
      if (a == Algorithm::Baseline) {
        monitor.emplace(c.scenario, c.baseline);
      } else {
        needs_bayes = true;
      }
    }
  }

  EpochRecord operator()(std::size_t index) const {
    const auto epoch = sample_epoch(sampling, derive_seed(config.master_seed, index));
    EpochRecord rec;
    rec.epoch_index = index;
    std::optional<BayesPair> bayes;
    if (needs_bayes) bayes = bayes_raim_both(config.scenario, epoch.y);

    for (auto a : config.algorithms) {
      switch (a) {
        case Algorithm::BayesNFE:
          rec.outcomes.push_back(from_bayes(bayes->nfe, epoch.true_x));
          break;
        case Algorithm::BayesFE:
          if (bayes->fe) {
            rec.outcomes.push_back(from_bayes(*bayes->fe, epoch.true_x));
          } else {
            // Every branch excluded: no estimate of our own to report.
            AlgorithmOutcome o = from_bayes(bayes->nfe, epoch.true_x);
            o.pl.reset();
            o.trusted = false;
            o.excluded_count = static_cast<std::uint32_t>(config.scenario.size());
            o.excluded = full_mask(config.scenario.size());
            rec.outcomes.push_back(o);
          }
          break;
        case Algorithm::Baseline: {
          const auto r = monitor->evaluate(epoch.y);
          AlgorithmOutcome o;
          o.estimate = r.estimate;
          o.abs_error = std::abs(epoch.true_x - r.estimate);
          o.pl = r.pl;
          o.trusted = r.trusted;
          o.excluded_count = static_cast<std::uint32_t>(r.excluded.size());
          o.excluded = indices_mask(r.excluded);
          rec.outcomes.push_back(o);
          break;
        }
      }
    }
    return rec;
  }
};

}  // namespace

SummaryStats summarize(const RunConfig& config, std::span<const EpochRecord> records) {
  SummaryStats stats;
  for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
    AlgorithmSummary s;
    s.algorithm = config.algorithms[a];
    std::vector<AlgorithmOutcome> outcomes;
    outcomes.reserve(records.size());
    for (const auto& r : records) outcomes.push_back(r.outcomes.at(a));

    std::vector<double> pls;
    std::set<double> distinct;
    std::set<IndexMask> exclusions;
    for (const auto& o : outcomes) {
      ++s.epochs;
      if (!o.pl) continue;
      ++s.with_pl;
      if (o.abs_error > *o.pl) ++s.failures;
      pls.push_back(*o.pl);
      distinct.insert(*o.pl);
      exclusions.insert(o.excluded);
    }
    s.simulated_ir = s.with_pl ? static_cast<double>(s.failures) / static_cast<double>(s.with_pl) : 0.0;
    s.no_trust_rate = s.epochs ? static_cast<double>(s.epochs - s.with_pl) / static_cast<double>(s.epochs) : 0.0;
    s.distinct_pl = distinct.size();
    s.distinct_exclusions = exclusions.size();
    s.stanford = stanford_bins(outcomes, config.stanford_pixel);
    if (!pls.empty()) s.pl_p99 = percentile_nearest_rank(pls, 0.99);
    s.ccdf = empirical_ccdf(std::move(pls));
    stats.algorithms.push_back(std::move(s));
  }
  return stats;
}

RunOutput run(const RunConfig& config) {
  if (config.n_epochs == 0) throw std::invalid_argument("run: n_epochs must be >= 1");
  if (config.algorithms.empty()) throw std::invalid_argument("run: no algorithms requested");
  config.scenario.validate();

  const EpochEvaluator eval(config);
  RunOutput out;
  out.records.resize(config.n_epochs);

  const std::size_t workers = std::min(resolve_workers(config.workers), config.n_epochs);
  constexpr std::size_t kChunk = 256;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    try {
      for (;;) {
        const std::size_t begin = next.fetch_add(kChunk);
        if (begin >= config.n_epochs) return;
        const std::size_t end = std::min(begin + kChunk, config.n_epochs);
        for (std::size_t i = begin; i < end; ++i) out.records[i] = eval(i);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(config.n_epochs);
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  out.summary = summarize(config, out.records);
  return out;
}

}  // namespace raim
