#include "migrant/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "migrant/random.hpp"

namespace migrant {

void parallel_for_index(std::int64_t count, unsigned threads, const std::function<void(std::int64_t)>& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<std::int64_t>(std::min<std::int64_t>(threads, count));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < count; ++i) task(i);
    return;
  }

  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::int64_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::int64_t i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock{failure_mutex};
            if (!failure) failure = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

unsigned threads_from_environment(unsigned fallback) {
  const char* value = std::getenv("MIGRANT_CHAIN_THREADS");
  if (value == nullptr) return fallback;
  try {
    const long parsed = std::stol(value);
    return parsed > 0 ? static_cast<unsigned>(parsed) : fallback;
  } catch (const std::exception&) {
    return fallback;
  }
}

namespace {

struct MeanAndError {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Sequential in index order, so the result does not depend on scheduling.
MeanAndError summarize(const std::vector<double>& values) {
  MeanAndError out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double squares = 0.0;
    for (double v : values) squares += (v - out.mean) * (v - out.mean);
    out.standard_error = std::sqrt(squares / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  }
  return out;
}

void check_ensemble(const EnsembleSpec& spec) {
  if (spec.replications < 1) throw std::invalid_argument("ensemble: replications must be positive");
  if (spec.config.x0 < 1) throw std::invalid_argument("ensemble: x0 must be at least 1");
  if (spec.burn_in < 0 || (spec.config.steps > 0 && spec.burn_in >= spec.config.steps)) {
    throw std::invalid_argument("ensemble: burn_in must be below steps");
  }
}

}  // namespace

SpeedEstimate ensemble_speed(const EnsembleSpec& spec, bool require_transient) {
  check_ensemble(spec);
  if (spec.config.steps < 1) throw std::invalid_argument("ensemble_speed: horizon must be at least 1");
  if (require_transient && classify(spec.config.family).regime != Regime::transient) {
    throw std::invalid_argument("ensemble_speed: family does not classify as transient");
  }

  const std::int64_t n = spec.config.steps;
  SpeedEstimate estimate;
  estimate.horizon = n;
  estimate.values.resize(spec.replications);
  parallel_for_index(spec.replications, spec.threads, [&](std::int64_t r) {
    auto stream = RandomStream::substream(spec.config.master_seed, static_cast<std::uint64_t>(r));
    std::int64_t x = spec.config.x0;
    for (std::int64_t t = 0; t < n; ++t) x = step(spec.config.family, x, stream).next;
    if (x > spec.config.x0 + n) throw std::logic_error("ensemble_speed: X_n exceeded x0 + n");
    estimate.values[r] = static_cast<double>(x) / static_cast<double>(n);
  });
  const auto summary = summarize(estimate.values);
  estimate.mean = summary.mean;
  estimate.standard_error = summary.standard_error;
  return estimate;
}

double DropCensus::fraction_with_all(const std::vector<std::int64_t>& sizes) const {
  if (per_replication.empty()) return 0.0;
  std::int64_t hits = 0;
  for (const auto& rep : per_replication) {
    hits += std::all_of(sizes.begin(), sizes.end(), [&](std::int64_t s) { return rep.counts.contains(s); }) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(per_replication.size());
}

double DropCensus::fraction_max_at_most(std::int64_t cap) const {
  if (per_replication.empty()) return 0.0;
  const auto hits = std::count_if(per_replication.begin(), per_replication.end(),
                                  [cap](const ReplicationDrops& rep) { return rep.max_drop <= cap; });
  return static_cast<double>(hits) / static_cast<double>(per_replication.size());
}

DropCensus drop_census(const EnsembleSpec& spec, StepWindow window) {
  check_ensemble(spec);
  if (window.begin < 1) throw std::invalid_argument("drop_census: drops are indexed from step 1");

  DropCensus census;
  census.window = window;
  census.gamma0 = gamma0(spec.config.family);
  census.per_replication.resize(spec.replications);
  if (window.length() > 0) {
    parallel_for_index(spec.replications, spec.threads, [&](std::int64_t r) {
      auto stream = RandomStream::substream(spec.config.master_seed, static_cast<std::uint64_t>(r));
      ReplicationDrops& rep = census.per_replication[r];
      std::int64_t x = spec.config.x0;
      for (std::int64_t n = 1; n < window.end; ++n) {
        const auto [next, y] = step(spec.config.family, x, stream);
        if (y > x) throw std::logic_error("drop_census: drop exceeded the previous state");
        if (n >= window.begin) {
          rep.max_state = std::max(rep.max_state, x);
          if (y > 0) {
            ++rep.counts[y];
            rep.max_drop = std::max(rep.max_drop, y);
          }
        }
        x = next;
      }
    });
  }

  for (const auto& rep : census.per_replication) {
    census.max_drop = std::max(census.max_drop, rep.max_drop);
    for (const auto& [size, count] : rep.counts) census.counts[size] += count;
  }
  if (census.gamma0) census.fraction_within_gamma0 = census.fraction_max_at_most(*census.gamma0);
  return census;
}

RunSummary run_summary(const ThinningFamily& family, std::int64_t x0, std::int64_t steps, std::uint64_t master_seed,
                       std::uint64_t index, double tail_fraction) {
  if (x0 < 1 || steps < 1) throw std::invalid_argument("run_summary: requires x0 >= 1 and steps >= 1");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw std::invalid_argument("run_summary: tail_fraction in (0, 1]");
  const auto tail = std::max<std::int64_t>(1, static_cast<std::int64_t>(tail_fraction * static_cast<double>(steps)));
  auto stream = RandomStream::substream(master_seed, index);
  RunSummary summary;
  std::int64_t x = x0;
  summary.max_state = x;
  std::int64_t tail_sum = 0;
  for (std::int64_t t = 1; t <= steps; ++t) {
    x = step(family, x, stream).next;
    summary.max_state = std::max(summary.max_state, x);
    if (t > steps - tail) tail_sum += x;
  }
  summary.final_state = x;
  summary.tail_mean = static_cast<double>(tail_sum) / static_cast<double>(tail);
  return summary;
}

HittingEstimate hitting_estimate(const ThinningFamily& family, std::int64_t x0, std::int64_t target, std::int64_t cap,
                                 std::int64_t replications, std::uint64_t master_seed, unsigned threads) {
  if (!(1 <= target && target < x0 && x0 < cap)) throw std::invalid_argument("hitting_estimate: requires target < x0 < cap");
  if (replications < 1) throw std::invalid_argument("hitting_estimate: replications must be positive");

  // Upward moves are +1, so a path that jumps below target must pass through
  // target again before it can reach cap: stopping at x <= target is exact.
  std::vector<double> hit(replications);
  parallel_for_index(replications, threads, [&](std::int64_t r) {
    auto stream = RandomStream::substream(master_seed, static_cast<std::uint64_t>(r));
    std::int64_t x = x0;
    while (x > target && x < cap) x = step(family, x, stream).next;
    hit[r] = x <= target ? 1.0 : 0.0;
  });

  HittingEstimate estimate;
  estimate.replications = replications;
  estimate.hits = static_cast<std::int64_t>(std::count(hit.begin(), hit.end(), 1.0));
  const auto summary = summarize(hit);
  estimate.p_hat = summary.mean;
  estimate.standard_error = summary.standard_error;
  return estimate;
}

ReturnTimeStats return_time_stats(const ThinningFamily& family, std::int64_t base_state, std::int64_t replications,
                                  std::int64_t max_steps, std::uint64_t master_seed, unsigned threads,
                                  std::optional<std::int64_t> start) {
  if (base_state < 1) throw std::invalid_argument("return_time_stats: base_state must be at least 1");
  if (replications < 1 || max_steps < 0) throw std::invalid_argument("return_time_stats: bad replications/max_steps");
  const std::int64_t x0 = start.value_or(base_state);
  if (x0 < 1) throw std::invalid_argument("return_time_stats: start must be at least 1");

  ReturnTimeStats stats;
  stats.times.assign(replications, -1);
  parallel_for_index(replications, threads, [&](std::int64_t r) {
    auto stream = RandomStream::substream(master_seed, static_cast<std::uint64_t>(r));
    std::int64_t x = x0;
    for (std::int64_t t = 1; t <= max_steps; ++t) {
      x = step(family, x, stream).next;
      if (x == base_state) {
        stats.times[r] = t;
        break;
      }
    }
  });

  std::vector<double> returned;
  for (const auto t : stats.times) {
    if (t < 0) continue;
    returned.push_back(static_cast<double>(t));
    ++stats.distribution[t];
  }
  const auto summary = summarize(returned);
  stats.mean = summary.mean;
  stats.standard_error = summary.standard_error;
  stats.fraction_not_returned =
      static_cast<double>(replications - static_cast<std::int64_t>(returned.size())) / static_cast<double>(replications);
  return stats;
}

double OccupationHistogram::mass_below(std::int64_t level) const {
  double sum = 0.0;
  for (std::int64_t x = 0; x < std::min<std::int64_t>(level, static_cast<std::int64_t>(mass.size())); ++x) sum += mass[x];
  return sum;
}

double OccupationHistogram::total() const { return mass_below(static_cast<std::int64_t>(mass.size())); }

OccupationHistogram occupation_histogram(const ThinningFamily& family, std::int64_t x0, std::int64_t steps,
                                         std::int64_t burn_in, std::uint64_t seed) {
  if (x0 < 1 || burn_in < 0 || steps <= burn_in) throw std::invalid_argument("occupation_histogram: requires steps > burn_in >= 0");
  auto stream = RandomStream::substream(seed, 0);
  std::vector<std::int64_t> visits;
  std::int64_t x = x0;
  for (std::int64_t t = 1; t <= steps; ++t) {
    x = step(family, x, stream).next;
    if (t <= burn_in) continue;
    if (x >= static_cast<std::int64_t>(visits.size())) visits.resize(x + 1, 0);
    ++visits[x];
  }
  OccupationHistogram histogram;
  histogram.mass.resize(visits.size());
  const auto samples = static_cast<double>(steps - burn_in);
  for (std::size_t i = 0; i < visits.size(); ++i) histogram.mass[i] = static_cast<double>(visits[i]) / samples;
  return histogram;
}

double total_variation(const OccupationHistogram& a, const OccupationHistogram& b) {
  const std::size_t size = std::max(a.mass.size(), b.mass.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double pa = i < a.mass.size() ? a.mass[i] : 0.0;
    const double pb = i < b.mass.size() ? b.mass[i] : 0.0;
    sum += std::abs(pa - pb);
  }
  return 0.5 * sum;
}

}  // namespace migrant
