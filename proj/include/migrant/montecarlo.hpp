#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "migrant/chain.hpp"
#include "migrant/families.hpp"

namespace migrant {

/// Runs task(i) for i in [0, count) on up to `threads` workers (0 = hardware
/// concurrency). Tasks write into slots keyed by i, so results never depend on
/// the worker count or scheduling.
void parallel_for_index(std::int64_t count, unsigned threads, const std::function<void(std::int64_t)>& task);

/// Worker count from MIGRANT_CHAIN_THREADS, or `fallback` when unset/invalid.
unsigned threads_from_environment(unsigned fallback = 1);

struct EnsembleSpec {
  ChainConfig config;
  std::int64_t replications = 1;
  std::int64_t burn_in = 0;
  unsigned threads = 1;  // never affects results
};

struct SpeedEstimate {
  std::int64_t horizon = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  std::vector<double> values;  // X_n / n per replication
};

/// Mean and standard error of X_n/n over independent replications. Unless
/// `require_transient` is false, the family must classify as transient.
SpeedEstimate ensemble_speed(const EnsembleSpec& spec, bool require_transient = true);

/// Steps n with begin <= n < end (drops Y_n).
struct StepWindow {
  std::int64_t begin = 0;
  std::int64_t end = 0;

  std::int64_t length() const { return end > begin ? end - begin : 0; }
};

struct ReplicationDrops {
  std::map<std::int64_t, std::int64_t> counts;  // drop size (>= 1) -> occurrences
  std::int64_t max_drop = 0;
  std::int64_t max_state = 0;  // largest X_{n-1} over the window
};

struct DropCensus {
  StepWindow window;
  std::optional<int> gamma0;
  std::int64_t max_drop = 0;
  std::map<std::int64_t, std::int64_t> counts;  // pooled over replications
  std::vector<ReplicationDrops> per_replication;
  double fraction_within_gamma0 = 0.0;  // replications whose window max drop <= gamma0

  /// Fraction of replications in which every listed drop size occurs.
  double fraction_with_all(const std::vector<std::int64_t>& sizes) const;
  /// Fraction of replications whose window max drop is <= cap.
  double fraction_max_at_most(std::int64_t cap) const;
};

/// Drop sizes within `window` per replication. Simulates to step window.end - 1.
DropCensus drop_census(const EnsembleSpec& spec, StepWindow window);

struct RunSummary {
  std::int64_t final_state = 0;
  std::int64_t max_state = 0;
  double tail_mean = 0.0;  // mean of X_t over the last max(1, floor(tail_fraction * steps)) steps
};

/// One run of `steps` transitions on substream `index` of `master_seed`, the
/// same stream simulate(config, index) uses, without storing the path.
RunSummary run_summary(const ThinningFamily& family, std::int64_t x0, std::int64_t steps,
                       std::uint64_t master_seed, std::uint64_t index, double tail_fraction = 0.2);

struct HittingEstimate {
  double p_hat = 0.0;
  double standard_error = 0.0;
  std::int64_t hits = 0;
  std::int64_t replications = 0;
};

/// Monte Carlo P_{x0}(tau_target < tau_cap); every run stops at the first of
/// the two levels. Requires target < x0 < cap.
HittingEstimate hitting_estimate(const ThinningFamily& family, std::int64_t x0, std::int64_t target,
                                 std::int64_t cap, std::int64_t replications, std::uint64_t master_seed,
                                 unsigned threads = 1);

struct ReturnTimeStats {
  std::vector<std::int64_t> times;  // per replication; -1 if no return within max_steps
  std::map<std::int64_t, std::int64_t> distribution;
  double mean = 0.0;  // over returned runs
  double standard_error = 0.0;
  double fraction_not_returned = 0.0;
};

/// First t >= 1 with X_t = base_state, started from `start` (default: base_state).
ReturnTimeStats return_time_stats(const ThinningFamily& family, std::int64_t base_state, std::int64_t replications,
                                  std::int64_t max_steps, std::uint64_t master_seed, unsigned threads = 1,
                                  std::optional<std::int64_t> start = std::nullopt);

struct OccupationHistogram {
  std::vector<double> mass;  // mass[x] = fraction of post-burn-in time at state x

  double mass_below(std::int64_t level) const;
  double total() const;
};

/// Occupation frequencies of X_t for burn_in < t <= steps on one trajectory.
OccupationHistogram occupation_histogram(const ThinningFamily& family, std::int64_t x0, std::int64_t steps,
                                         std::int64_t burn_in, std::uint64_t seed);

double total_variation(const OccupationHistogram& a, const OccupationHistogram& b);

}  // namespace migrant
