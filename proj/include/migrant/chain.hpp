#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "migrant/families.hpp"
#include "migrant/random.hpp"

namespace migrant {

/// States above this bound abort the simulation with std::overflow_error.
inline constexpr std::int64_t kStateCap = std::int64_t{1} << 62;

struct ChainConfig {
  ThinningFamily family = ThinningFamily::power_law(1.0);
  std::int64_t x0 = 1;
  std::int64_t steps = 0;
  std::uint64_t master_seed = 0;
};

/// Exact law of the drop Y given X = k: Bin(k, c(k)) on {0..k}.
struct IncrementLaw {
  std::int64_t k = 1;
  double c = 0.0;
  Eigen::ArrayXd log_pmf;

  double pmf(std::int64_t y) const;
};

struct Trajectory {
  std::vector<std::int64_t> states;  // X_0..X_n
  std::vector<std::int64_t> drops;   // Y_1..Y_n
  ChainConfig config;
  std::uint64_t seed = 0;  // seed of the substream that produced the path
};

struct StepResult {
  std::int64_t next;
  std::int64_t drop;
};

IncrementLaw increment_law(const ThinningFamily& family, std::int64_t k);

/// One transition X -> X - Y + 1 with Y ~ Bin(x, c(x)).
StepResult step(const ThinningFamily& family, std::int64_t x, RandomStream& stream);

/// Trajectory `trajectory_index` of the run seeded with config.master_seed.
Trajectory simulate(const ChainConfig& config, std::uint64_t trajectory_index = 0);

/// Called after every step t >= 1 with (t, X_t, Y_t). The initial state is
/// never tested, so a run started at its target counts only genuine returns.
using StopPredicate = std::function<bool(std::int64_t step, std::int64_t state, std::int64_t drop)>;

struct StoppedTrajectory {
  Trajectory trajectory;
  bool hit = false;
};

/// Runs from x0 on the stream seeded with `seed` until `stop` fires or
/// max_steps transitions have been made.
StoppedTrajectory simulate_until(const ThinningFamily& family, std::int64_t x0, std::uint64_t seed,
                                 const StopPredicate& stop, std::int64_t max_steps);

/// `step,x,y` with y empty on the step-0 row.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace migrant
