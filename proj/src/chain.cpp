#include "migrant/chain.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "migrant/numerics.hpp"
#include "migrant/sampling.hpp"

namespace migrant {

double IncrementLaw::pmf(std::int64_t y) const {
  if (y < 0 || y > k) return 0.0;
  return std::exp(log_pmf[y]);
}

IncrementLaw increment_law(const ThinningFamily& family, std::int64_t k) {
  if (k < 1) throw std::invalid_argument("increment_law: k must be at least 1");
  const double c = family.c(k);
  return IncrementLaw{k, c, binomial_log_pmf(k, c)};
}

StepResult step(const ThinningFamily& family, std::int64_t x, RandomStream& stream) {
  if (x < 1) throw std::invalid_argument("step: state must be at least 1");
  const std::int64_t y = sample_binomial(x, family.c(x), stream);
  const std::int64_t next = x - y + 1;
  if (next >= kStateCap) throw std::overflow_error("step: state exceeded 2^62");
  return {next, y};
}

Trajectory simulate(const ChainConfig& config, std::uint64_t trajectory_index) {
  if (config.x0 < 1) throw std::invalid_argument("simulate: x0 must be at least 1");
  if (config.steps < 0) throw std::invalid_argument("simulate: steps must be nonnegative");

  Trajectory path;
  path.config = config;
  path.seed = derive_seed(config.master_seed, trajectory_index);
  path.states.reserve(config.steps + 1);
  path.drops.reserve(config.steps);

  RandomStream stream{path.seed};
  std::int64_t x = config.x0;
  path.states.push_back(x);
  for (std::int64_t n = 0; n < config.steps; ++n) {
    const auto [next, y] = step(config.family, x, stream);
    path.drops.push_back(y);
    path.states.push_back(next);
    x = next;
  }
  return path;
}

StoppedTrajectory simulate_until(const ThinningFamily& family, std::int64_t x0, std::uint64_t seed,
                                 const StopPredicate& stop, std::int64_t max_steps) {
  if (x0 < 1) throw std::invalid_argument("simulate_until: x0 must be at least 1");
  if (max_steps < 1) throw std::invalid_argument("simulate_until: max_steps must be at least 1");

  StoppedTrajectory result;
  Trajectory& path = result.trajectory;
  path.config = ChainConfig{family, x0, max_steps, seed};
  path.seed = seed;

  RandomStream stream{seed};
  std::int64_t x = x0;
  path.states.push_back(x);
  for (std::int64_t t = 1; t <= max_steps; ++t) {
    const auto [next, y] = step(family, x, stream);
    path.drops.push_back(y);
    path.states.push_back(next);
    x = next;
    if (stop(t, x, y)) {
      result.hit = true;
      break;
    }
  }
  return result;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "step,x,y\n";
  out << 0 << ',' << trajectory.states.front() << ",\n";
  for (std::size_t n = 0; n < trajectory.drops.size(); ++n) {
    out << n + 1 << ',' << trajectory.states[n + 1] << ',' << trajectory.drops[n] << '\n';
  }
}

}  // namespace migrant
