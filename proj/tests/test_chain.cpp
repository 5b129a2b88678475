#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "migrant/chain.hpp"
#include "migrant/numerics.hpp"
#include "oracles.hpp"

using namespace migrant;

TEST_CASE("increment_law examples") {
  const auto one = increment_law(ThinningFamily::constant(0.3), 1);
  REQUIRE(one.log_pmf.size() == 2);
  CHECK(one.pmf(0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(one.pmf(1) == doctest::Approx(0.3).epsilon(1e-15));

  const auto three = increment_law(ThinningFamily::constant(0.5), 3);
  const double expected[] = {0.125, 0.375, 0.375, 0.125};
  for (int y = 0; y <= 3; ++y) CHECK(three.pmf(y) == doctest::Approx(expected[y]).epsilon(1e-15));
  CHECK(three.pmf(4) == 0.0);
  CHECK(three.pmf(-1) == 0.0);

  const auto hundred = increment_law(ThinningFamily::power_law(1.5), 100);
  CompensatedSum total;
  for (std::int64_t y = 0; y <= 100; ++y) total.add(hundred.pmf(y));
  CHECK(std::abs(total.value() - 1.0) <= 1e-12);
  CHECK(hundred.c == eval_c(ThinningFamily::power_law(1.5), 100));
}

TEST_CASE("increment_law is normalized with support {0..k}") {
  oracle::Generator gen{5};
  for (int trial = 0; trial < 200; ++trial) {
    const auto family = gen.family();
    std::int64_t k = gen.log_integer(1, 100'000);
    if (const auto* t = std::get_if<Tabulated>(&family.kind())) k = std::min<std::int64_t>(k, t->values.size());
    const auto law = increment_law(family, k);
    REQUIRE(law.log_pmf.size() == k + 1);
    CompensatedSum total;
    for (std::int64_t y = 0; y <= k; ++y) total.add(law.pmf(y));
    CAPTURE(family.name());
    CAPTURE(k);
    CHECK(std::abs(total.value() - 1.0) <= 1e-12);
  }
}

TEST_CASE("step arithmetic") {
  const auto family = ThinningFamily::constant(0.5);
  RandomStream stream{1};
  for (int i = 0; i < 1000; ++i) {
    const auto r = step(family, 5, stream);
    CHECK(r.next == 5 - r.drop + 1);
    const auto s = step(family, 1, stream);
    CHECK((s.next == 1 || s.next == 2));
  }
  CHECK_THROWS_AS(step(family, 0, stream), std::invalid_argument);
}

TEST_CASE("one-step drift equals 1 - i c(i) within 4 standard errors") {
  const std::pair<ThinningFamily, std::int64_t> cases[] = {
      {ThinningFamily::power_law(1.5), 50},
      {ThinningFamily::constant(0.5), 20},
      {ThinningFamily::rescaled(0.5), 1000},
      {ThinningFamily::power_law(1.0), 3000},
  };
  std::uint64_t seed = 100;
  for (const auto& [family, i] : cases) {
    RandomStream stream{seed++};
    std::vector<double> moves(1'000'000);
    for (auto& m : moves) m = static_cast<double>(step(family, i, stream).next - i);
    const auto stats = oracle::moments(moves);
    const double expected = 1.0 - static_cast<double>(i) * family.c(i);
    CAPTURE(family.name());
    CAPTURE(i);
    CHECK(std::abs(stats.mean - expected) <= 4.0 * stats.standard_error);
  }
}

TEST_CASE("sampled drops follow the increment law (chi-square at 1e-3)") {
  const std::pair<ThinningFamily, std::int64_t> cases[] = {
      {ThinningFamily::constant(0.2), 30},     // Bernoulli sum
      {ThinningFamily::power_law(1.0), 500},   // inversion
      {ThinningFamily::constant(0.5), 200},    // large mean
      {ThinningFamily::rescaled(0.5), 1'000'000},
  };
  std::uint64_t seed = 200;
  for (const auto& [family, k] : cases) {
    RandomStream stream{seed++};
    constexpr std::int64_t draws = 1'000'000;
    std::vector<std::int64_t> counts(k + 1, 0);
    for (std::int64_t i = 0; i < draws; ++i) ++counts[step(family, k, stream).drop];
    const auto law = increment_law(family, k);
    std::vector<double> probabilities(k + 1);
    for (std::int64_t y = 0; y <= k; ++y) probabilities[y] = law.pmf(y);
    CAPTURE(family.name());
    CHECK(oracle::chi_square_p_value(counts, probabilities, draws) > 1e-3);
  }
}

TEST_CASE("simulate examples") {
  ChainConfig config{ThinningFamily::power_law(1.5), 7, 0, 3};
  const auto empty = simulate(config);
  CHECK(empty.states == std::vector<std::int64_t>{7});
  CHECK(empty.drops.empty());

  config.steps = 5000;
  const auto a = simulate(config, 4);
  const auto b = simulate(config, 4);
  CHECK(a.states == b.states);
  CHECK(a.drops == b.drops);
  CHECK(a.seed == derive_seed(3, 4));
  CHECK(simulate(config, 5).states != a.states);

  CHECK_THROWS_AS(simulate(ChainConfig{ThinningFamily::power_law(1.0), 0, 10, 1}), std::invalid_argument);
}

TEST_CASE("power_law(1.01) from 100 exceeds 1000 after 1e5 steps in at least 99 of 100 seeds") {
  int above = 0;
  for (std::uint64_t index = 0; index < 100; ++index) {
    const auto path = simulate(ChainConfig{ThinningFamily::power_law(1.01), 100, 100'000, 77}, index);
    if (path.states.back() > 1000) ++above;
  }
  CHECK(above >= 99);
}

TEST_CASE("path invariant on random families and seeds") {
  oracle::Generator gen{11};
  for (int trial = 0; trial < 200; ++trial) {
    auto family = gen.family();
    std::int64_t steps = gen.log_integer(1, 5000);
    std::int64_t x0 = gen.log_integer(1, 1000);
    if (const auto* t = std::get_if<Tabulated>(&family.kind())) {
      // keep the path inside the table: it can climb at most one per step
      const auto size = static_cast<std::int64_t>(t->values.size());
      x0 = std::min(x0, size);
      steps = std::min(steps, size - x0);
    }
    const auto path = simulate(ChainConfig{family, x0, steps, gen.engine()()});
    REQUIRE(path.states.size() == static_cast<std::size_t>(steps + 1));
    REQUIRE(path.drops.size() == static_cast<std::size_t>(steps));
    for (std::int64_t n = 0; n < steps; ++n) {
      REQUIRE(path.states[n + 1] - path.states[n] == 1 - path.drops[n]);
      REQUIRE(path.drops[n] >= 0);
      REQUIRE(path.drops[n] <= path.states[n]);
      REQUIRE(path.states[n + 1] >= 1);
      REQUIRE(path.states[n + 1] <= path.states[n] + 1);
    }
  }
}

TEST_CASE("simulate_until conventions") {
  const auto family = ThinningFamily::constant(0.5);

  // the start state is not tested: a run started at its target counts a genuine return
  std::int64_t first_step = -1;
  const auto back_home = simulate_until(
      family, 1, 9,
      [&](std::int64_t t, std::int64_t x, std::int64_t) {
        if (first_step < 0) first_step = t;
        return x == 1;
      },
      10'000);
  CHECK(first_step == 1);
  CHECK(back_home.hit);
  CHECK(back_home.trajectory.states.size() >= 2);
  CHECK(back_home.trajectory.states.back() == 1);

  // upward moves are +1, so a run started below M stops exactly at M
  const auto climb = ThinningFamily::power_law(3.0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto run = simulate_until(climb, 2, seed, [](std::int64_t, std::int64_t x, std::int64_t) { return x >= 40; },
                                    100'000);
    REQUIRE(run.hit);
    CHECK(run.trajectory.states.back() == 40);
  }

  const auto capped = simulate_until(family, 5, 1, [](std::int64_t, std::int64_t, std::int64_t) { return false; }, 25);
  CHECK_FALSE(capped.hit);
  CHECK(capped.trajectory.drops.size() == 25);

  CHECK_THROWS_AS(simulate_until(family, 5, 1, [](std::int64_t, std::int64_t, std::int64_t) { return false; }, 0),
                  std::invalid_argument);
}

TEST_CASE("hitting time of state 3 from 1 under c = 0.5 matches the linear-system oracle") {
  const auto family = ThinningFamily::constant(0.5);
  const double expected = oracle::expected_hitting_time_from_below(oracle::c_of(family), 3)[0];
  std::vector<double> times;
  for (std::uint64_t r = 0; r < 100'000; ++r) {
    const auto run = simulate_until(family, 1, derive_seed(123, r),
                                    [](std::int64_t, std::int64_t x, std::int64_t) { return x == 3; }, 1'000'000);
    REQUIRE(run.hit);
    times.push_back(static_cast<double>(run.trajectory.drops.size()));
  }
  const auto stats = oracle::moments(times);
  CHECK(std::abs(stats.mean - expected) <= 4.0 * stats.standard_error);
  // T1 = 1 + T1/2 + T2/2 and T2 = 1 + T2/2 + T1/4 give T1 = 8
  CHECK(expected == doctest::Approx(8.0).epsilon(1e-10));
}

TEST_CASE("trajectory CSV") {
  const auto path = simulate(ChainConfig{ThinningFamily::power_law(1.5), 4, 3, 1});
  std::ostringstream out;
  write_trajectory_csv(out, path);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "step,x,y");
  std::getline(lines, line);
  CHECK(line == "0,4,");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("states beyond 2^62 fail loudly") {
  RandomStream stream{1};
  const auto family = ThinningFamily::power_law(3.0);
  CHECK_THROWS_AS(step(family, kStateCap - 1, stream), std::overflow_error);
  CHECK_NOTHROW(step(family, kStateCap - 2, stream));
}
