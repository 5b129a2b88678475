#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "migrant/families.hpp"
#include "oracles.hpp"

using namespace migrant;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest integer gamma whose block sum over [N, 2N] of (k c(k))^{1+gamma}
// has fallen below `threshold`. A divergent series keeps its block sums
// bounded away from zero; a convergent one sends them to zero.
int gamma0_by_partial_sums(const ThinningFamily& family, std::int64_t N, double threshold) {
  for (int gamma = 0; gamma < 20; ++gamma) {
    double block = 0.0;
    for (std::int64_t k = N; k <= 2 * N; ++k) {
      block += std::pow(static_cast<double>(k) * family.c(k), 1.0 + gamma);
    }
    if (block < threshold) return gamma;
  }
  return -1;
}

}  // namespace

TEST_CASE("eval_c examples") {
  CHECK(eval_c(ThinningFamily::power_law(1.0), 3) == 0.25);
  for (std::int64_t k : {1, 7, 1'000'000}) CHECK(eval_c(ThinningFamily::constant(0.5), k) == 0.5);
  CHECK(eval_c(ThinningFamily::power_law(1.5), 10) == doctest::Approx(0.0306534).epsilon(1e-6));
  CHECK(eval_c(ThinningFamily::power_law(1.5), 10) == 1.0 / (std::pow(10.0, 1.5) + 1.0));
}

TEST_CASE("eval_c errors") {
  const auto table = ThinningFamily::tabulated({0.5, 0.01});
  CHECK(eval_c(table, 2) == 0.01);
  CHECK_THROWS_AS(eval_c(table, 3), std::out_of_range);
  CHECK_THROWS_AS(eval_c(ThinningFamily::power_law(1.0), 0), std::out_of_range);
  CHECK_THROWS_AS(ThinningFamily::constant(1.0), std::invalid_argument);
  CHECK_THROWS_AS(ThinningFamily::tabulated({0.5, 1.2}), std::invalid_argument);
  CHECK_THROWS_AS(ThinningFamily::rescaled(0.5, 1.0), std::invalid_argument);
  // a large rho is fine at construction but c hits the cap, never 1
  CHECK(eval_c(ThinningFamily::rescaled(50.0), 3) == 0.9);
  // a steep power law underflows to c = 0 far out
  CHECK_THROWS_AS(eval_c(ThinningFamily::power_law(40.0), 1'000'000'000), std::domain_error);
}

TEST_CASE("rho_limit examples") {
  CHECK(*rho_limit(ThinningFamily::power_law(0.5)) == kInf);
  CHECK(*rho_limit(ThinningFamily::power_law(2.0)) == 0.0);
  CHECK(*rho_limit(ThinningFamily::power_law(1.0)) == 1.0);
  CHECK(*rho_limit(ThinningFamily::rescaled(0.5)) == 0.5);
  CHECK(*rho_limit(ThinningFamily::constant(0.1)) == kInf);
  CHECK_FALSE(rho_limit(ThinningFamily::tabulated({0.5})).has_value());
}

TEST_CASE("eta examples") {
  CHECK(eta(ThinningFamily::power_law(1.0), 4) == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(eta(ThinningFamily::power_law(1.0), 9) == doctest::Approx(-0.1).epsilon(1e-15));
  const auto unit = ThinningFamily::rescaled(1.0, 0.9);
  for (std::int64_t k : {2, 3, 10, 12345}) CHECK(eta(unit, k) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("eta of power_law(1) is -1/(1+k) at every k") {
  const auto family = ThinningFamily::power_law(1.0);
  const auto reciprocal_minus = ThinningFamily::critical(EtaSpec::reciprocal_minus());
  for (std::int64_t k = 1; k <= 100'000; k += (k < 100 ? 1 : 97)) {
    CHECK(eta(family, k) == doctest::Approx(-1.0 / (1.0 + static_cast<double>(k))).epsilon(1e-12));
    CHECK(eval_c(reciprocal_minus, k) == eval_c(family, k));
  }
}

TEST_CASE("sign of eta for power laws follows the side of a = 1") {
  // below a = 1 the sign settles once k - k^a > 1
  for (double a : {0.5, 0.9, 0.99}) {
    for (std::int64_t k = 1000; k <= 10'000'000; k *= 3) CHECK(eta(ThinningFamily::power_law(a), k) > 0.0);
  }
  for (double a : {1.0, 1.01, 1.5, 3.0}) {
    for (std::int64_t k = 1; k <= 10'000; k *= 3) CHECK(eta(ThinningFamily::power_law(a), k) < 0.0);
  }
}

TEST_CASE("gamma0 examples") {
  CHECK(*gamma0(ThinningFamily::power_law(2.5)) == 0);
  CHECK(*gamma0(ThinningFamily::power_law(1.5)) == 2);
  CHECK(*gamma0(ThinningFamily::power_law(2.0)) == 1);
  CHECK_FALSE(gamma0(ThinningFamily::power_law(1.0)).has_value());
  CHECK_FALSE(gamma0(ThinningFamily::power_law(0.7)).has_value());
  CHECK_FALSE(gamma0(ThinningFamily::rescaled(0.5)).has_value());
  CHECK_FALSE(gamma0(ThinningFamily::constant(0.5)).has_value());
}

TEST_CASE("gamma0 table agrees with the partial-sum divergence test") {
  const std::pair<double, int> table[] = {{1.4, 2}, {1.5, 2}, {1.6, 1}, {2.0, 1}, {2.5, 0}};
  for (const auto& [a, expected] : table) {
    CAPTURE(a);
    const auto family = ThinningFamily::power_law(a);
    CHECK(*gamma0(family) == expected);
    CHECK(gamma0_by_partial_sums(family, 1'000'000, 0.1) == expected);
  }
}

TEST_CASE("k_a brackets a and matches the real threshold") {
  oracle::Generator gen{2024};
  for (int trial = 0; trial < 2000; ++trial) {
    const double a = gen.uniform(1.001, 2.0);
    const int ka = *power_law_ka(a);
    CHECK(static_cast<double>(ka + 2) / (ka + 1) < a);
    CHECK(a <= static_cast<double>(ka + 1) / ka);
    // smallest integer strictly above -1 + 1/(a-1)
    const double threshold = -1.0 + 1.0 / (a - 1.0);
    CHECK(ka > threshold - 1e-9);
    CHECK(ka - 1 <= threshold + 1e-9);
  }
  CHECK(*power_law_ka(2.0) == 1);
  CHECK(*power_law_ka(1.5) == 2);
  CHECK(*power_law_ka(1.2) == 5);
  CHECK_FALSE(power_law_ka(2.5).has_value());
}

TEST_CASE("gamma0 is nonincreasing in a") {
  int previous = std::numeric_limits<int>::max();
  for (double a = 1.01; a <= 5.0; a += 0.01) {
    const int value = *gamma0(ThinningFamily::power_law(a));
    CHECK(value <= previous);
    previous = value;
  }
}

TEST_CASE("regularity_sup examples") {
  const auto flat = regularity_sup(ThinningFamily::constant(0.3), 1000);
  CHECK(flat.max_ratio == 1.0);
  CHECK(flat.bounded);

  const auto power = regularity_sup(ThinningFamily::power_law(1.5), 10'000);
  CHECK(power.max_ratio > 1.0);
  CHECK(power.max_ratio <= 3.0);
  CHECK(power.argmax == 2);
  CHECK(power.bounded);
  const auto family = ThinningFamily::power_law(1.5);
  double previous = eval_c(family, 1) / eval_c(family, 2);
  for (std::int64_t k = 3; k <= 10'000; ++k) {
    const double ratio = eval_c(family, k - 1) / eval_c(family, k);
    CHECK(ratio <= previous);
    CHECK(ratio > 1.0);
    previous = ratio;
  }

  const auto jump = regularity_sup(ThinningFamily::tabulated({0.5, 0.01}), 10);
  CHECK(jump.max_ratio == doctest::Approx(50.0).epsilon(1e-14));
  CHECK(jump.argmax == 2);

  CHECK_THROWS_AS(regularity_sup(ThinningFamily::constant(0.3), 1), std::invalid_argument);
}

TEST_CASE("classify examples") {
  const auto red = classify(ThinningFamily::power_law(0.99));
  CHECK(red.regime == Regime::positive_recurrent);
  CHECK_FALSE(red.speed.has_value());

  const auto critical_power = classify(ThinningFamily::power_law(1.0));
  CHECK(critical_power.regime == Regime::transient);
  CHECK(*critical_power.speed == 0.0);

  CHECK(classify(ThinningFamily::critical(EtaSpec::reciprocal_plus())).regime == Regime::recurrent);
  CHECK(classify(ThinningFamily::critical(EtaSpec::zero())).regime == Regime::recurrent);
  CHECK(classify(ThinningFamily::critical(EtaSpec::reciprocal_minus())).regime == Regime::transient);

  const auto blue = classify(ThinningFamily::power_law(1.01));
  CHECK(blue.regime == Regime::transient);
  CHECK(*blue.speed == 1.0);
  CHECK(*blue.gamma0 == 100);
  CHECK(*blue.gamma_threshold == doctest::Approx(99.0).epsilon(1e-9));

  const auto rescaled = classify(ThinningFamily::rescaled(0.5));
  CHECK(rescaled.regime == Regime::transient);
  CHECK(*rescaled.speed == 0.5);

  CHECK(classify(ThinningFamily::constant(0.2)).regime == Regime::positive_recurrent);

  const auto unknown = classify(ThinningFamily::tabulated({0.2, 0.3}));
  CHECK(unknown.regime == Regime::unclassified);
  CHECK_FALSE(unknown.reason.empty());

  const auto mixed = classify(ThinningFamily::critical(EtaSpec::tabulated({0.1, -0.2}, EventualSign::unknown)));
  CHECK(mixed.regime == Regime::unclassified);
}

TEST_CASE("classify regime is consistent with declared rho") {
  oracle::Generator gen{7};
  for (int trial = 0; trial < 500; ++trial) {
    const auto family = gen.family();
    const auto report = classify(family);
    const auto rho = rho_limit(family);
    CAPTURE(family.name());
    if (report.regime == Regime::positive_recurrent) CHECK(*rho > 1.0);
    if (report.regime == Regime::transient) {
      CHECK(rho.has_value());
      CHECK((*rho < 1.0 || (*rho == 1.0 && family.eventual_sign() == EventualSign::below_minus_reciprocal)));
      if (*rho <= 1.0) CHECK(*report.speed == doctest::Approx(1.0 - *rho));
    }
  }
}

TEST_CASE("built-in families stay inside (0, 1) for k up to 1e6") {
  oracle::Generator gen{99};
  for (int trial = 0; trial < 60; ++trial) {
    auto family = gen.family();
    if (std::holds_alternative<Tabulated>(family.kind())) continue;
    if (const auto* p = std::get_if<PowerLaw>(&family.kind())) {
      // keep c(1e6) = 1/(1e6^a + 1) representable
      if (p->a > 3.0) family = ThinningFamily::power_law(3.0);
    }
    CAPTURE(family.name());
    for (std::int64_t k = 1; k <= 1'000'000; k += 1 + k / 50) {
      const double c = eval_c(family, k);
      REQUIRE(c > 0.0);
      REQUIRE(c < 1.0);
    }
  }
}

TEST_CASE("classify ignores finitely many table entries") {
  oracle::Generator gen{31};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> values(gen.integer(1, 50));
    for (auto& v : values) v = gen.uniform(0.01, 0.99);
    const std::optional<double> rhos[] = {std::nullopt, 0.3, 1.0, 2.0, kInf};
    const auto rho = rhos[gen.integer(0, 4)];
    const EventualSign signs[] = {EventualSign::nonnegative, EventualSign::below_minus_reciprocal,
                                  EventualSign::unknown};
    const auto sign = signs[gen.integer(0, 2)];

    auto changed = values;
    const auto edits = gen.integer(1, static_cast<std::int64_t>(changed.size()));
    for (std::int64_t e = 0; e < edits; ++e) changed[gen.integer(0, changed.size() - 1)] = gen.uniform(0.01, 0.99);

    const auto before = classify(ThinningFamily::tabulated(values, rho, sign));
    const auto after = classify(ThinningFamily::tabulated(changed, rho, sign));
    CHECK(before.regime == after.regime);
    CHECK(before.rule == after.rule);
    CHECK(before.speed == after.speed);
  }
}

TEST_CASE("names use shortest round-trip numbers") {
  CHECK(ThinningFamily::power_law(1.5).name() == "power_law(a=1.5)");
  CHECK(ThinningFamily::rescaled(0.5).name() == "rescaled(rho=0.5,cap=0.9)");
  CHECK(ThinningFamily::critical(EtaSpec::zero()).name() == "critical(eta=zero,cap=0.9)");
  CHECK(ThinningFamily::tabulated({0.1, 0.2}).name() == "tabulated(n=2)");
}

TEST_CASE("eventual sign text round trip") {
  for (auto sign : {EventualSign::nonnegative, EventualSign::below_minus_reciprocal, EventualSign::unknown}) {
    CHECK(*parse_eventual_sign(to_string(sign)) == sign);
  }
  CHECK_FALSE(parse_eventual_sign("sometimes").has_value());
}
