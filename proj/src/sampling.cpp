#include "migrant/sampling.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace migrant {

namespace {

constexpr std::int64_t kBernoulliLimit = 64;
constexpr double kInversionMeanLimit = 30.0;

}  // namespace

std::int64_t sample_binomial(std::int64_t n, double p, RandomStream& stream) {
  if (n < 0 || !(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_binomial: bad parameters");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;

  if (n <= kBernoulliLimit) {
    std::int64_t y = 0;
    for (std::int64_t i = 0; i < n; ++i) y += stream.uniform() < p ? 1 : 0;
    return y;
  }

  if (static_cast<double>(n) * p <= kInversionMeanLimit) {
    const double u = stream.uniform();
    const double odds = p / (1.0 - p);
    double mass = std::exp(static_cast<double>(n) * std::log1p(-p));
    double cdf = mass;
    std::int64_t y = 0;
    while (u >= cdf && y < n) {
      mass *= static_cast<double>(n - y) / static_cast<double>(y + 1) * odds;
      ++y;
      cdf += mass;
      // cdf stalls below u only through rounding in the far tail
      if (mass == 0.0) break;
    }
    return y;
  }

  std::binomial_distribution<std::int64_t> dist(n, p);
  return dist(stream.engine());
}

std::int64_t poisson_quantile(double u, double lambda) {
  double mass = std::exp(-lambda);
  double cdf = mass;
  std::int64_t k = 0;
  while (u >= cdf) {
    ++k;
    mass *= lambda / static_cast<double>(k);
    cdf += mass;
    if (mass == 0.0) break;
  }
  return k;
}

std::int64_t sample_poisson(double lambda, RandomStream& stream) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("sample_poisson: bad rate");
  if (lambda == 0.0) return 0;
  if (lambda <= kInversionMeanLimit) return poisson_quantile(stream.uniform(), lambda);
  std::poisson_distribution<std::int64_t> dist(lambda);
  return dist(stream.engine());
}

}  // namespace migrant
