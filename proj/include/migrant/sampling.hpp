#pragma once

#include <cstdint>

#include "migrant/random.hpp"

namespace migrant {

/// Bin(n, p) deviate.
///
///  - n <= 64: sum of n Bernoulli trials;
///  - n*p <= 30: inversion by a sequential CDF walk from 0;
///  - otherwise: std::binomial_distribution on the stream's engine.
std::int64_t sample_binomial(std::int64_t n, double p, RandomStream& stream);

/// Pois(lambda) deviate: inversion for lambda <= 30, std::poisson_distribution above.
std::int64_t sample_poisson(double lambda, RandomStream& stream);

/// Smallest k with u < P(Pois(lambda) <= k).
std::int64_t poisson_quantile(double u, double lambda);

}  // namespace migrant
