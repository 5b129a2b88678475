#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace migrant {

/// Absolute tolerance used for normalization and two-route agreement checks.
inline constexpr double kIdentityTolerance = 1e-12;

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> xs);

/// log(sum(exp(log_values))), stable for arbitrarily negative entries.
double log_sum_exp(const Eigen::ArrayXd& log_values);

/// Log pmf of Bin(n, p) on its full support {0..n}.
///
/// Built from the ratio pmf(i+1)/pmf(i) = (n-i)/(i+1) * p/(1-p), accumulated
/// in log space outward from the mode and normalized, so the entries near the
/// bulk are accurate to a few ulps even for large n.
Eigen::ArrayXd binomial_log_pmf(std::int64_t n, double p);

/// Log pmf of Bin(n, p) at 0..min(count-1, n), seeded at log pmf(0) = n*log(1-p).
/// Accurate when n*p is moderate; costs O(count) instead of O(n).
Eigen::ArrayXd binomial_log_pmf_head(std::int64_t n, double p, std::int64_t count);

/// sum_{j >= from} exp(log_pmf[j]) with compensated summation.
double upper_tail(const Eigen::ArrayXd& log_pmf, std::int64_t from);

/// P(Bin(n, p) >= from), summing upward from `from` and stopping once past
/// the mode with terms below 1e-20 of the running total.
double binomial_upper_tail(std::int64_t n, double p, std::int64_t from);

double poisson_log_pmf(std::int64_t k, double lambda);

}  // namespace migrant
