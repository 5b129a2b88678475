#include "migrant/numerics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace migrant {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

double log_sum_exp(const Eigen::ArrayXd& log_values) {
  if (log_values.size() == 0) return -std::numeric_limits<double>::infinity();
  const double peak = log_values.maxCoeff();
  if (!std::isfinite(peak)) return peak;
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < log_values.size(); ++i) acc.add(std::exp(log_values[i] - peak));
  return peak + std::log(acc.value());
}

namespace {

void check_binomial_args(std::int64_t n, double p) {
  if (n < 0) throw std::invalid_argument("binomial: n must be nonnegative");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial: p must lie in [0, 1]");
}

Eigen::ArrayXd point_mass(std::int64_t support_size, std::int64_t atom) {
  Eigen::ArrayXd out = Eigen::ArrayXd::Constant(support_size, -std::numeric_limits<double>::infinity());
  if (atom < support_size) out[atom] = 0.0;
  return out;
}

}  // namespace

Eigen::ArrayXd binomial_log_pmf(std::int64_t n, double p) {
  check_binomial_args(n, p);
  if (p == 0.0) return point_mass(n + 1, 0);
  if (p == 1.0) return point_mass(n + 1, n);

  const double log_odds = std::log(p) - std::log1p(-p);
  const auto mode = std::min<std::int64_t>(n, static_cast<std::int64_t>(std::floor((n + 1) * p)));

  Eigen::ArrayXd w(n + 1);
  w[mode] = 0.0;
  for (std::int64_t i = mode; i < n; ++i) {
    w[i + 1] = w[i] + std::log(static_cast<double>(n - i) / static_cast<double>(i + 1)) + log_odds;
  }
  for (std::int64_t i = mode; i > 0; --i) {
    w[i - 1] = w[i] - std::log(static_cast<double>(n - i + 1) / static_cast<double>(i)) - log_odds;
  }
  return w - log_sum_exp(w);
}

Eigen::ArrayXd binomial_log_pmf_head(std::int64_t n, double p, std::int64_t count) {
  check_binomial_args(n, p);
  const std::int64_t size = std::max<std::int64_t>(0, std::min(count, n + 1));
  if (p == 0.0) return point_mass(size, 0);
  if (p == 1.0) return point_mass(size, n);

  const double log_odds = std::log(p) - std::log1p(-p);
  Eigen::ArrayXd out(size);
  if (size == 0) return out;
  out[0] = static_cast<double>(n) * std::log1p(-p);
  for (std::int64_t i = 0; i + 1 < size; ++i) {
    out[i + 1] = out[i] + std::log(static_cast<double>(n - i) / static_cast<double>(i + 1)) + log_odds;
  }
  return out;
}

double upper_tail(const Eigen::ArrayXd& log_pmf, std::int64_t from) {
  CompensatedSum acc;
  // smallest terms first
  for (Eigen::Index j = log_pmf.size() - 1; j >= std::max<std::int64_t>(from, 0); --j) {
    acc.add(std::exp(log_pmf[j]));
  }
  return acc.value();
}

double binomial_upper_tail(std::int64_t n, double p, std::int64_t from) {
  check_binomial_args(n, p);
  from = std::max<std::int64_t>(from, 0);
  if (from > n) return 0.0;
  if (p == 0.0) return from == 0 ? 1.0 : 0.0;
  if (p == 1.0) return 1.0;
  const double log_odds = std::log(p) - std::log1p(-p);
  const double mode = std::floor(static_cast<double>(n + 1) * p);
  double log_term = static_cast<double>(n) * std::log1p(-p);
  if (static_cast<double>(from) <= mode) {
    // the head below `from` is the short side
    CompensatedSum head;
    for (std::int64_t j = 0; j < from; ++j) {
      head.add(std::exp(log_term));
      log_term += std::log(static_cast<double>(n - j) / static_cast<double>(j + 1)) + log_odds;
    }
    return 1.0 - head.value();
  }
  for (std::int64_t j = 0; j < from; ++j) {
    log_term += std::log(static_cast<double>(n - j) / static_cast<double>(j + 1)) + log_odds;
  }
  CompensatedSum acc;
  for (std::int64_t j = from; j <= n; ++j) {
    const double term = std::exp(log_term);
    acc.add(term);
    if (static_cast<double>(j) > mode && term <= 1e-20 * acc.value()) break;
    if (j < n) log_term += std::log(static_cast<double>(n - j) / static_cast<double>(j + 1)) + log_odds;
  }
  return acc.value();
}

double poisson_log_pmf(std::int64_t k, double lambda) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  if (lambda == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return static_cast<double>(k) * std::log(lambda) - lambda - std::lgamma(static_cast<double>(k) + 1.0);
}

}  // namespace migrant
