#pragma once

// Reference computations for the tests, written independently of the
// library's numerics: lgamma or exact rationals for pmfs, plain dense Eigen
// solves for chain quantities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include "migrant/families.hpp"

namespace oracle {

using CFunction = std::function<double(std::int64_t)>;

inline CFunction c_of(const migrant::ThinningFamily& family) {
  return [family](std::int64_t k) { return family.c(k); };
}

inline double binomial_pmf(std::int64_t n, std::int64_t k, double p) {
  if (k < 0 || k > n) return 0.0;
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  return std::exp(std::lgamma(nd + 1) - std::lgamma(kd + 1) - std::lgamma(nd - kd + 1) + kd * std::log(p) +
                  (nd - kd) * std::log1p(-p));
}

inline double poisson_pmf(std::int64_t k, double lambda) {
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(lambda) - lambda - std::lgamma(kd + 1));
}

/// P(x -> x - y + 1) = Bin(x, c(x)) at y.
inline double transition(const CFunction& c, std::int64_t from, std::int64_t to) {
  return binomial_pmf(from, from + 1 - to, c(from));
}

/// Stationary law on {1..L}; the +1 move out of L is folded back onto L.
/// Entry x-1 holds pi(x).
inline Eigen::VectorXd stationary(const CFunction& c, std::int64_t L) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(L, L);
  for (std::int64_t x = 1; x <= L; ++x) {
    for (std::int64_t y = 0; y <= x; ++y) {
      const std::int64_t to = std::min(x - y + 1, L);
      P(x - 1, to - 1) += binomial_pmf(x, y, c(x));
    }
  }
  // pi (P - I) = 0 with one equation replaced by sum(pi) = 1
  Eigen::MatrixXd A = (P - Eigen::MatrixXd::Identity(L, L)).transpose();
  A.row(L - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(L);
  b[L - 1] = 1.0;
  return A.fullPivLu().solve(b);
}

/// E_x[first t >= 1 with X_t = target] for x < target (paths from below must pass through target).
inline Eigen::VectorXd expected_hitting_time_from_below(const CFunction& c, std::int64_t target) {
  const std::int64_t n = target - 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
  for (std::int64_t x = 1; x <= n; ++x) {
    for (std::int64_t y = 0; y <= x; ++y) {
      const std::int64_t to = x - y + 1;
      if (to < target) A(x - 1, to - 1) -= binomial_pmf(x, y, c(x));
    }
  }
  return A.fullPivLu().solve(b);
}

/// P_x(hit 1 before M) for x = 1..M by a plain dense solve over all M states.
inline Eigen::VectorXd first_passage(const CFunction& c, std::int64_t M) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(M, M);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(M);
  b[0] = 1.0;
  for (std::int64_t x = 2; x < M; ++x) {
    for (std::int64_t y = 0; y <= x; ++y) A(x - 1, x - y) -= binomial_pmf(x, y, c(x));
  }
  return A.fullPivLu().solve(b);
}

/// P(from l, reach l+1 before a drop > k) from the absorbing chain on
/// {1..l} + success + failure.
inline double ladder_probability(const CFunction& c, std::int64_t l, std::int64_t k) {
  // slow escapes make I - Q ill-conditioned, so the whole solve runs at 50 digits
  using Real = boost::multiprecision::cpp_bin_float_50;
  using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  Matrix A = Matrix::Identity(l, l);
  Vector b = Vector::Zero(l);
  for (std::int64_t m = 1; m <= l; ++m) {
    const Real p = c(m);
    Real choose = 1;
    for (std::int64_t y = 0; y <= std::min(m, k); ++y) {
      if (y > 0) choose = choose * (m - y + 1) / y;
      const Real mass = choose * pow(p, y) * pow(Real(1) - p, m - y);
      if (m - y + 1 == l + 1) {
        b[m - 1] += mass;
      } else {
        A(m - 1, m - y) -= mass;
      }
    }
  }
  return static_cast<double>(Vector(A.partialPivLu().solve(b))[l - 1]);
}

/// Pearson chi-square p-value. Adjacent outcomes are pooled until every
/// bin expects at least 5 counts.
inline double chi_square_p_value(const std::vector<std::int64_t>& observed, const std::vector<double>& probabilities,
                                 std::int64_t total) {
  std::vector<double> expected_bins;
  std::vector<double> observed_bins;
  double expected = 0.0;
  double seen = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    expected += probabilities[i] * static_cast<double>(total);
    seen += i < observed.size() ? static_cast<double>(observed[i]) : 0.0;
    if (expected >= 5.0) {
      expected_bins.push_back(expected);
      observed_bins.push_back(seen);
      expected = seen = 0.0;
    }
  }
  for (std::size_t i = probabilities.size(); i < observed.size(); ++i) seen += static_cast<double>(observed[i]);
  if (!expected_bins.empty()) {
    expected_bins.back() += expected;
    observed_bins.back() += seen;
  }
  double statistic = 0.0;
  for (std::size_t i = 0; i < expected_bins.size(); ++i) {
    const double d = observed_bins[i] - expected_bins[i];
    statistic += d * d / expected_bins[i];
  }
  const double dof = static_cast<double>(expected_bins.size()) - 1.0;
  if (dof < 1.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), statistic));
}

struct Moments {
  double mean = 0.0;
  double standard_error = 0.0;
};

inline Moments moments(const std::vector<double>& values) {
  Moments m;
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / static_cast<double>(values.size());
  double squares = 0.0;
  for (double v : values) squares += (v - m.mean) * (v - m.mean);
  m.standard_error = std::sqrt(squares / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  return m;
}

/// Hand-rolled generator for property tests.
class Generator {
 public:
  explicit Generator(std::uint64_t seed) : engine_{seed} {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>{lo, hi}(engine_); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>{lo, hi}(engine_);
  }
  std::int64_t log_integer(std::int64_t lo, std::int64_t hi) {
    return std::clamp<std::int64_t>(
        std::llround(std::exp(uniform(std::log(static_cast<double>(lo)), std::log(static_cast<double>(hi))))), lo, hi);
  }

  /// A built-in family with random parameters.
  migrant::ThinningFamily family() {
    using migrant::ThinningFamily;
    switch (integer(0, 4)) {
      case 0: return ThinningFamily::power_law(uniform(0.3, 3.0));
      case 1: return ThinningFamily::constant(uniform(0.01, 0.99));
      case 2: return ThinningFamily::rescaled(uniform(0.1, 3.0), uniform(0.5, 0.95));
      case 3: {
        const migrant::EtaSpec forms[] = {migrant::EtaSpec::reciprocal_plus(), migrant::EtaSpec::reciprocal_minus(),
                                          migrant::EtaSpec::zero()};
        return ThinningFamily::critical(forms[integer(0, 2)], uniform(0.5, 0.95));
      }
      default: {
        std::vector<double> values(integer(1, 400));
        for (auto& v : values) v = uniform(0.001, 0.999);
        return ThinningFamily::tabulated(values, uniform(0.0, 2.0), migrant::EventualSign::unknown);
      }
    }
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace oracle
