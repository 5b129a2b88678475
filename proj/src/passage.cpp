#include "migrant/passage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "migrant/exact.hpp"
#include "migrant/numerics.hpp"

namespace migrant {

LadderProfile ladder_profile(const ThinningFamily& family, std::int64_t l_max, std::int64_t k) {
  if (l_max < 1) throw std::invalid_argument("ladder_profile: l_max must be at least 1");
  if (k < 0) throw std::invalid_argument("ladder_profile: k must be nonnegative");

  LadderProfile profile{family, k, Eigen::ArrayXd(l_max), Eigen::ArrayXd(l_max),
                        std::numeric_limits<double>::infinity()};
  Eigen::ArrayXd log_s(l_max);

  for (std::int64_t m = 1; m <= l_max; ++m) {
    const double c = family.c(m);
    const std::int64_t top = std::min(m, k);
    const Eigen::ArrayXd log_pmf = binomial_log_pmf_head(m, c, top + 1);
    const double p0 = std::exp(log_pmf[0]);

    // denominator minus P(Z_m = 0): failures by an oversized drop, plus drops
    // of size i <= k after which the climb back to m+1 fails
    CompensatedSum slack;
    slack.add(binomial_upper_tail(m, c, top + 1));
    double log_climb = 0.0;  // log prod_{h=1}^{i-1} s(m-h)
    for (std::int64_t i = 1; i <= top; ++i) {
      if (i > 1) log_climb += log_s[m - i];  // s(m-i+1), stored at index m-i
      slack.add(std::exp(log_pmf[i]) * -std::expm1(log_climb));
    }
    const double extra = slack.value();
    if (extra < 0.0) throw std::logic_error("ladder_profile: denominator fell below P(Z_m = 0)");
    const double denominator = p0 + extra;

    // log s = -log(1 + extra/P(Z_m = 0)), exactly 0 when nothing can fail
    const double log_ratio = std::log(extra) - log_pmf[0];
    log_s[m - 1] = log_ratio > 30.0 ? -(log_ratio + std::log1p(std::exp(-log_ratio))) : -std::log1p(std::exp(log_ratio));
    profile.s[m - 1] = std::exp(log_s[m - 1]);
    profile.complement[m - 1] = extra / denominator;
    profile.min_denominator_slack = std::min(profile.min_denominator_slack, extra);
  }
  return profile;
}

Eigen::VectorXd ladder_absorbing_solve(const ThinningFamily& family, std::int64_t l, std::int64_t k) {
  if (l < 1) throw std::invalid_argument("ladder_absorbing_solve: l must be at least 1");
  if (k < 0) throw std::invalid_argument("ladder_absorbing_solve: k must be nonnegative");

  // unknown m at index m-1; state l+1 is the success boundary, drops > k are absorbed as failure
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(l, l);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(l);
  for (std::int64_t m = 1; m <= l; ++m) {
    const Eigen::ArrayXd pmf = binomial_log_pmf(m, family.c(m)).exp();
    for (std::int64_t y = 0; y <= std::min(m, k); ++y) {
      const std::int64_t next = m - y + 1;
      if (next == l + 1) {
        rhs[m - 1] += pmf[y];
      } else {
        system(m - 1, next - 1) -= pmf[y];
      }
    }
  }
  return system.partialPivLu().solve(rhs);
}

HkScan hk_scan(const ThinningFamily& family, std::int64_t k, std::int64_t l_min, std::int64_t l_max) {
  const auto rho = rho_limit(family);
  if (!rho || *rho != 0.0) throw std::invalid_argument("hk_scan: requires rho_limit(family) == 0");
  if (k < 0) throw std::invalid_argument("hk_scan: k must be nonnegative");
  if (l_min < std::max<std::int64_t>(k, 1) || l_max < l_min) {
    throw std::invalid_argument("hk_scan: requires max(k, 1) <= l_min <= l_max");
  }

  const LadderProfile profile = ladder_profile(family, l_max, k);
  HkScan scan;
  scan.k = k;
  scan.regular = l_max < 2 || regularity_sup(family, l_max).bounded;
  const std::int64_t count = l_max - l_min + 1;
  scan.levels.resize(count);
  scan.ratios.resize(count);
  scan.h_hat = -std::numeric_limits<double>::infinity();
  for (std::int64_t l = l_min; l <= l_max; ++l) {
    const double lc = static_cast<double>(l) * family.c(l);
    const double ratio = profile.complement_at(l) / std::pow(lc, static_cast<double>(k + 1));
    scan.levels[l - l_min] = static_cast<double>(l);
    scan.ratios[l - l_min] = ratio;
    if (ratio > scan.h_hat) {
      scan.h_hat = ratio;
      scan.argmax = l;
    }
  }
  return scan;
}

FirstPassageSolution first_passage_down(const ThinningFamily& family, std::int64_t M, std::int64_t dense_cap) {
  if (M < 2) throw std::invalid_argument("first_passage_down: M must be at least 2");
  if (M > dense_cap) throw std::invalid_argument("first_passage_down: M exceeds the dense-solve cap");

  FirstPassageSolution solution{family, M, Eigen::VectorXd::Zero(M), 0.0};
  solution.g[0] = 1.0;
  const std::int64_t n = M - 2;  // unknowns g(2..M-1), state x at row x-2
  if (n == 0) return solution;

  using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajorMatrix A = RowMajorMatrix::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (std::int64_t x = 2; x < M; ++x) {
    const std::int64_t row = x - 2;
    const Eigen::ArrayXd pmf = binomial_log_pmf(x, family.c(x)).exp();
    A(row, row) += 1.0;
    for (std::int64_t i = 0; i <= x; ++i) {
      const std::int64_t target = x - i + 1;
      if (target == 1) {
        b[row] += pmf[i];
      } else if (target < M) {
        A(row, target - 2) -= pmf[i];
      }
    }
  }

  // Row r has entries in columns 0..r+1. Eliminating the superdiagonal from
  // the bottom up leaves a lower-triangular system.
  for (std::int64_t r = n - 1; r >= 1; --r) {
    const double factor = A(r - 1, r) / A(r, r);
    if (factor != 0.0) {
      A.row(r - 1).head(r + 1) -= factor * A.row(r).head(r + 1);
      b[r - 1] -= factor * b[r];
    }
  }
  Eigen::VectorXd unknowns(n);
  for (std::int64_t r = 0; r < n; ++r) {
    const double known = r > 0 ? A.row(r).head(r).dot(unknowns.head(r)) : 0.0;
    unknowns[r] = (b[r] - known) / A(r, r);
  }
  solution.g.segment(1, n) = unknowns.cwiseMax(0.0).cwiseMin(1.0);

  // residuals against freshly evaluated transition probabilities
  double worst = 0.0;
  for (std::int64_t x = 2; x < M; ++x) {
    const Eigen::ArrayXd pmf = binomial_log_pmf(x, family.c(x)).exp();
    CompensatedSum expected;
    for (std::int64_t i = 0; i <= x; ++i) expected.add(pmf[i] * solution.g[x - i]);  // g(x-i+1)
    worst = std::max(worst, std::abs(solution.g[x - 1] - expected.value()));
  }
  solution.max_residual = worst;
  return solution;
}

double recurrent_lower_bound(std::int64_t x, std::int64_t M, std::int64_t N) {
  if (M < 2 || x < 1 || x > M || N < 0) throw std::invalid_argument("recurrent_lower_bound: requires 1 <= x <= M, M >= 2, N >= 0");
  // (u_N(x) - u_N(M)) / (u_N(1) - u_N(M)) simplified
  return static_cast<double>(M - x) * static_cast<double>(N + 1) /
         (static_cast<double>(N + x) * static_cast<double>(M - 1));
}

double recurrent_lower_bound_limit(std::int64_t x, std::int64_t N) {
  if (x < 1 || N < 0) throw std::invalid_argument("recurrent_lower_bound_limit: requires x >= 1, N >= 0");
  return static_cast<double>(N + 1) / static_cast<double>(N + x);
}

double no_large_drop_prob(const ThinningFamily& family, std::int64_t m_start, std::int64_t l_max, std::int64_t k) {
  if (m_start < 1 || l_max < m_start) throw std::invalid_argument("no_large_drop_prob: requires 1 <= m_start <= l_max");
  const LadderProfile profile = ladder_profile(family, l_max, k);
  CompensatedSum log_product;
  for (std::int64_t l = m_start; l <= l_max; ++l) log_product.add(std::log1p(-profile.complement_at(l)));
  return std::exp(log_product.value());
}

void write_ladder_csv(std::ostream& out, const LadderProfile& profile) {
  out << "m,s_m\n";
  for (std::int64_t m = 1; m <= profile.l_max(); ++m) out << m << ',' << format_number(profile.at(m)) << '\n';
}

void write_first_passage_csv(std::ostream& out, const FirstPassageSolution& solution) {
  out << "x,g_x\n";
  for (std::int64_t x = 1; x <= solution.M; ++x) out << x << ',' << format_number(solution.at(x)) << '\n';
}

void write_hk_scan_csv(std::ostream& out, const HkScan& scan) {
  out << "l,ratio\n";
  for (Eigen::Index i = 0; i < scan.levels.size(); ++i) {
    out << static_cast<std::int64_t>(scan.levels[i]) << ',' << format_number(scan.ratios[i]) << '\n';
  }
}

}  // namespace migrant
