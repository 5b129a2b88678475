#pragma once

#include <cstdint>
#include <iosfwd>

#include <Eigen/Dense>

#include "migrant/families.hpp"

namespace migrant {

/// s(m) = P(from m, reach m+1 before any single drop exceeds k), m = 1..l_max.
struct LadderProfile {
  ThinningFamily family;
  std::int64_t k = 0;
  Eigen::ArrayXd s;           // s[m-1] = s(m)
  Eigen::ArrayXd complement;  // 1 - s(m), computed without cancellation
  double min_denominator_slack = 0.0;  // min over m of (denominator - P(Z_m = 0)), must be >= 0

  std::int64_t l_max() const { return s.size(); }
  double at(std::int64_t m) const { return s[m - 1]; }
  double complement_at(std::int64_t m) const { return complement[m - 1]; }
};

/// Forward recursion obtained by conditioning on the first step:
///
///   s(m) = P(Z_m = 0) / (1 - sum_{i=1}^{min(m,k)} P(Z_m = i) prod_{h=1}^{i-1} s(m-h))
///
/// with Z_m ~ Bin(m, c(m)). The denominator is evaluated as the sum of its
/// nonnegative parts, P(Z_m = 0) + P(Z_m > k) + sum_i P(Z_m = i)(1 - prod), so
/// 1 - s(m) keeps full relative accuracy when s(m) is close to 1.
LadderProfile ladder_profile(const ThinningFamily& family, std::int64_t l_max, std::int64_t k);

/// P(from m, hit l+1 before any drop exceeds k) for m = 1..l by a dense LU
/// solve of the absorbing chain on {1..l}. Entry m-1 at m = l equals s(l).
Eigen::VectorXd ladder_absorbing_solve(const ThinningFamily& family, std::int64_t l, std::int64_t k);

struct HkScan {
  std::int64_t k = 0;
  Eigen::ArrayXd levels;  // l
  Eigen::ArrayXd ratios;  // (1 - s(l)) / (l c(l))^{k+1}
  double h_hat = 0.0;
  std::int64_t argmax = 0;
  bool regular = true;  // regularity_sup flag over the scanned range
};

/// Requires rho_limit(family) == 0 and l_min >= max(k, 1); throws
/// std::invalid_argument otherwise.
HkScan hk_scan(const ThinningFamily& family, std::int64_t k, std::int64_t l_min, std::int64_t l_max);

inline constexpr std::int64_t kDefaultDenseCap = 4000;

/// g(x) = P_x(tau_1 < tau_M), x = 1..M.
struct FirstPassageSolution {
  ThinningFamily family;
  std::int64_t M = 2;
  Eigen::VectorXd g;  // g[x-1] = g(x)
  double max_residual = 0.0;

  double at(std::int64_t x) const { return g[x - 1]; }
};

/// Solves g(x) = sum_{i=0}^{x} P(Z_x = i) g(x - i + 1), 1 < x < M, with
/// g(1) = 1 and g(M) = 0. The system is lower Hessenberg (the only upward
/// move is +1), so bottom-up elimination of the superdiagonal costs O(M^2).
/// Throws std::invalid_argument for M < 2 or M > dense_cap.
FirstPassageSolution first_passage_down(const ThinningFamily& family, std::int64_t M,
                                        std::int64_t dense_cap = kDefaultDenseCap);

/// (u_N(x) - u_N(M)) / (u_N(1) - u_N(M)) with u_N(k) = 1/(N + k).
double recurrent_lower_bound(std::int64_t x, std::int64_t M, std::int64_t N);

/// The M -> infinity limit (N + 1)/(N + x).
double recurrent_lower_bound_limit(std::int64_t x, std::int64_t N);

/// prod_{l = m_start}^{l_max} s(l), evaluated as exp of a compensated sum of log s(l).
double no_large_drop_prob(const ThinningFamily& family, std::int64_t m_start, std::int64_t l_max,
                          std::int64_t k);

void write_ladder_csv(std::ostream& out, const LadderProfile& profile);
void write_first_passage_csv(std::ostream& out, const FirstPassageSolution& solution);
void write_hk_scan_csv(std::ostream& out, const HkScan& scan);

}  // namespace migrant
