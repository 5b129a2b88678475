#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "migrant/families.hpp"
#include "migrant/random.hpp"

namespace migrant {

/// Poisson(rho_bar) law inflated by (1 + epsilon) off zero, with the excess
/// taken from the mass at zero:
///
///   mu(0) = (1+eps) e^{-rho_bar} - eps,   mu(k) = (1+eps) rho_bar^k e^{-rho_bar} / k!.
///
/// Valid when (1 + eps) * rho_bar < 1, which keeps mu(0) positive.
class DominatingLaw {
 public:
  DominatingLaw(double rho_bar, double epsilon);

  double rho_bar() const { return rho_bar_; }
  double epsilon() const { return epsilon_; }

  double pmf(std::int64_t k) const;
  double log_pmf(std::int64_t k) const;
  double mean() const { return (1.0 + epsilon_) * rho_bar_; }

 private:
  double rho_bar_;
  double epsilon_;
};

struct ContextField {
  std::string name;
  std::string value;
};

/// One verified inequality lhs <= rhs.
struct BoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
  double margin = 0.0;  // rhs - lhs
  std::vector<ContextField> context;

  static BoundReport compare(double lhs, double rhs, std::vector<ContextField> context = {});
};

/// Shortest decimal form that reads back to the same double.
std::string format_number(double value);
std::string format_number(std::int64_t value);

/// RFC 4180 quoting when the value contains a comma, quote or newline.
std::string csv_field(const std::string& value);

/// Header `<context names>,lhs,rhs,margin,holds` taken from the first report.
void write_bound_csv(std::ostream& out, std::span<const BoundReport> reports);

double mu_pmf(const DominatingLaw& law, std::int64_t k);

struct DominationResult {
  std::optional<std::int64_t> threshold;  // J, if one exists below j_max
  std::int64_t last_failure = 0;          // largest j in the scan violating an inequality (0 if none)
  double min_zero_margin = 0.0;           // min over j >= J of P(Z_j = 0) - mu(0)
  double min_point_margin = 0.0;          // min over j >= J of 1 - max_k P(Z_j = k)/mu(k)
  bool tail_controlled = true;            // k > k_max covered by the Poisson-type tail bound for all j >= J
};

/// Both domination inequalities at a single level j.
struct DominationLevel {
  std::int64_t j = 1;
  double p_zero = 0.0;       // P(Z_j = 0)
  double mu_zero = 0.0;      // mu(0)
  double worst_ratio = 0.0;  // max over 1 <= k <= min(j, k_max) of P(Z_j = k)/mu(k)
  std::int64_t worst_k = 0;
  bool tail_ok = true;  // only evaluated for j > k_max
  double log_tail_bound = 0.0;
  double log_mu_beyond = 0.0;

  bool holds() const { return p_zero >= mu_zero && worst_ratio <= 1.0 && tail_ok; }
};

DominationLevel domination_level(const ThinningFamily& family, const DominatingLaw& law, std::int64_t k_max,
                                 std::int64_t j);

/// The level's inequalities as reports with context check,family,j,k.
std::vector<BoundReport> domination_reports(const ThinningFamily& family, const DominationLevel& level,
                                            std::int64_t k_max);

/// Smallest J <= j_max such that for all j in [J, j_max]
///   P(Z_j = 0) >= mu(0)   and   P(Z_j = k) <= mu(k) for 1 <= k <= j,
/// with Z_j ~ Bin(j, c(j)). Point masses with k <= k_max are checked exactly;
/// larger k are covered by P(Z_j = k) <= P(Z_j >= k) <= (jc)^k/k! (1 + jc f(j)),
/// which is below mu(k) for every k > k_max once it is at k_max + 1 and jc < rho_bar.
///
/// Requires rho_limit(family) < rho_bar < 1 and (1 + epsilon) rho_bar < 1;
/// throws std::invalid_argument otherwise.
DominationResult domination_threshold(const ThinningFamily& family, double rho_bar, double epsilon,
                                      std::int64_t k_max, std::int64_t j_max);

struct CoupledPair {
  std::int64_t z = 0;  // Bin(n, p)
  std::int64_t l = 0;  // Pois(n p)
};

/// Joint draw of Bin(n, p) and Pois(np): trial i uses one uniform u_i for both
/// the Bernoulli(p) quantile (1 iff u_i >= 1 - p) and the Pois(p) quantile.
/// Per trial E|bernoulli - poisson| = 2(p - 1 + e^{-p}) <= p^2, so E|z - l| <= n p^2.
CoupledPair lecam_couple(std::int64_t n, double p, RandomStream& stream);

/// The same construction from explicit uniforms (n = uniforms.size()).
CoupledPair lecam_couple_from_uniforms(double p, std::span<const double> uniforms);

struct PoissonSplit {
  std::int64_t l = 0;        // Pois(lambda)
  std::int64_t l_prime = 0;  // Pois(lambda_prime), l - l_prime ~ Pois(lambda - lambda_prime) independent
};

PoissonSplit poisson_split(double lambda, double lambda_prime, RandomStream& stream);

struct DriftGap {
  double closed_form = 0.0;   // 1 - i c(i)
  double pmf_weighted = 0.0;  // sum_y P(Y = y) (1 - y)
};

/// E_i[X_1] - i by two routes.
DriftGap drift_gap(const ThinningFamily& family, std::int64_t i);

/// E_x[1/(N + X_1)] - 1/(N + x) by exact summation over the increment law.
double submartingale_gap(const ThinningFamily& family, std::int64_t x, std::int64_t N);

struct SupermartingaleExpectation {
  double closed_form = 0.0;  // (1 - c^{x+1}) / ((x+1)(1-c))
  double direct_sum = 0.0;   // E[1/(1 + Bin(x, 1-c))]
  bool condition_holds = false;
  double condition_margin = 0.0;  // 1 + c^{x+1} - (x+1) c
};

SupermartingaleExpectation supermartingale_expectation(std::int64_t x, double c);

/// log f(l), f(l) = e^{l c(l)} (1 - c(l))^{-l}.
double log_tail_factor(const ThinningFamily& family, std::int64_t l);
double tail_factor(const ThinningFamily& family, std::int64_t l);

/// P(Z_l >= k) - P(Z_l = k) <= l c(l) f(l) P(Z_l = k).
BoundReport lemma_tail_check(const ThinningFamily& family, std::int64_t l, std::int64_t k);

/// P(Z_l >= k) <= (l c(l))^k / k! (1 + l c(l) f(l)).
BoundReport corollary_tail_check(const ThinningFamily& family, std::int64_t l, std::int64_t k);

/// Lemma and corollary reports for every 1 <= l <= l_max, 0 <= k <= min(l, k_max),
/// sharing one increment law per l.
std::vector<BoundReport> tail_battery(const ThinningFamily& family, std::int64_t l_max, std::int64_t k_max);

}  // namespace migrant
