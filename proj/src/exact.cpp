#include "migrant/exact.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "migrant/chain.hpp"
#include "migrant/numerics.hpp"
#include "migrant/sampling.hpp"

namespace migrant {

DominatingLaw::DominatingLaw(double rho_bar, double epsilon) : rho_bar_{rho_bar}, epsilon_{epsilon} {
  if (!(rho_bar > 0.0 && rho_bar < 1.0)) throw std::invalid_argument("DominatingLaw: rho_bar must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("DominatingLaw: epsilon must be positive");
  if (!((1.0 + epsilon) * rho_bar < 1.0)) {
    throw std::invalid_argument("DominatingLaw: requires (1 + epsilon) * rho_bar < 1");
  }
}

double DominatingLaw::pmf(std::int64_t k) const {
  if (k < 0) return 0.0;
  if (k == 0) return (1.0 + epsilon_) * std::exp(-rho_bar_) - epsilon_;
  return std::exp(log_pmf(k));
}

double DominatingLaw::log_pmf(std::int64_t k) const {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  if (k == 0) return std::log(pmf(0));
  return std::log1p(epsilon_) + poisson_log_pmf(k, rho_bar_);
}

BoundReport BoundReport::compare(double lhs, double rhs, std::vector<ContextField> context) {
  return BoundReport{lhs, rhs, lhs <= rhs, rhs - lhs, std::move(context)};
}

std::string format_number(double value) {
  char buffer[40];
  const auto end = std::to_chars(buffer, buffer + sizeof buffer, value).ptr;
  return std::string(buffer, end);
}

std::string format_number(std::int64_t value) { return std::to_string(value); }

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char ch : value) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

void write_bound_csv(std::ostream& out, std::span<const BoundReport> reports) {
  if (!reports.empty()) {
    for (const auto& field : reports.front().context) out << csv_field(field.name) << ',';
  }
  out << "lhs,rhs,margin,holds\n";
  for (const auto& report : reports) {
    for (const auto& field : report.context) out << csv_field(field.value) << ',';
    out << format_number(report.lhs) << ',' << format_number(report.rhs) << ',' << format_number(report.margin)
        << ',' << (report.holds ? "true" : "false") << '\n';
  }
}

double mu_pmf(const DominatingLaw& law, std::int64_t k) { return law.pmf(k); }

namespace {

void check_domination_args(const ThinningFamily& family, double rho_bar, std::int64_t k_max) {
  const auto rho = rho_limit(family);
  if (!rho || !(*rho < rho_bar) || !(rho_bar < 1.0)) {
    throw std::invalid_argument("domination: requires rho_limit(family) < rho_bar < 1");
  }
  if (k_max < 1) throw std::invalid_argument("domination: k_max must be at least 1");
}

}  // namespace

DominationLevel domination_level(const ThinningFamily& family, const DominatingLaw& law, std::int64_t k_max,
                                 std::int64_t j) {
  if (j < 1) throw std::invalid_argument("domination_level: j must be at least 1");
  const double c = family.c(j);
  const std::int64_t top = std::min(j, k_max);
  const Eigen::ArrayXd head = binomial_log_pmf_head(j, c, top + 1);

  DominationLevel level;
  level.j = j;
  level.p_zero = std::exp(head[0]);
  level.mu_zero = law.pmf(0);
  level.worst_ratio = 0.0;
  for (std::int64_t k = 1; k <= top; ++k) {
    const double ratio = std::exp(head[k] - law.log_pmf(k));
    if (ratio > level.worst_ratio) {
      level.worst_ratio = ratio;
      level.worst_k = k;
    }
  }

  if (j > k_max) {
    // P(Z_j = k) <= (jc)^k/k! (1 + jc f(j)) for every k; relative to mu(k) the
    // bound shrinks like (jc/rho_bar)^k, so checking k_max + 1 covers all larger k.
    const double jc = static_cast<double>(j) * c;
    const double kk = static_cast<double>(k_max + 1);
    level.log_tail_bound = kk * std::log(jc) - std::lgamma(kk + 1.0) + std::log1p(jc * tail_factor(family, j));
    level.log_mu_beyond = law.log_pmf(k_max + 1);
    level.tail_ok = jc < law.rho_bar() && level.log_tail_bound <= level.log_mu_beyond;
  }
  return level;
}

std::vector<BoundReport> domination_reports(const ThinningFamily& family, const DominationLevel& level,
                                            std::int64_t k_max) {
  const auto context = [&](const char* check, std::int64_t k) {
    return std::vector<ContextField>{
        {"check", check}, {"family", family.name()}, {"j", format_number(level.j)}, {"k", format_number(k)}};
  };
  std::vector<BoundReport> reports;
  reports.push_back(BoundReport::compare(level.mu_zero, level.p_zero, context("zero_mass", 0)));
  reports.push_back(BoundReport::compare(level.worst_ratio, 1.0, context("point_mass_ratio", level.worst_k)));
  if (level.j > k_max) {
    auto tail = BoundReport::compare(level.log_tail_bound, level.log_mu_beyond, context("log_tail_beyond", k_max + 1));
    tail.holds = level.tail_ok;
    reports.push_back(std::move(tail));
  }
  return reports;
}

DominationResult domination_threshold(const ThinningFamily& family, double rho_bar, double epsilon,
                                      std::int64_t k_max, std::int64_t j_max) {
  check_domination_args(family, rho_bar, k_max);
  if (j_max < 1) throw std::invalid_argument("domination_threshold: j_max must be at least 1");
  const DominatingLaw law{rho_bar, epsilon};

  std::vector<DominationLevel> levels;
  levels.reserve(j_max);
  DominationResult result;
  for (std::int64_t j = 1; j <= j_max; ++j) {
    levels.push_back(domination_level(family, law, k_max, j));
    if (!levels.back().holds()) result.last_failure = j;
  }

  if (result.last_failure >= j_max) return result;
  const std::int64_t threshold = result.last_failure + 1;
  result.threshold = threshold;
  result.min_zero_margin = std::numeric_limits<double>::infinity();
  result.min_point_margin = std::numeric_limits<double>::infinity();
  for (auto it = levels.begin() + (threshold - 1); it != levels.end(); ++it) {
    result.min_zero_margin = std::min(result.min_zero_margin, it->p_zero - it->mu_zero);
    result.min_point_margin = std::min(result.min_point_margin, 1.0 - it->worst_ratio);
    result.tail_controlled = result.tail_controlled && it->tail_ok;
  }
  return result;
}

namespace {

struct TrialOutcome {
  std::int64_t bernoulli;
  std::int64_t poisson;
};

TrialOutcome couple_trial(double p, double u) { return {u >= 1.0 - p ? 1 : 0, poisson_quantile(u, p)}; }

void check_coupling_probability(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("lecam_couple: p must lie in [0, 1)");
}

}  // namespace

CoupledPair lecam_couple(std::int64_t n, double p, RandomStream& stream) {
  check_coupling_probability(p);
  if (n < 0) throw std::invalid_argument("lecam_couple: n must be nonnegative");
  CoupledPair pair;
  for (std::int64_t i = 0; i < n; ++i) {
    const auto trial = couple_trial(p, stream.uniform());
    pair.z += trial.bernoulli;
    pair.l += trial.poisson;
  }
  return pair;
}

CoupledPair lecam_couple_from_uniforms(double p, std::span<const double> uniforms) {
  check_coupling_probability(p);
  CoupledPair pair;
  for (double u : uniforms) {
    const auto trial = couple_trial(p, u);
    pair.z += trial.bernoulli;
    pair.l += trial.poisson;
  }
  return pair;
}

PoissonSplit poisson_split(double lambda, double lambda_prime, RandomStream& stream) {
  if (!(lambda_prime >= 0.0 && lambda_prime <= lambda)) {
    throw std::invalid_argument("poisson_split: requires 0 <= lambda_prime <= lambda");
  }
  const std::int64_t l_prime = sample_poisson(lambda_prime, stream);
  const std::int64_t remainder = sample_poisson(lambda - lambda_prime, stream);
  return {l_prime + remainder, l_prime};
}

DriftGap drift_gap(const ThinningFamily& family, std::int64_t i) {
  const IncrementLaw law = increment_law(family, i);
  CompensatedSum weighted;
  for (std::int64_t y = 0; y <= i; ++y) weighted.add(std::exp(law.log_pmf[y]) * static_cast<double>(1 - y));
  return {1.0 - static_cast<double>(i) * law.c, weighted.value()};
}

double submartingale_gap(const ThinningFamily& family, std::int64_t x, std::int64_t N) {
  if (N < 0) throw std::invalid_argument("submartingale_gap: N must be nonnegative");
  const IncrementLaw law = increment_law(family, x);
  // 1/(N+x-y+1) - 1/(N+x) = (y-1) / ((N+x-y+1)(N+x)), summed termwise to avoid cancellation
  const double base = static_cast<double>(N + x);
  CompensatedSum gap;
  for (std::int64_t y = 0; y <= x; ++y) {
    const double next = static_cast<double>(N + x - y + 1);
    gap.add(std::exp(law.log_pmf[y]) * static_cast<double>(y - 1) / (next * base));
  }
  return gap.value();
}

SupermartingaleExpectation supermartingale_expectation(std::int64_t x, double c) {
  if (x < 1) throw std::invalid_argument("supermartingale_expectation: x must be at least 1");
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("supermartingale_expectation: c must lie in (0, 1)");

  SupermartingaleExpectation out;
  const double xp1 = static_cast<double>(x + 1);
  const double c_pow = std::exp(xp1 * std::log(c));
  out.closed_form = -std::expm1(xp1 * std::log(c)) / (xp1 * (1.0 - c));

  const Eigen::ArrayXd survivors = binomial_log_pmf(x, 1.0 - c);
  CompensatedSum direct;
  for (std::int64_t z = 0; z <= x; ++z) direct.add(std::exp(survivors[z]) / static_cast<double>(1 + z));
  out.direct_sum = direct.value();

  // 1 + c^{x+1} - (x+1)c with the product residual taken exactly
  out.condition_margin = c_pow + std::fma(-xp1, c, 1.0);
  out.condition_holds = out.condition_margin >= 0.0;
  return out;
}

double log_tail_factor(const ThinningFamily& family, std::int64_t l) {
  if (l < 1) throw std::invalid_argument("tail_factor: l must be at least 1");
  const double c = family.c(l);
  const double ld = static_cast<double>(l);
  return ld * c - ld * std::log1p(-c);
}

double tail_factor(const ThinningFamily& family, std::int64_t l) { return std::exp(log_tail_factor(family, l)); }

namespace {

std::vector<ContextField> tail_context(const ThinningFamily& family, const char* check, std::int64_t l,
                                       std::int64_t k) {
  return {{"check", check}, {"family", family.name()}, {"l", format_number(l)}, {"k", format_number(k)}};
}

void check_tail_args(std::int64_t l, std::int64_t k) {
  if (l < 1) throw std::invalid_argument("tail check: l must be at least 1");
  if (k < 0 || k > l) throw std::invalid_argument("tail check: requires 0 <= k <= l");
}

BoundReport lemma_from_law(const ThinningFamily& family, const IncrementLaw& law, std::int64_t k) {
  const double lhs = upper_tail(law.log_pmf, k + 1);
  const double rhs =
      std::exp(std::log(static_cast<double>(law.k) * law.c) + log_tail_factor(family, law.k) + law.log_pmf[k]);
  return BoundReport::compare(lhs, rhs, tail_context(family, "lemma", law.k, k));
}

BoundReport corollary_from_law(const ThinningFamily& family, const IncrementLaw& law, std::int64_t k) {
  const double lc = static_cast<double>(law.k) * law.c;
  const double kd = static_cast<double>(k);
  const double lhs = upper_tail(law.log_pmf, k);
  const double rhs =
      std::exp(kd * std::log(lc) - std::lgamma(kd + 1.0) + std::log1p(lc * tail_factor(family, law.k)));
  return BoundReport::compare(lhs, rhs, tail_context(family, "corollary", law.k, k));
}

}  // namespace

BoundReport lemma_tail_check(const ThinningFamily& family, std::int64_t l, std::int64_t k) {
  check_tail_args(l, k);
  return lemma_from_law(family, increment_law(family, l), k);
}

BoundReport corollary_tail_check(const ThinningFamily& family, std::int64_t l, std::int64_t k) {
  check_tail_args(l, k);
  return corollary_from_law(family, increment_law(family, l), k);
}

std::vector<BoundReport> tail_battery(const ThinningFamily& family, std::int64_t l_max, std::int64_t k_max) {
  std::vector<BoundReport> reports;
  for (std::int64_t l = 1; l <= l_max; ++l) {
    const IncrementLaw law = increment_law(family, l);
    for (std::int64_t k = 0; k <= std::min(l, k_max); ++k) {
      reports.push_back(lemma_from_law(family, law, k));
      reports.push_back(corollary_from_law(family, law, k));
    }
  }
  return reports;
}

}  // namespace migrant
