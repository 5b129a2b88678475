#include "migrant/families.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace migrant {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool open_unit(double x) { return x > 0.0 && x < 1.0; }

void require(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(message);
}

double critical_c(const Critical& family, std::int64_t k) {
  const double kd = static_cast<double>(k);
  double value = 0.0;
  switch (family.eta.form) {
    case EtaForm::reciprocal_plus:
      value = (1.0 + 1.0 / (1.0 + kd)) / kd;
      break;
    case EtaForm::reciprocal_minus:
      // (1 - 1/(1+k))/k, written so that it is bitwise equal to power_law(1)
      value = 1.0 / (kd + 1.0);
      break;
    case EtaForm::zero:
      value = 1.0 / kd;
      break;
    case EtaForm::tabulated:
      if (k > static_cast<std::int64_t>(family.eta.table.size())) {
        throw std::out_of_range("critical family: k beyond the eta table");
      }
      value = (1.0 + family.eta.table[k - 1]) / kd;
      break;
  }
  return std::min(family.cap, value);
}

}  // namespace

ThinningFamily ThinningFamily::power_law(double a) {
  require(a > 0.0 && std::isfinite(a), "power_law: a must be a positive real");
  return ThinningFamily{PowerLaw{a}};
}

ThinningFamily ThinningFamily::constant(double c) {
  require(open_unit(c), "constant: c must lie in (0, 1)");
  return ThinningFamily{Constant{c}};
}

ThinningFamily ThinningFamily::rescaled(double rho, double cap) {
  require(rho > 0.0 && std::isfinite(rho), "rescaled: rho must be a positive real");
  require(open_unit(cap), "rescaled: cap must lie in (0, 1)");
  return ThinningFamily{Rescaled{rho, cap}};
}

ThinningFamily ThinningFamily::critical(EtaSpec eta, double cap) {
  require(open_unit(cap), "critical: cap must lie in (0, 1)");
  if (eta.form == EtaForm::tabulated) {
    require(!eta.table.empty(), "critical: tabulated eta needs at least one value");
    for (std::size_t i = 0; i < eta.table.size(); ++i) {
      const double value = std::min(cap, (1.0 + eta.table[i]) / static_cast<double>(i + 1));
      require(open_unit(value), "critical: tabulated eta gives c(k) outside (0, 1)");
    }
  }
  return ThinningFamily{Critical{std::move(eta), cap}};
}

ThinningFamily ThinningFamily::tabulated(std::vector<double> values, std::optional<double> declared_rho,
                                         EventualSign eventual_sign) {
  require(!values.empty(), "tabulated: at least one value is required");
  require(std::all_of(values.begin(), values.end(), open_unit), "tabulated: every value must lie in (0, 1)");
  if (declared_rho) require(*declared_rho >= 0.0, "tabulated: declared rho must be nonnegative");
  return ThinningFamily{Tabulated{std::move(values), declared_rho, eventual_sign}};
}

double ThinningFamily::c(std::int64_t k) const {
  if (k < 1) throw std::out_of_range("c(k) is defined for k >= 1");
  const double kd = static_cast<double>(k);
  const double value = std::visit(
      Overloaded{
          [&](const PowerLaw& f) { return 1.0 / (std::pow(kd, f.a) + 1.0); },
          [&](const Constant& f) { return f.c; },
          [&](const Rescaled& f) { return std::min(f.cap, f.rho / kd); },
          [&](const Critical& f) { return critical_c(f, k); },
          [&](const Tabulated& f) {
            if (k > static_cast<std::int64_t>(f.values.size())) {
              throw std::out_of_range("tabulated family: k beyond the table");
            }
            return f.values[k - 1];
          },
      },
      kind_);
  if (!open_unit(value)) {
    std::ostringstream msg;
    msg << name() << ": c(" << k << ") = " << value << " is outside (0, 1)";
    throw std::domain_error(msg.str());
  }
  return value;
}

std::optional<double> ThinningFamily::declared_rho() const {
  return std::visit(Overloaded{
                        [](const PowerLaw& f) -> std::optional<double> {
                          if (f.a < 1.0) return kInfinity;
                          if (f.a == 1.0) return 1.0;
                          return 0.0;
                        },
                        [](const Constant&) -> std::optional<double> { return kInfinity; },
                        [](const Rescaled& f) -> std::optional<double> { return f.rho; },
                        [](const Critical&) -> std::optional<double> { return 1.0; },
                        [](const Tabulated& f) { return f.declared_rho; },
                    },
                    kind_);
}

std::optional<double> ThinningFamily::tail_exponent() const {
  if (const auto* f = std::get_if<PowerLaw>(&kind_)) return f->a - 1.0;
  if (std::holds_alternative<Rescaled>(kind_)) return 0.0;
  return std::nullopt;
}

EventualSign ThinningFamily::eventual_sign() const {
  return std::visit(Overloaded{
                        [](const PowerLaw& f) {
                          // eta(k) = k/(k^a+1) - 1: +inf for a < 1, exactly -1/(1+k) at a = 1, -> -1 for a > 1
                          return f.a < 1.0 ? EventualSign::nonnegative : EventualSign::below_minus_reciprocal;
                        },
                        [](const Constant&) { return EventualSign::nonnegative; },
                        [](const Rescaled& f) {
                          return f.rho >= 1.0 ? EventualSign::nonnegative : EventualSign::below_minus_reciprocal;
                        },
                        [](const Critical& f) { return f.eta.eventual_sign; },
                        [](const Tabulated& f) { return f.eventual_sign; },
                    },
                    kind_);
}

std::string ThinningFamily::name() const {
  std::ostringstream out;
  const auto num = [](double x) {
    char buffer[32];
    const auto end = std::to_chars(buffer, buffer + sizeof buffer, x).ptr;
    return std::string(buffer, end);
  };
  std::visit(Overloaded{
                 [&](const PowerLaw& f) { out << "power_law(a=" << num(f.a) << ")"; },
                 [&](const Constant& f) { out << "constant(c=" << num(f.c) << ")"; },
                 [&](const Rescaled& f) { out << "rescaled(rho=" << num(f.rho) << ",cap=" << num(f.cap) << ")"; },
                 [&](const Critical& f) {
                   const char* form = "";
                   switch (f.eta.form) {
                     case EtaForm::reciprocal_plus: form = "reciprocal_plus"; break;
                     case EtaForm::reciprocal_minus: form = "reciprocal_minus"; break;
                     case EtaForm::zero: form = "zero"; break;
                     case EtaForm::tabulated: form = "tabulated"; break;
                   }
                   out << "critical(eta=" << form << ",cap=" << num(f.cap) << ")";
                 },
                 [&](const Tabulated& f) { out << "tabulated(n=" << f.values.size() << ")"; },
             },
             kind_);
  return out.str();
}

double eval_c(const ThinningFamily& family, std::int64_t k) { return family.c(k); }

std::optional<double> rho_limit(const ThinningFamily& family) { return family.declared_rho(); }

double eta(const ThinningFamily& family, std::int64_t k) { return static_cast<double>(k) * family.c(k) - 1.0; }

std::optional<int> power_law_ka(double a) {
  if (!(a > 1.0 && a <= 2.0)) return std::nullopt;
  const double estimate = 1.0 / (a - 1.0);
  if (estimate > 1e9) throw std::overflow_error("power_law_ka: a too close to 1");
  // (k+2)/(k+1) and (k+1)/k are correctly rounded, so boundary values such as
  // a = 1.2 = 6/5 compare exactly.
  const auto is_ka = [a](std::int64_t k) {
    const double kd = static_cast<double>(k);
    return (kd + 2.0) / (kd + 1.0) < a && a <= (kd + 1.0) / kd;
  };
  const auto guess = static_cast<std::int64_t>(estimate);
  for (std::int64_t k = std::max<std::int64_t>(1, guess - 2); k <= guess + 2; ++k) {
    if (is_ka(k)) return static_cast<int>(k);
  }
  throw std::logic_error("power_law_ka: no k_a near 1/(a-1)");
}

std::optional<int> gamma0(const ThinningFamily& family) {
  const auto* f = std::get_if<PowerLaw>(&family.kind());
  if (f == nullptr || f->a <= 1.0) return std::nullopt;
  if (f->a > 2.0) return 0;
  return power_law_ka(f->a);
}

RegularityScan regularity_sup(const ThinningFamily& family, std::int64_t k_max) {
  if (k_max < 2) throw std::invalid_argument("regularity_sup: k_max must be at least 2");
  if (const auto* f = std::get_if<Tabulated>(&family.kind())) {
    k_max = std::min<std::int64_t>(k_max, static_cast<std::int64_t>(f->values.size()));
  }
  RegularityScan scan;
  if (k_max < 2) return scan;
  scan.max_ratio = -kInfinity;
  const std::int64_t mid = k_max / 2 + 1;
  double lower_max = -kInfinity;
  double upper_max = -kInfinity;
  double previous = family.c(1);
  for (std::int64_t k = 2; k <= k_max; ++k) {
    const double current = family.c(k);
    const double ratio = previous / current;
    if (ratio > scan.max_ratio) {
      scan.max_ratio = ratio;
      scan.argmax = k;
    }
    double& half_max = k <= mid ? lower_max : upper_max;
    half_max = std::max(half_max, ratio);
    previous = current;
  }
  scan.bounded = std::isfinite(scan.max_ratio) && (upper_max == -kInfinity || upper_max <= lower_max);
  return scan;
}

RegimeReport classify(const ThinningFamily& family) {
  RegimeReport report;
  report.gamma0 = gamma0(family);
  if (const auto* f = std::get_if<PowerLaw>(&family.kind()); f != nullptr && f->a > 1.0) {
    report.gamma_threshold = -1.0 + 1.0 / (f->a - 1.0);
  }

  const auto rho = rho_limit(family);
  if (!rho) {
    report.regime = Regime::unclassified;
    report.rule = "undeclared_rho";
    report.reason = "the limit of k*c(k) is not declared for this family";
    return report;
  }
  if (*rho > 1.0) {
    report.regime = Regime::positive_recurrent;
    report.rule = "drift_rho_above_one";
    report.reason = "k*c(k) -> rho > 1: the drift 1 - k*c(k) of h(x) = x is eventually below -(rho-1)/2";
    return report;
  }
  if (*rho < 1.0) {
    report.regime = Regime::transient;
    report.rule = "domination_rho_below_one";
    report.reason = "k*c(k) -> rho < 1: increments dominate a walk with positive mean, speed 1 - rho";
    report.speed = 1.0 - *rho;
    return report;
  }
  switch (family.eventual_sign()) {
    case EventualSign::nonnegative:
      report.regime = Regime::recurrent;
      report.rule = "critical_eta_nonnegative";
      report.reason = "rho = 1 with eta eventually >= 0: 1/(N+X) is a sub-martingale";
      break;
    case EventualSign::below_minus_reciprocal:
      report.regime = Regime::transient;
      report.rule = "critical_eta_below_minus_reciprocal";
      report.reason = "rho = 1 with eta(x) <= -1/(1+x) eventually: 1/X is a supermartingale";
      report.speed = 0.0;
      break;
    case EventualSign::unknown:
      report.regime = Regime::unclassified;
      report.rule = "critical_sign_unknown";
      report.reason = "rho = 1 but the eventual sign of eta is not declared";
      break;
  }
  return report;
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::positive_recurrent: return "positive_recurrent";
    case Regime::transient: return "transient";
    case Regime::recurrent: return "recurrent";
    case Regime::unclassified: return "unclassified";
  }
  return "unclassified";
}

std::string to_string(EventualSign sign) {
  switch (sign) {
    case EventualSign::nonnegative: return "nonnegative";
    case EventualSign::below_minus_reciprocal: return "below_minus_reciprocal";
    case EventualSign::unknown: return "unknown";
  }
  return "unknown";
}

std::optional<EventualSign> parse_eventual_sign(const std::string& text) {
  if (text == "nonnegative") return EventualSign::nonnegative;
  if (text == "below_minus_reciprocal") return EventualSign::below_minus_reciprocal;
  if (text == "unknown" || text == "mixed") return EventualSign::unknown;
  return std::nullopt;
}

}  // namespace migrant
