#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace migrant {

/// Eventual behaviour of eta(k) = k*c(k) - 1 in the critical regime. Always
/// declared, never inferred from a finite table.
enum class EventualSign {
  nonnegative,             // eta(k) >= 0 eventually
  below_minus_reciprocal,  // eta(k) <= -1/(1+k) eventually
  unknown,
};

enum class EtaForm { reciprocal_plus, reciprocal_minus, zero, tabulated };

struct EtaSpec {
  EtaForm form = EtaForm::zero;
  EventualSign eventual_sign = EventualSign::nonnegative;
  std::vector<double> table;  // eta(1), eta(2), ... for EtaForm::tabulated

  static EtaSpec reciprocal_plus() { return {EtaForm::reciprocal_plus, EventualSign::nonnegative, {}}; }
  static EtaSpec reciprocal_minus() { return {EtaForm::reciprocal_minus, EventualSign::below_minus_reciprocal, {}}; }
  static EtaSpec zero() { return {EtaForm::zero, EventualSign::nonnegative, {}}; }
  static EtaSpec tabulated(std::vector<double> eta_values, EventualSign sign) {
    return {EtaForm::tabulated, sign, std::move(eta_values)};
  }

  bool operator==(const EtaSpec&) const = default;
};

inline constexpr double kDefaultCap = 0.9;

// c(k) = 1/(k^a + 1)
struct PowerLaw {
  double a;

  bool operator==(const PowerLaw&) const = default;
};

struct Constant {
  double c;

  bool operator==(const Constant&) const = default;
};

// c(k) = min(cap, rho/k)
struct Rescaled {
  double rho;
  double cap = kDefaultCap;

  bool operator==(const Rescaled&) const = default;
};

// c(k) = min(cap, (1 + eta(k))/k). The cap only binds at small k, where
// (1 + eta(k))/k can reach 1.
struct Critical {
  EtaSpec eta;
  double cap = kDefaultCap;

  bool operator==(const Critical&) const = default;
};

// c(k) = values[k-1]
struct Tabulated {
  std::vector<double> values;
  std::optional<double> declared_rho;
  EventualSign eventual_sign = EventualSign::unknown;

  bool operator==(const Tabulated&) const = default;
};

/// The death-probability sequence c(.) with its declared analytic metadata.
class ThinningFamily {
 public:
  using Kind = std::variant<PowerLaw, Constant, Rescaled, Critical, Tabulated>;

  static ThinningFamily power_law(double a);
  static ThinningFamily constant(double c);
  static ThinningFamily rescaled(double rho, double cap = kDefaultCap);
  static ThinningFamily critical(EtaSpec eta, double cap = kDefaultCap);
  static ThinningFamily tabulated(std::vector<double> values, std::optional<double> declared_rho = std::nullopt,
                                  EventualSign eventual_sign = EventualSign::unknown);

  const Kind& kind() const { return kind_; }

  /// c(k). Throws std::out_of_range for k < 1 or beyond a table, and
  /// std::domain_error if the value falls outside (0, 1).
  double c(std::int64_t k) const;

  /// lim k*c(k); +infinity when divergent, nullopt when not declared.
  std::optional<double> declared_rho() const;

  /// b such that k*c(k) ~ k^{-b}; present for power_law (a-1) and rescaled (0).
  std::optional<double> tail_exponent() const;

  EventualSign eventual_sign() const;

  std::string name() const;

  friend bool operator==(const ThinningFamily&, const ThinningFamily&) = default;

 private:
  explicit ThinningFamily(Kind kind) : kind_{std::move(kind)} {}
  Kind kind_;
};

enum class Regime { positive_recurrent, transient, recurrent, unclassified };

struct RegimeReport {
  Regime regime = Regime::unclassified;
  std::string rule;    // tag of the criterion that fired
  std::string reason;  // human-readable explanation
  std::optional<double> speed;
  std::optional<int> gamma0;
  std::optional<double> gamma_threshold;  // real-valued -1 + 1/(a-1), power_law with a > 1
};

struct RegularityScan {
  double max_ratio = 1.0;
  std::int64_t argmax = 2;  // k at which c(k-1)/c(k) is largest
  bool bounded = true;      // upper half of the scan never exceeds the lower-half maximum
};

double eval_c(const ThinningFamily& family, std::int64_t k);

std::optional<double> rho_limit(const ThinningFamily& family);

/// k*c(k) - 1
double eta(const ThinningFamily& family, std::int64_t k);

/// Smallest integer gamma >= 0 with sum_k (k c(k))^{1+gamma} < infinity.
/// Defined for power_law with a > 1 only.
std::optional<int> gamma0(const ThinningFamily& family);

/// The unique integer k_a with (k_a+2)/(k_a+1) < a <= (k_a+1)/k_a, for 1 < a <= 2.
std::optional<int> power_law_ka(double a);

RegularityScan regularity_sup(const ThinningFamily& family, std::int64_t k_max);

RegimeReport classify(const ThinningFamily& family);

std::string to_string(Regime regime);
std::string to_string(EventualSign sign);
std::optional<EventualSign> parse_eventual_sign(const std::string& text);

}  // namespace migrant
