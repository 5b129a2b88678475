#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "migrant/cli.hpp"
#include "migrant/exact.hpp"
#include "migrant/families.hpp"

namespace migrant::cli {

using nlohmann::json;

// Defaults table. Every entry can be overridden by the config key of the same
// name (seed, out and threads also by flags).
namespace defaults {
inline constexpr std::uint64_t seed = 1;
inline constexpr const char* out = "migrant-out";
inline constexpr unsigned threads = 1;

inline constexpr std::int64_t simulate_x0 = 100;
inline constexpr std::int64_t simulate_steps = 1000;

inline constexpr std::int64_t figure_x0 = 100;
inline constexpr std::int64_t figure_steps = 10'000;
inline constexpr std::int64_t figure_batch = 0;
inline constexpr std::int64_t figure_batch_steps = 100'000;
inline constexpr double figure_red_level = 60.0;
inline constexpr std::int64_t figure_svg_points = 2000;

inline constexpr std::int64_t sweep_x0 = 1;
inline constexpr std::int64_t sweep_steps = 10'000;
inline constexpr std::int64_t sweep_replications = 20;
inline const std::vector<double> sweep_grid{0.5, 0.9, 0.99, 1.0, 1.01, 1.5, 2.0, 2.5};

inline constexpr std::int64_t hitting_x0 = 10;
inline constexpr std::int64_t hitting_target = 1;
inline constexpr std::int64_t hitting_cap = 2000;
inline constexpr std::int64_t hitting_replications = 1000;
inline constexpr double agreement_sigmas = 4.0;

inline constexpr std::int64_t drops_x0 = 10;
inline constexpr std::int64_t drops_window_begin = 5000;
inline constexpr std::int64_t drops_window_end = 10'000;
inline constexpr std::int64_t drops_replications = 200;

inline constexpr double domination_rho_bar = 0.75;
inline constexpr double domination_epsilon = 0.05;
inline constexpr std::int64_t domination_k_max = 50;
inline constexpr std::int64_t domination_j_max = 100'000;

inline constexpr std::int64_t martingale_x_max = 300;
inline constexpr std::int64_t martingale_condition_x_max = 12;
inline constexpr std::int64_t martingale_i_max = 2000;
inline const std::vector<double> martingale_c_grid{0.01, 0.1, 0.5, 0.9, 0.99};
inline const std::vector<std::int64_t> bound_offsets{0, 10, 100};

inline const std::vector<double> tails_exponents{1.2, 1.5, 2.0, 3.0};
inline constexpr std::int64_t tails_l_max = 2000;
inline constexpr std::int64_t tails_k_max = 10;

inline const std::vector<double> ladder_exponents{1.5, 2.5};
inline constexpr std::int64_t ladder_l_max = 30;
inline constexpr std::int64_t ladder_k_max = 3;
inline constexpr double ladder_tolerance = 1e-10;

inline constexpr std::int64_t passage_M = 2000;
inline constexpr std::int64_t passage_x_max = 100;
inline constexpr double residual_tolerance = 1e-10;
}  // namespace defaults

/// Reads a JSON object key by key. Every key read is recorded in resolved()
/// (with its default if absent); finish() rejects keys nobody asked for.
class ConfigReader {
 public:
  explicit ConfigReader(json root, std::string scope = "config");

  template <class T>
  T take(const std::string& key, const T& fallback) {
    consumed_.insert(key);
    T value = root_.contains(key) ? convert<T>(root_.at(key), key) : fallback;
    resolved_[key] = value;
    return value;
  }

  template <class T>
  std::optional<T> take_optional(const std::string& key) {
    consumed_.insert(key);
    if (!root_.contains(key) || root_.at(key).is_null()) return std::nullopt;
    T value = convert<T>(root_.at(key), key);
    resolved_[key] = value;
    return value;
  }

  ThinningFamily take_family(const std::string& key, const std::optional<ThinningFamily>& fallback);
  std::vector<ThinningFamily> take_families(const std::string& key, const std::vector<ThinningFamily>& fallback);

  /// Throws ConfigError naming every key that was never taken.
  void finish() const;

  const json& resolved() const { return resolved_; }
  void record(const std::string& key, json value) { resolved_[key] = std::move(value); }
  void forget(const std::string& key) { resolved_.erase(key); }

 private:
  template <class T>
  T convert(const json& value, const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& expected) const;

  json root_;
  std::string scope_;
  std::set<std::string> consumed_;
  json resolved_ = json::object();
};

template <class T>
T ConfigReader::convert(const json& value, const std::string& key) const {
  if constexpr (std::is_same_v<T, bool>) {
    if (!value.is_boolean()) fail(key, "a boolean");
    return value.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!value.is_number_integer()) fail(key, "an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (value.is_number_unsigned()) return value.get<T>();
      if (value.get<std::int64_t>() < 0) fail(key, "a nonnegative integer");
    }
    return value.get<T>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!value.is_number()) fail(key, "a number");
    return value.get<T>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!value.is_string()) fail(key, "a string");
    return value.get<std::string>();
  } else {
    if (!value.is_array()) fail(key, "an array");
    T out;
    for (const auto& item : value) out.push_back(convert<typename T::value_type>(item, key + "[]"));
    return out;
  }
}

/// Everything a command needs besides its own config keys.
struct RunContext {
  std::string command;
  ConfigReader& config;
  std::uint64_t seed = defaults::seed;
  unsigned threads = defaults::threads;
  std::filesystem::path out_dir;
  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> outputs;
  std::string started_at;

  /// Validates the config, creates the output directory and writes the
  /// manifest. Call after all keys are taken and before any heavy work.
  void begin(std::vector<std::string> planned_outputs);
  /// Rewrites the manifest with the finishing timestamp.
  void finish();
  std::filesystem::path path(const std::string& name) const { return out_dir / name; }
};

json manifest_json(const RunContext& context, const std::optional<std::string>& finished_at);
std::string utc_timestamp();

json regime_json(const ThinningFamily& family, const RegimeReport& report);
json number_or_string(double value);

/// Writes `reports` to `<battery>.csv` and a one-line summary; returns the exit code.
int emit_battery(RunContext& context, const std::string& battery, const std::vector<BoundReport>& reports);

int cmd_simulate(RunContext& context);
int cmd_classify(RunContext& context);
int cmd_verify(RunContext& context, const std::string& battery);
int cmd_figure1(RunContext& context);
int cmd_sweep(RunContext& context);
int cmd_hitting(RunContext& context);
int cmd_drops(RunContext& context);

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained SVG line chart with axes, tick labels and a legend.
void write_line_chart_svg(std::ostream& out, const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<Series>& series);

}  // namespace migrant::cli
