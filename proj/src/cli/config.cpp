#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include "cli_internal.hpp"

namespace migrant {

namespace {

using nlohmann::json;

void check_keys(const json& record, const std::set<std::string>& allowed, const std::string& scope) {
  if (!record.is_object()) throw ConfigError(scope + ": expected an object");
  for (const auto& [key, value] : record.items()) {
    if (!allowed.contains(key)) throw ConfigError(scope + ": unknown key '" + key + "'");
  }
}

const json& required(const json& record, const std::string& key, const std::string& scope) {
  if (!record.contains(key)) throw ConfigError(scope + ": missing required key '" + key + "'");
  return record.at(key);
}

double number(const json& value, const std::string& what) {
  if (!value.is_number()) throw ConfigError(what + ": expected a number");
  return value.get<double>();
}

std::vector<double> numbers(const json& value, const std::string& what) {
  if (!value.is_array()) throw ConfigError(what + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& item : value) out.push_back(number(item, what));
  return out;
}

EventualSign sign_from(const json& value, const std::string& what) {
  if (!value.is_string()) throw ConfigError(what + ": expected a string");
  const auto sign = parse_eventual_sign(value.get<std::string>());
  if (!sign) throw ConfigError(what + ": unknown eventual sign '" + value.get<std::string>() + "'");
  return *sign;
}

EtaSpec eta_from(const json& value) {
  if (value.is_string()) {
    const auto form = value.get<std::string>();
    if (form == "reciprocal_plus") return EtaSpec::reciprocal_plus();
    if (form == "reciprocal_minus") return EtaSpec::reciprocal_minus();
    if (form == "zero") return EtaSpec::zero();
    throw ConfigError("family.eta: unknown form '" + form + "'");
  }
  check_keys(value, {"form", "values", "eventual_sign"}, "family.eta");
  const auto& form = required(value, "form", "family.eta");
  if (form != "tabulated") throw ConfigError("family.eta: object form must be 'tabulated'");
  return EtaSpec::tabulated(numbers(required(value, "values", "family.eta"), "family.eta.values"),
                            sign_from(required(value, "eventual_sign", "family.eta"), "family.eta.eventual_sign"));
}

std::string eta_form_name(EtaForm form) {
  switch (form) {
    case EtaForm::reciprocal_plus: return "reciprocal_plus";
    case EtaForm::reciprocal_minus: return "reciprocal_minus";
    case EtaForm::zero: return "zero";
    case EtaForm::tabulated: return "tabulated";
  }
  return "";
}

ThinningFamily build_family(const json& record) {
  if (!record.is_object()) throw ConfigError("family: expected an object");
  const auto& kind_value = required(record, "kind", "family");
  if (!kind_value.is_string()) throw ConfigError("family.kind: expected a string");
  const auto kind = kind_value.get<std::string>();

  if (kind == "power_law") {
    check_keys(record, {"kind", "a"}, "family");
    return ThinningFamily::power_law(number(required(record, "a", "family"), "family.a"));
  }
  if (kind == "constant") {
    check_keys(record, {"kind", "c"}, "family");
    return ThinningFamily::constant(number(required(record, "c", "family"), "family.c"));
  }
  if (kind == "rescaled") {
    check_keys(record, {"kind", "rho", "cap"}, "family");
    const double cap = record.contains("cap") ? number(record.at("cap"), "family.cap") : kDefaultCap;
    return ThinningFamily::rescaled(number(required(record, "rho", "family"), "family.rho"), cap);
  }
  if (kind == "critical") {
    check_keys(record, {"kind", "eta", "cap"}, "family");
    const double cap = record.contains("cap") ? number(record.at("cap"), "family.cap") : kDefaultCap;
    return ThinningFamily::critical(eta_from(required(record, "eta", "family")), cap);
  }
  if (kind == "tabulated") {
    check_keys(record, {"kind", "values", "declared_rho", "eventual_sign"}, "family");
    std::optional<double> rho;
    if (record.contains("declared_rho") && !record.at("declared_rho").is_null()) {
      const auto& value = record.at("declared_rho");
      if (value.is_string() && value.get<std::string>() == "infinity") {
        rho = std::numeric_limits<double>::infinity();
      } else {
        rho = number(value, "family.declared_rho");
      }
    }
    const auto sign = record.contains("eventual_sign") ? sign_from(record.at("eventual_sign"), "family.eventual_sign")
                                                       : EventualSign::unknown;
    return ThinningFamily::tabulated(numbers(required(record, "values", "family"), "family.values"), rho, sign);
  }
  throw ConfigError("family.kind: unknown kind '" + kind + "'");
}

}  // namespace

ThinningFamily family_from_json(const nlohmann::json& record) {
  try {
    return build_family(record);
  } catch (const std::invalid_argument& error) {
    throw ConfigError(std::string("family: ") + error.what());
  }
}

nlohmann::json family_to_json(const ThinningFamily& family) {
  return std::visit(
      [](const auto& f) -> json {
        using K = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<K, PowerLaw>) {
          return {{"kind", "power_law"}, {"a", f.a}};
        } else if constexpr (std::is_same_v<K, Constant>) {
          return {{"kind", "constant"}, {"c", f.c}};
        } else if constexpr (std::is_same_v<K, Rescaled>) {
          return {{"kind", "rescaled"}, {"rho", f.rho}, {"cap", f.cap}};
        } else if constexpr (std::is_same_v<K, Critical>) {
          json eta = eta_form_name(f.eta.form);
          if (f.eta.form == EtaForm::tabulated) {
            eta = {{"form", "tabulated"}, {"values", f.eta.table}, {"eventual_sign", to_string(f.eta.eventual_sign)}};
          }
          return {{"kind", "critical"}, {"eta", eta}, {"cap", f.cap}};
        } else {
          json record = {{"kind", "tabulated"}, {"values", f.values}, {"eventual_sign", to_string(f.eventual_sign)}};
          if (f.declared_rho) record["declared_rho"] = cli::number_or_string(*f.declared_rho);
          return record;
        }
      },
      family.kind());
}

std::uint64_t fnv1a_64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char byte : bytes) {
    hash ^= byte;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

namespace cli {

ConfigReader::ConfigReader(json root, std::string scope) : root_(std::move(root)), scope_(std::move(scope)) {
  if (!root_.is_object()) throw ConfigError(scope_ + ": top level must be a JSON object");
}

void ConfigReader::fail(const std::string& key, const std::string& expected) const {
  throw ConfigError(scope_ + "." + key + ": expected " + expected);
}

ThinningFamily ConfigReader::take_family(const std::string& key, const std::optional<ThinningFamily>& fallback) {
  consumed_.insert(key);
  if (!root_.contains(key)) {
    if (!fallback) throw ConfigError(scope_ + ": missing required key '" + key + "'");
    resolved_[key] = family_to_json(*fallback);
    return *fallback;
  }
  auto family = family_from_json(root_.at(key));
  resolved_[key] = family_to_json(family);
  return family;
}

std::vector<ThinningFamily> ConfigReader::take_families(const std::string& key,
                                                        const std::vector<ThinningFamily>& fallback) {
  consumed_.insert(key);
  std::vector<ThinningFamily> families = fallback;
  if (root_.contains(key)) {
    const auto& list = root_.at(key);
    if (!list.is_array() || list.empty()) fail(key, "a nonempty array of family records");
    families.clear();
    for (const auto& record : list) families.push_back(family_from_json(record));
  }
  json records = json::array();
  for (const auto& family : families) records.push_back(family_to_json(family));
  resolved_[key] = records;
  return families;
}

void ConfigReader::finish() const {
  std::string unknown;
  for (const auto& [key, value] : root_.items()) {
    if (consumed_.contains(key)) continue;
    unknown += (unknown.empty() ? "'" : ", '") + key + "'";
  }
  if (!unknown.empty()) throw ConfigError(scope_ + ": unknown key(s) " + unknown + " for this command");
}

json number_or_string(double value) {
  if (std::isinf(value)) return value > 0 ? "infinity" : "-infinity";
  if (std::isnan(value)) return nullptr;
  return value;
}

json regime_json(const ThinningFamily& family, const RegimeReport& report) {
  json out = {{"family", family_to_json(family)},
              {"family_name", family.name()},
              {"regime", to_string(report.regime)},
              {"rule", report.rule},
              {"reason", report.reason},
              {"speed", nullptr},
              {"gamma0", nullptr},
              {"gamma_threshold", nullptr},
              {"declared_rho", nullptr},
              {"eventual_sign", to_string(family.eventual_sign())}};
  if (report.speed) out["speed"] = *report.speed;
  if (report.gamma0) out["gamma0"] = *report.gamma0;
  if (report.gamma_threshold) out["gamma_threshold"] = number_or_string(*report.gamma_threshold);
  if (const auto rho = rho_limit(family)) out["declared_rho"] = number_or_string(*rho);
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buffer;
}

json manifest_json(const RunContext& context, const std::optional<std::string>& finished_at) {
  const json& resolved = context.config.resolved();
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a_64(resolved.dump())));
  json manifest = {{"toolkit", "migrant-chain"},
                   {"version", kToolkitVersion},
                   {"command", context.command},
                   {"config_hash", std::string("fnv1a64:") + hash},
                   {"seed", context.seed},
                   {"threads", context.threads},
                   {"started_at", context.started_at},
                   {"finished_at", nullptr},
                   {"outputs", context.outputs},
                   {"config", resolved}};
  if (finished_at) manifest["finished_at"] = *finished_at;
  return manifest;
}

namespace {

void write_manifest(const RunContext& context, const std::optional<std::string>& finished_at) {
  std::ofstream file(context.path("manifest.json"));
  if (!file) throw std::runtime_error("cannot write " + context.path("manifest.json").string());
  file << manifest_json(context, finished_at).dump(2) << '\n';
}

}  // namespace

void RunContext::begin(std::vector<std::string> planned_outputs) {
  config.finish();
  outputs = std::move(planned_outputs);
  outputs.push_back("manifest.json");
  std::filesystem::create_directories(out_dir);
  started_at = utc_timestamp();
  write_manifest(*this, std::nullopt);
}

void RunContext::finish() { write_manifest(*this, utc_timestamp()); }

}  // namespace cli

}  // namespace migrant
