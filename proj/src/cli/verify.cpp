#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "cli_internal.hpp"
#include "migrant/numerics.hpp"
#include "migrant/passage.hpp"

namespace migrant::cli {

namespace {

using Context = std::vector<ContextField>;

std::vector<ThinningFamily> power_laws(const std::vector<double>& exponents) {
  std::vector<ThinningFamily> out;
  for (double a : exponents) out.push_back(ThinningFamily::power_law(a));
  return out;
}

/// j in [first, last]: every level up to first + 100, then about 200 log-spaced levels.
std::vector<std::int64_t> report_levels(std::int64_t first, std::int64_t last) {
  std::set<std::int64_t> levels;
  for (std::int64_t j = first; j <= std::min(last, first + 100); ++j) levels.insert(j);
  const double span = std::log(static_cast<double>(last) / static_cast<double>(first));
  for (int i = 0; i <= 200; ++i) {
    levels.insert(std::clamp<std::int64_t>(std::llround(first * std::exp(span * i / 200.0)), first, last));
  }
  levels.insert(last);
  return {levels.begin(), levels.end()};
}

std::vector<BoundReport> domination_battery(RunContext& context) {
  auto& config = context.config;
  const auto family = config.take_family("family", ThinningFamily::rescaled(0.5));
  const auto rho_bar = config.take<double>("rho_bar", defaults::domination_rho_bar);
  const auto epsilon = config.take<double>("epsilon", defaults::domination_epsilon);
  const auto k_max = config.take<std::int64_t>("k_max", defaults::domination_k_max);
  const auto j_max = config.take<std::int64_t>("j_max", defaults::domination_j_max);
  const auto rho = rho_limit(family);
  if (!rho || !(*rho < rho_bar) || !(rho_bar < 1.0)) throw ConfigError("domination requires rho < rho_bar < 1");
  if (!(epsilon > 0.0) || !((1.0 + epsilon) * rho_bar < 1.0)) {
    throw ConfigError("domination requires epsilon > 0 and (1 + epsilon) * rho_bar < 1");
  }
  if (k_max < 1 || j_max < 1) throw ConfigError("k_max and j_max must be at least 1");
  context.begin({"verify_domination.csv"});

  const DominatingLaw law{rho_bar, epsilon};
  const auto result = domination_threshold(family, rho_bar, epsilon, k_max, j_max);
  std::vector<BoundReport> reports;
  if (!result.threshold) {
    for (auto& report : domination_reports(family, domination_level(family, law, k_max, j_max), k_max)) {
      reports.push_back(std::move(report));
    }
    reports.push_back(BoundReport::compare(1.0, 0.0, {{"check", "threshold_found"}, {"family", family.name()},
                                                      {"j", format_number(j_max)}, {"k", ""}}));
    return reports;
  }
  for (const auto j : report_levels(*result.threshold, j_max)) {
    for (auto& report : domination_reports(family, domination_level(family, law, k_max, j), k_max)) {
      reports.push_back(std::move(report));
    }
  }
  context.out << "domination: J = " << *result.threshold << ", min P(Z_j=0) - mu(0) = "
              << format_number(result.min_zero_margin) << ", min 1 - max ratio = "
              << format_number(result.min_point_margin)
              << ", tail controlled: " << (result.tail_controlled ? "yes" : "no") << '\n';
  if (!result.tail_controlled) {
    reports.push_back(BoundReport::compare(1.0, 0.0, {{"check", "tail_controlled"}, {"family", family.name()},
                                                      {"j", format_number(j_max)}, {"k", ""}}));
  }
  return reports;
}

std::vector<BoundReport> martingale_battery(RunContext& context) {
  auto& config = context.config;
  const auto x_max = config.take<std::int64_t>("x_max", defaults::martingale_x_max);
  const auto condition_x_max = config.take<std::int64_t>("condition_x_max", defaults::martingale_condition_x_max);
  const auto i_max = config.take<std::int64_t>("i_max", defaults::martingale_i_max);
  const auto offsets = config.take<std::vector<std::int64_t>>("N", defaults::bound_offsets);
  const auto c_grid = config.take<std::vector<double>>("c_grid", defaults::martingale_c_grid);
  const auto critical = config.take_family("critical_family", ThinningFamily::critical(EtaSpec::zero()));
  const auto drift_families = config.take_families(
      "drift_families", {ThinningFamily::power_law(0.5), ThinningFamily::power_law(1.0),
                         ThinningFamily::power_law(1.5), ThinningFamily::rescaled(0.5),
                         ThinningFamily::constant(0.1)});
  if (x_max < 1 || condition_x_max < 1 || i_max < 1) throw ConfigError("x_max, condition_x_max and i_max must be positive");
  if (std::any_of(offsets.begin(), offsets.end(), [](std::int64_t n) { return n < 0; })) {
    throw ConfigError("N values must be nonnegative");
  }
  if (std::any_of(c_grid.begin(), c_grid.end(), [](double c) { return !(c > 0.0 && c < 1.0); })) {
    throw ConfigError("c_grid values must lie in (0, 1)");
  }
  context.begin({"verify_martingale.csv"});

  std::vector<BoundReport> reports;
  const auto add = [&](const char* check, const ThinningFamily* family, std::string x, std::string param, double lhs,
                       double rhs) {
    reports.push_back(BoundReport::compare(
        lhs, rhs, Context{{"check", check}, {"family", family ? family->name() : ""}, {"x", x}, {"param", param}}));
  };

  for (std::int64_t x = 1; x <= x_max; ++x) {
    if (eta(critical, x) < 0.0) continue;
    for (const auto n : offsets) {
      const double gap = submartingale_gap(critical, x, n);
      add("submartingale_gap_nonnegative", &critical, format_number(x), "N=" + format_number(n), 0.0, gap);
      if (n > 0) {
        add("submartingale_gap_below_reciprocal_N", &critical, format_number(x), "N=" + format_number(n), gap,
            1.0 / static_cast<double>(n));
      }
    }
  }

  for (const double c : c_grid) {
    for (std::int64_t x = 1; x <= x_max; ++x) {
      const auto value = supermartingale_expectation(x, c);
      add("supermartingale_two_routes", nullptr, format_number(x), "c=" + format_number(c),
          std::abs(value.closed_form - value.direct_sum), kIdentityTolerance);
    }
  }

  const auto reciprocal = ThinningFamily::power_law(1.0);
  for (std::int64_t x = 1; x <= condition_x_max; ++x) {
    const auto value = supermartingale_expectation(x, reciprocal.c(x));
    add("supermartingale_condition", &reciprocal, format_number(x), "", 0.0, value.condition_margin);
  }

  for (const auto& family : drift_families) {
    for (std::int64_t i = 1; i <= i_max; ++i) {
      const auto gap = drift_gap(family, i);
      add("drift_two_routes", &family, format_number(i), "", std::abs(gap.closed_form - gap.pmf_weighted),
          kIdentityTolerance);
    }
  }
  return reports;
}

std::vector<BoundReport> tails_battery(RunContext& context) {
  auto& config = context.config;
  const auto families = config.take_families("families", power_laws(defaults::tails_exponents));
  const auto l_max = config.take<std::int64_t>("l_max", defaults::tails_l_max);
  const auto k_max = config.take<std::int64_t>("k_max", defaults::tails_k_max);
  if (l_max < 1 || k_max < 0) throw ConfigError("l_max must be positive and k_max nonnegative");
  for (const auto& family : families) {
    const auto rho = rho_limit(family);
    if (!rho || std::isinf(*rho)) {
      throw ConfigError("tails: " + family.name() + " needs a finite declared rho (f(l) is unbounded otherwise)");
    }
  }
  context.begin({"verify_tails.csv"});

  std::vector<BoundReport> reports;
  for (const auto& family : families) {
    auto batch = tail_battery(family, l_max, k_max);
    reports.insert(reports.end(), std::make_move_iterator(batch.begin()), std::make_move_iterator(batch.end()));
  }
  return reports;
}

std::vector<BoundReport> ladder_battery(RunContext& context) {
  auto& config = context.config;
  const auto families = config.take_families("families", power_laws(defaults::ladder_exponents));
  const auto l_max = config.take<std::int64_t>("l_max", defaults::ladder_l_max);
  const auto k_max = config.take<std::int64_t>("k_max", defaults::ladder_k_max);
  const auto tolerance = config.take<double>("tolerance", defaults::ladder_tolerance);
  if (l_max < 1 || k_max < 0) throw ConfigError("l_max must be positive and k_max nonnegative");
  context.begin({"verify_ladder.csv"});

  std::vector<BoundReport> reports;
  const auto add = [&](const char* check, const ThinningFamily& family, std::int64_t l, std::int64_t k, double lhs,
                       double rhs) {
    reports.push_back(BoundReport::compare(
        lhs, rhs, Context{{"check", check}, {"family", family.name()}, {"l", format_number(l)}, {"k", format_number(k)}}));
  };
  for (const auto& family : families) {
    std::vector<LadderProfile> profiles;
    for (std::int64_t k = 0; k <= k_max; ++k) profiles.push_back(ladder_profile(family, l_max, k));
    for (std::int64_t k = 0; k <= k_max; ++k) {
      const auto& profile = profiles[k];
      add("denominator_slack_nonnegative", family, l_max, k, 0.0, profile.min_denominator_slack);
      for (std::int64_t l = 1; l <= l_max; ++l) {
        const double oracle = ladder_absorbing_solve(family, l, k)[l - 1];
        add("recursion_vs_linear_solve", family, l, k, std::abs(profile.at(l) - oracle), tolerance);
        if (k + 1 <= k_max) add("monotone_in_k", family, l, k, profile.at(l), profiles[k + 1].at(l));
      }
    }
  }
  return reports;
}

std::vector<BoundReport> hitting_battery(RunContext& context) {
  auto& config = context.config;
  const auto family = config.take_family("family", ThinningFamily::power_law(1.0));
  const auto critical = config.take_family("critical_family", ThinningFamily::critical(EtaSpec::zero()));
  const auto M = config.take<std::int64_t>("M", defaults::passage_M);
  const auto x_max = config.take<std::int64_t>("x_max", defaults::passage_x_max);
  const auto offsets = config.take<std::vector<std::int64_t>>("N", defaults::bound_offsets);
  if (M < 2 || M > kDefaultDenseCap) throw ConfigError("M must lie in [2, " + std::to_string(kDefaultDenseCap) + "]");
  if (x_max < 1 || x_max > M) throw ConfigError("x_max must lie in [1, M]");
  if (std::any_of(offsets.begin(), offsets.end(), [](std::int64_t n) { return n < 0; })) {
    throw ConfigError("N values must be nonnegative");
  }
  context.begin({"verify_hitting.csv"});

  std::vector<BoundReport> reports;
  const auto add = [&](const char* check, const ThinningFamily& f, std::int64_t x, std::string n, double lhs,
                       double rhs) {
    reports.push_back(BoundReport::compare(lhs, rhs,
                                           Context{{"check", check},
                                                   {"family", f.name()},
                                                   {"M", format_number(M)},
                                                   {"x", format_number(x)},
                                                   {"N", std::move(n)}}));
  };

  const auto upper = first_passage_down(family, M);
  add("residual", family, 0, "", upper.max_residual, defaults::residual_tolerance);
  for (std::int64_t x = 2; x <= x_max; ++x) add("g_below_reciprocal_x", family, x, "", upper.at(x), 1.0 / static_cast<double>(x));

  const auto lower = first_passage_down(critical, M);
  add("residual", critical, 0, "", lower.max_residual, defaults::residual_tolerance);
  for (const auto n : offsets) {
    for (std::int64_t x = 1; x <= x_max; ++x) {
      add("g_above_recurrent_bound", critical, x, format_number(n), recurrent_lower_bound(x, M, n), lower.at(x));
    }
  }
  return reports;
}

}  // namespace

int emit_battery(RunContext& context, const std::string& battery, const std::vector<BoundReport>& reports) {
  const std::string name = "verify_" + battery + ".csv";
  std::ofstream file(context.path(name));
  if (!file) throw std::runtime_error("cannot write " + context.path(name).string());
  write_bound_csv(file, reports);

  const auto failures = std::count_if(reports.begin(), reports.end(), [](const BoundReport& r) { return !r.holds; });
  context.out << "verify " << battery << ": " << reports.size() << " checks, " << failures << " failed ("
              << context.path(name).string() << ")\n";
  std::int64_t shown = 0;
  for (const auto& report : reports) {
    if (report.holds || shown++ >= 10) continue;
    context.err << "  failed:";
    for (const auto& field : report.context) context.err << ' ' << field.name << '=' << field.value;
    context.err << " lhs=" << format_number(report.lhs) << " rhs=" << format_number(report.rhs) << '\n';
  }
  return failures == 0 ? exit_ok : exit_check_failed;
}

int cmd_verify(RunContext& context, const std::string& battery) {
  std::vector<BoundReport> reports;
  if (battery == "domination") {
    reports = domination_battery(context);
  } else if (battery == "martingale") {
    reports = martingale_battery(context);
  } else if (battery == "tails") {
    reports = tails_battery(context);
  } else if (battery == "ladder") {
    reports = ladder_battery(context);
  } else if (battery == "hitting") {
    reports = hitting_battery(context);
  } else {
    throw ConfigError("unknown battery '" + battery + "'");
  }
  const int code = emit_battery(context, battery, reports);
  context.finish();
  return code;
}

}  // namespace migrant::cli
