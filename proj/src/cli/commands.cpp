#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "cli_internal.hpp"
#include "migrant/chain.hpp"
#include "migrant/montecarlo.hpp"
#include "migrant/passage.hpp"

namespace migrant::cli {

namespace {

std::ofstream open_output(const RunContext& context, const std::string& name) {
  std::ofstream file(context.path(name));
  if (!file) throw std::runtime_error("cannot write " + context.path(name).string());
  return file;
}

void write_json(const RunContext& context, const std::string& name, const json& value) {
  open_output(context, name) << value.dump(2) << '\n';
}

void require_config(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

json census_json(const DropCensus& census) {
  json counts = json::object();
  for (const auto& [size, count] : census.counts) counts[std::to_string(size)] = count;
  json out = {{"window", {census.window.begin, census.window.end}},
              {"replications", census.per_replication.size()},
              {"gamma0", nullptr},
              {"max_drop", census.max_drop},
              {"counts", counts},
              {"fraction_zero_drops", census.fraction_max_at_most(0)},
              {"fraction_within_gamma0", nullptr},
              {"fraction_with_all_sizes_up_to_gamma0", nullptr},
              {"finite_horizon_proxy", true}};
  if (census.gamma0) {
    out["gamma0"] = *census.gamma0;
    out["fraction_within_gamma0"] = census.fraction_within_gamma0;
    std::vector<std::int64_t> sizes(*census.gamma0);
    std::iota(sizes.begin(), sizes.end(), 1);
    out["fraction_with_all_sizes_up_to_gamma0"] = census.fraction_with_all(sizes);
  }
  return out;
}

}  // namespace

int cmd_simulate(RunContext& context) {
  auto& config = context.config;
  const auto family = config.take_family("family", std::nullopt);
  const auto x0 = config.take<std::int64_t>("x0", defaults::simulate_x0);
  const auto steps = config.take<std::int64_t>("steps", defaults::simulate_steps);
  require_config(x0 >= 1, "x0 must be at least 1");
  require_config(steps >= 0, "steps must be nonnegative");
  context.begin({"trajectory.csv"});

  const Trajectory path = simulate(ChainConfig{family, x0, steps, context.seed});
  auto file = open_output(context, "trajectory.csv");
  write_trajectory_csv(file, path);
  context.out << json{{"family", family.name()},
                      {"steps", steps},
                      {"final_state", path.states.back()},
                      {"max_state", *std::max_element(path.states.begin(), path.states.end())}}
                     .dump()
              << '\n';
  context.finish();
  return exit_ok;
}

int cmd_classify(RunContext& context) {
  const auto family = context.config.take_family("family", std::nullopt);
  context.begin({"classify.json"});
  const json report = regime_json(family, classify(family));
  write_json(context, "classify.json", report);
  context.out << report.dump(2) << '\n';
  context.finish();
  return exit_ok;
}

int cmd_figure1(RunContext& context) {
  auto& config = context.config;
  const auto x0 = config.take<std::int64_t>("x0", defaults::figure_x0);
  const auto steps = config.take<std::int64_t>("steps", defaults::figure_steps);
  const auto batch = config.take<std::int64_t>("batch", defaults::figure_batch);
  const auto batch_steps = config.take<std::int64_t>("batch_steps", defaults::figure_batch_steps);
  const auto red_level = config.take<double>("red_level", defaults::figure_red_level);
  require_config(x0 >= 1 && steps >= 1, "x0 and steps must be at least 1");
  require_config(batch >= 0 && batch_steps >= 1, "batch must be nonnegative and batch_steps positive");

  std::vector<std::string> outputs{"figure1.csv", "figure1.svg"};
  if (batch > 0) {
    outputs.push_back("figure1_batch.csv");
    outputs.push_back("figure1_batch.json");
  }
  context.begin(outputs);

  const auto red_family = ThinningFamily::power_law(0.99);
  const auto blue_family = ThinningFamily::power_law(1.01);
  const Trajectory red = simulate(ChainConfig{red_family, x0, steps, context.seed}, 0);
  const Trajectory blue = simulate(ChainConfig{blue_family, x0, steps, context.seed}, 1);

  auto csv = open_output(context, "figure1.csv");
  csv << "step,a=0.99,a=1.01\n";
  for (std::int64_t t = 0; t <= steps; ++t) csv << t << ',' << red.states[t] << ',' << blue.states[t] << '\n';

  const std::int64_t stride = std::max<std::int64_t>(1, (steps + 1) / defaults::figure_svg_points);
  Series red_series{"a=0.99 (positive recurrent)", "#d62728", {}, {}};
  Series blue_series{"a=1.01 (transient)", "#1f77b4", {}, {}};
  for (std::int64_t t = 0; t <= steps; t += stride) {
    red_series.x.push_back(static_cast<double>(t));
    red_series.y.push_back(static_cast<double>(red.states[t]));
    blue_series.x.push_back(static_cast<double>(t));
    blue_series.y.push_back(static_cast<double>(blue.states[t]));
  }
  auto svg = open_output(context, "figure1.svg");
  write_line_chart_svg(svg, "One migrant per generation, X0 = " + std::to_string(x0), "n", "X_n",
                       {red_series, blue_series});

  json summary = {{"red_final", red.states.back()}, {"blue_final", blue.states.back()}};
  if (batch > 0) {
    std::vector<RunSummary> reds(batch);
    std::vector<RunSummary> blues(batch);
    parallel_for_index(batch, context.threads, [&](std::int64_t b) {
      const auto index = static_cast<std::uint64_t>(2 * b);
      reds[b] = run_summary(red_family, x0, batch_steps, context.seed, index);
      blues[b] = run_summary(blue_family, x0, batch_steps, context.seed, index + 1);
    });
    auto batch_csv = open_output(context, "figure1_batch.csv");
    batch_csv << "replicate,red_last20_mean,red_final,blue_final\n";
    std::int64_t red_low = 0;
    std::int64_t blue_up = 0;
    for (std::int64_t b = 0; b < batch; ++b) {
      batch_csv << b << ',' << format_number(reds[b].tail_mean) << ',' << reds[b].final_state << ','
                << blues[b].final_state << '\n';
      red_low += reds[b].tail_mean < red_level ? 1 : 0;
      blue_up += blues[b].final_state > x0 ? 1 : 0;
    }
    const json batch_summary = {{"replicates", batch},
                                {"steps", batch_steps},
                                {"red_level", red_level},
                                {"red_last20_mean_below_level", red_low},
                                {"blue_final_above_x0", blue_up},
                                {"finite_horizon_proxy", true}};
    write_json(context, "figure1_batch.json", batch_summary);
    summary["batch"] = batch_summary;
  }
  context.out << summary.dump() << '\n';
  context.finish();
  return exit_ok;
}

int cmd_sweep(RunContext& context) {
  auto& config = context.config;
  const auto grid = config.take<std::vector<double>>("grid", defaults::sweep_grid);
  const auto x0 = config.take<std::int64_t>("x0", defaults::sweep_x0);
  const auto steps = config.take<std::int64_t>("steps", defaults::sweep_steps);
  const auto replications = config.take<std::int64_t>("replications", defaults::sweep_replications);
  require_config(!grid.empty(), "grid must not be empty");
  require_config(std::all_of(grid.begin(), grid.end(), [](double a) { return a > 0.0 && std::isfinite(a); }),
                 "grid values must be positive");
  require_config(x0 >= 1 && steps >= 1 && replications >= 1, "x0, steps and replications must be positive");
  context.begin({"sweep.csv"});

  auto csv = open_output(context, "sweep.csv");
  csv << "a,regime,gamma0,speed_hat,stderr\n";
  for (const double a : grid) {
    const auto family = ThinningFamily::power_law(a);
    const auto report = classify(family);
    EnsembleSpec spec{ChainConfig{family, x0, steps, context.seed}, replications, 0, context.threads};
    const auto speed = ensemble_speed(spec, false);
    csv << format_number(a) << ',' << to_string(report.regime) << ','
        << (report.gamma0 ? std::to_string(*report.gamma0) : "") << ',' << format_number(speed.mean) << ','
        << format_number(speed.standard_error) << '\n';
  }
  context.out << "sweep: " << grid.size() << " rows written to " << context.path("sweep.csv").string() << '\n';
  context.finish();
  return exit_ok;
}

int cmd_hitting(RunContext& context) {
  auto& config = context.config;
  const auto family = config.take_family("family", ThinningFamily::power_law(1.0));
  const auto x0 = config.take<std::int64_t>("x0", defaults::hitting_x0);
  const auto target = config.take<std::int64_t>("target", defaults::hitting_target);
  const auto cap = config.take<std::int64_t>("cap", defaults::hitting_cap);
  const auto replications = config.take<std::int64_t>("replications", defaults::hitting_replications);
  require_config(1 <= target && target < x0 && x0 < cap, "hitting requires 1 <= target < x0 < cap");
  require_config(replications >= 1, "replications must be positive");
  context.begin({"hitting.json"});

  const auto estimate = hitting_estimate(family, x0, target, cap, replications, context.seed, context.threads);
  json result = {{"family", family.name()},
                 {"x0", x0},
                 {"target", target},
                 {"cap", cap},
                 {"p_hat", estimate.p_hat},
                 {"stderr", estimate.standard_error},
                 {"hits", estimate.hits},
                 {"replications", estimate.replications},
                 {"exact", nullptr},
                 {"agrees", nullptr}};
  int code = exit_ok;
  if (target == 1 && cap <= kDefaultDenseCap) {
    const double exact = first_passage_down(family, cap).at(x0);
    const double band = defaults::agreement_sigmas * std::sqrt(exact * (1.0 - exact) / static_cast<double>(replications));
    const bool agrees = std::abs(estimate.p_hat - exact) <= band;
    result["exact"] = exact;
    result["agrees"] = agrees;
    if (!agrees) code = exit_check_failed;
  }
  write_json(context, "hitting.json", result);
  context.out << result.dump(2) << '\n';
  context.finish();
  return code;
}

int cmd_drops(RunContext& context) {
  auto& config = context.config;
  const auto family = config.take_family("family", ThinningFamily::power_law(2.5));
  const auto x0 = config.take<std::int64_t>("x0", defaults::drops_x0);
  const auto window = config.take<std::vector<std::int64_t>>(
      "window", {defaults::drops_window_begin, defaults::drops_window_end});
  const auto replications = config.take<std::int64_t>("replications", defaults::drops_replications);
  require_config(x0 >= 1 && replications >= 1, "x0 and replications must be positive");
  require_config(window.size() == 2 && window[0] >= 1 && window[1] >= window[0],
                 "window must be [begin, end) with 1 <= begin <= end");
  context.begin({"drops.csv", "drops.json"});

  EnsembleSpec spec{ChainConfig{family, x0, window[1], context.seed}, replications, 0, context.threads};
  const auto census = drop_census(spec, StepWindow{window[0], window[1]});
  auto csv = open_output(context, "drops.csv");
  csv << "replication,size,count\n";
  for (std::size_t r = 0; r < census.per_replication.size(); ++r) {
    for (const auto& [size, count] : census.per_replication[r].counts) csv << r << ',' << size << ',' << count << '\n';
  }
  json summary = census_json(census);
  summary["family"] = family.name();
  write_json(context, "drops.json", summary);
  context.out << summary.dump(2) << '\n';
  context.finish();
  return exit_ok;
}

}  // namespace migrant::cli
