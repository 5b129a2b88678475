#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "cli_internal.hpp"
#include "migrant/montecarlo.hpp"

namespace migrant {

namespace {

using cli::ConfigReader;
using cli::RunContext;
using nlohmann::json;

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<unsigned> threads;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(file);
  } catch (const json::parse_error& error) {
    throw ConfigError("config file '" + path + "': " + error.what());
  }
}

int dispatch(const std::string& command, const std::string& battery, const Flags& flags, std::ostream& out,
             std::ostream& err) {
  ConfigReader config(load_config(flags.config_path));

  const auto seed = config.take<std::uint64_t>("seed", cli::defaults::seed);
  const auto threads = config.take<unsigned>("threads", threads_from_environment(cli::defaults::threads));
  const auto out_dir = config.take<std::string>("out", cli::defaults::out);
  config.forget("threads");
  config.forget("out");

  RunContext context{command, config, flags.seed.value_or(seed), flags.threads.value_or(threads),
                     flags.out_dir.empty() ? out_dir : flags.out_dir, out, err, {}, {}};
  if (context.threads == 0) throw ConfigError("threads must be at least 1");
  config.record("seed", context.seed);

  if (command == "simulate") return cli::cmd_simulate(context);
  if (command == "classify") return cli::cmd_classify(context);
  if (command == "verify") return cli::cmd_verify(context, battery);
  if (command == "figure1") return cli::cmd_figure1(context);
  if (command == "sweep") return cli::cmd_sweep(context);
  if (command == "hitting") return cli::cmd_hitting(context);
  if (command == "drops") return cli::cmd_drops(context);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and exact analysis of the one-migrant-per-generation chain", "migrant-chain"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolkitVersion);

  Flags flags;
  app.add_option("--config", flags.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "master seed (overrides the config)");
  app.add_option("--out", flags.out_dir, "output directory (overrides the config)");
  app.add_option("--threads", flags.threads, "worker cap; never changes results (env MIGRANT_CHAIN_THREADS)")
      ->check(CLI::PositiveNumber);

  std::string battery;
  app.add_subcommand("simulate", "one trajectory as step,x,y CSV");
  app.add_subcommand("classify", "regime report for the configured family");
  auto* verify = app.add_subcommand("verify", "run a bound battery and write its CSV");
  verify->add_option("battery", battery, "domination | martingale | tails | ladder | hitting")
      ->required()
      ->check(CLI::IsMember({"domination", "martingale", "tails", "ladder", "hitting"}));
  app.add_subcommand("figure1", "a=0.99 and a=1.01 trajectories from X0=100 as CSV and SVG");
  app.add_subcommand("sweep", "phase table over a grid of power-law exponents");
  app.add_subcommand("hitting", "Monte Carlo hitting probability against the exact solve");
  app.add_subcommand("drops", "drop-size census over a step window");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error, out, err);
    return code == 0 ? exit_ok : exit_config_error;
  }

  try {
    return dispatch(app.get_subcommands().front()->get_name(), battery, flags, out, err);
  } catch (const ConfigError& error) {
    err << "config error: " << error.what() << '\n';
    return exit_config_error;
  } catch (const std::exception& error) {
    err << "error: " << error.what() << '\n';
    return exit_check_failed;
  }
}

}  // namespace migrant
