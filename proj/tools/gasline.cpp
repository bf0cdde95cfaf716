// gasline: certify, stationary, simulate and sweep front end.

#include <iostream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "gasline/cli.hpp"

int main(int argc, char** argv) {
  gasline::init_logging();
  CLI::App app{"Boundary feedback stabilization of gas pipeline flow"};
  app.require_subcommand(1);

  std::string config;
  gasline::CliOptions opt;
  const std::pair<const char*, const char*> commands[] = {
      {"certify", "check the stability conditions and write report.json"},
      {"stationary", "write the stationary profile as CSV"},
      {"simulate", "run the closed loop and write the Lyapunov trace"},
      {"sweep", "certify and simulate over a list of gains or amplitudes"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "run configuration file");
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_flag("--force", opt.force, "simulate even if the certificate fails");
    sub->add_option("--seed", opt.seed, "seed for randomized property checks");
  }
  app.add_option("--config", config, "run configuration file");
  app.add_option("--out", opt.out_dir, "output directory");
  app.add_flag("--force", opt.force, "simulate even if the certificate fails");
  app.add_option("--seed", opt.seed, "seed for randomized property checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gasline::kExitInput;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return gasline::run_command(command, config, opt, std::cout, std::cerr);
}
