#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Steady vortex pairs by penalised energy maximisation"};
  app.require_subcommand(1);

  std::string config, out = "out", bundle;
  std::vector<double> epsilons{0.1, 0.07, 0.05, 0.035, 0.025};

  auto* solve = app.add_subcommand("solve", "Solve one configuration and write fields");
  solve->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Solve over a list of epsilons and fit the asymptotic laws");
  sweep->add_option("--config", config, "Base configuration (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--epsilons", epsilons, "Comma-separated epsilons")->delimiter(',');
  sweep->add_option("--out", out, "Output directory");

  auto* verify = app.add_subcommand("verify", "Re-check a solve directory from its field files");
  verify->add_option("--bundle", bundle, "Directory written by solve")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vpd::cli::kConfigError;
  }

  if (*solve) return vpd::cli::cmd_solve(config, out, std::cout);
  if (*sweep) return vpd::cli::cmd_sweep(config, epsilons, out, std::cout);
  return vpd::cli::cmd_verify(bundle, std::cout);
}
