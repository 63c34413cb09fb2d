#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "judba_cli.hpp"

int main(int argc, char** argv) {
  using namespace judba::cli;
  CLI::App app{"Joint upload decision and bandwidth allocation simulator"};
  app.set_version_flag("--version", std::string("judba-sim ") + judba::kVersion);
  app.require_subcommand(1);

  std::string config_path;

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one generated scenario and compare with the benchmarks");
  solve_cmd->add_option("--config", config_path, "Configuration file");
  solve_cmd->add_option("--seed", solve.seed, "Scenario seed");
  std::string solve_out;
  solve_cmd->add_option("--out", solve_out, "CSV output path");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep M, F (GHz) or lambda and write averaged costs");
  sweep_cmd->add_option("--config", config_path, "Configuration file");
  sweep_cmd->add_option("--axis", sweep.axis, "M, F or lambda")->required();
  sweep_cmd->add_option("--values", sweep.values, "Comma-separated axis values")->required();
  sweep_cmd->add_option("--seeds", sweep.seeds, "Number of seeds per axis value");
  sweep_cmd->add_option("--seed", sweep.seed, "First seed");
  std::string sweep_out;
  sweep_cmd->add_option("--out", sweep_out, "CSV output path (stdout when omitted)");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Check the solver against the brute-force oracles");
  verify_cmd->add_option("--config", config_path, "Configuration file");
  verify_cmd->add_option("--trials", verify.trials, "Number of random instances");
  verify_cmd->add_option("--seed", verify.seed, "First seed");
  verify_cmd->add_option("--cost-tol", verify.cost_tol, "Relative tolerance of the system-cost comparison");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  const std::optional<std::string> config =
      config_path.empty() ? std::nullopt : std::optional<std::string>(config_path);
  if (*solve_cmd) {
    solve.config = config;
    if (!solve_out.empty()) solve.out = solve_out;
    return cmd_solve(solve, std::cout, std::cerr);
  }
  if (*sweep_cmd) {
    sweep.config = config;
    if (!sweep_out.empty()) sweep.out = sweep_out;
    return cmd_sweep(sweep, std::cout, std::cerr);
  }
  verify.config = config;
  return cmd_verify(verify, std::cout, std::cerr);
}
