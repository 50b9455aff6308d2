#include <CLI11.hpp>

#include <iostream>

#include "gosm/experiment.hpp"

namespace {

int run(const std::string& config_path, const std::string& scenario, const std::string& out) {
  gosm::ScenarioConfig config = gosm::load_config(config_path);
  if (!scenario.empty()) config.scenario = gosm::parse_scenario(scenario);
  if (!out.empty()) config.out_dir = out;
  config.validate();

  const gosm::ScenarioReport report = gosm::run_scenario(config);
  bool ok = report.passed();
  try {
    gosm::cross_check_summary(config.out_dir, config.scenario, config.target);
  } catch (const gosm::Error& e) {
    std::cerr << "cross-check failed: " << e.what() << '\n';
    ok = false;
  }

  std::cout << "scenario " << gosm::to_string(config.scenario) << " -> " << config.out_dir.string() << '\n';
  for (const auto& row : report.summary)
    std::cout << "  k_max " << row.k_max << ": "
              << (row.iters_to_target ? std::to_string(*row.iters_to_target) + " iterations"
                                      : "stalled at " + std::to_string(row.plateau_level))
              << '\n';
  for (const auto& c : report.checks)
    std::cout << "  " << (c.passed ? "ok   " : "FAIL ") << c.name << " (" << c.worst << " vs " << c.tolerance << ")\n";
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized optimized Schwarz experiments for 2D Helmholtz"};
  app.require_subcommand(1);
  std::string config_path, scenario, out;
  auto* cmd = app.add_subcommand("run", "Run one scenario and write its CSV artifacts");
  cmd->add_option("--config", config_path, "key = value configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--scenario", scenario, "fig2-left | fig2-right | fig3 | table-kmax | verify");
  cmd->add_option("--out", out, "output directory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    return run(config_path, scenario, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
