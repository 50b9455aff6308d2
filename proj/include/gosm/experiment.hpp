#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gosm/analysis.hpp"
#include "gosm/ddm.hpp"
#include "gosm/mesh.hpp"

namespace gosm {

enum class Scenario { Fig2Left, Fig2Right, Fig3, TableKmax, Verify };

const char* to_string(Scenario s);
Scenario parse_scenario(const std::string& name);

/// One PCG cap of a scenario; empty means unbounded (PCG runs to its stopping rule).
using KmaxEntry = std::optional<int>;
std::string kmax_label(const KmaxEntry& k);

/// Experiment configuration, read from flat `key = value` files (`#` starts a comment).
///
///   wavelength, ppw, subdomains, alpha, layers, impedance_form (gradient | literal),
///   scenario, k_max (comma list, `inf` for unbounded), target, max_iterations, out, seed,
///   domain_outer (x0,y0,x1,y1), domain_hole (x0,y0,x1,y1 | none), amplitude,
///   plateau_window, plateau_improvement, rates (true | false), samples
struct ScenarioConfig {
  Rect outer{-1.0, -1.0, 1.0, 1.0};
  std::optional<Rect> hole = Rect{-0.25, -0.25, 0.25, 0.25};
  double wavelength = 0.25;
  int ppw = 20;
  int subdomains = 8;
  double alpha = 0.5;
  int n_layers = 5;
  ImpedanceForm form = ImpedanceForm::Gradient;
  double amplitude = 1.0;
  Scenario scenario = Scenario::Fig3;
  std::vector<KmaxEntry> k_max;  ///< empty: scenario default
  double target = 1e-10;
  int max_iterations = 2000;
  int plateau_window = 100;
  double plateau_improvement = 0.01;
  bool rates = true;
  int samples = 100;
  std::uint64_t seed = 7;
  std::filesystem::path out_dir = "out";

  double kappa() const;
  DomainSpec domain() const;
  /// Scenario semantics: fig2-* runs without recycling, fig3 and table-kmax with.
  bool recycle() const;
  std::vector<KmaxEntry> k_max_list() const;
  void validate() const;
};

ScenarioConfig parse_config(std::istream& is);
ScenarioConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& os, const ScenarioConfig& config);

struct SummaryRow {
  std::string k_max;  ///< integer, `inf` or `exact`
  bool recycle = false;
  std::optional<int> iters_to_target;  ///< written as `inf` when unreached
  double plateau_level = 0.0;          ///< min error when the target is unreached, NaN otherwise
};

struct HistoryRow {
  int n = 0;
  double rel_error = 0.0;
  int pcg_iters = 0;
};

void write_history_csv(std::ostream& os, const ConvergenceHistory& history);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);
void write_checks_csv(std::ostream& os, const std::vector<PropertyCheck>& checks);
std::vector<HistoryRow> read_history_csv(std::istream& is);
std::vector<SummaryRow> read_summary_csv(std::istream& is);

std::filesystem::path history_path(const std::filesystem::path& dir, Scenario s, const std::string& label);

/// Verifies that every summary row agrees with the first sub-target entry of its history file.
/// Throws Error on a mismatch or a missing file.
void cross_check_summary(const std::filesystem::path& dir, Scenario s, double target);

struct ScenarioReport {
  std::vector<SummaryRow> summary;
  std::vector<PropertyCheck> checks;  ///< scenario assertions
  std::optional<RateEstimates> rates;

  bool passed() const;
};

/// Builds the system, computes the reference, runs the scenario and writes its artifacts
/// (histories, summary.csv, checks.csv, rates.csv, meta.txt) into config.out_dir.
ScenarioReport run_scenario(const ScenarioConfig& config);

}  // namespace gosm
