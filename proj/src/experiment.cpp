#include "gosm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "gosm/fem.hpp"

namespace gosm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw InvalidInput("config: `" + key + "` expects a number, got `" + v + "`");
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos == v.size() && i >= std::numeric_limits<int>::min() && i <= std::numeric_limits<int>::max())
      return static_cast<int>(i);
  } catch (const std::exception&) {
  }
  throw InvalidInput("config: `" + key + "` expects an integer, got `" + v + "`");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidInput("config: `" + key + "` expects true or false, got `" + v + "`");
}

Rect to_rect(const std::string& key, const std::string& v) {
  const auto parts = split(v, ',');
  if (parts.size() != 4) throw InvalidInput("config: `" + key + "` expects x0,y0,x1,y1");
  return {to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2]), to_double(key, parts[3])};
}

std::string rect_string(const Rect& r) {
  std::ostringstream os;
  os << std::setprecision(17) << r.x0 << ',' << r.y0 << ',' << r.x1 << ',' << r.y1;
  return os.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << std::setprecision(17);
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path.string());
  return is;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double parse_csv_double(const std::string& v) {
  if (v == "nan") return kNaN;
  if (v == "inf") return std::numeric_limits<double>::infinity();
  return to_double("csv", v);
}

void expect_header(std::istream& is, const std::string& header) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != header) throw Error("csv: expected header `" + header + "`");
}

}  // namespace

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Fig2Left: return "fig2-left";
    case Scenario::Fig2Right: return "fig2-right";
    case Scenario::Fig3: return "fig3";
    case Scenario::TableKmax: return "table-kmax";
    case Scenario::Verify: return "verify";
  }
  return "?";
}

Scenario parse_scenario(const std::string& name) {
  for (Scenario s : {Scenario::Fig2Left, Scenario::Fig2Right, Scenario::Fig3, Scenario::TableKmax, Scenario::Verify})
    if (name == to_string(s)) return s;
  throw InvalidInput("unknown scenario `" + name + "`");
}

std::string kmax_label(const KmaxEntry& k) { return k ? std::to_string(*k) : "inf"; }

double ScenarioConfig::kappa() const { return 2.0 * std::numbers::pi / wavelength; }

DomainSpec ScenarioConfig::domain() const { return {outer, hole, wavelength / ppw}; }

bool ScenarioConfig::recycle() const { return scenario == Scenario::Fig3 || scenario == Scenario::TableKmax; }

std::vector<KmaxEntry> ScenarioConfig::k_max_list() const {
  if (!k_max.empty()) return k_max;
  switch (scenario) {
    case Scenario::Fig2Left: return {std::nullopt};
    case Scenario::Fig2Right: return {1, 2, 3, 5, std::nullopt};
    case Scenario::Fig3: return {5, 10};
    case Scenario::TableKmax: return {20, 15, 10, 5, 3, 2, 1};
    case Scenario::Verify: return {};
  }
  return {};
}

void ScenarioConfig::validate() const {
  if (!(outer.x1 > outer.x0 && outer.y1 > outer.y0)) throw InvalidInput("config: empty outer rectangle");
  if (hole && !(hole->x0 > outer.x0 && hole->x1 < outer.x1 && hole->y0 > outer.y0 && hole->y1 < outer.y1 &&
                hole->x1 > hole->x0 && hole->y1 > hole->y0))
    throw InvalidInput("config: hole must be a non-empty rectangle strictly inside the outer one");
  if (!(wavelength > 0.0)) throw InvalidInput("config: wavelength must be positive");
  if (ppw < 1) throw InvalidInput("config: ppw must be at least 1");
  if (subdomains < 1) throw InvalidInput("config: subdomains must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("config: alpha must lie in (0, 1)");
  if (n_layers < 1) throw InvalidInput("config: layers must be at least 1");
  if (!(target > 0.0)) throw InvalidInput("config: target must be positive");
  if (max_iterations < 1) throw InvalidInput("config: max_iterations must be at least 1");
  if (plateau_window < 0) throw InvalidInput("config: plateau_window must be non-negative");
  if (!(plateau_improvement >= 0.0 && plateau_improvement < 1.0))
    throw InvalidInput("config: plateau_improvement must lie in [0, 1)");
  if (samples < 1) throw InvalidInput("config: samples must be at least 1");
  for (const auto& k : k_max)
    if (k && *k < 0) throw InvalidInput("config: k_max entries must be non-negative");
}

ScenarioConfig parse_config(std::istream& is) {
  ScenarioConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (key == "wavelength") c.wavelength = to_double(key, v);
    else if (key == "ppw") c.ppw = to_int(key, v);
    else if (key == "subdomains") c.subdomains = to_int(key, v);
    else if (key == "alpha") c.alpha = to_double(key, v);
    else if (key == "layers") c.n_layers = to_int(key, v);
    else if (key == "impedance_form") {
      if (v == "gradient") c.form = ImpedanceForm::Gradient;
      else if (v == "literal") c.form = ImpedanceForm::Literal;
      else throw InvalidInput("config: impedance_form must be gradient or literal");
    } else if (key == "scenario") c.scenario = parse_scenario(v);
    else if (key == "k_max") {
      c.k_max.clear();
      for (const auto& item : v.empty() ? std::vector<std::string>{} : split(v, ',')) {
        if (item == "inf") c.k_max.emplace_back(std::nullopt);
        else c.k_max.emplace_back(to_int(key, item));
      }
    } else if (key == "target") c.target = to_double(key, v);
    else if (key == "max_iterations") c.max_iterations = to_int(key, v);
    else if (key == "out") c.out_dir = v;
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_int(key, v));
    else if (key == "domain_outer") c.outer = to_rect(key, v);
    else if (key == "domain_hole") {
      if (v == "none") c.hole.reset();
      else c.hole = to_rect(key, v);
    } else if (key == "amplitude") c.amplitude = to_double(key, v);
    else if (key == "plateau_window") c.plateau_window = to_int(key, v);
    else if (key == "plateau_improvement") c.plateau_improvement = to_double(key, v);
    else if (key == "rates") c.rates = to_bool(key, v);
    else if (key == "samples") c.samples = to_int(key, v);
    else throw InvalidInput("config: unknown key `" + key + "`");
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open config " + path.string());
  return parse_config(is);
}

void write_config(std::ostream& os, const ScenarioConfig& c) {
  os << std::setprecision(17);
  os << "domain_outer = " << rect_string(c.outer) << '\n';
  os << "domain_hole = " << (c.hole ? rect_string(*c.hole) : "none") << '\n';
  os << "wavelength = " << c.wavelength << '\n';
  os << "ppw = " << c.ppw << '\n';
  os << "subdomains = " << c.subdomains << '\n';
  os << "alpha = " << c.alpha << '\n';
  os << "layers = " << c.n_layers << '\n';
  os << "impedance_form = " << (c.form == ImpedanceForm::Gradient ? "gradient" : "literal") << '\n';
  os << "amplitude = " << c.amplitude << '\n';
  os << "scenario = " << to_string(c.scenario) << '\n';
  os << "k_max = ";
  const auto ks = c.k_max_list();
  for (std::size_t i = 0; i < ks.size(); ++i) os << (i ? "," : "") << kmax_label(ks[i]);
  os << '\n';
  os << "target = " << c.target << '\n';
  os << "max_iterations = " << c.max_iterations << '\n';
  os << "plateau_window = " << c.plateau_window << '\n';
  os << "plateau_improvement = " << c.plateau_improvement << '\n';
  os << "rates = " << (c.rates ? "true" : "false") << '\n';
  os << "samples = " << c.samples << '\n';
  os << "seed = " << c.seed << '\n';
  os << "out = " << c.out_dir.string() << '\n';
}

void write_history_csv(std::ostream& os, const ConvergenceHistory& history) {
  os << "n,rel_error,pcg_iters\n";
  for (const auto& r : history.records) os << r.n << ',' << format_double(r.rel_error) << ',' << r.pcg_iterations << '\n';
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "k_max,recycle,iters_to_target,plateau_level\n";
  for (const auto& r : rows)
    os << r.k_max << ',' << (r.recycle ? 1 : 0) << ','
       << (r.iters_to_target ? std::to_string(*r.iters_to_target) : "inf") << ',' << format_double(r.plateau_level)
       << '\n';
}

void write_checks_csv(std::ostream& os, const std::vector<PropertyCheck>& checks) {
  os << "check,passed,worst,tolerance\n";
  for (const auto& c : checks)
    os << c.name << ',' << (c.passed ? 1 : 0) << ',' << format_double(c.worst) << ',' << format_double(c.tolerance)
       << '\n';
}

std::vector<HistoryRow> read_history_csv(std::istream& is) {
  expect_header(is, "n,rel_error,pcg_iters");
  std::vector<HistoryRow> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 3) throw Error("history csv: malformed row `" + line + "`");
    rows.push_back({to_int("n", f[0]), parse_csv_double(f[1]), to_int("pcg_iters", f[2])});
  }
  return rows;
}

std::vector<SummaryRow> read_summary_csv(std::istream& is) {
  expect_header(is, "k_max,recycle,iters_to_target,plateau_level");
  std::vector<SummaryRow> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw Error("summary csv: malformed row `" + line + "`");
    SummaryRow r;
    r.k_max = f[0];
    r.recycle = to_bool("recycle", f[1]);
    if (f[2] != "inf") r.iters_to_target = to_int("iters_to_target", f[2]);
    r.plateau_level = parse_csv_double(f[3]);
    rows.push_back(r);
  }
  return rows;
}

std::filesystem::path history_path(const std::filesystem::path& dir, Scenario s, const std::string& label) {
  return dir / ("history_" + std::string(to_string(s)) + "_" + label + ".csv");
}

void cross_check_summary(const std::filesystem::path& dir, Scenario s, double target) {
  auto summary_in = open_in(dir / "summary.csv");
  for (const auto& row : read_summary_csv(summary_in)) {
    auto hist_in = open_in(history_path(dir, s, row.k_max));
    const auto hist = read_history_csv(hist_in);
    std::optional<int> first;
    double min_err = std::numeric_limits<double>::infinity();
    for (const auto& h : hist) {
      if (!std::isnan(h.rel_error)) min_err = std::min(min_err, h.rel_error);
      if (!first && h.rel_error < target) first = h.n;
    }
    if (first != row.iters_to_target)
      throw Error("summary and history disagree on iterations to target for k_max = " + row.k_max);
    if (!first && row.plateau_level != min_err)
      throw Error("summary and history disagree on the plateau level for k_max = " + row.k_max);
  }
}

bool ScenarioReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

namespace {

SummaryRow summarize(const std::string& label, bool recycle, const RichardsonResult& r, double target) {
  SummaryRow row;
  row.k_max = label;
  row.recycle = recycle;
  row.iters_to_target = r.history.iterations_to_target(target);
  row.plateau_level = row.iters_to_target ? kNaN : r.history.min_error();
  return row;
}

RichardsonConfig base_richardson(const ScenarioConfig& c) {
  RichardsonConfig rc;
  rc.alpha = c.alpha;
  rc.target = c.target;
  rc.max_iterations = c.max_iterations;
  rc.plateau_window = c.plateau_window;
  rc.plateau_improvement = c.plateau_improvement;
  return rc;
}

int max_pcg(const ConvergenceHistory& h) {
  int m = 0;
  for (const auto& r : h.records) m = std::max(m, r.pcg_iterations);
  return m;
}

PropertyCheck check(std::string name, bool ok, double worst, double tol) {
  return {std::move(name), ok, worst, tol};
}

double count_or_inf(const SummaryRow& r) {
  return r.iters_to_target ? *r.iters_to_target : std::numeric_limits<double>::infinity();
}

// Scenario assertions on the summary rows (exact row first).
void assert_pattern(const ScenarioConfig& c, const std::vector<SummaryRow>& rows,
                    const std::vector<KmaxEntry>& ks, const std::vector<int>& unbounded_pcg,
                    std::vector<PropertyCheck>& checks) {
  const SummaryRow& exact = rows.front();
  checks.push_back(check("exact_reaches_target", exact.iters_to_target.has_value(), count_or_inf(exact), c.target));
  switch (c.scenario) {
    case Scenario::Fig2Left:
    case Scenario::Fig3: {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (std::size_t i = 0; i < ks.size(); ++i) {
        const SummaryRow& r = rows[i + 1];
        checks.push_back(check("reaches_target_k" + r.k_max, r.iters_to_target.has_value(), count_or_inf(r), c.target));
        lo = std::min(lo, count_or_inf(r));
        hi = std::max(hi, count_or_inf(r));
      }
      if (c.scenario == Scenario::Fig3 && !ks.empty())
        checks.push_back(check("counts_within_2", hi - lo <= 2.0, hi - lo, 2.0));
      break;
    }
    case Scenario::Fig2Right: {
      const int exact_solve = unbounded_pcg.empty() ? 0 : *std::max_element(unbounded_pcg.begin(), unbounded_pcg.end());
      for (std::size_t i = 0; i < ks.size(); ++i) {
        const SummaryRow& r = rows[i + 1];
        if (!ks[i]) {
          checks.push_back(check("reaches_target_kinf", r.iters_to_target.has_value(), count_or_inf(r), c.target));
        } else if (exact_solve > 0 && *ks[i] < exact_solve) {
          const bool stalled = !r.iters_to_target && std::isfinite(r.plateau_level) && r.plateau_level > c.target;
          checks.push_back(check("plateau_k" + r.k_max, stalled, r.plateau_level, c.target));
        }
      }
      break;
    }
    case Scenario::TableKmax: {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0, k1 = -1.0;
      for (std::size_t i = 0; i < ks.size(); ++i) {
        if (!ks[i] || *ks[i] >= 3) {
          lo = std::min(lo, count_or_inf(rows[i + 1]));
          hi = std::max(hi, count_or_inf(rows[i + 1]));
        } else if (*ks[i] == 1) {
          k1 = count_or_inf(rows[i + 1]);
        }
      }
      if (hi > 0.0) {
        const double spread = std::isfinite(hi) ? hi / lo - 1.0 : std::numeric_limits<double>::infinity();
        checks.push_back(check("counts_k3_and_above_within_2pct", spread <= 0.02, spread, 0.02));
        if (k1 >= 0.0) checks.push_back(check("k1_needs_more_iterations", k1 > hi, k1, hi));
      }
      break;
    }
    case Scenario::Verify: break;
  }
}

struct Run {
  std::string label;
  bool recycle = false;
  RichardsonResult result;
};

void run_verify(const ScenarioConfig& c, const TriMesh& mesh, const DdmSystem& system, const SkeletonVector& ref,
                const RateEstimates& rates, ScenarioReport& report, std::vector<Run>& runs) {
  auto& checks = report.checks;
  PropertyOptions po;
  po.samples = c.samples;
  po.seed = c.seed;
  po.alpha = c.alpha;
  for (auto& pc : run_property_suite(system, rates.gamma_h, po)) checks.push_back(std::move(pc));

  checks.push_back(check("rho_below_bound", rates.rho <= rates.rho_bound + 1e-9, rates.rho, rates.rho_bound + 1e-9));
  checks.push_back(check("frakR_below_one_at_kmin", rates.frakR < 1.0, rates.frakR, 1.0));

  // the skeleton solution reproduces the monodomain solution
  const HelmholtzProblem& hp = system.problem();
  const CVec u_direct = solve_global_direct(mesh, hp);
  const GlobalField glued = glue_volume(system.partition(), system.reconstruct_u(ref), mesh.n_vertices());
  const double u_norm = u_direct.norm();
  const double l2 = u_norm > 0.0 ? (glued.u - u_direct).norm() / u_norm : glued.u.norm();
  checks.push_back(check("reconstruction_vs_monodomain", l2 <= 1e-8, l2, 1e-8));
  const double u_sup = u_direct.cwiseAbs().maxCoeff();
  const double jump = u_sup > 0.0 ? glued.max_jump / u_sup : glued.max_jump;
  checks.push_back(check("interface_jumps", jump <= 1e-8, jump, 1e-8));

  const double ref_norm = system.impedance().norm_Tinv(ref);
  RichardsonConfig rc = base_richardson(c);
  runs.push_back({"exact", false, richardson(system, rc, &ref)});
  const RichardsonResult& exact = runs.back().result;
  checks.push_back(check("exact_reaches_target", exact.reached_target, exact.history.min_error(), c.target));
  if (exact.history.records.size() > 1) {
    const auto env = verify_envelope(exact.history, rates.rho, exact.history.records[1].step_norm, ref_norm);
    checks.push_back(check("exact_envelope", env.passed(), env.violations(), 0.0));
    double worst_ratio = 0.0;
    const auto& rec = exact.history.records;
    for (std::size_t i = rec.size() / 2; i < rec.size(); ++i)
      if (i > 0 && rec[i - 1].rel_error > 0.0) worst_ratio = std::max(worst_ratio, rec[i].rel_error / rec[i - 1].rel_error);
    checks.push_back(check("late_ratio_below_rho", worst_ratio <= rates.rho + 1e-6, worst_ratio, rates.rho + 1e-6));
  }

  rc.mode = ExchangeMode::Approx;
  rc.recycle = true;
  rc.k_max = rates.k_min;
  runs.push_back({std::to_string(rates.k_min), true, richardson(system, rc, &ref)});
  const RichardsonResult& approx = runs.back().result;
  checks.push_back(check("approx_kmin_reaches_target", approx.reached_target, approx.history.min_error(), c.target));
  if (approx.history.records.size() > 1) {
    const auto env = verify_envelope(approx.history, rates.approx_rate(), approx.history.records[1].step_norm, ref_norm);
    checks.push_back(check("approx_envelope", !env.applicable || env.passed(), env.violations(), 0.0));
  }
  const double scale = ref_norm > 0.0 ? ref_norm : 1.0;
  const double gap = system.impedance().norm_Tinv(approx.q - exact.q) / scale;
  checks.push_back(check("fixed_point_consistency", gap <= 2.0 * c.target, gap, 2.0 * c.target));
}

}  // namespace

ScenarioReport run_scenario(const ScenarioConfig& config) {
  config.validate();
  const auto& dir = config.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
  auto meta = open_out(dir / "meta.txt");

  const TriMesh mesh = build_mesh(config.domain());
  Partition partition = partition_mesh(mesh, config.subdomains);
  validate_partition(mesh, partition);
  HelmholtzProblem problem;
  problem.kappa = config.kappa();
  problem.amplitude = config.amplitude;
  const DdmSystem system(mesh, std::move(partition), problem, {config.n_layers, config.form});
  const Partition& p = system.partition();

  SkeletonVector ref = zero_skeleton(p, Role::Dual);
  std::string reference_method;
  if (p.n_multi() <= 5000) {
    ref = reference_skeleton_solution(system);
    reference_method = "dense-lu";
  } else {
    RichardsonConfig rc = base_richardson(config);
    rc.plateau_window = 0;
    rc.max_iterations = 100 * config.max_iterations;
    rc.step_tolerance = 1e-13;
    const RichardsonResult r = richardson(system, rc);
    if (!r.step_converged) throw NumericalError("reference iteration did not converge");
    ref = r.q;
    reference_method = "exact-richardson-1e-13";
  }

  ScenarioReport report;
  const bool need_rates = config.rates || config.scenario == Scenario::Verify;
  if (need_rates) {
    report.rates = compute_rates(system, config.alpha);
    auto rates_out = open_out(dir / "rates.csv");
    write_rates_csv(rates_out, *report.rates);
  }

  std::vector<Run> runs;
  runs.reserve(16);
  std::vector<KmaxEntry> ks;
  std::vector<int> unbounded_pcg;
  if (config.scenario == Scenario::Verify) {
    run_verify(config, mesh, system, ref, *report.rates, report, runs);
  } else {
    ks = config.k_max_list();
    RichardsonConfig rc = base_richardson(config);
    runs.push_back({"exact", false, richardson(system, rc, &ref)});
    rc.mode = ExchangeMode::Approx;
    rc.recycle = config.recycle();
    for (const auto& k : ks) {
      rc.k_max = k;
      runs.push_back({kmax_label(k), config.recycle(), richardson(system, rc, &ref)});
      if (!k) unbounded_pcg.push_back(max_pcg(runs.back().result.history));
    }
  }
  for (const auto& run : runs) {
    auto os = open_out(history_path(dir, config.scenario, run.label));
    write_history_csv(os, run.result.history);
    report.summary.push_back(summarize(run.label, run.recycle, run.result, config.target));
  }
  if (config.scenario != Scenario::Verify) assert_pattern(config, report.summary, ks, unbounded_pcg, report.checks);

  {
    auto os = open_out(dir / "summary.csv");
    write_summary_csv(os, report.summary);
  }
  {
    auto os = open_out(dir / "checks.csv");
    write_checks_csv(os, report.checks);
  }

  const MeshStats stats = mesh_stats(mesh);
  write_config(meta, config);
  meta << "kappa = " << config.kappa() << '\n';
  meta << "mesh_vertices = " << stats.n_vertices << '\n';
  meta << "mesh_triangles = " << stats.n_triangles << '\n';
  meta << "mesh_h_max = " << stats.h_max << '\n';
  meta << "skeleton_dofs = " << p.n_sigma() << '\n';
  meta << "multi_trace_dofs = " << p.n_multi() << '\n';
  meta << "reference = " << reference_method << '\n';
  meta << "recycle = " << (config.recycle() ? "true" : "false") << '\n';
  if (!meta) throw Error("failed writing meta.txt");
  return report;
}

}  // namespace gosm
