#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gosm/experiment.hpp"

using namespace gosm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("gosm_test_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ScenarioConfig strip(Scenario s, const fs::path& out) {
  ScenarioConfig c;
  c.scenario = s;
  c.outer = {0, 0, 2, 1};
  c.hole.reset();
  c.wavelength = 0.5;
  c.ppw = 10;
  c.subdomains = 2;
  c.samples = 20;
  c.out_dir = out;
  return c;
}

ScenarioConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

}  // namespace

TEST_CASE("config parsing") {
  const ScenarioConfig d = parse("");
  CHECK(d.scenario == Scenario::Fig3);
  CHECK(d.kappa() == doctest::Approx(8.0 * M_PI));
  CHECK(d.domain().target_h == doctest::Approx(0.25 / 20.0));
  CHECK(d.recycle());
  CHECK(d.k_max_list() == std::vector<KmaxEntry>{5, 10});

  const ScenarioConfig c = parse(
      "# comment\n"
      "scenario = fig2-right   # trailing comment\n"
      "k_max = 1, 3,inf\n"
      "domain_hole = none\n"
      "domain_outer = 0,0,3,1\n"
      "wavelength = 0.5\n"
      "rates = false\n"
      "impedance_form = literal\n");
  CHECK(c.scenario == Scenario::Fig2Right);
  CHECK_FALSE(c.recycle());
  CHECK(c.k_max_list() == std::vector<KmaxEntry>{1, 3, std::nullopt});
  CHECK_FALSE(c.hole.has_value());
  CHECK(c.outer.x1 == 3.0);
  CHECK_FALSE(c.rates);
  CHECK(c.form == ImpedanceForm::Literal);

  CHECK(parse("scenario = table-kmax").k_max_list() == std::vector<KmaxEntry>{20, 15, 10, 5, 3, 2, 1});
  CHECK(parse("scenario = fig2-left").k_max_list() == std::vector<KmaxEntry>{std::nullopt});
  CHECK(parse("scenario = fig2-right").k_max_list().back() == std::nullopt);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse("colour = blue"), InvalidInput);
  CHECK_THROWS_AS(parse("ppw"), InvalidInput);
  CHECK_THROWS_AS(parse("ppw = many"), InvalidInput);
  CHECK_THROWS_AS(parse("alpha = 1.5"), InvalidInput);
  CHECK_THROWS_AS(parse("subdomains = 0"), InvalidInput);
  CHECK_THROWS_AS(parse("scenario = fig4"), InvalidInput);
  CHECK_THROWS_AS(parse("k_max = -2"), InvalidInput);
  CHECK_THROWS_AS(parse("rates = maybe"), InvalidInput);
  CHECK_THROWS_AS(parse("domain_outer = 0,0,1"), InvalidInput);
  CHECK_THROWS_AS(load_config("/nonexistent/gosm.cfg"), InvalidInput);
}

TEST_CASE("config write and read back") {
  for (Scenario s : {Scenario::Fig2Left, Scenario::Fig2Right, Scenario::Fig3, Scenario::TableKmax, Scenario::Verify}) {
    ScenarioConfig c = parse("seed = 99\nalpha = 0.3\nlayers = 2\n");
    c.scenario = s;
    std::ostringstream first;
    write_config(first, c);
    std::ostringstream second;
    write_config(second, parse(first.str()));
    CHECK(first.str() == second.str());
  }
}

TEST_CASE("csv round trips") {
  ConvergenceHistory h;
  h.records.push_back({0, 1.0, 0});
  h.records.push_back({1, 0.123456789012345678, 7});
  h.records.push_back({2, 1e-300, 3});
  std::stringstream hs;
  write_history_csv(hs, h);
  const auto rows = read_history_csv(hs);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].rel_error == h.records[1].rel_error);
  CHECK(rows[2].rel_error == 1e-300);
  CHECK(rows[1].pcg_iters == 7);

  std::vector<SummaryRow> summary{{"exact", false, 12, std::nan("")}, {"1", true, std::nullopt, 0.25}};
  std::stringstream ss;
  write_summary_csv(ss, summary);
  CHECK(ss.str().rfind("k_max,recycle,iters_to_target,plateau_level\n", 0) == 0);
  const auto back = read_summary_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].iters_to_target == 12);
  CHECK(std::isnan(back[0].plateau_level));
  CHECK_FALSE(back[1].iters_to_target.has_value());
  CHECK(back[1].plateau_level == 0.25);
  CHECK(back[1].recycle);

  std::ostringstream cs;
  write_checks_csv(cs, {{"unitarity", true, 1e-15, 1e-10}});
  CHECK(cs.str().rfind("check,passed,worst,tolerance\n", 0) == 0);
  CHECK(kmax_label(std::nullopt) == "inf");
  CHECK(kmax_label(3) == "3");
}

TEST_CASE("cross-check detects disagreement") {
  TempDir tmp;
  ConvergenceHistory h;
  for (int n = 0; n <= 4; ++n) h.records.push_back({n, std::pow(0.1, n), 0});
  {
    std::ofstream os(history_path(tmp.path, Scenario::Fig3, "exact"));
    write_history_csv(os, h);
    std::ofstream ss(tmp.path / "summary.csv");
    write_summary_csv(ss, {{"exact", false, 3, std::nan("")}});
  }
  CHECK_NOTHROW(cross_check_summary(tmp.path, Scenario::Fig3, 1e-2));
  CHECK_THROWS_AS(cross_check_summary(tmp.path, Scenario::Fig3, 1e-3), Error);
  {
    std::ofstream ss(tmp.path / "summary.csv");
    write_summary_csv(ss, {{"5", true, 3, std::nan("")}});
  }
  CHECK_THROWS_AS(cross_check_summary(tmp.path, Scenario::Fig3, 1e-2), Error);
}

TEST_CASE("verify scenario on a strip") {
  TempDir a, b;
  const ScenarioReport r = run_scenario(strip(Scenario::Verify, a.path));
  for (const auto& c : r.checks) {
    INFO(c.name << " worst " << c.worst << " tol " << c.tolerance);
    CHECK(c.passed);
  }
  REQUIRE(r.rates.has_value());
  CHECK(r.rates->rho < 1.0);
  for (const char* f : {"summary.csv", "checks.csv", "rates.csv", "meta.txt"}) CHECK(fs::exists(a.path / f));
  CHECK_NOTHROW(cross_check_summary(a.path, Scenario::Verify, 1e-10));

  // reruns are byte-identical
  run_scenario(strip(Scenario::Verify, b.path));
  for (const auto& entry : fs::directory_iterator(a.path)) {
    if (entry.path().filename() == "meta.txt") continue;
    INFO(entry.path().filename().string());
    CHECK(slurp(entry.path()) == slurp(b.path / entry.path().filename()));
  }
}

TEST_CASE("fig2 scenarios on a strip") {
  TempDir tmp;
  ScenarioConfig c = strip(Scenario::Fig2Right, tmp.path);
  c.rates = false;
  c.k_max = {1, std::nullopt};
  const ScenarioReport r = run_scenario(c);
  REQUIRE(r.summary.size() == 3);
  CHECK(r.summary[0].k_max == "exact");
  CHECK(r.summary[0].iters_to_target.has_value());
  CHECK(r.summary[2].k_max == "inf");
  CHECK(r.summary[2].iters_to_target == r.summary[0].iters_to_target);
  CHECK_NOTHROW(cross_check_summary(tmp.path, Scenario::Fig2Right, c.target));
  CHECK(fs::exists(history_path(tmp.path, Scenario::Fig2Right, "1")));
}
