#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "offon/harness.hpp"
#include "offon/mode_env.hpp"

using namespace offon;

namespace {

ExperimentConfig small_linear() {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::linear_bandit);
  cfg.N = {10};
  cfg.T = 15;
  cfg.seeds = 2;
  cfg.linear.num_candidates = 24;
  cfg.mc_samples = 16;
  return cfg;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("hidden-mode single runs") {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::hidden_mode);
  const double p = p_from_offline(1000, cfg.q);
  for (std::size_t seed = 0; seed < 10; ++seed) {
    CHECK(run_one(cfg, SelectorSpec::ids(0.0), 1000, seed).final_regret() == 0.15);
    const auto greedy = run_one(cfg, SelectorSpec::greedy(), 1000, seed);
    CHECK(greedy.final_regret() == doctest::Approx(500 * p).epsilon(1e-12));
  }
  cfg.T = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("zero horizon gives zero regret") {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::linearq);
  cfg.T = 0;
  cfg.N = {0};  // p = 0.5: ceil(1/p) = 2 steps
  CHECK(horizon_for(cfg, 0) == 2);
  auto h = ExperimentConfig::defaults(ExperimentKind::hidden_mode);
  h.T = 0;
  for (const auto& s : {SelectorSpec::greedy(), SelectorSpec::thompson(), SelectorSpec::ids(0.0)}) {
    const auto tr = run_one(h, s, 100, 0);
    CHECK(tr.final_regret() == 0.0);
    CHECK(tr.regret.empty());
  }
}

TEST_CASE("traces are internally consistent") {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::hidden_mode);
  cfg.T = 50;
  for (const auto& s : {SelectorSpec::ucb(), SelectorSpec::thompson(), SelectorSpec::ids(0.05)}) {
    const auto tr = run_one(cfg, s, 200, 3);
    REQUIRE(tr.regret.size() == 50);
    REQUIRE(tr.cumulative.size() == 50);
    REQUIRE(tr.actions.size() == 50);
    REQUIRE(tr.chosen.size() == 50);
    double acc = 0.0;
    for (std::size_t t = 0; t < 50; ++t) {
      CHECK(tr.regret[t] >= 0.0);
      acc += tr.regret[t];
      CHECK(tr.cumulative[t] == acc);
      CHECK(tr.chosen[t].delta == tr.regret[t]);
    }
  }
}

TEST_CASE("run_one reproduces run_cell and is deterministic") {
  auto cfg = small_linear();
  const auto cell = run_cell(cfg, 10);
  REQUIRE(cell.size() == cfg.selectors.size());
  for (std::size_t k = 0; k < cfg.selectors.size(); ++k)
    for (std::size_t s = 0; s < static_cast<std::size_t>(cfg.seeds); ++s) {
      const auto one = run_one(cfg, cfg.selectors[k], 10, s);
      CHECK(one.regret == cell[k][s].regret);
      CHECK(one.actions == cell[k][s].actions);
    }
}

TEST_CASE("adding a selector leaves the others untouched") {
  auto cfg = small_linear();
  cfg.selectors = {SelectorSpec::thompson()};
  const auto alone = run_cell(cfg, 10);
  cfg.selectors = {SelectorSpec::greedy(), SelectorSpec::ids(0.5), SelectorSpec::thompson()};
  const auto together = run_cell(cfg, 10);
  for (std::size_t s = 0; s < 2; ++s) CHECK(alone[0][s].regret == together[2][s].regret);
}

TEST_CASE("every selector sees the same warm start") {
  // With T = 1 the first decision of greedy is fixed by the warm posterior,
  // the instance and the first context, all of which are selector-independent.
  auto cfg = small_linear();
  cfg.T = 1;
  cfg.selectors = {SelectorSpec::greedy()};
  const auto a = run_cell(cfg, 10);
  cfg.selectors = {SelectorSpec::thompson(), SelectorSpec::greedy()};
  const auto b = run_cell(cfg, 10);
  for (std::size_t s = 0; s < 2; ++s) CHECK(a[0][s].actions == b[1][s].actions);
}

TEST_CASE("output is identical for any thread count") {
  auto cfg = small_linear();
  cfg.N = {5, 10};
  cfg.seeds = 3;
  std::string out[2];
  for (int i = 0; i < 2; ++i) {
    cfg.threads = i == 0 ? 1 : 4;
    const auto res = run_table(cfg);
    std::ostringstream os;
    write_trace_csv(os, res.traces);
    write_summary_csv(os, res.rows);
    out[i] = os.str();
  }
  CHECK(out[0] == out[1]);
}

TEST_CASE("hidden-mode eta sweep") {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::hidden_mode);
  const auto res = sweep_eta(cfg, {0.0, 0.01, 0.05, 0.1});
  const double p = p_from_offline(1000, cfg.q);
  int checked = 0;
  for (const auto& row : res.rows) {
    if (!row.eta) continue;
    ++checked;
    if (row.N < 1000 || *row.eta == 0.0) {
      CHECK(row.mean == 0.15);
      CHECK(row.std == 0.0);
    } else {
      CHECK(row.mean == doctest::Approx(500 * p).epsilon(1e-12));
    }
  }
  CHECK(checked == 16);

  const auto none = sweep_eta(cfg, {});
  for (const auto& row : none.rows) CHECK_FALSE(row.eta.has_value());
  CHECK(none.rows.size() == 3 * cfg.N.size());
}

TEST_CASE("aggregate uses the sample std") {
  RegretTrace a, b, c;
  a.algorithm = b.algorithm = c.algorithm = "ts";
  a.cumulative = {1.0};
  b.cumulative = {2.0};
  c.cumulative = {4.0};
  const auto row = aggregate({a, b, c});
  CHECK(row.mean == doctest::Approx(7.0 / 3));
  const double var = (std::pow(1 - 7.0 / 3, 2) + std::pow(2 - 7.0 / 3, 2) + std::pow(4 - 7.0 / 3, 2)) / 2;
  CHECK(row.std == doctest::Approx(std::sqrt(var)));
  CHECK(row.seeds == 3);
}

TEST_CASE("CSV round trip gives identical rows") {
  auto cfg = small_linear();
  cfg.N = {5, 10};
  const auto res = run_table(cfg);
  std::stringstream ss;
  write_trace_csv(ss, res.traces);
  const auto back = rows_from_trace_csv(ss);
  REQUIRE(back.size() == res.rows.size());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i] == res.rows[i]);

  auto h = ExperimentConfig::defaults(ExperimentKind::hidden_mode);
  h.seeds = 200;
  h.selectors = {SelectorSpec::thompson(), SelectorSpec::ids(0.0)};
  const auto hr = run_table(h);
  std::stringstream hs;
  write_trace_csv(hs, hr.traces);
  CHECK(rows_from_trace_csv(hs) == hr.rows);
}

TEST_CASE("CSV line counts") {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::hidden_mode);
  cfg.N = {100};
  cfg.seeds = 1;
  cfg.T = 40;
  cfg.selectors = {SelectorSpec::greedy()};
  const auto res = run_table(cfg);
  std::ostringstream trace, summary;
  write_trace_csv(trace, res.traces);
  write_summary_csv(summary, res.rows);
  CHECK(count_lines(trace.str()) == 1 + 1 + 40);
  CHECK(count_lines(summary.str()) == 1 + 1);
  CHECK(trace.str().rfind(kTraceCsvHeader, 0) == 0);
  CHECK(summary.str().rfind(kSummaryCsvHeader, 0) == 0);
}

TEST_CASE("summary JSON follows the documented layout") {
  auto cfg = small_linear();
  cfg.diagnostics = true;
  const auto res = run_table(cfg);
  const auto j = summary_json(cfg, res);
  CHECK_NOTHROW(validate_summary_json(j));
  CHECK(j["cells"].size() == res.rows.size());
  CHECK(j["config"]["T"] == 15);

  auto broken = j;
  broken.erase("cells");
  CHECK_THROWS(validate_summary_json(broken));
  broken = j;
  broken["cells"][0]["mean"] = "x";
  CHECK_THROWS(validate_summary_json(broken));
}

TEST_CASE("config JSON round trip") {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::linear_bandit);
  cfg.N = {7, 9};
  cfg.T = 33;
  cfg.master_seed = 42;
  cfg.linear.beta = 2.5;
  cfg.selectors = {SelectorSpec::ucb(2.0), SelectorSpec::ids(0.05)};
  const auto back = config_from_json(config_to_json(cfg),
                                     ExperimentConfig::defaults(ExperimentKind::linear_bandit));
  CHECK(back.N == cfg.N);
  CHECK(back.T == 33);
  CHECK(back.master_seed == 42);
  CHECK(back.linear.beta == 2.5);
  REQUIRE(back.selectors.size() == 2);
  CHECK(back.selectors[0].ucb_alpha == 2.0);
  CHECK(back.selectors[1].label() == "ids_0.05");
  CHECK(config_to_json(back) == config_to_json(cfg));
}

TEST_CASE("diagnostics: residual info equals the summed logged gains") {
  auto cfg = small_linear();
  cfg.diagnostics = true;
  const auto res = run_table(cfg);
  for (const auto& tr : res.traces) {
    REQUIRE(tr.diagnostics.has_value());
    double gains = 0.0;
    for (const auto& s : tr.chosen) gains += s.gain;
    CHECK(std::abs(tr.diagnostics->residual_info - gains) <= 1e-8);
    CHECK(std::abs(tr.diagnostics->gain_sum - gains) <= 1e-12);
    CHECK(tr.diagnostics->coverage >= 0.0);
    CHECK(tr.diagnostics->elliptical > 0.0);
  }
  CHECK_FALSE(res.diagnostics.is_null());
}

TEST_CASE("config validation") {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::hidden_mode);
  cfg.seeds = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ExperimentConfig::defaults(ExperimentKind::hidden_mode);
  cfg.selectors = {SelectorSpec::ids(-0.1)};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ExperimentConfig::defaults(ExperimentKind::hidden_mode);
  cfg.N.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_kind("nope"), std::invalid_argument);
  CHECK(parse_experiment_kind(to_string(ExperimentKind::linearq)) == ExperimentKind::linearq);
}

TEST_CASE("emit reports unwritable paths") {
  auto cfg = ExperimentConfig::defaults(ExperimentKind::hidden_mode);
  cfg.N = {100};
  cfg.seeds = 1;
  const auto res = run_table(cfg);
  try {
    emit(cfg, res, OutputFormat::json, "/nonexistent-dir/out.json");
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/out.json") != std::string::npos);
  }
}
