#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "offon/harness.hpp"

namespace offon {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& s, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error(std::string("bad ") + what + " field '" + s + "'");
  return value;
}

std::string eta_field(const std::optional<double>& eta) {
  return eta ? format_double(*eta) : std::string();
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

void write_trace_csv(std::ostream& os, const std::vector<RegretTrace>& traces) {
  os << kTraceCsvHeader << '\n';
  for (const auto& t : traces) {
    const std::string prefix =
        t.algorithm + ',' + std::to_string(t.N) + ',' + eta_field(t.eta) + ',' +
        std::to_string(t.seed) + ',';
    os << prefix << "0,0,0\n";
    for (std::size_t i = 0; i < t.regret.size(); ++i)
      os << prefix << (i + 1) << ',' << format_double(t.regret[i]) << ','
         << format_double(t.cumulative[i]) << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kSummaryCsvHeader << '\n';
  for (const auto& r : rows)
    os << r.algorithm << ',' << r.N << ',' << eta_field(r.eta) << ',' << r.seeds << ','
       << format_double(r.mean) << ',' << format_double(r.std) << '\n';
}

std::vector<ResultRow> rows_from_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTraceCsvHeader)
    throw std::runtime_error("trace CSV: missing or unexpected header");

  using CellKey = std::tuple<std::string, long, std::string>;
  std::vector<CellKey> order;
  // Per cell: seeds in first-seen order with the cumulative at their last step.
  std::map<CellKey, std::vector<std::pair<std::size_t, RegretTrace>>> cells;

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw std::runtime_error("trace CSV: expected 7 fields: " + line);
    CellKey key{f[0], parse_number<long>(f[1], "N"), f[2]};
    auto [it, inserted] = cells.try_emplace(key);
    if (inserted) order.push_back(key);
    auto& seeds = it->second;
    const auto seed = parse_number<std::size_t>(f[3], "seed");
    if (seeds.empty() || seeds.back().first != seed) {
      RegretTrace t;
      t.algorithm = f[0];
      t.N = std::get<1>(key);
      if (!f[2].empty()) t.eta = parse_number<double>(f[2], "eta");
      t.seed = seed;
      seeds.emplace_back(seed, std::move(t));
    }
    const auto step = parse_number<long>(f[4], "step");
    if (step > 0) {
      auto& t = seeds.back().second;
      t.regret.push_back(parse_number<double>(f[5], "expected_regret"));
      t.cumulative.push_back(parse_number<double>(f[6], "cumulative_regret"));
    }
  }

  std::vector<ResultRow> rows;
  for (const auto& key : order) {
    std::vector<RegretTrace> traces;
    for (auto& [seed, t] : cells[key]) traces.push_back(std::move(t));
    rows.push_back(aggregate(traces));
  }
  return rows;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json selectors = nlohmann::json::array();
  double ucb_alpha = 1.0;
  for (const auto& s : cfg.selectors) {
    selectors.push_back(s.label());
    if (s.kind == SelectorKind::ucb) ucb_alpha = s.ucb_alpha;
  }
  return {
      {"experiment", to_string(cfg.kind)},
      {"N", cfg.N},
      {"T", cfg.T},
      {"seeds", cfg.seeds},
      {"seed", cfg.master_seed},
      {"selectors", selectors},
      {"ucb_alpha", ucb_alpha},
      {"q", cfg.q},
      {"c", cfg.c},
      {"beta", cfg.linear.beta},
      {"M", cfg.linear.num_candidates},
      {"sigma_env", cfg.linear.noise_std},
      {"state_dim", cfg.linear.state_dim},
      {"action_dim", cfg.linear.action_dim},
      {"feature_dim", cfg.linear.feature_dim},
      {"weight_scale", cfg.linear.weight_scale},
      {"feature_gain", cfg.linear.feature_gain},
      {"samples", cfg.mc_samples},
      {"lambda", cfg.prior_precision},
      {"sigma2", cfg.model_noise_var},
      {"realized", cfg.realized},
      {"record_scores", cfg.record_scores},
      {"diagnostics", cfg.diagnostics},
      {"track_discovery", cfg.track_discovery},
  };
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  try {
    if (j.contains("N")) {
      const auto& n = j.at("N");
      base.N = n.is_array() ? n.get<std::vector<long>>() : std::vector<long>{n.get<long>()};
    }
    take("T", base.T);
    take("seeds", base.seeds);
    take("seed", base.master_seed);
    take("q", base.q);
    take("c", base.c);
    take("beta", base.linear.beta);
    take("M", base.linear.num_candidates);
    take("sigma_env", base.linear.noise_std);
    take("state_dim", base.linear.state_dim);
    take("action_dim", base.linear.action_dim);
    take("feature_dim", base.linear.feature_dim);
    take("weight_scale", base.linear.weight_scale);
    take("feature_gain", base.linear.feature_gain);
    take("samples", base.mc_samples);
    take("lambda", base.prior_precision);
    take("sigma2", base.model_noise_var);
    take("realized", base.realized);
    take("record_scores", base.record_scores);
    take("diagnostics", base.diagnostics);
    take("track_discovery", base.track_discovery);
    take("threads", base.threads);

    double ucb_alpha = 1.0;
    for (const auto& s : base.selectors)
      if (s.kind == SelectorKind::ucb) ucb_alpha = s.ucb_alpha;
    take("ucb_alpha", ucb_alpha);
    if (j.contains("selectors")) {
      base.selectors.clear();
      for (const auto& label : j.at("selectors").get<std::vector<std::string>>())
        base.selectors.push_back(SelectorSpec::parse(label, ucb_alpha));
    } else {
      for (auto& s : base.selectors)
        if (s.kind == SelectorKind::ucb) s.ucb_alpha = ucb_alpha;
    }
    if (j.contains("eta")) {
      std::vector<SelectorSpec> kept;
      for (const auto& s : base.selectors)
        if (s.kind != SelectorKind::ids) kept.push_back(s);
      for (double eta : j.at("eta").get<std::vector<double>>())
        kept.push_back(SelectorSpec::ids(eta));
      base.selectors = std::move(kept);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return base;
}

nlohmann::json summary_json(const ExperimentConfig& cfg, const TableResult& result) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& r : result.rows) {
    cells.push_back({{"algorithm", r.algorithm},
                     {"N", r.N},
                     {"eta", r.eta ? nlohmann::json(*r.eta) : nlohmann::json(nullptr)},
                     {"seeds", r.seeds},
                     {"T", horizon_for(cfg, r.N)},
                     {"mean", r.mean},
                     {"std", r.std}});
  }
  nlohmann::json out{{"config", config_to_json(cfg)}, {"cells", cells}};
  out["diagnostics"] = result.diagnostics;
  return out;
}

void validate_summary_json(const nlohmann::json& j) {
  auto fail = [](const std::string& why) {
    throw std::runtime_error("summary JSON: " + why);
  };
  if (!j.is_object()) fail("root must be an object");
  for (const char* key : {"config", "cells", "diagnostics"})
    if (!j.contains(key)) fail(std::string("missing '") + key + "'");
  if (!j["config"].is_object()) fail("'config' must be an object");
  if (!j["config"].contains("experiment")) fail("config lacks 'experiment'");
  if (!j["cells"].is_array()) fail("'cells' must be an array");
  for (const auto& c : j["cells"]) {
    if (!c.is_object()) fail("cell must be an object");
    if (!c.contains("algorithm") || !c["algorithm"].is_string()) fail("cell.algorithm");
    if (!c.contains("N") || !c["N"].is_number_integer()) fail("cell.N");
    if (!c.contains("eta") || !(c["eta"].is_null() || c["eta"].is_number())) fail("cell.eta");
    if (!c.contains("seeds") || !c["seeds"].is_number_integer()) fail("cell.seeds");
    if (!c.contains("T") || !c["T"].is_number_integer()) fail("cell.T");
    for (const char* k : {"mean", "std"})
      if (!c.contains(k) || !c[k].is_number()) fail(std::string("cell.") + k);
    if (c["std"].get<double>() < 0.0) fail("cell.std must be >= 0");
  }
  if (!(j["diagnostics"].is_null() || j["diagnostics"].is_object()))
    fail("'diagnostics' must be null or an object");
}

void emit(const ExperimentConfig& cfg, const TableResult& result, OutputFormat format,
          const std::string& path) {
  if (result.rows.empty()) throw std::invalid_argument("nothing to emit");
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (path != "-") {
    file.open(path, std::ios::out | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
    os = &file;
  }
  switch (format) {
    case OutputFormat::csv_trace: write_trace_csv(*os, result.traces); break;
    case OutputFormat::csv_summary: write_summary_csv(*os, result.rows); break;
    case OutputFormat::json: *os << summary_json(cfg, result).dump(2) << '\n'; break;
  }
  os->flush();
  if (!*os) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace offon
