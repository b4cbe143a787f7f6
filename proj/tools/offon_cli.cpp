// offon: command-line runner for the off-to-on IDS bandit experiments.
//
//   offon hidden-mode [--N 100 --N 1000] [--eta 0 --eta 0.01] ...
//   offon linear --N 20 --seeds 20 --format json --out linear.json
//   offon linearq --N 500 --seeds 1000
//   offon diag --N 50 --eta 0
//   offon sweep-eta --env hidden-mode --eta 0 --eta 0.01 --eta 0.05 --eta 0.1
//
// Precedence: built-in defaults < --config file < flags.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "offon/harness.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::vector<long> N;
  long T = 0;
  int seeds = 0;
  std::uint64_t seed = 0;
  std::vector<double> etas;
  std::vector<std::string> selectors;
  double q = 0, c = 0, beta = 0, ucb_alpha = 1;
  int M = 0, samples = 0, threads = 0;
  bool realized = false;
  std::string out = "-";
  std::string format = "csv";
  std::string csv_mode = "summary";
  std::string env = "hidden-mode";

  // Which flags were actually given.
  std::vector<CLI::Option*> given;
  CLI::Option *o_N{}, *o_T{}, *o_seeds{}, *o_seed{}, *o_eta{}, *o_sel{}, *o_q{}, *o_c{},
      *o_beta{}, *o_M{}, *o_samples{}, *o_alpha{}, *o_threads{}, *o_realized{};
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "JSON config file (flags override it)")
      ->check(CLI::ExistingFile);
  f.o_N = sub->add_option("--N", f.N, "offline dataset size(s), repeatable");
  f.o_T = sub->add_option("--T", f.T, "online horizon");
  f.o_seeds = sub->add_option("--seeds", f.seeds, "number of seeds");
  f.o_seed = sub->add_option("--seed", f.seed, "master seed");
  f.o_eta = sub->add_option("--eta", f.etas, "IDS regulariser(s), repeatable");
  f.o_sel = sub->add_option("--selector", f.selectors,
                            "selector label(s): greedy, ucb, ts, ids_<eta>");
  f.o_q = sub->add_option("--q", f.q, "offline odds parameter q");
  f.o_c = sub->add_option("--c", f.c, "linear-Q probe cost c");
  f.o_beta = sub->add_option("--beta", f.beta, "behaviour bias magnitude");
  f.o_M = sub->add_option("--M", f.M, "candidate set size");
  f.o_samples = sub->add_option("--samples", f.samples, "Monte Carlo posterior samples");
  f.o_alpha = sub->add_option("--ucb-alpha", f.ucb_alpha, "UCB std multiplier");
  f.o_threads = sub->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  f.o_realized = sub->add_flag("--realized", f.realized,
                               "record regret under the true mode instead of the belief");
  sub->add_option("--out", f.out, "output path, '-' for stdout");
  sub->add_option("--format", f.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--csv", f.csv_mode, "CSV layout: trace or summary")
      ->check(CLI::IsMember({"trace", "summary"}));
}

offon::ExperimentConfig build_config(offon::ExperimentKind kind, const Flags& f) {
  using offon::SelectorSpec;
  auto cfg = offon::ExperimentConfig::defaults(kind);
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw std::runtime_error("cannot read config '" + f.config_path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config '" + f.config_path + "': " + e.what());
    }
    cfg = offon::config_from_json(j, cfg);
  }
  if (*f.o_N) cfg.N = f.N;
  if (*f.o_T) cfg.T = f.T;
  if (*f.o_seeds) cfg.seeds = f.seeds;
  if (*f.o_seed) cfg.master_seed = f.seed;
  if (*f.o_q) cfg.q = f.q;
  if (*f.o_c) cfg.c = f.c;
  if (*f.o_beta) cfg.linear.beta = f.beta;
  if (*f.o_M) cfg.linear.num_candidates = f.M;
  if (*f.o_samples) cfg.mc_samples = f.samples;
  if (*f.o_threads) cfg.threads = f.threads;
  if (*f.o_realized) cfg.realized = f.realized;
  if (*f.o_sel) {
    cfg.selectors.clear();
    for (const auto& label : f.selectors)
      cfg.selectors.push_back(SelectorSpec::parse(label, f.ucb_alpha));
  }
  if (*f.o_alpha)
    for (auto& s : cfg.selectors)
      if (s.kind == offon::SelectorKind::ucb) s.ucb_alpha = f.ucb_alpha;
  if (*f.o_eta) {
    std::vector<SelectorSpec> kept;
    for (const auto& s : cfg.selectors)
      if (s.kind != offon::SelectorKind::ids) kept.push_back(s);
    for (double eta : f.etas) kept.push_back(SelectorSpec::ids(eta));
    cfg.selectors = std::move(kept);
  }
  return cfg;
}

offon::OutputFormat output_format(const Flags& f) {
  if (f.format == "json") return offon::OutputFormat::json;
  return f.csv_mode == "trace" ? offon::OutputFormat::csv_trace
                               : offon::OutputFormat::csv_summary;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Off-to-on information-directed sampling bandit experiments"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    std::optional<offon::ExperimentKind> kind;
  };
  const std::vector<Sub> subs{
      {"hidden-mode", "hidden-mode bandit table", offon::ExperimentKind::hidden_mode},
      {"linear", "biased linear contextual bandit table", offon::ExperimentKind::linear_bandit},
      {"linearq", "linear-Q separation instance (IDS_0 vs TS)", offon::ExperimentKind::linearq},
      {"diag", "linear-bandit information diagnostics", offon::ExperimentKind::diagnostics},
      {"sweep-eta", "IDS eta sweep on --env", std::nullopt},
  };
  std::vector<Flags> flags(subs.size());
  std::vector<CLI::App*> apps;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    auto* sub = app.add_subcommand(subs[i].name, subs[i].help);
    add_common(sub, flags[i]);
    if (!subs[i].kind)
      sub->add_option("--env", flags[i].env, "hidden-mode or linear")
          ->check(CLI::IsMember({"hidden-mode", "linear"}));
    apps.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!apps[i]->parsed()) continue;
      const Flags& f = flags[i];
      const auto kind = subs[i].kind.value_or(offon::parse_experiment_kind(f.env));
      auto cfg = build_config(kind, f);
      offon::TableResult result;
      if (!subs[i].kind) {
        std::vector<double> etas = f.etas;
        // Without --eta, a config file's IDS selectors define the sweep.
        if (etas.empty() && !f.config_path.empty())
          for (const auto& s : cfg.selectors)
            if (s.kind == offon::SelectorKind::ids) etas.push_back(s.eta);
        if (etas.empty()) {
          etas = kind == offon::ExperimentKind::hidden_mode
                     ? std::vector<double>{0.0, 0.01, 0.05, 0.1}
                     : std::vector<double>{0.0, 0.01, 0.05, 0.1, 0.5};
        }
        result = offon::sweep_eta(cfg, etas);
      } else {
        result = offon::run_table(cfg);
      }
      offon::emit(cfg, result, output_format(f), f.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "offon: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
