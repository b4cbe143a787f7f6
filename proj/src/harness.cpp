#include "offon/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "offon/infodiag.hpp"
#include "offon/mode_env.hpp"
#include "offon/posterior.hpp"

namespace offon {

namespace {

// Cap on the untruncated TS discovery continuation.
constexpr long kDiscoveryCap = 100'000'000;

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

RegretTrace start_trace(const SelectorSpec& spec, long N, std::size_t seed, long T) {
  RegretTrace trace;
  trace.algorithm = spec.label();
  trace.N = N;
  if (spec.kind == SelectorKind::ids) trace.eta = spec.eta;
  trace.seed = seed;
  trace.regret.reserve(static_cast<std::size_t>(T));
  trace.cumulative.reserve(static_cast<std::size_t>(T));
  trace.actions.reserve(static_cast<std::size_t>(T));
  return trace;
}

void record(RegretTrace& trace, std::size_t action, double regret) {
  trace.actions.push_back(action);
  trace.regret.push_back(regret);
  trace.cumulative.push_back(
      (trace.cumulative.empty() ? 0.0 : trace.cumulative.back()) + regret);
}

double score_eta(const SelectorSpec& spec) {
  return spec.kind == SelectorKind::ids ? spec.eta : 0.0;
}

BinaryModeEnv make_mode_env(const ExperimentConfig& cfg, long N, std::size_t seed) {
  Rng rng(split_seed(cfg.master_seed, seed, kEnvStream));
  if (cfg.kind == ExperimentKind::linearq) {
    const LinearQInstance inst{cfg.c, cfg.q, N};
    std::bernoulli_distribution mode(inst.p());
    return make_linq(inst, mode(rng) ? 1 : 0);
  }
  const double p = p_from_offline(N, cfg.q);
  std::bernoulli_distribution mode(p);
  return make_hidden_mode(p, mode(rng) ? 1 : 0);
}

RegretTrace run_mode(const ExperimentConfig& cfg, const SelectorSpec& spec, long N,
                     std::size_t seed) {
  const long T = horizon_for(cfg, N);
  BinaryModeEnv env = make_mode_env(cfg, N, seed);
  Rng rng(split_seed(cfg.master_seed, seed, label_key(spec.label())));
  RegretTrace trace = start_trace(spec, N, seed, T);
  const double eta = score_eta(spec);

  for (long t = 0; t < T; ++t) {
    const ModeBeliefModel belief(env);
    Choice choice = select(spec, belief, rng);
    if (cfg.record_scores) {
      const BeliefScores scores =
          choice.scores ? std::move(*choice.scores) : belief.scores(rng);
      trace.chosen.push_back(scores.at(choice.action, eta));
    }
    const auto step = env.step(choice.action);
    record(trace, choice.action, cfg.realized ? step.realized_regret : step.expected_regret);
    if (step.revealed && !trace.discovery_step) trace.discovery_step = t + 1;
  }

  // Keep drawing TS decisions past the horizon until it first plays an
  // informative action, so the hitting time is observed untruncated.
  if (cfg.track_discovery && !trace.discovery_step &&
      spec.kind == SelectorKind::thompson && !env.belief().resolved()) {
    for (long t = T; t < kDiscoveryCap; ++t) {
      const ModeBeliefModel belief(env);
      const auto action = select(spec, belief, rng).action;
      if (env.actions()[action].informative) {
        trace.discovery_step = t + 1;
        break;
      }
    }
  }
  return trace;
}

struct WarmStart {
  LinearContextualEnv env;
  GaussianLinearPosterior posterior;
};

WarmStart make_warm_start(const ExperimentConfig& cfg, long N, std::size_t seed) {
  LinearContextualEnv env(cfg.linear, split_seed(cfg.master_seed, seed, kEnvStream));
  Rng offline_rng(split_seed(cfg.master_seed, seed, kOfflineStream));
  auto post = GaussianLinearPosterior::prior(cfg.linear.feature_dim, cfg.prior_precision,
                                             cfg.model_noise_var);
  for (const auto& s : env.generate_offline(N, offline_rng)) post.absorb(s.phi, s.reward);
  return {std::move(env), std::move(post)};
}

RegretTrace run_linear(const ExperimentConfig& cfg, const SelectorSpec& spec, long N,
                       std::size_t seed, const WarmStart& warm) {
  const long T = horizon_for(cfg, N);
  LinearContextualEnv env = warm.env;
  GaussianLinearPosterior post = warm.posterior;
  const auto key = label_key(spec.label());
  Rng rng(split_seed(cfg.master_seed, seed, key));
  Rng score_rng(split_seed(cfg.master_seed, seed, key, kScoreStream));
  RegretTrace trace = start_trace(spec, N, seed, T);
  const double eta = score_eta(spec);
  const bool want_scores = cfg.record_scores || cfg.diagnostics;
  const auto d = cfg.linear.feature_dim;
  Eigen::MatrixXd visitation = Eigen::MatrixXd::Zero(cfg.diagnostics ? d : 0, cfg.diagnostics ? d : 0);
  double gain_sum = 0.0;

  for (long t = 0; t < T; ++t) {
    const CandidateSet& cands = env.observe();
    const LinearBelief belief(post, cands, cfg.mc_samples);
    Choice choice = select(spec, belief, rng);
    const auto a = static_cast<Eigen::Index>(choice.action);
    if (want_scores) {
      ActionScore chosen;
      if (choice.scores) {
        chosen = choice.scores->at(choice.action, eta);
      } else {
        // Only the chosen action's Delta is needed, but it is defined against
        // the whole candidate set.
        const Eigen::VectorXd deltas = mc_deltas(post, cands, cfg.mc_samples, score_rng);
        chosen.delta = deltas[a];
        chosen.gain = post.info_gain(cands.features().row(a).transpose());
        chosen.psi = psi(chosen.delta, chosen.gain, eta);
      }
      gain_sum += chosen.gain;
      if (cfg.record_scores) trace.chosen.push_back(chosen);
    }
    const Eigen::VectorXd phi = cands.features().row(a).transpose();
    const auto step = env.step(choice.action);
    if (cfg.diagnostics) visitation.noalias() += phi * phi.transpose();
    post.absorb(phi, step.reward);
    record(trace, choice.action, step.expected_regret);
  }

  if (cfg.diagnostics) {
    RunDiagnostics diag;
    diag.residual_info = 0.5 * (post.logdet() - warm.posterior.logdet());
    diag.gain_sum = gain_sum;
    const std::vector<Eigen::MatrixXd> grams{warm.posterior.precision()};
    diag.elliptical = elliptical_L(grams, static_cast<double>(T), static_cast<int>(d));
    if (T > 0 && N > 0) {
      CoverageInputs cov{grams, {static_cast<double>(N)}, {visitation / static_cast<double>(T)}};
      diag.coverage = coverage_coeff(cov).aggregate;
    }
    trace.diagnostics = diag;
  }
  return trace;
}

bool is_linear(ExperimentKind kind) {
  return kind == ExperimentKind::linear_bandit || kind == ExperimentKind::diagnostics;
}

// Shifted by the first value, so n copies of x average to exactly x.
double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  const double shift = xs.front();
  double s = 0.0;
  for (double x : xs) s += x - shift;
  return shift + s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double shift = xs.front();
  double s = 0.0, ss = 0.0;
  for (double x : xs) {
    s += x - shift;
    ss += (x - shift) * (x - shift);
  }
  const double n = static_cast<double>(xs.size());
  return std::sqrt(std::max(0.0, (ss - s * s / n) / (n - 1.0)));
}

nlohmann::json linear_diagnostics(const ExperimentConfig& cfg,
                                  const std::vector<RegretTrace>& traces,
                                  const std::vector<ResultRow>& rows) {
  nlohmann::json cells = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& row : rows) {
    std::vector<double> info, gains, cover, ell;
    for (int s = 0; s < row.seeds; ++s) {
      const auto& d = *traces[offset + static_cast<std::size_t>(s)].diagnostics;
      info.push_back(d.residual_info);
      gains.push_back(d.gain_sum);
      cover.push_back(d.coverage);
      ell.push_back(d.elliptical);
    }
    offset += static_cast<std::size_t>(row.seeds);
    const long T = horizon_for(cfg, row.N);
    BoundInputs b;
    b.H = 1;
    b.d = cfg.linear.feature_dim;
    b.T = static_cast<double>(T);
    b.N = static_cast<double>(std::max(row.N, 1L));
    b.eta = row.eta.value_or(0.0);
    b.residual_info = mean_of(info);
    const auto branches = theorem1_branches(b, mean_of(ell), mean_of(cover));
    nlohmann::json cell{
        {"algorithm", row.algorithm},
        {"N", row.N},
        {"residual_info", b.residual_info},
        {"gain_sum", mean_of(gains)},
        {"coverage_dagger", mean_of(cover)},
        {"elliptical_L", mean_of(ell)},
        {"ratio_constant", b.ratio_constant()},
        {"master_rhs", master_rhs(b)},
        {"theorem1", {{"sqrt_t_branch", branches.sqrt_t},
                      {"warm_start_branch", branches.warm_start},
                      {"bound", branches.bound()}}},
    };
    cell["eta"] = row.eta ? nlohmann::json(*row.eta) : nlohmann::json(nullptr);
    cells.push_back(std::move(cell));
  }
  return {{"cells", cells}};
}

nlohmann::json separation_diagnostics(const ExperimentConfig& cfg,
                                      const std::vector<RegretTrace>& traces) {
  const auto structure = separation_structure(linq_actions(cfg.c), linq::kSafe,
                                              linq::kReveal, linq::kProbe);
  nlohmann::json cells = nlohmann::json::array();
  for (long N : cfg.N) {
    const LinearQInstance inst{cfg.c, cfg.q, N};
    const double p = inst.p();
    const long T = horizon_for(cfg, N);
    const auto ts = ts_lower_bound(p, structure.d_plus, structure.d_minus, T);
    nlohmann::json cell{
        {"N", N},
        {"p", p},
        {"T", T},
        {"c0", structure.c0},
        {"c1", structure.c1},
        {"d_plus", structure.d_plus},
        {"d_minus", structure.d_minus},
        {"ids_selects_probe", ids_selects_probe(p, cfg.c)},
        {"strict_probe_condition",
         strict_probe_condition(p, structure.c0, structure.c1, structure.d_minus)},
        {"separation_condition", separation_condition(p, structure.c0, structure.c1,
                                                      structure.d_plus, structure.d_minus)},
        {"ids_upper_bound", ids_upper_bound(p, structure.c0, structure.c1)},
        {"ts_lower_bound_finite_t", ts.finite_t},
        {"ts_threshold_t", ts.threshold_t},
        {"ts_lower_bound_threshold", ts.threshold_value},
        {"separation_ratio", separation_ratio(structure.d_plus, structure.d_minus, structure.c0)},
    };
    std::vector<double> hits;
    for (const auto& tr : traces)
      if (tr.N == N && tr.algorithm == "ts" && tr.discovery_step)
        hits.push_back(static_cast<double>(*tr.discovery_step));
    if (!hits.empty()) {
      cell["ts_discovery_mean"] = mean_of(hits);
      cell["ts_discovery_se"] = sample_std(hits) / std::sqrt(static_cast<double>(hits.size()));
      cell["ts_discovery_expected"] = 1.0 / p;
    }
    cells.push_back(std::move(cell));
  }
  return {{"assumptions", {{"cell_optimal", structure.cell_optimal},
                           {"positive_gaps", structure.positive_gaps},
                           {"information_split", structure.information_split},
                           {"vanilla_convention", structure.vanilla_convention}}},
          {"cells", cells}};
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::hidden_mode: return "hidden-mode";
    case ExperimentKind::linear_bandit: return "linear";
    case ExperimentKind::linearq: return "linearq";
    case ExperimentKind::diagnostics: return "diag";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "hidden-mode" || name == "hidden") return ExperimentKind::hidden_mode;
  if (name == "linear" || name == "linear-bandit") return ExperimentKind::linear_bandit;
  if (name == "linearq") return ExperimentKind::linearq;
  if (name == "diag" || name == "diagnostics") return ExperimentKind::diagnostics;
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

std::vector<SelectorSpec> ExperimentConfig::standard_selectors(
    const std::vector<double>& etas, double ucb_alpha) {
  std::vector<SelectorSpec> out{SelectorSpec::greedy(), SelectorSpec::ucb(ucb_alpha),
                                SelectorSpec::thompson()};
  for (double eta : etas) out.push_back(SelectorSpec::ids(eta));
  return out;
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  switch (kind) {
    case ExperimentKind::hidden_mode:
      cfg.N = {100, 200, 300, 1000};
      cfg.T = 500;
      cfg.seeds = 10;
      cfg.selectors = standard_selectors({0.0}, 1.0);
      break;
    case ExperimentKind::linear_bandit:
      cfg.N = {20, 50, 100};
      cfg.T = 200;
      cfg.seeds = 20;
      cfg.selectors = standard_selectors({0.5}, 1.0);
      break;
    case ExperimentKind::linearq:
      cfg.N = {300, 500, 1000};
      cfg.T = 0;
      cfg.seeds = 1000;
      cfg.selectors = {SelectorSpec::ids(0.0), SelectorSpec::thompson()};
      cfg.track_discovery = true;
      break;
    case ExperimentKind::diagnostics:
      cfg.N = {20, 50, 100};
      cfg.T = 200;
      cfg.seeds = 5;
      cfg.selectors = {SelectorSpec::ids(0.0)};
      cfg.diagnostics = true;
      break;
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  if (N.empty()) throw std::invalid_argument("at least one N is required");
  for (long n : N)
    if (n < 0) throw std::invalid_argument("N must be >= 0");
  if (T < 0) throw std::invalid_argument("T must be >= 0");
  if (T == 0 && kind != ExperimentKind::linearq)
    throw std::invalid_argument("T must be >= 1");
  if (seeds < 1) throw std::invalid_argument("seeds must be >= 1");
  if (selectors.empty()) throw std::invalid_argument("no selectors configured");
  for (const auto& s : selectors) {
    if (!(s.eta >= 0.0)) throw std::invalid_argument("eta must be >= 0");
    if (!(s.ucb_alpha >= 0.0)) throw std::invalid_argument("ucb alpha must be >= 0");
  }
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
  if (kind == ExperimentKind::linearq && !(c > 0.0 && c < 0.5))
    throw std::invalid_argument("c must lie in (0, 1/2)");
  if (is_linear(kind)) {
    linear.validate();
    if (mc_samples < 1) throw std::invalid_argument("samples must be >= 1");
    if (!(prior_precision > 0.0)) throw std::invalid_argument("lambda must be > 0");
    if (!(model_noise_var > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
  }
  if (diagnostics && is_linear(kind))
    for (long n : N)
      if (n < 1) throw std::invalid_argument("diagnostics need N >= 1 (coverage)");
}

long horizon_for(const ExperimentConfig& cfg, long N) {
  if (cfg.kind == ExperimentKind::linearq && cfg.T == 0)
    return static_cast<long>(std::ceil(1.0 / p_from_offline(N, cfg.q)));
  return cfg.T;
}

RegretTrace run_one(const ExperimentConfig& cfg, const SelectorSpec& selector, long N,
                    std::size_t seed) {
  if (is_linear(cfg.kind)) return run_linear(cfg, selector, N, seed, make_warm_start(cfg, N, seed));
  return run_mode(cfg, selector, N, seed);
}

std::vector<std::vector<RegretTrace>> run_cell(const ExperimentConfig& cfg, long N) {
  cfg.validate();
  const auto n_sel = cfg.selectors.size();
  const auto n_seeds = static_cast<std::size_t>(cfg.seeds);
  std::vector<std::vector<RegretTrace>> out(n_sel, std::vector<RegretTrace>(n_seeds));
  parallel_for(n_seeds, cfg.threads, [&](std::size_t seed) {
    if (is_linear(cfg.kind)) {
      const WarmStart warm = make_warm_start(cfg, N, seed);
      for (std::size_t s = 0; s < n_sel; ++s)
        out[s][seed] = run_linear(cfg, cfg.selectors[s], N, seed, warm);
    } else {
      for (std::size_t s = 0; s < n_sel; ++s)
        out[s][seed] = run_mode(cfg, cfg.selectors[s], N, seed);
    }
  });
  return out;
}

ResultRow aggregate(const std::vector<RegretTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("aggregate: no traces");
  std::vector<double> finals;
  finals.reserve(traces.size());
  for (const auto& t : traces) finals.push_back(t.final_regret());
  const auto& first = traces.front();
  return {first.algorithm, first.N, first.eta, mean_of(finals), sample_std(finals),
          static_cast<int>(traces.size())};
}

TableResult run_table(const ExperimentConfig& cfg) {
  cfg.validate();
  TableResult result;
  for (long N : cfg.N) {
    auto cell = run_cell(cfg, N);
    for (auto& per_selector : cell) {
      result.rows.push_back(aggregate(per_selector));
      for (auto& t : per_selector) result.traces.push_back(std::move(t));
    }
  }
  if (cfg.diagnostics && is_linear(cfg.kind))
    result.diagnostics = linear_diagnostics(cfg, result.traces, result.rows);
  else if (cfg.kind == ExperimentKind::linearq)
    result.diagnostics = separation_diagnostics(cfg, result.traces);
  return result;
}

TableResult sweep_eta(ExperimentConfig cfg, const std::vector<double>& etas) {
  std::vector<SelectorSpec> selectors;
  for (const auto& s : cfg.selectors)
    if (s.kind != SelectorKind::ids) selectors.push_back(s);
  for (double eta : etas) {
    if (!(eta >= 0.0)) throw std::invalid_argument("eta must be >= 0");
    selectors.push_back(SelectorSpec::ids(eta));
  }
  cfg.selectors = std::move(selectors);
  return run_table(cfg);
}

}  // namespace offon
