#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "offon/linear_env.hpp"
#include "offon/selectors.hpp"

namespace offon {

enum class ExperimentKind { hidden_mode, linear_bandit, linearq, diagnostics };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

/// Everything a table run needs. Defaults come from defaults(kind).
///
/// Per-run streams: with master seed m, seed index i and a selector label L,
///   environment / latent mode  split_seed(m, i, kEnvStream)
///   offline dataset            split_seed(m, i, kOfflineStream)
///   selector decisions         split_seed(m, i, label_key(L))
///   recorded scores            split_seed(m, i, label_key(L), kScoreStream)
/// so every selector in a cell sees the same instance and warm start, and
/// adding a selector leaves the other streams untouched.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::hidden_mode;
  std::vector<long> N;
  long T = 500;  // linearq: 0 means ceil(1/p_N) per cell
  int seeds = 10;
  std::uint64_t master_seed = 0;
  std::vector<SelectorSpec> selectors;

  double q = 0.005;  // hidden-mode / linearq offline odds model
  double c = 0.3;    // linearq probe cost

  LinearEnvConfig linear;
  int mc_samples = 64;
  double prior_precision = 1.0;
  double model_noise_var = 1.0;

  bool realized = false;      // mode envs: regret under the true theta
  bool record_scores = true;  // log (Delta, g, psi) of the chosen action
  bool diagnostics = false;   // linear: residual info / coverage per run
  bool track_discovery = false;  // mode envs: untruncated TS discovery time
  int threads = 0;            // 0 = hardware concurrency

  static ExperimentConfig defaults(ExperimentKind kind);
  /// Selector list for a kind: greedy, ucb, ts and one ids_<eta> per eta.
  static std::vector<SelectorSpec> standard_selectors(const std::vector<double>& etas,
                                                      double ucb_alpha);
  void validate() const;
};

inline constexpr std::uint64_t kEnvStream = 0x656e76;
inline constexpr std::uint64_t kOfflineStream = 0x6f66666c;
inline constexpr std::uint64_t kScoreStream = 0x73636f72;

struct RunDiagnostics {
  double residual_info = 0.0;  // 0.5 (logdet final - logdet warm)
  double gain_sum = 0.0;       // sum of logged chosen-action gains
  double coverage = 0.0;       // C-dagger with H = 1, n_1 = N
  double elliptical = 0.0;     // L_N(T)
};

struct RegretTrace {
  std::string algorithm;
  long N = 0;
  std::optional<double> eta;  // ids only
  std::size_t seed = 0;
  std::vector<double> regret;      // per step
  std::vector<double> cumulative;  // prefix sums of regret
  std::vector<std::size_t> actions;
  std::vector<ActionScore> chosen;  // empty unless record_scores
  std::optional<long> discovery_step;  // first step an informative action ran (1-based)
  std::optional<RunDiagnostics> diagnostics;

  double final_regret() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

struct ResultRow {
  std::string algorithm;
  long N = 0;
  std::optional<double> eta;
  double mean = 0.0;
  double std = 0.0;  // sample std, n - 1 denominator
  int seeds = 0;

  bool operator==(const ResultRow&) const = default;
};

struct TableResult {
  std::vector<ResultRow> rows;
  std::vector<RegretTrace> traces;  // ordered by (N, selector, seed)
  nlohmann::json diagnostics;       // null unless requested / linearq
};

/// Horizon used for a cell (resolves linearq's T = 0).
long horizon_for(const ExperimentConfig& cfg, long N);

RegretTrace run_one(const ExperimentConfig& cfg, const SelectorSpec& selector,
                    long N, std::size_t seed);

/// All selectors x seeds for one N. Seeds run in parallel; results come back
/// in [selector][seed] order regardless of thread count.
std::vector<std::vector<RegretTrace>> run_cell(const ExperimentConfig& cfg, long N);

/// Mean / sample std of final regret over traces, summed in seed order.
ResultRow aggregate(const std::vector<RegretTrace>& traces);

TableResult run_table(const ExperimentConfig& cfg);

/// run_table with the IDS selectors replaced by one ids_<eta> per entry of
/// `etas` (non-IDS selectors kept).
TableResult sweep_eta(ExperimentConfig cfg, const std::vector<double>& etas);

// ---- output ---------------------------------------------------------------

inline constexpr const char* kTraceCsvHeader =
    "algorithm,N,eta,seed,step,expected_regret,cumulative_regret";
inline constexpr const char* kSummaryCsvHeader =
    "algorithm,N,eta,seeds,mean_final_regret,std_final_regret";

std::string format_double(double x);

/// One line per (trace, step) for steps 0..T; step 0 carries zeros.
void write_trace_csv(std::ostream& os, const std::vector<RegretTrace>& traces);
void write_summary_csv(std::ostream& os, const std::vector<ResultRow>& rows);
/// Rebuilds ResultRows from a trace CSV (final step of every seed).
std::vector<ResultRow> rows_from_trace_csv(std::istream& is);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Overlays the keys present in `j` onto `base`.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base);

nlohmann::json summary_json(const ExperimentConfig& cfg, const TableResult& result);
/// Throws std::runtime_error if `j` does not follow the summary layout.
void validate_summary_json(const nlohmann::json& j);

enum class OutputFormat { csv_trace, csv_summary, json };

/// Writes `result` to `path` ("-" for stdout). I/O failures throw
/// std::runtime_error naming the path.
void emit(const ExperimentConfig& cfg, const TableResult& result,
          OutputFormat format, const std::string& path);

}  // namespace offon
