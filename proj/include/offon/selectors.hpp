#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "offon/posterior.hpp"
#include "offon/rng.hpp"

namespace offon {

/// Fixed, indexed list of candidate actions. Row i of `features` is the
/// feature vector of the action with id i.
class CandidateSet {
 public:
  explicit CandidateSet(Eigen::MatrixXd features,
                        std::vector<std::size_t> value_reference = {});

  std::size_t size() const { return static_cast<std::size_t>(features_.rows()); }
  Eigen::Index dim() const { return features_.cols(); }
  const Eigen::MatrixXd& features() const { return features_; }
  auto feature(std::size_t id) const { return features_.row(static_cast<Eigen::Index>(id)); }
  // Ids of a wider value-reference subset. Unused by the linear path.
  const std::vector<std::size_t>& value_reference() const { return value_reference_; }

 private:
  Eigen::MatrixXd features_;
  std::vector<std::size_t> value_reference_;
};

struct ActionScore {
  double delta = 0.0;  // posterior-expected regret
  double gain = 0.0;   // information gain, nats
  double psi = 0.0;    // information ratio; may be +inf
};

/// Per-action expected regrets and information gains, as produced by a
/// belief. Selectors only ever see this and the reward-level queries on
/// BeliefModel, never environment internals.
struct BeliefScores {
  Eigen::VectorXd deltas;
  Eigen::VectorXd gains;

  std::size_t size() const { return static_cast<std::size_t>(deltas.size()); }
  ActionScore at(std::size_t id, double eta) const;
};

/// Information ratio delta^2 / (gain + eta).
///
/// For eta == 0 the vanilla conventions apply: +inf when gain == 0 < delta,
/// and 0 when delta == gain == 0. Negative inputs throw std::invalid_argument.
double psi(double delta, double gain, double eta);

struct McDeltaEstimate {
  Eigen::VectorXd mean;    // Delta(a)
  Eigen::VectorXd stddev;  // per-sample std of the regret of a
};

/// Monte Carlo estimate of Delta(a) = E_w[max_a' phi(a')^T w - phi(a)^T w]
/// from `n_samples` posterior draws.
McDeltaEstimate mc_delta_estimate(const GaussianLinearPosterior& post,
                                  const CandidateSet& cands, int n_samples,
                                  Rng& rng);
Eigen::VectorXd mc_deltas(const GaussianLinearPosterior& post,
                          const CandidateSet& cands, int n_samples, Rng& rng);

/// Exact per-action information gains 0.5 * log(1 + phi^T Lambda^{-1} phi / sigma2).
Eigen::VectorXd info_gains(const GaussianLinearPosterior& post,
                           const CandidateSet& cands);

/// Lowest index attaining the maximum / minimum.
std::size_t argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values);
std::size_t argmin_lowest(const Eigen::Ref<const Eigen::VectorXd>& values);

/// argmin of psi with ties to the lowest id. When every action has
/// psi == +inf, falls back to argmin of delta.
std::size_t ids_argmin(const BeliefScores& scores, double eta);

/// What a selector is allowed to ask of a belief.
class BeliefModel {
 public:
  virtual ~BeliefModel() = default;

  virtual std::size_t num_actions() const = 0;
  virtual Eigen::VectorXd mean_rewards() const = 0;
  /// Posterior std of each action's mean reward.
  virtual Eigen::VectorXd reward_stddevs() const = 0;
  /// One joint draw of the reward vector from the posterior.
  virtual Eigen::VectorXd sample_rewards(Rng& rng) const = 0;
  virtual BeliefScores scores(Rng& rng) const = 0;
};

/// Linear-Gaussian belief over a fixed candidate set.
class LinearBelief final : public BeliefModel {
 public:
  LinearBelief(const GaussianLinearPosterior& post, const CandidateSet& cands,
               int n_samples);

  std::size_t num_actions() const override { return cands_.size(); }
  Eigen::VectorXd mean_rewards() const override;
  Eigen::VectorXd reward_stddevs() const override;
  Eigen::VectorXd sample_rewards(Rng& rng) const override;
  BeliefScores scores(Rng& rng) const override;

 private:
  const GaussianLinearPosterior& post_;
  const CandidateSet& cands_;
  int n_samples_;
};

enum class SelectorKind { greedy, ucb, thompson, ids };

struct SelectorSpec {
  SelectorKind kind = SelectorKind::ids;
  double eta = 0.0;        // ids only
  double ucb_alpha = 1.0;  // ucb only

  static SelectorSpec greedy() { return {SelectorKind::greedy}; }
  static SelectorSpec ucb(double alpha = 1.0) { return {SelectorKind::ucb, 0.0, alpha}; }
  static SelectorSpec thompson() { return {SelectorKind::thompson}; }
  static SelectorSpec ids(double eta) { return {SelectorKind::ids, eta}; }

  /// "greedy", "ucb", "ts", or "ids_<eta>" (e.g. "ids_0", "ids_0.05").
  std::string label() const;
  /// Inverse of label(); also accepts "ids" (eta = 0) and "thompson".
  static SelectorSpec parse(const std::string& label, double ucb_alpha = 1.0);
};

std::string format_eta(double eta);

struct Choice {
  std::size_t action = 0;
  /// Present when the rule had to compute (Delta, g) to decide (IDS).
  std::optional<BeliefScores> scores;
};

/// IDS: argmin psi. Greedy: argmax mean reward. UCB: argmax mean +
/// alpha * std. TS: argmax of one sampled reward vector. Ties go to the
/// lowest id. Deterministic given the rng state.
Choice select(const SelectorSpec& spec, const BeliefModel& belief, Rng& rng);

}  // namespace offon
