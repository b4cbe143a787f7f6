#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "offon/rng.hpp"
#include "offon/selectors.hpp"

namespace offon {

/// Random nonlinear feature map phi(s, a) in R^d with ||phi|| = 1.
///
/// z = (s, a) is expanded to all monomials of degree <= 2 (constant, linear,
/// squares and pairwise interactions), projected by a fixed Gaussian matrix
/// scaled by gain/sqrt(#monomials), passed through tanh and l2-normalised. The
/// constant monomial keeps the output well defined at z = 0.
class FeatureMap {
 public:
  FeatureMap(int state_dim, int action_dim, int feature_dim, std::uint64_t seed,
             double gain = 1.0);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  int feature_dim() const { return static_cast<int>(projection_.rows()); }
  Eigen::Index num_monomials() const { return projection_.cols(); }

  Eigen::VectorXd monomials(const Eigen::Ref<const Eigen::VectorXd>& state,
                            const Eigen::Ref<const Eigen::VectorXd>& action) const;

  Eigen::VectorXd operator()(const Eigen::Ref<const Eigen::VectorXd>& state,
                             const Eigen::Ref<const Eigen::VectorXd>& action) const;

  /// Features of every row of `actions` against one state, one per row.
  /// Same values as operator(), but shares the state-only work.
  Eigen::MatrixXd featurize(const Eigen::Ref<const Eigen::VectorXd>& state,
                            const Eigen::Ref<const Eigen::MatrixXd>& actions) const;

 private:
  Eigen::Index pair_column(int i, int j) const;  // i <= j, over z indices

  int state_dim_;
  int action_dim_;
  Eigen::MatrixXd projection_;  // d x #monomials
};

struct LinearEnvConfig {
  int state_dim = 16;
  int action_dim = 4;
  int feature_dim = 128;
  int num_candidates = 256;
  double beta = 6.0;          // behaviour bias magnitude
  double noise_std = 0.05;    // true reward noise
  double weight_scale = 1.0;  // ||w*||
  double feature_gain = 1.0;  // projection scale inside tanh

  void validate() const;
};

struct OfflineSample {
  Eigen::VectorXd phi;
  double reward = 0.0;
  std::size_t behaviour_action = 0;
  std::size_t optimal_action = 0;
};

/// Linear contextual bandit with a biased behaviour policy.
///
/// A run is fully determined by (config, seed): the feature map, w*, the
/// bias direction, the fixed candidate actions and the online context/noise
/// stream are drawn from separate sub-streams of `seed`. Candidate actions
/// are drawn once; each round a fresh context is featurized against them.
class LinearContextualEnv {
 public:
  LinearContextualEnv(const LinearEnvConfig& cfg, std::uint64_t seed);

  const LinearEnvConfig& config() const { return cfg_; }
  const FeatureMap& feature_map() const { return features_; }
  const Eigen::VectorXd& true_weights() const { return w_star_; }
  const Eigen::VectorXd& behaviour_weights() const { return w_behaviour_; }
  const Eigen::MatrixXd& candidate_actions() const { return actions_; }

  /// Draws the next online context and returns its candidate features.
  const CandidateSet& observe();
  /// Candidate features of the current context; observe() must have run.
  const CandidateSet& current() const;
  /// phi^T w* for every candidate of the current context.
  Eigen::VectorXd true_rewards() const;

  struct Step {
    double expected_regret = 0.0;  // max_a phi^T w* - phi(a_t)^T w*
    double reward = 0.0;           // phi(a_t)^T w* + noise
  };
  Step step(std::size_t action);

  /// N rounds of behaviour data: fresh context, argmax under the behaviour
  /// weights, reward under w* plus noise. Does not touch the online stream.
  std::vector<OfflineSample> generate_offline(long N, Rng& rng) const;

 private:
  LinearEnvConfig cfg_;
  FeatureMap features_;
  Eigen::VectorXd w_star_;
  Eigen::VectorXd w_behaviour_;
  Eigen::MatrixXd actions_;  // M x action_dim
  Rng online_;
  std::optional<CandidateSet> current_;
};

}  // namespace offon
