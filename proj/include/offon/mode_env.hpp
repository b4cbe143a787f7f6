#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "offon/rng.hpp"
#include "offon/selectors.hpp"

// Environments with a binary latent mode theta in {0, 1}: the hidden-mode
// bandit and the finite linear-Q separation instance. Both are described by
// a per-mode reward table, the matching per-mode gap table, and a flag per
// action saying whether one play reveals theta.

namespace offon {

/// Posterior probability that theta = 1.
struct ModeBelief {
  double p = 0.5;

  bool resolved() const { return p == 0.0 || p == 1.0; }
};

struct ModeAction {
  std::string name;
  std::array<double, 2> reward;  // indexed by theta
  std::array<double, 2> gap;     // max_a' reward[theta] - reward[theta]
  bool informative = false;      // one play collapses the belief onto theta
};

/// Posterior-expected gap (1-p) g0 + p g1; returns the common value exactly
/// when both gaps agree or the belief is resolved.
double expected_gap(const std::array<double, 2>& gap, double p);

/// Odds-model residual mode probability after N uninformative offline
/// observations: (1-q)^N / (1 + (1-q)^N).
double p_from_offline(long N, double q);

class BinaryModeEnv {
 public:
  /// Throws std::invalid_argument if the gap table does not match the reward
  /// table (to 1e-12), p is outside [0, 1], or theta is not 0/1.
  BinaryModeEnv(std::vector<ModeAction> actions, double p, int theta);

  std::size_t num_actions() const { return actions_.size(); }
  const std::vector<ModeAction>& actions() const { return actions_; }
  const ModeBelief& belief() const { return belief_; }
  int theta() const { return theta_; }

  Eigen::VectorXd deltas() const;
  /// Exact information about theta: H2(p) for informative actions, else 0.
  Eigen::VectorXd gains() const;
  Eigen::VectorXd mean_rewards() const;
  Eigen::VectorXd reward_stddevs() const;
  /// Rewards under a mode drawn from the belief.
  Eigen::VectorXd sample_rewards(Rng& rng) const;

  struct Step {
    double expected_regret = 0.0;  // Delta(a) under the belief before the step
    double realized_regret = 0.0;  // gap under the true theta
    double reward = 0.0;
    bool revealed = false;
  };
  /// Plays `action`; informative actions collapse the belief to the true theta.
  Step step(std::size_t action);

 private:
  std::vector<ModeAction> actions_;
  ModeBelief belief_;
  int theta_;
};

/// Exposes a BinaryModeEnv's belief to the selectors.
class ModeBeliefModel final : public BeliefModel {
 public:
  explicit ModeBeliefModel(const BinaryModeEnv& env) : env_(env) {}

  std::size_t num_actions() const override { return env_.num_actions(); }
  Eigen::VectorXd mean_rewards() const override { return env_.mean_rewards(); }
  Eigen::VectorXd reward_stddevs() const override { return env_.reward_stddevs(); }
  Eigen::VectorXd sample_rewards(Rng& rng) const override {
    return env_.sample_rewards(rng);
  }
  BeliefScores scores(Rng&) const override { return {env_.deltas(), env_.gains()}; }

 private:
  const BinaryModeEnv& env_;
};

// ---- hidden-mode bandit --------------------------------------------------

namespace hidden {
inline constexpr std::size_t kDefault = 0;  // a0
inline constexpr std::size_t kRare = 1;     // a1
inline constexpr std::size_t kProbe = 2;    // aP
}  // namespace hidden

/// a0: 1 in both modes. a1: 0.2 / 2.0. aP: 0.85 / 1.85. a1 and aP reveal theta.
std::vector<ModeAction> hidden_mode_actions();
BinaryModeEnv make_hidden_mode(double p, int theta);

/// (p * 1.0, (1-p) * 0.8, 0.15)
Eigen::Vector3d deltas_hidden(double p);
/// (0, H2(p), H2(p))
Eigen::Vector3d gains_hidden(double p);

// ---- linear-Q separation instance ---------------------------------------

namespace linq {
inline constexpr std::size_t kSafe = 0;     // S, pi_0
inline constexpr std::size_t kReveal = 1;   // R, pi_1
inline constexpr std::size_t kProbe = 2;    // P, pi_P
inline constexpr std::size_t kBehaviour = 3;  // O, not in the candidate class
}  // namespace linq

struct LinearQInstance {
  double c = 0.3;    // probe cost, in (0, 1/2)
  double q = 0.005;  // per-trajectory chance of seeing y+ under O when theta = 1
  long N = 0;        // offline trajectories, all without y+

  void validate() const;
  double p() const { return p_from_offline(N, q); }
};

/// Episode-1 scores for {S, R, P, O}. O is partially informative and lies
/// outside the restricted class {S, R, P}.
struct LinqScores {
  BeliefScores scores;                     // 4 entries, S R P O
  std::array<bool, 4> in_candidate_class;  // {true, true, true, false}
  std::array<bool, 4> partially_informative;
};

LinqScores linq_scores(const LinearQInstance& inst);

/// Actions of the restricted class {S, R, P} as a BinaryModeEnv table.
std::vector<ModeAction> linq_actions(double c);
BinaryModeEnv make_linq(const LinearQInstance& inst, int theta);

/// Closed-form IDS_0 decision on {S, R, P}: true iff p < 1/2 - c.
bool ids_selects_probe(double p, double c);

// ---- separation structure ------------------------------------------------

/// Constants and checkable structural assumptions for a (default, rare,
/// probe) triple of a binary-mode table.
struct SeparationStructure {
  double d_plus = 0.0;   // gap of default under theta = 1
  double d_minus = 0.0;  // gap of rare under theta = 0
  double c0 = 0.0;       // gap of probe under theta = 0
  double c1 = 0.0;       // gap of probe under theta = 1
  bool cell_optimal = false;       // default / rare uniquely optimal, probe never
  bool positive_gaps = false;      // all four constants > 0
  bool information_split = false;  // default uninformative, rare and probe informative
  bool vanilla_convention = false; // psi(+, 0, 0) = inf and psi(0, 0, 0) = 0

  bool all() const {
    return cell_optimal && positive_gaps && information_split && vanilla_convention;
  }
};

SeparationStructure separation_structure(const std::vector<ModeAction>& actions,
                                         std::size_t default_id,
                                         std::size_t rare_id,
                                         std::size_t probe_id);

}  // namespace offon
