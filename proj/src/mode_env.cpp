#include "offon/mode_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "offon/infodiag.hpp"

namespace offon {

double expected_gap(const std::array<double, 2>& gap, double p) {
  if (p == 0.0 || gap[0] == gap[1]) return gap[0];
  if (p == 1.0) return gap[1];
  return (1.0 - p) * gap[0] + p * gap[1];
}

double p_from_offline(long N, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
  if (N < 0) throw std::invalid_argument("N must be >= 0");
  const double odds = std::exp(static_cast<double>(N) * std::log1p(-q));
  return odds / (1.0 + odds);
}

BinaryModeEnv::BinaryModeEnv(std::vector<ModeAction> actions, double p, int theta)
    : actions_(std::move(actions)), belief_{p}, theta_(theta) {
  if (actions_.empty()) throw std::invalid_argument("no actions");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (theta != 0 && theta != 1) throw std::invalid_argument("theta must be 0 or 1");
  for (int m = 0; m < 2; ++m) {
    double best = -INFINITY;
    for (const auto& a : actions_) best = std::max(best, a.reward[m]);
    for (const auto& a : actions_) {
      if (a.gap[m] < 0.0 || std::abs(best - a.reward[m] - a.gap[m]) > 1e-12)
        throw std::invalid_argument("gap table of '" + a.name +
                                    "' does not match rewards");
    }
  }
}

Eigen::VectorXd BinaryModeEnv::deltas() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(actions_.size()));
  for (std::size_t i = 0; i < actions_.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = expected_gap(actions_[i].gap, belief_.p);
  return out;
}

Eigen::VectorXd BinaryModeEnv::gains() const {
  const double h = binary_entropy(belief_.p);
  Eigen::VectorXd out(static_cast<Eigen::Index>(actions_.size()));
  for (std::size_t i = 0; i < actions_.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = actions_[i].informative ? h : 0.0;
  return out;
}

Eigen::VectorXd BinaryModeEnv::mean_rewards() const {
  const double p = belief_.p;
  Eigen::VectorXd out(static_cast<Eigen::Index>(actions_.size()));
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    const auto& r = actions_[i].reward;
    out[static_cast<Eigen::Index>(i)] = (1.0 - p) * r[0] + p * r[1];
  }
  return out;
}

Eigen::VectorXd BinaryModeEnv::reward_stddevs() const {
  const double spread = std::sqrt(belief_.p * (1.0 - belief_.p));
  Eigen::VectorXd out(static_cast<Eigen::Index>(actions_.size()));
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    const auto& r = actions_[i].reward;
    out[static_cast<Eigen::Index>(i)] = std::abs(r[1] - r[0]) * spread;
  }
  return out;
}

Eigen::VectorXd BinaryModeEnv::sample_rewards(Rng& rng) const {
  std::bernoulli_distribution mode(belief_.p);
  const int m = mode(rng) ? 1 : 0;
  Eigen::VectorXd out(static_cast<Eigen::Index>(actions_.size()));
  for (std::size_t i = 0; i < actions_.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = actions_[i].reward[m];
  return out;
}

BinaryModeEnv::Step BinaryModeEnv::step(std::size_t action) {
  if (action >= actions_.size()) throw std::out_of_range("action id out of range");
  const auto& a = actions_[action];
  Step out;
  out.expected_regret = expected_gap(a.gap, belief_.p);
  out.realized_regret = a.gap[theta_];
  out.reward = a.reward[theta_];
  if (a.informative && !belief_.resolved()) {
    belief_.p = static_cast<double>(theta_);
    out.revealed = true;
  }
  return out;
}

std::vector<ModeAction> hidden_mode_actions() {
  return {
      {"a0", {1.0, 1.0}, {0.0, 1.0}, false},
      {"a1", {0.2, 2.0}, {0.8, 0.0}, true},
      {"aP", {0.85, 1.85}, {0.15, 0.15}, true},
  };
}

BinaryModeEnv make_hidden_mode(double p, int theta) {
  return BinaryModeEnv(hidden_mode_actions(), p, theta);
}

Eigen::Vector3d deltas_hidden(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  const auto actions = hidden_mode_actions();
  return {expected_gap(actions[0].gap, p), expected_gap(actions[1].gap, p),
          expected_gap(actions[2].gap, p)};
}

Eigen::Vector3d gains_hidden(double p) {
  const double h = binary_entropy(p);
  return {0.0, h, h};
}

void LinearQInstance::validate() const {
  if (!(c > 0.0 && c < 0.5)) throw std::invalid_argument("c must lie in (0, 1/2)");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
  if (N < 0) throw std::invalid_argument("N must be >= 0");
}

std::vector<ModeAction> linq_actions(double c) {
  return {
      {"S", {0.5, 0.5}, {0.0, 0.5}, false},
      {"R", {0.0, 1.0}, {0.5, 0.0}, true},
      {"P", {0.5 - c, 0.5 - c}, {c, 0.5 + c}, true},
  };
}

LinqScores linq_scores(const LinearQInstance& inst) {
  inst.validate();
  const double p = inst.p();
  const double h = binary_entropy(p);
  auto actions = linq_actions(inst.c);
  actions.push_back({"O", {0.0, 0.0}, {0.5, 1.0}, false});

  LinqScores out;
  out.scores.deltas.resize(4);
  out.scores.gains.resize(4);
  for (Eigen::Index i = 0; i < 4; ++i)
    out.scores.deltas[i] = expected_gap(actions[static_cast<std::size_t>(i)].gap, p);
  // Under O a y+ (prob p q) reveals theta = 1; y- leaves p (1-q) / (1 - p q).
  const double see = p * inst.q;
  const double o_gain = see < 1.0
      ? std::max(0.0, h - (1.0 - see) * binary_entropy(p * (1.0 - inst.q) / (1.0 - see)))
      : h;
  out.scores.gains << 0.0, h, h, o_gain;
  out.in_candidate_class = {true, true, true, false};
  out.partially_informative = {false, false, false, true};
  return out;
}

BinaryModeEnv make_linq(const LinearQInstance& inst, int theta) {
  inst.validate();
  return BinaryModeEnv(linq_actions(inst.c), inst.p(), theta);
}

bool ids_selects_probe(double p, double c) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0, 1)");
  if (!(c > 0.0 && c < 0.5)) throw std::invalid_argument("c must lie in (0, 1/2)");
  return p < 0.5 - c;
}

SeparationStructure separation_structure(const std::vector<ModeAction>& actions,
                                         std::size_t default_id,
                                         std::size_t rare_id,
                                         std::size_t probe_id) {
  const auto n = actions.size();
  if (default_id >= n || rare_id >= n || probe_id >= n)
    throw std::out_of_range("separation_structure: action id out of range");
  SeparationStructure s;
  s.d_plus = actions[default_id].gap[1];
  s.d_minus = actions[rare_id].gap[0];
  s.c0 = actions[probe_id].gap[0];
  s.c1 = actions[probe_id].gap[1];

  auto uniquely_optimal = [&](std::size_t id, int mode) {
    if (actions[id].gap[mode] != 0.0) return false;
    for (std::size_t j = 0; j < n; ++j)
      if (j != id && actions[j].gap[mode] <= 0.0) return false;
    return true;
  };
  s.cell_optimal = uniquely_optimal(default_id, 0) && uniquely_optimal(rare_id, 1) &&
                   actions[probe_id].gap[0] > 0.0 && actions[probe_id].gap[1] > 0.0;
  s.positive_gaps = s.d_plus > 0.0 && s.d_minus > 0.0 && s.c0 > 0.0 && s.c1 > 0.0;
  s.information_split = !actions[default_id].informative &&
                        actions[rare_id].informative && actions[probe_id].informative;
  s.vanilla_convention = std::isinf(psi(1.0, 0.0, 0.0)) && psi(0.0, 0.0, 0.0) == 0.0;
  return s;
}

}  // namespace offon
