#include "offon/linear_env.hpp"

#include <cmath>
#include <stdexcept>

namespace offon {

namespace {

// Sub-stream tags for LinearContextualEnv.
enum : std::uint64_t { kFeatureTag = 1, kWeightTag, kBiasTag, kActionTag, kOnlineTag };

Eigen::VectorXd unit_gaussian(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v = standard_normal(rng, n);
  return v / v.norm();
}

}  // namespace

FeatureMap::FeatureMap(int state_dim, int action_dim, int feature_dim,
                       std::uint64_t seed, double gain)
    : state_dim_(state_dim), action_dim_(action_dim) {
  if (state_dim < 0 || action_dim < 0 || state_dim + action_dim < 1 || feature_dim < 1)
    throw std::invalid_argument("invalid feature map dimensions");
  const Eigen::Index n = state_dim + action_dim;
  const Eigen::Index cols = 1 + n + n * (n + 1) / 2;
  Rng rng(seed);
  projection_ = standard_normal(rng, feature_dim, cols) * (gain / std::sqrt(static_cast<double>(cols)));
}

Eigen::Index FeatureMap::pair_column(int i, int j) const {
  // Pairs (i, j), i <= j, in row-major order after the constant and linear terms.
  const int n = state_dim_ + action_dim_;
  return 1 + n + static_cast<Eigen::Index>(i) * n - static_cast<Eigen::Index>(i) * (i - 1) / 2 + (j - i);
}

Eigen::VectorXd FeatureMap::monomials(const Eigen::Ref<const Eigen::VectorXd>& state,
                                      const Eigen::Ref<const Eigen::VectorXd>& action) const {
  if (state.size() != state_dim_ || action.size() != action_dim_)
    throw std::invalid_argument("state/action dimension mismatch");
  const int n = state_dim_ + action_dim_;
  Eigen::VectorXd z(n);
  z << state, action;
  Eigen::VectorXd m(num_monomials());
  m[0] = 1.0;
  m.segment(1, n) = z;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m[pair_column(i, j)] = z[i] * z[j];
  return m;
}

Eigen::VectorXd FeatureMap::operator()(const Eigen::Ref<const Eigen::VectorXd>& state,
                                       const Eigen::Ref<const Eigen::VectorXd>& action) const {
  Eigen::VectorXd phi = (projection_ * monomials(state, action)).array().tanh().matrix();
  return phi / phi.norm();
}

Eigen::MatrixXd FeatureMap::featurize(const Eigen::Ref<const Eigen::VectorXd>& state,
                                      const Eigen::Ref<const Eigen::MatrixXd>& actions) const {
  if (state.size() != state_dim_ || actions.cols() != action_dim_)
    throw std::invalid_argument("state/action dimension mismatch");
  const int S = state_dim_;
  const int A = action_dim_;
  const Eigen::Index M = actions.rows();

  // State-only part: monomials with a = 0.
  const Eigen::VectorXd base =
      projection_ * monomials(state, Eigen::VectorXd::Zero(A));

  // Terms linear in a: column k collects a_k and s_i a_k.
  Eigen::MatrixXd linear_in_action(num_monomials(), A);
  linear_in_action.setZero();
  for (int k = 0; k < A; ++k) {
    linear_in_action(1 + S + k, k) = 1.0;
    for (int i = 0; i < S; ++i) linear_in_action(pair_column(i, S + k), k) = state[i];
  }
  const Eigen::MatrixXd slope = projection_ * linear_in_action;  // d x A

  // Terms quadratic in a.
  const Eigen::Index n_aa = static_cast<Eigen::Index>(A) * (A + 1) / 2;
  Eigen::MatrixXd aa_cols(projection_.rows(), n_aa);
  Eigen::MatrixXd aa_terms(n_aa, M);
  Eigen::Index c = 0;
  for (int k = 0; k < A; ++k)
    for (int l = k; l < A; ++l, ++c) {
      aa_cols.col(c) = projection_.col(pair_column(S + k, S + l));
      aa_terms.row(c) = (actions.col(k).array() * actions.col(l).array()).transpose();
    }

  Eigen::MatrixXd pre = slope * actions.transpose() + aa_cols * aa_terms;
  pre.colwise() += base;
  Eigen::MatrixXd phi = pre.array().tanh().matrix();
  phi.array().rowwise() /= phi.colwise().norm().array();
  return phi.transpose();
}

void LinearEnvConfig::validate() const {
  if (state_dim < 0 || action_dim < 0 || state_dim + action_dim < 1 || feature_dim < 1)
    throw std::invalid_argument("invalid linear env dimensions");
  if (num_candidates < 1) throw std::invalid_argument("M must be >= 1");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("sigma_env must be >= 0");
  if (!(weight_scale > 0.0)) throw std::invalid_argument("weight scale must be > 0");
  if (!(feature_gain > 0.0)) throw std::invalid_argument("feature gain must be > 0");
}

LinearContextualEnv::LinearContextualEnv(const LinearEnvConfig& cfg, std::uint64_t seed)
    : cfg_((cfg.validate(), cfg)),
      features_(cfg.state_dim, cfg.action_dim, cfg.feature_dim, split_seed(seed, kFeatureTag),
                cfg.feature_gain),
      online_(split_seed(seed, kOnlineTag)) {
  Rng weight_rng(split_seed(seed, kWeightTag));
  Rng bias_rng(split_seed(seed, kBiasTag));
  Rng action_rng(split_seed(seed, kActionTag));
  w_star_ = cfg.weight_scale * unit_gaussian(weight_rng, cfg.feature_dim);
  w_behaviour_ = w_star_ + cfg.beta * unit_gaussian(bias_rng, cfg.feature_dim);
  actions_ = standard_normal(action_rng, cfg.num_candidates, cfg.action_dim);
}

const CandidateSet& LinearContextualEnv::observe() {
  const Eigen::VectorXd state = standard_normal(online_, cfg_.state_dim);
  current_.emplace(features_.featurize(state, actions_));
  return *current_;
}

const CandidateSet& LinearContextualEnv::current() const {
  if (!current_) throw std::logic_error("observe() has not been called");
  return *current_;
}

Eigen::VectorXd LinearContextualEnv::true_rewards() const {
  return current().features() * w_star_;
}

LinearContextualEnv::Step LinearContextualEnv::step(std::size_t action) {
  const auto& cands = current();
  if (action >= cands.size()) throw std::out_of_range("action id out of range");
  const Eigen::VectorXd r = true_rewards();
  const double chosen = r[static_cast<Eigen::Index>(action)];
  std::normal_distribution<double> noise(0.0, 1.0);
  Step out;
  out.expected_regret = r.maxCoeff() - chosen;
  out.reward = chosen + cfg_.noise_std * noise(online_);
  return out;
}

std::vector<OfflineSample> LinearContextualEnv::generate_offline(long N, Rng& rng) const {
  if (N < 0) throw std::invalid_argument("N must be >= 0");
  std::vector<OfflineSample> data;
  data.reserve(static_cast<std::size_t>(N));
  std::normal_distribution<double> noise(0.0, 1.0);
  for (long i = 0; i < N; ++i) {
    const Eigen::VectorXd state = standard_normal(rng, cfg_.state_dim);
    const Eigen::MatrixXd phi = features_.featurize(state, actions_);
    const Eigen::VectorXd true_r = phi * w_star_;
    OfflineSample s;
    s.behaviour_action = argmax_lowest(phi * w_behaviour_);
    s.optimal_action = argmax_lowest(true_r);
    s.phi = phi.row(static_cast<Eigen::Index>(s.behaviour_action)).transpose();
    s.reward = true_r[static_cast<Eigen::Index>(s.behaviour_action)] +
               cfg_.noise_std * noise(rng);
    data.push_back(std::move(s));
  }
  return data;
}

}  // namespace offon
