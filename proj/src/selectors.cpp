#include "offon/selectors.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace offon {

CandidateSet::CandidateSet(Eigen::MatrixXd features,
                           std::vector<std::size_t> value_reference)
    : features_(std::move(features)), value_reference_(std::move(value_reference)) {
  if (features_.rows() == 0 || features_.cols() == 0)
    throw std::invalid_argument("candidate set is empty");
  if (!features_.allFinite())
    throw std::invalid_argument("candidate features must be finite");
  for (auto id : value_reference_)
    if (id >= size()) throw std::invalid_argument("value-reference id out of range");
}

ActionScore BeliefScores::at(std::size_t id, double eta) const {
  const auto i = static_cast<Eigen::Index>(id);
  return {deltas[i], gains[i], psi(deltas[i], gains[i], eta)};
}

double psi(double delta, double gain, double eta) {
  if (!(delta >= 0.0) || !(gain >= 0.0) || !(eta >= 0.0))
    throw std::invalid_argument("psi requires nonnegative delta, gain and eta");
  const double denom = gain + eta;
  if (denom == 0.0)
    return delta == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return delta * delta / denom;
}

McDeltaEstimate mc_delta_estimate(const GaussianLinearPosterior& post,
                                  const CandidateSet& cands, int n_samples,
                                  Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (cands.dim() != post.dim())
    throw std::invalid_argument("candidate/posterior dimension mismatch");

  const Eigen::MatrixXd w = post.sample(rng, n_samples);
  // regret(a, s) = max_a' r(a', s) - r(a, s)
  Eigen::MatrixXd regret = cands.features() * w;
  const Eigen::RowVectorXd best = regret.colwise().maxCoeff();
  regret = (-regret).rowwise() + best;

  McDeltaEstimate est;
  est.mean = regret.rowwise().mean();
  if (n_samples > 1) {
    const Eigen::MatrixXd centered = regret.colwise() - est.mean;
    est.stddev = (centered.rowwise().squaredNorm() / (n_samples - 1)).cwiseSqrt();
  } else {
    est.stddev = Eigen::VectorXd::Zero(regret.rows());
  }
  return est;
}

Eigen::VectorXd mc_deltas(const GaussianLinearPosterior& post,
                          const CandidateSet& cands, int n_samples, Rng& rng) {
  return mc_delta_estimate(post, cands, n_samples, rng).mean;
}

Eigen::VectorXd info_gains(const GaussianLinearPosterior& post,
                           const CandidateSet& cands) {
  const double inv_sigma2 = 1.0 / post.noise_var();
  return (post.project_vars(cands.features()).array() * inv_sigma2)
      .log1p()
      .matrix() * 0.5;
}

std::size_t argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() == 0) throw std::invalid_argument("argmax of empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return static_cast<std::size_t>(best);
}

std::size_t argmin_lowest(const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() == 0) throw std::invalid_argument("argmin of empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i)
    if (values[i] < values[best]) best = i;
  return static_cast<std::size_t>(best);
}

std::size_t ids_argmin(const BeliefScores& scores, double eta) {
  if (scores.deltas.size() == 0 || scores.deltas.size() != scores.gains.size())
    throw std::invalid_argument("malformed belief scores");
  Eigen::VectorXd ratio(scores.deltas.size());
  for (Eigen::Index i = 0; i < ratio.size(); ++i)
    ratio[i] = psi(scores.deltas[i], scores.gains[i], eta);
  const auto best = argmin_lowest(ratio);
  if (std::isinf(ratio[static_cast<Eigen::Index>(best)]))
    return argmin_lowest(scores.deltas);
  return best;
}

LinearBelief::LinearBelief(const GaussianLinearPosterior& post,
                           const CandidateSet& cands, int n_samples)
    : post_(post), cands_(cands), n_samples_(n_samples) {
  if (cands.dim() != post.dim())
    throw std::invalid_argument("candidate/posterior dimension mismatch");
}

Eigen::VectorXd LinearBelief::mean_rewards() const {
  return cands_.features() * post_.mean();
}

Eigen::VectorXd LinearBelief::reward_stddevs() const {
  return post_.project_vars(cands_.features()).cwiseSqrt();
}

Eigen::VectorXd LinearBelief::sample_rewards(Rng& rng) const {
  return cands_.features() * post_.sample(rng);
}

BeliefScores LinearBelief::scores(Rng& rng) const {
  return {mc_deltas(post_, cands_, n_samples_, rng), info_gains(post_, cands_)};
}

std::string format_eta(double eta) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, eta);
  if (ec != std::errc{}) throw std::runtime_error("cannot format eta");
  return std::string(buf, end);
}

std::string SelectorSpec::label() const {
  switch (kind) {
    case SelectorKind::greedy: return "greedy";
    case SelectorKind::ucb: return "ucb";
    case SelectorKind::thompson: return "ts";
    case SelectorKind::ids: return "ids_" + format_eta(eta);
  }
  return "unknown";
}

SelectorSpec SelectorSpec::parse(const std::string& label, double ucb_alpha) {
  if (label == "greedy") return greedy();
  if (label == "ucb") return ucb(ucb_alpha);
  if (label == "ts" || label == "thompson") return thompson();
  if (label == "ids") return ids(0.0);
  if (label.rfind("ids_", 0) == 0) {
    const char* first = label.data() + 4;
    const char* last = label.data() + label.size();
    double eta = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, eta);
    if (ec == std::errc{} && ptr == last && eta >= 0.0) return ids(eta);
  }
  throw std::invalid_argument("unknown selector '" + label + "'");
}

Choice select(const SelectorSpec& spec, const BeliefModel& belief, Rng& rng) {
  switch (spec.kind) {
    case SelectorKind::greedy:
      return {argmax_lowest(belief.mean_rewards()), std::nullopt};
    case SelectorKind::ucb:
      return {argmax_lowest(belief.mean_rewards() +
                            spec.ucb_alpha * belief.reward_stddevs()),
              std::nullopt};
    case SelectorKind::thompson:
      return {argmax_lowest(belief.sample_rewards(rng)), std::nullopt};
    case SelectorKind::ids: {
      if (!(spec.eta >= 0.0)) throw std::invalid_argument("eta must be >= 0");
      BeliefScores scores = belief.scores(rng);
      const auto action = ids_argmin(scores, spec.eta);
      return {action, std::move(scores)};
    }
  }
  throw std::invalid_argument("unknown selector kind");
}

}  // namespace offon
