#include "offon/posterior.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "offon/errors.hpp"

namespace offon {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw std::invalid_argument(std::string(name) + " must be positive and finite");
}

}  // namespace

GaussianLinearPosterior::GaussianLinearPosterior(Eigen::MatrixXd precision,
                                                 Eigen::VectorXd pw_mean,
                                                 double lambda, double sigma2)
    : precision_(std::move(precision)),
      pw_mean_(std::move(pw_mean)),
      lambda_(lambda),
      sigma2_(sigma2) {}

GaussianLinearPosterior GaussianLinearPosterior::prior(Eigen::Index dim,
                                                       double lambda,
                                                       double sigma2) {
  if (dim < 1) throw std::invalid_argument("posterior dimension must be >= 1");
  require_positive(lambda, "prior precision");
  require_positive(sigma2, "noise variance");
  return GaussianLinearPosterior(
      lambda * Eigen::MatrixXd::Identity(dim, dim),
      Eigen::VectorXd::Zero(dim), lambda, sigma2);
}

GaussianLinearPosterior GaussianLinearPosterior::from_natural(
    Eigen::MatrixXd precision, Eigen::VectorXd pw_mean, double lambda,
    double sigma2) {
  require_positive(lambda, "prior precision");
  require_positive(sigma2, "noise variance");
  if (precision.rows() < 1 || precision.rows() != precision.cols() ||
      precision.rows() != pw_mean.size())
    throw std::invalid_argument("precision/pw_mean dimension mismatch");
  if (!precision.allFinite() || !pw_mean.allFinite())
    throw std::invalid_argument("non-finite natural parameters");
  const double scale = precision.cwiseAbs().maxCoeff();
  if ((precision - precision.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("precision is not symmetric");
  GaussianLinearPosterior post(std::move(precision), std::move(pw_mean), lambda,
                               sigma2);
  post.cholesky();
  return post;
}

void GaussianLinearPosterior::absorb(const Eigen::Ref<const Eigen::VectorXd>& phi,
                                     double y) {
  if (phi.size() != dim())
    throw std::invalid_argument("feature dimension mismatch");
  if (!phi.allFinite() || !std::isfinite(y))
    throw std::invalid_argument("non-finite observation");
  if (phi.norm() > 1.0 + 1e-9) ++norm_warnings_;

  precision_.noalias() += (phi * phi.transpose()) / sigma2_;
  precision_ = 0.5 * (precision_ + precision_.transpose()).eval();
  pw_mean_ += phi * (y / sigma2_);
  chol_.reset();
  mean_.reset();
}

const Eigen::LLT<Eigen::MatrixXd>& GaussianLinearPosterior::cholesky() const {
  if (!chol_) {
    Eigen::LLT<Eigen::MatrixXd> llt(precision_);
    if (llt.info() != Eigen::Success)
      throw NumericalError("posterior precision is not positive definite");
    chol_.emplace(std::move(llt));
  }
  return *chol_;
}

const Eigen::VectorXd& GaussianLinearPosterior::mean() const {
  if (!mean_) mean_.emplace(cholesky().solve(pw_mean_));
  return *mean_;
}

double GaussianLinearPosterior::logdet() const {
  const auto& llt = cholesky();
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double GaussianLinearPosterior::project_var(
    const Eigen::Ref<const Eigen::VectorXd>& phi) const {
  if (phi.size() != dim())
    throw std::invalid_argument("feature dimension mismatch");
  return cholesky().matrixL().solve(phi).squaredNorm();
}

Eigen::VectorXd GaussianLinearPosterior::project_vars(
    const Eigen::Ref<const Eigen::MatrixXd>& rows) const {
  if (rows.cols() != dim())
    throw std::invalid_argument("feature dimension mismatch");
  Eigen::MatrixXd whitened = rows.transpose();
  cholesky().matrixL().solveInPlace(whitened);
  return whitened.colwise().squaredNorm().transpose();
}

double GaussianLinearPosterior::info_gain(
    const Eigen::Ref<const Eigen::VectorXd>& phi) const {
  return 0.5 * std::log1p(project_var(phi) / sigma2_);
}

Eigen::VectorXd GaussianLinearPosterior::sample(Rng& rng) const {
  Eigen::VectorXd z = standard_normal(rng, dim());
  cholesky().matrixU().solveInPlace(z);
  return mean() + z;
}

Eigen::MatrixXd GaussianLinearPosterior::sample(Rng& rng, Eigen::Index count) const {
  Eigen::MatrixXd z = standard_normal(rng, dim(), count);
  cholesky().matrixU().solveInPlace(z);
  z.colwise() += mean();
  return z;
}

}  // namespace offon
