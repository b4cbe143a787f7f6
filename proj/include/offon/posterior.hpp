#pragma once

#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "offon/rng.hpp"

namespace offon {

/// Bayesian linear-Gaussian posterior over a weight vector w in R^d.
///
/// Stored in natural parameters: precision Lambda and the precision-weighted
/// mean b = Lambda * mu. The prior is w ~ N(0, lambda^{-1} I) and each
/// observation y = phi^T w + eps with eps ~ N(0, sigma2), so an observation
/// adds phi phi^T / sigma2 to Lambda and phi y / sigma2 to b.
///
/// sigma2 is the *modeled* noise variance. It is independent of whatever
/// noise the environment actually produces.
///
/// absorb() updates in place. The Cholesky factor of Lambda is computed on
/// first use and dropped on every absorb(). Copies are independent.
class GaussianLinearPosterior {
 public:
  static GaussianLinearPosterior prior(Eigen::Index dim, double lambda,
                                       double sigma2);

  /// Build directly from natural parameters. Throws std::invalid_argument for
  /// malformed input and NumericalError if `precision` is not positive
  /// definite.
  static GaussianLinearPosterior from_natural(Eigen::MatrixXd precision,
                                              Eigen::VectorXd pw_mean,
                                              double lambda, double sigma2);

  void absorb(const Eigen::Ref<const Eigen::VectorXd>& phi, double y);

  Eigen::Index dim() const { return pw_mean_.size(); }
  const Eigen::MatrixXd& precision() const { return precision_; }
  const Eigen::VectorXd& pw_mean() const { return pw_mean_; }
  double prior_precision() const { return lambda_; }
  double noise_var() const { return sigma2_; }

  const Eigen::VectorXd& mean() const;
  double logdet() const;

  /// phi^T Lambda^{-1} phi, via one triangular solve.
  double project_var(const Eigen::Ref<const Eigen::VectorXd>& phi) const;
  /// Row-wise project_var for a stack of features (one per row).
  Eigen::VectorXd project_vars(const Eigen::Ref<const Eigen::MatrixXd>& rows) const;

  /// Information (nats) carried by one observation at phi:
  /// 0.5 * log(1 + phi^T Lambda^{-1} phi / sigma2).
  double info_gain(const Eigen::Ref<const Eigen::VectorXd>& phi) const;

  /// w = mu + L^{-T} z, z ~ N(0, I), L the lower Cholesky factor of Lambda.
  Eigen::VectorXd sample(Rng& rng) const;
  /// `count` independent samples as columns. Equivalent to calling sample()
  /// `count` times in a row.
  Eigen::MatrixXd sample(Rng& rng, Eigen::Index count) const;

  /// Number of absorbed features whose norm exceeded 1 (+1e-9).
  long norm_warnings() const { return norm_warnings_; }

  const Eigen::LLT<Eigen::MatrixXd>& cholesky() const;

 private:
  GaussianLinearPosterior(Eigen::MatrixXd precision, Eigen::VectorXd pw_mean,
                          double lambda, double sigma2);

  Eigen::MatrixXd precision_;
  Eigen::VectorXd pw_mean_;
  double lambda_;
  double sigma2_;
  long norm_warnings_ = 0;

  mutable std::optional<Eigen::LLT<Eigen::MatrixXd>> chol_;
  mutable std::optional<Eigen::VectorXd> mean_;
};

}  // namespace offon
