#include "offon/infodiag.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "offon/errors.hpp"

namespace offon {

namespace {

double logdet_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError("Gram matrix is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

void require_open_unit(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument(std::string(what) + " must lie in (0, 1)");
}

}  // namespace

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("binary_entropy: p must lie in [0, 1]");
  auto term = [](double x) { return x > 0.0 ? -x * std::log(x) : 0.0; };
  return term(p) + term(1.0 - p);
}

double residual_info(std::span<const Eigen::MatrixXd> before,
                     std::span<const Eigen::MatrixXd> after) {
  if (before.size() != after.size() || before.empty())
    throw std::invalid_argument("residual_info: stage count mismatch");
  double total = 0.0;
  for (std::size_t h = 0; h < before.size(); ++h) {
    if (before[h].rows() != after[h].rows() || before[h].cols() != after[h].cols())
      throw std::invalid_argument("residual_info: matrix size mismatch");
    const Eigen::MatrixXd diff = after[h] - before[h];
    const Eigen::MatrixXd sym = 0.5 * (diff + diff.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    const double tol = 1e-10 * std::max(1.0, before[h].cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -tol)
      throw std::invalid_argument("residual_info: after is not >= before");
    total += logdet_spd(after[h]) - logdet_spd(before[h]);
  }
  return 0.5 * total;
}

Coverage coverage_coeff(const CoverageInputs& cov) {
  const auto H = cov.grams.size();
  if (H == 0 || cov.counts.size() != H || cov.visitation.size() != H)
    throw std::invalid_argument("coverage_coeff: stage count mismatch");
  Coverage out;
  double N = 0.0;
  for (double n : cov.counts) {
    if (!(n >= 1.0)) throw std::invalid_argument("coverage_coeff: n_h must be >= 1");
    N += n;
  }
  double acc = 0.0;
  for (std::size_t h = 0; h < H; ++h) {
    const Eigen::MatrixXd scaled = cov.grams[h] / cov.counts[h];
    const Eigen::MatrixXd& sigma = cov.visitation[h];
    if (scaled.rows() != sigma.rows() || scaled.cols() != sigma.cols())
      throw std::invalid_argument("coverage_coeff: matrix size mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(scaled);
    if (llt.info() != Eigen::Success)
      throw NumericalError("coverage_coeff: singular offline Gram");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> gen(
        0.5 * (sigma + sigma.transpose()), scaled, Eigen::EigenvaluesOnly);
    if (gen.info() != Eigen::Success)
      throw NumericalError("coverage_coeff: eigensolver failed");
    const double c = std::max(0.0, gen.eigenvalues().maxCoeff());
    out.per_stage.push_back(c);
    acc += c / cov.counts[h];
  }
  out.aggregate = N / static_cast<double>(H) * acc;
  return out;
}

double elliptical_L_from_eigs(std::span<const double> lambda_min, double T, int d) {
  if (lambda_min.empty() || d < 1 || T < 0.0)
    throw std::invalid_argument("elliptical_L: invalid inputs");
  double acc = 0.0;
  for (double l : lambda_min) {
    if (!(l > 0.0)) throw std::invalid_argument("elliptical_L: lambda_min must be > 0");
    acc += std::log1p(T / (d * l));
  }
  return acc / static_cast<double>(lambda_min.size());
}

double elliptical_L(std::span<const Eigen::MatrixXd> grams, double T, int d) {
  std::vector<double> mins;
  mins.reserve(grams.size());
  for (const auto& g : grams) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
    mins.push_back(eig.eigenvalues().minCoeff());
  }
  return elliptical_L_from_eigs(mins, T, d);
}

double default_ratio_constant(int H, int d) {
  return 4.0 * H * d / std::numbers::ln2;
}

double BoundInputs::ratio_constant() const {
  return C_chi > 0.0 ? C_chi : default_ratio_constant(H, d);
}

double master_rhs(const BoundInputs& b) {
  if (b.T < 0.0 || b.eta < 0.0 || b.residual_info < 0.0)
    throw std::invalid_argument("master_rhs: negative input");
  return std::sqrt(b.T * b.ratio_constant() * (b.residual_info + b.T * b.eta));
}

Theorem1Branches theorem1_branches(const BoundInputs& b, double L_N,
                                   double C_dagger) {
  if (L_N < 0.0 || C_dagger < 0.0 || !(b.N > 0.0))
    throw std::invalid_argument("theorem1_branches: invalid inputs");
  const double prefactor = std::sqrt(b.ratio_constant() * b.H * b.d / 2.0);
  return {prefactor * std::sqrt(b.T * L_N),
          prefactor * b.T * std::sqrt(C_dagger / b.N)};
}

TsLowerBound ts_lower_bound(double p, double d_plus, double d_minus, long T) {
  require_open_unit(p, "p");
  if (!(d_plus > 0.0) || !(d_minus > 0.0) || T < 0)
    throw std::invalid_argument("ts_lower_bound: invalid constants");
  const double gaps = d_plus + d_minus;
  TsLowerBound out;
  out.finite_t = (1.0 - p) * -std::expm1(static_cast<double>(T) * std::log1p(-p)) * gaps;
  out.threshold_t = static_cast<long>(std::ceil(1.0 / p));
  out.threshold_value = (1.0 - p) * (1.0 - std::exp(-1.0)) * gaps;
  return out;
}

double ids_upper_bound(double p, double c0, double c1) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  return (1.0 - p) * c0 + p * c1;
}

double separation_ratio(double d_plus, double d_minus, double c0) {
  if (!(c0 > 0.0)) throw std::invalid_argument("c0 must be positive");
  return (1.0 - std::exp(-1.0)) * (d_plus + d_minus) / c0;
}

bool strict_probe_condition(double p, double c0, double c1, double d_minus) {
  return ids_upper_bound(p, c0, c1) < (1.0 - p) * d_minus;
}

bool separation_condition(double p, double c0, double c1, double d_plus,
                          double d_minus) {
  return ids_upper_bound(p, c0, c1) <
         (1.0 - p) * (1.0 - std::exp(-1.0)) * (d_plus + d_minus);
}

}  // namespace offon
