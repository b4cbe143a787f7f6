#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

// Analytic diagnostics for the off-to-on IDS analysis. All information
// quantities are in nats. The bound evaluators return rate expressions with
// the explicit ratio constant substituted and no polylog factors: they are
// comparative diagnostics, not certified bounds.

namespace offon {

/// -p ln p - (1-p) ln(1-p), with 0 ln 0 = 0.
double binary_entropy(double p);

/// 0.5 * sum_h (logdet after_h - logdet before_h). Throws
/// std::invalid_argument unless after_h - before_h is PSD (to 1e-10).
double residual_info(std::span<const Eigen::MatrixXd> before,
                     std::span<const Eigen::MatrixXd> after);

struct CoverageInputs {
  std::vector<Eigen::MatrixXd> grams;       // offline Gram Lambda_{h,N}, SPD
  std::vector<double> counts;               // n_h >= 1
  std::vector<Eigen::MatrixXd> visitation;  // time-averaged online phi phi^T, PSD
};

struct Coverage {
  std::vector<double> per_stage;  // C_h
  double aggregate = 0.0;         // C-dagger = (N/H) sum_h C_h / n_h, N = sum n_h
};

/// C_h = lambda_max((Lambda/n)^{-1/2} Sigma (Lambda/n)^{-1/2}), solved as the
/// generalized symmetric eigenproblem Sigma v = c (Lambda/n) v.
Coverage coverage_coeff(const CoverageInputs& cov);

/// (1/H) sum_h log(1 + T / (d * lambda_min(Lambda_h))).
double elliptical_L(std::span<const Eigen::MatrixXd> grams, double T, int d);
/// Same, from precomputed per-stage lambda_min values.
double elliptical_L_from_eigs(std::span<const double> lambda_min, double T, int d);

/// C_w = 4 H d / ln 2 for the linear-Q reference ratio.
double default_ratio_constant(int H, int d);

struct BoundInputs {
  int H = 1;
  int d = 1;
  double T = 1;
  double N = 1;
  double eta = 0.0;
  double C_chi = 0.0;          // <= 0 means default_ratio_constant(H, d)
  double residual_info = 0.0;  // I(chi; tau_{1:T} | D_N), nats

  double ratio_constant() const;
};

/// sqrt(T * C * (I + T * eta)), the master inequality with P(G^c) = 0.
double master_rhs(const BoundInputs& b);

struct Theorem1Branches {
  double sqrt_t = 0.0;      // elliptical-potential branch
  double warm_start = 0.0;  // coverage (trace) branch
  double bound() const { return sqrt_t < warm_start ? sqrt_t : warm_start; }
};

/// Both branches with the ratio constant made explicit:
///   sqrt(C H d / 2) * sqrt(T L_N)   and   sqrt(C H d / 2) * T sqrt(C_dagger / N).
/// With C = 4Hd/ln 2 the common prefactor is H d sqrt(2 / ln 2).
Theorem1Branches theorem1_branches(const BoundInputs& b, double L_N,
                                   double C_dagger);

struct TsLowerBound {
  double finite_t = 0.0;       // (1-p)(1-(1-p)^T)(d+ + d-)
  long threshold_t = 0;        // ceil(1/p)
  double threshold_value = 0;  // (1-p)(1-e^{-1})(d+ + d-)
};

TsLowerBound ts_lower_bound(double p, double d_plus, double d_minus, long T);
/// (1-p) c0 + p c1.
double ids_upper_bound(double p, double c0, double c1);
/// (1-e^{-1})(d+ + d-) / c0.
double separation_ratio(double d_plus, double d_minus, double c0);

/// IDS_0 strictly prefers the probe: (1-p)c0 + p c1 < (1-p) d-.
bool strict_probe_condition(double p, double c0, double c1, double d_minus);
/// IDS_0 beats TS for T >= ceil(1/p): (1-p)c0 + p c1 < (1-p)(1-e^{-1})(d+ + d-).
bool separation_condition(double p, double c0, double c1, double d_plus,
                          double d_minus);

}  // namespace offon
