#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "offon/errors.hpp"
#include "offon/infodiag.hpp"
#include "offon/posterior.hpp"

using namespace offon;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_spd(Rng& rng, Eigen::Index d) {
  const MatrixXd a = standard_normal(rng, d, d);
  return a * a.transpose() + 0.1 * MatrixXd::Identity(d, d);
}

MatrixXd random_rotation(Rng& rng, Eigen::Index d) {
  Eigen::HouseholderQR<MatrixXd> qr(standard_normal(rng, d, d));
  return qr.householderQ();
}

// Brute-force lambda_max(A^{-1/2} B A^{-1/2}) through an explicit inverse root.
double whitened_lambda_max(const MatrixXd& A, const MatrixXd& B) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
  const MatrixXd inv_root = es.operatorInverseSqrt();
  Eigen::SelfAdjointEigenSolver<MatrixXd> w(inv_root * B * inv_root);
  return w.eigenvalues().maxCoeff();
}

MatrixXd diag(std::initializer_list<double> v) {
  VectorXd d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d[i++] = x;
  return d.asDiagonal();
}

}  // namespace

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.5) == doctest::Approx(std::log(2.0)));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.0066) == doctest::Approx(0.0397).epsilon(2e-3));
  for (double p = 0.01; p < 0.5; p += 0.01) {
    CHECK(binary_entropy(p) == doctest::Approx(binary_entropy(1 - p)).epsilon(1e-12));
    CHECK(binary_entropy(p) < std::log(2.0));
  }
  CHECK_THROWS_AS(binary_entropy(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(binary_entropy(1.1), std::invalid_argument);
}

TEST_CASE("residual information examples") {
  const std::vector<MatrixXd> before{MatrixXd::Identity(2, 2)};
  CHECK(residual_info(before, before) == 0.0);
  const std::vector<MatrixXd> after{diag({2, 1})};
  CHECK(residual_info(before, after) == doctest::Approx(0.5 * std::log(2.0)));
  // Shrinking is not allowed.
  CHECK_THROWS_AS(residual_info(after, before), std::invalid_argument);
  const std::vector<MatrixXd> two{MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2)};
  CHECK_THROWS_AS(residual_info(before, two), std::invalid_argument);
}

TEST_CASE("residual information equals summed gains along a trajectory") {
  Rng rng(7);
  for (int H : {1, 3}) {
    std::vector<MatrixXd> before, after;
    double gains = 0.0;
    for (int h = 0; h < H; ++h) {
      auto p = GaussianLinearPosterior::prior(10, 1.0, 1.0);
      for (int i = 0; i < 30; ++i) {
        VectorXd phi = standard_normal(rng, 10);
        p.absorb(phi / phi.norm(), 0.0);
      }
      before.push_back(p.precision());
      for (int t = 0; t < 100; ++t) {
        VectorXd phi = standard_normal(rng, 10);
        phi /= phi.norm();
        gains += p.info_gain(phi);
        p.absorb(phi, 1.0);
      }
      after.push_back(p.precision());
    }
    CHECK(std::abs(residual_info(before, after) - gains) <= 1e-8);
  }
}

TEST_CASE("coverage examples") {
  CoverageInputs iso{{MatrixXd::Identity(3, 3) * 50.0}, {50.0}, {MatrixXd::Identity(3, 3)}};
  const Coverage c = coverage_coeff(iso);
  CHECK(c.per_stage[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.aggregate == doctest::Approx(1.0).epsilon(1e-12));

  CoverageInputs dg{{diag({4, 1})}, {1.0}, {MatrixXd::Identity(2, 2)}};
  CHECK(coverage_coeff(dg).per_stage[0] == doctest::Approx(1.0));

  CoverageInputs zero{{diag({4, 1})}, {1.0}, {MatrixXd::Zero(2, 2)}};
  CHECK(coverage_coeff(zero).per_stage[0] == doctest::Approx(0.0));

  CoverageInputs bad{{diag({4, 1})}, {0.5}, {MatrixXd::Zero(2, 2)}};
  CHECK_THROWS_AS(coverage_coeff(bad), std::invalid_argument);
  CoverageInputs singular{{diag({1, 0})}, {1.0}, {MatrixXd::Zero(2, 2)}};
  CHECK_THROWS_AS(coverage_coeff(singular), NumericalError);
}

TEST_CASE("coverage agrees with an explicit inverse-root oracle") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int H = 1 + trial % 3;
    CoverageInputs in;
    double N = 0.0;
    for (int h = 0; h < H; ++h) {
      const double n = 1.0 + static_cast<double>(rng() % 40);
      in.grams.push_back(random_spd(rng, 5));
      in.counts.push_back(n);
      const MatrixXd x = standard_normal(rng, 5, 3);
      in.visitation.push_back(x * x.transpose() / 3.0);
      N += n;
    }
    const Coverage c = coverage_coeff(in);
    double agg = 0.0;
    for (int h = 0; h < H; ++h) {
      const double oracle = whitened_lambda_max(in.grams[h] / in.counts[h], in.visitation[h]);
      CHECK(c.per_stage[h] == doctest::Approx(oracle).epsilon(1e-9));
      agg += oracle / in.counts[h];
    }
    CHECK(c.aggregate == doctest::Approx(N / H * agg).epsilon(1e-9));
  }
}

TEST_CASE("coverage is invariant under a joint rotation") {
  Rng rng(19);
  for (Eigen::Index d : {2, 8, 32}) {
    const MatrixXd A = random_spd(rng, d);
    const MatrixXd x = standard_normal(rng, d, d);
    const MatrixXd B = x * x.transpose() / static_cast<double>(d);
    const MatrixXd Q = random_rotation(rng, d);
    const double c1 = coverage_coeff({{A}, {7.0}, {B}}).aggregate;
    const double c2 =
        coverage_coeff({{Q * A * Q.transpose()}, {7.0}, {Q * B * Q.transpose()}}).aggregate;
    CHECK(std::abs(c1 - c2) <= 1e-10 * std::max(1.0, std::abs(c1)));
  }
}

TEST_CASE("elliptical potential") {
  const int d = 4;
  const double T = 100;
  const std::vector<MatrixXd> balanced{MatrixXd::Identity(d, d) * (T / d)};
  CHECK(elliptical_L(balanced, T, d) == doctest::Approx(std::log(2.0)));
  CHECK(elliptical_L(balanced, 0, d) == 0.0);

  const std::vector<MatrixXd> two{MatrixXd::Identity(d, d), diag({10, 12, 20, 11})};
  CHECK(elliptical_L(two, T, d) == doctest::Approx(0.5 * (std::log(26.0) + std::log(3.5))));
  const std::vector<double> eigs{1.0, 10.0};
  CHECK(elliptical_L_from_eigs(eigs, T, d) == doctest::Approx(elliptical_L(two, T, d)));

  double prev = INFINITY;
  for (double lmin = 0.5; lmin < 100; lmin *= 2) {
    const std::vector<double> e{lmin};
    const double L = elliptical_L_from_eigs(e, T, d);
    CHECK(L < prev);
    prev = L;
  }
}

TEST_CASE("master inequality evaluator") {
  BoundInputs b;
  b.T = 100;
  b.residual_info = 0;
  CHECK(master_rhs(b) == 0.0);
  b.C_chi = 10;
  b.residual_info = 2;
  CHECK(master_rhs(b) == doctest::Approx(std::sqrt(2000.0)));

  BoundInputs def;
  def.H = 2;
  def.d = 3;
  CHECK(def.ratio_constant() == doctest::Approx(4 * 2 * 3 / std::log(2.0)));
  CHECK(default_ratio_constant(1, 1) == doctest::Approx(4 / std::log(2.0)));

  // eta adds at most T sqrt(C eta).
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    BoundInputs x;
    x.T = 1 + 500 * u(rng);
    x.C_chi = 0.1 + 20 * u(rng);
    x.residual_info = 10 * u(rng);
    x.eta = u(rng);
    BoundInputs x0 = x;
    x0.eta = 0;
    CHECK(master_rhs(x) <= master_rhs(x0) + x.T * std::sqrt(x.C_chi * x.eta) + 1e-12);
  }
}

TEST_CASE("master_rhs is monotone in every argument") {
  Rng rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    BoundInputs b;
    b.H = 1 + static_cast<int>(rng() % 4);
    b.d = 1 + static_cast<int>(rng() % 16);
    b.T = 1 + 1000 * u(rng);
    b.eta = u(rng);
    b.residual_info = 5 * u(rng);
    b.C_chi = u(rng) < 0.5 ? 0.0 : 1 + 50 * u(rng);
    const double base = master_rhs(b);
    auto bumped = [&](auto mutate) {
      BoundInputs c = b;
      mutate(c);
      return master_rhs(c);
    };
    CHECK(bumped([](BoundInputs& c) { c.T *= 1.5; }) >= base);
    CHECK(bumped([](BoundInputs& c) { c.eta += 0.1; }) >= base);
    CHECK(bumped([](BoundInputs& c) { c.residual_info += 0.3; }) >= base);
    CHECK(bumped([](BoundInputs& c) { c.C_chi = c.ratio_constant() * 2; }) >= base);
    CHECK(bumped([](BoundInputs& c) { c.H += 1; }) >= base);
    CHECK(bumped([](BoundInputs& c) { c.d += 1; }) >= base);
  }
}

TEST_CASE("theorem-1 branches") {
  BoundInputs b;
  b.H = 1;
  b.d = 1;
  b.T = 4;
  const auto br = theorem1_branches(b, std::log(2.0), 1.0);
  const double prefactor = std::sqrt(b.ratio_constant() / 2.0);
  CHECK(prefactor == doctest::Approx(std::sqrt(2.0 / std::log(2.0))));
  CHECK(br.sqrt_t == doctest::Approx(prefactor * std::sqrt(4 * std::log(2.0))));

  // Warm-start branch vanishes as N grows, at rate N^{-1/2}.
  b.N = 1;
  const double w1 = theorem1_branches(b, 1.0, 3.0).warm_start;
  double prev = INFINITY;
  for (double N = 1; N < 1e12; N *= 100) {
    b.N = N;
    const double w = theorem1_branches(b, 1.0, 3.0).warm_start;
    CHECK(w < prev);
    prev = w;
  }
  CHECK(prev == doctest::Approx(w1 / 1e5).epsilon(1e-12));
}

TEST_CASE("theorem-1 branch crossover") {
  // sqrt(T L) = T sqrt(C/N)  <=>  T* = L N / C.
  BoundInputs b;
  b.H = 2;
  b.d = 5;
  b.N = 400;
  const double L = 0.7, C = 3.0;
  const double t_star = L * b.N / C;
  b.T = t_star;
  const auto at = theorem1_branches(b, L, C);
  CHECK(at.sqrt_t == doctest::Approx(at.warm_start).epsilon(1e-12));
  b.T = 0.9 * t_star;
  auto below = theorem1_branches(b, L, C);
  CHECK(below.bound() == below.warm_start);
  CHECK(below.warm_start < below.sqrt_t);
  b.T = 1.1 * t_star;
  auto above = theorem1_branches(b, L, C);
  CHECK(above.bound() == above.sqrt_t);
  CHECK(above.sqrt_t < above.warm_start);
}

TEST_CASE("TS lower bound") {
  const auto lb = ts_lower_bound(0.5, 0.5, 0.5, 2);
  CHECK(lb.finite_t == doctest::Approx(0.375));
  CHECK(lb.threshold_t == 2);
  CHECK(lb.threshold_value == doctest::Approx(0.5 * (1 - std::exp(-1.0))));

  const double p = 0.0066;
  double prev = -1;
  for (long T = 0; T < 5000; T += 37) {
    const double v = ts_lower_bound(p, 1.0, 0.8, T).finite_t;
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(ts_lower_bound(p, 1.0, 0.8, 1000000).finite_t == doctest::Approx((1 - p) * 1.8));
  const auto at = ts_lower_bound(p, 1.0, 0.8, static_cast<long>(std::ceil(1 / p)));
  CHECK(at.finite_t >= at.threshold_value);
}

TEST_CASE("(1-p)^ceil(1/p) <= 1/e on (0, 1)") {
  for (int i = 1; i < 100000; ++i) {
    const double p = i / 100000.0;
    CHECK(std::pow(1 - p, std::ceil(1 / p)) <= std::exp(-1.0));
  }
}

TEST_CASE("IDS upper bound and separation ratio") {
  CHECK(ids_upper_bound(0.0, 0.3, 0.8) == doctest::Approx(0.3));
  CHECK(ids_upper_bound(1e-9, 0.3, 0.8) == doctest::Approx(0.3));
  CHECK(ids_upper_bound(0.1, 0.3, 0.8) == doctest::Approx(0.9 * 0.3 + 0.1 * 0.8));
  CHECK(separation_ratio(0.5, 0.5, 0.3) == doctest::Approx((1 - std::exp(-1.0)) / 0.3));
  CHECK(separation_ratio(0.5, 0.5, 0.3) == doctest::Approx(2.107).epsilon(1e-3));
  CHECK(separation_ratio(0.5, 0.5, 0.3) > 1);

  CHECK(strict_probe_condition(0.1, 0.3, 0.8, 0.5));
  CHECK_FALSE(strict_probe_condition(0.3, 0.3, 0.8, 0.5));
  CHECK(separation_condition(0.01, 0.3, 0.8, 0.5, 0.5));
  CHECK_FALSE(separation_condition(0.01, 0.7, 0.8, 0.5, 0.5));
}
