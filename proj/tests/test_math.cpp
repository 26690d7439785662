#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "espmcmc/math.hpp"

using namespace espmcmc;

TEST_CASE("log_sum_exp basics") {
  std::vector<double> v{0.0, 0.0};
  REQUIRE(log_sum_exp(v) == Catch::Approx(std::log(2.0)));

  std::vector<double> big{1000.0, 1000.0};
  REQUIRE(log_sum_exp(big) == Catch::Approx(1000.0 + std::log(2.0)));

  std::vector<double> empty_mass{neg_inf, neg_inf};
  REQUIRE(log_sum_exp(empty_mass) == neg_inf);

  std::vector<double> mixed{neg_inf, 2.0};
  REQUIRE(log_sum_exp(mixed) == Catch::Approx(2.0));
}

TEST_CASE("normalize_log_weights") {
  std::vector<double> logw{std::log(1.0), std::log(3.0)};
  std::vector<double> W(2);
  double lse = normalize_log_weights(logw, W);
  REQUIRE(lse == Catch::Approx(std::log(4.0)));
  REQUIRE(W[0] == Catch::Approx(0.25));
  REQUIRE(W[1] == Catch::Approx(0.75));

  std::vector<double> dead{neg_inf, neg_inf};
  REQUIRE_THROWS_AS(normalize_log_weights(dead, W), DegenerateWeightsError);
}

TEST_CASE("scalar log densities") {
  // standard normal at 0
  REQUIRE(log_normal_pdf(0.0, 0.0, 1.0) == Catch::Approx(-0.5 * log_two_pi));
  // N(1, 4) at 3: -0.5(log 2pi + log 4 + 4/4)
  REQUIRE(log_normal_pdf(3.0, 1.0, 4.0) ==
          Catch::Approx(-0.5 * (log_two_pi + std::log(4.0) + 1.0)));

  // Binomial(10, 0.5) at 5 = 252/1024
  REQUIRE(log_binomial_pmf(5, 10, 0.5) ==
          Catch::Approx(std::log(252.0 / 1024.0)));
  REQUIRE(log_binomial_pmf(-1, 10, 0.5) == neg_inf);

  // IG(1, 1) at 1: pdf = exp(-1) -> log = -1 - 2*log(1) = -1
  REQUIRE(log_inverse_gamma_pdf(1.0, 1.0, 1.0) == Catch::Approx(-1.0));
  REQUIRE(log_inverse_gamma_pdf(-1.0, 1.0, 1.0) == neg_inf);
}

TEST_CASE("half-t density normalizes") {
  // quadrature over a wide grid
  double acc = 0.0, h = 0.001;
  for (double x = h / 2; x < 200.0; x += h)
    acc += std::exp(log_half_t_pdf(x, 4.0, 1.0)) * h;
  REQUIRE(acc == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("jitter rule") {
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd j = jittered_covariance(zero);
  REQUIRE(j(0, 0) == Catch::Approx(1e-12));

  Eigen::MatrixXd c(2, 2);
  c << 4.0, 0.0, 0.0, 2.0;
  Eigen::MatrixXd jc = jittered_covariance(c);
  REQUIRE(jc(0, 0) == Catch::Approx(4.0 + 1e-9 * 3.0));

  // rank-deficient matrix becomes factorizable
  Eigen::MatrixXd rd(2, 2);
  rd << 1.0, 1.0, 1.0, 1.0;
  REQUIRE_NOTHROW(cholesky_with_jitter(rd));
}

TEST_CASE("multivariate normal pdf and sampling") {
  Eigen::VectorXd m(2);
  m << 1.0, -1.0;
  Eigen::MatrixXd S(2, 2);
  S << 2.0, 0.5, 0.5, 1.0;
  MvNormal g = MvNormal::from_moments(m, S);

  // against the direct formula
  Eigen::VectorXd x(2);
  x << 0.0, 0.0;
  Eigen::MatrixXd Sj = jittered_covariance(S);
  double expected = -0.5 * (2 * log_two_pi + std::log(Sj.determinant()) +
                            (x - m).transpose() * Sj.inverse() * (x - m));
  REQUIRE(g.log_pdf(x) == Catch::Approx(expected).epsilon(1e-10));

  Rng rng(3);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd ssum = Eigen::MatrixXd::Zero(2, 2);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd z = g.sample(rng);
    sum += z;
    ssum += z * z.transpose();
  }
  Eigen::VectorXd mean = sum / n;
  Eigen::MatrixXd cov = ssum / n - mean * mean.transpose();
  REQUIRE((mean - m).norm() < 0.02);
  REQUIRE((cov - S).norm() < 0.05);
}

TEST_CASE("multivariate student-t pdf matches the 1-d formula") {
  Eigen::VectorXd m(1);
  m << 0.5;
  Eigen::MatrixXd S(1, 1);
  S << 2.0;
  double dof = 4.0;
  MvStudentT t = MvStudentT::from_moments(m, S, dof);

  Eigen::VectorXd x(1);
  x << 1.5;
  double sj = jittered_covariance(S)(0, 0);
  double z = (x[0] - m[0]) / std::sqrt(sj);
  double expected = std::lgamma(2.5) - std::lgamma(2.0) -
                    0.5 * std::log(dof * M_PI) - 0.5 * std::log(sj) -
                    2.5 * std::log1p(z * z / dof);
  REQUIRE(t.log_pdf(x) == Catch::Approx(expected).epsilon(1e-10));
}
