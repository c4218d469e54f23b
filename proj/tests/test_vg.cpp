#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "kmsnorm/oracle.hpp"
#include "kmsnorm/quadrature.hpp"
#include "kmsnorm/sim.hpp"
#include "kmsnorm/vg.hpp"

using namespace kmsnorm;

namespace {

const std::vector<VgParams> kParams{
    {3.0, 0.5, 1.0, 0.0}, {1.0, 0.5, 0.8660254037844386, 0.0}, {5.0, -0.4, 0.8, 0.5}, {2.5, 0.0, 1.5, -1.0},
    {0.6, 1.2, 0.7, 2.0}, {12.0, 0.1, 0.3, 0.0}};

double pdf_or_zero(const VgParams& q, double x) { return x == q.mu ? 0.0 : vg_pdf(q, x); }

} // namespace

TEST(VgPdf, LaplaceSpecialCase) {
  // r = 2, theta = 0: W ~ Exp(mean 2) and the law is Laplace(0, 1).
  const VgParams q{2.0, 0.0, 1.0, 0.0};
  EXPECT_NEAR(vg_pdf(q, 1.0), 0.183939720585721160798, 1e-14);
  for (double x : {-3.0, -0.2, 0.7, 4.0}) EXPECT_NEAR(vg_pdf(q, x), 0.5 * std::exp(-std::abs(x)), 1e-14);
  EXPECT_NEAR(vg_pdf(q, 0.0), 0.5, 1e-14);
}

TEST(VgPdf, ValueAtCentreIsTheLimit) {
  for (const auto& q : kParams) {
    if (q.r <= 1.0) {
      EXPECT_THROW(vg_pdf(q, q.mu), std::domain_error);
      continue;
    }
    // approach from both sides; the density is continuous at mu for r > 1
    // (with a cusp for r <= 2), so the one-sided limits converge slowly.
    const double at = vg_pdf(q, q.mu);
    EXPECT_NEAR(vg_pdf(q, q.mu + 1e-9), at, 1e-6 * std::max(1.0, at));
    EXPECT_NEAR(vg_pdf(q, q.mu - 1e-9), at, 1e-6 * std::max(1.0, at));
  }
}

TEST(VgPdf, MatchesGammaMixtureQuadrature) {
  for (const auto& q : kParams) {
    for (double x = -4.3; x < 4.5; x += 0.95) {
      EXPECT_NEAR(vg_pdf(q, x), oracle::vg_pdf_quadrature(q, x), 1e-7) << "r=" << q.r << " x=" << x;
    }
  }
}

TEST(VgPdf, IntegratesToOneWithStatedMoments) {
  const QuadratureSpec spec{1e-12, 1e-10, 4000};
  for (const auto& q : kParams) {
    auto f0 = [&](double x) { return pdf_or_zero(q, x); };
    auto f1 = [&](double x) { return x * pdf_or_zero(q, x); };
    auto f2 = [&](double x) { return (x - q.mean()) * (x - q.mean()) * pdf_or_zero(q, x); };
    EXPECT_NEAR(integrate_real_line(f0, q.mu, spec), 1.0, 1e-8) << "r=" << q.r;
    EXPECT_NEAR(integrate_real_line(f1, q.mu, spec), q.mean(), 1e-7) << "r=" << q.r;
    EXPECT_NEAR(integrate_real_line(f2, q.mu, spec), q.variance(), 1e-6 * q.variance()) << "r=" << q.r;
  }
}

TEST(VgPdf, InvalidParameters) {
  EXPECT_THROW(vg_pdf({0.0, 0.0, 1.0, 0.0}, 1.0), std::domain_error);
  EXPECT_THROW(vg_pdf({1.0, 0.0, 0.0, 0.0}, 1.0), std::domain_error);
  EXPECT_THROW(vg_pdf({1.0, NAN, 1.0, 0.0}, 1.0), std::domain_error);
  EXPECT_THROW(vg_pdf({-2.0, 0.0, 1.0, 0.0}, 1.0), std::domain_error);
}

TEST(VgCf, AgreesWithFourierIntegralOfPdf) {
  const QuadratureSpec spec{1e-12, 1e-10, 8000};
  for (const auto& q : {kParams[0], kParams[2], kParams[3]}) {
    EXPECT_EQ(vg_cf(q, 0.0), std::complex<double>(1.0, 0.0));
    for (double t : {0.3, 1.1, 2.5}) {
      const double re = integrate_real_line([&](double x) { return std::cos(t * x) * pdf_or_zero(q, x); }, q.mu, spec);
      const double im = integrate_real_line([&](double x) { return std::sin(t * x) * pdf_or_zero(q, x); }, q.mu, spec);
      const auto cf = vg_cf(q, t);
      EXPECT_NEAR(cf.real(), re, 1e-7) << "r=" << q.r << " t=" << t;
      EXPECT_NEAR(cf.imag(), im, 1e-7) << "r=" << q.r << " t=" << t;
      EXPECT_LE(std::abs(cf), 1.0 + 1e-15);
    }
  }
}

TEST(VgCf, ProductOfNormalsClosedForm) {
  // E exp(i t xi1 xi2) = (1 - 2 i rho s1 s2 t + (1 - rho^2) s1^2 s2^2 t^2)^(-1/2)
  const BivariateGaussianSpec g{2.0, 3.0, 0.5};
  const VgParams q = gaussian_product_law(g);
  for (double t : {-0.7, 0.05, 0.4}) {
    const double s = g.sigma1 * g.sigma2;
    const std::complex<double> direct =
        std::pow(std::complex<double>(1.0 + (1.0 - g.rho * g.rho) * s * s * t * t, -2.0 * g.rho * s * t), -0.5);
    EXPECT_NEAR(std::abs(vg_cf(q, t) - direct), 0.0, 1e-14);
  }
}

TEST(VgCdf, MonotoneAndConsistentWithSortedSweep) {
  for (const auto& q : kParams) {
    std::vector<double> xs;
    for (double x = -6.0; x <= 6.0; x += 0.37) xs.push_back(x);
    const auto sweep = vg_cdf_sorted(q, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      EXPECT_NEAR(sweep[i], vg_cdf(q, xs[i]), 1e-8) << "r=" << q.r << " x=" << xs[i];
      if (i > 0) {
        EXPECT_GE(sweep[i], sweep[i - 1]);
      }
    }
    EXPECT_LT(vg_cdf(q, -60.0), 1e-10);
    EXPECT_GT(vg_cdf(q, 60.0), 1.0 - 1e-10);
  }
  EXPECT_NEAR(vg_cdf({2.0, 0.0, 1.0, 0.0}, 0.0), 0.5, 1e-12);
  EXPECT_THROW(vg_cdf_sorted(kParams[0], std::vector<double>{1.0, 0.0}), std::invalid_argument);
}

TEST(VgSample, MomentsWithinStandardErrors) {
  for (const auto& q : kParams) {
    RandomStream s(99, static_cast<std::uint64_t>(q.r * 100));
    const std::size_t n = 200'000;
    const auto xs = vg_sample(q, s, n);
    double m = 0, v = 0;
    for (double x : xs) m += x;
    m /= n;
    for (double x : xs) v += (x - m) * (x - m);
    v /= n - 1;
    EXPECT_NEAR(m, q.mean(), 4.0 * std::sqrt(q.variance() / n)) << "r=" << q.r;
    EXPECT_NEAR(v / q.variance(), 1.0, 0.05) << "r=" << q.r;
  }
  RandomStream s(1, 1);
  EXPECT_THROW(vg_sample(kParams[0], s, 0), std::invalid_argument);
}

TEST(GaussianProduct, LawParameters) {
  const VgParams q = gaussian_product_law({2.0, 3.0, 0.5});
  EXPECT_EQ(q.r, 1.0);
  EXPECT_NEAR(q.theta, 3.0, 1e-15);
  EXPECT_NEAR(q.sigma, 3.0 * std::sqrt(3.0), 1e-14);
  EXPECT_EQ(q.mu, 0.0);
  const VgParams qn = gaussian_product_sum_law({1.0, 1.0, -0.2}, 7);
  EXPECT_EQ(qn.r, 7.0);
  EXPECT_NEAR(qn.theta, -0.2, 1e-15);
  EXPECT_NEAR(qn.sigma, std::sqrt(0.96), 1e-15);
  EXPECT_THROW(gaussian_product_law({0.0, 1.0, 0.0}), std::domain_error);
  EXPECT_THROW(gaussian_product_law({1.0, 1.0, 1.0}), std::domain_error);
  EXPECT_THROW(gaussian_product_sum_law({1.0, 1.0, 0.0}, 0), std::invalid_argument);
}

TEST(GaussianProduct, SampledProductsFollowTheLaw) {
  const BivariateGaussianSpec g{2.0, 3.0, 0.5};
  const VgParams q = gaussian_product_sum_law(g, 3);
  RandomStream s(5, 0);
  const double c = std::sqrt(1.0 - g.rho * g.rho);
  std::vector<double> xs(30'000);
  for (double& x : xs) {
    x = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double z1 = s.normal(), z2 = s.normal();
      x += g.sigma1 * z1 * g.sigma2 * (g.rho * z1 + c * z2);
    }
  }
  std::sort(xs.begin(), xs.end());
  const auto cdf = vg_cdf_sorted(q, xs);
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d = std::max({d, std::abs(cdf[i] - double(i) / xs.size()), std::abs(cdf[i] - double(i + 1) / xs.size())});
  }
  EXPECT_LT(d, 1.63 / std::sqrt(double(xs.size()))); // 1% critical value
}

TEST(ProductVector, SigmaUEdgeCases) {
  ProductVectorSpec one{{0.4}, Eigen::MatrixXd::Identity(1, 1), {1.5}, 2.0};
  ProductVectorSampler s1(one);
  EXPECT_NEAR(s1.sigma_u()(0, 0), 1.0, 1e-15);

  // rho^(kl) = rho^(k) rho^(l) off the diagonal gives the identity
  const std::vector<double> r{0.3, -0.2, 0.5};
  Eigen::MatrixXd within(3, 3);
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) within(k, l) = k == l ? 1.0 : r[k] * r[l];
  ProductVectorSampler s3({r, within, {1.0, 1.0, 1.0}, 1.0});
  EXPECT_TRUE(s3.sigma_u().isApprox(Eigen::MatrixXd::Identity(3, 3), 1e-14));
}

TEST(ProductVector, IndefiniteCovarianceRaises) {
  Eigen::MatrixXd within(3, 3);
  within << 1.0, -0.9, -0.9, -0.9, 1.0, -0.9, -0.9, -0.9, 1.0;
  try {
    ProductVectorSampler({{0.0, 0.0, 0.0}, within, {1.0, 1.0, 1.0}, 1.0});
    FAIL() << "expected CovarianceError";
  } catch (const CovarianceError& e) {
    EXPECT_LT(e.min_eigenvalue(), -0.5);
  }
  // and the diagnostic oracle reports rather than raises
  const auto diag = oracle::sigma_u_matrix({{0.0, 0.0, 0.0}, within, {1.0, 1.0, 1.0}, 1.0});
  EXPECT_NEAR(diag.min_eigenvalue, -0.8, 1e-12);
}

TEST(ProductVector, InvalidSpecs) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(ProductVectorSampler({{}, Eigen::MatrixXd(), {}, 1.0}), std::invalid_argument);
  EXPECT_THROW(ProductVectorSampler({{0.1, 0.2}, id, {1.0}, 1.0}), std::invalid_argument);
  EXPECT_THROW(ProductVectorSampler({{0.1, 1.0}, id, {1.0, 1.0}, 1.0}), std::invalid_argument);
  EXPECT_THROW(ProductVectorSampler({{0.1, 0.2}, id, {1.0, 1.0}, 0.0}), std::invalid_argument);
  Eigen::MatrixXd asym = id;
  asym(0, 1) = 0.3;
  EXPECT_THROW(ProductVectorSampler({{0.1, 0.2}, asym, {1.0, 1.0}, 1.0}), std::invalid_argument);
  RandomStream s(1, 1);
  EXPECT_THROW(product_vector_sample({{0.1, 0.2}, id, {1.0, 1.0}, 1.0}, 0.5, s), std::invalid_argument);
}

// Mean n s1k s2 rho^(k) and covariance n s1k s1l s2^2 (rho^(kl) + rho^(k) rho^(l)).
TEST(ProductVector, FirstTwoMomentsOfTheSumVector) {
  const ModelConfig c{1, 4, 0.6, 1.0, BetaSpec::hyperbolic()};
  ProductVectorSpec spec = oracle::regression_product_spec(c);
  spec.sigma1 = {1.0, 2.0, 0.5, 1.0};
  const ProductVectorSampler sampler(spec);
  const double n = 5.0;
  const int m = 60'000;
  RandomStream s(8, 8);
  Eigen::MatrixXd draws(m, 4);
  for (int i = 0; i < m; ++i) {
    const auto v = sampler.sample(n, s);
    for (int k = 0; k < 4; ++k) draws(i, k) = v[k];
  }
  const Eigen::RowVectorXd mean = draws.colwise().mean();
  const Eigen::MatrixXd centred = draws.rowwise() - mean;
  const Eigen::MatrixXd cov = centred.transpose() * centred / (m - 1);
  for (int k = 0; k < 4; ++k) {
    const double s2 = spec.sigma2 * spec.sigma2;
    const double var_k = n * spec.sigma1[k] * spec.sigma1[k] * s2 * (1.0 + spec.rho_cross[k] * spec.rho_cross[k]);
    EXPECT_NEAR(mean[k], n * spec.sigma1[k] * spec.sigma2 * spec.rho_cross[k], 5.0 * std::sqrt(var_k / m));
    for (int l = 0; l < 4; ++l) {
      const double expect = n * spec.sigma1[k] * spec.sigma1[l] * s2 *
                            (spec.rho_within(k, l) + spec.rho_cross[k] * spec.rho_cross[l]);
      EXPECT_NEAR(cov(k, l), expect, 0.05 * std::sqrt(cov(k, k) * cov(l, l))) << k << "," << l;
    }
  }
}
