#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ovm/curvature.hpp"
#include "ovm/errors.hpp"
#include "ovm/metric_models.hpp"

using namespace ovm;

namespace {

PotentialParams at(double eps) {
  PotentialParams p;
  p.eps = eps;
  return p;
}

std::vector<ChartPoint4> regular_points(double eps, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5), y(-0.4, 0.4), t(0.0, 1.0);
  std::vector<ChartPoint4> out;
  while (int(out.size()) < n) {
    const ChartPoint3 b{eps * u(rng), y(rng), y(rng)};
    if (std::sqrt(b.radial2()) < 0.05) continue;
    out.push_back({b, t(rng)});
  }
  return out;
}

}  // namespace

TEST(MetricModels, ConstantPotentialIsIdentity) {
  const auto g = gh_custom([](const ChartPoint3&) { return GHData{}; });
  for (const auto& p : regular_points(0.5, 5, 1)) EXPECT_EQ(g(p), Matrix4::Identity());
}

TEST(MetricModels, DeterminantIsVSquared) {
  auto params = at(0.4);
  params.h_coeffs = {0.0, {0.1, 0.2}};
  for (Gauge gauge : {Gauge::StringPlus, Gauge::StringMinus}) {
    const auto g = gh_metric(params, gauge);
    for (const auto& p : regular_points(0.4, 20, 2)) {
      const double V = eval_V(params, p.base).value;
      EXPECT_NEAR(g(p).determinant() / (V * V), 1.0, 1e-12);
      EXPECT_EQ(Eigen::LLT<Matrix4>(g(p)).info(), Eigen::Success);
    }
  }
}

TEST(MetricModels, ComponentsFollowAnsatz) {
  const auto params = at(0.4);
  const ChartPoint4 p{{0.1, 0.2, -0.3}, 0.3};
  const double V = eval_V(params, p.base).value;
  const auto A = eval_connection(params, p.base, Gauge::StringPlus).A;
  const Matrix4 g = gh_metric(params, Gauge::StringPlus)(p);
  EXPECT_NEAR(g(3, 3), 1.0 / V, 1e-14);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(g(i, 3), A[i] / V, 1e-14);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(g(i, j), (i == j ? V : 0.0) + A[i] * A[j] / V, 1e-13);
  }
}

TEST(MetricModels, FiberLengthIsInverseRootV) {
  const auto params = at(0.4);
  const auto g = gh_metric(params, Gauge::StringPlus);
  for (const auto& p : regular_points(0.4, 5, 3))
    EXPECT_NEAR(fiber_length(g, p.base), 1.0 / std::sqrt(eval_V(params, p.base).value), 1e-12);
}

TEST(MetricModels, RescaledFieldIsScaledOriginal) {
  auto params = at(0.2);
  params.h_coeffs = {0.0, 0.0, {0.2, 0.1}};
  const auto g = gh_metric(params, Gauge::StringPlus);
  const auto g1 = gh_metric_rescaled(params, Gauge::StringPlus);
  const ChartPoint4 q{{0.3, 0.7, -0.4}, 0.2};
  const ChartPoint4 p{{0.2 * q.base.u, 0.2 * q.base.y1, 0.2 * q.base.y2}, q.t};
  // (u, y) = eps (s, v): eps^{-1} g in s-coordinates picks up eps^2 on base rows.
  Eigen::Vector4d J(0.2, 0.2, 0.2, 1.0);
  const Matrix4 pulled = (J.asDiagonal() * g(p) * J.asDiagonal()) / 0.2;
  EXPECT_LT((pulled - g1(q)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(MetricModels, TaubNutFlattensAtInfinity) {
  const auto g = taub_nut(kMonopoleCharge);
  for (double rho : {10.0, 100.0, 1000.0}) {
    const double dev = (g({{rho, 0.0, 0.0}, 0.0}) - Matrix4::Identity()).cwiseAbs().maxCoeff();
    EXPECT_LT(dev, 2 * kMonopoleCharge / rho);
  }
}

TEST(MetricModels, TaubNutDeterminant) {
  const auto g = taub_nut(0.7);
  for (const auto& p : regular_points(1.0, 10, 4)) {
    const double V = 1.0 + 0.7 / p.base.vec().norm();
    EXPECT_NEAR(g(p).determinant() / (V * V), 1.0, 1e-12);
  }
}

TEST(MetricModels, RescaleByOneIsIdentity) {
  const auto g = gh_metric(at(0.3), Gauge::StringPlus);
  const auto r = rescale(g, 1.0);
  for (const auto& p : regular_points(0.3, 5, 5)) EXPECT_EQ(r(p), g(p));
}

TEST(MetricModels, RescaleScalesFlatDistances) {
  const double lambda = 2.5;
  const auto flat = flat_r3_product();
  const auto scaled = rescale(flat, lambda);
  const Vector4 a(0.1, -0.2, 0.3, 0.0), b(0.7, 0.4, -0.1, 0.5);
  auto length = [&](const MetricField& g) {
    const Vector4 d = b - a;
    double sum = 0.0;
    for (int k = 0; k < 16; ++k) {
      const Vector4 x = a + (k + 0.5) / 16.0 * d;
      sum += std::sqrt(d.dot(g(ChartPoint4::from(x)) * d)) / 16.0;
    }
    return sum;
  };
  EXPECT_NEAR(length(scaled) / length(flat), std::sqrt(lambda), 1e-14);
}

TEST(MetricModels, CurvatureNormScalesInversely) {
  const auto g = gh_metric(at(0.4), Gauge::StringPlus);
  const double lambda = 3.7;
  const auto r = rescale(g, lambda);
  for (const auto& p : regular_points(0.4, 20, 6)) {
    const double base = riemann_at(g, p).norm_rm;
    EXPECT_NEAR(riemann_at(r, p).norm_rm * lambda / base, 1.0, 1e-8);
  }
}

TEST(MetricModels, FlatS1R2Components) {
  const Matrix4 g = flat_s1r2(2.5)({{0.1, 0.2, 0.3}, 0.4});
  EXPECT_EQ(g, Eigen::Vector4d(2.5, 2.5, 2.5, 1.0).asDiagonal().toDenseMatrix());
}

TEST(MetricModels, PeriodMap) {
  const HarmonicPolynomial zero;
  const auto tau = eval_tau(std::exp(-2 * kPi), zero);
  EXPECT_NEAR(tau.real(), 0.0, 1e-15);
  EXPECT_NEAR(tau.imag(), 1.0, 1e-15);

  const std::complex<double> y(0.3, -0.2);
  const auto once = eval_tau(y, zero, 1) - eval_tau(y, zero);
  EXPECT_NEAR(once.real(), 1.0, 1e-15);
  EXPECT_NEAR(once.imag(), 0.0, 1e-15);

  const HarmonicPolynomial h({0.0, {0.0, 1.0}});
  const std::complex<double> i(0.0, 1.0);
  const auto expected = std::log(0.5) / (2 * kPi * i) + i * (i * 0.5);
  EXPECT_NEAR(std::abs(eval_tau(0.5, h) - expected), 0.0, 1e-15);

  EXPECT_THROW(eval_tau(0.0, zero), Error);
}
