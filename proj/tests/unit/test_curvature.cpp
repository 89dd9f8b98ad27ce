#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ovm/curvature.hpp"
#include "ovm/errors.hpp"

using namespace ovm;

namespace {

// Frozen from tests/oracles/taub_nut_golden.py: |Rm| of taub_nut(1/4pi) at
// (0.3, 0.4, sqrt(0.75)), rho = 1.
constexpr double kTaubNutNormAtUnitRadius = 0.3098377407706543;

// Unit round S^2 (polar angle x0, azimuth x1) times a flat plane.
class SphereTimesPlane final : public MetricField::Model {
 public:
  Matrix4 eval(const ChartPoint4& p) const override {
    const double s = std::sin(p.base.u);
    return Eigen::Vector4d(1.0, s * s, 1.0, 1.0).asDiagonal();
  }
  MetricKind kind() const override { return MetricKind::Custom; }
};

class Degenerate final : public MetricField::Model {
 public:
  Matrix4 eval(const ChartPoint4&) const override { return Eigen::Vector4d(1.0, 1.0, 1.0, 0.0).asDiagonal(); }
  MetricKind kind() const override { return MetricKind::Custom; }
};

PotentialParams at(double eps) {
  PotentialParams p;
  p.eps = eps;
  return p;
}

Matrix4 random_orthogonal(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Matrix4 m;
  for (int i = 0; i < 16; ++i) m.data()[i] = n(rng);
  return Eigen::HouseholderQR<Matrix4>(m).householderQ();
}

const std::vector<ChartPoint4> kPoints = {
    {{0.1, 0.2, -0.3}, 0.1}, {{-0.12, 0.3, 0.25}, 0.6}, {{0.05, -0.15, 0.1}, 0.9}, {{0.0, 0.4, 0.0}, 0.3}};

}  // namespace

TEST(Curvature, FlatFieldHasNoCurvature) {
  const auto r = riemann_at(flat_r3_product(), {{0.1, 0.2, 0.3}, 0.0});
  EXPECT_LT(r.norm_rm, 1e-9);
  EXPECT_LT(r.norm_ric, 1e-9);
}

TEST(Curvature, RoundSphereSignAndNorms) {
  const MetricField g(std::make_shared<SphereTimesPlane>());
  const auto r = riemann_at(g, {{1.1, 0.3, 0.0}, 0.0}, 1e-3);
  EXPECT_NEAR(r.riemann(0, 1, 0, 1), 1.0, 1e-8);
  EXPECT_NEAR(r.riemann(0, 1, 1, 0), -1.0, 1e-8);
  EXPECT_NEAR(r.ricci(0, 0), 1.0, 1e-8);
  EXPECT_NEAR(r.ricci(1, 1), 1.0, 1e-8);
  EXPECT_NEAR(r.norm_rm, 2.0, 1e-8);
  EXPECT_NEAR(r.norm_ric, std::sqrt(2.0), 1e-8);
}

TEST(Curvature, TaubNutGolden) {
  const auto r = riemann_at(taub_nut(kMonopoleCharge), {{0.3, 0.4, std::sqrt(0.75)}, 0.0});
  EXPECT_NEAR(r.norm_rm / kTaubNutNormAtUnitRadius, 1.0, 1e-7);
  EXPECT_LT(r.norm_ric, 1e-7);
}

TEST(Curvature, GaugeInvariance) {
  const auto plus = gh_metric(at(0.3), Gauge::StringPlus);
  const auto minus = gh_metric(at(0.3), Gauge::StringMinus);
  for (const auto& p : kPoints) {
    const auto a = riemann_at(plus, p), b = riemann_at(minus, p);
    EXPECT_NEAR(a.norm_rm / b.norm_rm, 1.0, 1e-6);
    EXPECT_LT(std::abs(a.norm_ric - b.norm_ric), 1e-6);
  }
}

TEST(Curvature, ScalingCovariance) {
  const double eps = 0.3;
  const auto g = gh_metric(at(eps), Gauge::StringPlus);
  for (double lambda : {0.1, 2.0, log_scale(eps) / eps})
    for (const auto& p : kPoints)
      EXPECT_NEAR(riemann_at(rescale(g, lambda), p).norm_rm * lambda / riemann_at(g, p).norm_rm, 1.0, 1e-8);
}

TEST(Curvature, FrameIndependence) {
  std::mt19937_64 rng(5);
  const auto r = riemann_at(gh_metric(at(0.3), Gauge::StringPlus), kPoints[0]);
  for (int k = 0; k < 5; ++k) {
    const Matrix4 Q = random_orthogonal(rng);
    EXPECT_NEAR(change_frame(r.riemann, Q).norm() / r.norm_rm, 1.0, 1e-10);
    EXPECT_NEAR((Q.transpose() * r.ricci * Q).norm(), r.ricci.norm(), 1e-10 * (1.0 + r.ricci.norm()));
  }
}

TEST(Curvature, AlgebraicSymmetries) {
  for (const auto& g : {gh_metric(at(0.3), Gauge::StringPlus), taub_nut(kMonopoleCharge)})
    for (const auto& p : kPoints) {
      const auto r = riemann_at(g, p);
      EXPECT_GE(r.norm_rm, 0.0);
      EXPECT_LT(symmetry_defect(r.riemann), 10 * r.est_error + 1e-9 * r.norm_rm);
    }
}

TEST(Curvature, Errors) {
  try {
    riemann_at(MetricField(std::make_shared<Degenerate>()), kPoints[0], 1e-3);
    ADD_FAILURE() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularMetric);
  }
  try {
    riemann_at(taub_nut(kMonopoleCharge), kPoints[0], 0.0, 1e-30);
    ADD_FAILURE() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StepTooLarge);
  }
}

TEST(Curvature, RicciScanDetectsNonHarmonicPotential) {
  const auto params = at(0.5);
  const std::vector<ChartPoint4> grid(kPoints.begin(), kPoints.end());
  EXPECT_LT(ricci_flatness_scan(gh_metric(params, Gauge::StringPlus), grid).max_norm_ric, 1e-5);
  const auto bad = gh_custom(
      [params](const ChartPoint3& x) {
        return GHData{eval_V_value(params, x) + 0.01 * x.u * x.u, eval_connection(params, x, Gauge::StringPlus).A};
      },
      0.05);
  EXPECT_GT(ricci_flatness_scan(bad, grid).max_norm_ric, 1e-3);
}

TEST(Curvature, SweepRowFlags) {
  const auto unit = make_sweep_row(1.0, 2.0, {}, 10, 0);
  EXPECT_TRUE(unit.not_applicable);
  EXPECT_TRUE(std::isnan(unit.ratio_upper));
  EXPECT_TRUE(std::isnan(unit.ratio_lower));

  const auto row = make_sweep_row(0.1, 50.0, {}, 100, 2);
  EXPECT_TRUE(row.degraded);
  EXPECT_DOUBLE_EQ(row.ratio_upper, 50.0 * 0.1 / std::log(10.0));
  EXPECT_DOUBLE_EQ(row.ratio_lower, 50.0 * 0.1 * std::log(10.0) * std::log(10.0));
  EXPECT_FALSE(make_sweep_row(0.1, 50.0, {}, 100, 1).degraded);
  EXPECT_TRUE(make_sweep_row(0.1, 50.0, {}, 0, 0).degraded);
}

TEST(Curvature, TaubNutRowAtUnitEpsIsNotApplicable) {
  GridPolicy policy;
  policy.radial_points = 4;
  policy.polar_angles = 2;
  const auto row = sweep_field(1.0, taub_nut(kMonopoleCharge), nut_grid(policy, 0.05), policy);
  EXPECT_TRUE(row.not_applicable);
  EXPECT_GT(row.max_norm_rm, 0.0);
}

TEST(Curvature, SweepRejectsBadSchedules) {
  for (const std::vector<double>& eps : {std::vector<double>{0.1, 0.2}, {0.2, 0.2}, {1.0, 0.5}, {}}) {
    try {
      curvature_sweep(eps, {});
      ADD_FAILURE() << "no exception";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidSchedule);
    }
  }
}

TEST(Curvature, ShortSweepKeepsUpperRatioInBand) {
  GridPolicy policy;
  policy.radial_points = 12;
  policy.polar_angles = 3;
  const auto rows = curvature_sweep({0.2, 0.05, 0.01}, policy);
  double lo = INFINITY, hi = 0.0;
  for (const auto& r : rows) {
    EXPECT_FALSE(r.degraded);
    lo = std::min(lo, r.ratio_upper);
    hi = std::max(hi, r.ratio_upper);
  }
  EXPECT_LT(hi / lo, 10.0);
}
