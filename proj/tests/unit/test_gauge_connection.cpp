#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ovm/errors.hpp"
#include "ovm/gauge_connection.hpp"

using namespace ovm;

namespace {

// Central-difference curl of A, the oracle for dA = *dV. The lattice index is
// pinned so the stencil differences one smooth function.
Eigen::Vector3d fd_curl(const PotentialParams& p, const ChartPoint3& x, Gauge g, double h) {
  const ConnectionOptions pin{.pin_index = 2 * choose_connection_index(p, x)};
  Eigen::Matrix3d J;  // J(i, k) = d A_i / d x_k
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e[k] = h;
    J.col(k) = (eval_connection(p, ChartPoint3::from(x.vec() + e), g, pin).A -
                eval_connection(p, ChartPoint3::from(x.vec() - e), g, pin).A) /
               (2 * h);
  }
  return {J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1)};
}

}  // namespace

TEST(GaugeConnection, SingleChargeMatchesMonopole) {
  PotentialParams p;
  p.eps = 0.5;
  const ChartPoint3 x{0.3, 0.4, 0.1};
  const double r2 = x.radial2();
  const double rho = x.vec().norm();
  for (Gauge g : {Gauge::StringPlus, Gauge::StringMinus}) {
    const auto A = eval_connection(p, x, g, {.single_charge = true});
    const double a_phi = kMonopoleCharge * (x.u / rho - string_sign(g));
    EXPECT_NEAR(A.a_phi, a_phi, 1e-15);
    EXPECT_NEAR(A.A[0], 0.0, 1e-15);
    EXPECT_NEAR(A.A[1], -a_phi * x.y2 / r2, 1e-15);
    EXPECT_NEAR(A.A[2], a_phi * x.y1 / r2, 1e-15);
  }
}

TEST(GaugeConnection, CurlEqualsGradientAtExamplePoint) {
  PotentialParams p;
  p.eps = 0.5;
  const ChartPoint3 x{0.2, 0.3, 0.1};
  const auto gradV = eval_V(p, x).grad;
  EXPECT_LT((fd_curl(p, x, Gauge::StringPlus, 1e-5) - hodge_dV(gradV)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GaugeConnection, CurlEqualsGradientWithHarmonicPart) {
  PotentialParams p;
  p.eps = 0.3;
  p.h_coeffs = {0.0, {0.05, 0.02}, {-0.04, 0.05}};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.15, 0.15), y(-0.5, 0.5);
  for (int i = 0; i < 40;) {
    const ChartPoint3 x{u(rng), y(rng), y(rng)};
    if (std::sqrt(x.radial2()) < 0.1) continue;
    ++i;
    for (Gauge g : {Gauge::StringPlus, Gauge::StringMinus})
      EXPECT_LT((fd_curl(p, x, g, 1e-5) - eval_V(p, x).grad).cwiseAbs().maxCoeff(), 1e-6);
  }
}

// Away from the strings the two gauges differ by 2 c* dphi, a closed form.
TEST(GaugeConnection, GaugeChangeIsClosed) {
  PotentialParams p;
  p.eps = 0.5;
  const ChartPoint3 x{0.2, 0.3, 0.1};
  const auto plus = eval_connection(p, x, Gauge::StringPlus);
  const auto minus = eval_connection(p, x, Gauge::StringMinus);
  EXPECT_NEAR(minus.a_phi - plus.a_phi, 2 * kMonopoleCharge, 1e-12);
  const Eigen::Vector3d dcurl = fd_curl(p, x, Gauge::StringPlus, 1e-5) - fd_curl(p, x, Gauge::StringMinus, 1e-5);
  EXPECT_LT(dcurl.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(GaugeConnection, AzimuthalComponentIsRotationInvariant) {
  PotentialParams p;
  p.eps = 0.4;
  const double r = 0.35;
  const double ref = eval_connection(p, {0.1, r, 0.0}, Gauge::StringPlus).a_phi;
  for (double phi : {0.5, 2.0, 3.5, 5.9})
    EXPECT_NEAR(eval_connection(p, {0.1, r * std::cos(phi), r * std::sin(phi)}, Gauge::StringPlus).a_phi, ref, 1e-13);
}

TEST(GaugeConnection, RejectsPointsOnString) {
  PotentialParams p;
  p.eps = 0.5;
  try {
    eval_connection(p, {-0.2, 1e-6, 0.0}, Gauge::StringPlus);
    ADD_FAILURE() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OnDiracString);
  }
  EXPECT_THROW(monopole_connection(1.0, {-0.2, 0.0, 0.0}, Gauge::StringPlus, 1e-3), Error);
  EXPECT_NO_THROW(monopole_connection(1.0, {0.2, 0.0, 0.0}, Gauge::StringPlus, 1e-3));
}
