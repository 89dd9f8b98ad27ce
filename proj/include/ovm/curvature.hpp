#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ovm/metric_models.hpp"

namespace ovm {

/// Rank-4 tensor on a 4-dimensional space, row-major in (a, b, c, d).
struct Tensor4 {
  std::array<double, 256> c{};

  double& operator()(int a, int b, int cc, int d) { return c[((a * 4 + b) * 4 + cc) * 4 + d]; }
  double operator()(int a, int b, int cc, int d) const { return c[((a * 4 + b) * 4 + cc) * 4 + d]; }
  double norm() const;
  double max_abs_diff(const Tensor4& other) const;
};

/// All four slots contracted with `frame`: T'_{ijkl} = T_{abcd} F_ai F_bj F_ck F_dl.
Tensor4 change_frame(const Tensor4& t, const Matrix4& frame);

/// Largest violation of R_abcd = -R_bacd = -R_abdc = R_cdab and R_a[bcd] = 0.
double symmetry_defect(const Tensor4& riemann);

/// Central-difference first and second derivatives of a matrix field, one
/// Richardson halving applied. error is the largest entry change between the
/// half-step and the extrapolated derivatives.
struct ComponentJet {
  Matrix4 value;
  std::array<Matrix4, 4> d1;
  std::array<std::array<Matrix4, 4>, 4> d2;
  double error = 0.0;
};

ComponentJet component_jet(const std::function<Matrix4(const Vector4&)>& f, const Vector4& x, double h);

struct CurvatureResult {
  Tensor4 riemann;  // orthonormal frame
  Matrix4 ricci = Matrix4::Zero();
  double norm_rm = 0.0;
  double norm_ric = 0.0;
  double fd_step = 0.0;
  double est_error = 0.0;
};

/// Finite-difference step used when riemann_at receives fd_step <= 0,
/// as a multiple of the field's coordinate_scale at the point.
inline constexpr double kDefaultStepFactor = 3e-3;

/// Riemann tensor by central differences on metric components with one
/// Richardson halving. Convention: R_abcd = g_ae R^e_bcd, positive sectional
/// curvature on spheres; |Rm|^2 = sum R_abcd^2 in an orthonormal frame.
/// Throws SingularMetric if g(p) is not positive definite, StepTooLarge if
/// est_error exceeds `error_budget`.
CurvatureResult riemann_at(const MetricField& g, const ChartPoint4& p, double fd_step = 0.0,
                           std::optional<double> error_budget = std::nullopt);

struct RicciScan {
  double max_norm_ric = 0.0;
  ChartPoint4 argmax;
  std::size_t evaluated = 0;
};

RicciScan ricci_flatness_scan(const MetricField& g, const std::vector<ChartPoint4>& grid, double fd_step = 0.0,
                              int jobs = 1);

struct SweepRow {
  double eps = 0.0;
  double max_norm_rm = 0.0;
  ChartPoint3 argmax_point;  // in the unrescaled chart (u, y1, y2)
  double ratio_upper = 0.0;  // max_norm_rm * eps / log(1/eps)
  double ratio_lower = 0.0;  // max_norm_rm * eps * log(1/eps)^2
  std::size_t points_total = 0;
  std::size_t points_failed = 0;
  bool degraded = false;        // more than 1% of points failed
  bool not_applicable = false;  // log(1/eps) == 0
};

SweepRow make_sweep_row(double eps, double max_norm_rm, const ChartPoint3& argmax, std::size_t total,
                        std::size_t failed);

struct GridPolicy {
  int radial_points = 24;
  int polar_angles = 5;
  /// Radii in the rescaled chart s = u/eps; r_min <= 0 means 4x the exclusion radius.
  double r_min = 0.0;
  double r_max = 0.5;
  double fd_step_factor = kDefaultStepFactor;
  Gauge gauge = Gauge::StringPlus;
  std::vector<std::complex<double>> h_coeffs;
  double tail_tol = 1e-10;
  int jobs = 1;
};

/// Log-spaced radii around the origin, polar angles off the axis, azimuth
/// rotated per shell.
std::vector<ChartPoint4> nut_grid(const GridPolicy& policy, double r_min);

/// max |Rm| of `g` over `grid`, scaled: |Rm| * norm_factor, argmax mapped by
/// coordinate_factor. Failing points are counted, not fatal.
SweepRow sweep_field(double eps, const MetricField& g, const std::vector<ChartPoint4>& grid,
                     const GridPolicy& policy, double norm_factor = 1.0, double coordinate_factor = 1.0);

/// For each eps: max |Rm(g_eps)| near the central charge, evaluated as
/// eps^{-1} |Rm(eps^{-1} g_eps)| in the rescaled chart.
std::vector<SweepRow> curvature_sweep(const std::vector<double>& eps_list, const GridPolicy& policy);

}  // namespace ovm
