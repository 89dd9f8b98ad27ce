#include "ovm/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ovm/errors.hpp"
#include "ovm/parallel.hpp"

namespace ovm {

double Tensor4::norm() const {
  double s = 0.0;
  for (double x : c) s += x * x;
  return std::sqrt(s);
}

double Tensor4::max_abs_diff(const Tensor4& other) const {
  double m = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) m = std::max(m, std::abs(c[i] - other.c[i]));
  return m;
}

Tensor4 change_frame(const Tensor4& t, const Matrix4& frame) {
  // One slot at a time: the contracted slot is rotated to the end.
  Tensor4 cur = t;
  for (int slot = 0; slot < 4; ++slot) {
    Tensor4 next;
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d)
          for (int i = 0; i < 4; ++i) {
            double s = 0.0;
            for (int a = 0; a < 4; ++a) s += cur(a, b, c, d) * frame(a, i);
            next(b, c, d, i) = s;
          }
    cur = next;
  }
  return cur;
}

double symmetry_defect(const Tensor4& R) {
  double m = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          const double r = R(a, b, c, d);
          m = std::max({m, std::abs(r + R(b, a, c, d)), std::abs(r + R(a, b, d, c)), std::abs(r - R(c, d, a, b)),
                        std::abs(r + R(a, c, d, b) + R(a, d, b, c))});
        }
  return m;
}

namespace {

using MatrixFn = std::function<Matrix4(const Vector4&)>;

ComponentJet difference_jet(const MatrixFn& at, const Vector4& x, const Matrix4& g0, double h) {
  const Matrix4 I4 = Matrix4::Identity();
  ComponentJet j;
  j.value = g0;
  for (int a = 0; a < 4; ++a) {
    const Matrix4 gp = at(x + h * I4.col(a));
    const Matrix4 gm = at(x - h * I4.col(a));
    j.d1[a] = (gp - gm) / (2.0 * h);
    j.d2[a][a] = (gp - 2.0 * g0 + gm) / (h * h);
  }
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      const Vector4 ea = h * I4.col(a), eb = h * I4.col(b);
      j.d2[a][b] = (at(x + ea + eb) - at(x + ea - eb) - at(x - ea + eb) + at(x - ea - eb)) / (4.0 * h * h);
      j.d2[b][a] = j.d2[a][b];
    }
  return j;
}

ComponentJet richardson(const ComponentJet& coarse, const ComponentJet& fine) {
  ComponentJet j = fine;
  double err = 0.0;
  for (int a = 0; a < 4; ++a) {
    j.d1[a] = (4.0 * fine.d1[a] - coarse.d1[a]) / 3.0;
    err = std::max(err, (j.d1[a] - fine.d1[a]).cwiseAbs().maxCoeff());
    for (int b = 0; b < 4; ++b) {
      j.d2[a][b] = (4.0 * fine.d2[a][b] - coarse.d2[a][b]) / 3.0;
      err = std::max(err, (j.d2[a][b] - fine.d2[a][b]).cwiseAbs().maxCoeff());
    }
  }
  j.error = err;
  return j;
}

Tensor4 coordinate_riemann(const ComponentJet& j, const Matrix4& ginv) {
  // gamma1[e](b,c) = Gamma_{e,bc}; gamma2[e](b,c) = Gamma^e_{bc}.
  std::array<Matrix4, 4> gamma1, gamma2;
  for (int e = 0; e < 4; ++e)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) gamma1[e](b, c) = 0.5 * (j.d1[c](e, b) + j.d1[b](e, c) - j.d1[e](b, c));
  for (int e = 0; e < 4; ++e) {
    gamma2[e].setZero();
    for (int f = 0; f < 4; ++f) gamma2[e] += ginv(e, f) * gamma1[f];
  }
  Tensor4 R;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double r = 0.5 * (j.d2[b][c](a, d) + j.d2[a][d](b, c) - j.d2[b][d](a, c) - j.d2[a][c](b, d));
          for (int f = 0; f < 4; ++f) r += gamma1[f](a, d) * gamma2[f](b, c) - gamma1[f](a, c) * gamma2[f](b, d);
          R(a, b, c, d) = r;
        }
  return R;
}

}  // namespace

ComponentJet component_jet(const std::function<Matrix4(const Vector4&)>& f, const Vector4& x, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  const Matrix4 f0 = f(x);
  return richardson(difference_jet(f, x, f0, h), difference_jet(f, x, f0, 0.5 * h));
}

CurvatureResult riemann_at(const MetricField& field, const ChartPoint4& p, double fd_step,
                           std::optional<double> error_budget) {
  const MetricField g = field.localized(p);
  const double h = fd_step > 0.0 ? fd_step : kDefaultStepFactor * g.coordinate_scale(p);
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");

  const Vector4 x = p.vec();
  const Matrix4 g0 = g(p);
  const Eigen::LLT<Matrix4> llt(g0);
  if (llt.info() != Eigen::Success || !g0.allFinite())
    throw Error(ErrorCode::SingularMetric, "metric is not positive definite at the evaluation point");
  const Matrix4 L = llt.matrixL();
  const Matrix4 frame = L.inverse().transpose();  // frame^T g frame = I
  const Matrix4 ginv = frame * frame.transpose();

  const MatrixFn at = [&g](const Vector4& y) { return g(ChartPoint4::from(y)); };
  const ComponentJet fine = difference_jet(at, x, g0, 0.5 * h);
  const ComponentJet best = richardson(difference_jet(at, x, g0, h), fine);

  CurvatureResult out;
  out.fd_step = h;
  out.riemann = change_frame(coordinate_riemann(best, ginv), frame);
  out.est_error = out.riemann.max_abs_diff(change_frame(coordinate_riemann(fine, ginv), frame));
  for (int b = 0; b < 4; ++b)
    for (int d = 0; d < 4; ++d) {
      double s = 0.0;
      for (int a = 0; a < 4; ++a) s += out.riemann(a, b, a, d);
      out.ricci(b, d) = s;
    }
  out.norm_rm = out.riemann.norm();
  out.norm_ric = out.ricci.norm();
  if (error_budget && out.est_error > *error_budget)
    throw Error(ErrorCode::StepTooLarge, "Richardson error estimate exceeds the budget");
  return out;
}

RicciScan ricci_flatness_scan(const MetricField& g, const std::vector<ChartPoint4>& grid, double fd_step, int jobs) {
  std::vector<double> norms(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) { norms[i] = riemann_at(g, grid[i], fd_step).norm_ric; });
  RicciScan scan;
  scan.evaluated = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (norms[i] > scan.max_norm_ric || i == 0) {
      scan.max_norm_ric = norms[i];
      scan.argmax = grid[i];
    }
  return scan;
}

SweepRow make_sweep_row(double eps, double max_norm_rm, const ChartPoint3& argmax, std::size_t total,
                        std::size_t failed) {
  SweepRow row;
  row.eps = eps;
  row.max_norm_rm = max_norm_rm;
  row.argmax_point = argmax;
  row.points_total = total;
  row.points_failed = failed;
  row.degraded = total == 0 || double(failed) > 0.01 * double(total);
  const double L = std::log(1.0 / eps);
  if (!(std::abs(L) > 0.0)) {
    row.not_applicable = true;
    row.ratio_upper = row.ratio_lower = std::numeric_limits<double>::quiet_NaN();
  } else {
    row.ratio_upper = max_norm_rm * eps / L;
    row.ratio_lower = max_norm_rm * eps * L * L;
  }
  return row;
}

std::vector<ChartPoint4> nut_grid(const GridPolicy& policy, double r_min) {
  if (policy.radial_points < 1 || policy.polar_angles < 1 || !(r_min > 0.0) || !(policy.r_max > r_min))
    throw Error(ErrorCode::InvalidArgument, "nut grid needs positive counts and 0 < r_min < r_max");
  std::vector<ChartPoint4> grid;
  const int n = policy.radial_points;
  for (int i = 0; i < n; ++i) {
    const double rho = n == 1 ? r_min : r_min * std::pow(policy.r_max / r_min, double(i) / double(n - 1));
    for (int k = 0; k < policy.polar_angles; ++k) {
      const double theta = kPi * (k + 0.5) / policy.polar_angles;
      const double phi = 0.7 * i + 2.0 * kPi * k / policy.polar_angles;
      const double r = rho * std::sin(theta);
      grid.push_back({{rho * std::cos(theta), r * std::cos(phi), r * std::sin(phi)}, 0.0});
    }
  }
  return grid;
}

SweepRow sweep_field(double eps, const MetricField& g, const std::vector<ChartPoint4>& grid, const GridPolicy& policy,
                     double norm_factor, double coordinate_factor) {
  std::vector<double> norms(grid.size(), -1.0);
  parallel_for(grid.size(), policy.jobs, [&](std::size_t i) {
    try {
      const double h = policy.fd_step_factor * g.coordinate_scale(grid[i]);
      const double n = riemann_at(g, grid[i], h).norm_rm;
      if (std::isfinite(n)) norms[i] = n;
    } catch (const Error&) {
    }
  });
  std::size_t failed = 0;
  double best = 0.0;
  ChartPoint3 argmax;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (norms[i] < 0.0) {
      ++failed;
      continue;
    }
    if (norms[i] > best) {
      best = norms[i];
      argmax = ChartPoint3::from(coordinate_factor * grid[i].base.vec());
    }
  }
  return make_sweep_row(eps, best * norm_factor, argmax, grid.size(), failed);
}

std::vector<SweepRow> curvature_sweep(const std::vector<double>& eps_list, const GridPolicy& policy) {
  if (eps_list.empty()) throw Error(ErrorCode::InvalidSchedule, "sweep schedule is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0 && eps_list[i] < 1.0))
      throw Error(ErrorCode::InvalidSchedule, "sweep eps values must lie in (0, 1)");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw Error(ErrorCode::InvalidSchedule, "sweep eps values must be strictly decreasing");
  }
  std::vector<SweepRow> rows;
  for (double eps : eps_list) {
    PotentialParams params;
    params.eps = eps;
    params.h_coeffs = policy.h_coeffs;
    params.tail_tol = policy.tail_tol;
    const double r_min = policy.r_min > 0.0 ? policy.r_min : 4.0 * params.exclusion() / eps;
    const MetricField g1 = gh_metric_rescaled(params, policy.gauge);
    rows.push_back(sweep_field(eps, g1, nut_grid(policy, r_min), policy, 1.0 / eps, eps));
  }
  return rows;
}

}  // namespace ovm
