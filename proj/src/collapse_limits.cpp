#include "ovm/collapse_limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "ovm/errors.hpp"
#include "ovm/parallel.hpp"

namespace ovm {

namespace gq = boost::math::quadrature;

std::string to_string(Region r) {
  switch (r) {
    case Region::Bubble: return "Bubble";
    case Region::Neck: return "Neck";
    case Region::Outer: return "Outer";
  }
  return "Unknown";
}

double DSchedule::at(double beta) const { return coefficient * std::pow(beta, exponent); }

std::vector<double> eps_for_betas(const std::vector<double>& betas) {
  std::vector<double> out;
  for (double b : betas) out.push_back(std::exp(-2.0 * kPi * b));
  return out;
}

RegionCase classify_region(double eps, double d, const RegionThresholds& t) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "eps must lie in (0,1)");
  if (!(d >= 0.0)) throw Error(ErrorCode::InvalidArgument, "distance must be non-negative");
  RegionCase rc;
  rc.eps = eps;
  rc.beta = log_scale(eps);
  rc.d = d;
  const double sb = std::sqrt(rc.beta);
  if (d <= t.R0 / sb) {
    rc.region = Region::Bubble;
  } else if (d * sb >= t.neck_low && d / sb <= t.neck_high) {
    rc.region = Region::Neck;
    rc.gamma_sq = d * sb;
    rc.r_excision = std::sqrt(*rc.gamma_sq) / rc.beta;
  } else if (d >= t.r0 * sb && d <= t.C0 * sb) {
    rc.region = Region::Outer;
    rc.gamma0sq = rc.beta / (d * d);
    rc.r_excision = std::pow(rc.beta, -0.75);
  } else {
    std::ostringstream msg;
    msg << "d = " << d << " at beta = " << rc.beta << " meets no region threshold";
    throw Error(ErrorCode::AmbiguousRegion, msg.str());
  }
  return rc;
}

namespace {

// V1 with an exclusion radius small enough for quadrature nodes near the nut;
// the looser tolerance admits the roundoff floor of the 1/rho term there.
PotentialParams fine_exclusion(const PotentialParams& params) {
  PotentialParams p = params;
  p.exclusion_radius = 1e-12 * params.eps;
  p.tail_tol = std::max(params.tail_tol, 1e-7);
  return p;
}

double reduce_period(double s) { return s - std::round(s); }

// Integral of sqrt(V1) along the straight segment from the nut to q; the
// substitution tau = t^2 absorbs the rho^{-1/2} endpoint singularity.
double ray_from_nut(const PotentialParams& params, const Eigen::Vector3d& q) {
  const double len = q.norm();
  if (len == 0.0) return 0.0;
  return gq::gauss<double, 20>::integrate(
      [&](double t) { return 2.0 * t * len * std::sqrt(eval_V1_value(params, ChartPoint3::from(t * t * q))); }, 0.0,
      1.0);
}

double segment_integral(const PotentialParams& params, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return (b - a).norm() * gq::gauss<double, 7>::integrate(
                              [&](double t) {
                                return std::sqrt(eval_V1_value(params, ChartPoint3::from(a + t * (b - a))));
                              },
                              0.0, 1.0);
}

}  // namespace

double nut_distance(const PotentialParams& params_in, const ChartPoint3& p0_in, const DistanceOptions& options) {
  if (options.grid_points < 3 || options.grid_points % 2 == 0)
    throw Error(ErrorCode::InvalidArgument, "distance grid needs an odd number of points per axis");
  const PotentialParams params = fine_exclusion(params_in);
  Eigen::Vector3d p0 = p0_in.vec();
  p0[0] = reduce_period(p0[0]);
  if (p0.norm() == 0.0) return 0.0;
  const double ray = ray_from_nut(params, p0);

  const int n = options.grid_points;
  const int half = n / 2;
  const double L = p0.cwiseAbs().maxCoeff() * (1.0 + options.padding);
  const double h = L / half;
  auto node_pos = [&](int i, int j, int k) -> Eigen::Vector3d { return h * Eigen::Vector3d(i - half, j - half, k - half); };
  auto index = [n](int i, int j, int k) { return (std::size_t(i) * n + j) * n + k; };
  const std::size_t total = std::size_t(n) * n * n;
  const std::size_t nut = index(half, half, half);

  std::vector<double> root_v(total, std::numeric_limits<double>::quiet_NaN());
  auto sqrt_v = [&](std::size_t id, const Eigen::Vector3d& x) {
    if (std::isnan(root_v[id])) {
      try {
        root_v[id] = std::sqrt(eval_V1_value(params, ChartPoint3::from(x)));
      } catch (const Error&) {
        root_v[id] = std::numeric_limits<double>::infinity();
      }
    }
    return root_v[id];
  };

  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::vector<double> dist(total, std::numeric_limits<double>::infinity());
  // Seed with the corners of the cell holding p0.
  Eigen::Vector3i base;
  for (int a = 0; a < 3; ++a) base[a] = std::clamp(int(std::floor(p0[a] / h)) + half, 0, n - 2);
  for (int c = 0; c < 8; ++c) {
    const int i = base[0] + (c & 1), j = base[1] + ((c >> 1) & 1), k = base[2] + ((c >> 2) & 1);
    const std::size_t id = index(i, j, k);
    const Eigen::Vector3d x = node_pos(i, j, k);
    const double w = id == nut ? ray : segment_integral(params, p0, x);
    if (w < dist[id]) {
      dist[id] = w;
      queue.push({w, id});
    }
  }
  while (!queue.empty()) {
    const auto [du, id] = queue.top();
    queue.pop();
    if (du > dist[id]) continue;
    if (id == nut) break;
    const int i = int(id / (std::size_t(n) * n)), j = int((id / n) % n), k = int(id % n);
    const Eigen::Vector3d x = node_pos(i, j, k);
    const double rx = sqrt_v(id, x);
    if (!std::isfinite(rx)) continue;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj)
        for (int dk = -1; dk <= 1; ++dk) {
          if (!(di || dj || dk)) continue;
          const int a = i + di, b = j + dj, c = k + dk;
          if (a < 0 || b < 0 || c < 0 || a >= n || b >= n || c >= n) continue;
          const std::size_t nb = index(a, b, c);
          const Eigen::Vector3d y = node_pos(a, b, c);
          double w;
          if (nb == nut) {
            w = ray_from_nut(params, x);
          } else {
            const double ry = sqrt_v(nb, y);
            if (!std::isfinite(ry)) continue;
            double rm;
            try {
              rm = std::sqrt(eval_V1_value(params, ChartPoint3::from(0.5 * (x + y))));
            } catch (const Error&) {
              continue;
            }
            w = (y - x).norm() * (rx + 4.0 * rm + ry) / 6.0;
          }
          if (du + w < dist[nb]) {
            dist[nb] = du + w;
            queue.push({dist[nb], nb});
          }
        }
  }
  return std::min(ray, dist[nut]);
}

RegionCase classify_point(const PotentialParams& params, const ChartPoint3& p0, const RegionThresholds& thresholds,
                          const DistanceOptions& options) {
  return classify_region(params.eps, nut_distance(params, p0, options), thresholds);
}

namespace {

void check_eps_list(const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw Error(ErrorCode::InvalidSchedule, "empty eps schedule");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0 && eps_list[i] < 1.0)) throw Error(ErrorCode::InvalidSchedule, "eps must lie in (0,1)");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw Error(ErrorCode::InvalidSchedule, "eps schedule must be strictly decreasing");
  }
}

// Shells of log-spaced radii with off-axis polar angles and rotating azimuths.
std::vector<Eigen::Vector3d> shell_points(double r_lo, double r_hi, int radial, int polar) {
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < radial; ++i) {
    const double rho = radial == 1 ? r_lo : r_lo * std::pow(r_hi / r_lo, double(i) / (radial - 1));
    for (int k = 0; k < polar; ++k) {
      const double theta = kPi * (k + 0.5) / polar;
      const double phi = 0.9 * i + 2.0 * kPi * k / polar;
      pts.emplace_back(rho * std::cos(theta), rho * std::sin(theta) * std::cos(phi),
                       rho * std::sin(theta) * std::sin(phi));
    }
  }
  return pts;
}

double distance_to_lattice(const Eigen::Vector3d& s) {
  Eigen::Vector3d r = s;
  r[0] = reduce_period(r[0]);
  return r.norm();
}

std::string ball_label(double r) {
  std::ostringstream os;
  os.precision(6);
  os << "ball rho_s <= " << r;
  return os.str();
}

template <class Fn>
std::vector<double> evaluate_all(const std::vector<Eigen::Vector3d>& pts, int jobs, Fn&& fn) {
  std::vector<double> out(pts.size());
  parallel_for(pts.size(), jobs, [&](std::size_t i) { out[i] = fn(pts[i]); });
  return out;
}

}  // namespace

std::vector<ConvergenceReport> region1_check(const std::vector<double>& eps_list, const Region1Options& o) {
  check_eps_list(eps_list);
  if (!(o.r_inner > 0.0 && o.R0 > o.r_inner)) throw Error(ErrorCode::InvalidArgument, "need 0 < r_inner < R0");
  const double c = kMonopoleCharge;
  const MetricField tn = taub_nut(c, o.gauge);
  const auto grid = shell_points(o.r_inner, o.R0, o.radial_points, o.polar_angles);
  std::vector<ConvergenceReport> out;
  for (double eps : eps_list) {
    PotentialParams params;
    params.eps = eps;
    const double beta = log_scale(eps);
    CoordinateMap map;
    map.jacobian << 1.0 / beta, 1.0 / beta, 1.0 / beta, 1.0;
    const MetricField gs = rescale(gh_metric_rescaled(params, o.gauge), beta, map);

    const auto metric_dev = evaluate_all(grid, o.jobs, [&](const Eigen::Vector3d& w) {
      const ChartPoint4 p{ChartPoint3::from(w), 0.0};
      const Matrix4 model = tn(p);
      const Matrix4 L = Eigen::LLT<Matrix4>(model).matrixL();
      const Matrix4 E = L.inverse().transpose();
      return (E.transpose() * (gs(p) - model) * E).cwiseAbs().maxCoeff();
    });
    const auto potential_dev = evaluate_all(grid, o.jobs, [&](const Eigen::Vector3d& w) {
      const double v1 = eval_V1_value(params, ChartPoint3::from(w / beta));
      return std::abs(v1 / beta - 1.0 - c / w.norm());
    });

    ConvergenceReport r;
    r.eps = eps;
    r.beta = beta;
    r.excised = "none; grid radii in [" + std::to_string(o.r_inner) + ", " + std::to_string(o.R0) + "]";
    r.sup_dev = *std::max_element(metric_dev.begin(), metric_dev.end());
    r.aux["potential_dev"] = *std::max_element(potential_dev.begin(), potential_dev.end());
    const ChartPoint4 unit_a{{1.0, 0.0, 0.0}, 0.0};
    r.aux["gtt_dev"] = std::abs(gs(unit_a)(3, 3) - 1.0 / (1.0 + c));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ConvergenceReport> region2_check(const std::vector<double>& eps_list, const Region2Options& o) {
  check_eps_list(eps_list);
  std::vector<ConvergenceReport> out;
  double prev_up = 0.0, prev_down = std::numeric_limits<double>::infinity();
  for (double eps : eps_list) {
    PotentialParams params;
    params.eps = eps;
    const PotentialParams fine = fine_exclusion(params);
    const double beta = log_scale(eps);
    const double d = o.schedule.at(beta);
    const double up = d * std::sqrt(beta), down = d / std::sqrt(beta);
    if (!(up > prev_up && down < prev_down))
      throw Error(ErrorCode::InvalidSchedule, "neck schedule needs d beta^{1/2} increasing and d beta^{-1/2} decreasing");
    prev_up = up;
    prev_down = down;
    const double gamma = std::sqrt(up);
    const double r_k = gamma / beta;
    const double scale = std::sqrt(beta) / d;  // w = scale * s

    std::vector<Eigen::Vector3d> grid;
    for (const auto& w : shell_points(r_k * scale, o.w_max, o.radial_points, o.polar_angles)) {
      const Eigen::Vector3d s = w / scale;
      if (distance_to_lattice(s) >= r_k * (1.0 - 1e-12)) grid.push_back(s);
    }
    const auto v1 = evaluate_all(grid, o.jobs, [&](const Eigen::Vector3d& s) {
      return eval_V1_value(params, ChartPoint3::from(s));
    });
    double dev = 0.0, fiber = 0.0;
    for (double v : v1) {
      dev = std::max(dev, std::abs(v / beta - 1.0));
      fiber = std::max(fiber, 1.0 / (d * d * v));
    }

    // Ray integrals and fiber lengths over the boundary sphere of the excision ball.
    double ray = 0.0, half_fiber = 0.0;
    for (const auto& q : shell_points(r_k, r_k, 1, o.polar_angles)) {
      ray = std::max(ray, ray_from_nut(fine, q));
      half_fiber = std::max(half_fiber, 0.5 / std::sqrt(eval_V1_value(params, ChartPoint3::from(q))));
    }

    ConvergenceReport r;
    r.eps = eps;
    r.beta = beta;
    r.d = d;
    r.r_excision = r_k;
    r.excised = ball_label(r_k);
    r.sup_dev = dev;
    r.aux["fiber_sup"] = fiber;
    r.aux["gamma_inv"] = 1.0 / gamma;
    r.aux["diameter_bound"] = (ray + half_fiber) / d;
    r.aux["diameter_chain"] = (2.0 * std::sqrt(r_k) + 2.0 * std::sqrt(beta) * r_k + half_fiber) / d;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ConvergenceReport> region3_check(const std::vector<double>& eps_list, const Region3Options& o) {
  check_eps_list(eps_list);
  if (o.schedule.exponent != 0.5)
    throw Error(ErrorCode::InvalidSchedule, "outer schedule must scale as beta^{1/2}");
  if (!(o.schedule.coefficient >= o.thresholds.r0 && o.schedule.coefficient <= o.thresholds.C0))
    throw Error(ErrorCode::InvalidSchedule, "outer schedule coefficient outside [r0, C0]");
  std::vector<ConvergenceReport> out;
  for (double eps : eps_list) {
    PotentialParams params;
    params.eps = eps;
    const double beta = log_scale(eps);
    const double d = o.schedule.at(beta);
    const double r_k = std::pow(beta, -0.75);
    const double gamma0sq = beta / (d * d);

    std::vector<Eigen::Vector3d> grid = shell_points(r_k, 0.5, o.radial_points, o.polar_angles);
    for (int i = 0; i < o.slab_points; ++i) {
      const double s = -0.5 + double(i) / std::max(o.slab_points - 1, 1);
      for (double v : {0.5, 1.0, 1.5, o.v_max})
        for (int k = 0; k < o.polar_angles; ++k) {
          const double phi = 2.0 * kPi * k / o.polar_angles + 0.3 * i;
          grid.emplace_back(s, v * std::cos(phi), v * std::sin(phi));
        }
    }
    const auto v1 = evaluate_all(grid, o.jobs, [&](const Eigen::Vector3d& s) {
      return eval_V1_value(params, ChartPoint3::from(s));
    });
    double dev = 0.0, fiber_constant = 0.0;
    for (double v : v1) {
      dev = std::max(dev, std::abs(v / (d * d) - gamma0sq));
      fiber_constant = std::max(fiber_constant, beta * beta / (d * d * v));
    }
    const double circle = gq::gauss<double, 20>::integrate(
        [&](double s) { return std::sqrt(eval_V1_value(params, {s, 1.0, 0.0})); }, -0.5, 0.5);

    ConvergenceReport r;
    r.eps = eps;
    r.beta = beta;
    r.d = d;
    r.r_excision = r_k;
    r.excised = ball_label(r_k);
    r.sup_dev = dev;
    r.aux["fiber_constant"] = fiber_constant;
    r.aux["horizontal_circle"] = circle / d;
    r.aux["gamma0sq"] = gamma0sq;
    out.push_back(std::move(r));
  }
  return out;
}

QuadratureCheck quadrature_inequality(double r, double beta) {
  if (!(r > 0.0 && beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "r and beta must be positive");
  QuadratureCheck q;
  q.r = r;
  q.beta = beta;
  const double k = 2.0 * beta;
  const double root_r = std::sqrt(r);
  // rho = t^2: integrand 2 t sqrt(1/t^2 + k) = 2 sqrt(1 + k t^2).
  q.integral = gq::gauss<double, 30>::integrate([&](double t) { return 2.0 * std::sqrt(1.0 + k * t * t); }, 0.0,
                                                root_r);
  q.closed_form = std::sqrt(r * (1.0 + k * r)) + std::asinh(std::sqrt(k * r)) / std::sqrt(k);
  q.bound = 2.0 * root_r + 2.0 * std::sqrt(beta) * r;
  return q;
}

namespace {

// Frobenius norms of the k-th coordinate derivatives of a symmetric field,
// every slot raised with the orthonormal frame E of the reference metric.
std::array<double, 3> frame_norms(const ComponentJet& j, const Matrix4& E, int k_max) {
  std::array<double, 3> n{0.0, 0.0, 0.0};
  n[0] = (E.transpose() * j.value * E).norm();
  if (k_max >= 1) {
    std::array<Matrix4, 4> rot;
    for (int e = 0; e < 4; ++e) rot[e] = E.transpose() * j.d1[e] * E;
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
      Matrix4 m = Matrix4::Zero();
      for (int e = 0; e < 4; ++e) m += E(e, i) * rot[e];
      s += m.squaredNorm();
    }
    n[1] = std::sqrt(s);
  }
  if (k_max >= 2) {
    double s = 0.0;
    std::array<std::array<Matrix4, 4>, 4> rot;
    for (int e = 0; e < 4; ++e)
      for (int f = 0; f < 4; ++f) rot[e][f] = E.transpose() * j.d2[e][f] * E;
    for (int i = 0; i < 4; ++i)
      for (int l = 0; l < 4; ++l) {
        Matrix4 m = Matrix4::Zero();
        for (int e = 0; e < 4; ++e)
          for (int f = 0; f < 4; ++f) m += E(e, i) * E(f, l) * rot[e][f];
        s += m.squaredNorm();
      }
    n[2] = std::sqrt(s);
  }
  return n;
}

bool decreasing_to_zero(const std::vector<double>& xs) {
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] < xs[i - 1] || (xs[i] == 0.0 && xs[i - 1] == 0.0))) return false;
  return true;
}

}  // namespace

StabilityVerdict limit_stability_compare(const std::vector<MetricField>& g_seq, const std::vector<MetricField>& h_seq,
                                         const std::vector<double>& lambda_seq, int k_max,
                                         const std::vector<ChartPoint4>& grid, double fd_step) {
  if (g_seq.size() != h_seq.size() || g_seq.size() != lambda_seq.size() || g_seq.empty())
    throw Error(ErrorCode::InvalidArgument, "sequences must be non-empty and of equal length");
  if (k_max < 0 || k_max > 2) throw Error(ErrorCode::InvalidArgument, "k_max must lie in [0, 2]");
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty comparison grid");

  StabilityVerdict verdict;
  std::vector<double> Ds, comps;
  for (std::size_t i = 0; i < g_seq.size(); ++i) {
    const double lambda = lambda_seq[i];
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale factors must be positive");
    StabilityStep step;
    step.lambda = lambda;
    for (const auto& p : grid) {
      const MetricField g = g_seq[i].localized(p);
      const MetricField h = h_seq[i].localized(p);
      const auto diff = [&](const Vector4& x) {
        const ChartPoint4 q = ChartPoint4::from(x);
        return Matrix4(h(q) - g(q));
      };
      const Eigen::LLT<Matrix4> llt(g(p));
      if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularMetric, "reference metric not positive definite");
      const Matrix4 E = Matrix4(llt.matrixL()).inverse().transpose();
      const auto coarse = frame_norms(component_jet(diff, p.vec(), fd_step), E, k_max);
      const auto fine = frame_norms(component_jet(diff, p.vec(), 0.5 * fd_step), E, k_max);
      for (int k = 0; k <= k_max; ++k) {
        const double w = std::pow(lambda, -0.5 * k);
        step.D = std::max(step.D, w * fine[k]);
        step.fd_error = std::max(step.fd_error, w * std::abs(fine[k] - coarse[k]));
      }
      step.component_sup = std::max(step.component_sup, lambda * diff(p.vec()).cwiseAbs().maxCoeff());
    }
    if (step.fd_error > step.D)
      throw Error(ErrorCode::GridTooCoarse, "finite-difference error estimate exceeds the measured deviation");
    Ds.push_back(step.D);
    comps.push_back(step.component_sup);
    verdict.steps.push_back(step);
  }
  verdict.pass = decreasing_to_zero(Ds) && decreasing_to_zero(comps);
  return verdict;
}

}  // namespace ovm
