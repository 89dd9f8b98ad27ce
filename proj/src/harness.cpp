#include "ovm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "ovm/curvature.hpp"
#include "ovm/errors.hpp"
#include "ovm/matrix_lemma.hpp"
#include "ovm/metric_models.hpp"
#include "ovm/parallel.hpp"

#ifndef OVM_VERSION
#define OVM_VERSION "unknown"
#endif

namespace ovm {

using nlohmann::json;

const std::vector<ExperimentInfo>& list_experiments() {
  static const std::vector<ExperimentInfo> all = {
      {Experiment::PotentialIdentity, "PotentialIdentity", "rescaling identity of the periodic potential"},
      {Experiment::Harmonicity, "Harmonicity", "Laplacian of V on a regular grid, analytic and finite-difference"},
      {Experiment::RicciFlat, "RicciFlat", "Ricci scans of Gibbons-Hawking fields with a non-harmonic control"},
      {Experiment::CurvatureSweep, "CurvatureSweep", "max |Rm| near the nut across an eps schedule"},
      {Experiment::Region1, "Region1", "bubble limit against Taub-NUT"},
      {Experiment::Region2, "Region2", "neck limit against flat R^3"},
      {Experiment::Region3, "Region3", "outer limit against flat S^1 x R^2"},
      {Experiment::LimitStability, "LimitStability", "scaled C^k comparator with passing and failing rates"},
      {Experiment::MatrixLemma, "MatrixLemma", "calibrated constant of the Hermitian gap inequality"},
  };
  return all;
}

std::string to_string(Experiment e) {
  for (const auto& info : list_experiments())
    if (info.experiment == e) return info.name;
  return "Unknown";
}

Experiment experiment_from_string(const std::string& name) {
  for (const auto& info : list_experiments())
    if (info.name == name) return info.experiment;
  throw Error(ErrorCode::ConfigError, "unknown experiment '" + name + "'");
}

std::vector<double> EpsSchedule::resolve() const {
  return values.empty() ? eps_for_betas(beta_m) : values;
}

bool ReportBundle::all_pass() const {
  return !verdicts.empty() && std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, where + " must be an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::ConfigError, std::string("wrong type for '") + key + "' in " + where);
  }
}

json h_to_json(const std::vector<std::complex<double>>& h) {
  json arr = json::array();
  for (const auto& c : h) arr.push_back({c.real(), c.imag()});
  return arr;
}

std::vector<std::complex<double>> h_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ConfigError, "h_coeffs must be an array of [re, im] pairs");
  std::vector<std::complex<double>> out;
  for (const auto& c : j) {
    if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
      throw Error(ErrorCode::ConfigError, "h_coeffs entries must be [re, im] pairs");
    out.emplace_back(c[0].get<double>(), c[1].get<double>());
  }
  return out;
}

std::string gauge_name(Gauge g) { return g == Gauge::StringPlus ? "StringPlus" : "StringMinus"; }

Gauge gauge_from_name(const std::string& s) {
  if (s == "StringPlus") return Gauge::StringPlus;
  if (s == "StringMinus") return Gauge::StringMinus;
  throw Error(ErrorCode::ConfigError, "unknown gauge '" + s + "'");
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, {"experiment", "params", "eps_schedule", "grid", "thresholds", "d_schedule", "gauge", "matrix", "seed",
                 "output_dir"},
             "config");
  if (!j.contains("experiment") || !j["experiment"].is_string())
    throw Error(ErrorCode::ConfigError, "config needs a string 'experiment'");
  ExperimentConfig c = default_config(experiment_from_string(j["experiment"].get<std::string>()));

  if (j.contains("params")) {
    const json& p = j["params"];
    check_keys(p, {"eps", "h_coeffs", "tail_tol", "exclusion_radius", "max_index"}, "params");
    read(p, "eps", c.params.eps, "params");
    read(p, "tail_tol", c.params.tail_tol, "params");
    read(p, "exclusion_radius", c.params.exclusion_radius, "params");
    read(p, "max_index", c.params.max_index, "params");
    if (p.contains("h_coeffs")) c.params.h_coeffs = h_from_json(p["h_coeffs"]);
  }
  if (j.contains("eps_schedule")) {
    const json& s = j["eps_schedule"];
    check_keys(s, {"values", "beta_m"}, "eps_schedule");
    if (s.contains("values") == s.contains("beta_m"))
      throw Error(ErrorCode::ConfigError, "eps_schedule needs exactly one of 'values' or 'beta_m'");
    c.eps_schedule = {};
    read(s, "values", c.eps_schedule.values, "eps_schedule");
    read(s, "beta_m", c.eps_schedule.beta_m, "eps_schedule");
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, {"points", "radial_points", "polar_angles", "r_min", "r_max", "fd_step"}, "grid");
    read(g, "points", c.grid.points, "grid");
    read(g, "radial_points", c.grid.radial_points, "grid");
    read(g, "polar_angles", c.grid.polar_angles, "grid");
    read(g, "r_min", c.grid.r_min, "grid");
    read(g, "r_max", c.grid.r_max, "grid");
    read(g, "fd_step", c.grid.fd_step, "grid");
  }
  if (j.contains("thresholds")) {
    const json& t = j["thresholds"];
    check_keys(t, {"R0", "neck_low", "neck_high", "r0", "C0"}, "thresholds");
    read(t, "R0", c.thresholds.R0, "thresholds");
    read(t, "neck_low", c.thresholds.neck_low, "thresholds");
    read(t, "neck_high", c.thresholds.neck_high, "thresholds");
    read(t, "r0", c.thresholds.r0, "thresholds");
    read(t, "C0", c.thresholds.C0, "thresholds");
  }
  if (j.contains("d_schedule")) {
    const json& d = j["d_schedule"];
    check_keys(d, {"coefficient", "exponent"}, "d_schedule");
    read(d, "coefficient", c.d_schedule.coefficient, "d_schedule");
    read(d, "exponent", c.d_schedule.exponent, "d_schedule");
  }
  if (j.contains("gauge")) {
    std::string g;
    read(j, "gauge", g, "config");
    c.gauge = gauge_from_name(g);
  }
  if (j.contains("matrix")) {
    const json& m = j["matrix"];
    check_keys(m, {"n", "samples", "eps_list"}, "matrix");
    read(m, "n", c.matrix.n, "matrix");
    read(m, "samples", c.matrix.samples, "matrix");
    read(m, "eps_list", c.matrix.eps_list, "matrix");
  }
  read(j, "seed", c.seed, "config");
  read(j, "output_dir", c.output_dir, "config");
  validate(c);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["params"] = {{"eps", c.params.eps},
                 {"h_coeffs", h_to_json(c.params.h_coeffs)},
                 {"tail_tol", c.params.tail_tol},
                 {"exclusion_radius", c.params.exclusion_radius},
                 {"max_index", c.params.max_index}};
  j["eps_schedule"] = c.eps_schedule.values.empty() ? json{{"beta_m", c.eps_schedule.beta_m}}
                                                    : json{{"values", c.eps_schedule.values}};
  j["grid"] = {{"points", c.grid.points},   {"radial_points", c.grid.radial_points},
               {"polar_angles", c.grid.polar_angles}, {"r_min", c.grid.r_min},
               {"r_max", c.grid.r_max},     {"fd_step", c.grid.fd_step}};
  j["thresholds"] = {{"R0", c.thresholds.R0},
                     {"neck_low", c.thresholds.neck_low},
                     {"neck_high", c.thresholds.neck_high},
                     {"r0", c.thresholds.r0},
                     {"C0", c.thresholds.C0}};
  j["d_schedule"] = {{"coefficient", c.d_schedule.coefficient}, {"exponent", c.d_schedule.exponent}};
  j["gauge"] = gauge_name(c.gauge);
  j["matrix"] = {{"n", c.matrix.n}, {"samples", c.matrix.samples}, {"eps_list", c.matrix.eps_list}};
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  return j;
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, m); };
  try {
    c.params.validate();
  } catch (const Error& e) {
    fail(std::string("params: ") + e.what());
  }
  if (!c.eps_schedule.values.empty() && !c.eps_schedule.beta_m.empty())
    fail("eps_schedule needs exactly one of 'values' or 'beta_m'");
  const auto eps = c.eps_schedule.resolve();
  if (eps.empty()) fail("eps_schedule is empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0 && eps[i] < 1.0)) fail("eps_schedule values must lie in (0,1)");
    if (i > 0 && !(eps[i] < eps[i - 1])) fail("eps_schedule must be strictly decreasing");
  }
  if (c.grid.points < 1 || c.grid.radial_points < 1 || c.grid.polar_angles < 1) fail("grid counts must be positive");
  if (c.grid.r_min < 0.0 || !(c.grid.r_max > c.grid.r_min)) fail("grid needs 0 <= r_min < r_max");
  const auto& t = c.thresholds;
  if (!(t.R0 > 0 && t.neck_low > 0 && t.neck_high > 0 && t.r0 > 0 && t.C0 > t.r0))
    fail("thresholds must be positive with C0 > r0");
  if (!(c.d_schedule.coefficient > 0.0)) fail("d_schedule coefficient must be positive");
  if (c.matrix.n < 1 || c.matrix.n > 4) fail("matrix.n must lie in [1, 4]");
  if (c.matrix.samples < 1) fail("matrix.samples must be positive");
  for (double e : c.matrix.eps_list)
    if (!(e > 0.0 && e < 0.5)) fail("matrix.eps_list values must lie in (0, 0.5)");
  if (c.matrix.eps_list.empty()) fail("matrix.eps_list is empty");
  if (c.output_dir.empty()) fail("output_dir is empty");
}

std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : config_to_json(c).dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig default_config(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  c.output_dir = "out/" + to_string(e);
  switch (e) {
    case Experiment::PotentialIdentity:
      c.eps_schedule.beta_m = {1, 2};
      c.grid.points = 50;
      break;
    case Experiment::Harmonicity:
      c.eps_schedule.values = {0.5, 0.3};
      c.params.h_coeffs = {{0.0, 0.0}, {0.3, 0.2}, {0.1, -0.4}};
      c.grid.points = 1000;
      c.grid.fd_step = 3e-3;
      break;
    case Experiment::RicciFlat:
      c.eps_schedule.values = {0.5, 0.1};
      c.grid.points = 100;
      break;
    case Experiment::CurvatureSweep:
      c.eps_schedule.beta_m = {2, 3, 4, 5, 6, 7, 8};
      c.grid.radial_points = 24;
      c.grid.polar_angles = 5;
      break;
    case Experiment::Region1:
      c.eps_schedule.beta_m = {2, 4, 8};
      c.grid.radial_points = 6;
      c.grid.polar_angles = 6;
      c.grid.r_min = 0.1;
      c.grid.r_max = 1.0;
      break;
    case Experiment::Region2:
      c.eps_schedule.beta_m = {4, 9, 16};
      c.grid.radial_points = 12;
      c.grid.polar_angles = 6;
      c.grid.r_max = 1.5;
      c.d_schedule = {1.0, 0.25};
      break;
    case Experiment::Region3:
      c.eps_schedule.beta_m = {4, 9, 16};
      c.grid.radial_points = 10;
      c.grid.polar_angles = 6;
      c.grid.r_max = 2.0;
      c.d_schedule = {1.0, 0.5};
      break;
    case Experiment::LimitStability:
      c.eps_schedule.values = {0.2, 0.1, 0.05};
      c.grid.points = 6;
      c.grid.fd_step = 1e-2;
      break;
    case Experiment::MatrixLemma:
      c.eps_schedule.values = {0.01};
      c.matrix = {2, 100000, {0.01, 0.05, 0.1}};
      break;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(index), std::uint32_t(index >> 32)};
  return std::mt19937_64(seq);
}

PotentialParams params_at(const ExperimentConfig& c, double eps) {
  PotentialParams p = c.params;
  p.eps = eps;
  return p;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Verdict below(const std::string& name, double observed, double limit) {
  return {name, observed < limit, "< " + fmt("%.3g", limit), observed};
}

Verdict above(const std::string& name, double observed, double limit) {
  return {name, observed > limit, "> " + fmt("%.3g", limit), observed};
}

// Observed value: the largest ratio x[i+1]/x[i]; strictly decreasing iff < 1.
Verdict decreasing(const std::string& name, const std::vector<double>& xs) {
  double worst = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) worst = std::max(worst, xs[i] / xs[i - 1]);
  return {name, xs.size() >= 2 && worst < 1.0, "max successive ratio < 1", worst};
}

std::vector<double> column(const std::vector<ConvergenceReport>& rs, const std::string& key) {
  std::vector<double> out;
  for (const auto& r : rs) out.push_back(key == "sup_dev" ? r.sup_dev : r.aux.at(key));
  return out;
}

std::vector<double> betas_of(const std::vector<ConvergenceReport>& rs) {
  std::vector<double> out;
  for (const auto& r : rs) out.push_back(r.beta);
  return out;
}

void potential_identity(const ExperimentConfig& c, ReportBundle& b, int) {
  Table t{"identity", {"eps", "beta", "max_residual", "points"}, {}};
  double worst = 0.0;
  const auto eps_list = c.eps_schedule.resolve();
  const PotentialParams unit = unit_lattice_params(params_at(c, eps_list.front()));
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    PotentialParams p = params_at(c, eps_list[e]);
    p.tail_tol = c.params.tail_tol / p.eps;  // the identity multiplies V0(eps) by eps
    const double beta = log_scale(p.eps);
    auto rng = stream(c.seed, e);
    std::uniform_real_distribution<double> s(-0.5, 0.5), v(-1.0, 1.0);
    double max_res = 0.0;
    for (int i = 0; i < c.grid.points;) {
      const Eigen::Vector3d q(s(rng), v(rng), v(rng));
      if (q.norm() < 0.05) continue;
      const double lhs = p.eps * eval_V0_value(p, ChartPoint3::from(p.eps * q));
      const double rhs = eval_V0_value(unit, ChartPoint3::from(q)) + beta;
      max_res = std::max(max_res, std::abs(lhs - rhs));
      ++i;
    }
    worst = std::max(worst, max_res);
    t.rows.push_back({p.eps, beta, max_res, double(c.grid.points)});
  }
  b.tables.push_back(std::move(t));
  b.verdicts.push_back(below("identity_residual", worst, 2.0 * c.params.tail_tol));
}

void harmonicity(const ExperimentConfig& c, ReportBundle& b, int jobs) {
  Table t{"harmonicity", {"eps", "max_analytic", "max_fd", "points"}, {}};
  const int per_axis = std::max(1, int(std::lround(std::cbrt(double(c.grid.points)))));
  const double factor = c.grid.fd_step > 0.0 ? c.grid.fd_step : 3e-3;
  double worst_a = 0.0, worst_f = 0.0;
  for (double eps : c.eps_schedule.resolve()) {
    const PotentialParams p = params_at(c, eps);
    std::vector<ChartPoint3> pts;
    for (int i = 0; i < per_axis; ++i)
      for (int j = 0; j < per_axis; ++j)
        for (int k = 0; k < per_axis; ++k) {
          const double step = 1.0 / per_axis;
          pts.push_back({eps * (-0.5 + step * (i + 0.5)), 2.0 * eps * (-0.5 + step * (j + 0.5)),
                         2.0 * eps * (-0.5 + step * (k + 0.5))});
        }
    std::vector<LaplacianResidual> res(pts.size());
    parallel_for(pts.size(), jobs, [&](std::size_t i) {
      const double du = pts[i].u - std::round(pts[i].u / eps) * eps;
      const double dist = std::sqrt(du * du + pts[i].radial2());
      res[i] = laplacian_residual(p, pts[i], factor * dist);
    });
    double ma = 0.0, mf = 0.0;
    for (const auto& r : res) {
      ma = std::max(ma, std::abs(r.analytic));
      mf = std::max(mf, std::abs(r.finite_difference));
    }
    worst_a = std::max(worst_a, ma);
    worst_f = std::max(worst_f, mf);
    t.rows.push_back({eps, ma, mf, double(pts.size())});
  }
  b.tables.push_back(std::move(t));
  b.verdicts.push_back(below("laplacian_analytic", worst_a, 1e-9));
  b.verdicts.push_back(below("laplacian_fd", worst_f, 1e-6));
}

std::vector<ChartPoint4> lattice_scan_grid(double eps, int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> s(-0.5, 0.5), y(-0.4, 0.4), t(0.0, 1.0);
  std::vector<ChartPoint4> out;
  while (int(out.size()) < count) {
    const ChartPoint3 p{eps * s(rng), y(rng), y(rng)};
    const double du = p.u - std::round(p.u / eps) * eps;
    if (std::sqrt(p.radial2()) < 0.05 || std::sqrt(du * du + p.radial2()) < 0.05) continue;
    out.push_back({p, t(rng)});
  }
  return out;
}

void ricci_flat(const ExperimentConfig& c, ReportBundle& b, int jobs) {
  // case_id: 0 lattice field, 1 Taub-NUT, 2 non-harmonic control.
  Table t{"ricci", {"case_id", "eps", "max_norm_ric", "points"}, {}};
  const double step = c.grid.fd_step;
  const auto eps_list = c.eps_schedule.resolve();
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    auto rng = stream(c.seed, e);
    const auto grid = lattice_scan_grid(eps_list[e], c.grid.points, rng);
    const auto scan = ricci_flatness_scan(gh_metric(params_at(c, eps_list[e]), c.gauge), grid, step, jobs);
    t.rows.push_back({0.0, eps_list[e], scan.max_norm_ric, double(grid.size())});
    b.verdicts.push_back(below("ricci_gh_eps_" + fmt("%g", eps_list[e]), scan.max_norm_ric, 1e-5));
  }
  {
    auto rng = stream(c.seed, 1000);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<ChartPoint4> grid;
    while (int(grid.size()) < std::max(1, c.grid.points / 2)) {
      const double rho = 0.2 * std::pow(10.0, unit(rng));
      const double ct = 2.0 * unit(rng) - 1.0, phi = 2.0 * kPi * unit(rng);
      const double r = rho * std::sqrt(1.0 - ct * ct);
      if (r < 0.05) continue;
      grid.push_back({{rho * ct, r * std::cos(phi), r * std::sin(phi)}, unit(rng)});
    }
    const auto scan = ricci_flatness_scan(taub_nut(kMonopoleCharge, c.gauge), grid, step, jobs);
    t.rows.push_back({1.0, 1.0, scan.max_norm_ric, double(grid.size())});
    b.verdicts.push_back(below("ricci_taub_nut", scan.max_norm_ric, 1e-5));
  }
  {
    const PotentialParams p = params_at(c, eps_list.front());
    const Gauge gauge = c.gauge;
    const MetricField bad = gh_custom(
        [p, gauge](const ChartPoint3& x) {
          GHData d;
          d.V = eval_V_value(p, x) + 0.01 * x.u * x.u;
          d.A = eval_connection(p, x, gauge).A;
          return d;
        },
        0.05);
    auto rng = stream(c.seed, 2000);
    const auto grid = lattice_scan_grid(p.eps, std::max(1, c.grid.points / 10), rng);
    const auto scan = ricci_flatness_scan(bad, grid, step, jobs);
    t.rows.push_back({2.0, p.eps, scan.max_norm_ric, double(grid.size())});
    b.verdicts.push_back(above("ricci_negative_control", scan.max_norm_ric, 1e-3));
  }
  b.tables.push_back(std::move(t));
}

void curvature(const ExperimentConfig& c, ReportBundle& b, int jobs) {
  GridPolicy policy;
  policy.radial_points = c.grid.radial_points;
  policy.polar_angles = c.grid.polar_angles;
  policy.r_min = c.grid.r_min;
  policy.r_max = c.grid.r_max;
  if (c.grid.fd_step > 0.0) policy.fd_step_factor = c.grid.fd_step;
  policy.gauge = c.gauge;
  policy.h_coeffs = c.params.h_coeffs;
  policy.tail_tol = c.params.tail_tol;
  policy.jobs = jobs;
  const auto rows = curvature_sweep(c.eps_schedule.resolve(), policy);

  Table t{"sweep", {"eps", "max_norm_rm", "ratio_upper", "ratio_lower", "argmax_u", "argmax_y1", "argmax_y2"}, {}};
  Figure f{"sweep", "max |Rm| against eps", "eps", "max |Rm|", {}};
  Series measured{"max |Rm(g_eps)|", {}, {}}, reference{"C eps^-1 log(1/eps)", {}, {}};
  double up_lo = INFINITY, up_hi = 0.0, low_min = INFINITY, core_ratio = 0.0;
  std::size_t degraded = 0;
  for (const auto& r : rows) {
    t.rows.push_back({r.eps, r.max_norm_rm, r.ratio_upper, r.ratio_lower, r.argmax_point.u, r.argmax_point.y1,
                      r.argmax_point.y2});
    up_lo = std::min(up_lo, r.ratio_upper);
    up_hi = std::max(up_hi, r.ratio_upper);
    low_min = std::min(low_min, r.ratio_lower);
    if (r.degraded || r.not_applicable) ++degraded;
    const double beta = log_scale(r.eps);
    core_ratio = std::max(core_ratio, r.argmax_point.vec().norm() / r.eps / (3.0 * kMonopoleCharge / beta));
    measured.x.push_back(r.eps);
    measured.y.push_back(r.max_norm_rm);
  }
  const double c0 = rows.front().ratio_upper;
  for (const auto& r : rows) {
    reference.x.push_back(r.eps);
    reference.y.push_back(c0 * std::log(1.0 / r.eps) / r.eps);
  }
  f.series = {measured, reference};
  const double centre = std::sqrt(up_lo * up_hi);
  b.tables.push_back(std::move(t));
  b.figures.push_back(std::move(f));
  b.verdicts.push_back(below("ratio_upper_spread", up_hi / up_lo, 10.0));
  b.verdicts.push_back(above("ratio_lower_over_band_centre", low_min / centre, 1e-3));
  b.verdicts.push_back(below("degraded_rows", double(degraded), 0.5));
  b.verdicts.push_back(below("argmax_over_bubble_core", core_ratio, 1.0));
}

void region1(const ExperimentConfig& c, ReportBundle& b, int jobs) {
  Region1Options o;
  o.R0 = c.grid.r_max;
  o.r_inner = c.grid.r_min;
  o.radial_points = c.grid.radial_points;
  o.polar_angles = c.grid.polar_angles;
  o.gauge = c.gauge;
  o.jobs = jobs;
  const auto rs = region1_check(c.eps_schedule.resolve(), o);
  Table t{"region1", {"beta", "eps", "sup_dev", "potential_dev", "gtt_dev"}, {}};
  for (const auto& r : rs) t.rows.push_back({r.beta, r.eps, r.sup_dev, r.aux.at("potential_dev"), r.aux.at("gtt_dev")});
  b.tables.push_back(std::move(t));
  b.figures.push_back({"region1", "bubble deviation from Taub-NUT", "beta", "sup deviation",
                       {{"metric components", betas_of(rs), column(rs, "sup_dev")},
                        {"potential", betas_of(rs), column(rs, "potential_dev")}}});
  b.verdicts.push_back(decreasing("metric_dev_decreasing", column(rs, "sup_dev")));
  b.verdicts.push_back(below("metric_dev_final", rs.back().sup_dev, 0.05));
  b.verdicts.push_back(decreasing("potential_dev_decreasing", column(rs, "potential_dev")));
  b.verdicts.push_back(below("potential_dev_final", rs.back().aux.at("potential_dev"), 0.05));
}

void region2(const ExperimentConfig& c, ReportBundle& b, int jobs) {
  Region2Options o;
  o.schedule = c.d_schedule;
  o.w_max = c.grid.r_max;
  o.radial_points = c.grid.radial_points;
  o.polar_angles = c.grid.polar_angles;
  o.jobs = jobs;
  const auto rs = region2_check(c.eps_schedule.resolve(), o);
  Table t{"region2",
          {"beta", "eps", "d", "r_excision", "sup_dev", "fiber_sup", "diameter_bound", "diameter_chain", "gamma_inv"},
          {}};
  double chain_ratio = 0.0;
  for (const auto& r : rs) {
    t.rows.push_back({r.beta, r.eps, r.d, r.r_excision, r.sup_dev, r.aux.at("fiber_sup"), r.aux.at("diameter_bound"),
                      r.aux.at("diameter_chain"), r.aux.at("gamma_inv")});
    chain_ratio = std::max(chain_ratio, r.aux.at("diameter_bound") / r.aux.at("diameter_chain"));
  }
  Table q{"quadrature", {"r", "beta", "integral", "closed_form", "bound", "margin"}, {}};
  double min_margin = INFINITY, max_mismatch = 0.0;
  for (double r : {0.1, 0.5})
    for (double beta : {1.0, 4.0, 16.0}) {
      const auto check = quadrature_inequality(r, beta);
      q.rows.push_back({r, beta, check.integral, check.closed_form, check.bound, check.margin()});
      min_margin = std::min(min_margin, check.margin());
      max_mismatch = std::max(max_mismatch, std::abs(check.integral - check.closed_form));
    }
  b.tables.push_back(std::move(t));
  b.tables.push_back(std::move(q));
  b.figures.push_back({"region2", "neck deviation from flat R^3", "beta", "sup",
                       {{"|V1/beta - 1|", betas_of(rs), column(rs, "sup_dev")},
                        {"fiber d^-2/V1", betas_of(rs), column(rs, "fiber_sup")},
                        {"excision diameter", betas_of(rs), column(rs, "diameter_bound")}}});
  b.verdicts.push_back(decreasing("potential_dev_decreasing", column(rs, "sup_dev")));
  b.verdicts.push_back(decreasing("fiber_sup_decreasing", column(rs, "fiber_sup")));
  b.verdicts.push_back(decreasing("diameter_bound_decreasing", column(rs, "diameter_bound")));
  b.verdicts.push_back(above("quadrature_min_margin", min_margin, 0.0));
  b.verdicts.push_back(below("quadrature_closed_form_mismatch", max_mismatch, 1e-10));
  b.verdicts.push_back(below("diameter_bound_over_chain", chain_ratio, 1.0));
}

void region3(const ExperimentConfig& c, ReportBundle& b, int jobs) {
  Region3Options o;
  o.schedule = c.d_schedule;
  o.v_max = c.grid.r_max;
  o.radial_points = c.grid.radial_points;
  o.polar_angles = c.grid.polar_angles;
  o.thresholds = c.thresholds;
  o.jobs = jobs;
  const auto rs = region3_check(c.eps_schedule.resolve(), o);
  Table t{"region3",
          {"beta", "eps", "d", "r_excision", "sup_dev", "fiber_constant", "horizontal_circle", "gamma0sq"},
          {}};
  double fiber_c = 0.0, circle_lo = INFINITY, circle_hi = 0.0;
  for (const auto& r : rs) {
    t.rows.push_back({r.beta, r.eps, r.d, r.r_excision, r.sup_dev, r.aux.at("fiber_constant"),
                      r.aux.at("horizontal_circle"), r.aux.at("gamma0sq")});
    fiber_c = std::max(fiber_c, r.aux.at("fiber_constant"));
    circle_lo = std::min(circle_lo, r.aux.at("horizontal_circle"));
    circle_hi = std::max(circle_hi, r.aux.at("horizontal_circle"));
  }
  b.tables.push_back(std::move(t));
  b.figures.push_back({"region3", "outer deviation from flat S^1 x R^2", "beta", "sup |V1/d^2 - gamma0^2|",
                       {{"potential", betas_of(rs), column(rs, "sup_dev")}}});
  b.verdicts.push_back(decreasing("potential_dev_decreasing", column(rs, "sup_dev")));
  b.verdicts.push_back(below("potential_dev_final", rs.back().sup_dev, 0.05));
  b.verdicts.push_back(below("fiber_constant", fiber_c, 2.0));
  b.verdicts.push_back(above("horizontal_circle_min_over_r0", circle_lo / c.thresholds.r0, 1.0));
  b.verdicts.push_back(below("horizontal_circle_max_over_C0", circle_hi / c.thresholds.C0, 1.0));
}

Matrix4 smooth_perturbation(const ChartPoint4& p) {
  Matrix4 P = Matrix4::Identity() * (1.0 + 0.5 * std::sin(2.0 * p.base.u + p.base.y1));
  P(0, 3) = P(3, 0) = 0.2 * std::cos(p.base.y2);
  P(1, 2) = P(2, 1) = 0.1 * std::sin(p.base.y1 - p.base.y2);
  return P;
}

void limit_stability(const ExperimentConfig& c, ReportBundle& b, int) {
  const auto eps_list = c.eps_schedule.resolve();
  auto rng = stream(c.seed, 0);
  std::uniform_real_distribution<double> u(-0.5, 0.5), y(0.1, 0.4);
  std::vector<ChartPoint4> grid;
  for (int i = 0; i < c.grid.points; ++i) grid.push_back({{u(rng), y(rng), y(rng)}, 0.0});

  std::vector<MetricField> g_seq;
  std::vector<double> lambdas;
  for (double eps : eps_list) {
    g_seq.push_back(gh_metric(params_at(c, eps), c.gauge));
    lambdas.push_back(log_scale(eps) / eps);
  }
  auto perturbed_seq = [&](auto amplitude) {
    std::vector<MetricField> h;
    for (std::size_t i = 0; i < eps_list.size(); ++i)
      h.push_back(perturbed(g_seq[i], smooth_perturbation, amplitude(eps_list[i])));
    return h;
  };
  const double step = c.grid.fd_step > 0.0 ? c.grid.fd_step : 1e-2;
  const auto fast = limit_stability_compare(g_seq, perturbed_seq([](double e) { return std::exp(-1.0 / e); }),
                                            lambdas, 2, grid, step);
  const auto slow = limit_stability_compare(g_seq, perturbed_seq([](double e) { return std::sqrt(e); }), lambdas, 2,
                                            grid, step);
  Table t{"stability", {"eps", "lambda", "D_exp", "component_exp", "D_sqrt", "component_sqrt"}, {}};
  for (std::size_t i = 0; i < eps_list.size(); ++i)
    t.rows.push_back({eps_list[i], lambdas[i], fast.steps[i].D, fast.steps[i].component_sup, slow.steps[i].D,
                      slow.steps[i].component_sup});
  b.tables.push_back(std::move(t));
  b.verdicts.push_back({"exp_rate_accepted", fast.pass, "comparator PASS", fast.steps.back().D});
  b.verdicts.push_back({"sqrt_rate_rejected", !slow.pass, "comparator FAIL", slow.steps.back().D});
}

void matrix_lemma(const ExperimentConfig& c, ReportBundle& b, int jobs) {
  CalibrationOptions o;
  o.jobs = jobs;
  const auto& m = c.matrix;
  const auto cal = calibrate_constant(m.n, m.eps_list, m.samples, c.seed, o);
  const auto ver = verify_constant(m.n, m.eps_list, m.samples, c.seed + 1, cal.C_hat, o);
  Table t{"matrix", {"n", "samples", "C_hat", "argmax_eps", "fresh_max_ratio", "violations", "C_hat_diag"}, {}};
  double c_diag = NAN;
  if (m.n >= 2) {
    CalibrationOptions d = o;
    d.mode = SamplingMode::DiagonalFamily;
    c_diag = calibrate_constant(m.n, {m.eps_list.front()}, std::min<std::size_t>(m.samples, 20000), c.seed, d).C_hat;
  }
  t.rows.push_back({double(m.n), double(cal.draws), cal.C_hat, cal.argmax_eps, ver.max_ratio, double(ver.violations),
                    c_diag});
  b.tables.push_back(std::move(t));
  b.verdicts.push_back(below("fresh_seed_violations", double(ver.violations), 0.5));
  if (m.n >= 2) {
    b.verdicts.push_back(below("diag_family_C_hat_minus_2", std::abs(c_diag - 2.0), 1e-12));
    const double delta = 0.0625;
    Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
    A(0, 0) = 1.0 + delta;
    A(1, 1) = 1.0 - delta;
    const auto gap = matrix_lemma_gap(A, 2.0 * delta * delta);
    const double mismatch = std::abs(gap.dist_sq - 2.0 * gap.det_slack);
    b.verdicts.push_back({"analytic_family_mismatch", mismatch == 0.0, "== 0", mismatch});
  }
}

}  // namespace

ReportBundle run(const ExperimentConfig& config, int jobs) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  ReportBundle b;
  b.experiment = config.experiment;
  b.config = config;
  b.config_hash = config_hash(config);
  b.code_version = OVM_VERSION;
  try {
    switch (config.experiment) {
      case Experiment::PotentialIdentity: potential_identity(config, b, jobs); break;
      case Experiment::Harmonicity: harmonicity(config, b, jobs); break;
      case Experiment::RicciFlat: ricci_flat(config, b, jobs); break;
      case Experiment::CurvatureSweep: curvature(config, b, jobs); break;
      case Experiment::Region1: region1(config, b, jobs); break;
      case Experiment::Region2: region2(config, b, jobs); break;
      case Experiment::Region3: region3(config, b, jobs); break;
      case Experiment::LimitStability: limit_stability(config, b, jobs); break;
      case Experiment::MatrixLemma: matrix_lemma(config, b, jobs); break;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    b.verdicts.push_back({std::string("error: ") + e.what(), false, "no module error", NAN});
  }
  b.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return b;
}

// ---------------------------------------------------------------------------
// Bundle serialization

namespace {

// JSON has no NaN; non-finite numbers travel as null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
double number_from(const json& j) { return j.is_null() ? NAN : j.get<double>(); }

}  // namespace

json bundle_to_json(const ReportBundle& b) {
  json j;
  j["experiment"] = to_string(b.experiment);
  j["config"] = config_to_json(b.config);
  j["config_hash"] = b.config_hash;
  j["code_version"] = b.code_version;
  json tables = json::array();
  for (const auto& t : b.tables) {
    json rows = json::array();
    for (const auto& r : t.rows) {
      json row = json::array();
      for (double x : r) row.push_back(number(x));
      rows.push_back(row);
    }
    tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", rows}});
  }
  j["tables"] = tables;
  json verdicts = json::array();
  for (const auto& v : b.verdicts)
    verdicts.push_back({{"name", v.name},
                        {"status", v.pass ? "PASS" : "FAIL"},
                        {"threshold", v.threshold},
                        {"observed", number(v.observed)}});
  j["verdicts"] = verdicts;
  json figures = json::array();
  for (const auto& f : b.figures) {
    json series = json::array();
    for (const auto& s : f.series) series.push_back({{"label", s.label}, {"x", s.x}, {"y", s.y}});
    figures.push_back(
        {{"name", f.name}, {"title", f.title}, {"x_label", f.x_label}, {"y_label", f.y_label}, {"series", series}});
  }
  j["figures"] = figures;
  return j;
}

ReportBundle bundle_from_json(const json& j) {
  try {
    check_keys(j, {"experiment", "config", "config_hash", "code_version", "tables", "verdicts", "figures"}, "bundle");
    ReportBundle b;
    b.experiment = experiment_from_string(j.at("experiment").get<std::string>());
    b.config = config_from_json(j.at("config"));
    b.config_hash = j.at("config_hash").get<std::string>();
    b.code_version = j.at("code_version").get<std::string>();
    for (const auto& t : j.at("tables")) {
      Table table{t.at("name").get<std::string>(), t.at("columns").get<std::vector<std::string>>(), {}};
      for (const auto& r : t.at("rows")) {
        std::vector<double> row;
        for (const auto& x : r) row.push_back(number_from(x));
        table.rows.push_back(std::move(row));
      }
      b.tables.push_back(std::move(table));
    }
    for (const auto& v : j.at("verdicts"))
      b.verdicts.push_back({v.at("name").get<std::string>(), v.at("status").get<std::string>() == "PASS",
                            v.at("threshold").get<std::string>(), number_from(v.at("observed"))});
    for (const auto& f : j.at("figures")) {
      Figure fig{f.at("name").get<std::string>(), f.at("title").get<std::string>(),
                 f.at("x_label").get<std::string>(), f.at("y_label").get<std::string>(), {}};
      for (const auto& s : f.at("series"))
        fig.series.push_back({s.at("label").get<std::string>(), s.at("x").get<std::vector<double>>(),
                              s.at("y").get<std::vector<double>>()});
      b.figures.push_back(std::move(fig));
    }
    return b;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed bundle: ") + e.what());
  }
}

}  // namespace ovm
