#include "ovm/lattice_potential.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>

#include "ovm/errors.hpp"
#include "ovm/jet.hpp"

namespace ovm {

namespace {

using JetD = Jet<double>;

double regularization_a0(double eps) { return 2.0 / eps * (-kEulerGamma + std::log(2.0 * eps)); }

// Paired lattice sum through index N plus the closed-form integral tail and its
// first Euler-Maclaurin (midpoint) correction. Each pair
//   1/R(u+x) + 1/R(u-x) - 2/x,  x = n eps,
// is evaluated as two O(u/x^2) differences so that roundoff stays far below
// the pair's own O(x^-3) size. Returns the sum without the 1/4pi prefactor;
// `magnitude` accumulates absolute sizes for the roundoff estimate.
template <typename S>
S paired_sum(const S& u, const S& r2, double eps, long N, double& magnitude) {
  using std::log;
  using std::sqrt;
  const double a0 = regularization_a0(eps);
  const S rho2 = u * u + r2;
  S total = rsqrt(rho2) - a0;
  magnitude = std::abs(value_of(total)) + std::abs(a0);
  for (long n = 1; n <= N; ++n) {
    const double x = double(n) * eps;
    const S up = u + x;
    const S um = x - u;
    const S Rp = sqrt(up * up + r2);
    const S Rm = sqrt(um * um + r2);
    const S tp = -(2.0 * x * u + rho2) / (Rp * (Rp + x));
    const S tm = (2.0 * x * u - rho2) / (Rm * (Rm + x));
    const S pair = (tp + tm) / x;
    magnitude += (std::abs(value_of(tp)) + std::abs(value_of(tm))) / x;
    total += pair;
  }
  // Tail: sum_{n>N} g(n eps) ~ (1/eps) int_X^inf g + (eps/24) g'(X), X = (N+1/2) eps,
  // where int_X^inf g = log(4X^2) - log(X+u+R+) - log(X-u+R-).
  const double X = (double(N) + 0.5) * eps;
  const S Xp = u + X;
  const S Xm = X - u;
  const S RXp = sqrt(Xp * Xp + r2);
  const S RXm = sqrt(Xm * Xm + r2);
  const S integral = -log((Xp + RXp) / (2.0 * X)) - log((Xm + RXm) / (2.0 * X));
  const S gprime = -Xp / (RXp * RXp * RXp) - Xm / (RXm * RXm * RXm) + 2.0 / (X * X);
  total += integral / eps + (eps / 24.0) * gprime;
  magnitude += 4.0 * std::abs(std::log(2.0 * X)) / eps;
  return total;
}

// Third derivative of the pair function g(x) = F(x+u) + F(x-u) - 2/x, F(z) = (z^2+r^2)^{-1/2}.
double pair_third_derivative(double u, double r2, double x) {
  auto F3 = [r2](double z) {
    const double R2 = z * z + r2;
    const double R = std::sqrt(R2);
    return -3.0 * z * (2.0 * z * z - 3.0 * r2) / (R2 * R2 * R2 * R);
  };
  return F3(x + u) + F3(x - u) + 12.0 / (x * x * x * x);
}

double tail_remainder_bound(double u, double r2, double eps, long N) {
  const double X = (double(N) + 0.5) * eps;
  const double g3 = std::max(std::abs(pair_third_derivative(u, r2, X)),
                             std::abs(pair_third_derivative(u, r2, 1.5 * X)));
  // Next midpoint Euler-Maclaurin term is (7 eps^3 / 5760) g'''(X); carry twice it.
  return 2.0 * (7.0 * eps * eps * eps / 5760.0) * g3 * kMonopoleCharge;
}

double roundoff_bound(double magnitude) { return 16.0 * DBL_EPSILON * magnitude * kMonopoleCharge; }

void check_regular(const PotentialParams& params, const ChartPoint3& p) {
  const double eps = params.eps;
  const double un = p.u - std::round(p.u / eps) * eps;
  const double dist = std::sqrt(un * un + p.radial2());
  if (!(dist >= params.exclusion())) {
    throw Error(ErrorCode::PointTooCloseToCharge,
                "distance " + std::to_string(dist) + " to nearest charge is inside exclusion radius " +
                    std::to_string(params.exclusion()));
  }
}

long initial_index(double u, double r2, double eps) {
  const double reach = 4.0 * std::max(std::abs(u), std::sqrt(r2)) + eps;
  return std::max(4L, long(std::ceil(reach / eps)));
}

}  // namespace

void PotentialParams::validate() const {
  if (!(eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "eps must lie in (0,1)");
  validate_lattice();
}

void PotentialParams::validate_lattice() const {
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::InvalidArgument, "lattice spacing must lie in (0,1]");
  if (!(tail_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tail_tol must be positive");
  if (!(exclusion() > 0.0)) throw Error(ErrorCode::InvalidArgument, "exclusion_radius must be positive");
  if (max_index < 1) throw Error(ErrorCode::InvalidArgument, "max_index must be positive");
}

PotentialParams unit_lattice_params(const PotentialParams& params) {
  PotentialParams unit = params;
  unit.eps = 1.0;
  unit.h_coeffs.clear();
  unit.exclusion_radius = params.exclusion() / params.eps;
  return unit;
}

double truncation_bound(const PotentialParams& params, const ChartPoint3& p, const Truncation& t) {
  const double u = p.u - double(t.shift) * params.eps;
  const double r2 = p.radial2();
  double magnitude = 0.0;
  paired_sum<double>(u, r2, params.eps, t.index, magnitude);
  return tail_remainder_bound(u, r2, params.eps, t.index) + roundoff_bound(magnitude);
}

Truncation choose_truncation(const PotentialParams& params, const ChartPoint3& p) {
  const double eps = params.eps;
  Truncation t;
  t.shift = std::lround(p.u / eps);
  const double u = p.u - double(t.shift) * eps;
  const double r2 = p.radial2();
  // Roundoff grows only logarithmically with the index; estimate it once.
  double magnitude = 0.0;
  paired_sum<double>(u, r2, eps, 1, magnitude);
  const double floor_estimate = roundoff_bound(magnitude);
  if (floor_estimate > params.tail_tol)
    throw Error(ErrorCode::TolUnreachable, "roundoff floor " + std::to_string(floor_estimate) +
                                               " exceeds tail_tol");
  for (long N = initial_index(u, r2, eps); N <= params.max_index; N *= 2) {
    const double tail = tail_remainder_bound(u, r2, eps, N);
    // Leave room for the roundoff accumulated over N terms.
    if (tail + 2.0 * floor_estimate * (1.0 + std::log(double(N))) <= params.tail_tol) {
      t.index = N;
      return t;
    }
  }
  throw Error(ErrorCode::TolUnreachable, "tail bound above tail_tol within max_index " +
                                             std::to_string(params.max_index));
}

PotentialValue eval_V0(const PotentialParams& params, const ChartPoint3& p, std::optional<Truncation> pin) {
  params.validate_lattice();
  check_regular(params, p);
  const Truncation t = pin ? *pin : choose_truncation(params, p);
  const double u = p.u - double(t.shift) * params.eps;

  const JetD ju = JetD::variable(u, 0);
  const JetD jy1 = JetD::variable(p.y1, 1);
  const JetD jy2 = JetD::variable(p.y2, 2);
  const JetD r2 = jy1 * jy1 + jy2 * jy2;
  double magnitude = 0.0;
  const JetD sum = paired_sum<JetD>(ju, r2, params.eps, t.index, magnitude);

  PotentialValue out;
  out.value = sum.v * kMonopoleCharge;
  out.grad = sum.g * kMonopoleCharge;
  out.hess = sum.h * kMonopoleCharge;
  out.err_bound = tail_remainder_bound(u, p.radial2(), params.eps, t.index) + roundoff_bound(magnitude);
  if (!pin && out.err_bound > params.tail_tol)
    throw Error(ErrorCode::TolUnreachable, "certified bound " + std::to_string(out.err_bound) +
                                               " exceeds tail_tol");
  return out;
}

namespace {

void add_harmonic_part(PotentialValue& v, const HarmonicPolynomial& h, double y1, double y2, double value_scale,
                       double chain) {
  if (h.is_zero()) return;
  const auto f = h.real_part(y1, y2);
  v.value += value_scale * f.value;
  v.grad.tail<2>() += value_scale * chain * f.grad;
  v.hess.bottomRightCorner<2, 2>() += value_scale * chain * chain * f.hess;
}

}  // namespace

namespace {

// V0 + f/eps without the positivity requirement.
PotentialValue eval_V_unchecked(const PotentialParams& params, const ChartPoint3& p, std::optional<Truncation> pin) {
  PotentialValue v = eval_V0(params, p, pin);
  add_harmonic_part(v, params.h(), p.y1, p.y2, 1.0 / params.eps, 1.0);
  return v;
}

}  // namespace

PotentialValue eval_V(const PotentialParams& params, const ChartPoint3& p, std::optional<Truncation> pin) {
  PotentialValue v = eval_V_unchecked(params, p, pin);
  if (!(v.value > 0.0))
    throw Error(ErrorCode::NegativePotential, "V = " + std::to_string(v.value) + " is not positive");
  return v;
}

PotentialValue eval_V1(const PotentialParams& params, const ChartPoint3& q, std::optional<Truncation> pin) {
  params.validate();
  PotentialValue v = eval_V0(unit_lattice_params(params), q, pin);
  v.value += log_scale(params.eps);
  add_harmonic_part(v, params.h(), params.eps * q.y1, params.eps * q.y2, 1.0, params.eps);
  return v;
}

double eval_V0_value(const PotentialParams& params, const ChartPoint3& p, std::optional<Truncation> pin) {
  params.validate_lattice();
  check_regular(params, p);
  const Truncation t = pin ? *pin : choose_truncation(params, p);
  const double u = p.u - double(t.shift) * params.eps;
  double magnitude = 0.0;
  return paired_sum<double>(u, p.radial2(), params.eps, t.index, magnitude) * kMonopoleCharge;
}

double eval_V_value(const PotentialParams& params, const ChartPoint3& p, std::optional<Truncation> pin) {
  double v = eval_V0_value(params, p, pin);
  if (!params.h_coeffs.empty()) v += params.h().real_part(p.y1, p.y2).value / params.eps;
  if (!(v > 0.0)) throw Error(ErrorCode::NegativePotential, "V = " + std::to_string(v) + " is not positive");
  return v;
}

double eval_V1_value(const PotentialParams& params, const ChartPoint3& q, std::optional<Truncation> pin) {
  params.validate();
  double v = eval_V0_value(unit_lattice_params(params), q, pin) + log_scale(params.eps);
  if (!params.h_coeffs.empty()) v += params.h().real_part(params.eps * q.y1, params.eps * q.y2).value;
  return v;
}

LaplacianResidual laplacian_residual(const PotentialParams& params, const ChartPoint3& p, double fd_step) {
  if (!(fd_step > 0.0)) throw Error(ErrorCode::InvalidArgument, "fd_step must be positive");
  PotentialParams margin = params;
  margin.exclusion_radius = params.exclusion() + 2.0 * fd_step;
  check_regular(margin, p);

  LaplacianResidual out;
  out.analytic = eval_V_unchecked(params, p, std::nullopt).hess.trace();

  // Fourth-order central second differences, one pinned truncation for the stencil.
  const Truncation t = choose_truncation(params, p);
  const Eigen::Vector3d x = p.vec();
  const double centre = eval_V_unchecked(params, p, t).value;
  double lap = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    auto at = [&](double k) {
      Eigen::Vector3d y = x;
      y[axis] += k * fd_step;
      return eval_V_unchecked(params, ChartPoint3::from(y), t).value;
    };
    lap += (-at(2) + 16.0 * at(1) - 30.0 * centre + 16.0 * at(-1) - at(-2)) / (12.0 * fd_step * fd_step);
  }
  out.finite_difference = lap;
  return out;
}

}  // namespace ovm
