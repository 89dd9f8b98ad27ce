#include "ovm/gauge_connection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ovm/errors.hpp"

namespace ovm {

namespace {

// Coefficient of dphi divided by r^2 for one monopole of unit charge at u = c
// whose string points towards sign(sigma) * (-inf). Finite on the string-free
// half of the axis; `on_string` is set where the closed form is singular.
double monopole_b(double du, double r2, double sigma, bool& on_string) {
  const double rho = std::sqrt(du * du + r2);
  if (sigma > 0.0 && du > 0.0) return -1.0 / (rho * (rho + du));
  if (sigma < 0.0 && du < 0.0) return 1.0 / (rho * (rho - du));
  on_string = true;
  return (du / rho - sigma) / r2;
}

// k'''(x) / r^2 for the paired term k(x) = (x+u)/R+ - (x-u)/R-.
double pair_third_derivative(double u, double r2, double x) {
  auto T = [r2](double z) {
    const double R2 = z * z + r2;
    const double R = std::sqrt(R2);
    return -3.0 * (r2 - 4.0 * z * z) / (R2 * R2 * R2 * R);
  };
  return T(x + u) - T(x - u);
}

double tail_bound(double u, double r2, double eps, long N) {
  const double X = (double(N) + 0.5) * eps;
  const double k3 = std::max(std::abs(pair_third_derivative(u, r2, X)),
                             std::abs(pair_third_derivative(u, r2, 1.5 * X)));
  return 2.0 * (7.0 * eps * eps * eps / 5760.0) * k3 * r2 * kMonopoleCharge;
}

long choose_index(const PotentialParams& params, double u, double r2) {
  const double eps = params.eps;
  const double reach = 4.0 * std::max(std::abs(u), std::sqrt(r2)) + eps;
  for (long N = std::max(4L, long(std::ceil(reach / eps))); N <= params.max_index; N *= 2)
    if (tail_bound(u, r2, eps, N) <= params.tail_tol) return N;
  throw Error(ErrorCode::TolUnreachable, "connection tail bound above tail_tol within max_index");
}

GaugeForm assemble(double b, double r2, double y1, double y2, Gauge gauge) {
  GaugeForm out;
  out.gauge = gauge;
  out.a_phi = b * r2;
  out.A = {0.0, -b * y2, b * y1};
  return out;
}

}  // namespace

long choose_connection_index(const PotentialParams& params, const ChartPoint3& p) {
  return choose_index(params, p.u, p.radial2());
}

GaugeForm monopole_connection(double charge, const ChartPoint3& p, Gauge gauge, double string_exclusion) {
  const double r2 = p.radial2();
  bool on_string = false;
  const double b = charge * monopole_b(p.u, r2, string_sign(gauge), on_string);
  if (on_string && std::sqrt(r2) < std::max(string_exclusion, 0.0) + 1e-300)
    throw Error(ErrorCode::OnDiracString, "point within exclusion radius of the Dirac string");
  return assemble(b, r2, p.y1, p.y2, gauge);
}

GaugeForm eval_connection(const PotentialParams& params, const ChartPoint3& p, Gauge gauge,
                          const ConnectionOptions& options) {
  params.validate_lattice();
  const double eps = params.eps;
  const double u = p.u;
  const double r2 = p.radial2();
  const double r = std::sqrt(r2);

  bool on_string = false;
  double b = monopole_b(u, r2, string_sign(gauge), on_string);

  if (!options.single_charge) {
    const long N = options.pin_index ? *options.pin_index : choose_index(params, u, r2);
    for (long n = 1; n <= N; ++n) {
      const double x = double(n) * eps;
      b += monopole_b(u + x, r2, 1.0, on_string);   // charge at -x
      b += monopole_b(u - x, r2, -1.0, on_string);  // charge at +x
    }
    // Tail of sum_{n>N} k(n eps) / r^2 with its midpoint Euler-Maclaurin correction.
    const double X = (double(N) + 0.5) * eps;
    const double Rp = std::sqrt((X + u) * (X + u) + r2);
    const double Rm = std::sqrt((X - u) * (X - u) + r2);
    const double integral = 2.0 * u * (1.0 / (Rp + X + u) + 1.0 / (Rm + X - u)) / (Rp + Rm);
    const double kprime = 1.0 / (Rp * Rp * Rp) - 1.0 / (Rm * Rm * Rm);
    b += integral / eps + (eps / 24.0) * kprime;
  }

  if (on_string && r < params.exclusion())
    throw Error(ErrorCode::OnDiracString,
                "distance " + std::to_string(r) + " to the string axis is inside the exclusion radius");

  GaugeForm out = assemble(kMonopoleCharge * b, r2, p.y1, p.y2, gauge);
  if (!options.single_charge) {
    const auto h = params.h();
    if (!h.is_zero()) out.A[0] = h.imag_part(p.y1, p.y2) / eps;
  }
  return out;
}

GaugeForm eval_connection1(const PotentialParams& params, const ChartPoint3& q, Gauge gauge,
                           const ConnectionOptions& options) {
  params.validate();
  GaugeForm out = eval_connection(unit_lattice_params(params), q, gauge, options);
  const auto h = params.h();
  if (!options.single_charge && !h.is_zero()) out.A[0] = h.imag_part(params.eps * q.y1, params.eps * q.y2);
  return out;
}

}  // namespace ovm
