#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ovm/harmonic_polynomial.hpp"

namespace ovm {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kEulerGamma = std::numbers::egamma;

/// Charge of each lattice point in the potential (1/4pi per unit-density term).
inline constexpr double kMonopoleCharge = 1.0 / (4.0 * kPi);

/// Base coordinates (u, y1, y2) on the three-dimensional base Y.
struct ChartPoint3 {
  double u = 0.0;
  double y1 = 0.0;
  double y2 = 0.0;

  Eigen::Vector3d vec() const { return {u, y1, y2}; }
  static ChartPoint3 from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
  double radial2() const { return y1 * y1 + y2 * y2; }
};

struct PotentialParams {
  double eps = 0.5;
  std::vector<std::complex<double>> h_coeffs;
  double tail_tol = 1e-10;
  /// Non-positive means the default 1e-3 * eps.
  double exclusion_radius = 0.0;
  long max_index = 1L << 22;

  double exclusion() const { return exclusion_radius > 0.0 ? exclusion_radius : 1e-3 * eps; }
  HarmonicPolynomial h() const { return HarmonicPolynomial(h_coeffs); }
  /// Throws InvalidArgument unless eps in (0,1), tail_tol > 0, max_index > 0.
  void validate() const;
  /// As validate() but admits the unit lattice eps = 1.
  void validate_lattice() const;
};

/// beta = (1/2pi) log(1/eps), the canonical log scale of the collapse.
inline double log_scale(double eps) { return std::log(1.0 / eps) / (2.0 * kPi); }

struct PotentialValue {
  double value = 0.0;
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
  Eigen::Matrix3d hess = Eigen::Matrix3d::Zero();
  double err_bound = 0.0;
};

/// Truncation of the paired lattice sum: terms |n| <= index around the lattice
/// translate selected by `shift` (the charge at u = -shift*eps is the centre).
/// Pinning one truncation for a whole finite-difference stencil keeps the
/// evaluated function smooth across the stencil.
struct Truncation {
  long index = 0;
  long shift = 0;
};

/// Smallest power-of-two index meeting params.tail_tol at p.
Truncation choose_truncation(const PotentialParams& params, const ChartPoint3& p);

/// Certified tail bound plus roundoff estimate for a given truncation.
double truncation_bound(const PotentialParams& params, const ChartPoint3& p, const Truncation& t);

/// Regularized periodic potential V0(eps) = (1/4pi) sum_n (|x - (-n eps,0,0)|^{-1} - a_|n|).
PotentialValue eval_V0(const PotentialParams& params, const ChartPoint3& p,
                       std::optional<Truncation> pin = std::nullopt);

/// V(eps) = V0(eps) + Re h(y) / eps. Throws NegativePotential when V <= 0.
PotentialValue eval_V(const PotentialParams& params, const ChartPoint3& p,
                      std::optional<Truncation> pin = std::nullopt);

/// V1(eps) = eps V(eps) expressed in the rescaled coordinates q = p / eps:
/// V0(1)(q) + beta + Re h(eps v). Exclusion radius is params.exclusion()/eps.
PotentialValue eval_V1(const PotentialParams& params, const ChartPoint3& q,
                       std::optional<Truncation> pin = std::nullopt);

/// Value-only variants of the three potentials (no jets); used by metric
/// evaluation where only V is needed.
double eval_V0_value(const PotentialParams& params, const ChartPoint3& p,
                     std::optional<Truncation> pin = std::nullopt);
double eval_V_value(const PotentialParams& params, const ChartPoint3& p,
                    std::optional<Truncation> pin = std::nullopt);
double eval_V1_value(const PotentialParams& params, const ChartPoint3& q,
                     std::optional<Truncation> pin = std::nullopt);

/// Parameters of the unit lattice used in the rescaled frame.
PotentialParams unit_lattice_params(const PotentialParams& params);

struct LaplacianResidual {
  double analytic = 0.0;           // trace of the termwise Hessian
  double finite_difference = 0.0;  // fourth-order central stencil on values
};

LaplacianResidual laplacian_residual(const PotentialParams& params, const ChartPoint3& p, double fd_step);

}  // namespace ovm
