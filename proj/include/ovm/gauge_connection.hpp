#pragma once

#include <optional>

#include <Eigen/Dense>

#include "ovm/lattice_potential.hpp"

namespace ovm {

/// Which half of the central charge's axis carries its Dirac string.
/// StringPlus: regular on u > 0, string on u < 0. StringMinus: the reverse.
enum class Gauge { StringPlus, StringMinus };

inline double string_sign(Gauge g) { return g == Gauge::StringPlus ? 1.0 : -1.0; }

/// Base components (A_u, A_y1, A_y2) of theta0 - dt, where dA = *dV for the
/// flat metric du^2 + dy1^2 + dy2^2 with orientation (u, y1, y2).
struct GaugeForm {
  Eigen::Vector3d A = Eigen::Vector3d::Zero();
  Gauge gauge = Gauge::StringPlus;
  double a_phi = 0.0;  // coefficient of dphi, phi = arg(y1 + i y2)
};

struct ConnectionOptions {
  /// Only the n = 0 monopole; the lattice sum and harmonic part are dropped.
  bool single_charge = false;
  /// Lattice truncation index; shift is ignored because A is not periodic in
  /// this gauge.
  std::optional<long> pin_index;
};

/// Superposition of monopole potentials, one per lattice charge, plus
/// Im h(y)/eps du for the harmonic part. Charges left of the centre carry
/// strings towards u = -inf, charges right of it towards u = +inf, so the sum
/// converges after pairing. Throws OnDiracString within exclusion radius of
/// the u-axis.
GaugeForm eval_connection(const PotentialParams& params, const ChartPoint3& p, Gauge gauge,
                          const ConnectionOptions& options = {});

/// Smallest power-of-two lattice index meeting params.tail_tol for A at p.
long choose_connection_index(const PotentialParams& params, const ChartPoint3& p);

/// Connection of the rescaled potential V1 in coordinates q = p / eps.
GaugeForm eval_connection1(const PotentialParams& params, const ChartPoint3& q, Gauge gauge,
                           const ConnectionOptions& options = {});

/// Textbook single monopole of the given charge: A = charge (u/rho - sigma) dphi.
GaugeForm monopole_connection(double charge, const ChartPoint3& p, Gauge gauge, double string_exclusion = 0.0);

/// Hodge star of dV in the flat base metric, as the 2-form components
/// (F_{y1 y2}, F_{y2 u}, F_{u y1}) = grad V.
inline Eigen::Vector3d hodge_dV(const Eigen::Vector3d& gradV) { return gradV; }

}  // namespace ovm
