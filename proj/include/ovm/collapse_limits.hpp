#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ovm/curvature.hpp"
#include "ovm/metric_models.hpp"

namespace ovm {

enum class Region { Bubble, Neck, Outer };

std::string to_string(Region r);

/// Finite-scale stand-ins for the asymptotic region conditions.
struct RegionThresholds {
  double R0 = 1.0;          // Bubble: d <= R0 beta^{-1/2}
  double neck_low = 1.5;    // Neck: d beta^{1/2} >= neck_low
  double neck_high = 0.75;  //   and d beta^{-1/2} <= neck_high
  double r0 = 0.9;          // Outer: r0 beta^{1/2} <= d <= C0 beta^{1/2}
  double C0 = 4.0;
};

struct RegionCase {
  Region region = Region::Bubble;
  double eps = 0.0;
  double beta = 0.0;
  double d = 0.0;
  double r_excision = 0.0;  // zero in the bubble
  std::optional<double> gamma_sq;   // neck: d beta^{1/2}
  std::optional<double> gamma0sq;   // outer: beta / d^2
};

/// Region of a base point at rescaled distance d from the nut. Bubble, Neck
/// and Outer are tried in that order; throws AmbiguousRegion if none holds.
RegionCase classify_region(double eps, double d, const RegionThresholds& thresholds = {});

struct DistanceOptions {
  int grid_points = 25;  // per axis, odd so the nut is a node
  double padding = 0.25;
};

/// Distance from the fiber over p0 (rescaled chart, s reduced mod 1) to the
/// nut in eps^{-1} g_eps, measured in the base metric V1 (ds^2 + dv^2): the
/// lesser of a 26-neighbour graph search and the straight-ray integral.
double nut_distance(const PotentialParams& params, const ChartPoint3& p0, const DistanceOptions& options = {});

RegionCase classify_point(const PotentialParams& params, const ChartPoint3& p0,
                          const RegionThresholds& thresholds = {}, const DistanceOptions& options = {});

struct ConvergenceReport {
  double eps = 0.0;
  double beta = 0.0;
  double d = 0.0;
  double r_excision = 0.0;
  double sup_dev = 0.0;
  std::string excised;
  std::map<std::string, double> aux;
};

/// d = coefficient * beta^exponent.
struct DSchedule {
  double coefficient = 1.0;
  double exponent = 0.25;
  double at(double beta) const;
};

/// eps = exp(-2 pi m), i.e. beta = m.
std::vector<double> eps_for_betas(const std::vector<double>& betas);

struct Region1Options {
  double R0 = 1.0;
  double r_inner = 0.1;
  int radial_points = 6;
  int polar_angles = 6;
  Gauge gauge = Gauge::StringPlus;
  int jobs = 1;
};

/// beta eps^{-1} g_eps in (a, w) = beta (s, v) against taub_nut(1/4pi).
/// sup_dev: largest orthonormal-frame component deviation. aux: potential_dev
/// (sup |V1/beta - 1 - c/rho_w|), gtt_dev at w = (1,0,0).
std::vector<ConvergenceReport> region1_check(const std::vector<double>& eps_list, const Region1Options& options = {});

struct Region2Options {
  DSchedule schedule{1.0, 0.25};
  double w_max = 1.5;
  int radial_points = 12;
  int polar_angles = 6;
  int jobs = 1;
};

/// d^{-2} eps^{-1} g_eps in (a, w) = beta^{1/2} d^{-1} (s, v) against the flat
/// base outside the ball rho_s <= r_k. sup_dev: sup |V1/beta - 1|. aux:
/// fiber_sup, diameter_bound (quadrature), diameter_chain (closed-form chain),
/// gamma_inv.
std::vector<ConvergenceReport> region2_check(const std::vector<double>& eps_list, const Region2Options& options = {});

struct Region3Options {
  DSchedule schedule{1.0, 0.5};
  double v_max = 2.0;
  int radial_points = 10;
  int polar_angles = 6;
  int slab_points = 11;
  RegionThresholds thresholds;
  int jobs = 1;
};

/// d^{-2} eps^{-1} g_eps in (s, v) against gamma0^2 (ds^2 + dv^2) outside the
/// ball rho_s <= beta^{-3/4}. sup_dev: sup |V1/d^2 - gamma0^2|. aux:
/// fiber_constant (max beta^2 d^{-2} / V1), horizontal_circle (d^{-1} length
/// of the s-circle at |v| = 1), gamma0sq.
std::vector<ConvergenceReport> region3_check(const std::vector<double>& eps_list, const Region3Options& options = {});

struct QuadratureCheck {
  double r = 0.0;
  double beta = 0.0;
  double integral = 0.0;     // Gauss-Legendre, rho = t^2 substitution
  double closed_form = 0.0;  // sqrt(rho(1+k rho)) + asinh(sqrt(k rho))/sqrt(k), k = 2 beta
  double bound = 0.0;        // 2 r^{1/2} + 2 beta^{1/2} r
  double margin() const { return bound - integral; }
};

/// Integral over [0, r] of (1/rho + 2 beta)^{1/2}.
QuadratureCheck quadrature_inequality(double r, double beta);

struct StabilityStep {
  double lambda = 0.0;
  double D = 0.0;               // max_k lambda^{-k/2} |d^k (h - g)|_g
  double component_sup = 0.0;   // sup |lambda (h - g)| over entries
  double fd_error = 0.0;
};

struct StabilityVerdict {
  bool pass = false;
  std::vector<StabilityStep> steps;
};

/// Throws GridTooCoarse if a step's finite-difference error exceeds its D.
StabilityVerdict limit_stability_compare(const std::vector<MetricField>& g_seq, const std::vector<MetricField>& h_seq,
                                         const std::vector<double>& lambda_seq, int k_max,
                                         const std::vector<ChartPoint4>& grid, double fd_step = 1e-2);

}  // namespace ovm
