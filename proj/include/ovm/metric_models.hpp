#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "ovm/gauge_connection.hpp"
#include "ovm/lattice_potential.hpp"

namespace ovm {

/// Base point plus fiber coordinate t in [0, 1) (theta0 has period 1).
struct ChartPoint4 {
  ChartPoint3 base;
  double t = 0.0;

  Eigen::Vector4d vec() const { return {base.u, base.y1, base.y2, t}; }
  static ChartPoint4 from(const Eigen::Vector4d& v) { return {{v[0], v[1], v[2]}, v[3]}; }
};

using Matrix4 = Eigen::Matrix4d;
using Vector4 = Eigen::Vector4d;

enum class MetricKind { GibbonsHawking, GibbonsHawkingRescaled, TaubNUT, FlatR3Product, FlatS1R2, Rescaled, Custom };

std::string to_string(MetricKind kind);

/// Potential and connection feeding the Gibbons-Hawking assembly.
struct GHData {
  double V = 1.0;
  Eigen::Vector3d A = Eigen::Vector3d::Zero();
};

/// Gibbons-Hawking components in coordinates (u, y1, y2, t):
/// V (du^2 + dy^2) + V^{-1} (dt + A)^2.
Matrix4 gibbons_hawking_components(const GHData& d);

/// Immutable metric field. Copies share the underlying model.
class MetricField {
 public:
  class Model {
   public:
    virtual ~Model() = default;
    virtual Matrix4 eval(const ChartPoint4& p) const = 0;
    /// Coordinate length over which components vary appreciably near p.
    virtual double coordinate_scale(const ChartPoint4&) const { return 1.0; }
    /// Copy of the field with any adaptive truncation pinned around `centre`
    /// so that nearby evaluations are one smooth function.
    virtual std::shared_ptr<const Model> localized(const ChartPoint4&) const { return nullptr; }
    virtual MetricKind kind() const = 0;
  };

  explicit MetricField(std::shared_ptr<const Model> model) : model_(std::move(model)) {}

  Matrix4 operator()(const ChartPoint4& p) const { return model_->eval(p); }
  Matrix4 eval(const ChartPoint4& p) const { return model_->eval(p); }
  double coordinate_scale(const ChartPoint4& p) const { return model_->coordinate_scale(p); }
  MetricKind kind() const { return model_->kind(); }

  MetricField localized(const ChartPoint4& centre) const {
    auto m = model_->localized(centre);
    return m ? MetricField(std::move(m)) : *this;
  }

 private:
  std::shared_ptr<const Model> model_;
};

/// Ooguri-Vafa field g_eps in (u, y1, y2, t): V = V(eps), A from eval_connection.
MetricField gh_metric(const PotentialParams& params, Gauge gauge);

/// eps^{-1} g_eps in rescaled coordinates (s, v1, v2, t) = (u, y1, y2)/eps, t:
/// the Gibbons-Hawking field of V1(eps). Usable at any eps since V(eps) itself is
/// never formed.
MetricField gh_metric_rescaled(const PotentialParams& params, Gauge gauge);

/// Taub-NUT: V = 1 + c/rho on R^3 with the one-monopole connection.
MetricField taub_nut(double c, Gauge gauge = Gauge::StringPlus);

/// Gibbons-Hawking field of user-supplied V and A (debug and negative controls).
MetricField gh_custom(std::function<GHData(const ChartPoint3&)> source, double scale = 1.0);

/// Flat R^3 x S^1 product, identity components.
MetricField flat_r3_product();

/// gamma0^2 (da^2 + dw1^2 + dw2^2) on the base with a unit fiber.
MetricField flat_s1r2(double gamma0sq);

/// Affine coordinate change x_inner = diag(jacobian) * x + offset.
struct CoordinateMap {
  Vector4 jacobian = Vector4::Ones();
  Vector4 offset = Vector4::Zero();
};

/// lambda * g, optionally pulled back through a diagonal affine coordinate map.
MetricField rescale(const MetricField& g, double lambda, std::optional<CoordinateMap> map = std::nullopt);

/// g + amplitude * P(x) with P a caller-supplied symmetric field.
MetricField perturbed(const MetricField& g, std::function<Matrix4(const ChartPoint4&)> perturbation, double amplitude);

/// Length of the fiber circle over `base`: integral over t in [0,1) of sqrt(g_tt).
double fiber_length(const MetricField& g, const ChartPoint3& base);

/// Period tau(y) = log(y)/(2 pi i) + i h(y) on the principal branch, continued
/// `winding` times counterclockwise around y = 0.
std::complex<double> eval_tau(std::complex<double> y, const HarmonicPolynomial& h, int winding = 0);

}  // namespace ovm
