#include "ovm/metric_models.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "ovm/errors.hpp"

namespace ovm {

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::GibbonsHawking: return "GibbonsHawking";
    case MetricKind::GibbonsHawkingRescaled: return "GibbonsHawkingRescaled";
    case MetricKind::TaubNUT: return "TaubNUT";
    case MetricKind::FlatR3Product: return "FlatR3Product";
    case MetricKind::FlatS1R2: return "FlatS1R2";
    case MetricKind::Rescaled: return "Rescaled";
    case MetricKind::Custom: return "Custom";
  }
  return "Unknown";
}

Matrix4 gibbons_hawking_components(const GHData& d) {
  if (!(d.V > 0.0)) throw Error(ErrorCode::NegativePotential, "Gibbons-Hawking potential must be positive");
  const double inv = 1.0 / d.V;
  Matrix4 g = Matrix4::Zero();
  g.topLeftCorner<3, 3>() = d.V * Eigen::Matrix3d::Identity() + inv * d.A * d.A.transpose();
  g.block<3, 1>(0, 3) = inv * d.A;
  g.block<1, 3>(3, 0) = inv * d.A.transpose();
  g(3, 3) = inv;
  return g;
}

namespace {

double nearest_charge_distance(const ChartPoint3& p, double spacing) {
  const double du = p.u - std::round(p.u / spacing) * spacing;
  return std::sqrt(du * du + p.radial2());
}

class LatticeGH final : public MetricField::Model {
 public:
  LatticeGH(PotentialParams params, Gauge gauge, bool rescaled, std::optional<Truncation> vpin = std::nullopt,
            std::optional<long> apin = std::nullopt)
      : params_(std::move(params)), gauge_(gauge), rescaled_(rescaled), vpin_(vpin), apin_(apin) {
    params_.validate();
  }

  Matrix4 eval(const ChartPoint4& p) const override {
    ConnectionOptions opts;
    opts.pin_index = apin_;
    GHData d;
    if (rescaled_) {
      d.V = eval_V1_value(params_, p.base, vpin_);
      d.A = eval_connection1(params_, p.base, gauge_, opts).A;
    } else {
      d.V = eval_V_value(params_, p.base, vpin_);
      d.A = eval_connection(params_, p.base, gauge_, opts).A;
    }
    return gibbons_hawking_components(d);
  }

  double coordinate_scale(const ChartPoint4& p) const override {
    // Dirac strings cover most of the axis, so the axis distance bounds the scale.
    const double dist = std::min({1.0, nearest_charge_distance(p.base, rescaled_ ? 1.0 : params_.eps),
                                  std::sqrt(p.base.radial2())});
    // Components also vary on the length V/|grad V| where V becomes small.
    try {
      const PotentialValue v = rescaled_ ? eval_V1(params_, p.base) : eval_V(params_, p.base);
      const double g = v.grad.norm();
      return g > 0.0 ? std::min(dist, v.value / g) : dist;
    } catch (const Error&) {
      return dist;
    }
  }

  std::shared_ptr<const Model> localized(const ChartPoint4& centre) const override {
    const PotentialParams lattice = rescaled_ ? unit_lattice_params(params_) : params_;
    Truncation t = choose_truncation(lattice, centre.base);
    t.index *= 2;
    const long a_index = 2 * choose_connection_index(lattice, centre.base);
    return std::make_shared<LatticeGH>(params_, gauge_, rescaled_, t, a_index);
  }

  MetricKind kind() const override {
    return rescaled_ ? MetricKind::GibbonsHawkingRescaled : MetricKind::GibbonsHawking;
  }

 private:
  PotentialParams params_;
  Gauge gauge_;
  bool rescaled_;
  std::optional<Truncation> vpin_;
  std::optional<long> apin_;
};

class TaubNUTModel final : public MetricField::Model {
 public:
  TaubNUTModel(double c, Gauge gauge) : c_(c), gauge_(gauge) {
    if (!(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "Taub-NUT constant must be positive");
  }
  Matrix4 eval(const ChartPoint4& p) const override {
    const double rho = p.base.vec().norm();
    if (!(rho > 0.0)) throw Error(ErrorCode::PointTooCloseToCharge, "Taub-NUT evaluated at the nut");
    GHData d;
    d.V = 1.0 + c_ / rho;
    d.A = monopole_connection(c_, p.base, gauge_).A;
    return gibbons_hawking_components(d);
  }
  double coordinate_scale(const ChartPoint4& p) const override {
    const bool string_side = string_sign(gauge_) * p.base.u < 0.0;
    const double r = std::sqrt(p.base.radial2());
    return std::min({1.0, p.base.vec().norm(), string_side ? r : 1.0});
  }
  MetricKind kind() const override { return MetricKind::TaubNUT; }

 private:
  double c_;
  Gauge gauge_;
};

class CustomGH final : public MetricField::Model {
 public:
  CustomGH(std::function<GHData(const ChartPoint3&)> source, double scale)
      : source_(std::move(source)), scale_(scale) {}
  Matrix4 eval(const ChartPoint4& p) const override { return gibbons_hawking_components(source_(p.base)); }
  double coordinate_scale(const ChartPoint4&) const override { return scale_; }
  MetricKind kind() const override { return MetricKind::Custom; }

 private:
  std::function<GHData(const ChartPoint3&)> source_;
  double scale_;
};

class ConstantModel final : public MetricField::Model {
 public:
  ConstantModel(Matrix4 g, MetricKind kind) : g_(std::move(g)), kind_(kind) {}
  Matrix4 eval(const ChartPoint4&) const override { return g_; }
  MetricKind kind() const override { return kind_; }

 private:
  Matrix4 g_;
  MetricKind kind_;
};

class RescaledModel final : public MetricField::Model {
 public:
  RescaledModel(MetricField inner, double lambda, CoordinateMap map)
      : inner_(std::move(inner)), lambda_(lambda), map_(std::move(map)) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "rescale factor must be positive");
  }
  Matrix4 eval(const ChartPoint4& p) const override {
    const Matrix4 g = inner_(inner_point(p));
    return lambda_ * (map_.jacobian.asDiagonal() * g * map_.jacobian.asDiagonal());
  }
  double coordinate_scale(const ChartPoint4& p) const override {
    const double j = map_.jacobian.head<3>().cwiseAbs().maxCoeff();
    return inner_.coordinate_scale(inner_point(p)) / j;
  }
  std::shared_ptr<const Model> localized(const ChartPoint4& centre) const override {
    return std::make_shared<RescaledModel>(inner_.localized(inner_point(centre)), lambda_, map_);
  }
  MetricKind kind() const override { return MetricKind::Rescaled; }

 private:
  ChartPoint4 inner_point(const ChartPoint4& p) const {
    return ChartPoint4::from(map_.jacobian.cwiseProduct(p.vec()) + map_.offset);
  }
  MetricField inner_;
  double lambda_;
  CoordinateMap map_;
};

class PerturbedModel final : public MetricField::Model {
 public:
  PerturbedModel(MetricField base, std::function<Matrix4(const ChartPoint4&)> pert, double amplitude)
      : base_(std::move(base)), pert_(std::move(pert)), amplitude_(amplitude) {}
  Matrix4 eval(const ChartPoint4& p) const override { return base_(p) + amplitude_ * pert_(p); }
  double coordinate_scale(const ChartPoint4& p) const override { return base_.coordinate_scale(p); }
  std::shared_ptr<const Model> localized(const ChartPoint4& centre) const override {
    return std::make_shared<PerturbedModel>(base_.localized(centre), pert_, amplitude_);
  }
  MetricKind kind() const override { return MetricKind::Custom; }

 private:
  MetricField base_;
  std::function<Matrix4(const ChartPoint4&)> pert_;
  double amplitude_;
};

}  // namespace

MetricField gh_metric(const PotentialParams& params, Gauge gauge) {
  return MetricField(std::make_shared<LatticeGH>(params, gauge, false));
}

MetricField gh_metric_rescaled(const PotentialParams& params, Gauge gauge) {
  return MetricField(std::make_shared<LatticeGH>(params, gauge, true));
}

MetricField taub_nut(double c, Gauge gauge) { return MetricField(std::make_shared<TaubNUTModel>(c, gauge)); }

MetricField gh_custom(std::function<GHData(const ChartPoint3&)> source, double scale) {
  return MetricField(std::make_shared<CustomGH>(std::move(source), scale));
}

MetricField flat_r3_product() {
  return MetricField(std::make_shared<ConstantModel>(Matrix4::Identity(), MetricKind::FlatR3Product));
}

MetricField flat_s1r2(double gamma0sq) {
  if (!(gamma0sq > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma0^2 must be positive");
  Matrix4 g = Matrix4::Identity();
  g.topLeftCorner<3, 3>() *= gamma0sq;
  return MetricField(std::make_shared<ConstantModel>(g, MetricKind::FlatS1R2));
}

MetricField rescale(const MetricField& g, double lambda, std::optional<CoordinateMap> map) {
  return MetricField(std::make_shared<RescaledModel>(g, lambda, map.value_or(CoordinateMap{})));
}

MetricField perturbed(const MetricField& g, std::function<Matrix4(const ChartPoint4&)> perturbation,
                      double amplitude) {
  return MetricField(std::make_shared<PerturbedModel>(g, std::move(perturbation), amplitude));
}

double fiber_length(const MetricField& g, const ChartPoint3& base) {
  return boost::math::quadrature::gauss<double, 10>::integrate(
      [&](double t) { return std::sqrt(g({base, t})(3, 3)); }, 0.0, 1.0);
}

std::complex<double> eval_tau(std::complex<double> y, const HarmonicPolynomial& h, int winding) {
  if (y == 0.0) throw Error(ErrorCode::OriginSingular, "tau is singular at y = 0");
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> log_y = std::log(y) + 2.0 * kPi * i * double(winding);
  return log_y / (2.0 * kPi * i) + i * h.value(y);
}

}  // namespace ovm
