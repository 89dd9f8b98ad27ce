#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace ovm {

// Holomorphic polynomial h(y) = sum_k c_k y^k on the base chart, y = y1 + i y2.
// Its real part f and imaginary part g are harmonic conjugates.
class HarmonicPolynomial {
 public:
  HarmonicPolynomial() = default;
  explicit HarmonicPolynomial(std::vector<std::complex<double>> coeffs) : coeffs_(std::move(coeffs)) {}

  const std::vector<std::complex<double>>& coeffs() const { return coeffs_; }
  bool is_zero() const {
    for (const auto& c : coeffs_)
      if (c != 0.0) return false;
    return true;
  }

  std::complex<double> value(std::complex<double> y) const {
    std::complex<double> acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * y + *it;
    return acc;
  }
  std::complex<double> derivative(std::complex<double> y) const {
    std::complex<double> acc = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > 1;) acc = acc * y + double(k) * coeffs_[k];
    return acc;
  }
  std::complex<double> second_derivative(std::complex<double> y) const {
    std::complex<double> acc = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > 2;) acc = acc * y + double(k * (k - 1)) * coeffs_[k];
    return acc;
  }

  // Coefficients of y -> h(scale * y).
  HarmonicPolynomial scaled(double scale) const {
    auto c = coeffs_;
    double p = 1.0;
    for (auto& ck : c) {
      ck *= p;
      p *= scale;
    }
    return HarmonicPolynomial(std::move(c));
  }

  /// Re h with its (y1, y2) gradient and Hessian.
  struct RealPart {
    double value;
    Eigen::Vector2d grad;
    Eigen::Matrix2d hess;
  };

  RealPart real_part(double y1, double y2) const {
    const std::complex<double> y(y1, y2);
    const auto d1 = derivative(y);
    const auto d2 = second_derivative(y);
    RealPart out;
    out.value = value(y).real();
    // Cauchy-Riemann: d/dy1 = h', d/dy2 = i h'.
    out.grad << d1.real(), -d1.imag();
    out.hess << d2.real(), -d2.imag(), -d2.imag(), -d2.real();
    return out;
  }

  double imag_part(double y1, double y2) const { return value({y1, y2}).imag(); }

 private:
  std::vector<std::complex<double>> coeffs_;
};

}  // namespace ovm
