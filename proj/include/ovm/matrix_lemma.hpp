#pragma once

#include <cfloat>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ovm/errors.hpp"

namespace ovm {

struct HermitianGap {
  int n = 0;
  double trace_slack = 0.0;  // tr A - n
  double det_slack = 0.0;    // 1 - det A
  double dist_sq = 0.0;      // |A - I|^2, Hilbert-Schmidt
};

/// Relative tolerance applied to the admissibility constraints.
inline constexpr double kAdmissibleSlack = 64.0 * DBL_EPSILON;

/// Gap scalars of a positive-definite Hermitian A. Throws NotAdmissible
/// unless A is Hermitian positive definite with tr A <= n + eps and
/// det A >= 1 - eps.
template <typename Derived>
HermitianGap matrix_lemma_gap(const Eigen::MatrixBase<Derived>& A, double eps) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "eps must lie in (0,1)");
  if (A.rows() != A.cols() || A.rows() == 0) throw Error(ErrorCode::NotAdmissible, "matrix must be square");
  const Mat M = A;
  const int n = int(M.rows());
  const Real scale = std::max<Real>(Real(1), M.cwiseAbs().maxCoeff());
  if ((M - M.adjoint()).cwiseAbs().maxCoeff() > Real(kAdmissibleSlack) * scale)
    throw Error(ErrorCode::NotAdmissible, "matrix is not Hermitian");
  const Eigen::LLT<Mat> llt(M);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotAdmissible, "matrix is not positive definite");

  HermitianGap gap;
  gap.n = n;
  // LU determinant: exact on diagonal input, unlike the squared Cholesky pivots.
  const double det = double(std::real(M.determinant()));
  gap.trace_slack = double(std::real(M.trace())) - n;
  gap.det_slack = 1.0 - det;
  gap.dist_sq = double((M - Mat::Identity(n, n)).squaredNorm());
  const double tol = kAdmissibleSlack * n;
  if (gap.trace_slack > eps + tol) throw Error(ErrorCode::NotAdmissible, "trace exceeds n + eps");
  if (gap.det_slack > eps + tol) throw Error(ErrorCode::NotAdmissible, "determinant below 1 - eps");
  return gap;
}

enum class SamplingMode {
  Full,            // Dirichlet eigenvalues plus boundary vertices, Haar-conjugated
  DiagonalFamily,  // diag(1 + d, 1 - d, 1, ...), d^2 <= eps
};

/// Haar-distributed unitary from the QR factorization of a complex Gaussian.
Eigen::MatrixXcd haar_unitary(int n, std::mt19937_64& rng);

/// One admissible sample. Full mode draws a constraint-boundary vertex with
/// probability `vertex_fraction`: n-1 equal eigenvalues with tr = n + eps and
/// det = 1 - eps.
Eigen::MatrixXcd sample_admissible(int n, double eps, std::mt19937_64& rng, SamplingMode mode = SamplingMode::Full,
                                   double vertex_fraction = 0.25);

struct CalibrationOptions {
  SamplingMode mode = SamplingMode::Full;
  double vertex_fraction = 0.25;
  int jobs = 1;
};

struct Calibration {
  double C_hat = 0.0;  // max dist_sq / eps
  double argmax_eps = 0.0;
  std::size_t draws = 0;
  HermitianGap worst;
};

/// Draws are split across eps values evenly and into fixed-size chunks with
/// independent seed-derived streams, so the result does not depend on jobs.
Calibration calibrate_constant(int n, const std::vector<double>& eps_list, std::size_t samples, std::uint64_t seed,
                               const CalibrationOptions& options = {});

struct Verification {
  std::size_t draws = 0;
  std::size_t violations = 0;  // dist_sq > C_hat eps (1 + kAdmissibleSlack)
  double max_ratio = 0.0;
};

Verification verify_constant(int n, const std::vector<double>& eps_list, std::size_t samples, std::uint64_t seed,
                             double C_hat, const CalibrationOptions& options = {});

}  // namespace ovm
