#include "ovm/matrix_lemma.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "ovm/parallel.hpp"

namespace ovm {

Eigen::MatrixXcd haar_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd Z(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) Z(i, j) = {normal(rng), normal(rng)};
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Z);
  Eigen::MatrixXcd Q = qr.householderQ();
  const Eigen::MatrixXcd R = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase ambiguity of QR so that Q is Haar distributed.
  for (int j = 0; j < n; ++j) {
    const double r = std::abs(R(j, j));
    if (r > 0.0) Q.col(j) *= R(j, j) / r;
  }
  return Q;
}

namespace {

// Root of f on [lo, hi] where f(lo), f(hi) have opposite signs.
template <class F>
double bisect(F&& f, double lo, double hi) {
  const bool rising = f(hi) > 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    ((f(mid) > 0.0) == rising ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Eigenvalues with n-1 copies of b: a + (n-1) b = n + eps, a b^{n-1} = 1 - eps.
Eigen::VectorXd vertex_eigenvalues(int n, double eps, bool small_branch) {
  Eigen::VectorXd lam(n);
  if (n == 1) {
    lam[0] = small_branch ? 1.0 - eps : 1.0 + eps;
    return lam;
  }
  const double m = n - 1;
  auto f = [&](double b) { return (n + eps - m * b) * std::pow(b, m) - (1.0 - eps); };
  const double b = small_branch ? bisect(f, 0.0, 1.0) : bisect(f, 1.0, (n + eps) / m);
  lam.setConstant(b);
  lam[0] = n + eps - m * b;
  return lam;
}

Eigen::VectorXd dirichlet_eigenvalues(int n, double eps, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double alpha = std::exp(std::log(0.1 / eps) + unit(rng) * std::log(1000.0));
    std::gamma_distribution<double> gamma(alpha, 1.0);
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w[i] = gamma(rng);
    const double t = 2.0 * unit(rng) - 1.0;
    const Eigen::VectorXd lam = (n + t * eps) * w / w.sum();
    if (lam.prod() >= 1.0 - eps) return lam;
  }
  return vertex_eigenvalues(n, eps, unit(rng) < 0.5);
}

Eigen::MatrixXcd conjugate(const Eigen::VectorXd& lam, std::mt19937_64& rng) {
  const int n = int(lam.size());
  const Eigen::MatrixXcd U = haar_unitary(n, rng);
  Eigen::MatrixXcd A = U * lam.cast<std::complex<double>>().asDiagonal() * U.adjoint();
  return 0.5 * (A + A.adjoint());
}

constexpr std::size_t kChunk = 4096;

template <class Visit>
void for_each_draw(int n, const std::vector<double>& eps_list, std::size_t samples, std::uint64_t seed,
                   const CalibrationOptions& o, Visit&& visit_chunk) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (eps_list.empty()) throw Error(ErrorCode::InvalidArgument, "empty eps list");
  for (double e : eps_list)
    if (!(e > 0.0 && e < 0.5)) throw Error(ErrorCode::InvalidArgument, "calibration eps must lie in (0, 0.5)");
  const std::size_t per_eps = (samples + eps_list.size() - 1) / eps_list.size();
  const std::size_t chunks = (per_eps + kChunk - 1) / kChunk;
  parallel_for(eps_list.size() * chunks, o.jobs, [&](std::size_t job) {
    const std::size_t e = job / chunks, c = job % chunks;
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(e), std::uint32_t(c)};
    std::mt19937_64 rng(seq);
    const std::size_t count = std::min(kChunk, per_eps - c * kChunk);
    visit_chunk(job, eps_list[e], count, rng);
  });
}

}  // namespace

Eigen::MatrixXcd sample_admissible(int n, double eps, std::mt19937_64& rng, SamplingMode mode,
                                   double vertex_fraction) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (mode == SamplingMode::DiagonalFamily) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "diagonal family needs n >= 2");
    // Upper endpoint included so the extremal member is drawn.
    const double d = std::sqrt(eps) * (unit(rng) < 0.01 ? 1.0 : unit(rng));
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(n, n);
    A(0, 0) = 1.0 + d;
    A(1, 1) = 1.0 - d;
    return A;
  }
  const Eigen::VectorXd lam = unit(rng) < vertex_fraction ? vertex_eigenvalues(n, eps, unit(rng) < 0.5)
                                                          : dirichlet_eigenvalues(n, eps, rng);
  return conjugate(lam, rng);
}

Calibration calibrate_constant(int n, const std::vector<double>& eps_list, std::size_t samples, std::uint64_t seed,
                               const CalibrationOptions& o) {
  struct Best {
    double ratio = -1.0;
    double eps = 0.0;
    HermitianGap gap;
    std::size_t draws = 0;
  };
  const std::size_t per_eps = (samples + eps_list.size() - 1) / std::max<std::size_t>(eps_list.size(), 1);
  std::vector<Best> best(eps_list.size() * ((per_eps + kChunk - 1) / kChunk));
  for_each_draw(n, eps_list, samples, seed, o, [&](std::size_t job, double eps, std::size_t count, std::mt19937_64& rng) {
    Best& b = best[job];
    for (std::size_t i = 0; i < count; ++i) {
      const HermitianGap g = matrix_lemma_gap(sample_admissible(n, eps, rng, o.mode, o.vertex_fraction), eps);
      const double r = g.dist_sq / eps;
      if (r > b.ratio) b = {r, eps, g, b.draws};
      ++b.draws;
    }
  });
  Calibration out;
  out.C_hat = -1.0;
  for (const Best& b : best) {
    out.draws += b.draws;
    if (b.ratio > out.C_hat) {
      out.C_hat = b.ratio;
      out.argmax_eps = b.eps;
      out.worst = b.gap;
    }
  }
  return out;
}

Verification verify_constant(int n, const std::vector<double>& eps_list, std::size_t samples, std::uint64_t seed,
                             double C_hat, const CalibrationOptions& o) {
  const std::size_t per_eps = (samples + eps_list.size() - 1) / std::max<std::size_t>(eps_list.size(), 1);
  std::vector<Verification> parts(eps_list.size() * ((per_eps + kChunk - 1) / kChunk));
  for_each_draw(n, eps_list, samples, seed, o, [&](std::size_t job, double eps, std::size_t count, std::mt19937_64& rng) {
    Verification& v = parts[job];
    for (std::size_t i = 0; i < count; ++i) {
      const HermitianGap g = matrix_lemma_gap(sample_admissible(n, eps, rng, o.mode, o.vertex_fraction), eps);
      v.max_ratio = std::max(v.max_ratio, g.dist_sq / eps);
      if (g.dist_sq > C_hat * eps * (1.0 + kAdmissibleSlack)) ++v.violations;
      ++v.draws;
    }
  });
  Verification out;
  for (const auto& v : parts) {
    out.draws += v.draws;
    out.violations += v.violations;
    out.max_ratio = std::max(out.max_ratio, v.max_ratio);
  }
  return out;
}

}  // namespace ovm
