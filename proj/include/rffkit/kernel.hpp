#pragma once
// Gaussian shift-invariant kernel k(x,z) = exp(-||x-z||^2 / 2 sigma^2),
// its spectral (Fourier) density, the Gram matrix, and the frequency map
// z(eta)_j = exp(-2 pi i x_j^T eta).

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>

namespace rffkit {

using Eigen::MatrixXd;
using Eigen::MatrixXcd;
using Eigen::VectorXd;
using Eigen::VectorXcd;

inline constexpr double kTwoPi = 6.283185307179586476925287;

struct KernelModel {
  double sigma;
  double lambda;
  int n;
  int d;
  double n_lambda; // n / lambda

  KernelModel(double sigma_, double lambda_, int n_, int d_)
      : sigma(sigma_), lambda(lambda_), n(n_), d(d_),
        n_lambda(static_cast<double>(n_) / lambda_) {
    if (!(sigma > 0.0) || !(lambda > 0.0) || n < 1 || d < 1)
      throw std::invalid_argument("KernelModel: need sigma>0, lambda>0, n>=1, d>=1");
  }
};

struct Dataset {
  MatrixXd X;                     // n x d
  std::optional<VectorXd> y;      // responses
  std::optional<VectorXd> f_star; // noiseless targets

  void validate() const {
    if (y && y->size() != X.rows())
      throw std::invalid_argument("Dataset: y length mismatch");
    if (f_star && f_star->size() != X.rows())
      throw std::invalid_argument("Dataset: f_star length mismatch");
  }
};

inline double kernel_eval(const Eigen::Ref<const VectorXd>& x,
                          const Eigen::Ref<const VectorXd>& z, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("kernel_eval: sigma must be positive");
  if (!x.allFinite() || !z.allFinite())
    throw std::invalid_argument("kernel_eval: non-finite input");
  if (x.size() != z.size())
    throw std::invalid_argument("kernel_eval: dimension mismatch");
  return std::exp(-(x - z).squaredNorm() / (2.0 * sigma * sigma));
}

inline MatrixXd kernel_matrix(const MatrixXd& X, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("kernel_matrix: sigma must be positive");
  if (X.rows() < 1) throw std::invalid_argument("kernel_matrix: empty dataset");
  const Eigen::Index n = X.rows();
  VectorXd sq = X.rowwise().squaredNorm();
  MatrixXd D2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
                2.0 * (X * X.transpose());
  MatrixXd K = (-D2.array().max(0.0) / (2.0 * sigma * sigma)).exp();
  // exact symmetry and unit diagonal despite floating-point cross terms
  K = 0.5 * (K + K.transpose()).eval();
  K.diagonal().setOnes();
  return K;
}

// density of the spectral measure: d-dim Gaussian, per-coordinate std 1/(2 pi sigma)
inline double fourier_density(const Eigen::Ref<const VectorXd>& eta, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("fourier_density: sigma must be positive");
  const double d = static_cast<double>(eta.size());
  return std::pow(kTwoPi * sigma * sigma, 0.5 * d) *
         std::exp(-0.5 * kTwoPi * kTwoPi * sigma * sigma * eta.squaredNorm());
}

inline VectorXcd z_vector(const MatrixXd& X, const Eigen::Ref<const VectorXd>& eta) {
  if (eta.size() != X.cols()) throw std::invalid_argument("z_vector: dimension mismatch");
  VectorXd phase = -kTwoPi * (X * eta);
  VectorXcd z(X.rows());
  for (Eigen::Index j = 0; j < X.rows(); ++j)
    z(j) = std::complex<double>(std::cos(phase(j)), std::sin(phase(j)));
  return z;
}

} // namespace rffkit
