#pragma once
// Adversarial construction that witnesses spectral-approximation failure of
// classical features: a uniform grid in [-R, R]^d, the blurred cosine
// f_{Delta,b,v}(a) = 2 cos(2 pi Delta^T a) * (Gaussian_b * rect_v)(a),
// the coefficient vector alpha of its grid samples, and a checker for the
// violation alpha^T (K + lambda I) alpha < (2/3) alpha^T (G + lambda I) alpha.

#include "kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace rffkit {

struct GridSpec {
  int m = 3;      // points per dimension, odd
  int d = 1;
  double R = 1.0; // grid spans (-R, R)
  long n() const {
    long acc = 1;
    for (int k = 0; k < d; ++k) acc *= m;
    return acc;
  }
};

inline MatrixXd grid_dataset(const GridSpec& spec) {
  if (spec.m < 3 || spec.m % 2 == 0)
    throw std::invalid_argument("grid_dataset: m must be odd and >= 3");
  if (spec.d < 1 || !(spec.R > 0.0))
    throw std::invalid_argument("grid_dataset: bad d or R");
  VectorXd coords(spec.m);
  for (int j = 1; j <= spec.m; ++j)
    coords(j - 1) = (j - 0.5 * (spec.m + 1)) * 2.0 * spec.R / spec.m;
  const long n = spec.n();
  MatrixXd X(n, spec.d);
  for (long i = 0; i < n; ++i) {
    long rem = i;
    for (int k = 0; k < spec.d; ++k) {
      X(i, k) = coords(rem % spec.m);
      rem /= spec.m;
    }
  }
  return X;
}

inline double blurred_cos(const Eigen::Ref<const VectorXd>& a,
                          const Eigen::Ref<const VectorXd>& Delta, double b,
                          double v) {
  if (!(b > 0.0) || !(v > 0.0))
    throw std::invalid_argument("blurred_cos: b and v must be positive");
  if (a.size() != Delta.size())
    throw std::invalid_argument("blurred_cos: dimension mismatch");
  double val = 2.0 * std::cos(kTwoPi * Delta.dot(a));
  const double inv = 1.0 / (std::sqrt(2.0) * b);
  for (Eigen::Index k = 0; k < a.size(); ++k)
    val *= 0.5 * (std::erf((a(k) + 0.5 * v) * inv) - std::erf((a(k) - 0.5 * v) * inv));
  return val;
}

struct AdversarialAlpha {
  VectorXd alpha;
  VectorXd eta_star;
  double b = 0.0;
  double v = 0.0;
};

// alpha_j = f_{eta*, b, R}(x_j) with b = R / (8 sqrt(log n_lambda)), v = R
inline AdversarialAlpha adversarial_alpha(const GridSpec& spec,
                                          const Eigen::Ref<const VectorXd>& eta_star,
                                          const KernelModel& model) {
  if (!(model.n_lambda > 1.0))
    throw std::domain_error("adversarial_alpha: requires n_lambda > 1");
  if (eta_star.size() != spec.d)
    throw std::invalid_argument("adversarial_alpha: eta_star dimension mismatch");
  AdversarialAlpha out;
  out.eta_star = eta_star;
  out.v = spec.R;
  out.b = spec.R / (8.0 * std::sqrt(std::log(model.n_lambda)));
  MatrixXd X = grid_dataset(spec);
  out.alpha.resize(X.rows());
  for (Eigen::Index j = 0; j < X.rows(); ++j)
    out.alpha(j) = blurred_cos(X.row(j).transpose(), eta_star, out.b, out.v);
  if (out.alpha.squaredNorm() > 4.0 * static_cast<double>(X.rows()) + 1e-9)
    throw std::runtime_error("adversarial_alpha: ||alpha||^2 exceeds 4n");
  return out;
}

struct ViolationReport {
  double exact_form = 0.0;     // alpha^T (K + lambda I) alpha
  double surrogate_form = 0.0; // alpha^* (G + lambda I) alpha
  double ratio = 0.0;          // exact / surrogate
  bool violated = false;       // exact < (2/3) surrogate
};

inline ViolationReport verify_violation(const MatrixXd& K, const MatrixXcd& G,
                                        double lambda, const VectorXcd& alpha) {
  ViolationReport rep;
  if (alpha.size() == 0 || alpha.norm() == 0.0) return rep;
  VectorXcd Ka = K.cast<std::complex<double>>() * alpha +
                 lambda * alpha;
  std::complex<double> lhs = alpha.dot(Ka);
  std::complex<double> rhs =
      alpha.dot((G * alpha).eval()) + lambda * alpha.squaredNorm();
  if (std::abs(lhs.imag()) > 1e-10 * std::abs(lhs.real()) ||
      std::abs(rhs.imag()) > 1e-10 * std::abs(rhs.real()))
    throw std::runtime_error("verify_violation: non-real quadratic form");
  rep.exact_form = lhs.real();
  rep.surrogate_form = rhs.real();
  rep.ratio = rep.exact_form / rep.surrogate_form;
  rep.violated = rep.exact_form < (2.0 / 3.0) * rep.surrogate_form;
  return rep;
}

inline VectorXd eta_star_select(const MatrixXd& frequencies) {
  if (frequencies.rows() < 1)
    throw std::invalid_argument("eta_star_select: empty frequency set");
  Eigen::Index best = 0;
  double best_norm = frequencies.row(0).norm();
  for (Eigen::Index l = 1; l < frequencies.rows(); ++l) {
    double nrm = frequencies.row(l).norm();
    if (nrm > best_norm) { // strict: ties keep the lowest index
      best = l;
      best_norm = nrm;
    }
  }
  return frequencies.row(best).transpose();
}

// parameter regime where the small-s violation guarantee is asserted to hold
// with constant probability; desk-scale runs are expected to fall outside it
inline bool in_stated_regime(const GridSpec& spec, const KernelModel& model) {
  if (model.n_lambda <= 1.0) return false;
  const double n = static_cast<double>(spec.n());
  const double lnl = std::log(model.n_lambda);
  if (n < 17.0) return false;
  if (!(2000.0 * lnl <= spec.R)) return false;
  if (!(spec.R <= spec.m / (500.0 * std::sqrt(lnl)))) return false;
  if (!(spec.m >= 64.0 * std::log(n) * std::sqrt(lnl))) return false;
  if (std::log(std::log(n)) > 0.0 &&
      !(spec.d <= std::log(n) / (2.0 * std::log(std::log(n)))))
    return false;
  return true;
}

} // namespace rffkit
