#pragma once
// Ridge leverage function tau_lambda(eta) = p(eta) z(eta)^* (K+lambda I)^{-1} z(eta),
// statistical dimension, the capped envelope tau_bar_R with its closed-form mass,
// and primal/dual certificates for tau_lambda.
//
// The envelope and certificate formulas are stated for the canonical bandwidth
// sigma = 1/(2 pi), where p is the standard normal density. General sigma is
// handled by rescaling to that frame: x_tilde = x/(2 pi sigma),
// eta_tilde = 2 pi sigma * eta, and tau^sigma(eta) = (2 pi sigma)^d *
// tau^canonical(eta_tilde). All radii R stored in Envelope are canonical.

#include "kernel.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

namespace rffkit {

// ---------------------------------------------------------------- exact tau

class LeverageSolver {
public:
  LeverageSolver(const MatrixXd& X, const KernelModel& model)
      : X_(X), model_(model) {
    MatrixXd M = kernel_matrix(X, model.sigma);
    M.diagonal().array() += model.lambda;
    llt_.compute(M);
    if (llt_.info() != Eigen::Success)
      throw std::runtime_error("LeverageSolver: Cholesky factorization of K+lambda*I failed");
  }

  // quadratic form z(eta)^* (K+lambda I)^{-1} z(eta); exactly real by the
  // real/imaginary split (the matrix is real symmetric)
  double whitened_norm2(const Eigen::Ref<const VectorXd>& eta) const {
    VectorXcd z = z_vector(X_, eta);
    VectorXd re = z.real(), im = z.imag();
    return re.dot(llt_.solve(re)) + im.dot(llt_.solve(im));
  }

  double tau(const Eigen::Ref<const VectorXd>& eta) const {
    return fourier_density(eta, model_.sigma) * whitened_norm2(eta);
  }

  const KernelModel& model() const { return model_; }
  const MatrixXd& X() const { return X_; }

private:
  MatrixXd X_;
  KernelModel model_;
  Eigen::LLT<MatrixXd> llt_;
};

inline double leverage_exact(const MatrixXd& X, const KernelModel& model,
                             const Eigen::Ref<const VectorXd>& eta) {
  return LeverageSolver(X, model).tau(eta);
}

inline double statistical_dimension(const MatrixXd& K, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("statistical_dimension: lambda must be positive");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(K, Eigen::EigenvaluesOnly);
  return (es.eigenvalues().array() / (es.eigenvalues().array() + lambda)).sum();
}

// ------------------------------------------------------------- tau integral

struct QuadratureSpec {
  double half_width;    // integrate over [-T, T]^d
  int nodes_per_dim;    // trapezoid nodes per dimension (forced odd)
};

inline QuadratureSpec default_quadrature(const KernelModel& model) {
  // p has per-coordinate std 1/(2 pi sigma); 12 stds reach the 1e-15 tail
  double T = 12.0 / (kTwoPi * model.sigma);
  return {T, model.d == 1 ? 4001 : 401};
}

struct IntegralResult {
  double value;
  double error_estimate;
};

namespace detail {
inline double trapezoid_grid_tau(const LeverageSolver& solver, double T,
                                 int nodes, int stride) {
  const int d = solver.model().d;
  const int m = (nodes - 1) / stride + 1;
  const double h = 2.0 * T / (nodes - 1) * stride;
  auto weight = [m](int i) { return (i == 0 || i == m - 1) ? 0.5 : 1.0; };
  double sum = 0.0;
  if (d == 1) {
    VectorXd eta(1);
    for (int i = 0; i < m; ++i) {
      eta(0) = -T + i * h;
      sum += weight(i) * solver.tau(eta);
    }
    return sum * h;
  }
  VectorXd eta(2);
  for (int i = 0; i < m; ++i) {
    eta(0) = -T + i * h;
    for (int j = 0; j < m; ++j) {
      eta(1) = -T + j * h;
      sum += weight(i) * weight(j) * solver.tau(eta);
    }
  }
  return sum * h * h;
}
} // namespace detail

inline IntegralResult leverage_integral(const MatrixXd& X, const KernelModel& model,
                                        QuadratureSpec spec) {
  if (model.d > 2)
    throw std::invalid_argument("leverage_integral: only d in {1,2} supported");
  int nodes = spec.nodes_per_dim;
  if (nodes % 2 == 0) ++nodes;
  if (nodes < 5) nodes = 5;
  LeverageSolver solver(X, model);
  double fine = detail::trapezoid_grid_tau(solver, spec.half_width, nodes, 1);
  double coarse = detail::trapezoid_grid_tau(solver, spec.half_width, nodes, 2);
  return {fine, std::abs(fine - coarse)};
}

// ----------------------------------------------------------------- envelope

struct Envelope {
  double R = 0.0;         // canonical ell_inf data radius
  double threshold = 0.0; // 10 sqrt(log n_lambda); 0 in the degenerate regime
  double cap = 0.0;       // box value (12.4 max(R, 2000 log^1.5 n_lambda))^d + 1
  double mass = 0.0;      // integral of tau_bar_R
  double A = 0.0;         // integral of g_1
  double B = 0.0;         // two-sided tail mass of g_1 beyond threshold
  double n_lambda = 0.0;
  int d = 1;
  double cap_scale = 1.0;      // exploration knob, 1.0 = printed constants
  bool degenerate = false;     // n_lambda <= 1: scaled-classical fallback
  bool regime_warning = false; // d > 5 log(n_lambda) + 1
};

// g_1(t) = standard normal density times max(1, |t|)
inline double g1_density(double t) {
  return 0.39894228040143267794 * std::exp(-0.5 * t * t) * std::max(1.0, std::abs(t));
}

inline double envelope_A_constant() {
  return std::erf(1.0 / std::sqrt(2.0)) + std::sqrt(2.0 / (std::exp(1.0) * M_PI));
}

inline Envelope envelope_mass(double R_canonical, double n_lambda, int d,
                              double cap_scale = 1.0) {
  if (!(R_canonical > 0.0) || d < 1 || !(n_lambda > 0.0))
    throw std::invalid_argument("envelope_mass: bad parameters");
  Envelope env;
  env.R = R_canonical;
  env.n_lambda = n_lambda;
  env.d = d;
  env.cap_scale = cap_scale;
  if (n_lambda <= 1.0) {
    env.degenerate = true;
    env.mass = n_lambda; // tau_bar = n_lambda * p everywhere
    return env;
  }
  const double ln = std::log(n_lambda);
  env.regime_warning = static_cast<double>(d) > 5.0 * ln + 1.0;
  env.threshold = 10.0 * std::sqrt(ln);
  env.cap = cap_scale *
            (std::pow(12.4 * std::max(R_canonical, 2000.0 * std::pow(ln, 1.5)),
                      static_cast<double>(d)) +
             1.0);
  env.A = envelope_A_constant();
  env.B = std::sqrt(2.0 / M_PI) * std::pow(n_lambda, -50.0);
  double tail = 0.0;
  for (int j = 0; j < d; ++j)
    tail += std::pow(env.A - env.B, j) * std::pow(env.A, d - 1 - j) * env.B;
  env.mass = env.cap * std::pow(2.0 * env.threshold, static_cast<double>(d)) +
             n_lambda * tail;
  return env;
}

// canonical-frame envelope value
inline double improved_envelope_canonical(const Eigen::Ref<const VectorXd>& eta,
                                          const Envelope& env) {
  double p = 1.0, prodmax = 1.0;
  for (Eigen::Index k = 0; k < eta.size(); ++k) {
    p *= 0.39894228040143267794 * std::exp(-0.5 * eta(k) * eta(k));
    prodmax *= std::max(1.0, std::abs(eta(k)));
  }
  if (env.degenerate) return env.n_lambda * p;
  if (eta.cwiseAbs().maxCoeff() <= env.threshold) return env.cap;
  return env.n_lambda * p * prodmax;
}

// general-sigma wrapper: rescale into the canonical frame
inline double improved_envelope(const Eigen::Ref<const VectorXd>& eta,
                                const Envelope& env, const KernelModel& model) {
  const double sc = kTwoPi * model.sigma;
  VectorXd eta_c = sc * eta;
  return std::pow(sc, static_cast<double>(model.d)) *
         improved_envelope_canonical(eta_c, env);
}

// build an Envelope from a dataset: canonical radius is max ell_inf norm of
// the rescaled points
inline Envelope envelope_for_dataset(const MatrixXd& X, const KernelModel& model,
                                     double cap_scale = 1.0) {
  double R = X.cwiseAbs().maxCoeff() / (kTwoPi * model.sigma);
  return envelope_mass(R, model.n_lambda, model.d, cap_scale);
}

// statistical dimension bound implied by integrating the envelope
inline double sd_upper_bound(double R_canonical, double n_lambda, int d) {
  if (!(n_lambda > 1.0)) throw std::invalid_argument("sd_upper_bound: need n_lambda > 1");
  const double ln = std::log(n_lambda);
  double cap = std::pow(12.4 * std::max(R_canonical, 2000.0 * std::pow(ln, 1.5)),
                        static_cast<double>(d)) +
               1.0;
  return std::pow(20.0 * std::sqrt(ln), static_cast<double>(d)) * cap /
             std::tgamma(0.5 * d + 1.0) +
         1.0;
}

// ------------------------------------------------------------- certificates

// dual certificate: p(eta)|z(eta)^* alpha|^2 / (alpha^*(K+lambda I)alpha),
// a lower bound on tau_lambda(eta) for any nonzero alpha
inline double lower_certificate(const MatrixXd& X, const KernelModel& model,
                                const Eigen::Ref<const VectorXd>& eta,
                                const VectorXcd& alpha) {
  if (alpha.size() != X.rows())
    throw std::invalid_argument("lower_certificate: alpha length mismatch");
  if (alpha.norm() == 0.0)
    throw std::invalid_argument("lower_certificate: alpha must be nonzero");
  MatrixXd M = kernel_matrix(X, model.sigma);
  M.diagonal().array() += model.lambda;
  std::complex<double> num = z_vector(X, eta).adjoint() * alpha;
  std::complex<double> den_c = alpha.adjoint() * (M * alpha);
  double den = den_c.real();
  if (std::abs(den_c.imag()) > 1e-10 * std::abs(den))
    throw std::runtime_error("lower_certificate: non-real quadratic form");
  return fourier_density(eta, model.sigma) * std::norm(num) / den;
}

namespace detail {

// adaptive trapezoid with an initial uniform split (the integrand oscillates
// at the sinc frequency, so each initial panel sees at most a fraction of a
// period before refinement)
template <class F>
double adaptive_trap_rec(const F& f, double a, double b, double fa, double fb,
                         double tol, int depth) {
  double m = 0.5 * (a + b), fm = f(m);
  double i1 = 0.5 * (b - a) * (fa + fb);
  double i2 = 0.25 * (b - a) * (fa + 2.0 * fm + fb);
  if (std::abs(i2 - i1) <= tol || depth >= 40) return i2 + (i2 - i1) / 3.0;
  return adaptive_trap_rec(f, a, m, fa, fm, 0.5 * tol, depth + 1) +
         adaptive_trap_rec(f, m, b, fm, fb, 0.5 * tol, depth + 1);
}

template <class F>
double adaptive_trapezoid(const F& f, double a, double b, int init_panels,
                          double tol) {
  double h = (b - a) / init_panels, total = 0.0;
  double x0 = a, f0 = f(a);
  for (int i = 0; i < init_panels; ++i) {
    double x1 = (i == init_panels - 1) ? b : a + (i + 1) * h;
    double f1 = f(x1);
    total += adaptive_trap_rec(f, x0, x1, f0, f1, tol / init_panels, 0);
    x0 = x1;
    f0 = f1;
  }
  return total;
}

// normalized sinc
inline double sinc(double x) {
  double px = M_PI * x;
  if (std::abs(px) < 1e-8) return 1.0 - px * px / 6.0;
  return std::sin(px) / px;
}

} // namespace detail

// Primal certificate: the quadratic objective of the leverage minimization
// evaluated at the softened spike y_{eta,u}, an upper bound on tau_lambda(eta).
// Canonical frame. The first term uses the closed-form transform
// Phi(y)_j = sqrt(p(eta)) z(eta)_j h(x_j) with h a Gaussian-blurred box; the
// second term integrates each coordinate of the weighted norm over
// |t - eta_l| <= 20 sqrt(log n_lambda)/u and adds an analytic tail bound.
inline double upper_certificate_canonical(const MatrixXd& Xc, double lambda,
                                          double n_lambda,
                                          const Eigen::Ref<const VectorXd>& eta,
                                          double u, double quad_tol = 1e-8) {
  if (!(u > 0.0)) throw std::invalid_argument("upper_certificate: u must be positive");
  if (!(n_lambda > 1.0))
    throw std::invalid_argument("upper_certificate: requires n_lambda > 1");
  const int d = static_cast<int>(Xc.cols());
  if (d > 2) throw std::invalid_argument("upper_certificate: only d in {1,2} supported");
  const double ln = std::log(n_lambda);
  const double R = Xc.cwiseAbs().maxCoeff();
  const double v = 2.0 * (R + u * std::sqrt(2.0 * ln));
  const double W = 20.0 * std::sqrt(ln) / u;

  double p_eta = 1.0;
  for (int k = 0; k < d; ++k)
    p_eta *= 0.39894228040143267794 * std::exp(-0.5 * eta(k) * eta(k));

  // term 1: lambda^{-1} ||Phi y - sqrt(p) z||^2 = (p/lambda) sum_j (h(x_j)-1)^2
  double term1 = 0.0;
  for (Eigen::Index j = 0; j < Xc.rows(); ++j) {
    double hm1_acc = 1.0; // running product of per-coordinate h
    for (int k = 0; k < d; ++k) {
      double b1 = kTwoPi * (Xc(j, k) + 0.5 * v) / u;
      double b2 = kTwoPi * (Xc(j, k) - 0.5 * v) / u;
      // h_k = 1 - (erfc(b1) + erfc(-b2))/2, computed via erfc for accuracy
      double hk = 1.0 - 0.5 * (std::erfc(b1) + std::erfc(-b2));
      hm1_acc *= hk;
    }
    term1 += (hm1_acc - 1.0) * (hm1_acc - 1.0);
  }
  term1 *= p_eta / lambda;

  // term 2: ||y||^2_{L2(dmu)} = v^{2d} prod_l I_l with the p(eta) factor
  // folded per coordinate to keep the integrand O(1)
  double term2 = std::pow(v, 2.0 * d);
  for (int k = 0; k < d; ++k) {
    const double el = eta(k);
    auto f = [&](double t) {
      double dlt = t - el;
      double s = detail::sinc(v * dlt);
      return std::exp(0.5 * (t * t - el * el) - 0.5 * dlt * dlt * u * u) * s * s;
    };
    int periods = static_cast<int>(std::ceil(2.0 * W * v));
    int init = std::clamp(4 * periods, 64, 1 << 20);
    double head = detail::adaptive_trapezoid(f, el - W, el + W, init, quad_tol);
    // tail: |t-eta_l| >= W. In the regime u >= 2000 log n_lambda,
    // ||eta||_inf <= 10 sqrt(log n_lambda) the split gives n_lambda^{-60}/v;
    // otherwise a direct Gaussian bound with t^2 <= 2 dlt^2 + 2 eta^2.
    double tail;
    if (u >= 2000.0 * ln && std::abs(el) <= 10.0 * std::sqrt(ln)) {
      tail = std::pow(n_lambda, -60.0) / v;
    } else {
      double a2 = 0.5 * u * u - 1.0;
      if (a2 <= 0.0)
        throw std::invalid_argument("upper_certificate: u too small for the tail bound");
      tail = std::exp(0.5 * el * el - a2 * W * W) / (a2 * W);
    }
    term2 *= head + tail;
  }
  return term1 + term2;
}

// general-sigma wrapper
inline double upper_certificate(const MatrixXd& X, const KernelModel& model,
                                const Eigen::Ref<const VectorXd>& eta, double u,
                                double quad_tol = 1e-8) {
  const double sc = kTwoPi * model.sigma;
  MatrixXd Xc = X / sc;
  VectorXd eta_c = sc * eta;
  return std::pow(sc, static_cast<double>(model.d)) *
         upper_certificate_canonical(Xc, model.lambda, model.n_lambda, eta_c, u,
                                     quad_tol);
}

// ------------------------------------------------------------------ profile

struct LeverageProfile {
  MatrixXd grid;               // m x d
  VectorXd tau_exact;          // m
  VectorXd classical_scaled;   // s_lambda(K) * p(eta): the classical proposal
                               // normalized to the same total mass as tau
  VectorXd envelope;           // tau_bar_R(eta)
  VectorXd lower_cert;         // optional (size 0 when absent)
  VectorXd upper_cert;         // optional
};

inline LeverageProfile build_leverage_profile(const MatrixXd& X,
                                              const KernelModel& model,
                                              const MatrixXd& grid,
                                              const Envelope& env) {
  LeverageProfile prof;
  prof.grid = grid;
  const Eigen::Index m = grid.rows();
  prof.tau_exact.resize(m);
  prof.classical_scaled.resize(m);
  prof.envelope.resize(m);
  LeverageSolver solver(X, model);
  const double sd =
      statistical_dimension(kernel_matrix(X, model.sigma), model.lambda);
  for (Eigen::Index i = 0; i < m; ++i) {
    VectorXd eta = grid.row(i).transpose();
    prof.tau_exact(i) = solver.tau(eta);
    prof.classical_scaled(i) = sd * fourier_density(eta, model.sigma);
    prof.envelope(i) = improved_envelope(eta, env, model);
  }
  return prof;
}

inline void export_leverage_profile(const LeverageProfile& prof,
                                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_leverage_profile: cannot open " + path);
  out.precision(17);
  const Eigen::Index d = prof.grid.cols();
  out << "#";
  for (Eigen::Index k = 0; k < d; ++k) out << " eta" << k;
  out << " tau_exact classical_scaled envelope";
  if (prof.lower_cert.size()) out << " lower_cert";
  if (prof.upper_cert.size()) out << " upper_cert";
  out << "\n";
  for (Eigen::Index i = 0; i < prof.grid.rows(); ++i) {
    for (Eigen::Index k = 0; k < d; ++k) out << prof.grid(i, k) << " ";
    out << prof.tau_exact(i) << " " << prof.classical_scaled(i) << " "
        << prof.envelope(i);
    if (prof.lower_cert.size()) out << " " << prof.lower_cert(i);
    if (prof.upper_cert.size()) out << " " << prof.upper_cert(i);
    out << "\n";
  }
}

} // namespace rffkit
