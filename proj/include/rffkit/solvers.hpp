#pragma once
// Exact KRR (dual solve), feature-space KRR through the Woodbury form,
// RFF-preconditioned conjugate gradient for (K + lambda I) alpha = y, and the
// Delta-spectral approximation verifier.

#include "features.hpp"
#include "kernel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace rffkit {

struct KrrEstimator {
  VectorXd alpha;
  MatrixXd X;
  double sigma = 0.0;
  double lambda = 0.0;
};

struct RffEstimator {
  VectorXcd w;
  FeatureMap feature_map;
  double lambda = 0.0;
};

struct SpectralReport {
  double delta = 0.0;
  double lam_min_whitened = 1.0;
  double lam_max_whitened = 1.0;
  double kappa = 1.0;
};

inline KrrEstimator krr_fit(const MatrixXd& X, const VectorXd& y,
                            const KernelModel& model,
                            double solve_tol = 1e-10) {
  MatrixXd M = kernel_matrix(X, model.sigma);
  M.diagonal().array() += model.lambda;
  Eigen::LLT<MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("krr_fit: Cholesky factorization failed");
  VectorXd alpha = llt.solve(y);
  // one step of iterative refinement, then enforce the residual contract
  alpha += llt.solve(y - M * alpha);
  double rel = (M * alpha - y).norm();
  if (y.norm() > 0.0) rel /= y.norm();
  if (rel > solve_tol)
    throw std::runtime_error("krr_fit: residual above tolerance, condition too poor");
  return {alpha, X, model.sigma, model.lambda};
}

inline double krr_predict(const KrrEstimator& est,
                          const Eigen::Ref<const VectorXd>& x_new) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < est.X.rows(); ++j)
    acc += est.alpha(j) * kernel_eval(est.X.row(j).transpose(), x_new, est.sigma);
  return acc;
}

inline RffEstimator rff_fit(const FeatureMap& fm, const VectorXd& y,
                            double lambda, double solve_tol = 1e-10) {
  if (!(lambda > 0.0)) throw std::invalid_argument("rff_fit: lambda must be positive");
  const Eigen::Index s = fm.Z.cols();
  MatrixXcd Ms = fm.Z.adjoint() * fm.Z;
  Ms.diagonal().array() += lambda;
  VectorXcd rhs = fm.Z.adjoint() * y.cast<std::complex<double>>();
  Eigen::LLT<MatrixXcd> llt(Ms);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("rff_fit: factorization of Z*Z + lambda I failed");
  VectorXcd w = llt.solve(rhs);
  w += llt.solve(rhs - Ms * w);
  double rel = (Ms * w - rhs).norm();
  if (rhs.norm() > 0.0) rel /= rhs.norm();
  if (rel > solve_tol)
    throw std::runtime_error("rff_fit: residual above tolerance");
  return {w, fm, lambda};
}

// f_tilde(x) = phi(x) . w; the complex value carries O(1/sqrt(s)) Monte-Carlo
// imaginary noise, reported through *imag_residue when requested
inline double rff_predict(const RffEstimator& est,
                          const Eigen::Ref<const VectorXd>& x_new,
                          double* imag_residue = nullptr) {
  std::complex<double> val =
      feature_vector(est.feature_map, x_new).transpose() * est.w;
  if (imag_residue) *imag_residue = std::abs(val.imag());
  return val.real();
}

// in-sample predictions Z w (complex, for Woodbury cross-checks)
inline VectorXcd rff_predict_train(const RffEstimator& est) {
  return est.feature_map.Z * est.w;
}

struct CgResult {
  VectorXd alpha;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history; // relative residual per iteration
};

namespace detail {
// preconditioner action (ZZ* + lambda I)^{-1} v through the s x s system;
// the real part of the Hermitian action is itself SPD on real vectors and
// obeys the same spectral sandwich, so CG stays well posed
class WoodburyPreconditioner {
public:
  WoodburyPreconditioner(const MatrixXcd& Z, double lambda)
      : Z_(Z), lambda_(lambda), primal_(Z.cols() <= Z.rows()) {
    // the s x s system is the cheap route when s <= n; past that the n x n
    // Gram form costs less and gives the identical operator
    MatrixXcd Ms;
    if (primal_) {
      Ms = Z.adjoint() * Z;
    } else {
      Ms = Z * Z.adjoint();
    }
    Ms.diagonal().array() += lambda;
    llt_.compute(Ms);
    if (llt_.info() != Eigen::Success)
      throw std::runtime_error("pcg_solve: preconditioner factorization failed");
  }
  VectorXd apply(const VectorXd& v) const {
    VectorXcd vc = v.cast<std::complex<double>>();
    if (!primal_) return llt_.solve(vc).real();
    VectorXcd t = Z_ * llt_.solve(Z_.adjoint() * vc);
    return (vc - t).real() / lambda_;
  }

private:
  const MatrixXcd& Z_;
  double lambda_;
  bool primal_;
  Eigen::LLT<MatrixXcd> llt_;
};
} // namespace detail

template <class Precond>
CgResult cg_core(const MatrixXd& A, const VectorXd& y, const Precond& prec,
                 double tol, int max_iter) {
  const Eigen::Index n = y.size();
  CgResult res;
  res.alpha = VectorXd::Zero(n);
  double ynorm = y.norm();
  if (ynorm == 0.0) {
    res.converged = true;
    return res;
  }
  VectorXd r = y;
  VectorXd z = prec(r);
  VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iter; ++it) {
    VectorXd Ap = A * p;
    double alpha = rz / p.dot(Ap);
    res.alpha += alpha * p;
    r -= alpha * Ap;
    double rel = r.norm() / ynorm;
    res.residual_history.push_back(rel);
    res.iterations = it + 1;
    if (rel <= tol) {
      res.converged = true;
      return res;
    }
    z = prec(r);
    double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return res;
}

inline CgResult pcg_solve(const MatrixXd& K, double lambda, const VectorXd& y,
                          const FeatureMap& fm, double tol = 1e-8,
                          int max_iter = 500) {
  if (!(tol > 0.0)) throw std::invalid_argument("pcg_solve: tol must be positive");
  MatrixXd A = K;
  A.diagonal().array() += lambda;
  detail::WoodburyPreconditioner M(fm.Z, lambda);
  return cg_core(A, y, [&](const VectorXd& v) { return M.apply(v); }, tol,
                 max_iter);
}

inline CgResult cg_solve(const MatrixXd& K, double lambda, const VectorXd& y,
                         double tol = 1e-8, int max_iter = 500) {
  if (!(tol > 0.0)) throw std::invalid_argument("cg_solve: tol must be positive");
  MatrixXd A = K;
  A.diagonal().array() += lambda;
  return cg_core(A, y, [](const VectorXd& v) { return v; }, tol, max_iter);
}

// whitened extreme eigenvalues of G + lambda I against K + lambda I = L L^T
inline SpectralReport spectral_delta(const MatrixXd& K, const MatrixXcd& G,
                                     double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("spectral_delta: lambda must be positive");
  const Eigen::Index n = K.rows();
  MatrixXd A = K;
  A.diagonal().array() += lambda;
  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("spectral_delta: factorization of K + lambda I failed");
  MatrixXd L = llt.matrixL();

  double lam_min, lam_max;
  if (n <= 2000) {
    MatrixXcd B = G;
    B.diagonal().array() += lambda;
    MatrixXcd Lc = L.cast<std::complex<double>>();
    MatrixXcd T1 = Lc.triangularView<Eigen::Lower>().solve(B); // L^{-1}(G+lam I)
    MatrixXcd T1h = T1.adjoint();
    MatrixXcd T2 = Lc.triangularView<Eigen::Lower>().solve(T1h);
    MatrixXcd W = T2.adjoint(); // L^{-1}(G+lam I)L^{-*}
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(W, Eigen::EigenvaluesOnly);
    lam_min = es.eigenvalues().minCoeff();
    lam_max = es.eigenvalues().maxCoeff();
  } else {
    // implicit power iteration for the extremes
    MatrixXcd B = G;
    B.diagonal().array() += lambda;
    Eigen::LLT<MatrixXcd> lltB(B);
    if (lltB.info() != Eigen::Success)
      throw std::runtime_error("spectral_delta: factorization of G + lambda I failed");
    MatrixXcd Lc = L.cast<std::complex<double>>();
    MatrixXcd Lch = Lc.adjoint();
    auto applyW = [&](const VectorXcd& v) -> VectorXcd {
      VectorXcd t = Lch.triangularView<Eigen::Upper>().solve(v);
      return Lc.triangularView<Eigen::Lower>().solve((B * t).eval());
    };
    auto applyWinv = [&](const VectorXcd& v) -> VectorXcd {
      VectorXcd t = Lc.triangularView<Eigen::Lower>() * v;
      return Lch.triangularView<Eigen::Upper>() * lltB.solve(t);
    };
    auto power = [&](auto&& op) {
      VectorXcd v(n);
      for (Eigen::Index i = 0; i < n; ++i)
        v(i) = {1.0 + 0.1 * std::cos(1.7 * i), 0.1 * std::sin(2.3 * i)};
      v /= v.norm();
      double mu = 0.0;
      for (int it = 0; it < 500; ++it) {
        VectorXcd w = op(v);
        double mu_new = std::real(v.dot(w));
        v = w / w.norm();
        if (std::abs(mu_new - mu) <= 1e-10 * std::abs(mu_new) && it > 2) {
          mu = mu_new;
          break;
        }
        mu = mu_new;
      }
      return mu;
    };
    lam_max = power(applyW);
    lam_min = 1.0 / power(applyWinv);
  }

  SpectralReport rep;
  rep.lam_min_whitened = lam_min;
  rep.lam_max_whitened = lam_max;
  rep.delta = std::max(1.0 - lam_min, lam_max - 1.0);
  rep.kappa = lam_max / lam_min;
  return rep;
}

// ---------------------------------------------------------- text save/load

inline void save_krr(const KrrEstimator& est, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_krr: cannot open " + path);
  out.precision(17);
  out << "rffkit-krr 1\n";
  out << "n " << est.X.rows() << "\nd " << est.X.cols() << "\n";
  out << "sigma " << est.sigma << "\nlambda " << est.lambda << "\n";
  for (Eigen::Index j = 0; j < est.X.rows(); ++j) {
    for (Eigen::Index k = 0; k < est.X.cols(); ++k) out << est.X(j, k) << " ";
    out << est.alpha(j) << "\n";
  }
}

inline KrrEstimator load_krr(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_krr: cannot open " + path);
  std::string magic, key;
  int version = 0;
  in >> magic >> version;
  if (magic != "rffkit-krr" || version != 1)
    throw std::runtime_error("load_krr: bad header in " + path);
  Eigen::Index n = 0, d = 0;
  KrrEstimator est;
  in >> key >> n >> key >> d >> key >> est.sigma >> key >> est.lambda;
  est.X.resize(n, d);
  est.alpha.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < d; ++k) in >> est.X(j, k);
    in >> est.alpha(j);
  }
  if (!in) throw std::runtime_error("load_krr: truncated file");
  return est;
}

// RFF estimator: coefficients plus a reference to a frequency cache file
inline void save_rff(const RffEstimator& est, const std::string& map_reference,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_rff: cannot open " + path);
  out.precision(17);
  out << "rffkit-rff 1\n";
  out << "s " << est.w.size() << "\n";
  out << "lambda " << est.lambda << "\n";
  out << "map " << map_reference << "\n";
  for (Eigen::Index l = 0; l < est.w.size(); ++l)
    out << est.w(l).real() << " " << est.w(l).imag() << "\n";
}

struct RffCoefficients {
  VectorXcd w;
  double lambda = 0.0;
  std::string map_reference;
};

inline RffCoefficients load_rff(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_rff: cannot open " + path);
  std::string magic, key;
  int version = 0;
  in >> magic >> version;
  if (magic != "rffkit-rff" || version != 1)
    throw std::runtime_error("load_rff: bad header in " + path);
  Eigen::Index s = 0;
  RffCoefficients coef;
  in >> key >> s >> key >> coef.lambda >> key >> coef.map_reference;
  coef.w.resize(s);
  for (Eigen::Index l = 0; l < s; ++l) {
    double re, im;
    in >> re >> im;
    coef.w(l) = {re, im};
  }
  if (!in) throw std::runtime_error("load_rff: truncated file");
  return coef;
}

inline void save_residual_history(const CgResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_residual_history: cannot open " + path);
  out.precision(17);
  out << "iteration,relative_residual\n";
  for (std::size_t i = 0; i < res.residual_history.size(); ++i)
    out << (i + 1) << "," << res.residual_history[i] << "\n";
}

} // namespace rffkit
