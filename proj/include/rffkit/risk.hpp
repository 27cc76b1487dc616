#pragma once
// Fixed-design risk of linear smoothers. For exact KRR,
//   R(f) = lambda^2 f^T (K+lambda I)^{-2} f / n
//        + sigma_nu^2 tr(K^2 (K+lambda I)^{-2}) / n,
// and the upper bound R_hat = lambda f^T (K+lambda I)^{-1} f / n
// + sigma_nu^2 s_lambda(K)/n. Everything is computed in closed form from an
// eigendecomposition; no Monte-Carlo over noise draws.

#include "kernel.hpp"
#include "leverage.hpp"
#include "solvers.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace rffkit {

struct RiskReport {
  double bias = 0.0;
  double variance = 0.0;
  double total = 0.0;
  double sigma_nu = 0.0;
};

inline RiskReport exact_risk(const MatrixXd& K, double lambda, const VectorXd& f,
                             double sigma_nu) {
  if (!(lambda > 0.0)) throw std::invalid_argument("exact_risk: lambda must be positive");
  const double n = static_cast<double>(K.rows());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(K);
  VectorXd mu = es.eigenvalues();
  VectorXd c = es.eigenvectors().transpose() * f;
  RiskReport rep;
  rep.sigma_nu = sigma_nu;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    double denom = mu(i) + lambda;
    rep.bias += lambda * lambda * c(i) * c(i) / (denom * denom);
    rep.variance += sigma_nu * sigma_nu * mu(i) * mu(i) / (denom * denom);
  }
  rep.bias /= n;
  rep.variance /= n;
  rep.total = rep.bias + rep.variance;
  return rep;
}

// generic linear smoother f_hat = A (f + noise)
inline RiskReport smoother_risk(const MatrixXcd& A, const VectorXd& f,
                                double sigma_nu) {
  if (A.rows() != A.cols() || A.rows() != f.size())
    throw std::invalid_argument("smoother_risk: shape mismatch");
  const double n = static_cast<double>(A.rows());
  VectorXcd r = A * f.cast<std::complex<double>>() - f.cast<std::complex<double>>();
  RiskReport rep;
  rep.sigma_nu = sigma_nu;
  rep.bias = r.squaredNorm() / n;
  rep.variance = sigma_nu * sigma_nu * A.squaredNorm() / n;
  rep.total = rep.bias + rep.variance;
  return rep;
}

// risk of the surrogate smoother A = G (G + lambda I)^{-1}, from the
// eigendecomposition of the Hermitian surrogate Gram
inline RiskReport surrogate_risk(const MatrixXcd& G, double lambda,
                                 const VectorXd& f, double sigma_nu) {
  if (!(lambda > 0.0)) throw std::invalid_argument("surrogate_risk: lambda must be positive");
  const double n = static_cast<double>(G.rows());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(G);
  VectorXd mu = es.eigenvalues();
  VectorXcd c = es.eigenvectors().adjoint() * f.cast<std::complex<double>>();
  RiskReport rep;
  rep.sigma_nu = sigma_nu;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    double denom = mu(i) + lambda;
    rep.bias += lambda * lambda * std::norm(c(i)) / (denom * denom);
    rep.variance += sigma_nu * sigma_nu * mu(i) * mu(i) / (denom * denom);
  }
  rep.bias /= n;
  rep.variance /= n;
  rep.total = rep.bias + rep.variance;
  return rep;
}

inline double risk_upper_bound(const MatrixXd& K, double lambda, const VectorXd& f,
                               double sigma_nu) {
  if (!(lambda > 0.0)) throw std::invalid_argument("risk_upper_bound: lambda must be positive");
  const double n = static_cast<double>(K.rows());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(K);
  VectorXd mu = es.eigenvalues();
  VectorXd c = es.eigenvectors().transpose() * f;
  double quad = 0.0, sd = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    quad += c(i) * c(i) / (mu(i) + lambda);
    sd += mu(i) / (mu(i) + lambda);
  }
  return lambda * quad / n + sigma_nu * sigma_nu * sd / n;
}

struct InflationReport {
  double lhs = 0.0;    // surrogate risk
  double rhs = 0.0;    // (1-Delta)^{-1} R_hat + Delta/(1+Delta) rank/n sigma^2
  double delta = 0.0;
  Eigen::Index rank = 0;
  bool holds = false;
};

// risk-inflation bound: R(f_tilde) <= (1-Delta)^{-1} R_hat_K(f)
//                                   + Delta/(1+Delta) (rank(G)/n) sigma_nu^2
inline InflationReport inflation_check(const MatrixXd& K, const MatrixXcd& G,
                                       double lambda, const VectorXd& f,
                                       double sigma_nu) {
  InflationReport rep;
  rep.delta = spectral_delta(K, G, lambda).delta;
  if (rep.delta >= 1.0)
    throw std::domain_error("inflation_check: Delta >= 1, bound vacuous");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(G, Eigen::EigenvaluesOnly);
  double cutoff = 1e-8 * es.eigenvalues().cwiseAbs().maxCoeff();
  rep.rank = (es.eigenvalues().array() > cutoff).count();
  rep.lhs = surrogate_risk(G, lambda, f, sigma_nu).total;
  rep.rhs = risk_upper_bound(K, lambda, f, sigma_nu) / (1.0 - rep.delta) +
            rep.delta / (1.0 + rep.delta) *
                (static_cast<double>(rep.rank) / K.rows()) * sigma_nu * sigma_nu;
  rep.holds = rep.lhs <= rep.rhs;
  return rep;
}

} // namespace rffkit
