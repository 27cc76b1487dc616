#pragma once
// Random Fourier feature maps. Classical features draw frequencies from the
// kernel's spectral density p; modified features draw from a proposal q and
// carry importance weights sqrt(p/q). The feature matrix is
//   Z_{jl} = (1/sqrt(s)) * w_l * exp(-2 pi i x_j^T eta_l),  w_l = sqrt(p/q)(eta_l),
// so E[Z Z^*] = K for any proper proposal.

#include "kernel.hpp"
#include "rng.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

namespace rffkit {

struct FeatureMap {
  MatrixXd frequencies; // s x d
  VectorXd weights;     // sqrt(p/q) per frequency
  MatrixXcd Z;          // n x s
  std::string proposal_id;
  std::uint64_t seed = 0;
  bool support_warning = false; // proposal support does not cover supp(p)
};

inline MatrixXd sample_classical(const KernelModel& model, Eigen::Index s,
                                 std::uint64_t seed, std::uint64_t stream = 0) {
  if (s < 1) throw std::invalid_argument("sample_classical: s must be >= 1");
  RngStream rng(seed, stream);
  const double sd = 1.0 / (kTwoPi * model.sigma);
  MatrixXd F(s, model.d);
  for (Eigen::Index l = 0; l < s; ++l)
    for (int k = 0; k < model.d; ++k) F(l, k) = sd * rng.normal();
  return F;
}

// uniform proposal on [-gamma/(2 pi sigma), gamma/(2 pi sigma)]^d, i.e. a box
// of gamma per-coordinate standard deviations of the spectral density
inline MatrixXd sample_uniform_box(const KernelModel& model, double gamma,
                                   Eigen::Index s, std::uint64_t seed,
                                   std::uint64_t stream = 0) {
  if (!(gamma > 0.0)) throw std::invalid_argument("sample_uniform_box: gamma must be positive");
  if (s < 1) throw std::invalid_argument("sample_uniform_box: s must be >= 1");
  RngStream rng(seed, stream);
  const double half = gamma / (kTwoPi * model.sigma);
  MatrixXd F(s, model.d);
  for (Eigen::Index l = 0; l < s; ++l)
    for (int k = 0; k < model.d; ++k) F(l, k) = rng.uniform(-half, half);
  return F;
}

// density of the uniform-box proposal matching sample_uniform_box
inline double uniform_box_density(const Eigen::Ref<const VectorXd>& eta,
                                  const KernelModel& model, double gamma) {
  const double half = gamma / (kTwoPi * model.sigma);
  for (Eigen::Index k = 0; k < eta.size(); ++k)
    if (std::abs(eta(k)) > half) return 0.0;
  return std::pow(1.0 / (2.0 * half), static_cast<double>(model.d));
}

inline FeatureMap build_feature_map(
    const MatrixXd& X, const KernelModel& model, const MatrixXd& frequencies,
    const std::function<double(const Eigen::Ref<const VectorXd>&)>& proposal_density,
    std::string proposal_id = "custom", std::uint64_t seed = 0,
    bool support_warning = false) {
  const Eigen::Index s = frequencies.rows();
  if (s < 1) throw std::invalid_argument("build_feature_map: no frequencies");
  if (frequencies.cols() != X.cols())
    throw std::invalid_argument("build_feature_map: dimension mismatch");

  FeatureMap fm;
  fm.frequencies = frequencies;
  fm.weights.resize(s);
  fm.Z.resize(X.rows(), s);
  fm.proposal_id = std::move(proposal_id);
  fm.seed = seed;
  fm.support_warning = support_warning;

  const double inv_sqrt_s = 1.0 / std::sqrt(static_cast<double>(s));
  for (Eigen::Index l = 0; l < s; ++l) {
    VectorXd eta = frequencies.row(l).transpose();
    double q = proposal_density(eta);
    if (!(q > 0.0) || !std::isfinite(q))
      throw std::runtime_error("build_feature_map: degenerate proposal density at a sampled frequency");
    double w = std::sqrt(fourier_density(eta, model.sigma) / q);
    fm.weights(l) = w;
    fm.Z.col(l) = (inv_sqrt_s * w) * z_vector(X, eta);
  }
  return fm;
}

// classical map: q = p, all weights exactly 1 by construction
inline FeatureMap build_classical_map(const MatrixXd& X, const KernelModel& model,
                                      const MatrixXd& frequencies,
                                      std::uint64_t seed = 0) {
  const Eigen::Index s = frequencies.rows();
  if (s < 1) throw std::invalid_argument("build_classical_map: no frequencies");
  FeatureMap fm;
  fm.frequencies = frequencies;
  fm.weights = VectorXd::Ones(s);
  fm.Z.resize(X.rows(), s);
  fm.proposal_id = "classical";
  fm.seed = seed;
  const double inv_sqrt_s = 1.0 / std::sqrt(static_cast<double>(s));
  for (Eigen::Index l = 0; l < s; ++l)
    fm.Z.col(l) = inv_sqrt_s * z_vector(X, frequencies.row(l).transpose());
  return fm;
}

inline MatrixXcd surrogate_gram(const FeatureMap& fm) {
  MatrixXcd G = fm.Z * fm.Z.adjoint();
  G = 0.5 * (G + G.adjoint()).eval();
  return G;
}

// feature vector phi(x) for out-of-sample prediction
inline VectorXcd feature_vector(const FeatureMap& fm,
                                const Eigen::Ref<const VectorXd>& x) {
  const Eigen::Index s = fm.frequencies.rows();
  VectorXcd phi(s);
  const double inv_sqrt_s = 1.0 / std::sqrt(static_cast<double>(s));
  for (Eigen::Index l = 0; l < s; ++l) {
    double phase = -kTwoPi * fm.frequencies.row(l).dot(x);
    phi(l) = inv_sqrt_s * fm.weights(l) *
             std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return phi;
}

// sample-size rule: ceil((8/3) delta^-2 s_tilde ln(16 s_lambda / rho))
inline long recommended_sample_size(double delta, double rho, double s_tilde,
                                    double s_lambda) {
  if (!(delta > 0.0) || delta > 0.5)
    throw std::invalid_argument("recommended_sample_size: delta must lie in (0, 1/2]");
  if (!(rho > 0.0) || rho >= 1.0 + 1e-15)
    throw std::invalid_argument("recommended_sample_size: rho must lie in (0, 1)");
  if (!(s_lambda > 0.0) || s_tilde < s_lambda)
    throw std::invalid_argument("recommended_sample_size: need s_tilde >= s_lambda > 0");
  return static_cast<long>(
      std::ceil((8.0 / 3.0) / (delta * delta) * s_tilde * std::log(16.0 * s_lambda / rho)));
}

// -- columnar text cache for frequency draws --------------------------------

struct FrequencyDraw {
  MatrixXd frequencies;
  VectorXd weights;
  std::string proposal_id;
  std::uint64_t seed = 0;
};

inline void save_frequencies(const FeatureMap& fm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_frequencies: cannot open " + path);
  out.precision(17);
  out << "rffkit-frequencies 1\n";
  out << "s " << fm.frequencies.rows() << "\n";
  out << "d " << fm.frequencies.cols() << "\n";
  out << "proposal " << fm.proposal_id << "\n";
  out << "seed " << fm.seed << "\n";
  for (Eigen::Index l = 0; l < fm.frequencies.rows(); ++l) {
    for (Eigen::Index k = 0; k < fm.frequencies.cols(); ++k)
      out << fm.frequencies(l, k) << " ";
    out << fm.weights(l) << "\n";
  }
}

inline FrequencyDraw load_frequencies(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_frequencies: cannot open " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "rffkit-frequencies" || version != 1)
    throw std::runtime_error("load_frequencies: bad header in " + path);
  std::string key;
  Eigen::Index s = 0, d = 0;
  FrequencyDraw draw;
  in >> key >> s;
  in >> key >> d;
  in >> key >> draw.proposal_id;
  in >> key >> draw.seed;
  if (s < 1 || d < 1) throw std::runtime_error("load_frequencies: bad dimensions");
  draw.frequencies.resize(s, d);
  draw.weights.resize(s);
  for (Eigen::Index l = 0; l < s; ++l) {
    for (Eigen::Index k = 0; k < d; ++k) in >> draw.frequencies(l, k);
    in >> draw.weights(l);
  }
  if (!in) throw std::runtime_error("load_frequencies: truncated file");
  return draw;
}

// rebuild Z from a cached draw; weights are taken as stored
inline FeatureMap build_from_draw(const MatrixXd& X, const FrequencyDraw& draw) {
  FeatureMap fm;
  fm.frequencies = draw.frequencies;
  fm.weights = draw.weights;
  fm.proposal_id = draw.proposal_id;
  fm.seed = draw.seed;
  const Eigen::Index s = draw.frequencies.rows();
  fm.Z.resize(X.rows(), s);
  const double inv_sqrt_s = 1.0 / std::sqrt(static_cast<double>(s));
  for (Eigen::Index l = 0; l < s; ++l)
    fm.Z.col(l) = (inv_sqrt_s * draw.weights(l)) *
                  z_vector(X, draw.frequencies.row(l).transpose());
  return fm;
}

} // namespace rffkit
