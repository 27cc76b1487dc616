#pragma once
// Exact sampler for the capped envelope distribution tau_bar_R / s_tau_bar_R:
// a mixture of the uniform distribution on the low-frequency box
// [-10 sqrt(log n_lambda), 10 sqrt(log n_lambda)]^d and a tail part split into
// disjoint regions R_j = { |eta_j| >= t, |eta_k| < t for k < j }. Within R_j
// coordinate j is drawn from the tail of g_1 by inverse transform, coordinates
// before j from the head of g_1 by rejection, and coordinates after j from the
// full g_1 mixture. All masses are closed-form; no quadrature.

#include "kernel.hpp"
#include "leverage.hpp"
#include "rng.hpp"

#include <cmath>
#include <stdexcept>

namespace rffkit {

struct SampleStats {
  std::uint64_t rejection_rounds = 0; // total rejection-loop iterations
  std::uint64_t coordinates = 0;      // coordinates drawn through a loop
};

struct ImprovedSamplerState {
  Envelope env;
  double uniform_weight = 1.0;  // box mass / total mass
  VectorXd region_probs;        // P(R_j | tail), j = 1..d
  double head_prob = 0.0;       // erf(1/sqrt(2)) / A, Gaussian part of g_1
  bool threshold_fallback = false; // threshold < 1: tail by plain rejection
};

inline ImprovedSamplerState make_improved_sampler(const Envelope& env) {
  ImprovedSamplerState st;
  st.env = env;
  if (env.degenerate) return st; // pure Gaussian fallback, no mixture
  const int d = env.d;
  st.uniform_weight =
      env.cap * std::pow(2.0 * env.threshold, static_cast<double>(d)) / env.mass;
  st.region_probs.resize(d);
  double tail_total = 0.0;
  for (int j = 1; j <= d; ++j) {
    double m = std::pow(env.A, d - j) * std::pow(env.A - env.B, j - 1) * env.B;
    st.region_probs(j - 1) = m;
    tail_total += m;
  }
  st.region_probs /= tail_total;
  st.head_prob = std::erf(1.0 / std::sqrt(2.0)) / env.A;
  st.threshold_fallback = env.threshold < 1.0;
  return st;
}

// draw with density g_1 / A: Gaussian restricted to [-1,1] with probability
// erf(1/sqrt(2))/A, otherwise the |t| phi(t) tail beyond 1 by inverse transform
inline double sample_g1(const ImprovedSamplerState& st, RngStream& rng,
                        SampleStats* stats = nullptr) {
  if (stats) ++stats->coordinates;
  if (rng.uniform() < st.head_prob) {
    for (;;) {
      if (stats) ++stats->rejection_rounds;
      double x = rng.normal();
      if (std::abs(x) <= 1.0) return x;
    }
  }
  // tail of g_1 beyond 1: two-sided mass past xi is sqrt(2/pi) e^{-xi^2/2}
  if (stats) ++stats->rejection_rounds;
  double mass1 = std::sqrt(2.0 / M_PI) * std::exp(-0.5);
  double T = rng.uniform_open() * mass1;
  double xi = std::sqrt(-2.0 * std::log(std::sqrt(M_PI / 2.0) * T));
  return rng.uniform() < 0.5 ? xi : -xi;
}

// inverse transform for the g_1 tail beyond the envelope threshold:
// u in [0, B/A] is the normalized two-sided tail mass, xi solves
// A (1 - G(xi)) = sqrt(2/pi) e^{-xi^2/2}
inline double g1_tail_inverse(double u, const Envelope& env) {
  if (!(u >= 0.0) || u > env.B / env.A * (1.0 + 1e-12))
    throw std::invalid_argument("g1_tail_inverse: u outside [0, B/A]");
  if (u == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(-2.0 * std::log(std::sqrt(M_PI / 2.0) * u * env.A));
}

// g_1 restricted to |t| < threshold, by rejection against full g_1
inline double sample_g1_head(double threshold, const ImprovedSamplerState& st,
                             RngStream& rng, SampleStats* stats = nullptr) {
  if (!(threshold > 0.0))
    throw std::invalid_argument("sample_g1_head: threshold must be positive");
  for (;;) {
    double x = sample_g1(st, rng, stats);
    if (std::abs(x) < threshold) return x;
  }
}

// one tail coordinate: |value| >= threshold
inline double sample_g1_tail(const ImprovedSamplerState& st, RngStream& rng,
                             SampleStats* stats = nullptr) {
  if (st.threshold_fallback) {
    // threshold < 1 is outside the closed form's validity; plain rejection
    for (;;) {
      double x = sample_g1(st, rng, stats);
      if (std::abs(x) >= st.env.threshold) return x;
    }
  }
  if (stats) {
    ++stats->coordinates;
    ++stats->rejection_rounds;
  }
  double u = rng.uniform_open() * st.env.B / st.env.A;
  double xi = g1_tail_inverse(u, st.env);
  return rng.uniform() < 0.5 ? xi : -xi;
}

// draw one canonical-frame frequency with density tau_bar_R / mass
inline VectorXd sample_improved_one(const ImprovedSamplerState& st, RngStream& rng,
                                    SampleStats* stats = nullptr) {
  const int d = st.env.d;
  VectorXd eta(d);
  if (st.env.degenerate) {
    for (int k = 0; k < d; ++k) eta(k) = rng.normal();
    return eta;
  }
  if (rng.uniform() < st.uniform_weight) {
    for (int k = 0; k < d; ++k)
      eta(k) = rng.uniform(-st.env.threshold, st.env.threshold);
    return eta;
  }
  // pick tail region R_j
  int j = d - 1;
  double U = rng.uniform(), acc = 0.0;
  for (int k = 0; k < d; ++k) {
    acc += st.region_probs(k);
    if (U < acc) {
      j = k;
      break;
    }
  }
  for (int k = 0; k < j; ++k)
    eta(k) = sample_g1_head(st.env.threshold, st, rng, stats);
  eta(j) = sample_g1_tail(st, rng, stats);
  for (int k = j + 1; k < d; ++k) eta(k) = sample_g1(st, rng, stats);
  return eta;
}

// s frequencies in the model's own units (eta = eta_canonical / (2 pi sigma))
inline MatrixXd sample_improved(const ImprovedSamplerState& st,
                                const KernelModel& model, Eigen::Index s,
                                std::uint64_t seed, std::uint64_t stream = 0,
                                SampleStats* stats = nullptr) {
  if (s < 1) throw std::invalid_argument("sample_improved: s must be >= 1");
  if (st.env.d != model.d)
    throw std::invalid_argument("sample_improved: dimension mismatch");
  RngStream rng(seed, stream);
  const double sc = kTwoPi * model.sigma;
  MatrixXd F(s, model.d);
  for (Eigen::Index l = 0; l < s; ++l)
    F.row(l) = sample_improved_one(st, rng, stats).transpose() / sc;
  return F;
}

// proposal density matching sample_improved, in the model's units
inline double improved_proposal_density(const Eigen::Ref<const VectorXd>& eta,
                                        const ImprovedSamplerState& st,
                                        const KernelModel& model) {
  if (st.env.degenerate) return fourier_density(eta, model.sigma);
  return improved_envelope(eta, st.env, model) / st.env.mass;
}

} // namespace rffkit
