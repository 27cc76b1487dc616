#include <doctest.h>
#include <rffkit/features.hpp>
#include <rffkit/rng.hpp>

#include <cmath>
#include <cstdio>

using namespace rffkit;

namespace {
MatrixXd random_points(int n, int d, std::uint64_t seed, double half = 2.0) {
  RngStream rng(seed);
  MatrixXd X(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) X(i, k) = rng.uniform(-half, half);
  return X;
}
} // namespace

TEST_CASE("sample_classical is deterministic and has the right moments") {
  KernelModel model(0.5, 0.1, 10, 2);
  MatrixXd F1 = sample_classical(model, 4000, 42);
  MatrixXd F2 = sample_classical(model, 4000, 42);
  CHECK((F1 - F2).cwiseAbs().maxCoeff() == 0.0);

  MatrixXd F3 = sample_classical(model, 4000, 43);
  CHECK((F1 - F3).cwiseAbs().maxCoeff() > 0.0);

  // per-coordinate std is 1/(2 pi sigma); mean ~ 0 and sd within 4 SE
  const double sd = 1.0 / (kTwoPi * model.sigma);
  for (int k = 0; k < 2; ++k) {
    double mean = F1.col(k).mean();
    double var = (F1.col(k).array() - mean).square().sum() / (F1.rows() - 1);
    CHECK(std::abs(mean) < 4.0 * sd / std::sqrt(4000.0));
    CHECK(std::sqrt(var) == doctest::Approx(sd).epsilon(0.1));
  }
  CHECK_THROWS_AS(sample_classical(model, 0, 1), std::invalid_argument);
}

TEST_CASE("sample_uniform_box stays in the box and fills it") {
  KernelModel model(0.5, 0.1, 10, 1);
  double gamma = 4.0;
  MatrixXd F = sample_uniform_box(model, gamma, 2000, 7);
  double half = gamma / (kTwoPi * model.sigma);
  CHECK(F.cwiseAbs().maxCoeff() <= half);
  CHECK(F.maxCoeff() > 0.9 * half);
  CHECK(F.minCoeff() < -0.9 * half);
  VectorXd eta(1);
  eta << 0.5 * half;
  CHECK(uniform_box_density(eta, model, gamma) ==
        doctest::Approx(1.0 / (2.0 * half)).epsilon(1e-14));
  eta << 1.5 * half;
  CHECK(uniform_box_density(eta, model, gamma) == 0.0);
  CHECK_THROWS_AS(sample_uniform_box(model, -1.0, 10, 1), std::invalid_argument);
}

TEST_CASE("classical map has unit weights exactly") {
  KernelModel model(0.3, 0.05, 8, 1);
  MatrixXd X = random_points(8, 1, 11);
  MatrixXd F = sample_classical(model, 40, 5);
  FeatureMap fm = build_classical_map(X, model, F, 5);
  CHECK((fm.weights.array() == 1.0).all());
  CHECK(fm.Z.rows() == 8);
  CHECK(fm.Z.cols() == 40);

  // the generic path with q = p gives weights 1 up to rounding
  auto p = [&](const Eigen::Ref<const VectorXd>& eta) {
    return fourier_density(eta, model.sigma);
  };
  FeatureMap fm2 = build_feature_map(X, model, F, p, "classical", 5);
  CHECK((fm2.weights.array() - 1.0).abs().maxCoeff() < 1e-14);
  CHECK((fm.Z - fm2.Z).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("surrogate Gram equals the direct sum over features") {
  KernelModel model(0.4, 0.1, 6, 2);
  MatrixXd X = random_points(6, 2, 3);
  MatrixXd F = sample_classical(model, 15, 9);
  FeatureMap fm = build_classical_map(X, model, F, 9);
  MatrixXcd G = surrogate_gram(fm);
  // direct formula: G_jk = (1/s) sum_l w_l^2 e^{-2 pi i (x_j - x_k)^T eta_l}
  MatrixXcd Gd = MatrixXcd::Zero(6, 6);
  for (int l = 0; l < 15; ++l) {
    VectorXcd z = z_vector(X, F.row(l).transpose());
    Gd += z * z.adjoint() / 15.0;
  }
  CHECK((G - Gd).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((G - G.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((G.diagonal().real().array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("single-feature maps are unbiased for the kernel") {
  // average of Z Z^* over many independent single-feature draws approaches K;
  // 3 standard errors of the Monte-Carlo mean per entry
  KernelModel model(0.5, 0.1, 5, 1);
  MatrixXd X = random_points(5, 1, 21, 1.0);
  MatrixXd K = kernel_matrix(X, model.sigma);
  const int T = 100000;
  MatrixXcd acc = MatrixXcd::Zero(5, 5);
  for (int t = 0; t < T; ++t) {
    MatrixXd F = sample_classical(model, 1, 1000 + t);
    VectorXcd z = z_vector(X, F.row(0).transpose());
    acc += z * z.adjoint();
  }
  acc /= T;
  // each entry is a mean of unit-modulus phases; SE per entry <= 1/sqrt(T)
  double se = 1.0 / std::sqrt(static_cast<double>(T));
  CHECK((acc.real() - K).cwiseAbs().maxCoeff() < 3.0 * se);
  CHECK(acc.imag().cwiseAbs().maxCoeff() < 3.0 * se);
}

TEST_CASE("weighted maps are unbiased under a covering proposal") {
  KernelModel model(1.0 / kTwoPi, 0.1, 4, 1);
  MatrixXd X = random_points(4, 1, 31, 1.0);
  MatrixXd K = kernel_matrix(X, model.sigma);
  const double gamma = 6.0; // box of 6 spectral stds: [-6,6] in eta units here
  const int T = 100000;
  MatrixXcd acc = MatrixXcd::Zero(4, 4);
  auto q = [&](const Eigen::Ref<const VectorXd>& eta) {
    return uniform_box_density(eta, model, gamma);
  };
  for (int t = 0; t < T; ++t) {
    MatrixXd F = sample_uniform_box(model, gamma, 1, 5000 + t);
    FeatureMap fm = build_feature_map(X, model, F, q, "uniform-box", 5000 + t);
    acc += fm.Z * fm.Z.adjoint();
  }
  acc /= T;
  // importance weights inflate the variance; the w^2 factor is bounded by
  // 2*half*p(0) ~ 4.8 here, so 3 SE with that bound
  double wmax2 = 2.0 * (gamma / (kTwoPi * model.sigma)) * fourier_density(VectorXd::Zero(1), model.sigma);
  double se = wmax2 / std::sqrt(static_cast<double>(T));
  CHECK((acc.real() - K).cwiseAbs().maxCoeff() < 3.0 * se);
  CHECK(acc.imag().cwiseAbs().maxCoeff() < 3.0 * se);
}

TEST_CASE("feature_vector matches the training rows of Z") {
  KernelModel model(0.4, 0.1, 5, 2);
  MatrixXd X = random_points(5, 2, 13);
  MatrixXd F = sample_classical(model, 12, 17);
  FeatureMap fm = build_classical_map(X, model, F, 17);
  for (int j = 0; j < 5; ++j) {
    VectorXcd phi = feature_vector(fm, X.row(j).transpose());
    CHECK((phi.transpose() - fm.Z.row(j)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("build_feature_map rejects degenerate proposals") {
  KernelModel model(0.5, 0.1, 3, 1);
  MatrixXd X = random_points(3, 1, 2);
  MatrixXd F(1, 1);
  F << 100.0;
  auto q = [&](const Eigen::Ref<const VectorXd>& eta) {
    return uniform_box_density(eta, model, 1.0); // zero at eta = 100
  };
  CHECK_THROWS_AS(build_feature_map(X, model, F, q), std::runtime_error);
}

TEST_CASE("recommended_sample_size frozen value and domain checks") {
  // delta=1/2, rho=0.1, s_tilde=s_lambda=10:
  // ceil((8/3)*4*10*ln(1600)) = ceil(786.9186...) = 787
  CHECK(recommended_sample_size(0.5, 0.1, 10.0, 10.0) == 787);
  // monotone: smaller delta needs more features
  CHECK(recommended_sample_size(0.25, 0.1, 10.0, 10.0) >
        recommended_sample_size(0.5, 0.1, 10.0, 10.0));
  CHECK_THROWS_AS(recommended_sample_size(0.6, 0.1, 10.0, 10.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(recommended_sample_size(0.5, 1.5, 10.0, 10.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(recommended_sample_size(0.5, 0.1, 5.0, 10.0),
                  std::invalid_argument);
}

TEST_CASE("frequency cache round-trips bit for bit") {
  KernelModel model(0.3, 0.05, 6, 2);
  MatrixXd X = random_points(6, 2, 19);
  MatrixXd F = sample_classical(model, 25, 77);
  FeatureMap fm = build_classical_map(X, model, F, 77);

  const char* path = "test_freq_cache.txt";
  save_frequencies(fm, path);
  FrequencyDraw draw = load_frequencies(path);
  CHECK(draw.proposal_id == "classical");
  CHECK(draw.seed == 77);
  CHECK((draw.frequencies - F).cwiseAbs().maxCoeff() == 0.0);
  CHECK((draw.weights - fm.weights).cwiseAbs().maxCoeff() == 0.0);

  FeatureMap fm2 = build_from_draw(X, draw);
  CHECK((fm.Z - fm2.Z).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path);
  CHECK_THROWS_AS(load_frequencies("no_such_file.txt"), std::runtime_error);
}
