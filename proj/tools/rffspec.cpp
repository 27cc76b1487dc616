// rffspec: experiment harness for the random Fourier feature toolkit.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <rffkit/experiments.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace rffkit;

namespace {

std::string timestamp_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

std::string join_u64(const std::vector<std::uint64_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string join_long(const std::vector<long>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

void write_manifest(const ExperimentConfig& cfg, const fs::path& dir) {
  std::ofstream out(dir / "manifest.txt");
  out << "tool rffspec 1.0\n";
  out << "eigen " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
      << EIGEN_MINOR_VERSION << "\n";
#if defined(__clang__)
  out << "compiler clang " << __clang_major__ << "." << __clang_minor__ << "\n";
#elif defined(__GNUC__)
  out << "compiler gcc " << __GNUC__ << "." << __GNUC_MINOR__ << "\n";
#endif
  out << "experiment " << cfg.experiment << "\n";
  out << "sigma " << format_num(cfg.sigma) << "\n";
  out << "lambda " << format_num(cfg.lambda) << "\n";
  out << "sigma_nu " << format_num(cfg.sigma_nu) << "\n";
  out << "s " << cfg.s << "\n";
  out << "proposal " << cfg.proposal << "\n";
  out << "gamma " << format_num(cfg.gamma) << "\n";
  out << "cap_scale " << format_num(cfg.cap_scale) << "\n";
  out << "grid_n " << cfg.grid_n << "\n";
  out << "xmin " << format_num(cfg.xmin) << "\n";
  out << "xmax " << format_num(cfg.xmax) << "\n";
  out << "grid_endpoints included\n";
  out << "eta_max " << format_num(cfg.eta_max) << "\n";
  out << "eta_points " << cfg.eta_points << "\n";
  out << "m " << cfg.m << "\n";
  out << "R " << format_num(cfg.R) << "\n";
  out << "embed_dim " << cfg.embed_dim << "\n";
  out << "s_list " << join_long(cfg.s_list) << "\n";
  out << "seeds " << join_u64(cfg.seeds) << "\n";
}

std::vector<std::string> estimator_csv_comments() {
  return {"one row per (estimator, seed) on the wiggly benchmark",
          "risk: fixed-design risk of the estimator (closed form, noise-free)",
          "realized_sq_err: sum of squared in-sample errors for one noise draw",
          "s_lambda: statistical dimension of K (KRR rows) or of ZZ* (surrogates)",
          "frob_rel_err: ||K - ZZ*||_F^2 / ||K||_F^2 (dimensionless)",
          "kappa: generalized condition number of (K+lambda I, ZZ*+lambda I)",
          "delta: spectral approximation parameter"};
}

void write_estimator_rows(const std::vector<EstimatorRow>& rows,
                          const fs::path& path) {
  CsvTable t;
  t.comments = estimator_csv_comments();
  t.columns = {"estimator", "seed",          "risk",  "realized_sq_err",
               "s_lambda",  "frob_rel_err",  "kappa", "delta"};
  for (const auto& r : rows)
    t.add_row({r.estimator, std::to_string(r.seed), format_num(r.risk),
               format_num(r.realized), format_num(r.s_lambda),
               format_num(r.frob), format_num(r.kappa), format_num(r.delta)});
  t.write(path.string());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

int run(const ExperimentConfig& cfg, const fs::path& dir) {
  if (cfg.experiment == "wiggly1d") {
    auto rows = run_wiggly1d(cfg);
    write_estimator_rows(rows, dir / "results.csv");

    // fitted curves for the first seed
    const int n = cfg.grid_n;
    MatrixXd X = linspace(cfg.xmin, cfg.xmax, n);
    VectorXd fstar(n);
    for (int i = 0; i < n; ++i) fstar(i) = wiggly_target_1d(X(i, 0));
    KernelModel model(cfg.sigma, cfg.lambda, n, 1);
    MatrixXd K = kernel_matrix(X, cfg.sigma);
    std::uint64_t seed = cfg.seeds.front();
    VectorXd y = fstar + draw_noise(n, cfg.sigma_nu, seed);
    MatrixXd Kl = K;
    Kl.diagonal().array() += cfg.lambda;
    VectorXd f_krr = K * Kl.llt().solve(y);
    auto fit = [&](const std::string& prop) {
      FeatureMap fm = make_feature_map(X, model, prop, cfg.s, seed, cfg.gamma,
                                       cfg.cap_scale);
      MatrixXcd Gl = surrogate_gram(fm);
      Gl.diagonal().array() += cfg.lambda;
      VectorXcd fh = y.cast<std::complex<double>>() -
                     cfg.lambda * Gl.ldlt().solve(y.cast<std::complex<double>>());
      return VectorXd(fh.real());
    };
    VectorXd f_crf = fit("classical"), f_mrf = fit(cfg.proposal);
    std::vector<double> xs(X.data(), X.data() + n);
    auto tovec = [n](const VectorXd& v) {
      return std::vector<double>(v.data(), v.data() + n);
    };
    write_line_chart((dir / "plot_estimators.svg").string(),
                     "wiggly 1d estimators (seed " + std::to_string(seed) + ")",
                     "x", "f(x)",
                     {{"f*", xs, tovec(fstar)},
                      {"KRR", xs, tovec(f_krr)},
                      {"CRF", xs, tovec(f_crf)},
                      {"MRF", xs, tovec(f_mrf)}});
    return 0;
  }

  if (cfg.experiment == "wiggly2d") {
    auto res = run_wiggly2d(cfg);
    write_estimator_rows(res.summary, dir / "results.csv");
    CsvTable hm;
    hm.comments = {"prediction heatmap on the 2d grid, first seed",
                   "columns: grid point (x,z), target f*, and estimator values"};
    hm.columns = {"x", "z", "fstar", "krr", "crf", "mrf"};
    for (const auto& r : res.heatmap)
      hm.add_row({format_num(r.x), format_num(r.z), format_num(r.fstar),
                  format_num(r.krr), format_num(r.crf), format_num(r.mrf)});
    hm.write((dir / "heatmap.csv").string());
    // middle-row slice as a line chart
    const int m = cfg.grid_n;
    int mid = m / 2;
    std::vector<double> xs, fs, kr, cr, mr;
    for (int j = 0; j < m; ++j) {
      const auto& r = res.heatmap[mid * m + j];
      xs.push_back(r.z);
      fs.push_back(r.fstar);
      kr.push_back(r.krr);
      cr.push_back(r.crf);
      mr.push_back(r.mrf);
    }
    write_line_chart((dir / "plot_slice.svg").string(),
                     "wiggly 2d, slice at x = " +
                         format_num(res.heatmap[mid * m].x),
                     "z", "f(x,z)",
                     {{"f*", xs, fs}, {"KRR", xs, kr}, {"CRF", xs, cr},
                      {"MRF", xs, mr}});
    return 0;
  }

  if (cfg.experiment == "distributions") {
    auto res = run_distributions(cfg);
    export_leverage_profile(res.profile, (dir / "profile.txt").string());
    CsvTable t;
    t.comments = {"leverage profile: exact ridge leverage, the classical density",
                  "scaled by s_lambda, and the capped envelope, per frequency",
                  "envelope_dominates_in_band " +
                      std::string(res.envelope_dominates ? "true" : "false"),
                  "classical_over_at_zero " +
                      std::string(res.classical_over_at_zero ? "true" : "false"),
                  "classical_under_mid_band " +
                      std::string(res.classical_under_mid_band ? "true" : "false")};
    t.columns = {"eta", "tau_exact", "classical_scaled", "envelope"};
    std::vector<double> xs, te, cs, en;
    for (Eigen::Index i = 0; i < res.profile.grid.rows(); ++i) {
      t.add_row({format_num(res.profile.grid(i, 0)),
                 format_num(res.profile.tau_exact(i)),
                 format_num(res.profile.classical_scaled(i)),
                 format_num(res.profile.envelope(i))});
      xs.push_back(res.profile.grid(i, 0));
      te.push_back(res.profile.tau_exact(i));
      cs.push_back(res.profile.classical_scaled(i));
      en.push_back(res.profile.envelope(i));
    }
    t.write((dir / "results.csv").string());
    write_line_chart((dir / "plot_distributions.svg").string(),
                     "leverage function vs sampling distributions", "eta",
                     "value", {{"tau_exact", xs, te},
                               {"s_lambda * p", xs, cs},
                               {"envelope", xs, en}},
                     true);
    return 0;
  }

  if (cfg.experiment == "spectral-sweep") {
    auto rows = run_spectral_sweep(cfg);
    CsvTable t;
    t.comments = {"estimator quality versus feature count s",
                  "risk: fixed-design risk; frob_rel_err: entrywise error",
                  "kappa: generalized condition number of (K+lambda I, ZZ*+lambda I)"};
    t.columns = {"proposal", "s", "seed", "risk", "frob_rel_err", "kappa", "delta"};
    for (const auto& r : rows)
      t.add_row({r.proposal, std::to_string(r.s), std::to_string(r.seed),
                 format_num(r.risk), format_num(r.frob), format_num(r.kappa),
                 format_num(r.delta)});
    t.write((dir / "results.csv").string());

    auto medians = [&](const std::string& prop, auto field) {
      std::vector<double> xs, ys;
      for (long s : cfg.s_list) {
        std::vector<double> vals;
        for (const auto& r : rows)
          if (r.proposal == prop && r.s == s) vals.push_back(field(r));
        if (!vals.empty()) {
          xs.push_back(static_cast<double>(s));
          ys.push_back(median(vals));
        }
      }
      return std::make_pair(xs, ys);
    };
    std::vector<std::string> props = {"classical", cfg.proposal};
    auto plot = [&](const std::string& name, const std::string& ylabel,
                    auto field) {
      std::vector<PlotSeries> series;
      for (const auto& prop : props) {
        auto [xs, ys] = medians(prop, field);
        series.push_back({prop, xs, ys});
      }
      write_line_chart((dir / name).string(), ylabel + " vs s (median)", "s",
                       ylabel, series, true);
    };
    plot("plot_risk.svg", "risk", [](const SweepRow& r) { return r.risk; });
    plot("plot_frobenius.svg", "frob_rel_err",
         [](const SweepRow& r) { return r.frob; });
    plot("plot_kappa.svg", "kappa", [](const SweepRow& r) { return r.kappa; });
    return 0;
  }

  if (cfg.experiment == "lowerbound") {
    auto rows = run_lowerbound(cfg);
    auto control = run_lowerbound(cfg, true);
    CsvTable t;
    t.comments = {"adversarial spectral-violation check on a uniform grid",
                  "exact_form: alpha^T (K+lambda I) alpha",
                  "surrogate_form: alpha^* (ZZ*+lambda I) alpha",
                  "violated: exact_form < (2/3) surrogate_form",
                  "control rows use G = K (violation must never trigger)"};
    t.columns = {"kind",  "seed",  "s",       "exact_form", "surrogate_form",
                 "ratio", "violated", "in_regime"};
    auto emit = [&](const char* kind, const std::vector<LowerboundRow>& rs) {
      for (const auto& r : rs)
        t.add_row({kind, std::to_string(r.seed), std::to_string(r.s),
                   format_num(r.exact_form), format_num(r.surrogate_form),
                   format_num(r.ratio), r.violated ? "1" : "0",
                   r.in_regime ? "1" : "0"});
    };
    emit("classical", rows);
    emit("control", control);
    t.write((dir / "results.csv").string());

    std::vector<double> xs, freq;
    for (long s : cfg.s_list) {
      int total = 0, hits = 0;
      for (const auto& r : rows)
        if (r.s == s) {
          ++total;
          hits += r.violated ? 1 : 0;
        }
      xs.push_back(static_cast<double>(s));
      freq.push_back(total ? static_cast<double>(hits) / total : 0.0);
    }
    write_line_chart((dir / "plot_violation.svg").string(),
                     "spectral violation frequency vs s", "s",
                     "violation frequency", {{"classical", xs, freq}});
    return 0;
  }

  throw std::invalid_argument("unknown experiment: " + cfg.experiment);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"random Fourier feature experiment harness"};
  std::string experiment, config_path, out_dir, proposal;
  std::vector<std::uint64_t> seeds;
  long s = -1;
  app.add_option("experiment", experiment,
                 "one of: wiggly1d, wiggly2d, distributions, lowerbound, "
                 "spectral-sweep")
      ->required();
  app.add_option("--config", config_path,
                 "key=value config file with optional [experiment] sections; "
                 "keys: sigma, lambda, sigma_nu, s, s_list, proposal, gamma, "
                 "cap_scale (envelope scaling, exploration only), grid_n, "
                 "xmin, xmax, eta_max, eta_points, m, R, embed_dim, seeds, out");
  app.add_option("--seed", seeds, "rng seed (repeatable)");
  app.add_option("--out", out_dir, "output directory root");
  app.add_option("--proposal", proposal, "classical | uniform-box | improved");
  app.add_option("--s", s, "number of features");
  CLI11_PARSE(app, argc, argv);

  ExperimentConfig cfg;
  try {
    cfg = default_config(experiment);
    if (!config_path.empty()) load_config_file(cfg, config_path);
    if (!seeds.empty()) cfg.seeds = seeds;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!proposal.empty()) cfg.proposal = proposal;
    if (s > 0) cfg.s = s;
    if (cfg.seeds.empty()) throw std::invalid_argument("need at least one seed");
    if (cfg.s_list.empty()) cfg.s_list = {cfg.s};
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    fs::path dir = fs::path(cfg.out_dir) / (experiment + "_" + timestamp_now());
    fs::create_directories(dir);
    write_manifest(cfg, dir);
    int rc = run(cfg, dir);
    if (rc == 0) std::cout << "wrote " << dir.string() << "\n";
    return rc;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
