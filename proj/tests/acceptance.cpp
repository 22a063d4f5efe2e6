// Acceptance checks: one PASS/FAIL line per criterion, exit status 0 only
// when every criterion passes. Tolerances are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "test_util.hpp"
#include "wdrmsvm/data.hpp"
#include "wdrmsvm/experiments.hpp"
#include "wdrmsvm/linear_solver.hpp"
#include "wdrmsvm/loss.hpp"
#include "wdrmsvm/reference_solver.hpp"

namespace fs = std::filesystem;
using namespace wdrmsvm;

namespace {

constexpr double kImbalancedMargin = 0.02;
constexpr double kBalancedLow = -0.01;
constexpr double kBalancedHigh = 0.07;
constexpr double kRemarkRelTol = 1e-2;
constexpr double kRemarkMccrTol = 0.01;
constexpr double kLpObjectiveTol = 1e-2;
constexpr double kAgreement = 0.95;
constexpr double kDualityTol = 1e-6;
constexpr double kProjectionTol = 1e-6;
constexpr double kFeasibleTol = 1e-9;
constexpr double kWineFloor = 0.92;
constexpr double kIrisFloor = 0.93;
constexpr double kMonotoneTol = 1e-8;
constexpr int kSubgradientIterations = 2000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

/// 17 initial steps, log-spaced on [1e-2, 1e2].
std::vector<double> step_grid() {
  std::vector<double> s;
  for (int k = 0; k <= 16; ++k) s.push_back(std::pow(10.0, -2.0 + k * 0.25));
  return s;
}

Hyperparams params(double eps, double kappa) {
  Hyperparams hp;
  hp.epsilon = eps;
  hp.kappa = kappa;
  hp.cost_norm = NormKind::LInf;
  hp.solver.iterations = kSubgradientIterations;
  return hp;
}

struct LpInstance {
  Dataset train;
  Dataset test;
  double eps = 0.0;
  double kappa = 0.0;
};

std::vector<LpInstance> lp_instances() {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> n_dist(6, 12);
  std::uniform_int_distribution<int> p_dist(2, 3);
  std::uniform_real_distribution<double> log_eps(-2.0, -1.0);
  std::uniform_real_distribution<double> kappa_dist(0.25, 1.0);
  std::vector<LpInstance> out;
  for (int i = 0; i < 30; ++i) {
    GeneratorSpec spec;
    spec.classes = 3;
    spec.features = p_dist(rng);
    spec.samples = n_dist(rng);
    spec.class_sep = 3.0;
    spec.variance = 1.0;
    spec.seed = rng();
    auto [train, test] = generate_hypercube_pair(spec, 500);
    out.push_back({train, test, std::pow(10.0, log_eps(rng)), kappa_dist(rng)});
  }
  return out;
}

double lp_optimum(const Dataset& d, double eps, double kappa) {
  return solve_lp(build_lp(d, params(eps, kappa)).model).objective;
}

SweepConfig load_experiment(const fs::path& config_dir, const std::string& name,
                            const fs::path& work_dir) {
  SweepConfig cfg = load_sweep_config(config_dir / (name + ".json"));
  cfg.output_dir = (work_dir / name).string();
  return cfg;
}

double peak(const SweepResult& r, const std::string& model) {
  return peak_cell(r, model).mean_test;
}

Outcome sweep_gap(const SweepConfig& cfg, const char* what,
                  const std::function<bool(double)>& ok,
                  SweepResult* keep = nullptr) {
  SweepResult r = run_sweep(cfg, default_thread_count());
  write_sweep_outputs(r, cfg.output_dir);
  if (!r.failures.empty()) {
    return {false, fmt("%zu failed cells", r.failures.size())};
  }
  const double w = peak(r, "wdr-msvm");
  const double o = peak(r, "dr-ova");
  if (keep != nullptr) *keep = std::move(r);
  return {ok(w - o), fmt("%s: wdr-msvm %.2f%%, dr-ova %.2f%%, gap %+.2f points", what,
                         100 * w, 100 * o, 100 * (w - o))};
}

Outcome criterion_remark() {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> n_dist(20, 40);
  std::uniform_real_distribution<double> log_eps(-2.0, -1.0);
  const std::vector<double> steps = default_step_grid();
  double worst_rel = 0.0;
  double worst_mccr = 0.0;
  for (int i = 0; i < 10; ++i) {
    GeneratorSpec spec;
    spec.classes = 3;
    spec.features = 2;
    spec.samples = n_dist(rng);
    spec.seed = rng();
    auto [train, test] = generate_hypercube_pair(spec, 500);
    const double eps = std::pow(10.0, log_eps(rng));
    const LinearModel big = fit_best_step(train, params(eps, 1e6), steps).model;
    const LinearModel reg = fit_best_step(train, params(eps, kInfinity), steps).model;
    const double rel = std::abs(big.objective - reg.objective) / std::abs(reg.objective);
    const double mb = accuracy(predict_all(big.M, test.features()), test.label_indices());
    const double mr = accuracy(predict_all(reg.M, test.features()), test.label_indices());
    worst_rel = std::max(worst_rel, rel);
    worst_mccr = std::max(worst_mccr, std::abs(mb - mr));
  }
  return {worst_rel <= kRemarkRelTol && worst_mccr <= kRemarkMccrTol,
          fmt("worst relative objective gap %.3g, worst mCCR gap %.2f points",
              worst_rel, 100 * worst_mccr)};
}

Outcome criterion_lp(const std::vector<LpInstance>& inst) {
  const std::vector<double> steps = step_grid();
  int bad_obj = 0;
  int bad_agree = 0;
  double worst_gap = 0.0;
  double worst_agree = 1.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const LpInstance& in = inst[i];
    const Hyperparams hp = params(in.eps, in.kappa);
    const WdrLp lp = build_lp(in.train, hp);
    const LpSolution sol = solve_lp(lp.model);
    const LinearModel exact = extract_model(lp, sol);
    const LinearModel sub = fit_best_step(in.train, hp, steps).model;
    const double gap = std::abs(sub.objective - sol.objective);
    const std::vector<int> a = predict_all(exact.M, in.test.features());
    const std::vector<int> b = predict_all(sub.M, in.test.features());
    const double agree = accuracy(a, b);
    worst_gap = std::max(worst_gap, gap);
    worst_agree = std::min(worst_agree, agree);
    if (gap > kLpObjectiveTol) ++bad_obj;
    if (agree < kAgreement) ++bad_agree;
    std::printf("  instance %2zu N=%2d P=%d eps=%.4f kappa=%.3f lp=%.6f sub=%.6f agree=%.1f%%\n",
                i, in.train.sample_count(), in.train.feature_count(), in.eps,
                in.kappa, sol.objective, sub.objective, 100 * agree);
  }
  return {bad_obj == 0 && bad_agree == 0,
          fmt("objective gap > 1e-2 on %d/30 (worst %.3g), agreement < 95%% on %d/30 (worst %.1f%%)",
              bad_obj, worst_gap, bad_agree, 100 * worst_agree)};
}

Outcome criterion_duality(const std::vector<LpInstance>& inst) {
  int bad = 0;
  double worst = 0.0;
  for (const LpInstance& in : inst) {
    const Hyperparams hp = params(in.eps, in.kappa);
    const WdrLp lp = build_lp(in.train, hp);
    const LpSolution sol = solve_lp(lp.model);
    const LinearModel m = extract_model(lp, sol);
    const double risk = worst_case_risk(m.M, in.train, in.eps, in.kappa, NormKind::LInf);
    const double gap = std::abs(risk - sol.objective);
    worst = std::max(worst, gap);
    if (gap > kDualityTol) ++bad;
  }
  return {bad == 0, fmt("%d/30 violations, worst gap %.3g", bad, worst)};
}

Outcome criterion_error_bound() {
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<int> n_dist(5, 60);
  std::uniform_int_distribution<int> p_dist(1, 5);
  std::uniform_int_distribution<int> c_dist(3, 6);
  int bad = 0;
  for (int i = 0; i < 100; ++i) {
    const int C = c_dist(rng);
    const Dataset d = testing::random_dataset(rng, n_dist(rng), p_dist(rng), C);
    const Matrix M = testing::random_matrix(rng, C, d.feature_count(), 2.0);
    double loss = 0.0;
    int wrong = 0;
    for (int n = 0; n < d.sample_count(); ++n) {
      const Vector x = d.features().row(n).transpose();
      loss += testing::cs_loss_literal(M, x, testing::basis(d.label(n), C));
      Eigen::Index best = 0;
      (M * x).maxCoeff(&best);
      if (best != d.label(n)) ++wrong;
    }
    loss /= d.sample_count();
    const double err = static_cast<double>(wrong) / d.sample_count();
    if (mean_cs_loss(M, d) < empirical_error(M, d) || loss < err) ++bad;
  }
  return {bad == 0, fmt("%d/100 violations", bad)};
}

Outcome criterion_projection() {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<int> c_dist(2, 4);
  std::uniform_int_distribution<int> p_dist(1, 3);
  std::normal_distribution<double> g(0.0, 2.0);
  int bad_value = 0;
  int bad_feasible = 0;
  double worst = -kInfinity;
  for (int i = 0; i < 50; ++i) {
    const int C = c_dist(rng);
    const int P = p_dist(rng);
    const double lambda0 = g(rng);
    const Matrix M0 = testing::random_matrix(rng, C, P, 2.0);
    const Projection pr = project(lambda0, M0, 1e-12);
    const auto [ol, oM] = testing::dykstra_projection(
        lambda0, M0, testing::column_range_halfspaces(C, P));
    const double mine = testing::projection_value(lambda0, M0, pr.lambda, pr.M);
    const double oracle = testing::projection_value(lambda0, M0, ol, oM);
    worst = std::max(worst, mine - oracle);
    if (mine > oracle + kProjectionTol) ++bad_value;
    const double range = (pr.M.colwise().maxCoeff() - pr.M.colwise().minCoeff()).maxCoeff();
    if (pr.lambda < -kFeasibleTol || range > pr.lambda + kFeasibleTol) ++bad_feasible;
  }
  return {bad_value == 0 && bad_feasible == 0,
          fmt("%d/50 above oracle + 1e-6 (worst excess %.3g), %d/50 infeasible",
              bad_value, worst, bad_feasible)};
}

Outcome criterion_real_data(const fs::path& config_dir, const fs::path& data_dir,
                            const fs::path& work_dir) {
  SweepConfig wine = load_experiment(config_dir, "wine_linear", work_dir);
  wine.models = {ModelKind::WdrMsvm};
  wine.data.csv_path = (data_dir / "wine.csv").string();
  SweepConfig iris = load_experiment(config_dir, "iris_kernel", work_dir);
  iris.models = {ModelKind::KWdrMsvm};
  iris.data.csv_path = (data_dir / "iris.csv").string();

  const SweepResult rw = run_sweep(wine, default_thread_count());
  write_sweep_outputs(rw, wine.output_dir);
  const SweepResult ri = run_sweep(iris, default_thread_count());
  write_sweep_outputs(ri, iris.output_dir);
  if (!rw.failures.empty() || !ri.failures.empty()) {
    return {false, fmt("%zu failed cells", rw.failures.size() + ri.failures.size())};
  }
  const CellAggregate w = peak_cell(rw, "wdr-msvm");
  const CellAggregate k = peak_cell(ri, "kwdr-msvm");
  return {w.mean_test >= kWineFloor && k.mean_test >= kIrisFloor,
          fmt("Wine linear %.2f%% +- %.2f (eps %g, kappa %g), Iris kernel %.2f%% +- %.2f (eps %g, kappa %g)",
              100 * w.mean_test, 100 * w.std_test, w.epsilon, w.kappa,
              100 * k.mean_test, 100 * k.std_test, k.epsilon, k.kappa)};
}

Outcome criterion_monotone(const std::vector<LpInstance>& inst) {
  const std::vector<double> eps_grid{0.0, 1e-3, 1e-2, 1e-1, 1.0};
  const std::vector<double> kappa_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  int bad = 0;
  int checks = 0;
  for (const LpInstance& in : inst) {
    double prev = -kInfinity;
    for (double e : eps_grid) {
      const double v = lp_optimum(in.train, e, in.kappa);
      if (v < prev - kMonotoneTol) ++bad;
      prev = v;
      ++checks;
    }
    prev = kInfinity;
    for (double k : kappa_grid) {
      const double v = lp_optimum(in.train, in.eps, k);
      if (v > prev + kMonotoneTol) ++bad;
      prev = v;
      ++checks;
    }
  }
  return {bad == 0, fmt("%d violations over %d LP solves", bad, checks)};
}

Outcome criterion_determinism(const SweepConfig& cfg, const SweepResult& first) {
  SweepConfig again = cfg;
  again.output_dir = cfg.output_dir + "_repeat";
  const SweepResult second = run_sweep(again, default_thread_count());
  write_sweep_outputs(second, again.output_dir);
  const bool same = format_csv(first.records, false) == format_csv(second.records, false);
  return {same, fmt("%zu records, results CSV %s", second.records.size(),
                    same ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string data_dir = "data";
  std::string config_dir = "configs";
  std::string work_dir = "acceptance_out";
  std::vector<int> only;
  app.add_option("--data-dir", data_dir, "Directory holding iris.csv and wine.csv");
  app.add_option("--config-dir", config_dir, "Directory holding the experiment configs");
  app.add_option("--work-dir", work_dir, "Where sweep outputs are written");
  app.add_option("--only", only, "Run only these criteria (1-10)");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work_dir);

  auto wanted = [&](int c) {
    return only.empty() || std::find(only.begin(), only.end(), c) != only.end();
  };
  int failed = 0;
  auto report = [&](int c, const char* name, const Outcome& o, double seconds) {
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c,
                name, o.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };
  auto run = [&](int c, const char* name, const std::function<Outcome()>& body) {
    if (!wanted(c)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    report(c, name, o, dt.count());
  };

  const SweepConfig imbalanced = load_experiment(config_dir, "experiment1_imbalanced", work_dir);
  SweepResult imbalanced_result;
  bool have_imbalanced = false;
  run(1, "imbalanced advantage", [&] {
    Outcome o = sweep_gap(imbalanced, "imbalanced",
                          [](double g) { return g >= kImbalancedMargin; },
                          &imbalanced_result);
    have_imbalanced = !imbalanced_result.records.empty();
    return o;
  });
  run(2, "balanced parity", [&] {
    return sweep_gap(load_experiment(config_dir, "experiment1_balanced", work_dir),
                     "balanced",
                     [](double g) { return g >= kBalancedLow && g <= kBalancedHigh; });
  });
  run(3, "huge kappa matches regularized", [] { return criterion_remark(); });

  const std::vector<LpInstance> inst = lp_instances();
  run(4, "subgradient vs LP", [&] { return criterion_lp(inst); });
  run(5, "strong duality at LP optimum", [&] { return criterion_duality(inst); });
  run(6, "CS loss bounds error", [] { return criterion_error_bound(); });
  run(7, "projection vs QP oracle", [] { return criterion_projection(); });
  run(8, "real-data floors", [&] {
    return criterion_real_data(config_dir, data_dir, work_dir);
  });
  run(9, "LP monotonicity", [&] { return criterion_monotone(inst); });
  run(10, "sweep determinism", [&] {
    if (!have_imbalanced) {
      imbalanced_result = run_sweep(imbalanced, default_thread_count());
    }
    return criterion_determinism(imbalanced, imbalanced_result);
  });

  std::printf("%s\n", failed == 0 ? "ALL PASS" : fmt("%d criteria failed", failed).c_str());
  return failed == 0 ? 0 : 1;
}
