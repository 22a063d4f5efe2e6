#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "wdrmsvm/baselines.hpp"
#include "wdrmsvm/data.hpp"
#include "wdrmsvm/kernel.hpp"
#include "wdrmsvm/linear_solver.hpp"
#include "wdrmsvm/loss.hpp"

namespace wdrmsvm {
namespace {

Hyperparams params(double eps, double kappa, int iterations = 500,
                   NormKind cost = NormKind::LInf) {
  Hyperparams hp;
  hp.epsilon = eps;
  hp.kappa = kappa;
  hp.cost_norm = cost;
  hp.solver.iterations = iterations;
  return hp;
}

Dataset blobs(int per_class, double sep, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.classes = 3;
  spec.features = 2;
  spec.samples = 3 * per_class;
  spec.class_sep = sep;
  spec.variance = 0.05;
  spec.seed = seed;
  Dataset d = generate_hypercube(spec);
  // Center so that class means are separable without a bias term.
  const Eigen::RowVectorXd mean = d.features().colwise().mean();
  return d.with_features(d.features().rowwise() - mean);
}

double hinge_literal(const Vector& w, double lambda, const Dataset& d, int cls,
                     double eps, double kappa) {
  double total = 0.0;
  for (int n = 0; n < d.sample_count(); ++n) {
    const double z = d.label(n) == cls ? 1.0 : -1.0;
    const double m = z * d.features().row(n).dot(w);
    total += std::max({0.0, 1.0 - m, 1.0 + m - lambda * kappa});
  }
  return lambda * eps + total / d.sample_count();
}

TEST(OvaObjective, MatchesLiteral) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset d = testing::random_dataset(rng, 9, 3, 3);
    const Vector w = testing::random_vector(rng, 3);
    EXPECT_NEAR(ova_objective(w, 0.7, d, trial % 3, 0.2, 0.5),
                hinge_literal(w, 0.7, d, trial % 3, 0.2, 0.5), 1e-12);
  }
}

TEST(DrOva, SeparableBlobsTrainPerfectly) {
  const Dataset d = blobs(10, 3.0, 4);
  OvaOptions opts;
  opts.steps = {0.1, 1.0, 10.0};
  const OvaModel m = fit_dr_ova(d, params(1e-6, 0.5, 1000), opts);
  EXPECT_EQ(predict_ova_all(m, d.features()), d.label_indices());
  for (int c = 0; c < 3; ++c) {
    EXPECT_GE(m.lambdas[static_cast<std::size_t>(c)] + 1e-6,
              dual_norm(m.W.row(c).transpose(), NormKind::LInf));
  }
}

TEST(DrOva, HugeEpsCollapsesToFirstClass) {
  std::mt19937_64 rng(2);
  const Dataset d = testing::random_dataset(rng, 12, 2, 3);
  OvaOptions opts;
  opts.steps = {1e-6};
  const OvaModel m = fit_dr_ova(d, params(1e6, 0.5, 200), opts);
  EXPECT_LT(m.W.cwiseAbs().maxCoeff(), 1e-4);
  const Matrix T = testing::random_matrix(rng, 20, 2);
  // Scores within round-off of zero; compare against the tie-break rule only
  // when the model is exactly zero.
  const OvaModel simplex = fit_dr_ova(d, params(1e6, 0.5), {OvaSolver::Simplex, {}, 1});
  EXPECT_TRUE(simplex.W.isZero(1e-12));
  for (int p : predict_ova_all(simplex, T)) EXPECT_EQ(p, 0);
}

TEST(DrOva, ClassPermutationPermutesWeights) {
  std::mt19937_64 rng(3);
  const Dataset d = testing::random_dataset(rng, 10, 2, 3);
  const std::vector<int> perm{2, 0, 1};  // old class c becomes perm[c]
  std::vector<int> relabeled;
  for (int n = 0; n < d.sample_count(); ++n) relabeled.push_back(perm[static_cast<std::size_t>(d.label(n))]);
  const Dataset dp = Dataset::from_indices(d.features(), relabeled, 3);
  const Hyperparams hp = params(0.05, 0.5, 300);
  const OvaModel a = fit_dr_ova(d, hp);
  const OvaModel b = fit_dr_ova(dp, hp);
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(a.W.row(c), b.W.row(perm[static_cast<std::size_t>(c)]));
  }
}

TEST(DrOva, SubgradientMatchesSimplexPerClass) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int inst = 0; inst < 10; ++inst) {
    const Dataset d = testing::random_dataset(rng, 6 + inst % 7, 2 + inst % 2, 3);
    const NormKind cost = inst % 3 == 2 ? NormKind::L1 : NormKind::LInf;
    Hyperparams hp = params(0.01 + 0.1 * u(rng), 0.25 + 0.75 * u(rng), 2000, cost);
    for (int c = 0; c < 3; ++c) {
      const OvaClassFit lp = fit_ova_class_simplex(d, c, hp);
      double best = kInfinity;
      for (double step : {0.1, 1.0, 10.0}) {
        hp.solver.initial_step = step;
        best = std::min(best, fit_ova_class_subgradient(d, c, hp).objective);
      }
      EXPECT_NEAR(best, lp.objective, 1e-2) << "instance " << inst << " class " << c;
      EXPECT_GE(best, lp.objective - 1e-9);
      EXPECT_NEAR(ova_objective(lp.w, lp.lambda, d, c, hp.epsilon, hp.kappa), lp.objective, 1e-8);
    }
  }
}

TEST(DrOva, LpShape) {
  std::mt19937_64 rng(5);
  const Dataset d = testing::random_dataset(rng, 5, 3, 3);
  const LpModel linf = build_ova_lp(d, 0, params(0.1, 0.5));
  EXPECT_NO_THROW(linf.validate());
  EXPECT_EQ(linf.variables.size(), 3u + 1u + 5u + 3u);
  const LpModel l1 = build_ova_lp(d, 0, params(0.1, 0.5, 10, NormKind::L1));
  EXPECT_EQ(l1.variables.size(), 3u + 1u + 5u);
}

TEST(KernelOva, LinearKernelTracksLinearOva) {
  std::mt19937_64 rng(6);
  const Dataset d = testing::random_dataset(rng, 10, 2, 3);
  const KernelOvaModel m = fit_kernel_ova(d, params(0.05, 0.5, 500), KernelConfig::linear(), {0.1, 1.0});
  const Matrix K = gram(d.features(), KernelConfig::linear()).K;
  for (int c = 0; c < 3; ++c) {
    const Vector a = m.alpha.row(c).transpose();
    EXPECT_GE(m.lambdas[static_cast<std::size_t>(c)] + 1e-9, h_norm(a, K));
  }
  EXPECT_EQ(predict_kernel_ova_all(m, d.features()).size(), 10u);
  EXPECT_LT(m.total_objective(), 3.0 + 1e-12);
}

TEST(Rmlr, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset d = testing::random_dataset(rng, 8, 3, 4);
    const Matrix W = testing::random_matrix(rng, 4, 3);
    const double reg = 0.01 * trial;
    const Matrix g = rmlr_gradient(W, d, reg);
    const double h = 1e-6;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 3; ++j) {
        Matrix Wp = W;
        Matrix Wm = W;
        Wp(i, j) += h;
        Wm(i, j) -= h;
        const double fd = (rmlr_loss(Wp, d, reg) - rmlr_loss(Wm, d, reg)) / (2 * h);
        EXPECT_NEAR(g(i, j), fd, 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST(Rmlr, HugeRegularizationGivesUniformProbabilities) {
  std::mt19937_64 rng(8);
  const Dataset d = testing::random_dataset(rng, 12, 2, 3);
  const RmlrFit fit = fit_rmlr(d, 1e6);
  EXPECT_LT(fit.W.cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_NEAR(fit.loss, std::log(3.0), 1e-4);
}

TEST(Rmlr, SeparableToyTrainsPerfectly) {
  const Dataset d = blobs(10, 3.0, 9);
  const RmlrFit fit = fit_rmlr(d, 1e-4);
  EXPECT_DOUBLE_EQ(empirical_error(fit.W, d), 0.0);
  EXPECT_TRUE(fit.converged || fit.iterations == 2000);
}

TEST(Rmlr, ConvergesOnRegularizedProblem) {
  std::mt19937_64 rng(10);
  const Dataset d = testing::random_dataset(rng, 20, 2, 3);
  const RmlrFit fit = fit_rmlr(d, 0.1);
  EXPECT_TRUE(fit.converged);
  EXPECT_LE(fit.grad_norm, 1e-4);
  EXPECT_NEAR(fit.grad_norm, rmlr_gradient(fit.W, d, 0.1).norm(), 1e-12);
}

TEST(RMsvm, AliasOfRegularizedFit) {
  std::mt19937_64 rng(11);
  const Dataset d = testing::random_dataset(rng, 10, 2, 3);
  SolverOptions opts;
  opts.iterations = 200;
  const LinearModel a = fit_rmsvm(d, 0.1, NormKind::LInf, opts);
  const LinearModel b = fit_regularized(d, 0.1, NormKind::LInf, opts);
  EXPECT_EQ(a.M, b.M);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(RMsvm, ZeroEpsIsPlainRiskMinimization) {
  std::mt19937_64 rng(12);
  const Dataset d = testing::random_dataset(rng, 10, 2, 3);
  SolverOptions opts;
  opts.iterations = 300;
  const LinearModel m = fit_rmsvm(d, 0.0, NormKind::LInf, opts);
  EXPECT_NEAR(m.objective, mean_cs_loss(m.M, d), 1e-12);
}

TEST(RMsvm, NotAboveRobustObjective) {
  std::mt19937_64 rng(13);
  for (int inst = 0; inst < 3; ++inst) {
    const Dataset d = testing::random_dataset(rng, 10, 2, 3);
    const std::vector<double> steps{0.1, 1.0, 10.0};
    const double robust = fit_best_step(d, params(0.05, 0.5, 1000), steps).model.objective;
    const double reg = fit_best_step(d, params(0.05, kInfinity, 1000), steps).model.objective;
    EXPECT_LE(reg, robust + 1e-2);
  }
}

}  // namespace
}  // namespace wdrmsvm
