#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <random>

#include "test_util.hpp"
#include "wdrmsvm/linear_solver.hpp"
#include "wdrmsvm/loss.hpp"
#include "wdrmsvm/reference_solver.hpp"

namespace wdrmsvm {
namespace {

Hyperparams params(double eps, double kappa, NormKind cost = NormKind::LInf) {
  Hyperparams hp;
  hp.epsilon = eps;
  hp.kappa = kappa;
  hp.cost_norm = cost;
  return hp;
}

double lp_optimum(const Dataset& d, const Hyperparams& hp) {
  return solve_lp(build_lp(d, hp).model).objective;
}

// Unregularized Crammer-Singer risk minimization, written independently of
// build_lp: min 1/N sum s_n, s_n >= (Mx)_j - [j == y_n] + 1 - (Mx)_{y_n}.
double min_mean_cs_loss(const Dataset& d) {
  LpModel lp;
  const int C = d.class_count();
  const int P = d.feature_count();
  const int N = d.sample_count();
  for (int c = 0; c < C; ++c) {
    for (int p = 0; p < P; ++p) lp.add_variable("w" + std::to_string(c) + "_" + std::to_string(p), -kInfinity);
  }
  for (int n = 0; n < N; ++n) lp.add_variable("s" + std::to_string(n), -kInfinity, kInfinity, 1.0 / N);
  for (int n = 0; n < N; ++n) {
    const int y = d.label(n);
    for (int j = 0; j < C; ++j) {
      if (j == y) continue;
      std::vector<LpTerm> terms{{C * P + n, 1.0}};
      for (int p = 0; p < P; ++p) {
        terms.push_back({j * P + p, -d.features()(n, p)});
        terms.push_back({y * P + p, d.features()(n, p)});
      }
      lp.add_constraint("r" + std::to_string(n) + "_" + std::to_string(j), terms, Sense::GreaterEqual, 1.0);
    }
    lp.add_constraint("z" + std::to_string(n), {{C * P + n, 1.0}}, Sense::GreaterEqual, 0.0);
  }
  return solve_lp(lp).objective;
}

// Minimum of c^T x over {A x <= b, |x_i| <= 5} by enumerating vertices.
double vertex_enumeration(const Matrix& A, const Vector& b, const Vector& c) {
  const int n = static_cast<int>(c.size());
  Matrix G(A.rows() + 2 * n, n);
  Vector h(A.rows() + 2 * n);
  G.topRows(A.rows()) = A;
  h.head(A.rows()) = b;
  for (int i = 0; i < n; ++i) {
    G.row(A.rows() + 2 * i) = testing::basis(i, n).transpose();
    G.row(A.rows() + 2 * i + 1) = -testing::basis(i, n).transpose();
    h[A.rows() + 2 * i] = 5.0;
    h[A.rows() + 2 * i + 1] = 5.0;
  }
  const int m = static_cast<int>(G.rows());
  double best = kInfinity;
  std::vector<int> pick(static_cast<std::size_t>(n));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      Matrix S(n, n);
      Vector r(n);
      for (int k = 0; k < n; ++k) {
        S.row(k) = G.row(pick[static_cast<std::size_t>(k)]);
        r[k] = h[pick[static_cast<std::size_t>(k)]];
      }
      Eigen::FullPivLU<Matrix> lu(S);
      if (!lu.isInvertible()) return;
      const Vector x = lu.solve(r);
      if (((G * x - h).array() <= 1e-9).all()) best = std::min(best, c.dot(x));
      return;
    }
    for (int k = start; k < m; ++k) {
      pick[static_cast<std::size_t>(depth)] = k;
      rec(k + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

TEST(BuildLp, TinyInstanceCounts) {
  const Matrix X = (Matrix(2, 1) << 1.0, -0.5).finished();
  const std::vector<int> y{0, 2};
  const Dataset d = Dataset::from_indices(X, y, 3);
  // LInf cost: 3 M + lambda + 2 s + 3 pairs * 1 t; 2*9 loss rows + 3*(2+1) norm rows.
  const WdrLp linf = build_lp(d, params(0.1, 0.5));
  EXPECT_EQ(linf.model.variables.size(), 9u);
  EXPECT_EQ(linf.model.constraints.size(), 27u);
  EXPECT_EQ(linf.layout.variable_count(), 9);
  EXPECT_EQ(linf.layout.constraint_count(), 27);
  // L1 cost: no auxiliaries; 18 loss rows + 3 pairs * 2 rows.
  const WdrLp l1 = build_lp(d, params(0.1, 0.5, NormKind::L1));
  EXPECT_EQ(l1.model.variables.size(), 6u);
  EXPECT_EQ(l1.model.constraints.size(), 24u);
  EXPECT_NO_THROW(linf.model.validate());
  EXPECT_GE(linf.model.find_variable("t_1_2_1"), 0);
  EXPECT_GE(linf.model.find_variable("M_3_1"), 0);
}

TEST(BuildLp, RejectsInfiniteKappa) {
  std::mt19937_64 rng(1);
  EXPECT_THROW(build_lp(testing::random_dataset(rng, 4, 2, 3), params(0.1, kInfinity)),
               UnsupportedConfiguration);
}

TEST(BuildLp, ZeroRadiusLargeKappaIsCsRiskMinimum) {
  std::mt19937_64 rng(2);
  for (int inst = 0; inst < 5; ++inst) {
    const Dataset d = testing::random_dataset(rng, 7, 2, 3);
    EXPECT_NEAR(lp_optimum(d, params(0.0, 50.0)), min_mean_cs_loss(d), 1e-7);
  }
}

TEST(BuildLp, DuplicatedSamplesKeepOptimum) {
  std::mt19937_64 rng(3);
  const Dataset d = testing::random_dataset(rng, 6, 2, 3);
  std::vector<int> rows;
  for (int n = 0; n < 6; ++n) rows.insert(rows.end(), {n, n});
  EXPECT_NEAR(lp_optimum(d, params(0.1, 0.5)), lp_optimum(d.subset(rows), params(0.1, 0.5)), 1e-8);
}

TEST(SolveLp, SingleBound) {
  LpModel lp;
  lp.add_variable("x", -kInfinity, kInfinity, 1.0);
  lp.add_constraint("c", {{0, 1.0}}, Sense::GreaterEqual, 3.0);
  EXPECT_NEAR(solve_lp(lp).objective, 3.0, 1e-12);
}

TEST(SolveLp, TextbookMaximization) {
  LpModel lp;
  lp.add_variable("x", 0.0, kInfinity, -3.0);
  lp.add_variable("y", 0.0, kInfinity, -5.0);
  lp.add_constraint("a", {{0, 1.0}}, Sense::LessEqual, 4.0);
  lp.add_constraint("b", {{1, 2.0}}, Sense::LessEqual, 12.0);
  lp.add_constraint("c", {{0, 3.0}, {1, 2.0}}, Sense::LessEqual, 18.0);
  const LpSolution s = solve_lp(lp);
  EXPECT_NEAR(s.objective, -36.0, 1e-9);
  EXPECT_NEAR(s.values[0], 2.0, 1e-9);
  EXPECT_NEAR(s.values[1], 6.0, 1e-9);
}

TEST(SolveLp, EqualityAndBoxBounds) {
  LpModel lp;
  lp.add_variable("x", 1.0, 2.0, 1.0);
  lp.add_variable("y", -kInfinity, kInfinity, 1.0);
  lp.add_constraint("e", {{0, 1.0}, {1, -1.0}}, Sense::Equal, 0.5);
  const LpSolution s = solve_lp(lp);
  EXPECT_NEAR(s.objective, 1.5, 1e-12);
  EXPECT_LE(s.primal_residual, 1e-8);
}

TEST(SolveLp, ReportsInfeasibleUnboundedAndCapacity) {
  LpModel bad;
  bad.add_variable("x", 0.0, kInfinity, 1.0);
  bad.add_constraint("c", {{0, 1.0}}, Sense::LessEqual, -1.0);
  EXPECT_THROW(solve_lp(bad), InfeasibleError);

  LpModel unb;
  unb.add_variable("x", -kInfinity, kInfinity, 1.0);
  unb.add_constraint("c", {{0, 1.0}}, Sense::LessEqual, 1.0);
  EXPECT_THROW(solve_lp(unb), UnboundedError);

  LpModel big;
  big.add_variable("x", 0.0, kInfinity, 1.0);
  for (int k = 0; k < 20; ++k) big.add_constraint("c" + std::to_string(k), {{0, 1.0}}, Sense::GreaterEqual, k);
  EXPECT_THROW(solve_lp(big, 10), CapacityError);
}

TEST(SolveLp, MatchesVertexEnumeration) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 2;
    const int m = 3 + trial % 4;
    const Matrix A = testing::random_matrix(rng, m, n);
    Vector b(m);
    for (int i = 0; i < m; ++i) b[i] = u(rng);  // origin stays feasible
    const Vector c = testing::random_vector(rng, n);
    LpModel lp;
    for (int i = 0; i < n; ++i) lp.add_variable("x" + std::to_string(i), -5.0, 5.0, c[i]);
    for (int i = 0; i < m; ++i) {
      std::vector<LpTerm> terms;
      for (int j = 0; j < n; ++j) terms.push_back({j, A(i, j)});
      lp.add_constraint("r" + std::to_string(i), terms, Sense::LessEqual, b[i]);
    }
    EXPECT_NEAR(solve_lp(lp).objective, vertex_enumeration(A, b, c), 1e-9) << "trial " << trial;
  }
}

TEST(SolveLp, SingleSampleIsSeparable) {
  const Matrix X = (Matrix(1, 2) << 0.3, -1.2).finished();
  const std::vector<int> y{1};
  const Dataset d = Dataset::from_indices(X, y, 3);
  const WdrLp lp = build_lp(d, params(0.0, 0.5));
  const LpSolution s = solve_lp(lp.model);
  EXPECT_NEAR(s.objective, 0.0, 1e-9);
  EXPECT_NEAR(cs_loss(extract_model(lp, s).M, X.row(0).transpose(), 1), 0.0, 1e-9);
}

TEST(SolveLp, OptimumEqualsWorstCaseRiskAtSolution) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int inst = 0; inst < 30; ++inst) {
    const int N = 4 + inst % 9;
    const int P = 1 + inst % 3;
    const Dataset d = testing::random_dataset(rng, N, P, 3);
    const Hyperparams hp = params(0.01 + 0.2 * u(rng), 0.1 + u(rng), inst % 4 == 3 ? NormKind::L1 : NormKind::LInf);
    const WdrLp lp = build_lp(d, hp);
    const LpSolution s = solve_lp(lp.model);
    EXPECT_LE(s.primal_residual, 1e-8);
    const LinearModel m = extract_model(lp, s);
    EXPECT_NEAR(worst_case_risk(m.M, d, hp.epsilon, hp.kappa, hp.cost_norm), s.objective, 1e-6)
        << "instance " << inst;
    EXPECT_NEAR(objective(m.lambda, m.M, d, hp.epsilon, hp.kappa), s.objective, 1e-6);
  }
}

TEST(LpFormat, RoundTripIsStructuralIdentity) {
  std::mt19937_64 rng(6);
  for (NormKind cost : {NormKind::LInf, NormKind::L1}) {
    const LpModel m = build_lp(testing::random_dataset(rng, 5, 2, 3), params(0.1, 0.7, cost)).model;
    const LpModel back = parse_lp(format_lp(m));
    EXPECT_TRUE(structurally_equal(m, back));
  }
}

TEST(LpFormat, BoundsOnlyModel) {
  LpModel m;
  m.add_variable("x", -1.0, 4.0, 2.0);
  m.add_variable("y", -kInfinity, kInfinity, 0.0);
  const std::string text = format_lp(m);
  EXPECT_NE(text.find("Minimize"), std::string::npos);
  EXPECT_NE(text.find("Bounds"), std::string::npos);
  EXPECT_NE(text.find("End"), std::string::npos);
  EXPECT_TRUE(structurally_equal(m, parse_lp(text)));
}

TEST(LpFormat, FileRoundTrip) {
  std::mt19937_64 rng(7);
  const LpModel m = build_lp(testing::random_dataset(rng, 4, 2, 3), params(0.2, 0.3)).model;
  const auto path = std::filesystem::temp_directory_path() / "wdrmsvm_roundtrip.lp";
  export_lp(m, path);
  EXPECT_TRUE(structurally_equal(m, read_lp(path)));
  std::filesystem::remove(path);
}

TEST(LpFormat, MalformedTextThrows) {
  EXPECT_THROW(parse_lp("Minimize\n obj: x +\nEnd\n"), ParseError);
  EXPECT_THROW(parse_lp("Subject To\n c: x >= 1\n"), ParseError);
}

TEST(WorstCaseRisk, LimitCases) {
  std::mt19937_64 rng(8);
  const Dataset d = testing::random_dataset(rng, 9, 2, 3);
  const Matrix M = testing::random_matrix(rng, 3, 2);
  const double mean = mean_cs_loss(M, d);
  EXPECT_NEAR(worst_case_risk(M, d, 0.0, 1.0, NormKind::LInf), mean, 1e-12);
  const double lmin = max_pair_modulus(M, NormKind::LInf);
  EXPECT_NEAR(worst_case_risk(M, d, 0.3, kInfinity, NormKind::LInf), lmin * 0.3 + mean, 1e-12);
  std::vector<double> a;
  std::vector<double> b;
  loss_profile(M, d, a, b);
  double zero_kappa = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) zero_kappa += std::max(a[n], b[n]);
  EXPECT_NEAR(worst_case_risk(M, d, 0.0, 0.0, NormKind::LInf), zero_kappa / 9.0, 1e-12);
}

TEST(WorstCaseRisk, MatchesLambdaGrid) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int inst = 0; inst < 10; ++inst) {
    const Dataset d = testing::random_dataset(rng, 6, 2, 3);
    const Matrix M = testing::random_matrix(rng, 3, 2, 0.3);
    const double eps = 0.05 + 0.3 * u(rng);
    const double kappa = 0.2 + u(rng);
    const NormKind cost = inst % 2 == 0 ? NormKind::LInf : NormKind::L1;
    const double lmin = max_pair_modulus(M, cost);
    double grid = kInfinity;
    for (double l = lmin; l <= lmin + 50.0; l += 1e-4) {
      grid = std::min(grid, testing::objective_literal(l, M, d, eps, kappa));
    }
    EXPECT_NEAR(worst_case_risk(M, d, eps, kappa, cost), grid, 1e-3);
    const WorstCase wc = worst_case(M, d, eps, kappa, cost);
    EXPECT_GE(wc.lambda, lmin);
    EXPECT_NEAR(testing::objective_literal(wc.lambda, M, d, eps, kappa), wc.risk, 1e-12);
  }
}

TEST(WorstCaseRisk, BoundsNominalRisk) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Dataset d = testing::random_dataset(rng, 8, 3, 4);
    const Matrix M = testing::random_matrix(rng, 4, 3);
    EXPECT_GE(worst_case_risk(M, d, u(rng), u(rng), NormKind::LInf), mean_cs_loss(M, d) - 1e-12);
  }
}

TEST(LpMonotonicity, EpsilonAndKappa) {
  std::mt19937_64 rng(11);
  for (int inst = 0; inst < 5; ++inst) {
    const Dataset d = testing::random_dataset(rng, 8, 2, 3);
    double prev = -kInfinity;
    for (double eps : {1e-6, 1e-3, 1e-1, 1.0}) {
      const double v = lp_optimum(d, params(eps, 0.5));
      EXPECT_GE(v, prev - 1e-9);
      prev = v;
    }
    prev = kInfinity;
    for (double kappa : {0.0, 0.25, 0.5, 1.0, 2.0}) {
      const double v = lp_optimum(d, params(0.1, kappa));
      EXPECT_LE(v, prev + 1e-9);
      prev = v;
    }
  }
}

}  // namespace
}  // namespace wdrmsvm
