#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <set>

#include "test_util.hpp"
#include "wdrmsvm/data.hpp"
#include "wdrmsvm/log.hpp"

namespace wdrmsvm {
namespace {

const std::filesystem::path kDataDir = std::filesystem::path(WDRMSVM_SOURCE_DIR) / "data";

struct WarningCounter {
  int count = 0;
  ScopedWarningSink sink{[this](const std::string&) { ++count; }};
};

GeneratorSpec spec(int C, int P, int N, std::vector<double> weights = {}) {
  GeneratorSpec s;
  s.classes = C;
  s.features = P;
  s.samples = N;
  s.class_weights = std::move(weights);
  s.seed = 17;
  return s;
}

TEST(Generator, ImbalancedCounts) {
  const Dataset d = generate_hypercube(spec(4, 3, 200, {0.45, 0.25, 0.25, 0.05}));
  EXPECT_EQ(d.class_counts(), (std::vector<int>{90, 50, 50, 10}));
  EXPECT_EQ(d.sample_count(), 200);
  EXPECT_EQ(d.feature_count(), 3);
}

TEST(Generator, UniformCounts) {
  EXPECT_EQ(generate_hypercube(spec(3, 2, 99)).class_counts(), (std::vector<int>{33, 33, 33}));
}

TEST(Generator, LargestRemainderRounding) {
  EXPECT_EQ(apportion(10, {1.0 / 3, 1.0 / 3, 1.0 / 3}), (std::vector<int>{4, 3, 3}));
  EXPECT_EQ(apportion(7, {0.5, 0.25, 0.25}), (std::vector<int>{3, 2, 2}));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> w(4);
    double total = 0.0;
    for (double& x : w) total += (x = u(rng));
    for (double& x : w) x /= total;
    const int N = 1 + trial * 7;
    const std::vector<int> counts = apportion(N, w);
    int sum = 0;
    for (std::size_t c = 0; c < w.size(); ++c) {
      sum += counts[c];
      EXPECT_LT(std::abs(counts[c] - N * w[c]), 1.0);
    }
    EXPECT_EQ(sum, N);
  }
}

TEST(Generator, TinyVarianceSitsOnVertices) {
  GeneratorSpec s = spec(4, 2, 40);
  s.variance = 1e-24;
  const Dataset d = generate_hypercube(s);
  std::set<std::pair<double, double>> vertices;
  for (int n = 0; n < d.sample_count(); ++n) {
    for (int p = 0; p < 2; ++p) {
      const double x = d.features()(n, p);
      EXPECT_TRUE(std::abs(x) < 1e-9 || std::abs(x - 3.0) < 1e-9);
    }
    vertices.insert({std::round(d.features()(n, 0)), std::round(d.features()(n, 1))});
  }
  EXPECT_EQ(vertices.size(), 4u);
}

TEST(Generator, TooManyClassesForVertices) {
  EXPECT_THROW(generate_hypercube(spec(5, 2, 50)), CapacityError);
  EXPECT_THROW(hypercube_vertices(9, 3, 3.0, 1), CapacityError);
}

TEST(Generator, RejectsBadWeights) {
  EXPECT_THROW(generate_hypercube(spec(3, 2, 30, {0.5, 0.5, 0.5})), InvalidArgument);
  EXPECT_THROW(generate_hypercube(spec(3, 2, 30, {0.5, 0.5})), InvalidArgument);
}

TEST(Generator, VerticesAreDistinctCubeCorners) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix V = hypercube_vertices(4, 3, 3.0, seed);
    std::set<std::vector<double>> seen;
    for (int c = 0; c < 4; ++c) {
      std::vector<double> row;
      for (int p = 0; p < 3; ++p) {
        EXPECT_TRUE(V(c, p) == 0.0 || V(c, p) == 3.0);
        row.push_back(V(c, p));
      }
      seen.insert(row);
    }
    EXPECT_EQ(seen.size(), 4u);
  }
}

TEST(Generator, DeterministicUnderSeed) {
  const Dataset a = generate_hypercube(spec(3, 3, 60));
  const Dataset b = generate_hypercube(spec(3, 3, 60));
  EXPECT_EQ(a.features(), b.features());
  EXPECT_EQ(a.label_indices(), b.label_indices());
  GeneratorSpec other = spec(3, 3, 60);
  other.seed = 18;
  EXPECT_NE(generate_hypercube(other).features(), a.features());
}

TEST(Generator, ClassMeansConverge) {
  const Matrix V = hypercube_vertices(4, 3, 3.0, 5);
  const Dataset d = sample_blobs(V, {20000, 20000, 20000, 20000}, 1.0, 6);
  for (int c = 0; c < 4; ++c) {
    Vector mean = Vector::Zero(3);
    int n_c = 0;
    for (int n = 0; n < d.sample_count(); ++n) {
      if (d.label(n) != c) continue;
      mean += d.features().row(n).transpose();
      ++n_c;
    }
    mean /= n_c;
    EXPECT_LE((mean - V.row(c).transpose()).cwiseAbs().maxCoeff(), 0.05);
  }
}

TEST(Generator, PairSharesVertexLayout) {
  GeneratorSpec s = spec(3, 2, 30);
  s.variance = 1e-24;
  const auto [train, test] = generate_hypercube_pair(s, 60);
  EXPECT_EQ(test.class_counts(), (std::vector<int>{20, 20, 20}));
  for (int n = 0; n < 3; ++n) {
    const int c = train.label(n * 10);
    for (int m = 0; m < test.sample_count(); ++m) {
      if (test.label(m) != c) continue;
      EXPECT_LE((test.features().row(m) - train.features().row(n * 10)).cwiseAbs().maxCoeff(), 1e-9);
      break;
    }
  }
}

TEST(Csv, ThreeRowExample) {
  const CsvData c = parse_csv("f1,f2,label\n1,2,a\n3,4,b\n5,6,a\n", "label");
  EXPECT_EQ(c.data.class_count(), 2);
  EXPECT_EQ(c.data.label_indices(), (std::vector<int>{0, 1, 0}));
  EXPECT_EQ(c.class_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(c.feature_names, (std::vector<std::string>{"f1", "f2"}));
  EXPECT_DOUBLE_EQ(c.data.features()(2, 1), 6.0);
}

TEST(Csv, LabelColumnAnywhere) {
  const CsvData c = parse_csv("y,x\nu,1\nv,2\n", "y");
  EXPECT_EQ(c.data.feature_count(), 1);
  EXPECT_DOUBLE_EQ(c.data.features()(1, 0), 2.0);
}

TEST(Csv, IrisShape) {
  const CsvData c = load_csv(kDataDir / "iris.csv", "species");
  EXPECT_EQ(c.data.sample_count(), 150);
  EXPECT_EQ(c.data.feature_count(), 4);
  EXPECT_EQ(c.data.class_count(), 3);
}

TEST(Csv, WineShape) {
  const CsvData c = load_csv(kDataDir / "wine.csv", "cultivar");
  EXPECT_EQ(c.data.sample_count(), 178);
  EXPECT_EQ(c.data.feature_count(), 13);
  EXPECT_EQ(c.data.class_count(), 3);
}

TEST(Csv, MissingCellDropsRowWithWarning) {
  WarningCounter w;
  const CsvData c = parse_csv("a,b,label\n1,2,x\nNaN,3,y\n4,5,y\n", "label");
  EXPECT_EQ(c.data.sample_count(), 2);
  EXPECT_EQ(c.dropped_rows, 1);
  EXPECT_GE(w.count, 1);
}

TEST(Csv, NonNumericCellNamesLine) {
  try {
    parse_csv("a,b,label\n1,2,x\n3,oops,y\n", "label");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Csv, MissingLabelColumn) {
  EXPECT_THROW(parse_csv("a,b\n1,2\n", "label"), ParseError);
}

TEST(Csv, SaveLoadRoundTrip) {
  std::mt19937_64 rng(7);
  const Dataset d = testing::random_dataset(rng, 25, 4, 3, 1e3);
  const auto path = std::filesystem::temp_directory_path() / "wdrmsvm_roundtrip.csv";
  save_csv(d, path, {}, {"c0", "c1", "c2"}, "target");
  const CsvData back = load_csv(path, "target");
  std::filesystem::remove(path);
  EXPECT_LE((back.data.features() - d.features()).cwiseAbs().maxCoeff(), 1e-12);
  // First-appearance order may relabel classes; names map them back.
  for (int n = 0; n < d.sample_count(); ++n) {
    EXPECT_EQ(back.class_names[static_cast<std::size_t>(back.data.label(n))], "c" + std::to_string(d.label(n)));
  }
}

TEST(Standardize, TrainStatsCenterAndScale) {
  std::mt19937_64 rng(8);
  Matrix X = testing::random_matrix(rng, 30, 3, 4.0);
  X.col(1).setConstant(2.5);
  const Dataset d = testing::random_dataset(rng, 30, 3, 3).with_features(X);
  WarningCounter w;
  const StandardizeStats stats = standardize_fit(d);
  EXPECT_EQ(w.count, 1);
  const Dataset z = standardize_apply(stats, d);
  for (int p = 0; p < 3; ++p) {
    const Vector col = z.features().col(p);
    if (p == 1) {
      EXPECT_TRUE(col.isApprox(X.col(1)));
      continue;
    }
    EXPECT_LE(std::abs(col.mean()), 1e-12);
    const double var = (col.array() - col.mean()).square().sum() / 29.0;
    EXPECT_NEAR(var, 1.0, 1e-12);
  }
}

TEST(Standardize, TestUsesTrainStats) {
  std::mt19937_64 rng(9);
  const Dataset train = testing::random_dataset(rng, 20, 2, 3);
  const Dataset test = testing::random_dataset(rng, 20, 2, 3, 3.0);
  const Dataset z = standardize_apply(standardize_fit(train), test);
  const Dataset own = standardize_apply(standardize_fit(test), test);
  EXPECT_FALSE(z.features().isApprox(own.features()));
}

Dataset balanced(int per_class, int C, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> y;
  for (int c = 0; c < C; ++c) y.insert(y.end(), static_cast<std::size_t>(per_class), c);
  return Dataset::from_indices(testing::random_matrix(rng, per_class * C, 2), y, C);
}

TEST(Split, SeventyThirty) {
  const Split s = stratified_split(balanced(50, 3, 1), 0.7, 42);
  EXPECT_EQ(s.train.sample_count(), 105);
  EXPECT_EQ(s.test.sample_count(), 45);
  EXPECT_EQ(s.train.class_counts(), (std::vector<int>{35, 35, 35}));
  EXPECT_EQ(s.test.class_counts(), (std::vector<int>{15, 15, 15}));
}

TEST(Split, ExplicitImbalancedCounts) {
  std::vector<int> y(400, 0);
  for (int c = 1; c <= 3; ++c) y.insert(y.end(), 60, c);
  std::mt19937_64 rng(2);
  const Dataset d = Dataset::from_indices(testing::random_matrix(rng, 580, 2), y, 4);
  const Split s = stratified_split(d, {277, 8, 8, 7}, {50, 50, 50, 50}, 3);
  EXPECT_EQ(s.train.class_counts(), (std::vector<int>{277, 8, 8, 7}));
  EXPECT_EQ(s.test.class_counts(), (std::vector<int>{50, 50, 50, 50}));
  const Split rest = stratified_split(d, {277, 8, 8, 7}, {}, 3);
  EXPECT_EQ(rest.test.sample_count(), 580 - 300);
}

TEST(Split, ShortClassIsNamed) {
  try {
    stratified_split(balanced(5, 3, 3), {3, 6, 3}, {2, 2, 2}, 1, {"setosa", "versicolor", "virginica"});
    FAIL() << "expected CapacityError";
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("versicolor"), std::string::npos) << e.what();
  }
}

TEST(Split, SeedChangesMembershipNotCounts) {
  const Dataset d = balanced(50, 3, 4);
  const Split a = stratified_split(d, 0.7, 1);
  const Split b = stratified_split(d, 0.7, 1);
  const Split c = stratified_split(d, 0.7, 2);
  EXPECT_EQ(a.train.features(), b.train.features());
  EXPECT_EQ(a.train.class_counts(), c.train.class_counts());
  EXPECT_NE(a.train.features(), c.train.features());
}

TEST(Seeds, DerivationIsStableAndSpread) {
  EXPECT_EQ(derive_seed({1, 2, 3}), derive_seed({1, 2, 3}));
  EXPECT_NE(derive_seed({1, 2, 3}), derive_seed({1, 3, 2}));
  EXPECT_NE(hash_string("wdr-msvm"), hash_string("dr-ova"));
}

}  // namespace
}  // namespace wdrmsvm
