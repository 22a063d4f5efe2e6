#include "wdrmsvm/loss.hpp"

#include <algorithm>
#include <cmath>

namespace wdrmsvm {
namespace {

void check_model(const Matrix& M, const Vector& x) {
  if (M.cols() != x.size()) {
    throw DimensionError("model expects " + std::to_string(M.cols()) +
                         " features, got " + std::to_string(x.size()));
  }
}

void check_class(const Matrix& M, int c) {
  if (c < 0 || c >= M.rows()) throw DimensionError("class index out of range");
}

}  // namespace

double cs_loss_from_scores(const Vector& scores, int label) {
  double best = -kInfinity;
  for (Eigen::Index c = 0; c < scores.size(); ++c) {
    const double y_c = (c == label) ? 1.0 : 0.0;
    best = std::max(best, scores[c] - y_c + 1.0);
  }
  return best - scores[label];
}

double cs_loss(const Matrix& M, const Vector& x, const Vector& y) {
  check_model(M, x);
  if (y.size() != M.rows()) throw DimensionError("label has wrong length");
  return cs_loss_from_scores(M * x, one_hot_index(y));
}

double cs_loss(const Matrix& M, const Vector& x, int label) {
  check_model(M, x);
  check_class(M, label);
  return cs_loss_from_scores(M * x, label);
}

double cs_constituent(const Matrix& M, const Vector& x, const Vector& y_check,
                      int c) {
  check_model(M, x);
  check_class(M, c);
  if (y_check.size() != M.rows()) {
    throw DimensionError("label has wrong length");
  }
  const int label = one_hot_index(y_check);
  const Vector s = M * x;
  return (s[c] - y_check[c]) + 1.0 - s[label];
}

double empirical_error(const Matrix& M, const Dataset& data) {
  const std::vector<int> pred = predict_all(M, data.features());
  return 1.0 - accuracy(pred, data.label_indices());
}

double mean_cs_loss(const Matrix& M, const Dataset& data) {
  if (M.cols() != data.feature_count() || M.rows() != data.class_count()) {
    throw DimensionError("model shape does not match dataset");
  }
  double total = 0.0;
  for (int n = 0; n < data.sample_count(); ++n) {
    const Vector s = M * data.features().row(n).transpose();
    total += cs_loss_from_scores(s, data.label(n));
  }
  return total / data.sample_count();
}

double norm(const Vector& v, NormKind k) {
  if (v.size() == 0) return 0.0;
  return k == NormKind::LInf ? v.cwiseAbs().maxCoeff() : v.cwiseAbs().sum();
}

double dual_norm(const Vector& v, NormKind k) { return norm(v, dual(k)); }

double lipschitz_modulus(const Matrix& M, int i, int j, NormKind k) {
  check_class(M, i);
  check_class(M, j);
  if (i == j) return 0.0;
  return dual_norm((M.row(i) - M.row(j)).transpose(), k);
}

double max_pair_modulus(const Matrix& M, NormKind k) {
  double best = 0.0;
  const auto C = static_cast<int>(M.rows());
  for (int i = 0; i < C; ++i) {
    for (int j = i + 1; j < C; ++j) {
      best = std::max(best, lipschitz_modulus(M, i, j, k));
    }
  }
  return best;
}

double transport_cost(const Vector& x, const Vector& y, const Vector& x2,
                      const Vector& y2, double kappa, NormKind k) {
  if (x.size() != x2.size() || y.size() != y2.size()) {
    throw DimensionError("transport_cost: shape mismatch");
  }
  const bool flip = one_hot_index(y) != one_hot_index(y2);
  const double feature_part = norm(x - x2, k);
  if (!flip) return feature_part;
  return feature_part + kappa;
}

}  // namespace wdrmsvm
