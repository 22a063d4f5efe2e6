#include "wdrmsvm/core.hpp"

#include <cmath>
#include <sstream>

#include "wdrmsvm/log.hpp"

namespace wdrmsvm {

std::string to_string(NormKind k) {
  return k == NormKind::LInf ? "linf" : "l1";
}

NormKind norm_from_string(const std::string& s) {
  if (s == "linf" || s == "LInf" || s == "inf") return NormKind::LInf;
  if (s == "l1" || s == "L1") return NormKind::L1;
  throw InvalidArgument("unknown norm '" + s + "' (expected linf or l1)");
}

void SolverOptions::validate() const {
  if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
  if (!(initial_step > 0.0)) throw InvalidArgument("initial_step must be > 0");
  if (!(projection_tol > 0.0)) {
    throw InvalidArgument("projection_tol must be > 0");
  }
  if (!(penalty_rho > 0.0)) throw InvalidArgument("penalty_rho must be > 0");
}

void Hyperparams::validate() const {
  if (!(epsilon >= 0.0) || std::isinf(epsilon)) {
    throw InvalidArgument("epsilon must be a finite value >= 0");
  }
  if (!(kappa >= 0.0)) throw InvalidArgument("kappa must be >= 0");
  solver.validate();
}

double KernelConfig::resolved_gamma(int feature_count) const {
  if (gamma) return *gamma;
  return 1.0 / static_cast<double>(feature_count);
}

KernelConfig KernelConfig::resolved(int feature_count) const {
  KernelConfig out = *this;
  if (kind == Kind::Rbf) out.gamma = resolved_gamma(feature_count);
  return out;
}

void KernelConfig::validate() const {
  if (kind == Kind::Rbf && gamma && !(*gamma > 0.0)) {
    throw InvalidArgument("RBF gamma must be > 0");
  }
}

std::string to_string(KernelConfig::Kind k) {
  return k == KernelConfig::Kind::Rbf ? "rbf" : "linear";
}

int one_hot_index(const Vector& y) {
  int hot = -1;
  double total = 0.0;
  for (Eigen::Index c = 0; c < y.size(); ++c) {
    const double v = y[c];
    if (v != 0.0 && v != 1.0) {
      throw InvalidArgument("label entries must be 0 or 1");
    }
    total += v;
    if (v == 1.0) hot = static_cast<int>(c);
  }
  if (total != 1.0) throw InvalidArgument("label row must sum to exactly 1");
  return hot;
}

Vector one_hot(int index, int class_count) {
  if (index < 0 || index >= class_count) {
    throw DimensionError("class index out of range");
  }
  Vector y = Vector::Zero(class_count);
  y[index] = 1.0;
  return y;
}

Dataset::Dataset(Matrix features, Matrix labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.rows() < 1) throw InvalidArgument("dataset needs N >= 1");
  if (features_.cols() < 1) throw InvalidArgument("dataset needs P >= 1");
  if (labels_.cols() < 2) throw InvalidArgument("dataset needs C >= 2");
  if (labels_.rows() != features_.rows()) {
    throw DimensionError("features and labels disagree on N");
  }
  if (!features_.allFinite()) {
    throw InvalidArgument("features contain non-finite values");
  }
  label_index_.resize(static_cast<std::size_t>(labels_.rows()));
  for (Eigen::Index n = 0; n < labels_.rows(); ++n) {
    try {
      label_index_[static_cast<std::size_t>(n)] =
          one_hot_index(labels_.row(n).transpose());
    } catch (const InvalidArgument& e) {
      std::ostringstream os;
      os << "label row " << n << ": " << e.what();
      throw InvalidArgument(os.str());
    }
  }
  if (labels_.cols() == 2) {
    warn("C = 2: the multiclass formulation assumes C > 2; continuing");
  }
}

Dataset Dataset::from_indices(Matrix features, std::span<const int> labels,
                              int class_count) {
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
    throw DimensionError("label count does not match feature rows");
  }
  Matrix y = Matrix::Zero(features.rows(), class_count);
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] < 0 || labels[n] >= class_count) {
      throw InvalidArgument("label index out of range");
    }
    y(static_cast<Eigen::Index>(n), labels[n]) = 1.0;
  }
  return Dataset(std::move(features), std::move(y));
}

std::vector<int> Dataset::class_counts() const {
  std::vector<int> counts(static_cast<std::size_t>(class_count()), 0);
  for (int c : label_index_) ++counts[static_cast<std::size_t>(c)];
  return counts;
}

Dataset Dataset::subset(std::span<const int> rows) const {
  Matrix x(static_cast<Eigen::Index>(rows.size()), features_.cols());
  Matrix y(static_cast<Eigen::Index>(rows.size()), labels_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    x.row(r) = features_.row(rows[i]);
    y.row(r) = labels_.row(rows[i]);
  }
  return Dataset(std::move(x), std::move(y));
}

Dataset Dataset::with_features(Matrix features) const {
  return Dataset(std::move(features), labels_);
}

int argmax_lowest(const Vector& scores) {
  int best = 0;
  for (Eigen::Index c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = static_cast<int>(c);
  }
  return best;
}

int predict(const Matrix& M, const Vector& x) {
  if (M.cols() != x.size()) {
    throw DimensionError("predict: model has " + std::to_string(M.cols()) +
                         " features, input has " + std::to_string(x.size()));
  }
  return argmax_lowest(M * x);
}

int predict(const LinearModel& model, const Vector& x) {
  return predict(model.M, x);
}

std::vector<int> predict_all(const Matrix& M, const Matrix& features) {
  if (M.cols() != features.cols()) {
    throw DimensionError("predict_all: feature dimension mismatch");
  }
  const Matrix scores = features * M.transpose();
  std::vector<int> out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index n = 0; n < features.rows(); ++n) {
    out[static_cast<std::size_t>(n)] = argmax_lowest(scores.row(n).transpose());
  }
  return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw DimensionError("accuracy: size mismatch");
  }
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == truth[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace wdrmsvm
