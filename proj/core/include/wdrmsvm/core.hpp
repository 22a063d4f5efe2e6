// Domain types shared by every part of the library.
//
// Notation follows the usual multiclass setup: N samples, P features,
// C classes. Labels are stored one-hot so that label algebra (v_c - y,
// y^T M x, ...) can be written literally.

#ifndef WDRMSVM_CORE_HPP
#define WDRMSVM_CORE_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wdrmsvm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class UnboundedError : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Norms and hyperparameters
// ---------------------------------------------------------------------------

/// Norm used on feature displacements in the transport cost. The dual norm
/// (L1 for LInf, LInf for L1) bounds the Lipschitz moduli of the loss.
enum class NormKind { LInf, L1 };

constexpr NormKind dual(NormKind k) {
  return k == NormKind::LInf ? NormKind::L1 : NormKind::LInf;
}

std::string to_string(NormKind k);
NormKind norm_from_string(const std::string& s);

struct SolverOptions {
  int iterations = 1000;
  double initial_step = 1.0;
  std::uint64_t seed = 0;
  double projection_tol = 1e-12;
  // After each projected step, replace lambda by its exact minimizer for the
  // current M. Off reproduces the plain two-block subgradient iteration.
  bool exact_lambda = true;
  // Exact-penalty weight for the kernel solver.
  double penalty_rho = 10.0;

  void validate() const;
};

/// epsilon is the Wasserstein radius, kappa the label-flip price. A kappa of
/// +infinity prices label moves out entirely (regularized mode).
struct Hyperparams {
  double epsilon = 0.0;
  double kappa = kInfinity;
  NormKind cost_norm = NormKind::LInf;
  SolverOptions solver{};

  bool regularized() const { return kappa == kInfinity; }
  void validate() const;
};

struct KernelConfig {
  enum class Kind { Rbf, Linear };

  Kind kind = Kind::Rbf;
  // Unset means 1/P, resolved against the training data.
  std::optional<double> gamma;

  static KernelConfig rbf(std::optional<double> gamma = std::nullopt) {
    return {Kind::Rbf, gamma};
  }
  static KernelConfig linear() { return {Kind::Linear, std::nullopt}; }

  double resolved_gamma(int feature_count) const;
  KernelConfig resolved(int feature_count) const;
  void validate() const;
};

std::string to_string(KernelConfig::Kind k);

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

/// Immutable N x P feature matrix with one-hot N x C labels.
class Dataset {
 public:
  /// Throws InvalidArgument when a label row is not one-hot, features are
  /// non-finite, or the shape is degenerate (N < 1, P < 1, C < 2).
  Dataset(Matrix features, Matrix labels);

  /// Convenience constructor from 0-based class indices.
  static Dataset from_indices(Matrix features, std::span<const int> labels,
                              int class_count);

  const Matrix& features() const { return features_; }
  const Matrix& labels() const { return labels_; }
  int sample_count() const { return static_cast<int>(features_.rows()); }
  int feature_count() const { return static_cast<int>(features_.cols()); }
  int class_count() const { return static_cast<int>(labels_.cols()); }

  /// 0-based class of sample n.
  int label(int n) const { return label_index_[static_cast<std::size_t>(n)]; }
  const std::vector<int>& label_indices() const { return label_index_; }
  std::vector<int> class_counts() const;

  Dataset subset(std::span<const int> rows) const;
  Dataset with_features(Matrix features) const;

 private:
  Matrix features_;
  Matrix labels_;
  std::vector<int> label_index_;
};

/// Checks that y has entries in {0,1} summing to 1; returns the hot index.
int one_hot_index(const Vector& y);
Vector one_hot(int index, int class_count);

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

struct LinearModel {
  Matrix M;  // C x P
  double lambda = 0.0;
  double objective = 0.0;
};

struct KernelModel {
  Matrix A;  // C x N
  Matrix train_features;
  KernelConfig kernel;
  double lambda = 0.0;
  double objective = 0.0;
};

/// Index of the largest entry; ties go to the lowest index.
int argmax_lowest(const Vector& scores);

/// Class of x under the argmax rule on M x (0-based).
int predict(const Matrix& M, const Vector& x);
int predict(const LinearModel& model, const Vector& x);
std::vector<int> predict_all(const Matrix& M, const Matrix& features);

/// Fraction of samples whose predicted class equals the label.
double accuracy(std::span<const int> predicted, std::span<const int> truth);

}  // namespace wdrmsvm

#endif  // WDRMSVM_CORE_HPP
