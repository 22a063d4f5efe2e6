// Comparator models: the distributionally robust one-vs-all hinge SVM (linear
// and kernel), the regularized multiclass SVM alias, and regularized
// multinomial logistic regression.
//
// DR-OVA, per class c with z_n = +1 when y_n = c and -1 otherwise:
//
//   min  lambda*eps + 1/N sum_n s_n
//   s.t. s_n >= 1 - z_n w^T x_n
//        s_n >= 1 + z_n w^T x_n - lambda*kappa
//        s_n >= 0,  lambda >= ||w||_*
//
// with ||.||_* dual to the transport-cost norm. No bias terms. Prediction is
// argmax_c w_c^T x.

#ifndef WDRMSVM_BASELINES_HPP
#define WDRMSVM_BASELINES_HPP

#include <vector>

#include "wdrmsvm/core.hpp"
#include "wdrmsvm/reference_solver.hpp"

namespace wdrmsvm {

enum class OvaSolver { Subgradient, Simplex };

struct OvaModel {
  Matrix W;                     // C x P, row c is w_c
  std::vector<double> lambdas;  // per class
  std::vector<double> objectives;
  NormKind cost_norm = NormKind::LInf;

  double total_objective() const;
};

struct OvaOptions {
  OvaSolver solver = OvaSolver::Subgradient;
  // Initial steps tried per class (best objective kept); empty means
  // hp.solver.initial_step only.
  std::vector<double> steps;
  int threads = 1;
};

/// Per-class objective lambda*eps + mean max(0, 1 - z m, 1 + z m - lambda*kappa).
double ova_objective(const Vector& w, double lambda, const Dataset& data,
                     int cls, double eps, double kappa);

/// The per-class LP above. Variables w_p (free), lambda, s_n, and for an LInf
/// cost u_p >= |w_p| with lambda >= sum_p u_p.
LpModel build_ova_lp(const Dataset& data, int cls, const Hyperparams& hp);

struct OvaClassFit {
  Vector w;
  double lambda = 0.0;
  double objective = 0.0;
};

/// One class by projected subgradient, same schedule and exact-lambda option
/// as the linear solver.
OvaClassFit fit_ova_class_subgradient(const Dataset& data, int cls,
                                      const Hyperparams& hp);
OvaClassFit fit_ova_class_simplex(const Dataset& data, int cls,
                                  const Hyperparams& hp);

OvaModel fit_dr_ova(const Dataset& data, const Hyperparams& hp,
                    const OvaOptions& options = {});

int predict_ova(const OvaModel& model, const Vector& x);
std::vector<int> predict_ova_all(const OvaModel& model, const Matrix& features);

// ---------------------------------------------------------------------------
// Kernel one-vs-all: w_c = sum_n alpha_cn phi(x_n), ||w_c||_H = sqrt(a K a),
// and the norm bound is lambda >= ||w_c||_H.
// ---------------------------------------------------------------------------

struct KernelOvaModel {
  Matrix alpha;  // C x N
  Matrix train_features;
  KernelConfig kernel;
  std::vector<double> lambdas;
  std::vector<double> objectives;

  double total_objective() const;
};

KernelOvaModel fit_kernel_ova(const Dataset& data, const Hyperparams& hp,
                              const KernelConfig& kernel,
                              const std::vector<double>& steps = {});
std::vector<int> predict_kernel_ova_all(const KernelOvaModel& model,
                                        const Matrix& features);

// ---------------------------------------------------------------------------
// Regularized multinomial logistic regression
// ---------------------------------------------------------------------------

/// 1/N sum_n -log softmax(W x_n)_{y_n} + reg * ||W||_F^2.
double rmlr_loss(const Matrix& W, const Dataset& data, double reg);
Matrix rmlr_gradient(const Matrix& W, const Dataset& data, double reg);

struct RmlrFit {
  Matrix W;  // C x P
  double loss = 0.0;
  double grad_norm = 0.0;  // Frobenius norm at return
  int iterations = 0;
  bool converged = false;  // grad_norm <= tolerance before the cap
};

/// Full-batch gradient descent from W = 0 with the fixed step
/// 1 / (||X||_2^2 / (2N) + 2 reg), stopping when the gradient norm reaches
/// `tolerance` or after `iterations` steps.
RmlrFit fit_rmlr(const Dataset& data, double reg, int iterations = 2000,
                 double tolerance = 1e-4);

/// Alias of fit_regularized.
LinearModel fit_rmsvm(const Dataset& data, double eps, NormKind cost_norm,
                      const SolverOptions& options = {});

}  // namespace wdrmsvm

#endif  // WDRMSVM_BASELINES_HPP
