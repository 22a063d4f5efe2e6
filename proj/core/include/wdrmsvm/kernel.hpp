// Kernel robust multiclass SVM in coefficient space.
//
// Hypotheses are h_c(x) = sum_j A_cj k(x, x_j), so the scores of training
// sample n are A K_{.n} and ||h_c||_H = sqrt(A_c K A_c^T). The training
// problem is
//
//   min  lambda*eps + 1/N sum_n max{ a_n(A), b_n(A) - lambda*kappa }
//   s.t. lambda >= ||h_r|| + ||h_s||   for all r, s  (i.e. 2 max_r ||h_r||),
//
// an upper bound on the worst-case risk rather than an exact reformulation.

#ifndef WDRMSVM_KERNEL_HPP
#define WDRMSVM_KERNEL_HPP

#include <vector>

#include "wdrmsvm/core.hpp"

namespace wdrmsvm {

struct GramMatrix {
  Matrix K;
  KernelConfig kernel;  // resolved (gamma filled in)
};

GramMatrix gram(const Matrix& features, const KernelConfig& kernel);

/// k(x_i, z_j) for rows of X and Z; the kernel must be resolved or the
/// default gamma is taken from X's feature count.
Matrix cross_kernel(const Matrix& X, const Matrix& Z, const KernelConfig& kernel);

/// sqrt(max(0, a^T K a)).
double h_norm(const Vector& a, const Matrix& K);

/// 2 max_r h_norm(A_r, K): the smallest feasible lambda.
double kernel_lambda_min(const Matrix& A, const Matrix& K);

/// Objective at (A, lambda). Throws InfeasibleError, naming the deficit, when
/// lambda < 2 max_r h_norm(A_r) - 1e-9. An infinite kappa drops label moves.
double kernel_objective(const Matrix& A, double lambda, const Dataset& data,
                        const Matrix& K, double eps, double kappa);

struct KernelFit {
  KernelModel model;
  std::vector<double> objectives;  // per iteration of the final run
  double violation = 0.0;          // best iterate's constraint deficit
  double rho = 0.0;                // penalty weight of the final run
  int restarts = 0;
};

/// Penalty subgradient method on
///   objective + rho * max(0, 2 max_r ||h_r|| - lambda)
/// from A = 0, lambda = 0 with step initial_step / t, returning the best
/// iterate. When the best iterate's deficit exceeds 1e-4, rho is doubled and
/// the run repeated (up to 5 restarts); SolverFailure after that. With
/// solver.exact_lambda, lambda is instead set to its exact minimizer over the
/// feasible range after every step, so iterates are always feasible. The
/// returned lambda is lifted to the bound if a deficit remains.
KernelFit fit_kernel_traced(const Dataset& data, const Hyperparams& hp,
                            const KernelConfig& kernel);
KernelModel fit_kernel(const Dataset& data, const Hyperparams& hp,
                       const KernelConfig& kernel);

/// fit_kernel_traced over several initial steps, keeping the best objective.
KernelFit fit_kernel_best_step(const Dataset& data, const Hyperparams& hp,
                               const KernelConfig& kernel,
                               const std::vector<double>& steps);

/// Scores A k(X_train, x) for every class.
Vector kernel_scores(const KernelModel& model, const Vector& x);

/// argmax of the scores, lowest index on ties (0-based).
int predict_kernel(const KernelModel& model, const Vector& x);
std::vector<int> predict_kernel_all(const KernelModel& model,
                                    const Matrix& features);

}  // namespace wdrmsvm

#endif  // WDRMSVM_KERNEL_HPP
