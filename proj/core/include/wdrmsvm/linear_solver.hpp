// Projected subgradient training of the linear distributionally robust
// multiclass SVM.
//
// The training problem over (lambda, M) is
//
//   min  lambda*eps + 1/N sum_n max{ a_n(M), b_n(M) - lambda*kappa }
//   s.t. lambda >= ||(v_i - v_j)^T M||_*   for all class pairs,
//
// where a_n is the Crammer-Singer loss of sample n at its own label and b_n
// the largest loss over the other labels. Each iteration takes a subgradient
// step on (lambda, M) followed by a Euclidean projection onto the constraint
// set. The constraint norm is the dual of the transport-cost norm: for an L1
// cost it bounds every column range of M by lambda (see project()), for an
// LInf cost it bounds the L1 distance between every pair of rows.

#ifndef WDRMSVM_LINEAR_SOLVER_HPP
#define WDRMSVM_LINEAR_SOLVER_HPP

#include <vector>

#include "wdrmsvm/core.hpp"

namespace wdrmsvm {

/// Maximizer of the per-sample robust term over (predicted class v, label y).
struct RobustTerm {
  double value = 0.0;  // includes the +1 of the Crammer-Singer loss
  int v = 0;
  int y = 0;
  bool flip = false;  // y differs from the sample's own label
};

/// max over (c, y') of (s_c - [c == y']) - s_{y'} + 1 - flip_price*[y' != label]
/// for scores s = M x. The nominal label wins ties, then the lowest indices.
/// An infinite flip_price excludes label moves.
RobustTerm robust_term(const Vector& scores, int label, double flip_price);

/// lambda*kappa, or +inf in regularized mode (kappa infinite).
double flip_price(double lambda, double kappa);

/// Training objective at (lambda, M), comparable with the LP optimum. Does
/// not check the dual-norm constraint.
double objective(double lambda, const Matrix& M, const Dataset& data,
                 double eps, double kappa);

/// The same objective without the constant +1 of the loss; the form the
/// subgradient expressions are usually written for.
double shifted_objective(double lambda, const Matrix& M, const Dataset& data,
                         double eps, double kappa);

/// d/dlambda of the objective: eps - kappa * (#samples whose maximizer flips
/// the label) / N.
double subgrad_lambda(double lambda, const Matrix& M, const Dataset& data,
                      double eps, double kappa);

/// (1/N) sum_n (e_{v*} - e_{y*}) x_n^T, a C x P subgradient in M.
Matrix subgrad_M(double lambda, const Matrix& M, const Dataset& data,
                 double kappa);

/// Minimizer over lambda >= lambda_min of
///   lambda*eps + 1/N sum_n max(a_n, b_n - lambda*kappa),
/// a convex piecewise-linear function with slope
/// eps - kappa/N * #{n : (b_n - a_n)/kappa > lambda}. Returns the smallest
/// minimizer; lambda_min when kappa is 0 or infinite.
double optimal_dual_scale(const std::vector<double>& a,
                          const std::vector<double>& b, double lambda_min,
                          double eps, double kappa);

/// Per-sample nominal loss a_n and best label-moved loss b_n.
void loss_profile(const Matrix& M, const Dataset& data, std::vector<double>& a,
                  std::vector<double>& b);

struct Projection {
  double lambda = 0.0;
  Matrix M;
};

/// Euclidean projection of (lambda', M') onto
/// { (lambda, M) : lambda >= 0, max_i M_id - min_i M_id <= lambda for all d }.
/// For fixed lambda the problem splits by column: each column is clamped to a
/// band [m_d - lambda/2, m_d + lambda/2] whose center minimizes the squared
/// clamping distance. The outer problem in lambda is convex and
/// differentiable; it is solved by bisection on its slope to `tol`.
Projection project(double lambda_prime, const Matrix& M_prime, double tol);

/// Euclidean projection of (lambda', M') onto
/// { (lambda, M) : lambda >= ||M_i - M_j||_1 for all i < j } by Dykstra's
/// method over the pairwise cones. `tol` bounds the per-sweep change.
Projection project_pairwise_l1(double lambda_prime, const Matrix& M_prime,
                               double tol);

/// Projection onto the feasible set induced by the cost norm.
Projection project_feasible(double lambda_prime, const Matrix& M_prime,
                            NormKind cost_norm, double tol);

struct SubgradientTrace {
  std::vector<double> objectives;
  double best_objective = kInfinity;
  double best_lambda = 0.0;
  Matrix best_M;
  int iterations = 0;
};

struct LinearFit {
  LinearModel model;
  SubgradientTrace trace;
};

/// Runs the projected subgradient method from lambda = 0, M = 0 with step
/// initial_step / t and returns the best iterate. An infinite kappa routes
/// to fit_regularized.
LinearFit fit(const Dataset& data, const Hyperparams& hp);

/// Runs fit once per initial step in `steps` and keeps the run with the
/// lowest best objective (earliest step on ties). The returned trace is the
/// winning run's; its initial_step is reported through `chosen_step`.
LinearFit fit_best_step(const Dataset& data, const Hyperparams& hp,
                        const std::vector<double>& steps,
                        double* chosen_step = nullptr);

/// The step grid {1e-2, 1e-1, 1, 1e1, 1e2}.
std::vector<double> default_step_grid();

/// kappa = infinity: minimizes eps * max_pair_modulus(M) + mean_cs_loss(M).
/// The returned lambda is the realized max pair modulus.
LinearFit fit_regularized_traced(const Dataset& data, double eps,
                                 NormKind cost_norm,
                                 const SolverOptions& options = {});
LinearModel fit_regularized(const Dataset& data, double eps,
                            NormKind cost_norm,
                            const SolverOptions& options = {});

}  // namespace wdrmsvm

#endif  // WDRMSVM_LINEAR_SOLVER_HPP
