// Shared by solvers whose objective is
//   lambda*eps + 1/N sum_n max(a_n, b_n - lambda*kappa),  lambda >= lambda_min.

#ifndef WDRMSVM_SRC_DUAL_SCALE_HPP
#define WDRMSVM_SRC_DUAL_SCALE_HPP

#include <vector>

namespace wdrmsvm::detail {

struct DualChoice {
  double lambda = 0.0;
  double objective = 0.0;
  double g_lambda = 0.0;
  // Weight of the moved branch per sample: 1 above, 0 below, theta when tied
  // on the breakpoint.
  std::vector<double> flip_weight;
  // Slope to pass on to the norm bound when lambda sits on lambda_min
  // (exact mode only).
  double bound_slope = 0.0;
};

/// With `exact`, lambda is replaced by its minimizer over [lambda_min, inf)
/// and tied samples get the weight that zeroes the lambda slope. Otherwise
/// `lambda` is used as given. b_n = -inf marks samples without a move.
DualChoice choose_dual(const std::vector<double>& a,
                       const std::vector<double>& b, double lambda,
                       double lambda_min, double eps, double kappa, bool exact);

}  // namespace wdrmsvm::detail

#endif  // WDRMSVM_SRC_DUAL_SCALE_HPP
