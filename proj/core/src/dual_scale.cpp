#include "dual_scale.hpp"

#include <algorithm>

#include "wdrmsvm/linear_solver.hpp"

namespace wdrmsvm::detail {

DualChoice choose_dual(const std::vector<double>& a,
                       const std::vector<double>& b, double lambda,
                       double lambda_min, double eps, double kappa, bool exact) {
  const std::size_t N = a.size();
  const bool regularized = kappa == kInfinity;
  DualChoice out;
  out.lambda = lambda;
  if (exact) {
    out.lambda = regularized ? lambda_min
                             : optimal_dual_scale(a, b, lambda_min, eps, kappa);
  }
  const double price = flip_price(out.lambda, kappa);
  int above = 0;
  int tied = 0;
  double total = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const double moved = b[n] - price;
    total += std::max(a[n], moved);
    if (moved > a[n]) ++above;
    else if (moved == a[n]) ++tied;
  }
  const double Nd = static_cast<double>(N);
  out.objective = out.lambda * eps + total / Nd;

  double theta = 0.0;
  const bool on_breakpoint = exact && !regularized && out.lambda > lambda_min && tied > 0;
  if (on_breakpoint) {
    theta = std::clamp((eps * Nd / kappa - above) / tied, 0.0, 1.0);
  }
  out.g_lambda = regularized ? eps : eps - kappa * (above + theta * tied) / Nd;
  if (exact && !on_breakpoint) out.bound_slope = std::max(out.g_lambda, 0.0);

  out.flip_weight.assign(N, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    const double moved = b[n] - price;
    if (moved > a[n]) out.flip_weight[n] = 1.0;
    else if (moved == a[n]) out.flip_weight[n] = theta;
  }
  return out;
}

}  // namespace wdrmsvm::detail
