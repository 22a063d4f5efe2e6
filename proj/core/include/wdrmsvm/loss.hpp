// Crammer-Singer loss and the related quantities used by the robust
// reformulations: empirical error, norms and dual norms, Lipschitz moduli of
// the loss constituents, and the separable transport cost.

#ifndef WDRMSVM_LOSS_HPP
#define WDRMSVM_LOSS_HPP

#include "wdrmsvm/core.hpp"

namespace wdrmsvm {

/// max_c { v_c^T (s - y) + 1 } - y^T s for precomputed scores s = M x and a
/// 0-based label.
double cs_loss_from_scores(const Vector& scores, int label);

/// Crammer-Singer loss of (x, y) under M; y must be one-hot.
double cs_loss(const Matrix& M, const Vector& x, const Vector& y);
double cs_loss(const Matrix& M, const Vector& x, int label);

/// The c-th constituent v_c^T (M x - y) + 1 - y^T M x for a fixed label.
double cs_constituent(const Matrix& M, const Vector& x, const Vector& y_check,
                      int c);

double empirical_error(const Matrix& M, const Dataset& data);
double mean_cs_loss(const Matrix& M, const Dataset& data);

/// Norm of kind k.
double norm(const Vector& v, NormKind k);
/// Dual of the norm of kind k: L1 for LInf, LInf for L1.
double dual_norm(const Vector& v, NormKind k);

/// dual_norm((v_i - v_j)^T M) for 0-based classes i, j.
double lipschitz_modulus(const Matrix& M, int i, int j, NormKind k);
/// max over class pairs of lipschitz_modulus.
double max_pair_modulus(const Matrix& M, NormKind k);

/// ||x - x2||_k + kappa * 1{y != y2}. Returns +inf when kappa is infinite
/// and the labels differ.
double transport_cost(const Vector& x, const Vector& y, const Vector& x2,
                      const Vector& y2, double kappa, NormKind k);

}  // namespace wdrmsvm

#endif  // WDRMSVM_LOSS_HPP
