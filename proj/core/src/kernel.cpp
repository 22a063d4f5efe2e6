#include "wdrmsvm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wdrmsvm/linear_solver.hpp"
#include "wdrmsvm/loss.hpp"
#include "dual_scale.hpp"

namespace wdrmsvm {
namespace {

constexpr double kFeasSlack = 1e-9;
constexpr double kMaxViolation = 1e-4;
constexpr int kMaxRestarts = 5;

void check_kernel_shapes(const Matrix& A, const Dataset& data, const Matrix& K) {
  const int N = data.sample_count();
  if (K.rows() != N || K.cols() != N) {
    throw DimensionError("Gram matrix must be N x N");
  }
  if (A.rows() != data.class_count() || A.cols() != N) {
    throw DimensionError("coefficient matrix must be C x N");
  }
}

struct KernelEval {
  double objective = 0.0;
  double lambda = 0.0;
  double g_lambda = 0.0;
  Matrix grad_A;  // loss part only
  double bound_slope = 0.0;  // weight on the gradient of the norm bound
};

std::pair<double, int> cs_term(const Vector& s, int y) {
  int arg = 0;
  double top = -kInfinity;
  for (int c = 0; c < s.size(); ++c) {
    const double val = s[c] - (c == y ? 1.0 : 0.0);
    if (val > top) {
      top = val;
      arg = c;
    }
  }
  return {top - s[y] + 1.0, arg};
}

// Loss part of the objective at (A, lambda); when `exact` is set lambda is
// first replaced by its minimizer over [lambda_min, inf).
KernelEval evaluate(const Matrix& A, double lambda, double lambda_min,
                    const Dataset& data, const Matrix& K, double eps,
                    double kappa, bool exact) {
  const int N = data.sample_count();
  const int C = data.class_count();
  const Matrix scores = A * K;  // C x N, column n = scores of sample n
  std::vector<double> a(static_cast<std::size_t>(N));
  std::vector<double> b(static_cast<std::size_t>(N), -kInfinity);
  std::vector<int> va(static_cast<std::size_t>(N));
  std::vector<int> vb(static_cast<std::size_t>(N), 0);
  std::vector<int> yb(static_cast<std::size_t>(N), 0);
  const bool regularized = kappa == kInfinity;
  for (int n = 0; n < N; ++n) {
    const auto k = static_cast<std::size_t>(n);
    const Vector s = scores.col(n);
    const int label = data.label(n);
    std::tie(a[k], va[k]) = cs_term(s, label);
    if (regularized) continue;
    for (int y = 0; y < C; ++y) {
      if (y == label) continue;
      const auto [val, arg] = cs_term(s, y);
      if (val > b[k]) {
        b[k] = val;
        vb[k] = arg;
        yb[k] = y;
      }
    }
  }

  const detail::DualChoice dual =
      detail::choose_dual(a, b, lambda, lambda_min, eps, kappa, exact);
  KernelEval out;
  out.lambda = dual.lambda;
  out.objective = dual.objective;
  out.g_lambda = dual.g_lambda;
  out.bound_slope = dual.bound_slope;

  out.grad_A = Matrix::Zero(C, N);
  for (int n = 0; n < N; ++n) {
    const auto k = static_cast<std::size_t>(n);
    const double w_flip = dual.flip_weight[k];
    const int label = data.label(n);
    const auto krow = K.row(n);
    if (w_flip < 1.0 && va[k] != label) {
      out.grad_A.row(va[k]) += (1.0 - w_flip) * krow;
      out.grad_A.row(label) -= (1.0 - w_flip) * krow;
    }
    if (w_flip > 0.0 && vb[k] != yb[k]) {
      out.grad_A.row(vb[k]) += w_flip * krow;
      out.grad_A.row(yb[k]) -= w_flip * krow;
    }
  }
  out.grad_A /= static_cast<double>(N);
  return out;
}

// Gradient of 2 max_r ||h_r|| with respect to A (row of the largest norm).
Matrix bound_gradient(const Matrix& A, const Matrix& K) {
  Matrix g = Matrix::Zero(A.rows(), A.cols());
  int arg = 0;
  double top = -1.0;
  for (int r = 0; r < A.rows(); ++r) {
    const double h = h_norm(A.row(r).transpose(), K);
    if (h > top) {
      top = h;
      arg = r;
    }
  }
  if (top > 0.0) g.row(arg) = 2.0 * (K * A.row(arg).transpose()).transpose() / top;
  return g;
}

struct RunResult {
  Matrix A;
  double lambda = 0.0;
  double objective = kInfinity;
  double violation = 0.0;
  std::vector<double> objectives;
};

RunResult run(const Dataset& data, const Matrix& K, double eps, double kappa,
              const SolverOptions& opts, double rho) {
  const int C = data.class_count();
  const int N = data.sample_count();
  const bool exact = opts.exact_lambda;
  Matrix A = Matrix::Zero(C, N);
  double lambda = 0.0;
  RunResult best;
  best.A = A;
  best.objectives.reserve(static_cast<std::size_t>(opts.iterations));

  KernelEval ev = evaluate(A, lambda, 0.0, data, K, eps, kappa, false);
  for (int t = 1; t <= opts.iterations; ++t) {
    const double step = opts.initial_step / t;
    double lmin = kernel_lambda_min(A, K);
    Matrix g_A = ev.grad_A;
    double g_lambda = ev.g_lambda;
    if (exact) {
      if (ev.bound_slope > 0.0) g_A += ev.bound_slope * bound_gradient(A, K);
    } else if (lmin - lambda > 0.0) {
      g_A += rho * bound_gradient(A, K);
      g_lambda -= rho;
    }
    A -= step * g_A;
    lambda = std::max(0.0, lambda - step * g_lambda);
    lmin = kernel_lambda_min(A, K);
    ev = evaluate(A, lambda, lmin, data, K, eps, kappa, exact);
    lambda = ev.lambda;
    const double violation = std::max(0.0, lmin - lambda);
    const double value = ev.objective + (exact ? 0.0 : rho * violation);
    best.objectives.push_back(value);
    if (value < best.objective) {
      best.objective = value;
      best.A = A;
      best.lambda = lambda;
      best.violation = violation;
    }
  }
  return best;
}

}  // namespace

GramMatrix gram(const Matrix& features, const KernelConfig& kernel) {
  kernel.validate();
  const KernelConfig k = kernel.resolved(static_cast<int>(features.cols()));
  GramMatrix out{cross_kernel(features, features, k), k};
  // Symmetrize exactly; the two triangles can differ in the last bit.
  out.K = (0.5 * (out.K + out.K.transpose())).eval();
  return out;
}

Matrix cross_kernel(const Matrix& X, const Matrix& Z, const KernelConfig& kernel) {
  if (X.cols() != Z.cols()) throw DimensionError("feature counts differ");
  const KernelConfig k = kernel.resolved(static_cast<int>(X.cols()));
  Matrix G = X * Z.transpose();
  if (k.kind == KernelConfig::Kind::Linear) return G;
  const double gamma = *k.gamma;
  const Vector xx = X.rowwise().squaredNorm();
  const Vector zz = Z.rowwise().squaredNorm();
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    for (Eigen::Index j = 0; j < G.cols(); ++j) {
      const double d2 = std::max(0.0, xx[i] + zz[j] - 2.0 * G(i, j));
      G(i, j) = std::exp(-gamma * d2);
    }
  }
  return G;
}

double h_norm(const Vector& a, const Matrix& K) {
  if (K.rows() != a.size() || K.cols() != a.size()) {
    throw DimensionError("coefficient length does not match Gram matrix");
  }
  return std::sqrt(std::max(0.0, a.dot(K * a)));
}

double kernel_lambda_min(const Matrix& A, const Matrix& K) {
  double top = 0.0;
  for (int r = 0; r < A.rows(); ++r) {
    top = std::max(top, h_norm(A.row(r).transpose(), K));
  }
  return 2.0 * top;
}

double kernel_objective(const Matrix& A, double lambda, const Dataset& data,
                        const Matrix& K, double eps, double kappa) {
  check_kernel_shapes(A, data, K);
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
  if (!(eps >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
  if (!(kappa >= 0.0)) throw InvalidArgument("kappa must be >= 0");
  const double bound = kernel_lambda_min(A, K);
  if (lambda < bound - kFeasSlack) {
    std::ostringstream msg;
    msg << "lambda " << lambda << " is below the norm bound " << bound
        << " (deficit " << bound - lambda << ")";
    throw InfeasibleError(msg.str());
  }
  return evaluate(A, lambda, bound, data, K, eps, kappa, false).objective;
}

KernelFit fit_kernel_traced(const Dataset& data, const Hyperparams& hp,
                            const KernelConfig& kernel) {
  hp.validate();
  const GramMatrix G = gram(data.features(), kernel);
  KernelFit out;
  double rho = hp.solver.penalty_rho;
  RunResult r;
  for (int attempt = 0;; ++attempt) {
    r = run(data, G.K, hp.epsilon, hp.kappa, hp.solver, rho);
    if (r.violation <= kMaxViolation) break;
    if (attempt == kMaxRestarts) {
      std::ostringstream msg;
      msg << "kernel fit left a norm-bound deficit of " << r.violation
          << " after " << kMaxRestarts << " restarts (rho = " << rho << ")";
      throw SolverFailure(msg.str());
    }
    rho *= 2.0;
    ++out.restarts;
  }
  out.rho = rho;
  out.violation = r.violation;
  out.objectives = std::move(r.objectives);
  out.model.A = r.A;
  out.model.train_features = data.features();
  out.model.kernel = G.kernel;
  out.model.lambda = std::max(r.lambda, kernel_lambda_min(r.A, G.K));
  out.model.objective =
      kernel_objective(r.A, out.model.lambda, data, G.K, hp.epsilon, hp.kappa);
  return out;
}

KernelModel fit_kernel(const Dataset& data, const Hyperparams& hp,
                       const KernelConfig& kernel) {
  return fit_kernel_traced(data, hp, kernel).model;
}

KernelFit fit_kernel_best_step(const Dataset& data, const Hyperparams& hp,
                               const KernelConfig& kernel,
                               const std::vector<double>& steps) {
  if (steps.empty()) throw InvalidArgument("step grid is empty");
  KernelFit best;
  bool have = false;
  for (double step : steps) {
    Hyperparams h = hp;
    h.solver.initial_step = step;
    KernelFit f = fit_kernel_traced(data, h, kernel);
    if (!have || f.model.objective < best.model.objective) {
      best = std::move(f);
      have = true;
    }
  }
  return best;
}

Vector kernel_scores(const KernelModel& model, const Vector& x) {
  if (x.size() != model.train_features.cols()) {
    throw DimensionError("sample has " + std::to_string(x.size()) +
                         " features, model expects " +
                         std::to_string(model.train_features.cols()));
  }
  const Matrix k = cross_kernel(model.train_features, x.transpose(), model.kernel);
  return model.A * k;
}

int predict_kernel(const KernelModel& model, const Vector& x) {
  return argmax_lowest(kernel_scores(model, x));
}

std::vector<int> predict_kernel_all(const KernelModel& model,
                                    const Matrix& features) {
  if (features.cols() != model.train_features.cols()) {
    throw DimensionError("feature count does not match the model");
  }
  const Matrix S = model.A * cross_kernel(model.train_features, features, model.kernel);
  std::vector<int> out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index n = 0; n < features.rows(); ++n) {
    out[static_cast<std::size_t>(n)] = argmax_lowest(S.col(n));
  }
  return out;
}

}  // namespace wdrmsvm
