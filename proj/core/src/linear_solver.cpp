#include "wdrmsvm/linear_solver.hpp"

#include <algorithm>
#include <tuple>
#include <utility>
#include <cmath>

#include "dual_scale.hpp"
#include "wdrmsvm/loss.hpp"

namespace wdrmsvm {
namespace {

void check_shapes(const Matrix& M, const Dataset& data) {
  if (M.rows() != data.class_count() || M.cols() != data.feature_count()) {
    throw DimensionError("model is " + std::to_string(M.rows()) + "x" +
                         std::to_string(M.cols()) + ", dataset needs " +
                         std::to_string(data.class_count()) + "x" +
                         std::to_string(data.feature_count()));
  }
}

struct Evaluation {
  double objective = 0.0;  // lambda*eps + mean robust term (+1 included)
  double mean_nominal = 0.0;
  int flips = 0;
  Matrix grad_M;
};

Evaluation evaluate(double lambda, const Matrix& M, const Dataset& data,
                    double eps, double kappa, bool want_grad) {
  check_shapes(M, data);
  const int N = data.sample_count();
  const double price = flip_price(lambda, kappa);
  const Matrix scores = data.features() * M.transpose();

  Evaluation out;
  if (want_grad) out.grad_M = Matrix::Zero(M.rows(), M.cols());
  double total = 0.0;
  double nominal = 0.0;
  for (int n = 0; n < N; ++n) {
    const Vector s = scores.row(n).transpose();
    const RobustTerm term = robust_term(s, data.label(n), price);
    total += term.value;
    nominal += cs_loss_from_scores(s, data.label(n));
    if (term.flip) ++out.flips;
    if (want_grad && term.v != term.y) {
      out.grad_M.row(term.v) += data.features().row(n);
      out.grad_M.row(term.y) -= data.features().row(n);
    }
  }
  out.objective = lambda * eps + total / N;
  out.mean_nominal = nominal / N;
  if (want_grad) out.grad_M /= static_cast<double>(N);
  return out;
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
}

// Maximizer of s_c - [c == y] - s_y + 1 over c, for a fixed label y.
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

// State at (lambda*(M), M) with lambda* the exact minimizer over
// lambda >= lambda_min(M). Samples tied on the breakpoint get flip weight
// theta so the lambda slope vanishes; when lambda* sits on lambda_min the
// slope left over is positive and the projection passes it on to M.
struct ExactState {
  double lambda = 0.0;
  double objective = 0.0;
  double g_lambda = 0.0;
  Matrix grad_M;
};

ExactState exact_state(const Matrix& M, const Dataset& data, double eps,
                       double kappa, NormKind cost_norm) {
  const int N = data.sample_count();
  const int C = data.class_count();
  const bool regularized = kappa == kInfinity;
  const Matrix scores = data.features() * M.transpose();
  std::vector<double> a(static_cast<std::size_t>(N));
  std::vector<double> b(static_cast<std::size_t>(N), -kInfinity);
  std::vector<int> va(static_cast<std::size_t>(N));
  std::vector<int> vb(static_cast<std::size_t>(N), 0);
  std::vector<int> yb(static_cast<std::size_t>(N), 0);
  for (int n = 0; n < N; ++n) {
    const auto k = static_cast<std::size_t>(n);
    const Vector s = scores.row(n).transpose();
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
  const detail::DualChoice dual = detail::choose_dual(
      a, b, 0.0, max_pair_modulus(M, cost_norm), eps, kappa, true);

  ExactState out;
  out.lambda = dual.lambda;
  out.objective = dual.objective;
  out.g_lambda = dual.g_lambda;
  out.grad_M = Matrix::Zero(M.rows(), M.cols());
  for (int n = 0; n < N; ++n) {
    const auto k = static_cast<std::size_t>(n);
    const auto x = data.features().row(n);
    const double w_flip = dual.flip_weight[k];
    const int label = data.label(n);
    if (w_flip < 1.0 && va[k] != label) {
      out.grad_M.row(va[k]) += (1.0 - w_flip) * x;
      out.grad_M.row(label) -= (1.0 - w_flip) * x;
    }
    if (w_flip > 0.0 && vb[k] != yb[k]) {
      out.grad_M.row(vb[k]) += w_flip * x;
      out.grad_M.row(yb[k]) -= w_flip * x;
    }
  }
  out.grad_M /= static_cast<double>(N);
  return out;
}

// Two-block projected iteration on (lambda, M). With exact_lambda, lambda is
// reset to its minimizer for the new M after every projected step.
LinearFit run_projected_subgradient(const Dataset& data, double eps,
                                    double kappa, NormKind cost_norm,
                                    const SolverOptions& opts) {
  opts.validate();
  const bool regularized = kappa == kInfinity;
  const int C = data.class_count();
  const int P = data.feature_count();
  const bool exact = opts.exact_lambda;

  double lambda = 0.0;
  Matrix M = Matrix::Zero(C, P);
  double g_lambda = 0.0;
  Matrix grad_M;
  auto refresh = [&]() {
    if (exact) {
      ExactState st = exact_state(M, data, eps, kappa, cost_norm);
      lambda = st.lambda;
      g_lambda = st.g_lambda;
      grad_M = std::move(st.grad_M);
      return st.objective;
    }
    Evaluation e = evaluate(lambda, M, data, eps, kappa, true);
    g_lambda = eps;
    if (!regularized) g_lambda -= kappa * e.flips / data.sample_count();
    grad_M = std::move(e.grad_M);
    if (regularized) {
      // lambda only enters through eps*lambda; score the tightest feasible one.
      return eps * max_pair_modulus(M, cost_norm) + e.mean_nominal;
    }
    return e.objective;
  };
  refresh();

  LinearFit result;
  SubgradientTrace& trace = result.trace;
  trace.objectives.reserve(static_cast<std::size_t>(opts.iterations));
  trace.best_M = M;

  for (int t = 1; t <= opts.iterations; ++t) {
    const double step = opts.initial_step / t;
    const Projection next =
        project_feasible(lambda - step * g_lambda, M - step * grad_M,
                         cost_norm, opts.projection_tol);
    lambda = next.lambda;
    M = next.M;
    const double value = refresh();
    trace.objectives.push_back(value);
    if (value < trace.best_objective) {
      trace.best_objective = value;
      trace.best_lambda = lambda;
      trace.best_M = M;
    }
  }
  trace.iterations = opts.iterations;

  result.model.M = trace.best_M;
  result.model.lambda =
      regularized ? max_pair_modulus(trace.best_M, cost_norm) : trace.best_lambda;
  result.model.objective = trace.best_objective;
  return result;
}

}  // namespace

void loss_profile(const Matrix& M, const Dataset& data, std::vector<double>& a,
                  std::vector<double>& b) {
  check_shapes(M, data);
  const int N = data.sample_count();
  const int C = data.class_count();
  const Matrix scores = data.features() * M.transpose();
  a.assign(static_cast<std::size_t>(N), 0.0);
  b.assign(static_cast<std::size_t>(N), -kInfinity);
  for (int n = 0; n < N; ++n) {
    const Vector s = scores.row(n).transpose();
    const auto k = static_cast<std::size_t>(n);
    a[k] = cs_loss_from_scores(s, data.label(n));
    for (int y = 0; y < C; ++y) {
      if (y != data.label(n)) b[k] = std::max(b[k], cs_loss_from_scores(s, y));
    }
  }
}

double optimal_dual_scale(const std::vector<double>& a,
                          const std::vector<double>& b, double lambda_min,
                          double eps, double kappa) {
  if (a.size() != b.size()) throw DimensionError("a and b differ in length");
  if (kappa == 0.0 || kappa == kInfinity || a.empty()) return lambda_min;
  const double N = static_cast<double>(a.size());
  std::vector<double> breaks;
  breaks.reserve(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double beta = (b[n] - a[n]) / kappa;
    if (beta > lambda_min) breaks.push_back(beta);
  }
  // The slope is nonnegative once at most eps*N/kappa breakpoints lie above.
  const double allowed = eps * N / kappa;
  if (static_cast<double>(breaks.size()) <= allowed) return lambda_min;
  const auto k = static_cast<std::size_t>(std::floor(allowed));
  std::nth_element(breaks.begin(), breaks.begin() + static_cast<std::ptrdiff_t>(k),
                   breaks.end(), std::greater<>());
  return breaks[k];
}

double flip_price(double lambda, double kappa) {
  if (kappa == kInfinity) return kInfinity;
  return lambda * kappa;
}

RobustTerm robust_term(const Vector& scores, int label, double price) {
  RobustTerm best{-kInfinity, 0, label, false};
  const auto C = static_cast<int>(scores.size());
  auto consider = [&](int y, double penalty) {
    int arg = 0;
    double top = -kInfinity;
    for (int c = 0; c < C; ++c) {
      const double val = scores[c] - (c == y ? 1.0 : 0.0);
      if (val > top) {
        top = val;
        arg = c;
      }
    }
    const double total = top - scores[y] + 1.0 - penalty;
    if (total > best.value) best = {total, arg, y, y != label};
  };
  consider(label, 0.0);
  if (price != kInfinity) {
    for (int y = 0; y < C; ++y) {
      if (y != label) consider(y, price);
    }
  }
  return best;
}

double objective(double lambda, const Matrix& M, const Dataset& data,
                 double eps, double kappa) {
  check_lambda(lambda);
  return evaluate(lambda, M, data, eps, kappa, false).objective;
}

double shifted_objective(double lambda, const Matrix& M, const Dataset& data,
                         double eps, double kappa) {
  return objective(lambda, M, data, eps, kappa) - 1.0;
}

double subgrad_lambda(double lambda, const Matrix& M, const Dataset& data,
                      double eps, double kappa) {
  check_lambda(lambda);
  if (kappa == kInfinity) return eps;
  const Evaluation e = evaluate(lambda, M, data, eps, kappa, false);
  return eps - kappa * e.flips / data.sample_count();
}

Matrix subgrad_M(double lambda, const Matrix& M, const Dataset& data,
                 double kappa) {
  check_lambda(lambda);
  return evaluate(lambda, M, data, 0.0, kappa, true).grad_M;
}

LinearFit fit(const Dataset& data, const Hyperparams& hp) {
  hp.validate();
  if (hp.regularized()) {
    return fit_regularized_traced(data, hp.epsilon, hp.cost_norm, hp.solver);
  }
  return run_projected_subgradient(data, hp.epsilon, hp.kappa, hp.cost_norm,
                                   hp.solver);
}

LinearFit fit_best_step(const Dataset& data, const Hyperparams& hp,
                        const std::vector<double>& steps, double* chosen_step) {
  if (steps.empty()) throw InvalidArgument("step grid is empty");
  LinearFit best;
  bool have = false;
  for (double step : steps) {
    Hyperparams h = hp;
    h.solver.initial_step = step;
    LinearFit run = fit(data, h);
    if (!have || run.model.objective < best.model.objective) {
      best = std::move(run);
      have = true;
      if (chosen_step != nullptr) *chosen_step = step;
    }
  }
  return best;
}

std::vector<double> default_step_grid() { return {1e-2, 1e-1, 1.0, 1e1, 1e2}; }

LinearFit fit_regularized_traced(const Dataset& data, double eps,
                                 NormKind cost_norm,
                                 const SolverOptions& options) {
  if (!(eps >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
  return run_projected_subgradient(data, eps, kInfinity, cost_norm, options);
}

LinearModel fit_regularized(const Dataset& data, double eps,
                            NormKind cost_norm, const SolverOptions& options) {
  return fit_regularized_traced(data, eps, cost_norm, options).model;
}

}  // namespace wdrmsvm
