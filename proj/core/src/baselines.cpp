#include "wdrmsvm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "dual_scale.hpp"
#include "wdrmsvm/kernel.hpp"
#include "wdrmsvm/linear_solver.hpp"
#include "wdrmsvm/loss.hpp"

namespace wdrmsvm {
namespace {

Vector class_signs(const Dataset& data, int cls) {
  if (cls < 0 || cls >= data.class_count()) {
    throw InvalidArgument("class index out of range");
  }
  Vector z(data.sample_count());
  for (int n = 0; n < data.sample_count(); ++n) {
    z[n] = data.label(n) == cls ? 1.0 : -1.0;
  }
  return z;
}

// Nominal hinge a_n = max(0, 1 - z m) and moved hinge b_n = 1 + z m for
// margins m.
void hinge_profile(const Vector& margins, const Vector& z, std::vector<double>& a,
                   std::vector<double>& b, bool regularized) {
  const auto N = static_cast<std::size_t>(margins.size());
  a.resize(N);
  b.resize(N);
  for (std::size_t n = 0; n < N; ++n) {
    const double zm = z[static_cast<Eigen::Index>(n)] * margins[static_cast<Eigen::Index>(n)];
    a[n] = std::max(0.0, 1.0 - zm);
    b[n] = regularized ? -kInfinity : 1.0 + zm;
  }
}

// d/dm of the per-sample term, weighted by the moved branch.
Vector margin_gradient(const Vector& margins, const Vector& z,
                       const std::vector<double>& flip_weight) {
  Vector g(margins.size());
  for (Eigen::Index n = 0; n < margins.size(); ++n) {
    const double w = flip_weight[static_cast<std::size_t>(n)];
    const double nominal = 1.0 - z[n] * margins[n] > 0.0 ? -z[n] : 0.0;
    g[n] = (1.0 - w) * nominal + w * z[n];
  }
  return g / static_cast<double>(margins.size());
}

// Euclidean projection of (t0, w0) onto { ||w||_1 <= t }.
void project_l1_cone(double& t, Vector& w) {
  if (w.cwiseAbs().sum() <= t) return;
  std::vector<double> mags(w.data(), w.data() + w.size());
  for (double& m : mags) m = std::abs(m);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double prefix = 0.0;
  double mu = -1.0;
  for (std::size_t k = 1; k <= mags.size(); ++k) {
    prefix += mags[k - 1];
    const double cand = (prefix - t) / (static_cast<double>(k) + 1.0);
    const double lower = k < mags.size() ? mags[k] : 0.0;
    if (cand >= lower && cand <= mags[k - 1]) {
      mu = cand;
      break;
    }
  }
  if (mu < 0.0 || t + mu <= 0.0) {
    t = 0.0;
    w.setZero();
    return;
  }
  for (Eigen::Index p = 0; p < w.size(); ++p) {
    w[p] = std::copysign(std::max(std::abs(w[p]) - mu, 0.0), w[p]);
  }
  t += mu;
}

// Euclidean projection of (t0, w0) onto { ||w||_inf <= t }.
void project_linf_cone(double& t, Vector& w) {
  if (w.cwiseAbs().maxCoeff() <= t) return;
  std::vector<double> mags(w.data(), w.data() + w.size());
  for (double& m : mags) m = std::abs(m);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double prefix = 0.0;
  double level = -1.0;
  for (std::size_t k = 1; k <= mags.size(); ++k) {
    prefix += mags[k - 1];
    const double cand = (t + prefix) / (static_cast<double>(k) + 1.0);
    const double lower = k < mags.size() ? mags[k] : 0.0;
    if (cand >= lower && cand <= mags[k - 1]) {
      level = cand;
      break;
    }
  }
  if (level <= 0.0) {
    t = 0.0;
    w.setZero();
    return;
  }
  t = level;
  for (Eigen::Index p = 0; p < w.size(); ++p) {
    w[p] = std::clamp(w[p], -level, level);
  }
}

void project_cone(double& t, Vector& w, NormKind cost_norm) {
  if (dual(cost_norm) == NormKind::L1) project_l1_cone(t, w);
  else project_linf_cone(t, w);
}

void run_parallel(int count, int threads, const std::function<void(int)>& job) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::vector<std::thread> pool;
  const int workers = std::min(threads, count);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

double OvaModel::total_objective() const {
  double s = 0.0;
  for (double v : objectives) s += v;
  return s;
}

double KernelOvaModel::total_objective() const {
  double s = 0.0;
  for (double v : objectives) s += v;
  return s;
}

double ova_objective(const Vector& w, double lambda, const Dataset& data,
                     int cls, double eps, double kappa) {
  if (w.size() != data.feature_count()) {
    throw DimensionError("weight vector length does not match features");
  }
  const Vector z = class_signs(data, cls);
  std::vector<double> a;
  std::vector<double> b;
  hinge_profile(data.features() * w, z, a, b, kappa == kInfinity);
  return detail::choose_dual(a, b, lambda, lambda, eps, kappa, false).objective;
}

LpModel build_ova_lp(const Dataset& data, int cls, const Hyperparams& hp) {
  hp.validate();
  const Vector z = class_signs(data, cls);
  const int N = data.sample_count();
  const int P = data.feature_count();
  const Matrix& X = data.features();
  LpModel lp;
  std::vector<int> w(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) {
    w[static_cast<std::size_t>(p)] =
        lp.add_variable("w_" + std::to_string(p + 1), -kInfinity, kInfinity);
  }
  const int lambda = lp.add_variable("lambda", 0.0, kInfinity, hp.epsilon);
  std::vector<int> s(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) {
    s[static_cast<std::size_t>(n)] =
        lp.add_variable("s_" + std::to_string(n + 1), 0.0, kInfinity, 1.0 / N);
  }
  for (int n = 0; n < N; ++n) {
    const std::string id = std::to_string(n + 1);
    std::vector<LpTerm> nominal{{s[static_cast<std::size_t>(n)], 1.0}};
    std::vector<LpTerm> moved{{s[static_cast<std::size_t>(n)], 1.0}};
    for (int p = 0; p < P; ++p) {
      const double c = z[n] * X(n, p);
      if (c == 0.0) continue;
      nominal.push_back({w[static_cast<std::size_t>(p)], c});
      moved.push_back({w[static_cast<std::size_t>(p)], -c});
    }
    lp.add_constraint("hinge_" + id, std::move(nominal), Sense::GreaterEqual, 1.0);
    if (!hp.regularized()) {
      if (hp.kappa != 0.0) moved.push_back({lambda, hp.kappa});
      lp.add_constraint("moved_" + id, std::move(moved), Sense::GreaterEqual, 1.0);
    }
  }
  if (dual(hp.cost_norm) == NormKind::L1) {
    std::vector<LpTerm> sum{{lambda, 1.0}};
    for (int p = 0; p < P; ++p) {
      const std::string id = std::to_string(p + 1);
      const int u = lp.add_variable("u_" + id);
      const int wp = w[static_cast<std::size_t>(p)];
      lp.add_constraint("abs_pos_" + id, {{u, 1.0}, {wp, -1.0}}, Sense::GreaterEqual, 0.0);
      lp.add_constraint("abs_neg_" + id, {{u, 1.0}, {wp, 1.0}}, Sense::GreaterEqual, 0.0);
      sum.push_back({u, -1.0});
    }
    lp.add_constraint("norm", std::move(sum), Sense::GreaterEqual, 0.0);
  } else {
    for (int p = 0; p < P; ++p) {
      const std::string id = std::to_string(p + 1);
      const int wp = w[static_cast<std::size_t>(p)];
      lp.add_constraint("norm_pos_" + id, {{lambda, 1.0}, {wp, -1.0}}, Sense::GreaterEqual, 0.0);
      lp.add_constraint("norm_neg_" + id, {{lambda, 1.0}, {wp, 1.0}}, Sense::GreaterEqual, 0.0);
    }
  }
  return lp;
}

OvaClassFit fit_ova_class_simplex(const Dataset& data, int cls,
                                  const Hyperparams& hp) {
  const LpModel lp = build_ova_lp(data, cls, hp);
  const LpSolution sol = solve_lp(lp);
  const int P = data.feature_count();
  OvaClassFit out;
  out.w = Vector(P);
  for (int p = 0; p < P; ++p) out.w[p] = sol.values[static_cast<std::size_t>(p)];
  out.lambda = sol.values[static_cast<std::size_t>(P)];
  out.objective = sol.objective;
  return out;
}

OvaClassFit fit_ova_class_subgradient(const Dataset& data, int cls,
                                      const Hyperparams& hp) {
  hp.validate();
  const SolverOptions& opts = hp.solver;
  const Vector z = class_signs(data, cls);
  const Matrix& X = data.features();
  const bool regularized = hp.regularized();
  const bool exact = opts.exact_lambda && !regularized;
  const NormKind bound_norm = dual(hp.cost_norm);

  Vector w = Vector::Zero(data.feature_count());
  double lambda = 0.0;
  std::vector<double> a;
  std::vector<double> b;
  Vector grad_w;
  double g_lambda = 0.0;
  auto refresh = [&](bool use_exact) {
    const Vector margins = X * w;
    hinge_profile(margins, z, a, b, regularized);
    const double lmin = norm(w, bound_norm);
    const detail::DualChoice d = detail::choose_dual(
        a, b, regularized ? lmin : lambda, lmin, hp.epsilon, hp.kappa, use_exact);
    if (use_exact || regularized) lambda = d.lambda;
    g_lambda = d.g_lambda;
    grad_w = X.transpose() * margin_gradient(margins, z, d.flip_weight);
    return d.objective;
  };
  refresh(false);

  OvaClassFit best{w, lambda, kInfinity};
  for (int t = 1; t <= opts.iterations; ++t) {
    const double step = opts.initial_step / t;
    double next_lambda = lambda - step * g_lambda;
    Vector next_w = w - step * grad_w;
    project_cone(next_lambda, next_w, hp.cost_norm);
    lambda = next_lambda;
    w = std::move(next_w);
    const double value = refresh(exact);
    if (value < best.objective) best = {w, lambda, value};
  }
  return best;
}

OvaModel fit_dr_ova(const Dataset& data, const Hyperparams& hp,
                    const OvaOptions& options) {
  hp.validate();
  const int C = data.class_count();
  std::vector<OvaClassFit> fits(static_cast<std::size_t>(C));
  auto job = [&](int c) {
    if (options.solver == OvaSolver::Simplex) {
      fits[static_cast<std::size_t>(c)] = fit_ova_class_simplex(data, c, hp);
      return;
    }
    std::vector<double> steps = options.steps;
    if (steps.empty()) steps.push_back(hp.solver.initial_step);
    OvaClassFit best;
    best.objective = kInfinity;
    for (double step : steps) {
      Hyperparams h = hp;
      h.solver.initial_step = step;
      OvaClassFit f = fit_ova_class_subgradient(data, c, h);
      if (f.objective < best.objective) best = std::move(f);
    }
    fits[static_cast<std::size_t>(c)] = std::move(best);
  };
  run_parallel(C, options.threads, job);

  OvaModel model;
  model.cost_norm = hp.cost_norm;
  model.W = Matrix(C, data.feature_count());
  for (int c = 0; c < C; ++c) {
    const OvaClassFit& f = fits[static_cast<std::size_t>(c)];
    model.W.row(c) = f.w.transpose();
    model.lambdas.push_back(std::max(f.lambda, norm(f.w, dual(hp.cost_norm))));
    model.objectives.push_back(f.objective);
  }
  return model;
}

int predict_ova(const OvaModel& model, const Vector& x) {
  return predict(model.W, x);
}

std::vector<int> predict_ova_all(const OvaModel& model, const Matrix& features) {
  return predict_all(model.W, features);
}

KernelOvaModel fit_kernel_ova(const Dataset& data, const Hyperparams& hp,
                              const KernelConfig& kernel,
                              const std::vector<double>& steps) {
  hp.validate();
  const GramMatrix G = gram(data.features(), kernel);
  const Matrix& K = G.K;
  const int C = data.class_count();
  const int N = data.sample_count();
  const bool regularized = hp.regularized();
  std::vector<double> grid = steps;
  if (grid.empty()) grid.push_back(hp.solver.initial_step);

  KernelOvaModel model;
  model.alpha = Matrix::Zero(C, N);
  model.train_features = data.features();
  model.kernel = G.kernel;

  for (int c = 0; c < C; ++c) {
    const Vector z = class_signs(data, c);
    Vector best_alpha = Vector::Zero(N);
    double best_lambda = 0.0;
    double best_value = kInfinity;
    for (double step0 : grid) {
      Vector alpha = Vector::Zero(N);
      double lambda = 0.0;
      std::vector<double> a;
      std::vector<double> b;
      Vector grad;
      double slope = 0.0;
      // lambda is always its exact minimizer over [||w||_H, inf); the bound
      // reaches alpha through the lambda slope.
      auto refresh = [&]() {
        const Vector margins = K * alpha;
        hinge_profile(margins, z, a, b, regularized);
        const double lmin = h_norm(alpha, K);
        const detail::DualChoice d = detail::choose_dual(
            a, b, lmin, lmin, hp.epsilon, hp.kappa, true);
        lambda = d.lambda;
        slope = regularized ? hp.epsilon : d.bound_slope;
        grad = K * margin_gradient(margins, z, d.flip_weight);
        return d.objective;
      };
      refresh();
      for (int t = 1; t <= hp.solver.iterations; ++t) {
        const double step = step0 / t;
        const double h = h_norm(alpha, K);
        Vector g = grad;
        if (h > 0.0 && slope > 0.0) g += slope * (K * alpha) / h;
        alpha -= step * g;
        const double value = refresh();
        if (value < best_value) {
          best_value = value;
          best_alpha = alpha;
          best_lambda = lambda;
        }
      }
    }
    model.alpha.row(c) = best_alpha.transpose();
    model.lambdas.push_back(std::max(best_lambda, h_norm(best_alpha, K)));
    model.objectives.push_back(best_value);
  }
  return model;
}

std::vector<int> predict_kernel_ova_all(const KernelOvaModel& model,
                                        const Matrix& features) {
  if (features.cols() != model.train_features.cols()) {
    throw DimensionError("feature count does not match the model");
  }
  const Matrix S =
      model.alpha * cross_kernel(model.train_features, features, model.kernel);
  std::vector<int> out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index n = 0; n < features.rows(); ++n) {
    out[static_cast<std::size_t>(n)] = argmax_lowest(S.col(n));
  }
  return out;
}

double rmlr_loss(const Matrix& W, const Dataset& data, double reg) {
  if (W.rows() != data.class_count() || W.cols() != data.feature_count()) {
    throw DimensionError("weight matrix must be C x P");
  }
  const Matrix S = W * data.features().transpose();  // C x N
  double total = 0.0;
  for (int n = 0; n < data.sample_count(); ++n) {
    const double top = S.col(n).maxCoeff();
    const double lse = top + std::log((S.col(n).array() - top).exp().sum());
    total += lse - S(data.label(n), n);
  }
  return total / data.sample_count() + reg * W.squaredNorm();
}

Matrix rmlr_gradient(const Matrix& W, const Dataset& data, double reg) {
  if (W.rows() != data.class_count() || W.cols() != data.feature_count()) {
    throw DimensionError("weight matrix must be C x P");
  }
  const Matrix& X = data.features();
  Matrix R = W * X.transpose();  // C x N, becomes softmax - onehot
  for (int n = 0; n < data.sample_count(); ++n) {
    const double top = R.col(n).maxCoeff();
    R.col(n) = (R.col(n).array() - top).exp().matrix();
    R.col(n) /= R.col(n).sum();
    R(data.label(n), n) -= 1.0;
  }
  return R * X / data.sample_count() + 2.0 * reg * W;
}

RmlrFit fit_rmlr(const Dataset& data, double reg, int iterations,
                 double tolerance) {
  if (!(reg >= 0.0)) throw InvalidArgument("reg_strength must be >= 0");
  if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
  const Matrix& X = data.features();
  const double spectral = Eigen::JacobiSVD<Matrix>(X).singularValues()[0];
  const double smooth =
      spectral * spectral / (2.0 * data.sample_count()) + 2.0 * reg;
  const double step = smooth > 0.0 ? 1.0 / smooth : 1.0;

  RmlrFit out;
  out.W = Matrix::Zero(data.class_count(), data.feature_count());
  Matrix g = rmlr_gradient(out.W, data, reg);
  out.grad_norm = g.norm();
  while (out.iterations < iterations && out.grad_norm > tolerance) {
    out.W -= step * g;
    g = rmlr_gradient(out.W, data, reg);
    out.grad_norm = g.norm();
    ++out.iterations;
  }
  out.converged = out.grad_norm <= tolerance;
  out.loss = rmlr_loss(out.W, data, reg);
  return out;
}

LinearModel fit_rmsvm(const Dataset& data, double eps, NormKind cost_norm,
                      const SolverOptions& options) {
  return fit_regularized(data, eps, cost_norm, options);
}

}  // namespace wdrmsvm
