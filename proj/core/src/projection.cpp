#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "wdrmsvm/linear_solver.hpp"
#include "wdrmsvm/loss.hpp"

namespace wdrmsvm {
namespace {

double column_range(const Matrix& M, Eigen::Index d) {
  return M.col(d).maxCoeff() - M.col(d).minCoeff();
}

double max_column_range(const Matrix& M) {
  double r = 0.0;
  for (Eigen::Index d = 0; d < M.cols(); ++d) r = std::max(r, column_range(M, d));
  return r;
}

// Derivative (up to a factor 2) of sum_i dist(col_i, [m - h, m + h])^2 in m.
double band_slope(const Vector& col, double m, double h) {
  double g = 0.0;
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    const double above = col[i] - (m + h);
    const double below = (m - h) - col[i];
    if (above > 0.0) g -= above;
    if (below > 0.0) g += below;
  }
  return g;
}

// Center of the width-2h band closest to the column in squared distance. The
// slope is piecewise linear and nondecreasing with kinks at col_i -+ h, so
// the root is found exactly by scanning sorted kinks and interpolating.
double band_center(const Vector& col, double h) {
  const double lo = col.minCoeff();
  const double hi = col.maxCoeff();
  if (hi - lo <= 2.0 * h) return 0.5 * (lo + hi);

  std::vector<double> kinks;
  kinks.reserve(static_cast<std::size_t>(2 * col.size()));
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    kinks.push_back(col[i] - h);
    kinks.push_back(col[i] + h);
  }
  std::sort(kinks.begin(), kinks.end());

  double prev_m = kinks.front();
  double prev_g = band_slope(col, prev_m, h);
  if (prev_g >= 0.0) return prev_m;
  for (std::size_t k = 1; k < kinks.size(); ++k) {
    const double m = kinks[k];
    const double g = band_slope(col, m, h);
    if (g >= 0.0) {
      if (g == prev_g) return m;
      return prev_m - prev_g * (m - prev_m) / (g - prev_g);
    }
    prev_m = m;
    prev_g = g;
  }
  return kinks.back();
}

struct BandResult {
  double distance_sq = 0.0;
  Matrix M;
};

BandResult clamp_to_bands(const Matrix& M_prime, double lambda) {
  const double h = 0.5 * std::max(lambda, 0.0);
  BandResult out{0.0, M_prime};
  for (Eigen::Index d = 0; d < M_prime.cols(); ++d) {
    const Vector col = M_prime.col(d);
    const double m = band_center(col, h);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      const double v = std::clamp(col[i], m - h, m + h);
      const double diff = col[i] - v;
      out.distance_sq += diff * diff;
      out.M(i, d) = v;
    }
  }
  return out;
}

// Slope in lambda of (lambda - lambda')^2 + squared clamp distance: twice
// (lambda - lambda') minus the overshoot of entries beyond their optimally
// centered band (envelope theorem).
double band_value_slope(const Matrix& M_prime, double lambda_prime, double lambda) {
  const double h = 0.5 * std::max(lambda, 0.0);
  double over = 0.0;
  for (Eigen::Index d = 0; d < M_prime.cols(); ++d) {
    const Vector col = M_prime.col(d);
    const double m = band_center(col, h);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      over += std::max(std::abs(col[i] - m) - h, 0.0);
    }
  }
  return 2.0 * (lambda - lambda_prime) - over;
}

// Projection of (t0, d0) with weight (t - t0)^2 + 1/2 ||d - d0||^2 onto
// ||d||_1 <= t. Returns the multiplier mu: d = soft(d0, mu), t = t0 + mu/2.
double l1_cone_multiplier(const std::vector<double>& abs_sorted_desc,
                          double t0) {
  double prefix = 0.0;
  const std::size_t P = abs_sorted_desc.size();
  for (std::size_t k = 1; k <= P; ++k) {
    prefix += abs_sorted_desc[k - 1];
    const double mu = (prefix - t0) / (static_cast<double>(k) + 0.5);
    const double upper = abs_sorted_desc[k - 1];
    const double lower = k < P ? abs_sorted_desc[k] : 0.0;
    if (mu >= lower && mu <= upper) return mu;
  }
  // Everything thresholded to zero: the apex.
  return std::max(-2.0 * t0, abs_sorted_desc.empty() ? 0.0 : abs_sorted_desc[0]);
}

using RowRef = Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

void project_pair_cone(double& lambda, RowRef row_i, RowRef row_j) {
  const Eigen::RowVectorXd diff = row_i - row_j;
  const Eigen::RowVectorXd sum = row_i + row_j;
  if (diff.cwiseAbs().sum() <= lambda) return;

  std::vector<double> a(static_cast<std::size_t>(diff.size()));
  for (Eigen::Index p = 0; p < diff.size(); ++p) {
    a[static_cast<std::size_t>(p)] = std::abs(diff[p]);
  }
  std::sort(a.begin(), a.end(), std::greater<>());
  const double mu = l1_cone_multiplier(a, lambda);

  Eigen::RowVectorXd d(diff.size());
  for (Eigen::Index p = 0; p < diff.size(); ++p) {
    const double mag = std::max(std::abs(diff[p]) - mu, 0.0);
    d[p] = std::copysign(mag, diff[p]);
  }
  lambda = std::max(lambda + 0.5 * mu, 0.0);
  row_i = 0.5 * (sum + d);
  row_j = 0.5 * (sum - d);
}

double max_pair_l1(const Matrix& M) {
  return max_pair_modulus(M, NormKind::LInf);
}

}  // namespace

Projection project(double lambda_prime, const Matrix& M_prime, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("projection tolerance must be > 0");
  const double range = max_column_range(M_prime);
  double lo = std::max(lambda_prime, 0.0);
  if (range <= lo) return {lo, M_prime};

  // The optimum lies in [max(lambda', 0), max column range]: raising lambda
  // past the range only adds (lambda - lambda')^2.
  // phi is convex and differentiable, so bisect on the sign of its slope;
  // this resolves lambda to rounding level rather than sqrt(eps).
  double hi = range;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (band_value_slope(M_prime, lambda_prime, mid) > 0.0) hi = mid;
    else lo = mid;
  }
  double lambda = 0.5 * (lo + hi);
  Projection out{lambda, clamp_to_bands(M_prime, lambda).M};
  // Rounding in the clamp can leave a deficit of a few ulps.
  out.lambda = std::max(out.lambda, max_column_range(out.M));
  return out;
}

Projection project_pairwise_l1(double lambda_prime, const Matrix& M_prime,
                               double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("projection tolerance must be > 0");
  const auto C = static_cast<int>(M_prime.rows());
  const auto P = M_prime.cols();
  double lambda = std::max(lambda_prime, 0.0);
  if (C < 2 || max_pair_l1(M_prime) <= lambda) {
    return {std::max(lambda_prime, 0.0), M_prime};
  }
  lambda = lambda_prime;

  struct Pair {
    int i, j;
    double dlambda = 0.0;
    Eigen::RowVectorXd di, dj;
  };
  std::vector<Pair> pairs;
  for (int i = 0; i < C; ++i) {
    for (int j = i + 1; j < C; ++j) {
      pairs.push_back({i, j, 0.0, Eigen::RowVectorXd::Zero(P),
                       Eigen::RowVectorXd::Zero(P)});
    }
  }

  Matrix M = M_prime;
  if (pairs.size() == 1) {
    project_pair_cone(lambda, M.row(0), M.row(1));
    return {lambda, M};
  }

  const double stop = tol * (1.0 + std::abs(lambda_prime) +
                             M_prime.cwiseAbs().maxCoeff());
  constexpr int kMaxSweeps = 20000;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double change = 0.0;
    for (Pair& pr : pairs) {
      // Dykstra: add back this set's correction, project, store the new one.
      double y_lambda = lambda + pr.dlambda;
      Eigen::RowVectorXd yi = M.row(pr.i) + pr.di;
      Eigen::RowVectorXd yj = M.row(pr.j) + pr.dj;
      double z_lambda = y_lambda;
      Eigen::RowVectorXd zi = yi;
      Eigen::RowVectorXd zj = yj;
      project_pair_cone(z_lambda, zi, zj);
      pr.dlambda = y_lambda - z_lambda;
      pr.di = yi - zi;
      pr.dj = yj - zj;
      change += std::abs(z_lambda - lambda) + (zi - M.row(pr.i)).cwiseAbs().sum() +
                (zj - M.row(pr.j)).cwiseAbs().sum();
      lambda = z_lambda;
      M.row(pr.i) = zi;
      M.row(pr.j) = zj;
    }
    if (change <= stop) break;
  }
  lambda = std::max({lambda, max_pair_l1(M), 0.0});
  return {lambda, M};
}

Projection project_feasible(double lambda_prime, const Matrix& M_prime,
                            NormKind cost_norm, double tol) {
  return cost_norm == NormKind::L1 ? project(lambda_prime, M_prime, tol)
                                   : project_pairwise_l1(lambda_prime, M_prime, tol);
}

}  // namespace wdrmsvm
