// Dense two-phase tableau simplex. Entering columns follow Bland's rule
// (lowest index with negative reduced cost); the leaving row comes from a
// two-pass ratio test that prefers large pivots among near-minimal ratios,
// with ties going to the lowest basic index. The tableau is periodically
// rebuilt from the original columns with an LU factorization of the basis
// so that round-off does not accumulate. Intended as a verification oracle
// on small instances, not as a production LP solver.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/LU>

#include "wdrmsvm/reference_solver.hpp"

namespace wdrmsvm {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kFeasTol = 1e-8;
constexpr double kUnboundedTol = 1e-7;
constexpr double kRatioSlack = 1e-9;

// Original variable x_j = offset + sum_k sign_k * z_{col_k}, z >= 0.
struct VarMap {
  double offset = 0.0;
  int pos = -1;  // column with sign +1
  int neg = -1;  // column with sign -1
};

struct StdRow {
  std::vector<std::pair<int, double>> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

struct Standardized {
  std::vector<VarMap> vars;
  int structural = 0;
  std::vector<StdRow> rows;
  std::vector<double> cost;  // per structural column
  double cost_offset = 0.0;
};

Standardized standardize(const LpModel& model) {
  Standardized out;
  const std::size_t n = model.variables.size();
  out.vars.resize(n);
  int next = 0;
  std::vector<StdRow> bound_rows;
  for (std::size_t j = 0; j < n; ++j) {
    const LpVariable& v = model.variables[j];
    VarMap& m = out.vars[j];
    if (std::isfinite(v.lower)) {
      m.offset = v.lower;
      m.pos = next++;
      if (std::isfinite(v.upper)) {
        bound_rows.push_back({{{m.pos, 1.0}}, Sense::LessEqual, v.upper - v.lower});
      }
    } else if (std::isfinite(v.upper)) {
      m.offset = v.upper;
      m.neg = next++;
    } else {
      m.pos = next++;
      m.neg = next++;
    }
  }
  out.structural = next;
  out.cost.assign(static_cast<std::size_t>(next), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double c = model.objective[j];
    const VarMap& m = out.vars[j];
    out.cost_offset += c * m.offset;
    if (m.pos >= 0) out.cost[static_cast<std::size_t>(m.pos)] += c;
    if (m.neg >= 0) out.cost[static_cast<std::size_t>(m.neg)] -= c;
  }
  for (const LpConstraint& con : model.constraints) {
    StdRow row;
    row.sense = con.sense;
    row.rhs = con.rhs;
    for (const LpTerm& t : con.terms) {
      const VarMap& m = out.vars[static_cast<std::size_t>(t.var)];
      row.rhs -= t.coef * m.offset;
      if (m.pos >= 0) row.terms.emplace_back(m.pos, t.coef);
      if (m.neg >= 0) row.terms.emplace_back(m.neg, -t.coef);
    }
    out.rows.push_back(std::move(row));
  }
  for (StdRow& r : bound_rows) out.rows.push_back(std::move(r));
  return out;
}

// Tableau over the standardized columns plus a cost row. `A0`/`b0` keep the
// original data so the tableau can be rebuilt for the current basis.
class Tableau {
 public:
  Tableau(Matrix A0, Vector b0) : A0_(std::move(A0)), b0_(std::move(b0)) {
    T_ = A0_;
    rhs_ = b0_;
    cost_ = Vector::Zero(A0_.cols());
  }

  int rows() const { return static_cast<int>(T_.rows()); }
  int cols() const { return static_cast<int>(T_.cols()); }
  double at(int r, int c) const { return T_(r, c); }
  double rhs(int r) const { return rhs_[r]; }
  double cost(int c) const { return cost_[c]; }
  double objective() const { return objective_; }

  void set_costs(const Vector& c, const std::vector<int>& basis) {
    phase_cost_ = c;
    price(basis);
  }

  void pivot(int pr, int pc) {
    const double inv = 1.0 / T_(pr, pc);
    T_.row(pr) *= inv;
    rhs_[pr] *= inv;
    T_(pr, pc) = 1.0;
    for (int r = 0; r < rows(); ++r) {
      if (r == pr) continue;
      const double f = T_(r, pc);
      if (f == 0.0) continue;
      T_.row(r) -= f * T_.row(pr);
      rhs_[r] -= f * rhs_[pr];
      T_(r, pc) = 0.0;
    }
    const double f = cost_[pc];
    if (f != 0.0) {
      cost_ -= f * T_.row(pr).transpose();
      objective_ -= f * rhs_[pr];
      cost_[pc] = 0.0;
    }
  }

  // Rebuilds the tableau as B^{-1} [A0 | b0] for the current basis.
  void reinvert(const std::vector<int>& basis) {
    const int m = rows();
    Matrix B(m, m);
    for (int i = 0; i < m; ++i) B.col(i) = A0_.col(basis[static_cast<std::size_t>(i)]);
    const Eigen::PartialPivLU<Matrix> lu(B);
    T_ = lu.solve(A0_);
    rhs_ = lu.solve(b0_);
    for (int i = 0; i < m; ++i) {
      T_.col(basis[static_cast<std::size_t>(i)]).setZero();
      T_(i, basis[static_cast<std::size_t>(i)]) = 1.0;
    }
    price(basis);
  }

 private:
  void price(const std::vector<int>& basis) {
    Vector cb(rows());
    for (int i = 0; i < rows(); ++i) cb[i] = phase_cost_[basis[static_cast<std::size_t>(i)]];
    cost_ = phase_cost_ - T_.transpose() * cb;
    for (int b : basis) cost_[b] = 0.0;
    objective_ = -cb.dot(rhs_);
  }

  Matrix A0_;
  Vector b0_;
  Matrix T_;
  Vector rhs_;
  Vector cost_;
  Vector phase_cost_;
  double objective_ = 0.0;  // minus the current objective value
};

enum class Outcome { Optimal, Unbounded };

int leaving_row(const Tableau& tab, const std::vector<int>& basis, int c) {
  const int m = tab.rows();
  // Pass 1: smallest ratio with every rhs relaxed by kRatioSlack.
  double bound = kInfinity;
  for (int r = 0; r < m; ++r) {
    const double a = tab.at(r, c);
    if (a > kPivotTol) {
      bound = std::min(bound, (std::max(tab.rhs(r), 0.0) + kRatioSlack) / a);
    }
  }
  if (bound == kInfinity) return -1;
  // Pass 2: among rows within the bound, the largest pivot element.
  int row = -1;
  double best = 0.0;
  for (int r = 0; r < m; ++r) {
    const double a = tab.at(r, c);
    if (a <= kPivotTol || std::max(tab.rhs(r), 0.0) / a > bound) continue;
    if (row < 0 || a > best * (1.0 + 1e-12) ||
        (a >= best * (1.0 - 1e-12) &&
         basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(row)])) {
      row = r;
      best = std::max(best, a);
    }
  }
  return row;
}

Outcome run_simplex(Tableau& tab, std::vector<int>& basis,
                    const std::vector<bool>& allowed, int& iterations,
                    int max_iterations) {
  const int n = tab.cols();
  const int reinvert_every = std::max(50, tab.rows() / 4);
  int since_reinvert = 0;
  bool verified = false;
  while (true) {
    // A column with no admissible pivot proves unboundedness only when its
    // reduced cost is clearly negative; otherwise it is round-off.
    int enter = -1;
    int leave = -1;
    for (int c = 0; c < n && enter < 0; ++c) {
      if (!allowed[static_cast<std::size_t>(c)] || tab.cost(c) >= -kCostTol) {
        continue;
      }
      const int row = leaving_row(tab, basis, c);
      if (row >= 0) {
        enter = c;
        leave = row;
      } else if (tab.cost(c) < -kUnboundedTol) {
        return Outcome::Unbounded;
      }
    }
    if (enter < 0) {
      // Confirm optimality on a freshly rebuilt tableau.
      if (verified || since_reinvert == 0) return Outcome::Optimal;
      tab.reinvert(basis);
      since_reinvert = 0;
      verified = true;
      continue;
    }
    verified = false;
    tab.pivot(leave, enter);
    basis[static_cast<std::size_t>(leave)] = enter;
    if (++since_reinvert >= reinvert_every) {
      tab.reinvert(basis);
      since_reinvert = 0;
    }
    if (++iterations > max_iterations) {
      throw SolverFailure("simplex iteration limit reached");
    }
  }
}

}  // namespace

LpSolution solve_lp(const LpModel& model, int max_rows) {
  model.validate();
  Standardized sf = standardize(model);
  const int m = static_cast<int>(sf.rows.size());
  if (m > max_rows) {
    throw CapacityError("LP has " + std::to_string(m) +
                        " rows after standardization; cap is " +
                        std::to_string(max_rows));
  }

  // Normalize to rhs >= 0, then count slack and artificial columns.
  for (StdRow& r : sf.rows) {
    if (r.rhs < 0.0) {
      r.rhs = -r.rhs;
      for (auto& t : r.terms) t.second = -t.second;
      if (r.sense == Sense::LessEqual) {
        r.sense = Sense::GreaterEqual;
      } else if (r.sense == Sense::GreaterEqual) {
        r.sense = Sense::LessEqual;
      }
    }
  }
  int slack_count = 0;
  int artificial_count = 0;
  for (const StdRow& r : sf.rows) {
    if (r.sense != Sense::Equal) ++slack_count;
    if (r.sense != Sense::LessEqual) ++artificial_count;
  }
  const int n_struct = sf.structural;
  const int first_art = n_struct + slack_count;
  const int n_cols = first_art + artificial_count;

  Matrix A0 = Matrix::Zero(m, n_cols);
  Vector b0(m);
  std::vector<int> basis(static_cast<std::size_t>(m), -1);
  int slack = n_struct;
  int art = first_art;
  for (int i = 0; i < m; ++i) {
    const StdRow& r = sf.rows[static_cast<std::size_t>(i)];
    for (const auto& [col, coef] : r.terms) A0(i, col) += coef;
    b0[i] = r.rhs;
    if (r.sense == Sense::LessEqual) {
      A0(i, slack) = 1.0;
      basis[static_cast<std::size_t>(i)] = slack++;
    } else if (r.sense == Sense::GreaterEqual) {
      A0(i, slack++) = -1.0;
      A0(i, art) = 1.0;
      basis[static_cast<std::size_t>(i)] = art++;
    } else {
      A0(i, art) = 1.0;
      basis[static_cast<std::size_t>(i)] = art++;
    }
  }
  Tableau tab(std::move(A0), std::move(b0));

  int iterations = 0;
  const int max_iterations = 200 * (m + n_cols) + 1000;
  std::vector<bool> allowed(static_cast<std::size_t>(n_cols), true);

  // Phase 1: minimize the sum of artificials.
  if (artificial_count > 0) {
    Vector c1 = Vector::Zero(n_cols);
    c1.tail(artificial_count).setOnes();
    tab.set_costs(c1, basis);
    run_simplex(tab, basis, allowed, iterations, max_iterations);
    const double infeasibility = -tab.objective();
    if (infeasibility > kFeasTol * (1.0 + static_cast<double>(m))) {
      throw InfeasibleError("LP is infeasible (phase-1 residual " +
                            std::to_string(infeasibility) + ")");
    }
    // Drive zero-level artificials out of the basis where possible, using
    // the largest available pivot in the row.
    for (int i = 0; i < m; ++i) {
      if (basis[static_cast<std::size_t>(i)] < first_art) continue;
      int col = -1;
      double best = kPivotTol * 1e3;
      for (int c = 0; c < first_art; ++c) {
        if (std::abs(tab.at(i, c)) > best) {
          best = std::abs(tab.at(i, c));
          col = c;
        }
      }
      if (col >= 0) {
        tab.pivot(i, col);
        basis[static_cast<std::size_t>(i)] = col;
      }
      // Otherwise the row is redundant; the artificial stays basic at zero.
    }
    for (int c = first_art; c < n_cols; ++c) {
      allowed[static_cast<std::size_t>(c)] = false;
    }
  }

  // Phase 2: original costs.
  Vector c2 = Vector::Zero(n_cols);
  for (int c = 0; c < n_struct; ++c) c2[c] = sf.cost[static_cast<std::size_t>(c)];
  tab.set_costs(c2, basis);
  tab.reinvert(basis);
  if (run_simplex(tab, basis, allowed, iterations, max_iterations) ==
      Outcome::Unbounded) {
    throw UnboundedError("LP is unbounded");
  }

  std::vector<double> z(static_cast<std::size_t>(n_cols), 0.0);
  for (int i = 0; i < m; ++i) {
    z[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])] = tab.rhs(i);
  }

  LpSolution sol;
  sol.iterations = iterations;
  sol.values.resize(model.variables.size());
  for (std::size_t j = 0; j < model.variables.size(); ++j) {
    const VarMap& vm = sf.vars[j];
    double v = vm.offset;
    if (vm.pos >= 0) v += z[static_cast<std::size_t>(vm.pos)];
    if (vm.neg >= 0) v -= z[static_cast<std::size_t>(vm.neg)];
    sol.values[j] = v;
  }
  double obj = 0.0;
  for (std::size_t j = 0; j < model.variables.size(); ++j) {
    obj += model.objective[j] * sol.values[j];
  }
  sol.objective = obj;

  double residual = 0.0;
  for (const LpConstraint& con : model.constraints) {
    double lhs = 0.0;
    for (const LpTerm& t : con.terms) {
      lhs += t.coef * sol.values[static_cast<std::size_t>(t.var)];
    }
    double viol = 0.0;
    if (con.sense == Sense::LessEqual) viol = lhs - con.rhs;
    if (con.sense == Sense::GreaterEqual) viol = con.rhs - lhs;
    if (con.sense == Sense::Equal) viol = std::abs(lhs - con.rhs);
    residual = std::max(residual, viol);
  }
  for (std::size_t j = 0; j < model.variables.size(); ++j) {
    residual = std::max(residual, model.variables[j].lower - sol.values[j]);
    residual = std::max(residual, sol.values[j] - model.variables[j].upper);
  }
  sol.primal_residual = residual;
  return sol;
}

}  // namespace wdrmsvm
