#include <algorithm>
#include <cmath>
#include <set>

#include "wdrmsvm/linear_solver.hpp"
#include "wdrmsvm/loss.hpp"
#include "wdrmsvm/reference_solver.hpp"

namespace wdrmsvm {

int LpModel::add_variable(std::string name, double lower, double upper,
                          double cost) {
  variables.push_back({std::move(name), lower, upper});
  objective.push_back(cost);
  return static_cast<int>(variables.size()) - 1;
}

void LpModel::add_constraint(std::string name, std::vector<LpTerm> terms,
                             Sense sense, double rhs) {
  constraints.push_back({std::move(name), std::move(terms), sense, rhs});
}

int LpModel::find_variable(const std::string& name) const {
  for (std::size_t j = 0; j < variables.size(); ++j) {
    if (variables[j].name == name) return static_cast<int>(j);
  }
  return -1;
}

void LpModel::validate() const {
  if (objective.size() != variables.size()) {
    throw InvalidArgument("objective length differs from variable count");
  }
  std::set<std::string> names;
  for (const LpVariable& v : variables) {
    if (v.name.empty()) throw InvalidArgument("unnamed LP variable");
    if (!names.insert(v.name).second) {
      throw InvalidArgument("duplicate LP variable '" + v.name + "'");
    }
    if (v.lower > v.upper) {
      throw InvalidArgument("LP variable '" + v.name + "' has lower > upper");
    }
  }
  std::set<std::string> rows;
  for (const LpConstraint& c : constraints) {
    if (!c.name.empty() && !rows.insert(c.name).second) {
      throw InvalidArgument("duplicate LP constraint '" + c.name + "'");
    }
    for (const LpTerm& t : c.terms) {
      if (t.var < 0 || t.var >= static_cast<int>(variables.size())) {
        throw InvalidArgument("constraint '" + c.name +
                              "' references an undeclared variable");
      }
    }
  }
}

bool structurally_equal(const LpModel& a, const LpModel& b) {
  if (a.variables.size() != b.variables.size() ||
      a.constraints.size() != b.constraints.size() ||
      a.objective != b.objective) {
    return false;
  }
  for (std::size_t j = 0; j < a.variables.size(); ++j) {
    const LpVariable& x = a.variables[j];
    const LpVariable& y = b.variables[j];
    if (x.name != y.name || x.lower != y.lower || x.upper != y.upper) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.constraints.size(); ++i) {
    const LpConstraint& x = a.constraints[i];
    const LpConstraint& y = b.constraints[i];
    if (x.name != y.name || x.sense != y.sense || x.rhs != y.rhs ||
        x.terms.size() != y.terms.size()) {
      return false;
    }
    for (std::size_t k = 0; k < x.terms.size(); ++k) {
      if (x.terms[k].var != y.terms[k].var ||
          x.terms[k].coef != y.terms[k].coef) {
        return false;
      }
    }
  }
  return true;
}

int WdrLpLayout::variable_count() const {
  const int base = classes * features + 1 + samples;
  return cost_norm == NormKind::LInf ? base + features * pair_count() : base;
}

int WdrLpLayout::constraint_count() const {
  const int loss_rows = samples * classes * classes;
  const int q = pair_count();
  return cost_norm == NormKind::LInf ? loss_rows + (2 * features + 1) * q
                                     : loss_rows + 2 * features * q;
}

WdrLp build_lp(const Dataset& data, const Hyperparams& hp) {
  hp.validate();
  if (hp.regularized()) {
    throw UnsupportedConfiguration("build_lp requires a finite kappa");
  }
  WdrLp out;
  WdrLpLayout& L = out.layout;
  L.classes = data.class_count();
  L.features = data.feature_count();
  L.samples = data.sample_count();
  L.cost_norm = hp.cost_norm;
  LpModel& lp = out.model;

  const int C = L.classes;
  const int P = L.features;
  const int N = L.samples;
  const auto idx = [](int i) { return std::to_string(i + 1); };

  for (int c = 0; c < C; ++c) {
    for (int p = 0; p < P; ++p) {
      lp.add_variable("M_" + idx(c) + "_" + idx(p), -kInfinity, kInfinity);
    }
  }
  lp.add_variable("lambda", 0.0, kInfinity, hp.epsilon);
  for (int n = 0; n < N; ++n) {
    lp.add_variable("s_" + idx(n), -kInfinity, kInfinity, 1.0 / N);
  }
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < C; ++i) {
    for (int j = i + 1; j < C; ++j) pairs.emplace_back(i, j);
  }
  if (hp.cost_norm == NormKind::LInf) {
    for (const auto& [i, j] : pairs) {
      for (int p = 0; p < P; ++p) {
        lp.add_variable("t_" + idx(i) + "_" + idx(j) + "_" + idx(p));
      }
    }
  }

  // Loss rows: s_n + lambda*kappa*[y' != label] - sum_p coeff_p M_.. >= rhs,
  // where the score part is (Mx)_j - (Mx)_{y'} and rhs = 1 - [j == y'].
  for (int n = 0; n < N; ++n) {
    const auto x = data.features().row(n);
    const int label = data.label(n);
    for (int yp = 0; yp < C; ++yp) {
      for (int j = 0; j < C; ++j) {
        std::vector<LpTerm> terms;
        terms.push_back({L.s(n), 1.0});
        if (yp != label && hp.kappa != 0.0) {
          terms.push_back({L.lambda(), hp.kappa});
        }
        if (j != yp) {
          for (int p = 0; p < P; ++p) {
            if (x[p] == 0.0) continue;
            terms.push_back({L.m(j, p), -x[p]});
            terms.push_back({L.m(yp, p), x[p]});
          }
        }
        const double rhs = 1.0 - (j == yp ? 1.0 : 0.0);
        lp.add_constraint("loss_" + idx(n) + "_" + idx(yp) + "_" + idx(j),
                          std::move(terms), Sense::GreaterEqual, rhs);
      }
    }
  }

  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    const std::string tag = idx(i) + "_" + idx(j);
    if (hp.cost_norm == NormKind::LInf) {
      std::vector<LpTerm> sum_terms{{L.lambda(), 1.0}};
      for (int p = 0; p < P; ++p) {
        const int t = L.t(static_cast<int>(q), p);
        const std::string ptag = tag + "_" + idx(p);
        lp.add_constraint("abs_pos_" + ptag,
                          {{t, 1.0}, {L.m(i, p), -1.0}, {L.m(j, p), 1.0}},
                          Sense::GreaterEqual, 0.0);
        lp.add_constraint("abs_neg_" + ptag,
                          {{t, 1.0}, {L.m(i, p), 1.0}, {L.m(j, p), -1.0}},
                          Sense::GreaterEqual, 0.0);
        sum_terms.push_back({t, -1.0});
      }
      lp.add_constraint("dual_" + tag, std::move(sum_terms),
                        Sense::GreaterEqual, 0.0);
    } else {
      for (int p = 0; p < P; ++p) {
        const std::string ptag = tag + "_" + idx(p);
        lp.add_constraint("dual_pos_" + ptag,
                          {{L.lambda(), 1.0}, {L.m(i, p), -1.0}, {L.m(j, p), 1.0}},
                          Sense::GreaterEqual, 0.0);
        lp.add_constraint("dual_neg_" + ptag,
                          {{L.lambda(), 1.0}, {L.m(i, p), 1.0}, {L.m(j, p), -1.0}},
                          Sense::GreaterEqual, 0.0);
      }
    }
  }
  return out;
}

LinearModel extract_model(const WdrLp& lp, const LpSolution& solution) {
  const WdrLpLayout& L = lp.layout;
  LinearModel model;
  model.M = Matrix(L.classes, L.features);
  for (int c = 0; c < L.classes; ++c) {
    for (int p = 0; p < L.features; ++p) {
      model.M(c, p) = solution.values[static_cast<std::size_t>(L.m(c, p))];
    }
  }
  // The simplex can return -0 or a -1e-17 for a lambda at its bound.
  model.lambda = std::max(0.0, solution.values[static_cast<std::size_t>(L.lambda())]);
  model.objective = solution.objective;
  return model;
}

WorstCase worst_case(const Matrix& M, const Dataset& data, double eps,
                     double kappa, NormKind cost_norm) {
  if (!(kappa >= 0.0)) throw InvalidArgument("kappa must be >= 0");
  if (!(eps >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
  if (M.rows() != data.class_count() || M.cols() != data.feature_count()) {
    throw DimensionError("model shape does not match dataset");
  }
  std::vector<double> a;
  std::vector<double> b;
  loss_profile(M, data, a, b);
  const double lambda =
      optimal_dual_scale(a, b, max_pair_modulus(M, cost_norm), eps, kappa);
  double total = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    total += std::max(a[n], b[n] - flip_price(lambda, kappa));
  }
  return {lambda * eps + total / static_cast<double>(a.size()), lambda};
}

double worst_case_risk(const Matrix& M, const Dataset& data, double eps,
                       double kappa, NormKind cost_norm) {
  return worst_case(M, data, eps, kappa, cost_norm).risk;
}

}  // namespace wdrmsvm
