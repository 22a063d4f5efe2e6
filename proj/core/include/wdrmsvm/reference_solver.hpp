// Exact small-instance machinery: the epigraph LP of the linear robust
// multiclass SVM, a dense two-phase simplex, LP text files, and the
// closed-form worst-case risk of a fixed model.

#ifndef WDRMSVM_REFERENCE_SOLVER_HPP
#define WDRMSVM_REFERENCE_SOLVER_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "wdrmsvm/core.hpp"

namespace wdrmsvm {

enum class Sense { LessEqual, GreaterEqual, Equal };

struct LpVariable {
  std::string name;
  double lower = 0.0;       // -inf for free
  double upper = kInfinity;
};

struct LpTerm {
  int var = 0;
  double coef = 0.0;
};

struct LpConstraint {
  std::string name;
  std::vector<LpTerm> terms;
  Sense sense = Sense::GreaterEqual;
  double rhs = 0.0;
};

/// Minimization LP with bounded variables and sparse rows.
struct LpModel {
  std::vector<LpVariable> variables;
  std::vector<double> objective;  // one coefficient per variable
  std::vector<LpConstraint> constraints;

  int add_variable(std::string name, double lower = 0.0,
                   double upper = kInfinity, double cost = 0.0);
  void add_constraint(std::string name, std::vector<LpTerm> terms, Sense sense,
                      double rhs);
  int find_variable(const std::string& name) const;  // -1 when absent

  /// Throws InvalidArgument when a row references an undeclared variable or
  /// names collide.
  void validate() const;
};

bool structurally_equal(const LpModel& a, const LpModel& b);

/// Variable layout of the LP built by build_lp. Classes and features are
/// 0-based here; names in the LP text are 1-based (M_c_p, lambda, s_n,
/// t_i_j_p).
///
/// Exact sizes, with Q = C(C-1)/2 unordered class pairs:
///   LInf cost: variables CP + 1 + N + PQ, constraints N*C^2 + (2P + 1)Q
///              (t_i_j_p >= |M_ip - M_jp|, lambda >= sum_p t_i_j_p)
///   L1 cost:   variables CP + 1 + N,      constraints N*C^2 + 2PQ
///              (lambda >= |M_ip - M_jp| directly)
/// The N*C^2 loss rows cover, for each sample, its own label and every other
/// label y', and each class j: s_n >= (Mx)_j - [j == y'] + 1 - (Mx)_{y'}
/// - lambda*kappa*[y' != label].
struct WdrLpLayout {
  int classes = 0;
  int features = 0;
  int samples = 0;
  NormKind cost_norm = NormKind::LInf;

  int pair_count() const { return classes * (classes - 1) / 2; }
  int m(int c, int p) const { return c * features + p; }
  int lambda() const { return classes * features; }
  int s(int n) const { return lambda() + 1 + n; }
  int t(int pair, int p) const { return s(samples) + pair * features + p; }
  int variable_count() const;
  int constraint_count() const;
};

struct WdrLp {
  LpModel model;
  WdrLpLayout layout;
};

/// Requires a finite kappa.
WdrLp build_lp(const Dataset& data, const Hyperparams& hp);

struct LpSolution {
  double objective = 0.0;
  std::vector<double> values;
  int iterations = 0;
  double primal_residual = 0.0;  // max constraint/bound violation
};

/// Dense two-phase tableau simplex with Bland's rule. Throws InfeasibleError,
/// UnboundedError, or CapacityError (more than max_rows rows after
/// standardization).
LpSolution solve_lp(const LpModel& model, int max_rows = 2000);

/// Optimal linear model recovered from an LP solution.
LinearModel extract_model(const WdrLp& lp, const LpSolution& solution);

/// Writes the model in the CPLEX-style LP text format
/// (Minimize / Subject To / Bounds / End).
void export_lp(const LpModel& model, const std::filesystem::path& path);
std::string format_lp(const LpModel& model);
LpModel parse_lp(const std::string& text);
LpModel read_lp(const std::filesystem::path& path);

/// Worst-case expected Crammer-Singer loss over the Wasserstein ball for a
/// fixed M: min over lambda >= max pair modulus of
/// lambda*eps + 1/N sum_n max(a_n, b_n - lambda*kappa), evaluated exactly at
/// the lower end and at every breakpoint (b_n - a_n)/kappa.
double worst_case_risk(const Matrix& M, const Dataset& data, double eps,
                       double kappa, NormKind cost_norm);

/// The lambda attaining worst_case_risk (lower end when the infimum is a
/// limit).
struct WorstCase {
  double risk = 0.0;
  double lambda = 0.0;
};
WorstCase worst_case(const Matrix& M, const Dataset& data, double eps,
                     double kappa, NormKind cost_norm);

}  // namespace wdrmsvm

#endif  // WDRMSVM_REFERENCE_SOLVER_HPP
