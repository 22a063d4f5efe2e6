// Hyperparameter sweeps, mCCR statistics, and CSV/SVG output.

#ifndef WDRMSVM_EXPERIMENTS_HPP
#define WDRMSVM_EXPERIMENTS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wdrmsvm/model_io.hpp"

namespace wdrmsvm {

enum class SolverChoice { Subgradient, Simplex };

SolverChoice solver_from_string(const std::string& s);

/// Fits one model on (already standardized) training data. Steps are the
/// initial steps tried by subgradient fits (empty: hp.solver.initial_step).
/// r-mlr uses epsilon as its regularization strength. Simplex is available
/// for wdr-msvm (finite kappa) and dr-ova; other models throw
/// UnsupportedConfiguration.
ModelFile fit_model(ModelKind kind, const Dataset& train, const Hyperparams& hp,
                    const KernelConfig& kernel, const std::vector<double>& steps,
                    SolverChoice solver = SolverChoice::Subgradient);

struct SweepConfig {
  std::vector<ModelKind> models;
  std::vector<double> epsilon_grid;
  std::vector<double> kappa_grid;
  int repetitions = 1;
  DataSource data;
  bool standardize = true;
  NormKind cost_norm = NormKind::LInf;
  KernelConfig kernel;
  SolverOptions solver;
  std::vector<double> steps;  // initial steps tried per fit
  std::string output_dir = "sweep_out";
  std::uint64_t master_seed = 0;
  int threads = 0;  // 0: caller decides

  void validate() const;
};

/// Paper-style defaults: eps log-spaced on [1e-6, 1e1], kappa {0, 0.1, ..., 1}.
std::vector<double> default_epsilon_grid();
std::vector<double> default_kappa_grid();

SweepConfig parse_sweep_config(const std::string& json_text,
                               const std::filesystem::path& base_dir = {});
SweepConfig load_sweep_config(const std::filesystem::path& path);

struct SweepRecord {
  std::string model;
  double epsilon = 0.0;
  double kappa = 0.0;
  int rep = 0;
  double mccr_train = 0.0;
  double mccr_test = 0.0;
  double objective = 0.0;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
};

struct SweepFailure {
  std::string model;
  double epsilon = 0.0;
  double kappa = 0.0;
  int rep = 0;
  std::string message;
};

struct CellAggregate {
  std::string model;
  double epsilon = 0.0;
  double kappa = 0.0;
  int count = 0;
  double mean_train = 0.0;
  double std_train = 0.0;
  double mean_test = 0.0;
  double std_test = 0.0;
};

struct SweepResult {
  std::vector<SweepRecord> records;  // ordered by (model, eps, kappa, rep)
  std::vector<SweepFailure> failures;
  std::vector<CellAggregate> aggregates;
};

/// Mean and sample standard deviation (n - 1; 0 for a single record) of the
/// test and train mCCR per (model, eps, kappa), in first-appearance order.
std::vector<CellAggregate> aggregate(const std::vector<SweepRecord>& records);

/// Cell with the highest mean test mCCR for `model` (first on ties).
CellAggregate peak_cell(const SweepResult& result, const std::string& model);

/// Trains every (model, eps, kappa, rep) cell on `threads` workers (0 means
/// config.threads, then hardware concurrency) and merges results by cell
/// index. The dataset of repetition r depends only on (master seed, r).
/// Models that ignore kappa are fit once per (eps, rep) and recorded under
/// every kappa. Failed cells are listed in `failures`.
SweepResult run_sweep(const SweepConfig& config, int threads = 0);

/// model,epsilon,kappa,rep,mccr_train,mccr_test,objective,seed,wall_ms with
/// shortest round-trip number formatting.
std::string format_csv(const std::vector<SweepRecord>& records,
                       bool include_wall_time = true);
void emit_csv(const SweepResult& result, const std::filesystem::path& path);
std::vector<SweepRecord> parse_results_csv(const std::string& text);
std::vector<SweepRecord> read_results_csv(const std::filesystem::path& path);

std::string format_summary_csv(const std::vector<CellAggregate>& aggregates);

/// Mean test mCCR against log10(eps) at each model's best kappa, with
/// +-1 standard deviation bars; one polyline per model.
std::string format_svg(const SweepResult& result);
void emit_svg(const SweepResult& result, const std::filesystem::path& path);

/// Writes results.csv, summary.csv, mccr.svg and (if any) failures.csv into
/// the directory.
void write_sweep_outputs(const SweepResult& result,
                         const std::filesystem::path& dir);

/// WDRMSVM_THREADS when set and positive, else hardware concurrency (>= 1).
int default_thread_count();

}  // namespace wdrmsvm

#endif  // WDRMSVM_EXPERIMENTS_HPP
