// wdrmsvm command-line tool.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wdrmsvm/data.hpp"
#include "wdrmsvm/experiments.hpp"
#include "wdrmsvm/linear_solver.hpp"
#include "wdrmsvm/model_io.hpp"
#include "wdrmsvm/reference_solver.hpp"

namespace {

using namespace wdrmsvm;

struct LoadedData {
  Dataset train;
  std::optional<Dataset> test;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  std::string label_column = "label";
};

std::vector<std::string> default_names(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// Training data as `train` sees it. A seed override replaces the generator
// seed or the split seed.
LoadedData load_training_data(const TrainConfig& cfg, std::optional<std::uint64_t> seed) {
  const DataSource& d = cfg.data;
  if (d.kind == DataSource::Kind::Generator) {
    GeneratorSpec spec = d.generator;
    if (seed) spec.seed = *seed;
    if (d.test_samples > 0) {
      auto [tr, te] = generate_hypercube_pair(spec, d.test_samples, d.test_weights);
      return {std::move(tr), std::move(te), default_names("x", spec.features),
              default_names("c", spec.classes), "label"};
    }
    return {generate_hypercube(spec), std::nullopt, default_names("x", spec.features),
            default_names("c", spec.classes), "label"};
  }
  CsvData csv = load_csv(d.csv_path, d.label_column);
  const std::uint64_t split_seed = seed.value_or(0);
  if (!d.train_counts.empty()) {
    Split s = stratified_split(csv.data, d.train_counts, d.test_counts, split_seed,
                               csv.class_names);
    return {std::move(s.train), std::move(s.test), csv.feature_names, csv.class_names,
            d.label_column};
  }
  if (d.train_fraction < 1.0) {
    Split s = stratified_split(csv.data, d.train_fraction, split_seed);
    return {std::move(s.train), std::move(s.test), csv.feature_names, csv.class_names,
            d.label_column};
  }
  return {std::move(csv.data), std::nullopt, csv.feature_names, csv.class_names,
          d.label_column};
}

Dataset maybe_standardize(const Dataset& d, const std::optional<StandardizeStats>& st) {
  return st ? standardize_apply(*st, d) : d;
}

// Dataset for evaluate/oracle: a CSV file, or the training set of a config.
Dataset data_for_model(const ModelFile& m, const std::string& csv_path,
                       const std::string& label_column, const std::string& config_path,
                       std::optional<std::uint64_t> seed) {
  if (!csv_path.empty()) {
    return load_csv(csv_path, label_column.empty() ? m.label_column : label_column).data;
  }
  if (!config_path.empty()) {
    return load_training_data(load_train_config(config_path), seed).train;
  }
  throw InvalidArgument("give --data or --config");
}

int cmd_train(const std::string& config_path, const std::string& out,
              const std::string& solver, std::optional<std::uint64_t> seed) {
  TrainConfig cfg = load_train_config(config_path);
  if (seed) cfg.hp.solver.seed = *seed;
  LoadedData data = load_training_data(cfg, seed);
  std::optional<StandardizeStats> stats;
  if (cfg.standardize) stats = standardize_fit(data.train);
  const Dataset train = maybe_standardize(data.train, stats);

  ModelFile m = fit_model(cfg.model, train, cfg.hp, cfg.kernel, cfg.steps,
                          solver_from_string(solver));
  m.stats = stats;
  m.feature_names = data.feature_names;
  m.class_names = data.class_names;
  m.label_column = data.label_column;
  save_model(m, out);

  std::printf("model      %s\n", to_string(m.model).c_str());
  std::printf("objective  %.17g\n", m.objective());
  if (m.linear) std::printf("lambda     %.17g\n", m.linear->lambda);
  if (m.kernel) std::printf("lambda     %.17g\n", m.kernel->lambda);
  std::printf("mccr_train %.6f\n",
              accuracy(m.predict(data.train.features()), data.train.label_indices()));
  if (data.test) {
    std::printf("mccr_test  %.6f\n",
                accuracy(m.predict(data.test->features()), data.test->label_indices()));
  }
  std::printf("wrote      %s\n", out.c_str());
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& data_path,
                 const std::string& label_column) {
  const ModelFile m = load_model(model_path);
  const CsvData csv = load_csv(data_path, label_column.empty() ? m.label_column : label_column);
  // Map the file's class names onto the model's by name when both exist.
  std::vector<int> truth = csv.data.label_indices();
  if (!m.class_names.empty()) {
    for (int& t : truth) {
      const std::string& name = csv.class_names[static_cast<std::size_t>(t)];
      const auto it = std::find(m.class_names.begin(), m.class_names.end(), name);
      if (it == m.class_names.end()) {
        throw InvalidArgument("class '" + name + "' is unknown to the model");
      }
      t = static_cast<int>(it - m.class_names.begin());
    }
  }
  const std::vector<int> pred = m.predict(csv.data.features());
  std::printf("samples %d\nmccr    %.6f\n", csv.data.sample_count(), accuracy(pred, truth));
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out,
              std::optional<std::uint64_t> seed, int threads) {
  SweepConfig cfg = load_sweep_config(config_path);
  if (seed) cfg.master_seed = *seed;
  if (!out.empty()) cfg.output_dir = out;
  if (threads <= 0) threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
  const SweepResult result = run_sweep(cfg, threads);
  write_sweep_outputs(result, cfg.output_dir);
  std::vector<std::string> seen;
  for (const CellAggregate& a : result.aggregates) {
    if (std::find(seen.begin(), seen.end(), a.model) != seen.end()) continue;
    seen.push_back(a.model);
    const CellAggregate p = peak_cell(result, a.model);
    std::printf("%-10s peak mCCR %.4f +- %.4f at eps=%s kappa=%s\n", p.model.c_str(),
                p.mean_test, p.std_test, format_double(p.epsilon).c_str(),
                format_double(p.kappa).c_str());
  }
  std::printf("records %zu, failures %zu, outputs in %s\n", result.records.size(),
              result.failures.size(), cfg.output_dir.c_str());
  return 0;
}

int cmd_export_lp(const std::string& config_path, const std::string& out,
                  std::optional<std::uint64_t> seed) {
  const TrainConfig cfg = load_train_config(config_path);
  if (cfg.model != ModelKind::WdrMsvm) {
    throw UnsupportedConfiguration("export-lp supports the wdr-msvm model only");
  }
  const LoadedData data = load_training_data(cfg, seed);
  std::optional<StandardizeStats> stats;
  if (cfg.standardize) stats = standardize_fit(data.train);
  const WdrLp lp = build_lp(maybe_standardize(data.train, stats), cfg.hp);
  export_lp(lp.model, out);
  std::printf("variables   %zu\nconstraints %zu\nwrote       %s\n", lp.model.variables.size(),
              lp.model.constraints.size(), out.c_str());
  return 0;
}

int cmd_oracle(const std::string& model_path, const std::string& data_path,
               const std::string& label_column, const std::string& config_path,
               std::optional<std::uint64_t> seed) {
  const ModelFile m = load_model(model_path);
  if (!m.linear) throw UnsupportedConfiguration("oracle needs a linear model file");
  const Dataset raw = data_for_model(m, data_path, label_column, config_path, seed);
  const Dataset d = maybe_standardize(raw, m.stats);
  const WorstCase wc = worst_case(m.linear->M, d, m.hp.epsilon, m.hp.kappa, m.hp.cost_norm);
  std::printf("worst_case_risk %.17g\nlambda          %.17g\nstored_objective %.17g\n",
              wc.risk, wc.lambda, m.linear->objective);
  return 0;
}

int cmd_gen_data(const std::string& config_path, GeneratorSpec spec,
                 const std::string& weights, const std::string& out,
                 std::optional<std::uint64_t> seed) {
  if (!config_path.empty()) spec = parse_generator_spec(read_text(config_path));
  if (!weights.empty()) {
    spec.class_weights.clear();
    std::stringstream ss(weights);
    std::string w;
    while (std::getline(ss, w, ',')) spec.class_weights.push_back(parse_double(w));
  }
  if (seed) spec.seed = *seed;
  const Dataset d = generate_hypercube(spec);
  save_csv(d, out, default_names("x", spec.features), default_names("c", spec.classes));
  std::printf("samples %d\nwrote   %s\n", d.sample_count(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein distributionally robust multiclass SVM"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string solver = "subgradient";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string model_path;
  std::string data_path;
  std::string label_column;

  auto* train = app.add_subcommand("train", "Fit one model from a config and write a model file");
  train->add_option("--config", config, "Train config (JSON)")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out, "Model file to write")->required();
  train->add_option("--solver", solver, "subgradient or simplex")
      ->check(CLI::IsMember({"subgradient", "simplex"}));
  train->add_option("--seed", seed, "Data and solver seed override");

  auto* evaluate = app.add_subcommand("evaluate", "mCCR of a model file on a CSV");
  evaluate->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--data", data_path, "CSV file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--label-column", label_column, "Label column (default: from model)");

  auto* sweep = app.add_subcommand("sweep", "Run a hyperparameter sweep");
  sweep->add_option("--config", config, "Sweep config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "Output directory (overrides config)");
  sweep->add_option("--seed", seed, "Master seed override");
  sweep->add_option("--threads", threads, "Worker threads (default: WDRMSVM_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  auto* export_lp_cmd = app.add_subcommand("export-lp", "Write the LP of a wdr-msvm train config");
  export_lp_cmd->add_option("--config", config, "Train config (JSON)")->required()->check(CLI::ExistingFile);
  export_lp_cmd->add_option("--out", out, "LP file to write")->required();
  export_lp_cmd->add_option("--seed", seed, "Data seed override");

  auto* oracle = app.add_subcommand("oracle", "Worst-case risk of a fixed linear model");
  oracle->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  auto* data_opt = oracle->add_option("--data", data_path, "CSV file")->check(CLI::ExistingFile);
  auto* config_opt = oracle->add_option("--config", config, "Train config whose training set is used")
                         ->check(CLI::ExistingFile);
  data_opt->excludes(config_opt);
  oracle->add_option("--label-column", label_column, "Label column (default: from model)");
  oracle->add_option("--seed", seed, "Data seed override (with --config)");

  GeneratorSpec spec;
  std::string weights;
  auto* gen = app.add_subcommand("gen-data", "Write hypercube blob data as CSV");
  gen->add_option("--config", config, "Generator spec (JSON)")->check(CLI::ExistingFile);
  gen->add_option("--classes", spec.classes, "Classes C");
  gen->add_option("--features", spec.features, "Features P");
  gen->add_option("--samples", spec.samples, "Samples N");
  gen->add_option("--weights", weights, "Comma-separated class weights");
  gen->add_option("--sep", spec.class_sep, "Vertex separation");
  gen->add_option("--variance", spec.variance, "Blob variance");
  gen->add_option("--seed", seed, "Seed");
  gen->add_option("--out", out, "CSV file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train) return cmd_train(config, out, solver, seed);
    if (*evaluate) return cmd_evaluate(model_path, data_path, label_column);
    if (*sweep) return cmd_sweep(config, out, seed, threads);
    if (*export_lp_cmd) return cmd_export_lp(config, out, seed);
    if (*oracle) return cmd_oracle(model_path, data_path, label_column, config, seed);
    if (*gen) return cmd_gen_data(config, spec, weights, out, seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
