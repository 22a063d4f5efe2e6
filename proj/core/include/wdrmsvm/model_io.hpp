// JSON configuration and model files.

#ifndef WDRMSVM_MODEL_IO_HPP
#define WDRMSVM_MODEL_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wdrmsvm/baselines.hpp"
#include "wdrmsvm/core.hpp"
#include "wdrmsvm/data.hpp"

namespace wdrmsvm {

/// Model names accepted in configs.
enum class ModelKind { WdrMsvm, DrOva, RMsvm, RMlr, KWdrMsvm, KDrOva, KRMsvm };

std::string to_string(ModelKind k);
ModelKind model_from_string(const std::string& s);
bool is_kernel(ModelKind k);
/// Models whose fit does not depend on kappa.
bool ignores_kappa(ModelKind k);

/// Where data comes from: the hypercube generator (train and a test set) or
/// a CSV file with an optional stratified split.
struct DataSource {
  enum class Kind { Generator, Csv };
  Kind kind = Kind::Generator;

  GeneratorSpec generator;
  int test_samples = 0;
  std::vector<double> test_weights;  // empty means uniform

  std::string csv_path;
  std::string label_column = "label";
  double train_fraction = 0.7;
  std::vector<int> train_counts;  // explicit split when nonempty
  std::vector<int> test_counts;

  void validate() const;
};

/// Single-model training configuration (`train`, `export-lp`).
struct TrainConfig {
  ModelKind model = ModelKind::WdrMsvm;
  DataSource data;
  bool standardize = true;
  Hyperparams hp;
  KernelConfig kernel;
  std::vector<double> steps;  // initial steps tried; empty means hp.solver.initial_step

  void validate() const;
};

TrainConfig parse_train_config(const std::string& json_text,
                               const std::filesystem::path& base_dir = {});
TrainConfig load_train_config(const std::filesystem::path& path);

GeneratorSpec parse_generator_spec(const std::string& json_text);

/// A trained model plus everything needed to apply it to raw features.
struct ModelFile {
  static constexpr int kVersion = 1;

  ModelKind model = ModelKind::WdrMsvm;
  Hyperparams hp;
  std::optional<StandardizeStats> stats;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  std::string label_column = "label";

  // Exactly one payload is set, matching `model`.
  std::optional<LinearModel> linear;
  std::optional<KernelModel> kernel;
  std::optional<OvaModel> ova;
  std::optional<KernelOvaModel> kernel_ova;

  double objective() const;
  /// Standardizes raw features with the stored statistics, then predicts.
  std::vector<int> predict(const Matrix& raw_features) const;
};

std::string model_to_json(const ModelFile& m);
ModelFile model_from_json(const std::string& text);
void save_model(const ModelFile& m, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

/// Reads a whole text file; throws Error on I/O failure.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// "inf" / "Infinity" aware number formatting shared by JSON and CSV output.
std::string format_double(double v);
double parse_double(const std::string& s);

}  // namespace wdrmsvm

#endif  // WDRMSVM_MODEL_IO_HPP
