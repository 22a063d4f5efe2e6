// Synthetic data, CSV ingestion, standardization and stratified splits.

#ifndef WDRMSVM_DATA_HPP
#define WDRMSVM_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "wdrmsvm/core.hpp"

namespace wdrmsvm {

/// splitmix64 over the inputs; used wherever a child seed is derived.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);
std::uint64_t hash_string(const std::string& s);

struct GeneratorSpec {
  int classes = 3;
  int features = 2;
  int samples = 100;
  std::vector<double> class_weights;  // empty means uniform
  double class_sep = 3.0;
  double variance = 1.0;
  std::uint64_t seed = 0;

  std::vector<double> resolved_weights() const;
  void validate() const;
};

/// Largest-remainder rounding of total*weights; ties go to the lower class.
std::vector<int> apportion(int total, const std::vector<double>& weights);

/// C x P class means: the first C vertices of {0, sep}^P in Gray-code order
/// after a seeded shuffle. Throws CapacityError when C > 2^P.
Matrix hypercube_vertices(int classes, int features, double sep,
                          std::uint64_t seed);

/// Spherical Gaussian blobs around the given means, counts per class.
Dataset sample_blobs(const Matrix& means, const std::vector<int>& counts,
                     double variance, std::uint64_t seed);

Dataset generate_hypercube(const GeneratorSpec& spec);

/// Train and test sets drawn around the same vertex layout. The test set
/// uses test_weights (uniform when empty).
std::pair<Dataset, Dataset> generate_hypercube_pair(
    const GeneratorSpec& train_spec, int test_samples,
    const std::vector<double>& test_weights = {});

struct CsvData {
  Dataset data;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;  // first-appearance order
  int dropped_rows = 0;
};

/// Header row required. Cells that are empty, "NA", "?" or NaN drop their
/// row with a warning; other non-numeric feature cells throw ParseError
/// naming the line.
CsvData load_csv(const std::filesystem::path& path,
                 const std::string& label_column);
CsvData parse_csv(const std::string& text, const std::string& label_column);

void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::vector<std::string>& feature_names = {},
              const std::vector<std::string>& class_names = {},
              const std::string& label_column = "label");

struct StandardizeStats {
  Vector mean;
  Vector scale;  // 1 for zero-variance features
};

StandardizeStats standardize_fit(const Dataset& train);
Dataset standardize_apply(const StandardizeStats& stats, const Dataset& d);

struct Split {
  Dataset train;
  Dataset test;
};

/// Per class, round(fraction * n_c) rows go to train and the rest to test.
Split stratified_split(const Dataset& data, double train_fraction,
                       std::uint64_t seed);

/// Explicit per-class counts. An empty test_counts sends every remaining row
/// to test. Throws CapacityError naming the class when a class is short.
Split stratified_split(const Dataset& data, const std::vector<int>& train_counts,
                       const std::vector<int>& test_counts, std::uint64_t seed,
                       const std::vector<std::string>& class_names = {});

}  // namespace wdrmsvm

#endif  // WDRMSVM_DATA_HPP
