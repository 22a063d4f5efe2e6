#include "wdrmsvm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "wdrmsvm/log.hpp"

namespace wdrmsvm {
namespace {

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  out.push_back(trim(cell));
  return out;
}

bool is_missing(const std::string& cell) {
  if (cell.empty() || cell == "?" || cell == "NA" || cell == "na") return true;
  std::string lower = cell;
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return lower == "nan";
}

bool parse_double(const std::string& cell, double& v) {
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  return res.ec == std::errc() && res.ptr == last;
}

std::string class_name(const std::vector<std::string>& names, int c) {
  if (static_cast<std::size_t>(c) < names.size()) return names[static_cast<std::size_t>(c)];
  return "class " + std::to_string(c + 1);
}

}  // namespace

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t state = 0x2545F4914F6CDD1DULL;
  std::uint64_t out = 0;
  for (std::uint64_t p : parts) {
    state ^= p;
    out = splitmix(state);
  }
  return out;
}

std::uint64_t hash_string(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::vector<double> GeneratorSpec::resolved_weights() const {
  if (class_weights.empty()) {
    return std::vector<double>(static_cast<std::size_t>(classes), 1.0 / classes);
  }
  return class_weights;
}

void GeneratorSpec::validate() const {
  if (classes < 2) throw InvalidArgument("generator needs at least 2 classes");
  if (features < 1) throw InvalidArgument("generator needs at least 1 feature");
  if (samples < 1) throw InvalidArgument("generator needs at least 1 sample");
  if (!(class_sep > 0.0)) throw InvalidArgument("class_sep must be positive");
  if (!(variance > 0.0)) throw InvalidArgument("variance must be positive");
  if (!class_weights.empty()) {
    if (static_cast<int>(class_weights.size()) != classes) {
      throw InvalidArgument("class_weights must have one entry per class");
    }
    double sum = 0.0;
    for (double w : class_weights) {
      if (!(w >= 0.0)) throw InvalidArgument("class weights must be nonnegative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw InvalidArgument("class weights must sum to 1");
    }
  }
  if (features < 62 && classes > (1LL << features)) {
    throw CapacityError("cannot place " + std::to_string(classes) +
                        " classes on the vertices of a " +
                        std::to_string(features) + "-cube");
  }
}

std::vector<int> apportion(int total, const std::vector<double>& weights) {
  const std::size_t C = weights.size();
  std::vector<int> counts(C);
  std::vector<double> remainder(C);
  int assigned = 0;
  for (std::size_t c = 0; c < C; ++c) {
    const double exact = total * weights[c];
    counts[c] = static_cast<int>(std::floor(exact + 1e-9));
    remainder[c] = exact - counts[c];
    assigned += counts[c];
  }
  std::vector<std::size_t> order(C);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b] + 1e-12;
  });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % C) {
    ++counts[order[k]];
    ++assigned;
  }
  return counts;
}

Matrix hypercube_vertices(int classes, int features, double sep,
                          std::uint64_t seed) {
  if (features < 62 && classes > (1LL << features)) {
    throw CapacityError("cannot place " + std::to_string(classes) +
                        " classes on the vertices of a " +
                        std::to_string(features) + "-cube");
  }
  // Shuffling all 2^P codes is wasteful for large P; a window of the Gray
  // sequence large enough to hold C distinct vertices suffices.
  const std::uint64_t available =
      features >= 20 ? (1ULL << 20) : (1ULL << features);
  std::vector<std::uint64_t> codes(available);
  for (std::uint64_t i = 0; i < available; ++i) codes[i] = i ^ (i >> 1);
  std::mt19937_64 rng(seed);
  std::shuffle(codes.begin(), codes.end(), rng);
  Matrix V = Matrix::Zero(classes, features);
  for (int c = 0; c < classes; ++c) {
    for (int p = 0; p < features && p < 64; ++p) {
      if ((codes[static_cast<std::size_t>(c)] >> p) & 1ULL) V(c, p) = sep;
    }
  }
  return V;
}

Dataset sample_blobs(const Matrix& means, const std::vector<int>& counts,
                     double variance, std::uint64_t seed) {
  const int C = static_cast<int>(means.rows());
  const int P = static_cast<int>(means.cols());
  if (static_cast<int>(counts.size()) != C) {
    throw DimensionError("one count per class mean required");
  }
  const int N = std::accumulate(counts.begin(), counts.end(), 0);
  Matrix X(N, P);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(N));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(variance));
  int row = 0;
  for (int c = 0; c < C; ++c) {
    for (int k = 0; k < counts[static_cast<std::size_t>(c)]; ++k, ++row) {
      for (int p = 0; p < P; ++p) X(row, p) = means(c, p) + gauss(rng);
      labels.push_back(c);
    }
  }
  return Dataset::from_indices(std::move(X), labels, C);
}

Dataset generate_hypercube(const GeneratorSpec& spec) {
  spec.validate();
  const Matrix V = hypercube_vertices(spec.classes, spec.features,
                                      spec.class_sep, derive_seed({spec.seed, 1}));
  return sample_blobs(V, apportion(spec.samples, spec.resolved_weights()),
                      spec.variance, derive_seed({spec.seed, 2}));
}

std::pair<Dataset, Dataset> generate_hypercube_pair(
    const GeneratorSpec& train_spec, int test_samples,
    const std::vector<double>& test_weights) {
  train_spec.validate();
  GeneratorSpec test_spec = train_spec;
  test_spec.samples = test_samples;
  test_spec.class_weights = test_weights;
  test_spec.validate();
  const Matrix V = hypercube_vertices(train_spec.classes, train_spec.features,
                                      train_spec.class_sep,
                                      derive_seed({train_spec.seed, 1}));
  Dataset train =
      sample_blobs(V, apportion(train_spec.samples, train_spec.resolved_weights()),
                   train_spec.variance, derive_seed({train_spec.seed, 2}));
  Dataset test =
      sample_blobs(V, apportion(test_samples, test_spec.resolved_weights()),
                   train_spec.variance, derive_seed({train_spec.seed, 3}));
  return {std::move(train), std::move(test)};
}

CsvData parse_csv(const std::string& text, const std::string& label_column) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      header = split_line(line);
      break;
    }
  }
  if (header.empty()) throw ParseError("CSV has no header row");
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    header[0] = header[0].substr(3);
  }
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw ParseError("label column '" + label_column + "' not found in header");
  }
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());

  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  int dropped = 0;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (k != label_col) feature_names.push_back(header[k]);
  }
  const int P = static_cast<int>(feature_names.size());
  if (P < 1) throw ParseError("CSV has no feature columns");

  std::map<std::string, int> class_index;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("line " + std::to_string(lineno) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(cells.size()));
    }
    bool missing = is_missing(cells[label_col]);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(P));
    for (std::size_t k = 0; k < cells.size() && !missing; ++k) {
      if (k == label_col) continue;
      if (is_missing(cells[k])) {
        missing = true;
        break;
      }
      double v = 0.0;
      if (!parse_double(cells[k], v)) {
        throw ParseError("line " + std::to_string(lineno) + ": column '" +
                         header[k] + "' is not numeric ('" + cells[k] + "')");
      }
      if (!std::isfinite(v)) {
        missing = true;
        break;
      }
      values.push_back(v);
    }
    if (missing) {
      ++dropped;
      continue;
    }
    const auto [it, inserted] =
        class_index.emplace(cells[label_col], static_cast<int>(class_index.size()));
    if (inserted) class_names.push_back(cells[label_col]);
    labels.push_back(it->second);
    rows.push_back(std::move(values));
  }
  if (dropped > 0) {
    warn("dropped " + std::to_string(dropped) +
         " CSV row(s) with missing values");
  }
  if (rows.empty()) throw ParseError("CSV has no complete data rows");
  if (class_names.size() < 2) {
    throw ParseError("label column '" + label_column + "' has fewer than 2 classes");
  }
  Matrix X(static_cast<Eigen::Index>(rows.size()), P);
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (int p = 0; p < P; ++p) {
      X(static_cast<Eigen::Index>(n), p) = rows[n][static_cast<std::size_t>(p)];
    }
  }
  const int C = static_cast<int>(class_names.size());
  return {Dataset::from_indices(std::move(X), labels, C), std::move(feature_names),
          std::move(class_names), dropped};
}

CsvData load_csv(const std::filesystem::path& path,
                 const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), label_column);
}

void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::vector<std::string>& feature_names,
              const std::vector<std::string>& class_names,
              const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  const int P = data.feature_count();
  for (int p = 0; p < P; ++p) {
    out << (static_cast<std::size_t>(p) < feature_names.size()
                ? feature_names[static_cast<std::size_t>(p)]
                : "x" + std::to_string(p + 1))
        << ',';
  }
  out << label_column << '\n';
  out << std::setprecision(17);
  for (int n = 0; n < data.sample_count(); ++n) {
    for (int p = 0; p < P; ++p) out << data.features()(n, p) << ',';
    const int c = data.label(n);
    out << (static_cast<std::size_t>(c) < class_names.size()
                ? class_names[static_cast<std::size_t>(c)]
                : "c" + std::to_string(c + 1))
        << '\n';
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

StandardizeStats standardize_fit(const Dataset& train) {
  const int N = train.sample_count();
  if (N < 2) throw InvalidArgument("standardization needs at least 2 samples");
  const Matrix& X = train.features();
  StandardizeStats s;
  s.mean = X.colwise().mean().transpose();
  s.scale = Vector::Ones(X.cols());
  for (int p = 0; p < X.cols(); ++p) {
    const double var = (X.col(p).array() - s.mean[p]).square().sum() / (N - 1);
    const double sd = std::sqrt(var);
    if (sd > 1e-12 * std::max(1.0, std::abs(s.mean[p]))) {
      s.scale[p] = sd;
    } else {
      s.mean[p] = 0.0;
      warn("feature " + std::to_string(p + 1) +
           " has zero variance; left unscaled");
    }
  }
  return s;
}

Dataset standardize_apply(const StandardizeStats& stats, const Dataset& d) {
  if (stats.mean.size() != d.feature_count()) {
    throw DimensionError("standardization stats do not match feature count");
  }
  Matrix X = d.features();
  for (int p = 0; p < X.cols(); ++p) {
    X.col(p) = (X.col(p).array() - stats.mean[p]) / stats.scale[p];
  }
  return d.with_features(std::move(X));
}

Split stratified_split(const Dataset& data, double train_fraction,
                       std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0, 1)");
  }
  std::vector<int> train_counts;
  for (int n : data.class_counts()) {
    train_counts.push_back(static_cast<int>(std::lround(train_fraction * n)));
  }
  return stratified_split(data, train_counts, {}, seed);
}

Split stratified_split(const Dataset& data, const std::vector<int>& train_counts,
                       const std::vector<int>& test_counts, std::uint64_t seed,
                       const std::vector<std::string>& class_names) {
  const int C = data.class_count();
  if (static_cast<int>(train_counts.size()) != C ||
      (!test_counts.empty() && static_cast<int>(test_counts.size()) != C)) {
    throw DimensionError("split counts need one entry per class");
  }
  std::vector<std::vector<int>> members(static_cast<std::size_t>(C));
  for (int n = 0; n < data.sample_count(); ++n) {
    members[static_cast<std::size_t>(data.label(n))].push_back(n);
  }
  std::mt19937_64 rng(seed);
  std::vector<int> train_rows;
  std::vector<int> test_rows;
  for (int c = 0; c < C; ++c) {
    auto& rows = members[static_cast<std::size_t>(c)];
    const int ntr = train_counts[static_cast<std::size_t>(c)];
    const int avail = static_cast<int>(rows.size());
    const int nte = test_counts.empty() ? avail - ntr
                                        : test_counts[static_cast<std::size_t>(c)];
    if (ntr < 0 || nte < 0 || ntr + nte > avail) {
      throw CapacityError("class '" + class_name(class_names, c) + "' has " +
                          std::to_string(avail) + " samples; split needs " +
                          std::to_string(std::max(ntr, 0) + std::max(nte, 0)));
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + ntr);
    test_rows.insert(test_rows.end(), rows.begin() + ntr, rows.begin() + ntr + nte);
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  if (train_rows.empty() || test_rows.empty()) {
    throw CapacityError("split leaves the train or test set empty");
  }
  return {data.subset(train_rows), data.subset(test_rows)};
}

}  // namespace wdrmsvm
