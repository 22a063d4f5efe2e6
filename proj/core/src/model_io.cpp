#include "wdrmsvm/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wdrmsvm/kernel.hpp"

namespace wdrmsvm {
namespace {

using json = nlohmann::json;

constexpr const char* kModelFormat = "wdrmsvm-model";

// Rejects keys outside `allowed`; keys starting with '_' are comments.
void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw InvalidArgument(where + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!key.empty() && key[0] == '_') continue;
    if (!ok.count(key)) {
      throw InvalidArgument("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad value for '") + key + "': " + e.what());
  }
}

// Numbers may be given as JSON numbers or as strings such as "inf".
double number(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_double(v.get<std::string>());
  throw InvalidArgument("'" + key + "' must be a number or \"inf\"");
}

double number_or(const json& j, const char* key, double fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return number(j.at(key), key);
}

std::vector<double> numbers(const json& j, const char* key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) throw InvalidArgument(std::string("'") + key + "' must be an array");
  for (const json& v : j.at(key)) out.push_back(number(v, key));
  return out;
}

json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

json matrix_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from(const json& j, const std::string& key) {
  if (!j.is_array()) throw ParseError("'" + key + "' must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParseError("ragged matrix '" + key + "'");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      M(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return M;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
  }
  return v;
}

json kernel_json(const KernelConfig& k) {
  json j{{"kind", to_string(k.kind)}};
  j["gamma"] = k.gamma ? json(*k.gamma) : json(nullptr);
  return j;
}

KernelConfig kernel_from(const json& j) {
  check_keys(j, "kernel", {"kind", "gamma"});
  const std::string kind = get_or<std::string>(j, "kind", "rbf");
  KernelConfig k;
  if (kind == "rbf") k.kind = KernelConfig::Kind::Rbf;
  else if (kind == "linear") k.kind = KernelConfig::Kind::Linear;
  else throw InvalidArgument("unknown kernel kind '" + kind + "' (expected rbf or linear)");
  if (j.contains("gamma") && !j.at("gamma").is_null()) k.gamma = number(j.at("gamma"), "gamma");
  k.validate();
  return k;
}

json solver_json(const SolverOptions& s) {
  return {{"iterations", s.iterations},
          {"initial_step", s.initial_step},
          {"seed", s.seed},
          {"projection_tol", s.projection_tol},
          {"exact_lambda", s.exact_lambda},
          {"penalty_rho", s.penalty_rho}};
}

// Reads solver options; `steps` (when present) is returned separately.
SolverOptions solver_from(const json& j, std::vector<double>* steps) {
  check_keys(j, "solver", {"iterations", "initial_step", "seed", "projection_tol",
                           "exact_lambda", "penalty_rho", "steps"});
  SolverOptions s;
  s.iterations = get_or<int>(j, "iterations", s.iterations);
  s.initial_step = number_or(j, "initial_step", s.initial_step);
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  s.projection_tol = number_or(j, "projection_tol", s.projection_tol);
  s.exact_lambda = get_or<bool>(j, "exact_lambda", s.exact_lambda);
  s.penalty_rho = number_or(j, "penalty_rho", s.penalty_rho);
  if (steps != nullptr) *steps = numbers(j, "steps");
  s.validate();
  return s;
}

json hyperparams_json(const Hyperparams& hp) {
  return {{"epsilon", hp.epsilon},
          {"kappa", number_json(hp.kappa)},
          {"cost_norm", to_string(hp.cost_norm)},
          {"solver", solver_json(hp.solver)}};
}

Hyperparams hyperparams_from(const json& j) {
  check_keys(j, "hyperparams", {"epsilon", "kappa", "cost_norm", "solver"});
  Hyperparams hp;
  hp.epsilon = number_or(j, "epsilon", 0.0);
  hp.kappa = number_or(j, "kappa", kInfinity);
  hp.cost_norm = norm_from_string(get_or<std::string>(j, "cost_norm", "linf"));
  if (j.contains("solver")) hp.solver = solver_from(j.at("solver"), nullptr);
  hp.validate();
  return hp;
}

GeneratorSpec generator_from(const json& j, bool allow_test) {
  if (allow_test) {
    check_keys(j, "generator", {"classes", "features", "samples", "class_weights",
                                "class_sep", "variance", "seed", "test_samples",
                                "test_weights"});
  } else {
    check_keys(j, "generator", {"classes", "features", "samples", "class_weights",
                                "class_sep", "variance", "seed"});
  }
  GeneratorSpec g;
  g.classes = get_or<int>(j, "classes", g.classes);
  g.features = get_or<int>(j, "features", g.features);
  g.samples = get_or<int>(j, "samples", g.samples);
  g.class_weights = numbers(j, "class_weights");
  g.class_sep = number_or(j, "class_sep", g.class_sep);
  g.variance = number_or(j, "variance", g.variance);
  g.seed = get_or<std::uint64_t>(j, "seed", g.seed);
  g.validate();
  return g;
}

DataSource data_from(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j, "data", {"generator", "csv"});
  if (j.contains("generator") == j.contains("csv")) {
    throw InvalidArgument("data needs exactly one of 'generator' or 'csv'");
  }
  DataSource d;
  if (j.contains("generator")) {
    const json& g = j.at("generator");
    d.kind = DataSource::Kind::Generator;
    d.generator = generator_from(g, true);
    d.test_samples = get_or<int>(g, "test_samples", 0);
    d.test_weights = numbers(g, "test_weights");
  } else {
    const json& c = j.at("csv");
    check_keys(c, "csv", {"path", "label_column", "train_fraction", "train_counts",
                          "test_counts"});
    d.kind = DataSource::Kind::Csv;
    std::filesystem::path p = get_or<std::string>(c, "path", "");
    if (p.empty()) throw InvalidArgument("csv.path is required");
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    d.csv_path = p.string();
    d.label_column = get_or<std::string>(c, "label_column", d.label_column);
    d.train_fraction = number_or(c, "train_fraction", d.train_fraction);
    d.train_counts = get_or<std::vector<int>>(c, "train_counts", {});
    d.test_counts = get_or<std::vector<int>>(c, "test_counts", {});
  }
  d.validate();
  return d;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

}  // namespace

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::WdrMsvm: return "wdr-msvm";
    case ModelKind::DrOva: return "dr-ova";
    case ModelKind::RMsvm: return "r-msvm";
    case ModelKind::RMlr: return "r-mlr";
    case ModelKind::KWdrMsvm: return "kwdr-msvm";
    case ModelKind::KDrOva: return "kdr-ova";
    case ModelKind::KRMsvm: return "kr-msvm";
  }
  return "?";
}

ModelKind model_from_string(const std::string& s) {
  for (ModelKind k : {ModelKind::WdrMsvm, ModelKind::DrOva, ModelKind::RMsvm,
                      ModelKind::RMlr, ModelKind::KWdrMsvm, ModelKind::KDrOva,
                      ModelKind::KRMsvm}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown model '" + s +
                        "' (expected wdr-msvm, dr-ova, r-msvm, r-mlr, kwdr-msvm, "
                        "kdr-ova or kr-msvm)");
}

bool is_kernel(ModelKind k) {
  return k == ModelKind::KWdrMsvm || k == ModelKind::KDrOva || k == ModelKind::KRMsvm;
}

bool ignores_kappa(ModelKind k) {
  return k == ModelKind::RMsvm || k == ModelKind::RMlr || k == ModelKind::KRMsvm;
}

void DataSource::validate() const {
  if (kind == Kind::Generator) {
    generator.validate();
    if (test_samples < 0) throw InvalidArgument("test_samples must be >= 0");
    if (!test_weights.empty() &&
        static_cast<int>(test_weights.size()) != generator.classes) {
      throw InvalidArgument("test_weights needs one weight per class");
    }
    return;
  }
  if (csv_path.empty()) throw InvalidArgument("csv path is empty");
  if (train_counts.empty() && !(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw InvalidArgument("train_fraction must be in (0, 1]");
  }
}

void TrainConfig::validate() const {
  data.validate();
  hp.validate();
  kernel.validate();
  for (double s : steps) {
    if (!(s > 0.0)) throw InvalidArgument("steps must be > 0");
  }
}

TrainConfig parse_train_config(const std::string& json_text,
                               const std::filesystem::path& base_dir) {
  const json j = parse_json(json_text, "train config");
  check_keys(j, "train config", {"model", "data", "standardize", "epsilon", "kappa",
                                 "cost_norm", "kernel", "solver"});
  TrainConfig c;
  c.model = model_from_string(get_or<std::string>(j, "model", "wdr-msvm"));
  if (!j.contains("data")) throw InvalidArgument("train config needs 'data'");
  c.data = data_from(j.at("data"), base_dir);
  c.standardize = get_or<bool>(j, "standardize", true);
  c.hp.epsilon = number_or(j, "epsilon", 0.0);
  c.hp.kappa = number_or(j, "kappa", kInfinity);
  c.hp.cost_norm = norm_from_string(get_or<std::string>(j, "cost_norm", "linf"));
  if (j.contains("solver")) c.hp.solver = solver_from(j.at("solver"), &c.steps);
  if (j.contains("kernel")) c.kernel = kernel_from(j.at("kernel"));
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  return parse_train_config(read_text(path), path.parent_path());
}

GeneratorSpec parse_generator_spec(const std::string& json_text) {
  return generator_from(parse_json(json_text, "generator spec"), false);
}

double ModelFile::objective() const {
  if (linear) return linear->objective;
  if (kernel) return kernel->objective;
  if (ova) return ova->total_objective();
  if (kernel_ova) return kernel_ova->total_objective();
  return 0.0;
}

std::vector<int> ModelFile::predict(const Matrix& raw_features) const {
  Matrix X = raw_features;
  if (stats) {
    if (X.cols() != stats->mean.size()) {
      throw DimensionError("data has " + std::to_string(X.cols()) +
                           " features, model expects " +
                           std::to_string(stats->mean.size()));
    }
    for (Eigen::Index p = 0; p < X.cols(); ++p) {
      X.col(p) = (X.col(p).array() - stats->mean[p]) / stats->scale[p];
    }
  }
  if (linear) return predict_all(linear->M, X);
  if (kernel) return predict_kernel_all(*kernel, X);
  if (ova) return predict_ova_all(*ova, X);
  if (kernel_ova) return predict_kernel_ova_all(*kernel_ova, X);
  throw InvalidArgument("model file has no payload");
}

std::string model_to_json(const ModelFile& m) {
  json j;
  j["format"] = kModelFormat;
  j["version"] = ModelFile::kVersion;
  j["model"] = to_string(m.model);
  j["hyperparams"] = hyperparams_json(m.hp);
  j["feature_names"] = m.feature_names;
  j["class_names"] = m.class_names;
  j["label_column"] = m.label_column;
  if (m.stats) {
    j["standardization"] = {{"mean", vector_json(m.stats->mean)},
                            {"scale", vector_json(m.stats->scale)}};
  } else {
    j["standardization"] = nullptr;
  }
  json p;
  if (m.linear) {
    p = {{"type", "linear"}, {"M", matrix_json(m.linear->M)},
         {"lambda", m.linear->lambda}, {"objective", m.linear->objective}};
  } else if (m.kernel) {
    p = {{"type", "kernel"}, {"A", matrix_json(m.kernel->A)},
         {"train_features", matrix_json(m.kernel->train_features)},
         {"kernel", kernel_json(m.kernel->kernel)},
         {"lambda", m.kernel->lambda}, {"objective", m.kernel->objective}};
  } else if (m.ova) {
    p = {{"type", "ova"}, {"W", matrix_json(m.ova->W)},
         {"lambdas", m.ova->lambdas}, {"objectives", m.ova->objectives},
         {"cost_norm", to_string(m.ova->cost_norm)}};
  } else if (m.kernel_ova) {
    p = {{"type", "kernel-ova"}, {"alpha", matrix_json(m.kernel_ova->alpha)},
         {"train_features", matrix_json(m.kernel_ova->train_features)},
         {"kernel", kernel_json(m.kernel_ova->kernel)},
         {"lambdas", m.kernel_ova->lambdas},
         {"objectives", m.kernel_ova->objectives}};
  } else {
    throw InvalidArgument("model file has no payload");
  }
  j["payload"] = std::move(p);
  return j.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
  const json j = parse_json(text, "model file");
  try {
    if (j.value("format", "") != kModelFormat) {
      throw ParseError("not a wdrmsvm model file");
    }
    const int version = j.at("version").get<int>();
    if (version != ModelFile::kVersion) {
      throw ParseError("unsupported model file version " + std::to_string(version));
    }
    ModelFile m;
    m.model = model_from_string(j.at("model").get<std::string>());
    m.hp = hyperparams_from(j.at("hyperparams"));
    m.feature_names = j.value("feature_names", std::vector<std::string>{});
    m.class_names = j.value("class_names", std::vector<std::string>{});
    m.label_column = j.value("label_column", std::string("label"));
    if (j.contains("standardization") && !j.at("standardization").is_null()) {
      const json& s = j.at("standardization");
      m.stats = StandardizeStats{vector_from(s.at("mean")), vector_from(s.at("scale"))};
    }
    const json& p = j.at("payload");
    const std::string type = p.at("type").get<std::string>();
    if (type == "linear") {
      m.linear = LinearModel{matrix_from(p.at("M"), "M"), p.at("lambda").get<double>(),
                             p.at("objective").get<double>()};
    } else if (type == "kernel") {
      m.kernel = KernelModel{matrix_from(p.at("A"), "A"),
                             matrix_from(p.at("train_features"), "train_features"),
                             kernel_from(p.at("kernel")), p.at("lambda").get<double>(),
                             p.at("objective").get<double>()};
    } else if (type == "ova") {
      OvaModel o;
      o.W = matrix_from(p.at("W"), "W");
      o.lambdas = p.at("lambdas").get<std::vector<double>>();
      o.objectives = p.at("objectives").get<std::vector<double>>();
      o.cost_norm = norm_from_string(p.at("cost_norm").get<std::string>());
      m.ova = std::move(o);
    } else if (type == "kernel-ova") {
      KernelOvaModel o;
      o.alpha = matrix_from(p.at("alpha"), "alpha");
      o.train_features = matrix_from(p.at("train_features"), "train_features");
      o.kernel = kernel_from(p.at("kernel"));
      o.lambdas = p.at("lambdas").get<std::vector<double>>();
      o.objectives = p.at("objectives").get<std::vector<double>>();
      m.kernel_ova = std::move(o);
    } else {
      throw ParseError("unknown payload type '" + type + "'");
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const ModelFile& m, const std::filesystem::path& path) {
  write_text(path, model_to_json(m));
}

ModelFile load_model(const std::filesystem::path& path) {
  return model_from_json(read_text(path));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "inf" || s == "+inf" || s == "Infinity" || s == "infinity") return kInfinity;
  if (s == "-inf" || s == "-Infinity" || s == "-infinity") return -kInfinity;
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ParseError("not a number: '" + s + "'");
  }
  return v;
}

}  // namespace wdrmsvm
