#include "wdrmsvm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "wdrmsvm/kernel.hpp"
#include "wdrmsvm/linear_solver.hpp"
#include "wdrmsvm/reference_solver.hpp"

namespace wdrmsvm {
namespace {

using json = nlohmann::json;

std::vector<double> number_list(const json& j, const char* key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) {
    throw InvalidArgument(std::string("'") + key + "' must be an array");
  }
  for (const json& v : j.at(key)) {
    if (v.is_number()) out.push_back(v.get<double>());
    else if (v.is_string()) out.push_back(parse_double(v.get<std::string>()));
    else throw InvalidArgument(std::string("'") + key + "' holds a non-number");
  }
  return out;
}

double accuracy_of(const std::vector<int>& pred, const Dataset& d) {
  return accuracy(pred, d.label_indices());
}

struct RepData {
  Dataset train;
  Dataset test;
};

RepData prepare_rep(const SweepConfig& cfg, const std::optional<CsvData>& csv,
                    int rep) {
  const std::uint64_t seed = derive_seed({cfg.master_seed, static_cast<std::uint64_t>(rep)});
  std::optional<Dataset> train;
  std::optional<Dataset> test;
  if (cfg.data.kind == DataSource::Kind::Generator) {
    GeneratorSpec spec = cfg.data.generator;
    spec.seed = seed;
    auto [tr, te] = generate_hypercube_pair(spec, cfg.data.test_samples,
                                            cfg.data.test_weights);
    train.emplace(std::move(tr));
    test.emplace(std::move(te));
  } else {
    Split s = cfg.data.train_counts.empty()
                  ? stratified_split(csv->data, cfg.data.train_fraction, seed)
                  : stratified_split(csv->data, cfg.data.train_counts,
                                     cfg.data.test_counts, seed, csv->class_names);
    train.emplace(std::move(s.train));
    test.emplace(std::move(s.test));
  }
  if (cfg.standardize) {
    const StandardizeStats st = standardize_fit(*train);
    return {standardize_apply(st, *train), standardize_apply(st, *test)};
  }
  return {std::move(*train), std::move(*test)};
}

void run_pool(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v, int digits = 2) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << v;
  return ss.str();
}

}  // namespace

SolverChoice solver_from_string(const std::string& s) {
  if (s == "subgradient") return SolverChoice::Subgradient;
  if (s == "simplex") return SolverChoice::Simplex;
  throw InvalidArgument("unknown solver '" + s + "' (expected subgradient or simplex)");
}

ModelFile fit_model(ModelKind kind, const Dataset& train, const Hyperparams& hp_in,
                    const KernelConfig& kernel, const std::vector<double>& steps_in,
                    SolverChoice solver) {
  Hyperparams hp = hp_in;
  if (ignores_kappa(kind)) hp.kappa = kInfinity;
  hp.validate();
  std::vector<double> steps = steps_in;
  if (steps.empty()) steps.push_back(hp.solver.initial_step);

  ModelFile m;
  m.model = kind;
  m.hp = hp;
  if (solver == SolverChoice::Simplex && kind != ModelKind::WdrMsvm &&
      kind != ModelKind::DrOva) {
    throw UnsupportedConfiguration("the simplex solver supports wdr-msvm and dr-ova only");
  }
  switch (kind) {
    case ModelKind::WdrMsvm:
      if (solver == SolverChoice::Simplex) {
        if (hp.regularized()) {
          throw UnsupportedConfiguration("the simplex solver needs a finite kappa");
        }
        const WdrLp lp = build_lp(train, hp);
        m.linear = extract_model(lp, solve_lp(lp.model));
      } else {
        m.linear = fit_best_step(train, hp, steps).model;
      }
      break;
    case ModelKind::RMsvm:
      m.linear = fit_best_step(train, hp, steps).model;
      break;
    case ModelKind::DrOva: {
      OvaOptions o;
      o.solver = solver == SolverChoice::Simplex ? OvaSolver::Simplex : OvaSolver::Subgradient;
      o.steps = steps;
      m.ova = fit_dr_ova(train, hp, o);
      break;
    }
    case ModelKind::RMlr: {
      const RmlrFit f = fit_rmlr(train, hp.epsilon);
      m.linear = LinearModel{f.W, 0.0, f.loss};
      break;
    }
    case ModelKind::KWdrMsvm:
    case ModelKind::KRMsvm:
      m.kernel = fit_kernel_best_step(train, hp, kernel, steps).model;
      break;
    case ModelKind::KDrOva:
      m.kernel_ova = fit_kernel_ova(train, hp, kernel, steps);
      break;
  }
  return m;
}

std::vector<double> default_epsilon_grid() {
  std::vector<double> g;
  for (int e = -6; e <= 1; ++e) g.push_back(std::pow(10.0, e));
  return g;
}

std::vector<double> default_kappa_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 10; ++k) g.push_back(k / 10.0);
  return g;
}

void SweepConfig::validate() const {
  if (models.empty()) throw InvalidArgument("sweep needs at least one model");
  if (epsilon_grid.empty()) throw InvalidArgument("epsilon_grid is empty");
  if (kappa_grid.empty()) throw InvalidArgument("kappa_grid is empty");
  if (repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
  for (double e : epsilon_grid) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw InvalidArgument("epsilon values must be finite and >= 0");
  }
  for (double k : kappa_grid) {
    if (!(k >= 0.0)) throw InvalidArgument("kappa values must be >= 0");
  }
  for (double s : steps) {
    if (!(s > 0.0)) throw InvalidArgument("steps must be > 0");
  }
  data.validate();
  if (data.kind == DataSource::Kind::Generator && data.test_samples < 1) {
    throw InvalidArgument("generator sweeps need test_samples >= 1");
  }
  if (threads < 0) throw InvalidArgument("threads must be >= 0");
  solver.validate();
  kernel.validate();
}

SweepConfig parse_sweep_config(const std::string& json_text,
                               const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("sweep config: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("sweep config must be a JSON object");
  static const std::set<std::string> allowed{
      "models", "epsilon_grid", "kappa_grid", "repetitions", "data", "standardize",
      "cost_norm", "kernel", "solver", "output_dir", "master_seed", "threads"};
  for (const auto& [key, value] : j.items()) {
    if (!key.empty() && key[0] == '_') continue;
    if (!allowed.count(key)) throw InvalidArgument("unknown key '" + key + "' in sweep config");
  }

  // Data, kernel and solver blocks share the train-config parser.
  json train{{"model", "wdr-msvm"}};
  for (const char* key : {"data", "standardize", "cost_norm", "kernel", "solver"}) {
    if (j.contains(key)) train[key] = j.at(key);
  }
  if (!j.contains("data")) throw InvalidArgument("sweep config needs 'data'");
  const TrainConfig t = parse_train_config(train.dump(), base_dir);

  SweepConfig c;
  try {
    if (!j.contains("models")) throw InvalidArgument("sweep config needs 'models'");
    for (const json& m : j.at("models")) c.models.push_back(model_from_string(m.get<std::string>()));
    c.epsilon_grid = j.contains("epsilon_grid") ? number_list(j, "epsilon_grid")
                                                : default_epsilon_grid();
    c.kappa_grid = j.contains("kappa_grid") ? number_list(j, "kappa_grid")
                                            : default_kappa_grid();
    c.repetitions = j.value("repetitions", 1);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.master_seed = j.value("master_seed", std::uint64_t{0});
    c.threads = j.value("threads", 0);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("sweep config: ") + e.what());
  }
  c.data = t.data;
  c.standardize = t.standardize;
  c.cost_norm = t.hp.cost_norm;
  c.kernel = t.kernel;
  c.solver = t.hp.solver;
  c.steps = t.steps;
  if (!c.output_dir.empty() && std::filesystem::path(c.output_dir).is_relative() &&
      !base_dir.empty()) {
    c.output_dir = (base_dir / c.output_dir).string();
  }
  c.validate();
  return c;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  return parse_sweep_config(read_text(path), path.parent_path());
}

std::vector<CellAggregate> aggregate(const std::vector<SweepRecord>& records) {
  std::vector<CellAggregate> out;
  std::map<std::tuple<std::string, double, double>, std::size_t> index;
  std::vector<std::vector<const SweepRecord*>> members;
  for (const SweepRecord& r : records) {
    const auto key = std::make_tuple(r.model, r.epsilon, r.kappa);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({r.model, r.epsilon, r.kappa});
      members.emplace_back();
    }
    members[it->second].push_back(&r);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    CellAggregate& a = out[i];
    const auto& rs = members[i];
    a.count = static_cast<int>(rs.size());
    double st = 0.0;
    double sr = 0.0;
    for (const SweepRecord* r : rs) {
      st += r->mccr_test;
      sr += r->mccr_train;
    }
    a.mean_test = st / a.count;
    a.mean_train = sr / a.count;
    if (a.count > 1) {
      double vt = 0.0;
      double vr = 0.0;
      for (const SweepRecord* r : rs) {
        vt += (r->mccr_test - a.mean_test) * (r->mccr_test - a.mean_test);
        vr += (r->mccr_train - a.mean_train) * (r->mccr_train - a.mean_train);
      }
      a.std_test = std::sqrt(vt / (a.count - 1));
      a.std_train = std::sqrt(vr / (a.count - 1));
    }
  }
  return out;
}

CellAggregate peak_cell(const SweepResult& result, const std::string& model) {
  const CellAggregate* best = nullptr;
  for (const CellAggregate& a : result.aggregates) {
    if (a.model != model) continue;
    if (best == nullptr || a.mean_test > best->mean_test) best = &a;
  }
  if (best == nullptr) throw InvalidArgument("no cells for model '" + model + "'");
  return *best;
}

SweepResult run_sweep(const SweepConfig& config, int threads) {
  config.validate();
  if (threads <= 0) threads = config.threads;
  if (threads <= 0) threads = default_thread_count();

  std::optional<CsvData> csv;
  if (config.data.kind == DataSource::Kind::Csv) {
    csv = load_csv(config.data.csv_path, config.data.label_column);
  }
  const auto R = static_cast<std::size_t>(config.repetitions);
  std::vector<std::optional<RepData>> reps(R);
  std::vector<std::string> rep_errors(R);
  run_pool(R, threads, [&](std::size_t r) {
    try {
      reps[r] = prepare_rep(config, csv, static_cast<int>(r));
    } catch (const std::exception& e) {
      rep_errors[r] = e.what();
    }
  });

  struct Cell {
    std::size_t model, eps, kappa, rep;
    bool compute;
  };
  const std::size_t E = config.epsilon_grid.size();
  const std::size_t K = config.kappa_grid.size();
  std::vector<Cell> cells;
  for (std::size_t m = 0; m < config.models.size(); ++m) {
    const bool shared = ignores_kappa(config.models[m]);
    for (std::size_t e = 0; e < E; ++e) {
      for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t r = 0; r < R; ++r) cells.push_back({m, e, k, r, !shared || k == 0});
      }
    }
  }

  struct Outcome {
    bool ok = false;
    SweepRecord record;
    std::string error;
  };
  std::vector<Outcome> outcomes(cells.size());
  std::vector<std::size_t> work;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].compute) work.push_back(i);
  }

  run_pool(work.size(), threads, [&](std::size_t w) {
    const std::size_t i = work[w];
    const Cell& c = cells[i];
    const ModelKind kind = config.models[c.model];
    Outcome& out = outcomes[i];
    SweepRecord& rec = out.record;
    rec.model = to_string(kind);
    rec.epsilon = config.epsilon_grid[c.eps];
    rec.kappa = config.kappa_grid[c.kappa];
    rec.rep = static_cast<int>(c.rep);
    rec.seed = derive_seed({config.master_seed, hash_string(rec.model), c.eps,
                            c.kappa, c.rep});
    if (!reps[c.rep]) {
      out.error = "data preparation failed: " + rep_errors[c.rep];
      return;
    }
    const RepData& d = *reps[c.rep];
    Hyperparams hp;
    hp.epsilon = rec.epsilon;
    hp.kappa = rec.kappa;
    hp.cost_norm = config.cost_norm;
    hp.solver = config.solver;
    hp.solver.seed = rec.seed;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const ModelFile m = fit_model(kind, d.train, hp, config.kernel, config.steps);
      rec.mccr_train = accuracy_of(m.predict(d.train.features()), d.train);
      rec.mccr_test = accuracy_of(m.predict(d.test.features()), d.test);
      rec.objective = m.objective();
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  });

  SweepResult result;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    Outcome o = outcomes[i];
    if (!c.compute) {
      // Same fit as the first kappa of this (model, eps, rep).
      const std::size_t src = i - c.kappa * R;
      o = outcomes[src];
      o.record.kappa = config.kappa_grid[c.kappa];
    }
    if (o.ok) {
      result.records.push_back(o.record);
    } else {
      result.failures.push_back({o.record.model, o.record.epsilon, o.record.kappa,
                                 o.record.rep, o.error});
    }
  }
  if (result.records.empty()) {
    std::string why = result.failures.empty() ? "" : ": " + result.failures.front().message;
    throw InvalidArgument("sweep produced no valid cells" + why);
  }
  result.aggregates = aggregate(result.records);
  return result;
}

std::string format_csv(const std::vector<SweepRecord>& records,
                       bool include_wall_time) {
  std::ostringstream out;
  out << "model,epsilon,kappa,rep,mccr_train,mccr_test,objective,seed";
  if (include_wall_time) out << ",wall_ms";
  out << '\n';
  for (const SweepRecord& r : records) {
    out << r.model << ',' << format_double(r.epsilon) << ',' << format_double(r.kappa)
        << ',' << r.rep << ',' << format_double(r.mccr_train) << ','
        << format_double(r.mccr_test) << ',' << format_double(r.objective) << ','
        << r.seed;
    if (include_wall_time) out << ',' << format_double(std::round(r.wall_ms * 1000.0) / 1000.0);
    out << '\n';
  }
  return out.str();
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) {
  if (result.records.empty()) throw InvalidArgument("result has no records");
  write_text(path, format_csv(result.records));
}

std::vector<SweepRecord> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("results CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const bool with_wall =
      line == "model,epsilon,kappa,rep,mccr_train,mccr_test,objective,seed,wall_ms";
  if (!with_wall && line != "model,epsilon,kappa,rep,mccr_train,mccr_test,objective,seed") {
    throw ParseError("unexpected results CSV header: " + line);
  }
  std::vector<SweepRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != (with_wall ? 9u : 8u)) {
      throw ParseError("line " + std::to_string(lineno) + ": wrong field count");
    }
    try {
      SweepRecord r;
      r.model = f[0];
      r.epsilon = parse_double(f[1]);
      r.kappa = parse_double(f[2]);
      r.rep = std::stoi(f[3]);
      r.mccr_train = parse_double(f[4]);
      r.mccr_test = parse_double(f[5]);
      r.objective = parse_double(f[6]);
      const auto res = std::from_chars(f[7].data(), f[7].data() + f[7].size(), r.seed);
      if (res.ec != std::errc()) throw ParseError("bad seed");
      if (with_wall) r.wall_ms = parse_double(f[8]);
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<SweepRecord> read_results_csv(const std::filesystem::path& path) {
  return parse_results_csv(read_text(path));
}

std::string format_summary_csv(const std::vector<CellAggregate>& aggregates) {
  std::ostringstream out;
  out << "model,epsilon,kappa,count,mean_mccr_train,std_mccr_train,mean_mccr_test,std_mccr_test\n";
  for (const CellAggregate& a : aggregates) {
    out << a.model << ',' << format_double(a.epsilon) << ',' << format_double(a.kappa)
        << ',' << a.count << ',' << format_double(a.mean_train) << ','
        << format_double(a.std_train) << ',' << format_double(a.mean_test) << ','
        << format_double(a.std_test) << '\n';
  }
  return out.str();
}

std::string format_svg(const SweepResult& result) {
  if (result.aggregates.empty()) throw InvalidArgument("result has no records");
  constexpr double W = 720, H = 440, left = 70, right = 170, top = 30, bottom = 60;
  const double pw = W - left - right;
  const double ph = H - top - bottom;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#17becf"};

  std::vector<std::string> models;
  for (const CellAggregate& a : result.aggregates) {
    if (std::find(models.begin(), models.end(), a.model) == models.end()) models.push_back(a.model);
  }
  // log10 of zero epsilon is clamped to the smallest positive grid value.
  double min_pos = kInfinity;
  for (const CellAggregate& a : result.aggregates) {
    if (a.epsilon > 0.0) min_pos = std::min(min_pos, a.epsilon);
  }
  if (!std::isfinite(min_pos)) min_pos = 1.0;
  auto lx = [&](double eps) { return std::log10(eps > 0.0 ? eps : min_pos); };
  double x0 = kInfinity;
  double x1 = -kInfinity;
  for (const CellAggregate& a : result.aggregates) {
    x0 = std::min(x0, lx(a.epsilon));
    x1 = std::max(x1, lx(a.epsilon));
  }
  if (x1 - x0 < 1e-9) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + (1.0 - std::clamp(v, 0.0, 1.0)) * ph; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    s << "<line x1=\"" << left - 4 << "\" y1=\"" << fmt(py(v)) << "\" x2=\"" << left
      << "\" y2=\"" << fmt(py(v)) << "\" stroke=\"black\"/>"
      << "<text x=\"" << left - 8 << "\" y=\"" << fmt(py(v) + 4)
      << "\" text-anchor=\"end\">" << fmt(v, 1) << "</text>\n";
  }
  for (int t = static_cast<int>(std::ceil(x0 - 1e-9)); t <= static_cast<int>(std::floor(x1 + 1e-9)); ++t) {
    s << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << top + ph << "\" x2=\"" << fmt(px(t))
      << "\" y2=\"" << top + ph + 4 << "\" stroke=\"black\"/>"
      << "<text x=\"" << fmt(px(t)) << "\" y=\"" << top + ph + 18
      << "\" text-anchor=\"middle\">" << t << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15
    << "\" text-anchor=\"middle\">log10(epsilon)</text>\n";
  s << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << top + ph / 2 << ")\">mean test mCCR</text>\n";

  for (std::size_t m = 0; m < models.size(); ++m) {
    const std::string& model = models[m];
    const double best_kappa = peak_cell(result, model).kappa;
    std::vector<const CellAggregate*> pts;
    for (const CellAggregate& a : result.aggregates) {
      if (a.model == model && a.kappa == best_kappa) pts.push_back(&a);
    }
    std::sort(pts.begin(), pts.end(),
              [](const CellAggregate* a, const CellAggregate* b) { return a->epsilon < b->epsilon; });
    const char* color = colors[m % (sizeof(colors) / sizeof(colors[0]))];
    s << "<g class=\"series\" data-model=\"" << escape_xml(model) << "\" data-kappa=\""
      << format_double(best_kappa) << "\">\n<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"2\" points=\"";
    for (const CellAggregate* a : pts) s << fmt(px(lx(a->epsilon))) << ',' << fmt(py(a->mean_test)) << ' ';
    s << "\"/>\n";
    for (const CellAggregate* a : pts) {
      const double x = px(lx(a->epsilon));
      s << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(py(a->mean_test - a->std_test))
        << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(py(a->mean_test + a->std_test))
        << "\" stroke=\"" << color << "\"/>"
        << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(py(a->mean_test))
        << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    s << "</g>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(m);
    s << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32
      << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>"
      << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly + 4 << "\">" << escape_xml(model)
      << " (kappa " << format_double(best_kappa) << ")</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void emit_svg(const SweepResult& result, const std::filesystem::path& path) {
  write_text(path, format_svg(result));
}

void write_sweep_outputs(const SweepResult& result,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  emit_csv(result, dir / "results.csv");
  write_text(dir / "summary.csv", format_summary_csv(result.aggregates));
  emit_svg(result, dir / "mccr.svg");
  const auto failures = dir / "failures.csv";
  if (!result.failures.empty()) {
    std::ostringstream out;
    out << "model,epsilon,kappa,rep,message\n";
    for (const SweepFailure& f : result.failures) {
      std::string msg = f.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << f.model << ',' << format_double(f.epsilon) << ',' << format_double(f.kappa)
          << ',' << f.rep << ',' << msg << '\n';
    }
    write_text(failures, out.str());
  } else if (std::filesystem::exists(failures)) {
    std::filesystem::remove(failures);
  }
}

int default_thread_count() {
  if (const char* env = std::getenv("WDRMSVM_THREADS")) {
    int n = 0;
    const std::string s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), n);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size() && n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace wdrmsvm
