#include "sheafq/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

namespace sheafq {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t cell_seed(std::uint64_t master, std::uint64_t seed, Index split) {
  return splitmix64(splitmix64(master) ^ splitmix64(seed + 0x1000) ^ splitmix64(static_cast<std::uint64_t>(split) + 0x2000));
}

// 6 significant digits, kept as a double so JSON and CSV agree.
double round6(double x) {
  if (!std::isfinite(x)) return x;
  return std::stod(format_significant(x, 6));
}

Json num(double x) { return std::isfinite(x) ? Json(round6(x)) : Json(nullptr); }

double num_from(const Json& j) { return j.is_null() ? kNaN : j.get<double>(); }

Json train_config_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"weight_decay", c.weight_decay}, {"max_epochs", c.max_epochs},
          {"patience", c.patience},           {"beta1", c.beta1},               {"beta2", c.beta2},
          {"epsilon", c.epsilon},             {"min_delta", c.min_delta},       {"step_scale", c.step_scale},
          {"map_lr_scale", c.map_lr_scale}};
}

Json spec_json(const ExperimentSpec& s) {
  return {{"name", s.label()},           {"architecture", s.architecture()}, {"d_v", s.d_v},
          {"d_e", s.d_e},                {"regularizer", to_string(s.regularizer)},
          {"lambda_cent", s.lambda_cent}, {"lambda_theta", s.lambda_theta}, {"layers", s.layers},
          {"hidden", s.hidden},          {"dropout", s.dropout},             {"identity_frozen", s.identity_frozen},
          {"seeds", s.seeds}};
}

Json dataset_json(const DatasetBundle& data) {
  const auto s = summarize(data);
  return {{"nodes", s.nodes}, {"edges", s.edges}, {"features", s.features}, {"classes", s.classes},
          {"splits", s.splits}, {"homophily", s.homophily}};
}

ResultRecord run_cell(const ExperimentSpec& spec, const DatasetBundle& data, Index split, std::uint64_t seed,
                      const RunConfig& config, double step_scale) {
  return run_single(spec, data, split, seed, config, step_scale).record;
}

struct Cell {
  std::size_t spec;
  Index split;
  std::uint64_t seed;
  double step_scale;
};

std::vector<ResultRecord> run_cells(const std::vector<ExperimentSpec>& specs, const std::vector<Cell>& cells,
                                    const DatasetBundle& data, const RunConfig& config) {
  std::vector<ResultRecord> out(cells.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      const Cell& c = cells[k];
      out[k] = run_cell(specs[c.spec], data, c.split, c.seed, config, c.step_scale);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(cells.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

Index split_count(const DatasetBundle& data, const RunConfig& config) {
  if (data.splits.empty()) throw StructuralError("dataset has no splits");
  const Index n = static_cast<Index>(data.splits.size());
  return config.max_splits > 0 ? std::min(n, config.max_splits) : n;
}

std::string csv_row(const ResultRecord& r) {
  std::ostringstream os;
  const auto f = [](double x) { return format_significant(x, 6); };
  os << r.spec << ',' << r.architecture << ',' << r.regularizer << ',' << r.split << ',' << r.seed << ','
     << r.layers << ',' << f(r.step_scale) << ',' << f(r.test_acc) << ',' << f(r.best_val_acc) << ','
     << f(r.final_loss.task) << ',' << f(r.final_loss.cent) << ',' << f(r.final_loss.theta_mm) << ','
     << f(r.final_loss.total) << ',' << f(r.dirichlet_energy) << ',' << r.best_epoch << ',' << r.epochs << ','
     << r.parameters << ',' << r.halt_reason;
  return os.str();
}

constexpr const char* kRecordHeader =
    "spec,architecture,regularizer,split,seed,layers,step_scale,test_acc,best_val_acc,task,cent,theta_mm,total,"
    "dirichlet_energy,best_epoch,epochs,parameters,halt_reason";

double parse_csv_double(const std::string& s) {
  if (s == "nan") return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(s);
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  return out;
}

}  // namespace

std::string to_string(Regularizer r) {
  switch (r) {
    case Regularizer::none: return "none";
    case Regularizer::cent: return "cent";
    case Regularizer::theta: return "theta";
  }
  return "none";
}

Regularizer parse_regularizer(const std::string& text) {
  if (text == "none") return Regularizer::none;
  if (text == "cent" || text == "centmm") return Regularizer::cent;
  if (text == "theta" || text == "thetamm") return Regularizer::theta;
  throw StructuralError("unknown regularizer '" + text + "' (none, cent, theta)");
}

ExperimentSpec ExperimentSpec::preset(const std::string& architecture, Regularizer reg) {
  ExperimentSpec s;
  s.regularizer = reg;
  if (architecture == "square-3x3") {
    s.d_v = s.d_e = 3;
  } else if (architecture == "rect-3to2") {
    s.d_v = 3;
    s.d_e = 2;
  } else if (architecture == "identity") {
    s.d_v = s.d_e = 3;
    s.identity_frozen = true;
  } else {
    throw StructuralError("unknown architecture preset '" + architecture + "' (square-3x3, rect-3to2, identity)");
  }
  return s;
}

std::string ExperimentSpec::architecture() const {
  const std::string dims = std::to_string(d_v) + (d_v == d_e ? "x" : "to") + std::to_string(d_e);
  if (identity_frozen) return "identity-" + dims;
  return (d_v == d_e ? "square-" : "rect-") + dims;
}

void ExperimentSpec::validate() const {
  if (d_v < 1 || d_e < 1 || layers < 0 || hidden < 1) throw StructuralError("invalid experiment shape");
  if (identity_frozen && d_v != d_e) throw StructuralError("identity baseline needs square stalks");
  if (!(lambda_cent >= 0) || !(lambda_theta >= 0)) throw StructuralError("regularizer weights must be nonnegative");
  if (!(dropout >= 0 && dropout < 1)) throw StructuralError("dropout must be in [0, 1)");
  if (seeds.empty()) throw StructuralError("experiment needs at least one seed");
  if (name.find_first_of(",\"\n") != std::string::npos) throw StructuralError("spec name may not contain , \" or newline");
}

SheafModel ExperimentSpec::make_model(const DatasetBundle& data, Rng& rng) const {
  validate();
  SheafModel::Shape shape;
  shape.d_v = d_v;
  shape.d_e = d_e;
  shape.features = data.features.cols();
  shape.hidden = hidden;
  shape.classes = std::max<Index>(2, data.num_classes);
  shape.layers = layers;
  SheafModel m = SheafModel::init(data.graph, shape, rng);
  if (identity_frozen) {
    m.set_identity_maps();
    m.renormalize_step();
  }
  m.lambda_cent = regularizer == Regularizer::cent ? lambda_cent : 0.0;
  m.lambda_theta = regularizer == Regularizer::theta ? lambda_theta : 0.0;
  m.dropout = dropout;
  return m;
}

Index ExperimentSpec::parameter_count(const DatasetBundle& data) const {
  const Index classes = std::max<Index>(2, data.num_classes);
  const Index width = d_v * hidden;
  Index n = data.features.cols() * width + width + width * classes + classes;
  if (!identity_frozen) n += 2 * data.graph.num_edges() * d_v * d_e;
  if (regularizer == Regularizer::theta) n += data.graph.num_vertices() + data.graph.num_edges();
  return n;
}

ExperimentSpec parameter_matched_control(const ExperimentSpec& reference, const DatasetBundle& data) {
  const Index target = reference.parameter_count(data);
  ExperimentSpec best = reference;
  best.d_e = best.d_v;
  best.identity_frozen = false;
  Index best_gap = std::numeric_limits<Index>::max();
  for (Index h = 1; h <= 4 * reference.hidden + 64; ++h) {
    ExperimentSpec s = best;
    s.hidden = h;
    const Index gap = std::abs(s.parameter_count(data) - target);
    if (gap < best_gap) {
      best_gap = gap;
      best.hidden = h;
    }
  }
  best.name = "square-" + std::to_string(best.d_v) + "x" + std::to_string(best.d_v) + "-matched-h" +
              std::to_string(best.hidden) + "/" + to_string(best.regularizer);
  return best;
}

SingleRun run_single(const ExperimentSpec& spec, const DatasetBundle& data, Index split, std::uint64_t seed,
                     const RunConfig& config, double step_scale) {
  SingleRun out;
  ResultRecord& r = out.record;
  r.spec = spec.label();
  r.architecture = spec.architecture();
  r.regularizer = to_string(spec.regularizer);
  r.split = split;
  r.seed = seed;
  r.layers = spec.layers;
  r.step_scale = step_scale;
  r.parameters = spec.parameter_count(data);

  if (split < 0 || split >= static_cast<Index>(data.splits.size()))
    throw StructuralError("split " + std::to_string(split) + " out of range (dataset has " +
                          std::to_string(data.splits.size()) + ")");
  const std::uint64_t stream = cell_seed(config.master_seed, seed, split);
  Rng rng(stream);
  SheafModel model = spec.make_model(data, rng);
  TrainConfig tc = config.train;
  tc.seed = splitmix64(stream);
  tc.freeze_maps = tc.freeze_maps || spec.identity_frozen;
  tc.step_scale = step_scale;
  const Split& sp = data.splits[static_cast<std::size_t>(split)];

  out.result = train(std::move(model), data, sp, tc);
  const TrainResult& tr = out.result;
  r.halt_reason = tr.halt_reason;
  r.epochs = static_cast<Index>(tr.history.size());
  r.best_epoch = tr.best_epoch;
  if (!std::isfinite(tr.best_val_loss)) {
    r.test_acc = r.best_val_acc = kNaN;
    r.final_loss.task = r.final_loss.cent = r.final_loss.theta_mm = r.final_loss.total = kNaN;
    r.dirichlet_energy = kNaN;
    return out;
  }
  const ForwardPass pass = forward(tr.model, data.features);
  r.test_acc = sp.test.empty() ? kNaN : accuracy(pass.scores, data.labels, sp.test);
  r.best_val_acc = tr.best_val_acc;
  r.final_loss = loss_from(tr.model, pass, data.labels, sp.train);
  r.dirichlet_energy = dirichlet_energy(tr.model.sheaf, pass.states.back());
  return out;
}

GridResult run_grid(const std::vector<ExperimentSpec>& input, const DatasetBundle& data, const RunConfig& config) {
  data.validate();
  config.train.validate();
  std::vector<ExperimentSpec> specs = input;
  if (config.parameter_matched_control)
    for (const auto& s : input)
      if (s.d_v != s.d_e && !s.identity_frozen) specs.push_back(parameter_matched_control(s, data));
  for (const auto& s : specs) s.validate();

  const Index splits = split_count(data, config);
  std::vector<Cell> cells;
  for (std::size_t k = 0; k < specs.size(); ++k)
    for (Index sp = 0; sp < splits; ++sp)
      for (auto seed : specs[k].seeds) cells.push_back({k, sp, seed, config.train.step_scale});

  GridResult out;
  out.records = run_cells(specs, cells, data, config);
  for (const auto& s : specs) {
    AggregateRow row;
    row.spec = s.label();
    row.architecture = s.architecture();
    row.regularizer = to_string(s.regularizer);
    row.parameters = s.parameter_count(data);
    std::vector<double> test, val;
    for (const auto& r : out.records)
      if (r.spec == row.spec) {
        ++row.runs;
        if (r.halt_reason == "nonfinite") ++row.halt_count;
        test.push_back(r.test_acc);
        val.push_back(r.best_val_acc);
      }
    std::tie(row.mean_test, row.std_test) = mean_std(test);
    std::tie(row.mean_val, row.std_val) = mean_std(val);
    row.test_text = format_mean_std(row.mean_test, row.std_test);
    row.val_text = format_mean_std(row.mean_val, row.std_val);
    out.table.push_back(std::move(row));
  }
  out.config = {{"train", train_config_json(config.train)},
                {"master_seed", config.master_seed},
                {"splits_used", splits},
                {"parameter_matched_control", config.parameter_matched_control},
                {"dataset", dataset_json(data)},
                {"specs", Json::array()}};
  for (const auto& s : specs) out.config["specs"].push_back(spec_json(s));
  return out;
}

AblationResult run_depth_ablation(const ExperimentSpec& spec, const DatasetBundle& data,
                                  const std::vector<DepthSetting>& settings, const RunConfig& config) {
  data.validate();
  config.train.validate();
  spec.validate();
  if (settings.empty()) throw StructuralError("depth ablation needs at least one depth");
  for (std::size_t k = 1; k < settings.size(); ++k)
    if (settings[k].depth < settings[k - 1].depth) throw StructuralError("depths must be ascending");
  for (const auto& s : settings)
    if (s.depth < 0 || !(s.step_scale > 0)) throw StructuralError("invalid depth setting");

  std::vector<ExperimentSpec> specs;
  for (const auto& s : settings) {
    ExperimentSpec d = spec;
    d.layers = s.depth;
    specs.push_back(d);
  }
  const Index splits = split_count(data, config);
  std::vector<Cell> cells;
  for (std::size_t k = 0; k < specs.size(); ++k)
    for (Index sp = 0; sp < splits; ++sp)
      for (auto seed : spec.seeds) cells.push_back({k, sp, seed, settings[k].step_scale});

  AblationResult out;
  out.records = run_cells(specs, cells, data, config);
  for (std::size_t k = 0; k < settings.size(); ++k) {
    DepthRow row;
    row.depth = settings[k].depth;
    row.step_scale = settings[k].step_scale;
    std::vector<double> test;
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (cells[c].spec == k) {
        ++row.runs;
        const auto& r = out.records[c];
        if (r.halt_reason == "nonfinite") ++row.halt_count;
        test.push_back(r.test_acc);
      }
    std::tie(row.mean_test, row.std_test) = mean_std(test);
    out.rows.push_back(row);
  }
  out.config = {{"train", train_config_json(config.train)},
                {"master_seed", config.master_seed},
                {"splits_used", splits},
                {"dataset", dataset_json(data)},
                {"spec", spec_json(spec)},
                {"settings", Json::array()}};
  for (const auto& s : settings) out.config["settings"].push_back({{"depth", s.depth}, {"step_scale", s.step_scale}});
  return out;
}

AblationResult run_depth_ablation(const ExperimentSpec& spec, const DatasetBundle& data,
                                  const std::vector<Index>& depths, const RunConfig& config) {
  std::vector<DepthSetting> settings;
  for (Index d : depths) settings.push_back({d, config.train.step_scale});
  return run_depth_ablation(spec, data, settings, config);
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double sum = 0.0;
  Index n = 0;
  for (double x : xs)
    if (std::isfinite(x)) {
      sum += x;
      ++n;
    }
  if (n == 0) return {kNaN, kNaN};
  const double mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (double x : xs)
    if (std::isfinite(x)) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

std::string format_mean_std(double mean, double std) {
  if (!std::isfinite(mean)) return "nan";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * mean << " ± " << 100.0 * std;
  return os.str();
}

OutputFormat parse_format(const std::string& text) {
  if (text == "json") return OutputFormat::json;
  if (text == "csv") return OutputFormat::csv;
  throw StructuralError("unknown format '" + text + "' (json, csv)");
}

Json record_to_json(const ResultRecord& r) {
  return {{"spec", r.spec},
          {"architecture", r.architecture},
          {"regularizer", r.regularizer},
          {"split", r.split},
          {"seed", r.seed},
          {"layers", r.layers},
          {"step_scale", num(r.step_scale)},
          {"test_acc", num(r.test_acc)},
          {"best_val_acc", num(r.best_val_acc)},
          {"task", num(r.final_loss.task)},
          {"cent", num(r.final_loss.cent)},
          {"theta_mm", num(r.final_loss.theta_mm)},
          {"total", num(r.final_loss.total)},
          {"dirichlet_energy", num(r.dirichlet_energy)},
          {"best_epoch", r.best_epoch},
          {"epochs", r.epochs},
          {"parameters", r.parameters},
          {"halt_reason", r.halt_reason}};
}

ResultRecord record_from_json(const Json& j) {
  ResultRecord r;
  try {
    r.spec = j.at("spec").get<std::string>();
    r.architecture = j.at("architecture").get<std::string>();
    r.regularizer = j.at("regularizer").get<std::string>();
    r.split = j.at("split").get<Index>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.layers = j.at("layers").get<Index>();
    r.step_scale = num_from(j.at("step_scale"));
    r.test_acc = num_from(j.at("test_acc"));
    r.best_val_acc = num_from(j.at("best_val_acc"));
    r.final_loss.task = num_from(j.at("task"));
    r.final_loss.cent = num_from(j.at("cent"));
    r.final_loss.theta_mm = num_from(j.at("theta_mm"));
    r.final_loss.total = num_from(j.at("total"));
    r.dirichlet_energy = num_from(j.at("dirichlet_energy"));
    r.best_epoch = j.at("best_epoch").get<Index>();
    r.epochs = j.at("epochs").get<Index>();
    r.parameters = j.at("parameters").get<Index>();
    r.halt_reason = j.at("halt_reason").get<std::string>();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("result record: ") + e.what());
  }
  return r;
}

void emit_results(const GridResult& result, OutputFormat format, std::ostream& out) {
  if (result.records.empty()) throw StructuralError("no records to emit");
  if (format == OutputFormat::json) {
    Json doc;
    doc["config"] = result.config;
    doc["records"] = Json::array();
    for (const auto& r : result.records) doc["records"].push_back(record_to_json(r));
    doc["table"] = Json::array();
    for (const auto& row : result.table)
      doc["table"].push_back({{"spec", row.spec},
                              {"architecture", row.architecture},
                              {"regularizer", row.regularizer},
                              {"runs", row.runs},
                              {"halt_count", row.halt_count},
                              {"parameters", row.parameters},
                              {"mean_test", num(row.mean_test)},
                              {"std_test", num(row.std_test)},
                              {"mean_val", num(row.mean_val)},
                              {"std_val", num(row.std_val)},
                              {"test", row.test_text},
                              {"val", row.val_text}});
    out << doc.dump(2) << '\n';
  } else {
    out << kRecordHeader << '\n';
    for (const auto& r : result.records) out << csv_row(r) << '\n';
  }
}

void emit_results(const GridResult& result, OutputFormat format, const fs::path& path) {
  if (result.records.empty()) throw StructuralError("no records to emit");
  auto out = open_output(path);
  emit_results(result, format, out);
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void emit_table(const std::vector<AggregateRow>& table, OutputFormat format, std::ostream& out) {
  const auto f = [](double x) { return format_significant(x, 6); };
  if (format == OutputFormat::json) {
    Json doc = Json::array();
    for (const auto& row : table)
      doc.push_back({{"spec", row.spec},
                     {"runs", row.runs},
                     {"halt_count", row.halt_count},
                     {"parameters", row.parameters},
                     {"mean_test", num(row.mean_test)},
                     {"std_test", num(row.std_test)},
                     {"test", row.test_text},
                     {"val", row.val_text}});
    out << doc.dump(2) << '\n';
  } else {
    out << "spec,architecture,regularizer,runs,halt_count,parameters,mean_test,std_test,mean_val,std_val,test,val\n";
    for (const auto& row : table)
      out << row.spec << ',' << row.architecture << ',' << row.regularizer << ',' << row.runs << ','
          << row.halt_count << ',' << row.parameters << ',' << f(row.mean_test) << ',' << f(row.std_test) << ','
          << f(row.mean_val) << ',' << f(row.std_val) << ',' << row.test_text << ',' << row.val_text << '\n';
  }
}

void emit_table(const std::vector<AggregateRow>& table, OutputFormat format, const fs::path& path) {
  auto out = open_output(path);
  emit_table(table, format, out);
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void emit_ablation(const AblationResult& result, OutputFormat format, std::ostream& out) {
  if (result.rows.empty()) throw StructuralError("no ablation rows to emit");
  const auto f = [](double x) { return format_significant(x, 6); };
  if (format == OutputFormat::json) {
    Json doc;
    doc["config"] = result.config;
    doc["rows"] = Json::array();
    for (const auto& row : result.rows)
      doc["rows"].push_back({{"depth", row.depth},
                             {"mean_test", num(row.mean_test)},
                             {"std_test", num(row.std_test)},
                             {"halt_count", row.halt_count},
                             {"step_scale", num(row.step_scale)},
                             {"runs", row.runs}});
    doc["records"] = Json::array();
    for (const auto& r : result.records) doc["records"].push_back(record_to_json(r));
    out << doc.dump(2) << '\n';
  } else {
    out << "depth,mean_test,std_test,halt_count,step_scale,runs\n";
    for (const auto& row : result.rows)
      out << row.depth << ',' << f(row.mean_test) << ',' << f(row.std_test) << ',' << row.halt_count << ','
          << f(row.step_scale) << ',' << row.runs << '\n';
  }
}

void emit_ablation(const AblationResult& result, OutputFormat format, const fs::path& path) {
  if (result.rows.empty()) throw StructuralError("no ablation rows to emit");
  auto out = open_output(path);
  emit_ablation(result, format, out);
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::vector<ResultRecord> parse_results(const fs::path& path) {
  std::vector<ResultRecord> out;
  if (path.extension() == ".json") {
    const Json doc = read_json_file(path);
    if (!doc.contains("records") || !doc["records"].is_array()) throw ParseError(path.string() + ": no 'records' array");
    for (const auto& j : doc["records"]) out.push_back(record_from_json(j));
    return out;
  }
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::string line;
  std::getline(in, line);
  if (line != kRecordHeader) throw ParseError(path.filename().string() + ":1: unexpected header");
  Index lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 18) throw ParseError(path.filename().string() + ":" + std::to_string(lineno) + ": expected 18 fields");
    try {
      ResultRecord r;
      r.spec = f[0];
      r.architecture = f[1];
      r.regularizer = f[2];
      r.split = std::stoll(f[3]);
      r.seed = std::stoull(f[4]);
      r.layers = std::stoll(f[5]);
      r.step_scale = parse_csv_double(f[6]);
      r.test_acc = parse_csv_double(f[7]);
      r.best_val_acc = parse_csv_double(f[8]);
      r.final_loss.task = parse_csv_double(f[9]);
      r.final_loss.cent = parse_csv_double(f[10]);
      r.final_loss.theta_mm = parse_csv_double(f[11]);
      r.final_loss.total = parse_csv_double(f[12]);
      r.dirichlet_energy = parse_csv_double(f[13]);
      r.best_epoch = std::stoll(f[14]);
      r.epochs = std::stoll(f[15]);
      r.parameters = std::stoll(f[16]);
      r.halt_reason = f[17];
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ParseError(path.filename().string() + ":" + std::to_string(lineno) + ": malformed field");
    }
  }
  return out;
}

std::string render_table(const std::vector<AggregateRow>& table) {
  std::size_t w = 4;
  for (const auto& row : table) w = std::max(w, row.spec.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(w)) << "spec" << "  " << std::setw(16) << "test (%)" << "  "
     << std::setw(16) << "val (%)" << "  " << std::setw(6) << "runs" << "  " << std::setw(6) << "halts"
     << "  params\n";
  for (const auto& row : table)
    os << std::left << std::setw(static_cast<int>(w)) << row.spec << "  " << std::setw(17) << row.test_text << "  "
       << std::setw(17) << row.val_text << "  " << std::setw(6) << row.runs << "  " << std::setw(6)
       << row.halt_count << "  " << row.parameters << '\n';
  return os.str();
}

}  // namespace sheafq
