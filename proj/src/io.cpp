#include "sheafq/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace sheafq {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& what) {
  throw ParseError(source + ": " + what);
}

std::string id_text(const Json& j, const std::string& source, const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  fail(source, where + ": vertex id must be a string or integer");
}

Index dim_value(const Json& j, const std::string& source, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(source, where + ": dimension must be a nonnegative integer");
  return j.get<Index>();
}

Json matrix_rows(const MatrixXd& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_rows(const Json& j, const std::string& source, const std::string& where) {
  if (!j.is_array()) fail(source, where + " must be an array of rows");
  const Index rows = static_cast<Index>(j.size());
  Index cols = -1;
  MatrixXd m;
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) fail(source, where + "[" + std::to_string(i) + "] is not an array");
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      m.resize(rows, cols);
    }
    if (static_cast<Index>(row.size()) != cols) fail(source, where + " has ragged rows");
    for (Index c = 0; c < cols; ++c) {
      const Json& x = row[static_cast<std::size_t>(c)];
      if (!x.is_number()) fail(source, where + "[" + std::to_string(i) + "][" + std::to_string(c) + "] is not a number");
      m(i, c) = x.get<double>();
    }
  }
  if (rows == 0) m.resize(0, 0);
  return m;
}

VectorXd vector_from(const Json& j, const std::string& source, const std::string& where) {
  if (!j.is_array()) fail(source, where + " must be an array");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) fail(source, where + "[" + std::to_string(k) + "] is not a number");
    v(static_cast<Index>(k)) = j[k].get<double>();
  }
  return v;
}

Json vector_to(const VectorXd& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string format_significant(double x, int digits) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

Json graph_to_json(const Graph& graph) {
  Json doc;
  doc["vertices"] = graph.vertex_ids();
  doc["edges"] = Json::array();
  for (const Edge& e : graph.edges()) doc["edges"].push_back({graph.vertex_id(e.u), graph.vertex_id(e.v)});
  return doc;
}

Graph graph_from_json(const Json& doc, const std::string& source) {
  if (!doc.is_object() || !doc.contains("vertices") || !doc.contains("edges"))
    fail(source, "expected an object with 'vertices' and 'edges'");
  const Json& vs = doc["vertices"];
  const Json& es = doc["edges"];
  if (!vs.is_array() || !es.is_array()) fail(source, "'vertices' and 'edges' must be arrays");
  Graph g;
  for (std::size_t k = 0; k < vs.size(); ++k) {
    const std::string where = "vertices[" + std::to_string(k) + "]";
    try {
      g.add_vertex(id_text(vs[k], source, where));
    } catch (const StructuralError& e) {
      fail(source, where + ": " + e.what());
    }
  }
  for (std::size_t k = 0; k < es.size(); ++k) {
    const std::string where = "edges[" + std::to_string(k) + "]";
    if (!es[k].is_array() || es[k].size() != 2) fail(source, where + " must be a pair");
    const std::string a = id_text(es[k][0], source, where), b = id_text(es[k][1], source, where);
    for (const auto& id : {a, b})
      if (!g.find_vertex(id)) fail(source, where + " references unknown vertex '" + id + "'");
    try {
      g.add_edge(a, b);
    } catch (const StructuralError& e) {
      fail(source, where + ": " + e.what());
    }
  }
  return g;
}

Json sheaf_to_json(const CellularSheaf<double>& sheaf) {
  const auto& g = sheaf.graph();
  const auto& d = sheaf.dims();
  Json doc;
  doc["graph"] = graph_to_json(g);
  doc["d_v"] = Json::object();
  for (Index v = 0; v < g.num_vertices(); ++v) doc["d_v"][g.vertex_id(v)] = d.vertex(v);
  doc["d_e"] = Json::object();
  for (Index e = 0; e < g.num_edges(); ++e) doc["d_e"][g.edge_key(e)] = d.edge(e);
  doc["maps"] = Json::object();
  for (Index e = 0; e < g.num_edges(); ++e)
    for (int side = 0; side < 2; ++side) {
      const MatrixXd& a = sheaf.map(e, side);
      Json flat = Json::array();
      for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) flat.push_back(a(i, j));
      doc["maps"][g.vertex_id(g.endpoint(e, side)) + "|" + g.edge_key(e)] = std::move(flat);
    }
  return doc;
}

CellularSheaf<double> sheaf_from_json(const Json& doc, const std::string& source) {
  if (!doc.is_object()) fail(source, "expected a JSON object");
  for (const char* key : {"graph", "d_v", "d_e", "maps"})
    if (!doc.contains(key)) fail(source, std::string("missing '") + key + "'");
  Graph g = graph_from_json(doc["graph"], source);

  std::unordered_map<std::string, Index> edge_by_key;
  for (Index e = 0; e < g.num_edges(); ++e) edge_by_key.emplace(g.edge_key(e), e);

  std::vector<Index> vdims(static_cast<std::size_t>(g.num_vertices()));
  std::vector<Index> edims(static_cast<std::size_t>(g.num_edges()));
  const Json& dv = doc["d_v"];
  if (dv.is_number_integer()) {
    std::fill(vdims.begin(), vdims.end(), dim_value(dv, source, "d_v"));
  } else if (dv.is_object()) {
    for (Index v = 0; v < g.num_vertices(); ++v) {
      const auto it = dv.find(g.vertex_id(v));
      if (it == dv.end()) fail(source, "d_v lacks vertex '" + g.vertex_id(v) + "'");
      vdims[static_cast<std::size_t>(v)] = dim_value(*it, source, "d_v." + g.vertex_id(v));
    }
    for (const auto& [key, value] : dv.items())
      if (!g.find_vertex(key)) fail(source, "d_v names unknown vertex '" + key + "'");
  } else {
    fail(source, "d_v must be an integer or an object");
  }
  const Json& de = doc["d_e"];
  if (de.is_number_integer()) {
    std::fill(edims.begin(), edims.end(), dim_value(de, source, "d_e"));
  } else if (de.is_object()) {
    for (const auto& [key, value] : de.items()) {
      const auto it = edge_by_key.find(key);
      if (it == edge_by_key.end()) fail(source, "d_e names unknown edge '" + key + "'");
      edims[static_cast<std::size_t>(it->second)] = dim_value(value, source, "d_e." + key);
    }
    for (Index e = 0; e < g.num_edges(); ++e)
      if (!de.contains(g.edge_key(e))) fail(source, "d_e lacks edge '" + g.edge_key(e) + "'");
  } else {
    fail(source, "d_e must be an integer or an object");
  }

  DimensionVector dims(vdims, edims, 0);
  CellularSheaf<double> sheaf(g, dims);
  const Json& maps = doc["maps"];
  if (!maps.is_object()) fail(source, "'maps' must be an object");
  std::vector<char> seen(static_cast<std::size_t>(2 * g.num_edges()), 0);
  for (const auto& [key, value] : maps.items()) {
    const auto bar = key.find('|');
    if (bar == std::string::npos) fail(source, "map key '" + key + "' is not of the form vertex|edge");
    const std::string vid = key.substr(0, bar), ekey = key.substr(bar + 1);
    const auto eit = edge_by_key.find(ekey);
    if (eit == edge_by_key.end()) fail(source, "map key '" + key + "' names an unknown edge");
    const Index e = eit->second;
    const auto v = g.find_vertex(vid);
    int side = -1;
    if (v && *v == g.edge(e).u) side = 0;
    if (v && *v == g.edge(e).v) side = 1;
    if (side < 0) fail(source, "map key '" + key + "': vertex is not an endpoint of the edge");
    const Index rows = dims.edge(e), cols = dims.vertex(*v);
    const VectorXd flat = vector_from(value, source, "maps." + key);
    if (flat.size() != rows * cols)
      fail(source, "maps." + key + " has " + std::to_string(flat.size()) + " entries, expected " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    MatrixXd a(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) a(i, j) = flat(i * cols + j);
    try {
      sheaf.set_map(e, side, std::move(a));
    } catch (const StructuralError& err) {
      fail(source, "maps." + key + ": " + err.what());
    }
    seen[static_cast<std::size_t>(incidence_index(e, side))] = 1;
  }
  for (Index e = 0; e < g.num_edges(); ++e)
    for (int side = 0; side < 2; ++side)
      if (!seen[static_cast<std::size_t>(incidence_index(e, side))] && dims.edge(e) * dims.vertex(g.endpoint(e, side)) > 0)
        fail(source, "missing map '" + g.vertex_id(g.endpoint(e, side)) + "|" + g.edge_key(e) + "'");
  return sheaf;
}

Json read_json_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError(file.string() + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(file.string() + ": invalid JSON: " + e.what());
  }
}

void write_json_file(const Json& doc, const fs::path& file, int indent) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error(file.string() + ": cannot open for writing");
  out << doc.dump(indent) << '\n';
  if (!out) throw std::runtime_error(file.string() + ": write failed");
}

CellularSheaf<double> read_sheaf(const fs::path& file) {
  return sheaf_from_json(read_json_file(file), file.filename().string());
}

void write_sheaf(const CellularSheaf<double>& sheaf, const fs::path& file) { write_json_file(sheaf_to_json(sheaf), file); }

Json checkpoint_to_json(const SheafModel& model, const Json& config) {
  Json doc = sheaf_to_json(model.sheaf);
  doc["raw_theta"] = vector_to(model.raw_theta);
  doc["encoder"] = {{"weight", matrix_rows(model.encoder)}, {"bias", vector_to(model.encoder_bias)}};
  doc["readout"] = {{"weight", matrix_rows(model.readout)}, {"bias", vector_to(model.readout_bias)}};
  Json cfg = config;
  cfg["hidden"] = model.hidden;
  cfg["layers"] = model.layers;
  cfg["step_size"] = model.step_size;
  cfg["lambda_cent"] = model.lambda_cent;
  cfg["lambda_theta"] = model.lambda_theta;
  cfg["dropout"] = model.dropout;
  doc["config"] = std::move(cfg);
  return doc;
}

SheafModel model_from_checkpoint(const Json& doc, const std::string& source) {
  SheafModel m;
  m.sheaf = sheaf_from_json(doc, source);
  for (const char* key : {"raw_theta", "encoder", "readout", "config"})
    if (!doc.contains(key)) fail(source, std::string("missing '") + key + "'");
  m.raw_theta = vector_from(doc["raw_theta"], source, "raw_theta");
  const Json& enc = doc["encoder"];
  const Json& out = doc["readout"];
  if (!enc.is_object() || !enc.contains("weight") || !enc.contains("bias") || !out.is_object() ||
      !out.contains("weight") || !out.contains("bias"))
    fail(source, "encoder/readout must carry 'weight' and 'bias'");
  m.encoder = matrix_from_rows(enc["weight"], source, "encoder.weight");
  m.encoder_bias = vector_from(enc["bias"], source, "encoder.bias");
  m.readout = matrix_from_rows(out["weight"], source, "readout.weight");
  m.readout_bias = vector_from(out["bias"], source, "readout.bias");
  const Json& cfg = doc["config"];
  try {
    m.hidden = cfg.at("hidden").get<Index>();
    m.layers = cfg.at("layers").get<Index>();
    m.step_size = cfg.at("step_size").get<double>();
    m.lambda_cent = cfg.at("lambda_cent").get<double>();
    m.lambda_theta = cfg.at("lambda_theta").get<double>();
    m.dropout = cfg.value("dropout", 0.0);
  } catch (const Json::exception& e) {
    fail(source, std::string("config: ") + e.what());
  }
  try {
    m.check();
  } catch (const StructuralError& e) {
    fail(source, e.what());
  }
  return m;
}

void write_history_csv(const std::vector<EpochRecord>& history, const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error(file.string() + ": cannot open for writing");
  out << "epoch,task,cent,theta_mm,total,val_loss,val_acc\n";
  for (const auto& r : history)
    out << r.epoch << ',' << format_significant(r.train.task) << ',' << format_significant(r.train.cent) << ','
        << format_significant(r.train.theta_mm) << ',' << format_significant(r.train.total) << ','
        << format_significant(r.val_loss) << ',' << format_significant(r.val_acc) << '\n';
}

MatrixXd read_signal_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError(file.string() + ": cannot open file");
  std::vector<std::vector<double>> rows;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const auto b = tok.find_first_not_of(" \t\r"), e = tok.find_last_not_of(" \t\r");
      tok = b == std::string::npos ? "" : tok.substr(b, e - b + 1);
      double x = 0;
      const char* first = tok.data();
      auto [ptr, ec] = std::from_chars(first, first + tok.size(), x);
      if (tok.empty() || ec != std::errc() || ptr != first + tok.size())
        throw ParseError(file.filename().string() + ":" + std::to_string(lineno) + ": not a number: '" + tok + "'");
      row.push_back(x);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(file.filename().string() + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(file.filename().string() + ": empty signal file");
  MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

void write_signal_csv(const MatrixXd& signal, const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error(file.string() + ": cannot open for writing");
  write_signal_csv(signal, out);
}

void write_signal_csv(const MatrixXd& signal, std::ostream& out) {
  for (Index i = 0; i < signal.rows(); ++i) {
    for (Index j = 0; j < signal.cols(); ++j) out << (j ? "," : "") << format_double(signal(i, j));
    out << '\n';
  }
}

Json manifest_to_json(const TwoBlockManifest& m) {
  return {{"generator", "two_block"},     {"n_per_block", m.n_per_block}, {"p_intra", m.p_intra},
          {"p_inter", m.p_inter},         {"seed", m.seed},               {"seed_used", m.seed_used},
          {"nodes", m.nodes},             {"edges", m.edges},             {"intra_edges", m.intra_edges},
          {"inter_edges", m.inter_edges}, {"features", m.features},       {"classes", m.classes},
          {"homophily", m.homophily},     {"feature_noise", m.feature_noise}};
}

TwoBlockManifest manifest_from_json(const Json& doc, const std::string& source) {
  TwoBlockManifest m;
  try {
    m.n_per_block = doc.at("n_per_block").get<Index>();
    m.p_intra = doc.at("p_intra").get<double>();
    m.p_inter = doc.at("p_inter").get<double>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.seed_used = doc.at("seed_used").get<std::uint64_t>();
    m.nodes = doc.at("nodes").get<Index>();
    m.edges = doc.at("edges").get<Index>();
    m.intra_edges = doc.at("intra_edges").get<Index>();
    m.inter_edges = doc.at("inter_edges").get<Index>();
    m.features = doc.at("features").get<Index>();
    m.classes = doc.at("classes").get<Index>();
    m.homophily = doc.at("homophily").get<double>();
    m.feature_noise = doc.at("feature_noise").get<double>();
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(source + ": " + ex.what());
  }
  return m;
}

}  // namespace sheafq
