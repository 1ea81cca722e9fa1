#include "sheafq/dataset.hpp"

#include "sheafq/io.hpp"
#include "sheafq/random.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace sheafq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const fs::path& file, Index line, const std::string& what) {
  std::string where = file.filename().string();
  if (line > 0) where += ":" + std::to_string(line);
  throw ParseError(where + ": " + what);
}

std::ifstream open_input(const fs::path& file) {
  std::ifstream in(file);
  if (!in) parse_fail(file, 0, "cannot open file");
  return in;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

bool parse_double(const std::string& token, double& out) {
  if (token.empty()) return false;
  const char* b = token.data();
  const char* e = b + token.size();
  if (*b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

bool parse_index(const std::string& token, Index& out) {
  if (token.empty()) return false;
  long long v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) return false;
  out = static_cast<Index>(v);
  return true;
}

json read_json(const fs::path& file) {
  std::ifstream in = open_input(file);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    parse_fail(file, 0, std::string("invalid JSON: ") + e.what());
  }
}

MatrixXd read_features(const fs::path& file) {
  std::ifstream in = open_input(file);
  std::vector<std::vector<double>> rows;
  std::string line;
  Index lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto tokens = split_on(line, ',');
    std::vector<double> row(tokens.size());
    for (std::size_t k = 0; k < tokens.size(); ++k)
      if (!parse_double(tokens[k], row[k]) || !std::isfinite(row[k]))
        parse_fail(file, lineno, "column " + std::to_string(k + 1) + ": not a finite number: '" + tokens[k] + "'");
    if (rows.empty()) width = row.size();
    if (row.size() != width)
      parse_fail(file, lineno, "expected " + std::to_string(width) + " values, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) parse_fail(file, 0, "no feature rows");
  MatrixXd x(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) x(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return x;
}

std::vector<Index> read_labels(const fs::path& file, Index& lines_read) {
  std::ifstream in = open_input(file);
  std::vector<Index> labels;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    Index v = 0;
    if (!parse_index(t, v)) parse_fail(file, lineno, "not an integer label: '" + t + "'");
    if (v < 0) parse_fail(file, lineno, "label out of range: " + t);
    labels.push_back(v);
  }
  lines_read = lineno;
  return labels;
}

std::vector<Index> read_index_list(const json& j, const fs::path& file, const std::string& where, Index n) {
  if (!j.is_array()) parse_fail(file, 0, where + " must be an array of node indices");
  std::vector<Index> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number_integer()) parse_fail(file, 0, where + "[" + std::to_string(k) + "] is not an integer");
    const Index v = j[k].get<Index>();
    if (v < 0 || v >= n)
      parse_fail(file, 0, where + "[" + std::to_string(k) + "] = " + std::to_string(v) + " is out of range");
    out.push_back(v);
  }
  return out;
}

std::vector<Split> read_splits(const fs::path& file, Index n) {
  const json doc = read_json(file);
  const json& list = doc.is_object() && doc.contains("splits") ? doc["splits"] : doc;
  if (!list.is_array()) parse_fail(file, 0, "expected an array of splits");
  std::vector<Split> out;
  for (std::size_t s = 0; s < list.size(); ++s) {
    const std::string where = "splits[" + std::to_string(s) + "]";
    const json& item = list[s];
    if (!item.is_object()) parse_fail(file, 0, where + " is not an object");
    Split sp;
    for (const char* key : {"train", "val", "test"})
      if (!item.contains(key)) parse_fail(file, 0, where + " lacks '" + key + "'");
    sp.train = read_index_list(item["train"], file, where + ".train", n);
    sp.val = read_index_list(item["val"], file, where + ".val", n);
    sp.test = read_index_list(item["test"], file, where + ".test", n);
    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (const auto* part : {&sp.train, &sp.val, &sp.test})
      for (Index v : *part)
        if (seen[static_cast<std::size_t>(v)]++)
          parse_fail(file, 0, where + ": node " + std::to_string(v) + " appears in more than one mask");
    out.push_back(std::move(sp));
  }
  return out;
}

void write_index_list(json& j, const std::vector<Index>& v) {
  j = json::array();
  for (Index i : v) j.push_back(i);
}

}  // namespace

void DatasetBundle::validate() const {
  graph.validate();
  const Index n = num_nodes();
  if (features.rows() != n) throw StructuralError("feature rows do not match the node count");
  if (static_cast<Index>(labels.size()) != n) throw StructuralError("label count does not match the node count");
  if (num_classes < 1) throw StructuralError("dataset has no classes");
  for (Index y : labels)
    if (y < 0 || y >= num_classes) throw StructuralError("label out of range");
  if (!features.allFinite()) throw StructuralError("features contain non-finite values");
  for (const auto& sp : splits) {
    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (const auto* part : {&sp.train, &sp.val, &sp.test})
      for (Index v : *part) {
        if (v < 0 || v >= n) throw StructuralError("split index out of range");
        if (seen[static_cast<std::size_t>(v)]++) throw StructuralError("split masks overlap");
      }
  }
}

double edge_homophily(const Graph& graph, const std::vector<Index>& labels) {
  if (static_cast<Index>(labels.size()) != graph.num_vertices())
    throw StructuralError("label count does not match the node count");
  if (graph.num_edges() == 0) return 0.0;
  Index same = 0;
  for (const Edge& e : graph.edges())
    if (labels[static_cast<std::size_t>(e.u)] == labels[static_cast<std::size_t>(e.v)]) ++same;
  return static_cast<double>(same) / static_cast<double>(graph.num_edges());
}

DatasetSummary summarize(const DatasetBundle& data) {
  DatasetSummary s;
  s.nodes = data.num_nodes();
  s.edges = data.graph.num_edges();
  s.features = data.features.cols();
  s.classes = data.num_classes;
  s.splits = static_cast<Index>(data.splits.size());
  s.homophily = edge_homophily(data.graph, data.labels);
  return s;
}

Graph read_graph_json(const fs::path& file) { return graph_from_json(read_json(file), file.filename().string()); }

Graph read_graph_tsv(const fs::path& file, Index num_vertices) {
  std::ifstream in = open_input(file);
  Graph g;
  for (Index v = 0; v < num_vertices; ++v) g.add_vertex(std::to_string(v));
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tokens = split_on(t, '\t');
    if (tokens.size() != 2 || tokens[0].empty() || tokens[1].empty())
      parse_fail(file, lineno, "expected two tab-separated vertex ids");
    for (const auto& id : tokens)
      if (!g.find_vertex(id)) {
        if (num_vertices >= 0) parse_fail(file, lineno, "edge references unknown vertex '" + id + "'");
        g.add_vertex(id);
      }
    try {
      g.add_edge(tokens[0], tokens[1]);
    } catch (const StructuralError& e) {
      parse_fail(file, lineno, e.what());
    }
  }
  return g;
}

Graph read_graph_tsv(const fs::path& file) { return read_graph_tsv(file, -1); }

DatasetBundle load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ParseError(dir.string() + ": not a dataset directory");
  DatasetBundle data;
  data.features = read_features(dir / "features.csv");
  const Index n = data.features.rows();
  if (fs::exists(dir / "graph.json")) {
    data.graph = read_graph_json(dir / "graph.json");
  } else if (fs::exists(dir / "edges.tsv")) {
    // Edge lists refer to nodes by their row index in features.csv.
    data.graph = read_graph_tsv(dir / "edges.tsv", n);
  } else {
    throw ParseError(dir.string() + ": neither graph.json nor edges.tsv present");
  }
  if (data.graph.num_vertices() != n)
    parse_fail(dir / "features.csv", 0,
               std::to_string(n) + " rows but the graph has " + std::to_string(data.graph.num_vertices()) +
                   " vertices");
  Index label_lines = 0;
  data.labels = read_labels(dir / "labels.csv", label_lines);
  if (static_cast<Index>(data.labels.size()) != n)
    parse_fail(dir / "labels.csv", label_lines,
               "expected " + std::to_string(n) + " labels, got " + std::to_string(data.labels.size()));
  Index max_label = 0;
  for (Index y : data.labels) max_label = std::max(max_label, y);
  data.num_classes = max_label + 1;
  if (fs::exists(dir / "meta.json")) {
    const json meta = read_json(dir / "meta.json");
    if (meta.contains("num_classes")) {
      if (!meta["num_classes"].is_number_integer()) parse_fail(dir / "meta.json", 0, "num_classes must be an integer");
      const Index c = meta["num_classes"].get<Index>();
      if (c <= max_label) {
        // Name the first offending line.
        std::ifstream in(dir / "labels.csv");
        std::string line;
        Index lineno = 0;
        while (std::getline(in, line)) {
          ++lineno;
          Index v = 0;
          if (parse_index(trim(line), v) && v >= c) break;
        }
        parse_fail(dir / "labels.csv", lineno, "label out of range for num_classes = " + std::to_string(c));
      }
      data.num_classes = c;
    }
  }
  if (fs::exists(dir / "splits.json")) data.splits = read_splits(dir / "splits.json", n);
  return data;
}

void write_dataset(const DatasetBundle& data, const fs::path& dir) {
  data.validate();
  fs::create_directories(dir);
  json graph;
  graph["vertices"] = data.graph.vertex_ids();
  graph["edges"] = json::array();
  for (const Edge& e : data.graph.edges())
    graph["edges"].push_back({data.graph.vertex_id(e.u), data.graph.vertex_id(e.v)});
  std::ofstream(dir / "graph.json") << graph.dump() << '\n';

  std::ofstream feats(dir / "features.csv");
  feats.precision(17);
  for (Index i = 0; i < data.features.rows(); ++i) {
    for (Index j = 0; j < data.features.cols(); ++j) {
      if (j) feats << ',';
      feats << data.features(i, j);
    }
    feats << '\n';
  }
  std::ofstream labels(dir / "labels.csv");
  for (Index y : data.labels) labels << y << '\n';

  json splits;
  splits["splits"] = json::array();
  for (const auto& sp : data.splits) {
    json item;
    write_index_list(item["train"], sp.train);
    write_index_list(item["val"], sp.val);
    write_index_list(item["test"], sp.test);
    splits["splits"].push_back(std::move(item));
  }
  std::ofstream(dir / "splits.json") << splits.dump() << '\n';
  json meta;
  meta["num_classes"] = data.num_classes;
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
}

std::vector<Split> random_splits(Index n, Index count, std::uint64_t seed, double train_frac, double val_frac) {
  if (n < 3 || count < 1 || !(train_frac > 0) || !(val_frac > 0) || train_frac + val_frac >= 1.0)
    throw StructuralError("invalid split request");
  const Index n_train = std::max<Index>(1, static_cast<Index>(std::llround(train_frac * static_cast<double>(n))));
  const Index n_val = std::max<Index>(1, static_cast<Index>(std::llround(val_frac * static_cast<double>(n))));
  if (n_train + n_val >= n) throw StructuralError("split leaves no test nodes");
  Rng rng(seed);
  std::vector<Split> out;
  for (Index s = 0; s < count; ++s) {
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Split sp;
    sp.train.assign(perm.begin(), perm.begin() + n_train);
    sp.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
    sp.test.assign(perm.begin() + n_train + n_val, perm.end());
    for (auto* part : {&sp.train, &sp.val, &sp.test}) std::sort(part->begin(), part->end());
    out.push_back(std::move(sp));
  }
  return out;
}

SyntheticDataset generate_two_block(Index n_per_block, double p_intra, double p_inter, std::uint64_t seed,
                                    const TwoBlockOptions& options) {
  if (n_per_block < 4) throw StructuralError("n_per_block must be at least 4");
  if (!(p_intra >= 0 && p_intra <= 1) || !(p_inter >= 0 && p_inter <= 1))
    throw StructuralError("edge probabilities must lie in [0, 1]");
  if (options.distractors < 0 || !(options.feature_noise >= 0) || options.num_splits < 1 || options.max_retries < 1)
    throw StructuralError("invalid generator options");
  const Index n = 2 * n_per_block;
  std::vector<Index> labels(static_cast<std::size_t>(n));
  for (Index v = 0; v < n; ++v) labels[static_cast<std::size_t>(v)] = v < n_per_block ? 0 : 1;

  for (int attempt = 0; attempt < options.max_retries; ++attempt) {
    const std::uint64_t used = seed + static_cast<std::uint64_t>(attempt);
    Rng rng(used);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Graph g = Graph::from_indices(n, {});
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) {
        const bool same = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)];
        if (unif(rng) < (same ? p_intra : p_inter)) g.add_edge(i, j);
      }
    if (options.require_connected && !g.is_connected()) continue;

    SyntheticDataset out;
    auto& b = out.bundle;
    const Index f = 2 + options.distractors;
    b.features = MatrixXd::Zero(n, f);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Index v = 0; v < n; ++v) {
      b.features(v, labels[static_cast<std::size_t>(v)]) = 1.0;
      b.features(v, 0) += options.feature_noise * noise(rng);
      b.features(v, 1) += options.feature_noise * noise(rng);
      for (Index k = 2; k < f; ++k) b.features(v, k) = noise(rng);
    }
    b.graph = std::move(g);
    b.labels = labels;
    b.num_classes = 2;
    b.splits = random_splits(n, options.num_splits, used);

    auto& m = out.manifest;
    m.n_per_block = n_per_block;
    m.p_intra = p_intra;
    m.p_inter = p_inter;
    m.seed = seed;
    m.seed_used = used;
    m.nodes = n;
    m.edges = b.graph.num_edges();
    for (const Edge& e : b.graph.edges())
      (labels[static_cast<std::size_t>(e.u)] == labels[static_cast<std::size_t>(e.v)] ? m.intra_edges
                                                                                       : m.inter_edges)++;
    m.features = f;
    m.classes = 2;
    m.homophily = edge_homophily(b.graph, labels);
    m.feature_noise = options.feature_noise;
    return out;
  }
  throw NumericError("generate_two_block: no connected sample after " + std::to_string(options.max_retries) +
                     " attempts (seed " + std::to_string(seed) + ")");
}

CellularSheaf<double> planted_signed_sheaf(const Graph& graph, const std::vector<Index>& labels) {
  if (static_cast<Index>(labels.size()) != graph.num_vertices())
    throw StructuralError("label count does not match the node count");
  auto s = CellularSheaf<double>::identity(graph, 1);
  for (Index e = 0; e < graph.num_edges(); ++e) {
    const Edge& ed = graph.edge(e);
    if (labels[static_cast<std::size_t>(ed.u)] != labels[static_cast<std::size_t>(ed.v)])
      s.set_map(e, 1, MatrixXd::Constant(1, 1, -1.0));
  }
  return s;
}

}  // namespace sheafq
