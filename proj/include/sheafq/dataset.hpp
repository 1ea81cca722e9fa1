#pragma once

#include "sheafq/graph.hpp"
#include "sheafq/sheaf.hpp"
#include "sheafq/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sheafq {

/// One train/val/test partition, as node indices in vertex order.
struct Split {
  std::vector<Index> train;
  std::vector<Index> val;
  std::vector<Index> test;
};

/// Transductive node-classification dataset.
struct DatasetBundle {
  Graph graph;
  MatrixXd features;          ///< |V|×f, rows in vertex order
  std::vector<Index> labels;  ///< class per node
  Index num_classes = 0;
  std::vector<Split> splits;

  Index num_nodes() const { return graph.num_vertices(); }
  /// Throws StructuralError on any violated invariant.
  void validate() const;
};

struct DatasetSummary {
  Index nodes = 0;
  Index edges = 0;
  Index features = 0;
  Index classes = 0;
  Index splits = 0;
  double homophily = 0.0;  ///< edge homophily
};

DatasetSummary summarize(const DatasetBundle& data);

/// Fraction of edges whose endpoints share a label.
double edge_homophily(const Graph& graph, const std::vector<Index>& labels);

/// Reads a dataset directory:
///   graph.json (or edges.tsv), features.csv, labels.csv, splits.json, optional meta.json.
/// Throws ParseError naming file and line.
DatasetBundle load_dataset(const std::filesystem::path& dir);

/// Writes the same layout (graph.json, features.csv, labels.csv, splits.json, meta.json).
void write_dataset(const DatasetBundle& data, const std::filesystem::path& dir);

/// Graph from a JSON document {"vertices": [...], "edges": [[u, v], ...]}.
Graph read_graph_json(const std::filesystem::path& file);
/// Graph from a tab-separated edge list; vertices in first-appearance order.
Graph read_graph_tsv(const std::filesystem::path& file);
/// Same, with vertices "0" … "n-1" predeclared; other ids are a parse error.
Graph read_graph_tsv(const std::filesystem::path& file, Index num_vertices);

/// `count` random permutations cut into train/val/test with the given fractions
/// (rounded to nearest; test takes the remainder).
std::vector<Split> random_splits(Index n, Index count, std::uint64_t seed, double train_frac = 0.48,
                                 double val_frac = 0.32);

struct TwoBlockOptions {
  Index distractors = 6;
  double feature_noise = 0.5;  ///< std of the Gaussian noise on the class indicator
  Index num_splits = 1;
  int max_retries = 10;
  bool require_connected = true;  ///< false accepts the first sample (p_inter = 0 gives two components)
};

/// What the generator planted, for cross-checking a loaded copy.
struct TwoBlockManifest {
  Index n_per_block = 0;
  double p_intra = 0.0;
  double p_inter = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t seed_used = 0;  ///< after reseeding for connectivity
  Index nodes = 0;
  Index edges = 0;
  Index intra_edges = 0;
  Index inter_edges = 0;
  Index features = 0;
  Index classes = 2;
  double homophily = 0.0;
  double feature_noise = 0.0;
};

struct SyntheticDataset {
  DatasetBundle bundle;
  TwoBlockManifest manifest;
};

/// Two planted communities with edge probabilities p_intra / p_inter.
/// Features: class one-hot plus Gaussian noise, then Gaussian distractor columns.
/// Regenerates (seed + attempt) until connected; throws NumericError after
/// `max_retries` failures. Requires n_per_block ≥ 4.
SyntheticDataset generate_two_block(Index n_per_block, double p_intra, double p_inter, std::uint64_t seed,
                                    const TwoBlockOptions& options = {});

/// d=1 sheaf whose sections are the signed community indicator: +1 maps inside
/// a block, a sign flip on the upper endpoint of every cross-block edge.
CellularSheaf<double> planted_signed_sheaf(const Graph& graph, const std::vector<Index>& labels);

}  // namespace sheafq
