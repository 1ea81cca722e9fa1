#pragma once

#include "sheafq/dataset.hpp"
#include "sheafq/io.hpp"
#include "sheafq/training.hpp"

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace sheafq {

enum class Regularizer { none, cent, theta };

std::string to_string(Regularizer r);
Regularizer parse_regularizer(const std::string& text);

/// One architecture × regularizer cell of a grid.
struct ExperimentSpec {
  std::string name;  ///< defaults to "<architecture>/<regularizer>"
  Index d_v = 3;
  Index d_e = 3;
  Regularizer regularizer = Regularizer::none;
  double lambda_cent = 2e-3;
  double lambda_theta = 1e-4;
  Index layers = 4;
  Index hidden = 8;
  double dropout = 0.0;
  bool identity_frozen = false;  ///< identity maps, never trained
  std::vector<std::uint64_t> seeds{0};

  /// "square-3x3" → (3,3), "rect-3to2" → (3,2), "identity" → frozen identity maps.
  static ExperimentSpec preset(const std::string& architecture, Regularizer reg = Regularizer::none);

  std::string architecture() const;
  std::string label() const { return name.empty() ? architecture() + "/" + to_string(regularizer) : name; }
  void validate() const;

  /// Model for `data` with this spec's shape and regularizer weights.
  SheafModel make_model(const DatasetBundle& data, Rng& rng) const;
  /// Trainable scalar count on `data`.
  Index parameter_count(const DatasetBundle& data) const;
};

/// Square spec whose hidden width brings its parameter count closest to `reference`.
ExperimentSpec parameter_matched_control(const ExperimentSpec& reference, const DatasetBundle& data);

struct RunConfig {
  TrainConfig train;
  std::uint64_t master_seed = 0;
  Index max_splits = 0;  ///< 0 = every split in the bundle
  unsigned threads = 1;
  bool parameter_matched_control = false;
};

struct ResultRecord {
  std::string spec;
  std::string architecture;
  std::string regularizer;
  Index split = 0;
  std::uint64_t seed = 0;
  Index layers = 0;
  double step_scale = 1.0;
  double test_acc = 0.0;      ///< NaN when no finite epoch was reached
  double best_val_acc = 0.0;  ///< NaN likewise
  LossBreakdown final_loss;   ///< train-mask loss at the restored snapshot
  double dirichlet_energy = 0.0;
  Index best_epoch = 0;
  Index epochs = 0;
  Index parameters = 0;
  std::string halt_reason;
};

struct AggregateRow {
  std::string spec;
  std::string architecture;
  std::string regularizer;
  Index runs = 0;
  Index halt_count = 0;  ///< runs that stopped as "nonfinite"
  Index parameters = 0;
  double mean_test = 0.0;  ///< over finite runs; population std
  double std_test = 0.0;
  double mean_val = 0.0;
  double std_val = 0.0;
  std::string test_text;  ///< "80.00 ± 5.01" (percent)
  std::string val_text;
};

struct GridResult {
  std::vector<ResultRecord> records;
  std::vector<AggregateRow> table;
  Json config;
};

struct SingleRun {
  ResultRecord record;
  TrainResult result;
};

/// One cell of a grid, keeping the trained model. Seeds are derived exactly as
/// in run_grid.
SingleRun run_single(const ExperimentSpec& spec, const DatasetBundle& data, Index split, std::uint64_t seed,
                     const RunConfig& config, double step_scale = 1.0);

/// Trains every (spec, split, seed) cell. Cell RNG streams are derived from
/// (master seed, spec seed, split), so results do not depend on thread count
/// or on the position of a spec in the list.
GridResult run_grid(const std::vector<ExperimentSpec>& specs, const DatasetBundle& data, const RunConfig& config);

struct DepthSetting {
  Index depth = 2;
  double step_scale = 1.0;  ///< α = step_scale / λ_max; values > 2 are deliberately unstable
};

struct DepthRow {
  Index depth = 0;
  double step_scale = 1.0;
  Index runs = 0;
  double mean_test = 0.0;
  double std_test = 0.0;
  Index halt_count = 0;
};

struct AblationResult {
  std::vector<ResultRecord> records;
  std::vector<DepthRow> rows;
  Json config;
};

/// One aggregate per setting; non-finite runs are recorded, never thrown.
/// Depths must be ascending.
AblationResult run_depth_ablation(const ExperimentSpec& spec, const DatasetBundle& data,
                                  const std::vector<DepthSetting>& settings, const RunConfig& config);
AblationResult run_depth_ablation(const ExperimentSpec& spec, const DatasetBundle& data,
                                  const std::vector<Index>& depths, const RunConfig& config);

/// "80.00 ± 5.01" from fractions in [0,1].
std::string format_mean_std(double mean, double std);

/// Mean and population standard deviation of the finite entries.
std::pair<double, double> mean_std(const std::vector<double>& xs);

enum class OutputFormat { json, csv };
OutputFormat parse_format(const std::string& text);

/// JSON: {"config", "records", "table"}; CSV: one row per record, stable column order.
/// Floats carry 6 significant digits.
void emit_results(const GridResult& result, OutputFormat format, const std::filesystem::path& path);
void emit_results(const GridResult& result, OutputFormat format, std::ostream& out);
void emit_table(const std::vector<AggregateRow>& table, OutputFormat format, const std::filesystem::path& path);
void emit_table(const std::vector<AggregateRow>& table, OutputFormat format, std::ostream& out);
/// CSV columns: depth, mean_test, std_test, halt_count (plus step_scale, runs).
void emit_ablation(const AblationResult& result, OutputFormat format, const std::filesystem::path& path);
void emit_ablation(const AblationResult& result, OutputFormat format, std::ostream& out);

Json record_to_json(const ResultRecord& r);
ResultRecord record_from_json(const Json& j);
std::vector<ResultRecord> parse_results(const std::filesystem::path& path);

/// Fixed-width text rendering of the aggregate table.
std::string render_table(const std::vector<AggregateRow>& table);

}  // namespace sheafq
