#pragma once

#include "sheafq/dataset.hpp"
#include "sheafq/moment.hpp"
#include "sheafq/random.hpp"
#include "sheafq/sheaf.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sheafq {

/// Sheaf-diffusion node classifier with free per-incidence restriction maps.
///
/// Forward pass:
///   E  = X·W_enc + b_enc                (n × d_v·h), optional dropout
///   Y₀ = E regrouped into stalks        (N₀ × h: row v·d_v + a, column c = E(v, a·h + c))
///   Y_{l+1} = Y_l − α Δ_F Y_l,  l < L
///   scores = vec(Y_L)·W_out + b_out     (n × C)
///
/// α is held fixed during a forward/backward pass; training refreshes it once
/// per epoch from λ_max(Δ_F).
struct SheafModel {
  CellularSheaf<double> sheaf;  ///< restriction maps are parameters
  VectorXd raw_theta;           ///< θ̃, one per object; θ = project_theta(θ̃)
  MatrixXd encoder;             ///< f × (d_v·h)
  VectorXd encoder_bias;        ///< d_v·h
  MatrixXd readout;             ///< (d_v·h) × C
  VectorXd readout_bias;        ///< C
  Index hidden = 0;
  Index layers = 0;
  double step_size = 1.0;
  double lambda_cent = 0.0;
  double lambda_theta = 0.0;
  double dropout = 0.0;

  struct Shape {
    Index d_v = 3;
    Index d_e = 2;
    Index features = 0;
    Index hidden = 8;
    Index classes = 2;
    Index layers = 4;
  };

  /// Maps: i.i.d. N(0, σ = 1/√(d_v·d_e)) plus 0.5 on the leading identity block.
  /// Encoder/readout: Glorot-normal. Biases and θ̃ start at zero.
  static SheafModel init(const Graph& graph, const Shape& shape, Rng& rng);

  Index d_v() const { return sheaf.dims().num_vertices() ? sheaf.dims().vertex(0) : 0; }
  Index num_classes() const { return readout.cols(); }
  ThetaVector<double> theta() const { return project_theta(raw_theta, sheaf.dims()); }

  /// Trainable scalar count (maps, θ̃ when λ_θ > 0, encoder, readout).
  Index num_parameters() const;

  /// Sets every restriction map to the leading identity block.
  void set_identity_maps();

  /// step_size = scale / λ_max(Δ_F) (power iteration, warm-started).
  void renormalize_step(double scale = 1.0);

  void check() const;

  VectorXd power_state;  ///< warm start for the λ_max estimate
};

/// Largest eigenvalue of Δ_F by power iteration on the blockwise operator.
double estimate_lambda_max(const CellularSheaf<double>& sheaf, VectorXd* warm = nullptr,
                           double rel_tol = 1e-9, int max_iter = 2000);

struct LossBreakdown {
  double task = 0.0;      ///< mean softmax cross-entropy on the mask
  double cent = 0.0;      ///< R_cent
  double theta_mm = 0.0;  ///< R_{θ-μ}
  double total = 0.0;     ///< task + λ_μ·cent + λ_θ·theta_mm
};

struct ForwardPass {
  MatrixXd encoded;              ///< E after dropout, n × d_v·h
  std::vector<MatrixXd> states;  ///< Y₀ … Y_L
  MatrixXd flat;                 ///< vec(Y_L) per node
  MatrixXd scores;               ///< n × C
  MatrixXd dropout_mask;         ///< empty when dropout is off
  bool finite = true;
};

/// Full-graph forward pass. `dropout_rng` enables dropout (training only).
ForwardPass forward(const SheafModel& model, const MatrixXd& features, Rng* dropout_rng = nullptr);

/// Rows of `scores` for the nodes in `mask`.
MatrixXd masked_scores(const ForwardPass& pass, const std::vector<Index>& mask);

double cross_entropy(const MatrixXd& scores, const std::vector<Index>& labels,
                     const std::vector<Index>& mask);

LossBreakdown loss(const SheafModel& model, const MatrixXd& features, const std::vector<Index>& labels,
                   const std::vector<Index>& mask);
LossBreakdown loss_from(const SheafModel& model, const ForwardPass& pass, const std::vector<Index>& labels,
                        const std::vector<Index>& mask);

struct ModelGradient {
  std::vector<MatrixXd> maps;
  VectorXd raw_theta;
  MatrixXd encoder;
  VectorXd encoder_bias;
  MatrixXd readout;
  VectorXd readout_bias;
};

/// Reverse-mode gradient of loss().total. Throws NumericError if the forward
/// pass is not finite.
ModelGradient backward(const SheafModel& model, const MatrixXd& features, const std::vector<Index>& labels,
                       const std::vector<Index>& mask);
ModelGradient backward_from(const SheafModel& model, const MatrixXd& features, const ForwardPass& pass,
                            const std::vector<Index>& labels, const std::vector<Index>& mask);

/// Parameters flattened in a fixed order: maps (incidence order, column-major),
/// θ̃, encoder, encoder bias, readout, readout bias.
VectorXd flatten_parameters(const SheafModel& model);
void assign_parameters(SheafModel& model, const VectorXd& flat);
VectorXd flatten_gradient(const ModelGradient& grad);

/// Accuracy of argmax predictions on the mask; ties go to the lowest class index.
double evaluate(const SheafModel& model, const DatasetBundle& data, const std::vector<Index>& mask);
double accuracy(const MatrixXd& scores, const std::vector<Index>& labels, const std::vector<Index>& mask);

struct TrainConfig {
  double learning_rate = 0.01;
  double weight_decay = 5e-3;  ///< L2 added to gradients of every parameter except θ̃
  Index max_epochs = 1500;
  Index patience = 200;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double min_delta = 0.0;    ///< validation loss must drop by more than this to count
  bool freeze_maps = false;  ///< keep restriction maps fixed (identity baselines)
  double step_scale = 1.0;   ///< α = step_scale / λ_max each epoch
  double map_lr_scale = 1.0; ///< restriction maps use learning_rate · map_lr_scale

  void validate() const;
};

struct EpochRecord {
  Index epoch = 0;
  LossBreakdown train;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  SheafModel model;  ///< parameters of the best validation-loss epoch
  std::vector<EpochRecord> history;
  Index best_epoch = 0;
  double best_val_loss = 0.0;
  double best_val_acc = 0.0;
  std::string halt_reason;  ///< "patience", "max_epochs" or "nonfinite"
};

/// Adam with coupled weight decay and early stopping on validation loss.
/// Each epoch: refresh α, evaluate, snapshot on improvement, stop once
/// `patience` epochs pass without improvement, otherwise take one step.
TrainResult train(SheafModel model, const DatasetBundle& data, const Split& split, const TrainConfig& config);

}  // namespace sheafq
