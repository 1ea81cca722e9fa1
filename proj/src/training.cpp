#include "sheafq/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sheafq {

namespace {

// E (n × d·h) ↔ Y (n·d × h): Y(v·d + a, c) = E(v, a·h + c).
MatrixXd to_stalks(const MatrixXd& e, Index d, Index h) {
  MatrixXd y(e.rows() * d, h);
  for (Index v = 0; v < e.rows(); ++v)
    for (Index a = 0; a < d; ++a) y.row(v * d + a) = e.block(v, a * h, 1, h);
  return y;
}

MatrixXd from_stalks(const MatrixXd& y, Index d, Index h) {
  const Index n = y.rows() / d;
  MatrixXd e(n, d * h);
  for (Index v = 0; v < n; ++v)
    for (Index a = 0; a < d; ++a) e.block(v, a * h, 1, h) = y.row(v * d + a);
  return e;
}

Index argmax_first(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  Index best = 0;
  for (Index c = 1; c < row.size(); ++c)
    if (row(c) > row(best)) best = c;
  return best;
}

void check_mask(const std::vector<Index>& labels, const std::vector<Index>& mask, Index n) {
  if (mask.empty()) throw StructuralError("empty node mask");
  if (static_cast<Index>(labels.size()) != n) throw StructuralError("labels do not cover every node");
  for (Index i : mask)
    if (i < 0 || i >= n) throw StructuralError("mask index out of range");
}

bool all_finite(const MatrixXd& m) { return m.allFinite(); }

}  // namespace

SheafModel SheafModel::init(const Graph& graph, const Shape& shape, Rng& rng) {
  if (shape.d_v < 1 || shape.d_e < 1 || shape.hidden < 1 || shape.classes < 2 || shape.features < 1 ||
      shape.layers < 0)
    throw StructuralError("invalid model shape");
  SheafModel m;
  m.hidden = shape.hidden;
  m.layers = shape.layers;
  m.sheaf = CellularSheaf<double>(graph, DimensionVector::uniform(graph, shape.d_v, shape.d_e));
  const double sigma = 1.0 / std::sqrt(static_cast<double>(shape.d_v * shape.d_e));
  const Index k = std::min(shape.d_v, shape.d_e);
  for (Index e = 0; e < graph.num_edges(); ++e)
    for (int side = 0; side < 2; ++side) {
      MatrixXd a = random_gaussian(shape.d_e, shape.d_v, rng, sigma);
      a.topLeftCorner(k, k).diagonal().array() += 0.5;
      m.sheaf.set_map(e, side, std::move(a));
    }
  const Index width = shape.d_v * shape.hidden;
  m.encoder = random_gaussian(shape.features, width, rng,
                              std::sqrt(2.0 / static_cast<double>(shape.features + width)));
  m.encoder_bias = VectorXd::Zero(width);
  m.readout = random_gaussian(width, shape.classes, rng,
                              std::sqrt(2.0 / static_cast<double>(width + shape.classes)));
  m.readout_bias = VectorXd::Zero(shape.classes);
  m.raw_theta = VectorXd::Zero(m.sheaf.dims().num_objects());
  m.renormalize_step();
  return m;
}

Index SheafModel::num_parameters() const {
  Index n = encoder.size() + encoder_bias.size() + readout.size() + readout_bias.size();
  for (const auto& a : sheaf.maps()) n += a.size();
  if (lambda_theta > 0) n += raw_theta.size();
  return n;
}

void SheafModel::set_identity_maps() {
  for (Index e = 0; e < sheaf.graph().num_edges(); ++e)
    for (int side = 0; side < 2; ++side) {
      const auto& a = sheaf.map(e, side);
      sheaf.set_map(e, side, MatrixXd::Identity(a.rows(), a.cols()));
    }
}

void SheafModel::renormalize_step(double scale) {
  const double lmax = estimate_lambda_max(sheaf, &power_state);
  step_size = lmax > 0 && std::isfinite(lmax) ? scale / lmax : scale;
}

void SheafModel::check() const {
  sheaf.validate();
  const auto& dims = sheaf.dims();
  for (Index d : dims.vertex_dims())
    if (d != d_v()) throw StructuralError("model requires one vertex stalk dimension");
  const Index width = d_v() * hidden;
  if (encoder.cols() != width || encoder_bias.size() != width || readout.rows() != width ||
      readout_bias.size() != readout.cols() || raw_theta.size() != dims.num_objects())
    throw StructuralError("model parameter shapes are inconsistent");
  if (layers < 0) throw StructuralError("negative layer count");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw StructuralError("dropout must be in [0, 1)");
}

double estimate_lambda_max(const CellularSheaf<double>& sheaf, VectorXd* warm, double rel_tol, int max_iter) {
  const Index n = sheaf.dims().total_vertex();
  if (n == 0 || sheaf.graph().num_edges() == 0) return 0.0;
  VectorXd x;
  if (warm && warm->size() == n && warm->norm() > 0) {
    x = *warm;
  } else {
    // Deterministic, non-symmetric start so no eigenvector is missed by accident.
    x = VectorXd::LinSpaced(n, 1.0, 2.0);
    for (Index i = 0; i < n; i += 2) x(i) = -x(i);
  }
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    VectorXd y = apply_laplacian(sheaf, x);
    const double next = x.dot(y);
    const double nrm = y.norm();
    if (!std::isfinite(nrm)) return std::numeric_limits<double>::infinity();
    if (nrm == 0.0) return 0.0;
    x = y / nrm;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  if (warm) *warm = x;
  // Rayleigh quotients approach λ_max from below; ‖Δx‖ bounds it from above.
  return std::max(lambda, apply_laplacian(sheaf, x).norm());
}

ForwardPass forward(const SheafModel& model, const MatrixXd& features, Rng* dropout_rng) {
  model.check();
  if (features.rows() != model.sheaf.graph().num_vertices() || features.cols() != model.encoder.rows())
    throw StructuralError("feature matrix shape does not match the model");
  const Index d = model.d_v(), h = model.hidden;
  ForwardPass out;
  out.encoded = features * model.encoder;
  out.encoded.rowwise() += model.encoder_bias.transpose();
  if (dropout_rng && model.dropout > 0.0) {
    std::bernoulli_distribution keep(1.0 - model.dropout);
    out.dropout_mask.resize(out.encoded.rows(), out.encoded.cols());
    const double scale = 1.0 / (1.0 - model.dropout);
    for (Index j = 0; j < out.dropout_mask.cols(); ++j)
      for (Index i = 0; i < out.dropout_mask.rows(); ++i) out.dropout_mask(i, j) = keep(*dropout_rng) ? scale : 0.0;
    out.encoded.array() *= out.dropout_mask.array();
  }
  out.states.reserve(static_cast<std::size_t>(model.layers + 1));
  out.states.push_back(to_stalks(out.encoded, d, h));
  for (Index l = 0; l < model.layers; ++l) {
    const MatrixXd& y = out.states.back();
    MatrixXd next = y - model.step_size * apply_laplacian(model.sheaf, y);
    out.states.push_back(std::move(next));
  }
  out.flat = from_stalks(out.states.back(), d, h);
  out.scores = out.flat * model.readout;
  out.scores.rowwise() += model.readout_bias.transpose();
  out.finite = all_finite(out.scores);
  return out;
}

MatrixXd masked_scores(const ForwardPass& pass, const std::vector<Index>& mask) {
  MatrixXd out(static_cast<Index>(mask.size()), pass.scores.cols());
  for (std::size_t k = 0; k < mask.size(); ++k) out.row(static_cast<Index>(k)) = pass.scores.row(mask[k]);
  return out;
}

double cross_entropy(const MatrixXd& scores, const std::vector<Index>& labels, const std::vector<Index>& mask) {
  check_mask(labels, mask, scores.rows());
  double total = 0.0;
  for (Index i : mask) {
    const auto row = scores.row(i);
    const double m = row.maxCoeff();
    const double lse = m + std::log((row.array() - m).exp().sum());
    total += lse - row(labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(mask.size());
}

LossBreakdown loss_from(const SheafModel& model, const ForwardPass& pass, const std::vector<Index>& labels,
                        const std::vector<Index>& mask) {
  LossBreakdown out;
  out.task = pass.finite ? cross_entropy(pass.scores, labels, mask) : std::numeric_limits<double>::quiet_NaN();
  const auto mu = moment_map(model.sheaf);
  out.cent = cent_mm(mu);
  out.theta_mm = theta_mm(mu, model.theta());
  out.total = out.task + model.lambda_cent * out.cent + model.lambda_theta * out.theta_mm;
  return out;
}

LossBreakdown loss(const SheafModel& model, const MatrixXd& features, const std::vector<Index>& labels,
                   const std::vector<Index>& mask) {
  return loss_from(model, forward(model, features), labels, mask);
}

ModelGradient backward(const SheafModel& model, const MatrixXd& features, const std::vector<Index>& labels,
                       const std::vector<Index>& mask) {
  return backward_from(model, features, forward(model, features), labels, mask);
}

ModelGradient backward_from(const SheafModel& model, const MatrixXd& features, const ForwardPass& pass,
                            const std::vector<Index>& labels, const std::vector<Index>& mask) {
  if (!pass.finite) throw NumericError("backward: forward pass produced non-finite scores");
  const Index n = pass.scores.rows();
  check_mask(labels, mask, n);
  const Index d = model.d_v(), h = model.hidden;
  const auto& sheaf = model.sheaf;
  const auto& g = sheaf.graph();
  const auto& dims = sheaf.dims();
  ModelGradient grad;

  // ∂task/∂scores = (softmax − onehot) / |mask| on masked rows.
  MatrixXd dscores = MatrixXd::Zero(n, pass.scores.cols());
  const double inv = 1.0 / static_cast<double>(mask.size());
  for (Index i : mask) {
    const auto row = pass.scores.row(i);
    const double m = row.maxCoeff();
    Eigen::RowVectorXd p = (row.array() - m).exp().matrix();
    p /= p.sum();
    p(labels[static_cast<std::size_t>(i)]) -= 1.0;
    dscores.row(i) += inv * p;
  }
  grad.readout = pass.flat.transpose() * dscores;
  grad.readout_bias = dscores.colwise().sum().transpose();

  grad.maps.assign(static_cast<std::size_t>(sheaf.num_incidences()), MatrixXd());
  for (Index e = 0; e < g.num_edges(); ++e)
    for (int side = 0; side < 2; ++side)
      grad.maps[static_cast<std::size_t>(incidence_index(e, side))] =
          MatrixXd::Zero(dims.edge(e), dims.vertex(g.endpoint(e, side)));

  // Y_{l+1} = Y_l − αδᵀδY_l. With G = ∂L/∂Y_{l+1}:
  //   ∂L/∂Y_l = G − αΔG,
  //   ∂L/∂δ  += −α[(δG)Y_lᵀ + (δY_l)Gᵀ].
  MatrixXd gy = to_stalks(dscores * model.readout.transpose(), d, h);
  const double alpha = model.step_size;
  for (Index l = model.layers - 1; l >= 0; --l) {
    const MatrixXd& y = pass.states[static_cast<std::size_t>(l)];
    const MatrixXd dg = apply_coboundary(sheaf, gy);
    const MatrixXd dy = apply_coboundary(sheaf, y);
    for (Index e = 0; e < g.num_edges(); ++e) {
      const Index eo = dims.edge_offset(e), de = dims.edge(e);
      for (int side = 0; side < 2; ++side) {
        const Index w = g.endpoint(e, side);
        const Index vo = dims.vertex_offset(w), dw = dims.vertex(w);
        MatrixXd block = dg.middleRows(eo, de) * y.middleRows(vo, dw).transpose();
        block.noalias() += dy.middleRows(eo, de) * gy.middleRows(vo, dw).transpose();
        // δ carries −A_u on the lower endpoint and +A_v on the upper one.
        const double sign = side == 0 ? 1.0 : -1.0;
        grad.maps[static_cast<std::size_t>(incidence_index(e, side))] += sign * alpha * block;
      }
    }
    gy -= alpha * apply_coboundary_transpose(sheaf, dg);
  }

  MatrixXd de = from_stalks(gy, d, h);
  if (pass.dropout_mask.size() > 0) de.array() *= pass.dropout_mask.array();
  grad.encoder = features.transpose() * de;
  grad.encoder_bias = de.colwise().sum().transpose();

  grad.raw_theta = VectorXd::Zero(dims.num_objects());
  if (model.lambda_cent != 0.0) {
    const auto pc = cent_mm_gradient(sheaf);
    for (std::size_t k = 0; k < grad.maps.size(); ++k) grad.maps[k] += model.lambda_cent * pc.maps[k];
  }
  if (model.lambda_theta != 0.0) {
    const auto pt = theta_mm_gradient(sheaf, model.theta());
    for (std::size_t k = 0; k < grad.maps.size(); ++k) grad.maps[k] += model.lambda_theta * pt.maps[k];
    // θ = Pθ̃ with P symmetric, so ∂/∂θ̃ = P ∂/∂θ.
    const VectorXd dv = dims.as_vector().cast<double>();
    const VectorXd& gt = pt.theta;
    grad.raw_theta = model.lambda_theta * (gt - (gt.dot(dv) / dv.squaredNorm()) * dv);
  }
  return grad;
}

VectorXd flatten_parameters(const SheafModel& model) {
  Index total = model.raw_theta.size() + model.encoder.size() + model.encoder_bias.size() +
                model.readout.size() + model.readout_bias.size();
  for (const auto& a : model.sheaf.maps()) total += a.size();
  VectorXd out(total);
  Index pos = 0;
  const auto put = [&](const auto& m) {
    out.segment(pos, m.size()) = Eigen::Map<const VectorXd>(m.data(), m.size());
    pos += m.size();
  };
  for (const auto& a : model.sheaf.maps()) put(a);
  put(model.raw_theta);
  put(model.encoder);
  put(model.encoder_bias);
  put(model.readout);
  put(model.readout_bias);
  return out;
}

void assign_parameters(SheafModel& model, const VectorXd& flat) {
  Index pos = 0;
  const auto take = [&](auto& m) {
    if (pos + m.size() > flat.size()) throw StructuralError("parameter vector too short");
    Eigen::Map<VectorXd>(m.data(), m.size()) = flat.segment(pos, m.size());
    pos += m.size();
  };
  const auto& g = model.sheaf.graph();
  for (Index e = 0; e < g.num_edges(); ++e)
    for (int side = 0; side < 2; ++side) take(model.sheaf.mutable_map(e, side));
  take(model.raw_theta);
  take(model.encoder);
  take(model.encoder_bias);
  take(model.readout);
  take(model.readout_bias);
  if (pos != flat.size()) throw StructuralError("parameter vector too long");
}

VectorXd flatten_gradient(const ModelGradient& grad) {
  Index total = grad.raw_theta.size() + grad.encoder.size() + grad.encoder_bias.size() + grad.readout.size() +
                grad.readout_bias.size();
  for (const auto& a : grad.maps) total += a.size();
  VectorXd out(total);
  Index pos = 0;
  const auto put = [&](const auto& m) {
    out.segment(pos, m.size()) = Eigen::Map<const VectorXd>(m.data(), m.size());
    pos += m.size();
  };
  for (const auto& a : grad.maps) put(a);
  put(grad.raw_theta);
  put(grad.encoder);
  put(grad.encoder_bias);
  put(grad.readout);
  put(grad.readout_bias);
  return out;
}

double accuracy(const MatrixXd& scores, const std::vector<Index>& labels, const std::vector<Index>& mask) {
  check_mask(labels, mask, scores.rows());
  Index hits = 0;
  for (Index i : mask)
    if (argmax_first(scores.row(i)) == labels[static_cast<std::size_t>(i)]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(mask.size());
}

double evaluate(const SheafModel& model, const DatasetBundle& data, const std::vector<Index>& mask) {
  const auto pass = forward(model, data.features);
  if (!pass.finite) return 0.0;
  return accuracy(pass.scores, data.labels, mask);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0) || !(weight_decay >= 0) || max_epochs < 1 || patience < 1 || !(beta1 >= 0 && beta1 < 1) ||
      !(beta2 >= 0 && beta2 < 1) || !(epsilon > 0) || !(min_delta >= 0) || !(step_scale > 0) ||
      !(map_lr_scale > 0))
    throw StructuralError("invalid training configuration");
}

TrainResult train(SheafModel model, const DatasetBundle& data, const Split& split, const TrainConfig& config) {
  config.validate();
  model.check();
  if (split.train.empty() || split.val.empty()) throw StructuralError("train and validation masks must be non-empty");

  Rng rng(config.seed);
  const Index map_count = [&] {
    Index c = 0;
    for (const auto& a : model.sheaf.maps()) c += a.size();
    return c;
  }();
  const Index theta_begin = map_count, theta_end = map_count + model.raw_theta.size();

  VectorXd params = flatten_parameters(model);
  VectorXd m1 = VectorXd::Zero(params.size()), m2 = VectorXd::Zero(params.size());

  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  result.model = model;
  result.halt_reason = "max_epochs";
  Index adam_t = 0;

  for (Index epoch = 0; epoch < config.max_epochs; ++epoch) {
    model.renormalize_step(config.step_scale);
    const ForwardPass eval = forward(model, data.features);
    EpochRecord rec;
    rec.epoch = epoch;
    if (!eval.finite) {
      rec.train.task = rec.train.total = rec.val_loss = std::numeric_limits<double>::quiet_NaN();
      result.history.push_back(rec);
      result.halt_reason = "nonfinite";
      break;
    }
    rec.val_loss = cross_entropy(eval.scores, data.labels, split.val);
    rec.val_acc = accuracy(eval.scores, data.labels, split.val);

    const bool dropout = model.dropout > 0.0;
    ForwardPass trained = dropout ? forward(model, data.features, &rng) : ForwardPass{};
    const ForwardPass& pass = dropout ? trained : eval;
    rec.train = pass.finite ? loss_from(model, pass, data.labels, split.train) : LossBreakdown{};
    if (!pass.finite || !std::isfinite(rec.train.total)) {
      rec.train.total = std::numeric_limits<double>::quiet_NaN();
      result.history.push_back(rec);
      result.halt_reason = "nonfinite";
      break;
    }
    result.history.push_back(rec);

    if (rec.val_loss < result.best_val_loss - config.min_delta) {
      result.best_val_loss = rec.val_loss;
      result.best_val_acc = rec.val_acc;
      result.best_epoch = epoch;
      result.model = model;
    }
    if (epoch - result.best_epoch >= config.patience) {
      result.halt_reason = "patience";
      break;
    }

    VectorXd grad = flatten_gradient(backward_from(model, data.features, pass, data.labels, split.train));
    if (config.weight_decay > 0) {
      VectorXd decay = config.weight_decay * params;
      decay.segment(theta_begin, theta_end - theta_begin).setZero();
      grad += decay;
    }
    if (config.freeze_maps) grad.head(map_count).setZero();
    ++adam_t;
    m1 = config.beta1 * m1 + (1 - config.beta1) * grad;
    m2 = config.beta2 * m2 + (1 - config.beta2) * grad.cwiseAbs2();
    const double c1 = 1 - std::pow(config.beta1, static_cast<double>(adam_t));
    const double c2 = 1 - std::pow(config.beta2, static_cast<double>(adam_t));
    VectorXd step = config.learning_rate * (m1 / c1).array() / ((m2 / c2).array().sqrt() + config.epsilon);
    if (config.freeze_maps) step.head(map_count).setZero();
    else step.head(map_count) *= config.map_lr_scale;
    params -= step;
    if (!params.allFinite()) {
      result.halt_reason = "nonfinite";
      break;
    }
    assign_parameters(model, params);
  }
  return result;
}

}  // namespace sheafq
