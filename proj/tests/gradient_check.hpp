#pragma once

#include "sheafq/training.hpp"

#include <algorithm>
#include <random>

namespace sheafq::testing {

struct Problem {
  DatasetBundle data;
  SheafModel model;
};

inline Problem small_problem(Rng& rng, Index n, Index dv, Index de, Index h, Index layers, Index classes) {
  Problem p;
  p.data.graph = random_connected_graph(n, 0.3, rng);
  p.data.features = random_gaussian(n, 3, rng);
  std::uniform_int_distribution<Index> cls(0, classes - 1);
  for (Index v = 0; v < n; ++v) p.data.labels.push_back(cls(rng));
  p.data.num_classes = classes;
  SheafModel::Shape shape;
  shape.d_v = dv;
  shape.d_e = de;
  shape.features = 3;
  shape.hidden = h;
  shape.classes = classes;
  shape.layers = layers;
  p.model = SheafModel::init(p.data.graph, shape, rng);
  return p;
}

// Central differences over every parameter, with the dropout mask pinned by
// reseeding the same generator for each evaluation.
inline VectorXd numeric_gradient(SheafModel model, const DatasetBundle& data, const std::vector<Index>& mask,
                                 std::uint64_t dropout_seed) {
  const VectorXd p0 = flatten_parameters(model);
  VectorXd g(p0.size());
  const double h = 1e-5;
  const auto eval = [&](const VectorXd& p) {
    assign_parameters(model, p);
    Rng r(dropout_seed);
    const auto pass = forward(model, data.features, model.dropout > 0 ? &r : nullptr);
    return loss_from(model, pass, data.labels, mask).total;
  };
  for (Index k = 0; k < p0.size(); ++k) {
    VectorXd plus = p0, minus = p0;
    plus(k) += h;
    minus(k) -= h;
    g(k) = (eval(plus) - eval(minus)) / (2 * h);
  }
  return g;
}

/// Relative error between the analytic and numeric gradient for the
/// `config`-th random configuration drawn from `rng`. Configurations vary
/// graph size, stalk dims, width, depth, class count, both penalty weights,
/// dropout and the loss mask.
inline double gradient_relative_error(Rng& rng, int config) {
  std::uniform_int_distribution<Index> nodes(3, 6), dim(1, 3), hid(1, 3), lay(0, 3), cls(2, 4);
  std::uniform_real_distribution<double> lam(0.0, 0.5);
  auto p = small_problem(rng, nodes(rng), dim(rng), dim(rng), hid(rng), lay(rng), cls(rng));
  p.model.lambda_cent = config % 3 == 0 ? 0.0 : lam(rng);
  p.model.lambda_theta = config % 4 == 0 ? 0.0 : lam(rng);
  const VectorXd drawn = random_gaussian(flatten_parameters(p.model).size(), 1, rng, 0.1);
  assign_parameters(p.model, drawn);
  p.model.dropout = config % 5 == 0 ? 0.3 : 0.0;
  std::vector<Index> mask;
  for (Index v = 0; v < p.data.num_nodes(); v += 1 + config % 2) mask.push_back(v);

  const std::uint64_t dseed = 100 + static_cast<std::uint64_t>(config);
  Rng r(dseed);
  const auto pass = forward(p.model, p.data.features, p.model.dropout > 0 ? &r : nullptr);
  const VectorXd analytic = flatten_gradient(backward_from(p.model, p.data.features, pass, p.data.labels, mask));
  const VectorXd numeric = numeric_gradient(p.model, p.data, mask, dseed);
  return (analytic - numeric).norm() / std::max({analytic.norm(), numeric.norm(), 1e-12});
}

}  // namespace sheafq::testing
