#include "sheafq/properties.hpp"

#include "sheafq/diffusion.hpp"
#include "sheafq/harmonic.hpp"
#include "sheafq/moment.hpp"
#include "sheafq/random.hpp"
#include "sheafq/subrep.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

namespace sheafq {

namespace {

struct Suite {
  PropertyReport report;

  explicit Suite(std::string name, double threshold) {
    report.property = std::move(name);
    report.threshold = threshold;
  }
  void residual(double r) {
    // NaN must not hide behind max().
    if (std::isnan(r) || r > report.max_residual) report.max_residual = r;
  }
  void fail(Index instance, const std::string& what) {
    report.failures.push_back("instance " + std::to_string(instance) + ": " + what);
  }
  void check(Index instance, bool ok, const std::string& what) {
    if (!ok) fail(instance, what);
  }
  /// Records `r` and fails the instance when it exceeds `tol` (or is NaN).
  void bound(Index instance, double r, double tol, const std::string& what) {
    residual(r);
    if (!(r <= tol)) {
      std::ostringstream os;
      os << what << " = " << r << " > " << tol;
      fail(instance, os.str());
    }
  }
};

Index uniform_index(Rng& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

/// Sheaf with A_{v,e} w_v = s_{v,e} w_e for planted unit vectors w, arbitrary
/// on the complement of w_v. Returns the sheaf and the matching subrepresentation.
std::pair<CellularSheaf<double>, Subrepresentation<double>> planted_line(const Graph& g, const DimensionVector& dims,
                                                                         Rng& rng, bool random_scales) {
  Subrepresentation<double> sub;
  for (Index v = 0; v < g.num_vertices(); ++v)
    sub.vertex.push_back(random_gaussian(dims.vertex(v), 1, rng).normalized());
  for (Index e = 0; e < g.num_edges(); ++e) sub.edge.push_back(random_gaussian(dims.edge(e), 1, rng).normalized());
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  std::vector<MatrixXd> maps;
  for (Index e = 0; e < g.num_edges(); ++e)
    for (int side = 0; side < 2; ++side) {
      const Index v = g.endpoint(e, side);
      const VectorXd w = sub.vertex[static_cast<std::size_t>(v)];
      const double s = random_scales ? scale(rng) : 1.0;
      const MatrixXd comp = MatrixXd::Identity(w.size(), w.size()) - w * w.transpose();
      maps.push_back(s * sub.edge[static_cast<std::size_t>(e)] * w.transpose() +
                     random_gaussian(dims.edge(e), dims.vertex(v), rng) * comp);
    }
  return {CellularSheaf<double>(g, dims, std::move(maps)), std::move(sub)};
}

/// Random 3×3 maps whose lower-left block vanishes and whose leading k×k block
/// is the identity, so the first k coordinates form a subrepresentation.
CellularSheaf<double> block_triangular(const Graph& g, Index k, Rng& rng) {
  auto s = random_sheaf(g, DimensionVector::uniform(g, 3, 3), rng);
  for (Index e = 0; e < g.num_edges(); ++e)
    for (int side = 0; side < 2; ++side) {
      MatrixXd a = s.map(e, side);
      a.bottomLeftCorner(3 - k, k).setZero();
      a.topLeftCorner(k, k).setIdentity();
      s.set_map(e, side, a);
    }
  return s;
}

PropertyReport kernel_decomposition(std::uint64_t seed) {
  Suite suite("kernel_decomposition", 1e-8);
  Rng rng(seed);
  for (Index i = 0; i < 100; ++i) {
    const Graph g = random_connected_graph(uniform_index(rng, 2, 8), 0.25, rng);
    // Mix in section-rich summands; two generic sheaves usually have h = 0.
    CellularSheaf<double> f, h;
    switch (i % 3) {
      case 0:
        f = random_sheaf(g, random_dims(g, 3, rng), rng);
        h = random_sheaf(g, random_dims(g, 3, rng), rng);
        break;
      case 1:
        f = CellularSheaf<double>::identity(g, uniform_index(rng, 1, 3));
        h = random_sheaf(g, random_dims(g, 3, rng), rng);
        break;
      default:
        f = CellularSheaf<double>::identity(g, random_dims(g, 3, rng));
        h = CellularSheaf<double>::identity(g, uniform_index(rng, 1, 3));
        break;
    }
    const auto r = verify_kernel_decomposition(f, h);
    suite.check(i, r.additive,
                "h(f+g) = " + std::to_string(r.h_sum) + " but h(f) + h(g) = " + std::to_string(r.h_f + r.h_g));
    suite.bound(i, r.max_angle, 1e-8, "principal angle");
  }
  suite.report.instances = 100;
  return suite.report;
}

PropertyReport harmonic_injection(std::uint64_t seed) {
  Suite suite("harmonic_injection", 1e-8);
  Rng rng(seed);
  for (Index i = 0; i < 50; ++i) {
    const Graph g = random_connected_graph(uniform_index(rng, 3, 7), 0.3, rng);
    CellularSheaf<double> s;
    Subrepresentation<double> sub;
    if (i % 2 == 0) {
      const auto dims = i % 4 == 0 ? DimensionVector::uniform(g, 3, 2) : random_dims(g, 3, rng);
      std::tie(s, sub) = planted_line(g, dims, rng, i % 8 >= 4);
    } else {
      const Index k = 1 + (i / 2) % 2;
      s = block_triangular(g, k, rng);
      sub = Subrepresentation<double>::coordinate(s.dims(), k);
    }
    const auto r = verify_harmonic_injection(s, sub);
    suite.bound(i, r.residual, 1e-8, "residual of embedded sections");
    suite.check(i, r.h_sub == 0 || r.min_singular > 1e-10, "embedded basis is rank deficient");
    suite.check(i, r.h_sub <= r.h_full, "dim H0(F') exceeds dim H0(F)");
  }
  suite.report.instances = 50;
  return suite.report;
}

PropertyReport trivial_line_collapse(std::uint64_t seed) {
  Suite suite("trivial_line_collapse", 1e-8);
  Rng rng(seed);
  Index instances = 0;
  for (Index i = 0; i < 50; ++i) {
    // Complete graphs: leaves would add spurious partial solutions.
    const Graph g = random_connected_graph(uniform_index(rng, 4, 7), 1.0, rng);
    CellularSheaf<double> s;
    if (i % 2 == 0) {
      s = planted_line(g, DimensionVector::uniform(g, 3, 2), rng, false).first;
    } else {
      s = direct_sum(CellularSheaf<double>::identity(g, 1), random_sheaf(g, DimensionVector::uniform(g, 2, 2), rng));
    }
    const auto lines = find_trivial_lines(s);
    if (lines.empty()) continue;
    ++instances;
    if (lines.dimension() != 1) {
      suite.fail(i, "expected one trivial line, found " + std::to_string(lines.dimension()));
      continue;
    }
    const VectorXd w = lines.basis.col(0);
    const auto& dims = s.dims();
    const Index n0 = dims.total_vertex();
    const auto r = verify_harmonic_injection(s, line_subrepresentation(s, w));
    suite.check(i, r.h_sub == 1, "injected space has dimension " + std::to_string(r.h_sub));
    if (r.h_sub == 1) {
      const MatrixXd wv = w.head(n0).normalized();
      suite.bound(i, max_principal_angle(r.embedded, wv), 1e-8, "angle to the constant-coefficient line");
    }

    const VectorXd c = random_gaussian(g.num_vertices(), 1, rng);
    VectorXd x(n0);
    for (Index v = 0; v < g.num_vertices(); ++v)
      x.segment(dims.vertex_offset(v), dims.vertex(v)) = c(v) * w.segment(dims.vertex_offset(v), dims.vertex(v));
    double expected = 0;
    for (Index e = 0; e < g.num_edges(); ++e) {
      const double diff = c(g.edge(e).v) - c(g.edge(e).u);
      expected += diff * diff * w.segment(n0 + dims.edge_offset(e), dims.edge(e)).squaredNorm();
    }
    const double energy = dirichlet_energy(s, x);
    suite.bound(i, std::abs(energy - expected) / std::max(expected, 1e-300), 1e-10,
                "relative error of the collapsed energy");
  }
  suite.report.instances = instances;
  if (instances == 0) suite.fail(0, "no sheaf with a trivial line was generated");
  return suite.report;
}

PropertyReport moment_identities(std::uint64_t seed) {
  Suite suite("moment_identities", 1e-10);
  Rng rng(seed);
  Index instance = 0;
  for (; instance < 1000; ++instance) {
    const Graph g = random_connected_graph(uniform_index(rng, 2, 8), 0.3, rng);
    const auto s = random_sheaf(g, random_dims(g, 3, rng), rng);
    const auto mu = moment_map(s);
    double scale = 0;
    for (const auto& a : s.maps()) scale += a.squaredNorm();
    suite.bound(instance, std::abs(mu.trace_sum()) / scale, 1e-10, "relative trace imbalance");
    double worst = 0;
    for (Index v = 0; v < g.num_vertices(); ++v) {
      double expected = 0;
      for (const auto& inc : g.incidences_of(v)) expected -= s.map(inc).squaredNorm();
      worst = std::max(worst, std::abs(mu.vertex[static_cast<std::size_t>(v)].trace() - expected) / scale);
    }
    for (Index e = 0; e < g.num_edges(); ++e) {
      const double expected = s.map(e, 0).squaredNorm() + s.map(e, 1).squaredNorm();
      worst = std::max(worst, std::abs(mu.edge[static_cast<std::size_t>(e)].trace() - expected) / scale);
    }
    suite.bound(instance, worst, 1e-12, "per-object trace identity");
  }
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  for (Index k = 0; k < 50; ++k, ++instance) {
    const Graph g = random_connected_graph(uniform_index(rng, 2, 8), 0.4, rng);
    const Index d = uniform_index(rng, 1, 3);
    std::vector<MatrixXd> maps;
    double norm = 0;
    for (Index j = 0; j < 2 * g.num_edges(); ++j) {
      maps.push_back(scale(rng) * random_orthogonal(d, rng));
      norm += maps.back().squaredNorm();
    }
    const CellularSheaf<double> s(g, DimensionVector::uniform(g, d, d), std::move(maps));
    suite.bound(instance, std::sqrt(cent_mm(s)) / norm, 1e-12, "CentMM of scaled orthogonal maps");
  }
  {
    const Graph g({"u", "v"}, {{"u", "v"}});
    CellularSheaf<double> s(g, DimensionVector::uniform(g, 2, 2));
    MatrixXd a(2, 2);
    a << 1, 2, 0, 1;
    s.set_map(0, 0, a);
    suite.bound(instance, std::abs(cent_mm(s) - 32.0) / 32.0, 1e-12, "worked example CentMM vs 32");
    ++instance;
  }
  suite.report.instances = instance;
  return suite.report;
}

PropertyReport stability_wall(std::uint64_t seed) {
  Suite suite("stability_wall", 1e-12);
  Rng rng(seed);
  Index instance = 0;
  for (; instance < 10; ++instance) {
    const Graph g = random_connected_graph(uniform_index(rng, 2, 8), 0.3, rng);
    const Index d = uniform_index(rng, 1, 3);
    const auto w = stability_wall_diagnostic(DimensionVector::uniform(g, d, d), 100, rng());
    suite.check(instance, w.uniform && w.draws == 100, "uniform dims not recognized");
    suite.bound(instance, w.max_abs_trivial_weight, 1e-12, "|theta(F_triv)| on uniform dims");
  }
  for (Index k = 0; k < 10; ++k, ++instance) {
    const Graph g = random_connected_graph(uniform_index(rng, 2, 8), 0.3, rng);
    const auto dims = k == 0 ? DimensionVector::uniform(g, 3, 2) : random_dims(g, 3, rng);
    if (dims.is_uniform()) continue;
    const auto w = stability_wall_diagnostic(dims);
    if (!w.escape_theta) {
      suite.fail(instance, "no escape theta for non-uniform dims");
      continue;
    }
    suite.check(instance, w.escape_theta->admissible(), "escape theta is not admissible");
    suite.check(instance, w.escape_weight <= -0.5, "escape weight " + std::to_string(w.escape_weight) + " > -0.5");
  }
  suite.report.instances = instance;
  return suite.report;
}

PropertyReport theta_projection(std::uint64_t seed) {
  Suite suite("theta_projection", 1e-12);
  Rng rng(seed);
  for (Index i = 0; i < 10000; ++i) {
    const Graph g = random_connected_graph(uniform_index(rng, 2, 8), 0.3, rng);
    const auto dims = random_dims(g, 3, rng);
    const VectorXd raw = random_gaussian(dims.num_objects(), 1, rng);
    const auto theta = project_theta(raw, dims);
    suite.bound(i, std::abs(theta.pairing()), 1e-12, "|theta . d|");
    const auto again = project_theta(theta.values(), dims);
    const double drift = (again.values() - theta.values()).norm();
    if (!(drift <= 1e-14)) suite.fail(i, "projection is not idempotent: drift " + std::to_string(drift));
  }
  suite.report.instances = 10000;
  return suite.report;
}

PropertyReport diffusion_limit(std::uint64_t seed) {
  Suite suite("diffusion_limit", 1.0 + 1e-6);
  Rng rng(seed);
  for (Index i = 0; i < 50; ++i) {
    const Graph g = random_connected_graph(uniform_index(rng, 2, 8), 0.3, rng);
    CellularSheaf<double> s;
    switch (i % 3) {
      case 0: s = CellularSheaf<double>::identity(g, uniform_index(rng, 1, 3)); break;
      case 1:
        s = direct_sum(CellularSheaf<double>::identity(g, 1), random_sheaf(g, DimensionVector::uniform(g, 2, 2), rng));
        break;
      default: s = random_sheaf(g, random_dims(g, 3, rng), rng); break;
    }
    const MatrixXd x0 = random_gaussian(s.dims().total_vertex(), uniform_index(rng, 1, 3), rng);
    const SpectralFlow<double> flow(s);
    const double lam = flow.smallest_positive();
    const MatrixXd limit = harmonic_projection(kernel_basis(s), x0);
    for (double t : {0.1, 1.0, 5.0}) {
      const double tt = lam > 0 ? t / lam : t;
      const double gap = (flow(x0, tt) - limit).norm();
      const double bound = std::exp(-tt * lam) * x0.norm();
      // Ratio to the bound; ≤ 1 + 1e-6 passes.
      suite.bound(i, gap / bound, 1.0 + 1e-6, "distance to the harmonic limit over e^{-t lambda+}|x0|");
    }
    DiffusionConfig config;
    config.layers = 30;
    const auto euler = euler_diffuse(s, x0, config);
    const double e0 = euler.energy.front().second;
    for (std::size_t k = 1; k < euler.energy.size(); ++k)
      if (euler.energy[k].second > euler.energy[k - 1].second + 1e-12 * e0) {
        suite.fail(i, "euler energy increased at step " + std::to_string(euler.energy[k].first));
        break;
      }
    suite.check(i, !euler.nonfinite_at, "euler run went non-finite");
  }
  suite.report.instances = 50;
  return suite.report;
}

using SuiteFn = PropertyReport (*)(std::uint64_t);

const std::map<std::string, SuiteFn>& registry() {
  static const std::map<std::string, SuiteFn> suites{
      {"kernel_decomposition", kernel_decomposition}, {"harmonic_injection", harmonic_injection},
      {"trivial_line_collapse", trivial_line_collapse}, {"moment_identities", moment_identities},
      {"stability_wall", stability_wall},                {"theta_projection", theta_projection},
      {"diffusion_limit", diffusion_limit}};
  return suites;
}

}  // namespace

Json PropertyReport::to_json() const {
  return Json{{"property", property},   {"instances", instances}, {"failures", failures},
              {"max_residual", max_residual}, {"threshold", threshold}, {"passed", passed()},
              {"seconds", seconds}};
}

const std::vector<std::string>& property_names() {
  static const std::vector<std::string> names{"kernel_decomposition", "harmonic_injection", "trivial_line_collapse",
                                              "moment_identities",    "stability_wall",     "theta_projection",
                                              "diffusion_limit"};
  return names;
}

PropertyReport run_property(const std::string& name, std::uint64_t seed) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw PreconditionError("unknown property suite '" + name + "'");
  const auto start = std::chrono::steady_clock::now();
  PropertyReport r;
  try {
    r = it->second(seed);
  } catch (const std::exception& ex) {
    r.property = name;
    r.failures.push_back(std::string("aborted: ") + ex.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<PropertyReport> run_all_properties(std::uint64_t seed) {
  std::vector<PropertyReport> out;
  for (const auto& name : property_names()) out.push_back(run_property(name, seed));
  return out;
}

}  // namespace sheafq
