#include "doctest.h"

#include "sheafq/diffusion.hpp"
#include "sheafq/random.hpp"

#include <cmath>

using namespace sheafq;

namespace {

// d=1 signed sheaf: +1 maps inside blocks, a sign flip across blocks.
CellularSheaf<double> signed_two_block(const Graph& g, const std::vector<int>& block) {
  auto s = CellularSheaf<double>::identity(g, 1);
  for (Index e = 0; e < g.num_edges(); ++e)
    if (block[static_cast<std::size_t>(g.edge(e).u)] != block[static_cast<std::size_t>(g.edge(e).v)])
      s.set_map(e, 1, MatrixXd::Constant(1, 1, -1.0));
  return s;
}

}  // namespace

TEST_CASE("spectral_diffuse") {
  Rng rng(1);
  const Graph g = random_connected_graph(7, 0.4, rng);
  SUBCASE("t = 0 returns the input exactly") {
    const auto s = random_sheaf(g, random_dims(g, 3, rng), rng);
    const MatrixXd x = random_gaussian(s.dims().total_vertex(), 2, rng);
    CHECK((spectral_diffuse(s, x, 0.0) - x).norm() == 0.0);
  }
  SUBCASE("long time converges to the harmonic projection") {
    const auto s = direct_sum(CellularSheaf<double>::identity(g, 1),
                              random_sheaf(g, DimensionVector::uniform(g, 2, 2), rng));
    const VectorXd x = random_gaussian(s.dims().total_vertex(), 1, rng);
    const MatrixXd lim = harmonic_projection(kernel_basis(s), x);
    CHECK((spectral_diffuse(s, x, 1e6) - lim).norm() <= 1e-8);
  }
  SUBCASE("identity d=1 reaches the graph mean") {
    const auto s = CellularSheaf<double>::identity(g, 1);
    const VectorXd x = random_gaussian(7, 1, rng);
    const VectorXd y = spectral_diffuse(s, x, 1e4);
    for (Index i = 0; i < 7; ++i) CHECK(y(i) == doctest::Approx(x.mean()).epsilon(1e-10));
  }
  SUBCASE("semigroup property") {
    const auto s = random_sheaf(g, random_dims(g, 2, rng), rng);
    const SpectralFlow<double> flow(s);
    const VectorXd x = random_gaussian(s.dims().total_vertex(), 1, rng);
    const VectorXd direct = flow(x, 0.7);
    const VectorXd composed = flow(flow(x, 0.3), 0.4);
    CHECK((direct - composed).norm() <= 1e-10);
  }
  SUBCASE("energy is nonincreasing along the flow") {
    const auto s = random_sheaf(g, random_dims(g, 3, rng), rng);
    const SpectralFlow<double> flow(s);
    const VectorXd x = random_gaussian(s.dims().total_vertex(), 1, rng);
    double prev = dirichlet_energy(s, x);
    for (double t = 0.05; t < 3.0; t += 0.05) {
      const double e = dirichlet_energy(s, flow(x, t));
      CHECK(e <= prev + 1e-10);
      prev = e;
    }
  }
  SUBCASE("exponential approach to the limit") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto s = direct_sum(CellularSheaf<double>::identity(g, 1),
                                random_sheaf(g, random_dims(g, 2, rng), rng));
      const SpectralFlow<double> flow(s);
      const double lplus = flow.smallest_positive();
      const VectorXd x = random_gaussian(s.dims().total_vertex(), 1, rng);
      const VectorXd lim = harmonic_projection(kernel_basis(s), x);
      for (double t : {0.1, 1.0, 5.0}) {
        CHECK((flow(x, t) - lim).norm() <= std::exp(-t * lplus) * x.norm() * (1 + 1e-6));
      }
    }
  }
  SUBCASE("negative time is rejected") {
    const auto s = CellularSheaf<double>::identity(g, 1);
    CHECK_THROWS_AS(spectral_diffuse(s, VectorXd::Ones(7), -1.0), StructuralError);
  }
}

TEST_CASE("euler_diffuse") {
  Rng rng(2);
  const Graph g = random_connected_graph(8, 0.3, rng);
  const auto s = random_sheaf(g, random_dims(g, 3, rng), rng);
  const VectorXd x = random_gaussian(s.dims().total_vertex(), 1, rng);
  const double lmax = laplacian_lambda_max(s);

  SUBCASE("default step is 1/lambda_max and energy is monotone") {
    DiffusionConfig cfg;
    cfg.layers = 50;
    const auto r = euler_diffuse(s, x, cfg);
    CHECK(r.step_size == doctest::Approx(1.0 / lmax));
    CHECK(r.stable_step);
    REQUIRE(r.energy.size() == 51);
    for (std::size_t k = 1; k < r.energy.size(); ++k)
      CHECK(r.energy[k].second <= r.energy[k - 1].second * (1 + 1e-12) + 1e-14);
  }
  SUBCASE("alpha = 3/lambda_max diverges") {
    DiffusionConfig cfg;
    cfg.layers = 60;
    cfg.step_size = 3.0 / lmax;
    const auto r = euler_diffuse(s, x, cfg);
    CHECK_FALSE(r.stable_step);
    CHECK(r.energy.back().second > 1e6 * r.energy.front().second);
  }
  SUBCASE("huge steps overflow and are reported, not thrown") {
    DiffusionConfig cfg;
    cfg.layers = 200;
    cfg.step_size = 1e6 / lmax;
    const auto r = euler_diffuse(s, x, cfg);
    REQUIRE(r.nonfinite_at.has_value());
    CHECK(*r.nonfinite_at <= 200);
    CHECK(r.energy.back().first < *r.nonfinite_at);
  }
  SUBCASE("first-order agreement with the exact flow") {
    const double t = 2.0 / lmax;
    const VectorXd exact = spectral_diffuse(s, x, t);
    const auto err = [&](Index steps) {
      DiffusionConfig cfg;
      cfg.layers = steps;
      cfg.step_size = t / static_cast<double>(steps);
      cfg.energy_trace = false;
      return (euler_diffuse(s, x, cfg).state - exact).norm();
    };
    const double e1 = err(40), e2 = err(80);
    CHECK(e2 < e1);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.1));
  }
  SUBCASE("stability boundary at alpha * lambda_max = 2") {
    // Diagonalized sheaf: one mode per vertex pair, Δ has eigenvalues {0, 2a²}.
    const Graph pair({"u", "v"}, {{"u", "v"}});
    auto d = CellularSheaf<double>::identity(pair, 1);
    d.set_map(0, 0, MatrixXd::Constant(1, 1, 1.5));
    d.set_map(0, 1, MatrixXd::Constant(1, 1, 1.5));
    VectorXd x0(2);
    x0 << 1.0, -1.0;
    const double lm = laplacian_lambda_max(d);
    for (double factor : {1.9, 2.1}) {
      DiffusionConfig cfg;
      cfg.layers = 200;
      cfg.step_size = factor / lm;
      const auto r = euler_diffuse(d, x0, cfg);
      if (factor < 2) {
        CHECK(r.converged);
      } else {
        CHECK(r.energy.back().second > r.energy.front().second);
      }
    }
  }
  SUBCASE("invalid config") {
    DiffusionConfig cfg;
    cfg.layers = 0;
    CHECK_THROWS_AS(euler_diffuse(s, x, cfg), StructuralError);
  }
}

TEST_CASE("oversmoothing_probe") {
  Rng rng(3);
  const Graph g = random_connected_graph(10, 0.3, rng);
  SUBCASE("identity sheaf limit is the constant projection") {
    const auto s = CellularSheaf<double>::identity(g, 2);
    const auto r = oversmoothing_probe(s, random_gaussian(20, 1, rng));
    CHECK(r.h == 2);
    CHECK(r.residual_to_constant <= 1e-8);
    CHECK(r.residual_to_trivial_line <= 1e-8);
    CHECK(r.has_trivial_line);
  }
  SUBCASE("generic rectangular sheaf: sections vanish") {
    const auto s = random_sheaf(g, DimensionVector::uniform(g, 3, 2), rng);
    const auto r = oversmoothing_probe(s, random_gaussian(30, 1, rng));
    CHECK(r.h == 0);
    CHECK(r.sections_vanish);
    CHECK(r.limit.norm() <= 1e-12);
  }
  SUBCASE("signed two-block sheaf keeps the community indicator") {
    std::vector<int> block(10);
    for (Index v = 0; v < 10; ++v) block[static_cast<std::size_t>(v)] = v < 5 ? 0 : 1;
    const auto s = signed_two_block(g, block);
    VectorXd indicator(10);
    for (Index v = 0; v < 10; ++v) indicator(v) = block[static_cast<std::size_t>(v)] ? -1.0 : 1.0;
    // Oracle: the signed indicator is a section.
    CHECK(apply_laplacian(s, indicator).norm() <= 1e-12);
    const VectorXd x = indicator + 0.1 * random_gaussian(10, 1, rng);
    const auto r = oversmoothing_probe(s, x);
    CHECK(r.h == 1);
    CHECK(std::abs(r.limit.col(0).normalized().dot(indicator.normalized())) == doctest::Approx(1.0));
    CHECK(r.residual_to_constant > 0.5);
  }
}
