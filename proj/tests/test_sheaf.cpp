#include "doctest.h"

#include "sheafq/harmonic.hpp"
#include "sheafq/random.hpp"
#include "sheafq/subrep.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

using namespace sheafq;

namespace {

CellularSheaf<double> scalar_edge(double a, double b) {
  const Graph g({"u", "v"}, {{"u", "v"}});
  CellularSheaf<double> s(g, DimensionVector::uniform(g, 1, 1));
  s.set_map(0, 0, MatrixXd::Constant(1, 1, a));
  s.set_map(0, 1, MatrixXd::Constant(1, 1, b));
  return s;
}

// Entry-by-entry Laplacian: Δ_vv = Σ AᵀA, Δ_uv = −A_uᵀA_v.
MatrixXd blockwise_laplacian(const CellularSheaf<double>& s) {
  const auto& g = s.graph();
  const auto& d = s.dims();
  MatrixXd lap = MatrixXd::Zero(d.total_vertex(), d.total_vertex());
  for (Index e = 0; e < g.num_edges(); ++e) {
    const Index u = g.edge(e).u, v = g.edge(e).v;
    const MatrixXd& au = s.map(e, 0);
    const MatrixXd& av = s.map(e, 1);
    lap.block(d.vertex_offset(u), d.vertex_offset(u), d.vertex(u), d.vertex(u)) += au.transpose() * au;
    lap.block(d.vertex_offset(v), d.vertex_offset(v), d.vertex(v), d.vertex(v)) += av.transpose() * av;
    lap.block(d.vertex_offset(u), d.vertex_offset(v), d.vertex(u), d.vertex(v)) -= au.transpose() * av;
    lap.block(d.vertex_offset(v), d.vertex_offset(u), d.vertex(v), d.vertex(u)) -= av.transpose() * au;
  }
  return lap;
}

}  // namespace

TEST_CASE("coboundary examples") {
  SUBCASE("single edge, A_u = 2, A_v = 3, x = (1,1)") {
    const auto s = scalar_edge(2.0, 3.0);
    const VectorXd x = VectorXd::Ones(2);
    CHECK((coboundary_matrix(s) * x)(0) == doctest::Approx(1.0));
    CHECK(apply_coboundary(s, x)(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("identity maps annihilate per-coordinate constants") {
    Rng rng(2);
    const Graph g = random_connected_graph(6, 0.3, rng);
    const auto s = CellularSheaf<double>::identity(g, 3);
    VectorXd x(s.dims().total_vertex());
    for (Index v = 0; v < 6; ++v) x.segment(3 * v, 3) << 1.5, -2.0, 0.25;
    CHECK((coboundary_matrix(s) * x).norm() == 0.0);
  }
  SUBCASE("swapping the stored endpoint order flips the sign") {
    const Graph ab({"a", "b"}, {{"a", "b"}});
    const Graph ba({"b", "a"}, {{"a", "b"}});
    CellularSheaf<double> s1(ab, DimensionVector::uniform(ab, 1, 1));
    s1.set_map(0, 0, MatrixXd::Constant(1, 1, 2.0));  // a
    s1.set_map(0, 1, MatrixXd::Constant(1, 1, 3.0));  // b
    CellularSheaf<double> s2(ba, DimensionVector::uniform(ba, 1, 1));
    s2.set_map(0, 0, MatrixXd::Constant(1, 1, 3.0));  // b
    s2.set_map(0, 1, MatrixXd::Constant(1, 1, 2.0));  // a
    VectorXd x1(2), x2(2);
    x1 << 0.7, -1.1;  // (a, b)
    x2 << -1.1, 0.7;  // (b, a)
    CHECK((coboundary_matrix(s1) * x1)(0) == doctest::Approx(-(coboundary_matrix(s2) * x2)(0)));
  }
  SUBCASE("blockwise application matches the dense operator") {
    Rng rng(4);
    const Graph g = random_connected_graph(7, 0.3, rng);
    const auto s = random_sheaf(g, random_dims(g, 3, rng), rng);
    const MatrixXd x = random_gaussian(s.dims().total_vertex(), 4, rng);
    const MatrixXd y = random_gaussian(s.dims().total_edge(), 4, rng);
    const MatrixXd d = coboundary_matrix(s);
    CHECK((apply_coboundary(s, x) - d * x).norm() <= 1e-12 * (d * x).norm());
    CHECK((apply_coboundary_transpose(s, y) - d.transpose() * y).norm() <= 1e-12 * (d.transpose() * y).norm());
  }
}

TEST_CASE("sheaf laplacian examples") {
  SUBCASE("unit maps recover the graph Laplacian") {
    MatrixXd expected(2, 2);
    expected << 1, -1, -1, 1;
    CHECK((sheaf_laplacian(scalar_edge(1, 1)) - expected).norm() == 0.0);
  }
  SUBCASE("scalars a, b give [[a², −ab], [−ab, b²]]") {
    const double a = 1.7, b = -0.4;
    MatrixXd expected(2, 2);
    expected << a * a, -a * b, -a * b, b * b;
    CHECK((sheaf_laplacian(scalar_edge(a, b)) - expected).norm() <= 1e-15);
  }
  SUBCASE("random 5-node sheaves are symmetric PSD and match blockwise assembly") {
    Rng rng(9);
    for (int trial = 0; trial < 25; ++trial) {
      const Graph g = random_connected_graph(5, 0.5, rng);
      const auto s = random_sheaf(g, random_dims(g, 3, rng), rng);
      const MatrixXd lap = sheaf_laplacian(s);
      CHECK((lap - lap.transpose()).norm() == 0.0);
      CHECK((lap - blockwise_laplacian(s)).norm() <= 1e-12 * lap.norm());
      const double min_eig =
          Eigen::SelfAdjointEigenSolver<MatrixXd>(lap, Eigen::EigenvaluesOnly).eigenvalues()(0);
      CHECK(min_eig >= -1e-10);
    }
  }
}

TEST_CASE("ker Δ equals ker δ") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const Graph g = random_connected_graph(8, 0.2, rng);
    // Mix a sheaf with sections and one without so kernels are nontrivial.
    const auto s = direct_sum(CellularSheaf<double>::identity(g, 1),
                              random_sheaf(g, random_dims(g, 3, rng), rng));
    if (s.dims().total_vertex() > 60) continue;
    const auto k_delta = nullspace(coboundary_matrix(s), 1e-10);
    // Eigen-route oracle on Δ; λ = σ², so the cutoff squares.
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(blockwise_laplacian(s));
    const double lmax = es.eigenvalues().maxCoeff();
    Index h = 0;
    while (h < es.eigenvalues().size() && es.eigenvalues()(h) <= 1e-12 * lmax) ++h;
    const MatrixXd k_lap = es.eigenvectors().leftCols(h);
    REQUIRE(k_delta.basis.cols() == h);
    CHECK(max_principal_angle(k_delta.basis, k_lap) < 1e-8);
  }
}

TEST_CASE("dirichlet energy") {
  SUBCASE("trivial-line signals collapse to the scalar edge formula") {
    Rng rng(8);
    const Graph g = random_connected_graph(6, 0.4, rng);
    const auto dims = DimensionVector::uniform(g, 3, 2);
    std::vector<VectorXd> wv, we;
    for (Index v = 0; v < 6; ++v) wv.push_back(random_gaussian(3, 1, rng));
    for (Index e = 0; e < g.num_edges(); ++e) we.push_back(random_gaussian(2, 1, rng));
    std::vector<MatrixXd> maps;
    for (Index e = 0; e < g.num_edges(); ++e)
      for (int side = 0; side < 2; ++side) {
        const VectorXd& w = wv[static_cast<std::size_t>(g.endpoint(e, side))];
        // A w_v = w_e, with arbitrary action on w_v's complement.
        const MatrixXd comp = MatrixXd::Identity(3, 3) - w * w.transpose() / w.squaredNorm();
        maps.push_back(we[static_cast<std::size_t>(e)] * w.transpose() / w.squaredNorm() +
                       random_gaussian(2, 3, rng) * comp);
      }
    const CellularSheaf<double> s(g, dims, maps);
    const VectorXd c = random_gaussian(6, 1, rng);
    VectorXd x(18);
    for (Index v = 0; v < 6; ++v) x.segment(3 * v, 3) = c(v) * wv[static_cast<std::size_t>(v)];
    double expected = 0;
    for (Index e = 0; e < g.num_edges(); ++e) {
      const double diff = c(g.edge(e).v) - c(g.edge(e).u);
      expected += diff * diff * we[static_cast<std::size_t>(e)].squaredNorm();
    }
    CHECK(dirichlet_energy(s, x) == doctest::Approx(expected).epsilon(1e-10));
  }
  SUBCASE("global sections have zero energy") {
    Rng rng(10);
    const Graph g = random_connected_graph(5, 0.5, rng);
    const auto s = CellularSheaf<double>::identity(g, 2);
    const auto h = kernel_basis(s);
    CHECK(dirichlet_energy(s, h.basis) <= 1e-24);
  }
  SUBCASE("agrees with xᵀΔx") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
      const Graph g = random_connected_graph(7, 0.3, rng);
      const auto s = random_sheaf(g, random_dims(g, 3, rng), rng);
      const VectorXd x = random_gaussian(s.dims().total_vertex(), 1, rng);
      const double quad = x.dot(blockwise_laplacian(s) * x);
      CHECK(std::abs(dirichlet_energy(s, x) - quad) <= 1e-12 * std::max(1.0, quad));
    }
  }
}

TEST_CASE("direct sums") {
  const Graph path = Graph::from_indices(3, {{0, 1}, {1, 2}});
  Rng rng(13);
  SUBCASE("dimensions add") {
    const CellularSheaf<double> f(path, DimensionVector::uniform(path, 2, 2));
    const CellularSheaf<double> g(path, DimensionVector::uniform(path, 1, 1));
    const auto s = direct_sum(f, g);
    for (Index i = 0; i < s.dims().num_objects(); ++i) CHECK(s.dims().object(i) == 3);
  }
  SUBCASE("a zero-map companion adds |V| sections") {
    const auto f = random_sheaf(path, random_dims(path, 3, rng), rng);
    const CellularSheaf<double> zero(path, DimensionVector::uniform(path, 1, 1));
    CHECK(kernel_basis(direct_sum(f, zero)).dimension() == kernel_basis(f).dimension() + 3);
  }
  SUBCASE("permuted Laplacian is block diagonal") {
    const auto f = random_sheaf(path, random_dims(path, 3, rng), rng);
    const auto g = random_sheaf(path, random_dims(path, 2, rng), rng);
    const MatrixXd ls = sheaf_laplacian(direct_sum(f, g));
    const auto perm = direct_sum_permutation(f, g);
    // Explicit permutation matrix P with P e_k = e_{perm[k]}.
    const Index n = ls.rows();
    MatrixXd p = MatrixXd::Zero(n, n);
    for (Index k = 0; k < n; ++k) p(perm[static_cast<std::size_t>(k)], k) = 1.0;
    const MatrixXd blocks = p.transpose() * ls * p;
    const Index nf = f.dims().total_vertex();
    MatrixXd expected = MatrixXd::Zero(n, n);
    expected.topLeftCorner(nf, nf) = sheaf_laplacian(f);
    expected.bottomRightCorner(n - nf, n - nf) = sheaf_laplacian(g);
    CHECK((blocks - expected).norm() <= 1e-12 * expected.norm());
  }
  SUBCASE("graph mismatch") {
    const Graph other = Graph::from_indices(3, {{0, 1}});
    CHECK_THROWS_AS(direct_sum(CellularSheaf<double>::identity(path, 1),
                               CellularSheaf<double>::identity(other, 1)),
                    StructuralError);
  }
}

TEST_CASE("verify_subrepresentation") {
  Rng rng(14);
  const Graph g = random_connected_graph(5, 0.4, rng);
  const auto id = CellularSheaf<double>::identity(g, 3);
  SUBCASE("full space") {
    const auto s = random_sheaf(g, random_dims(g, 3, rng), rng);
    CHECK(verify_subrepresentation(s, Subrepresentation<double>::full(s.dims())).certified);
  }
  SUBCASE("first axis is invariant under identity maps") {
    CHECK(verify_subrepresentation(id, Subrepresentation<double>::coordinate(id.dims(), 1)).certified);
  }
  SUBCASE("e1 into e2 is rejected") {
    auto sub = Subrepresentation<double>::coordinate(id.dims(), 1);
    for (auto& w : sub.edge) w = MatrixXd::Identity(3, 3).col(1);
    const auto r = verify_subrepresentation(id, sub);
    CHECK_FALSE(r.certified);
    CHECK(r.worst_residual == doctest::Approx(1.0));
    CHECK(r.worst_incidence >= 0);
    CHECK(!r.message.empty());
  }
  SUBCASE("rank-deficient basis") {
    auto sub = Subrepresentation<double>::coordinate(id.dims(), 2);
    sub.vertex[0].col(1) = sub.vertex[0].col(0);
    CHECK_THROWS_AS(verify_subrepresentation(id, sub), StructuralError);
  }
}

TEST_CASE("find_trivial_lines") {
  Rng rng(15);
  // Dense graph: 4|E| equations against 3|V| + 2|E| unknowns, and no leaves
  // (a leaf vertex always has a partial solution in ker A).
  const Graph g = random_connected_graph(6, 1.0, rng);
  SUBCASE("identity sheaf: solution space has dimension d") {
    for (Index d = 1; d <= 3; ++d) CHECK(find_trivial_lines(CellularSheaf<double>::identity(g, d)).dimension() == d);
  }
  SUBCASE("generic rectangular sheaf has none") {
    const auto s = random_sheaf(g, DimensionVector::uniform(g, 3, 2), rng);
    CHECK(find_trivial_lines(s).empty());
    // Oracle: the constraint system has full column rank.
    const Index n0 = s.dims().total_vertex(), n1 = s.dims().total_edge();
    MatrixXd sys = MatrixXd::Zero(2 * n1, n0 + n1);
    for (Index e = 0; e < g.num_edges(); ++e)
      for (int side = 0; side < 2; ++side) {
        const Index r = 2 * 2 * e + 2 * side;
        sys.block(r, 3 * g.endpoint(e, side), 2, 3) = s.map(e, side);
        sys.block(r, n0 + 2 * e, 2, 2) = -MatrixXd::Identity(2, 2);
      }
    CHECK(Eigen::FullPivLU<MatrixXd>(sys).rank() == n0 + n1);
  }
  SUBCASE("planted line is recovered") {
    const auto dims = DimensionVector::uniform(g, 3, 2);
    VectorXd planted(dims.total_vertex() + dims.total_edge());
    std::vector<VectorXd> wv, we;
    for (Index v = 0; v < g.num_vertices(); ++v) {
      wv.push_back(random_gaussian(3, 1, rng).normalized());
      planted.segment(dims.vertex_offset(v), 3) = wv.back();
    }
    for (Index e = 0; e < g.num_edges(); ++e) {
      we.push_back(random_gaussian(2, 1, rng).normalized());
      planted.segment(dims.total_vertex() + dims.edge_offset(e), 2) = we.back();
    }
    std::vector<MatrixXd> maps;
    for (Index e = 0; e < g.num_edges(); ++e)
      for (int side = 0; side < 2; ++side) {
        const VectorXd& w = wv[static_cast<std::size_t>(g.endpoint(e, side))];
        maps.push_back(we[static_cast<std::size_t>(e)] * w.transpose() +
                       random_gaussian(2, 3, rng) * (MatrixXd::Identity(3, 3) - w * w.transpose()));
      }
    const CellularSheaf<double> s(g, dims, maps);
    const auto lines = find_trivial_lines(s);
    REQUIRE(lines.dimension() == 1);
    const MatrixXd p = planted.normalized();
    CHECK(max_principal_angle(MatrixXd(lines.basis), p) <= 1e-8);
    CHECK(lines.degenerate_objects[0].empty());
    // Every nondegenerate line is a certified subrepresentation.
    CHECK(verify_subrepresentation(s, line_subrepresentation(s, VectorXd(lines.basis.col(0)))).certified);
  }
  SUBCASE("degenerate blocks are reported") {
    // Zero maps into an edge force w_e = 0 there, vertices are free.
    CellularSheaf<double> s(g, DimensionVector::uniform(g, 1, 1));
    const auto lines = find_trivial_lines(s);
    CHECK(lines.dimension() == g.num_vertices());
    CHECK(lines.always_zero_objects.size() == static_cast<std::size_t>(g.num_edges()));
    CHECK_THROWS_AS(line_subrepresentation(s, VectorXd(lines.basis.col(0))), PreconditionError);
  }
}

TEST_CASE("sheaf construction errors") {
  const Graph g({"u", "v"}, {{"u", "v"}});
  CHECK_THROWS_AS(CellularSheaf<double>(g, DimensionVector::uniform(g, 2, 2), {MatrixXd::Zero(2, 2)}),
                  StructuralError);
  CellularSheaf<double> s(g, DimensionVector::uniform(g, 2, 2));
  CHECK_THROWS_AS(s.set_map(0, 0, MatrixXd::Zero(2, 3)), StructuralError);
  MatrixXd nan = MatrixXd::Zero(2, 2);
  nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(s.set_map(0, 0, nan), NumericError);
}
