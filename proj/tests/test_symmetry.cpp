#include <doctest.h>

#include <cmath>
#include <random>

#include "cotandet/laplacian.hpp"
#include "cotandet/symmetry.hpp"
#include "oracles.hpp"

using namespace cotandet;

namespace {

const double kW = 2.0 / std::sqrt(3.0);

const CanonicalMesh kStronglySymmetric[] = {CanonicalMesh::tetrahedron, CanonicalMesh::csaszar_k7,
                                            CanonicalMesh::octahedron, CanonicalMesh::torus_9,
                                            CanonicalMesh::icosahedron};

// Delta_0 + delta I at the unit uniform metric.
Eigen::MatrixXd shifted_laplacian(const Triangulation& t, double delta) {
  const auto l = assemble(t, uniform_metric(t, 1.0), LaplaceKind::cotan).entries;
  return l + delta * Eigen::MatrixXd::Identity(l.rows(), l.cols());
}

}  // namespace

TEST_CASE("distance matrix agrees with Floyd-Warshall") {
  for (auto name : all_canonical_meshes()) {
    const auto t = build_canonical(name);
    const auto d = distance_matrix(t);
    const auto fw = oracle::floyd_warshall(t);
    for (int i = 0; i < t.vertex_count(); ++i)
      for (int j = 0; j < t.vertex_count(); ++j) CHECK(d(i, j) == fw[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  }
  const auto tet = distance_matrix(build_canonical(CanonicalMesh::tetrahedron));
  CHECK(tet.maxCoeff() == 1);
  CHECK(tet.diagonal().cwiseAbs().maxCoeff() == 0);

  const auto oct = distance_matrix(build_canonical(CanonicalMesh::octahedron));
  CHECK(oct.maxCoeff() == 2);
  CHECK((oct.array() == 2).count() == 6);
  CHECK(distance_matrix(build_canonical(CanonicalMesh::torus_9)).maxCoeff() == 2);
  CHECK(distance_matrix(build_canonical(CanonicalMesh::icosahedron)).maxCoeff() == 3);
}

TEST_CASE("distance matrix rejects a disconnected graph") {
  std::vector<Triangle> tris = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}, {4, 5, 6}, {4, 5, 7}, {4, 6, 7}, {5, 6, 7}};
  const auto two = Triangulation::from_triangles(8, tris);
  CHECK_THROWS_AS(distance_matrix(two), GraphError);
  CHECK_THROWS_AS(symmetry_profile(two), GraphError);
}

TEST_CASE("octahedron alpha profile") {
  const auto p = symmetry_profile(build_canonical(CanonicalMesh::octahedron));
  CHECK(p.is_strongly_symmetric);
  CHECK_FALSE(p.witness.has_value());
  CHECK(p.diameter == 2);
  CHECK(p.degree == 4);
  CHECK(p.alpha(1, 0) == 4);
  CHECK(p.alpha(0, 0) == 0);
  CHECK(p.alpha(0, 1) == 1);
  CHECK(p.alpha(1, 1) == 2);
  CHECK(p.alpha(2, 1) == 1);
  CHECK(p.alpha(1, 2) == 4);
  CHECK(p.alpha(2, 2) == 0);
  CHECK(p.alpha(3, 2) == 0);
}

TEST_CASE("strongly symmetric profiles satisfy the structural identities") {
  for (auto name : kStronglySymmetric) {
    CAPTURE(to_string(name));
    const auto t = build_canonical(name);
    const auto p = symmetry_profile(t);
    REQUIRE(p.is_strongly_symmetric);
    REQUIRE(p.degree.has_value());
    CHECK(p.alpha(1, 0) == *p.degree);
    for (int v = 0; v < t.vertex_count(); ++v) CHECK(static_cast<int>(t.degree(v)) == *p.degree);
    for (int l = 0; l <= p.diameter; ++l)
      for (int s = 0; s <= p.diameter; ++s)
        if (std::abs(s - l) >= 2) CHECK(p.alpha(s, l) == 0);
    const int L = p.diameter;
    CHECK(p.alpha(L + 1, L) == 0);
    CHECK(p.alpha(L, L) == *p.degree - p.alpha(L - 1, L));
  }
  CHECK(symmetry_profile(build_canonical(CanonicalMesh::tetrahedron)).diameter == 1);
  CHECK(symmetry_profile(build_canonical(CanonicalMesh::csaszar_k7)).diameter == 1);
}

TEST_CASE("bipyramid is not strongly symmetric") {
  const auto t = build_canonical(CanonicalMesh::triangular_bipyramid);
  const auto p = symmetry_profile(t);
  CHECK_FALSE(p.is_strongly_symmetric);
  CHECK_FALSE(p.degree.has_value());
  REQUIRE(p.witness.has_value());
  const auto& w = *p.witness;
  CHECK(w.first_count != w.second_count);
  CHECK(p.distances(w.first.first, w.first.second) == w.distance);
  CHECK(p.distances(w.second.first, w.second.second) == w.distance);
  // Recount the witness directly.
  auto count = [&](std::pair<int, int> pair) {
    int c = 0;
    for (int k : t.adjacency()[static_cast<std::size_t>(pair.first)])
      if (p.distances(k, pair.second) == w.s) ++c;
    return c;
  };
  CHECK(count(w.first) == w.first_count);
  CHECK(count(w.second) == w.second_count);
  // The degree class alpha_1(0) already splits: apexes 3, equator 4.
  CHECK_THROWS_AS(p.alpha(1, 0), GraphError);
  CHECK_THROWS_AS(recursion_inverse(p, 5.0, 1.0), GraphError);
}

TEST_CASE("path counts") {
  const auto tet = build_canonical(CanonicalMesh::tetrahedron);
  CHECK(path_count(tet, 2, 0, 1) == 2);
  CHECK(path_count(tet, 2, 0, 0) == 3);
  CHECK(path_count(tet, 0, 1, 1) == 1);
  CHECK_THROWS_AS(path_count(tet, 1, 0, 4), std::out_of_range);

  for (auto name : all_canonical_meshes()) {
    const auto t = build_canonical(name);
    const auto p1 = path_count_matrix(t, 1);
    for (int i = 0; i < t.vertex_count(); ++i)
      for (int j = 0; j < t.vertex_count(); ++j) CHECK(p1(i, j) == (t.edge_index(i, j).has_value() ? 1 : 0));
  }
}

TEST_CASE("path counts are constant on distance classes") {
  for (auto name : kStronglySymmetric) {
    CAPTURE(to_string(name));
    const auto t = build_canonical(name);
    const auto p = symmetry_profile(t);
    for (int m = 0; m <= 2 * p.diameter + 4; ++m) {
      const auto walks = path_count_matrix(t, m);
      std::vector<std::int64_t> first(static_cast<std::size_t>(p.diameter + 1), -1);
      for (int i = 0; i < t.vertex_count(); ++i)
        for (int j = 0; j < t.vertex_count(); ++j) {
          auto& ref = first[static_cast<std::size_t>(p.distances(i, j))];
          if (ref < 0) ref = walks(i, j);
          CHECK(walks(i, j) == ref);
        }
    }
  }
}

TEST_CASE("path count overflow is reported") {
  const auto k7 = build_canonical(CanonicalMesh::csaszar_k7);
  CHECK_NOTHROW(path_count_matrix(k7, 20));
  CHECK_THROWS_AS(path_count_matrix(k7, 40), IntegerOverflowError);
}

TEST_CASE("complete pattern inverse") {
  auto c = complete_pattern_inverse(2, 2.0, 1.0);
  CHECK(c.diagonal == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(c.off_diagonal == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
  c = complete_pattern_inverse(5, 4.0, 0.0);
  CHECK(c.diagonal == 0.25);
  CHECK(c.off_diagonal == 0.0);

  const int n = 7;
  const double x = 4.5, y = -1.2;
  c = complete_pattern_inverse(n, x, y);
  Eigen::MatrixXd b = Eigen::MatrixXd::Constant(n, n, y);
  b.diagonal().setConstant(x);
  const auto dense = oracle::gauss_jordan_inverse(b);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK(std::abs(dense(i, j) - (i == j ? c.diagonal : c.off_diagonal)) <= 1e-10);

  CHECK_THROWS_AS(complete_pattern_inverse(4, 1.0, 1.0), SingularMatrixError);
  CHECK_THROWS_AS(complete_pattern_inverse(4, -3.0, 1.0), SingularMatrixError);
  CHECK_THROWS_AS(complete_pattern_inverse(0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("recursion inverse") {
  SUBCASE("octahedron, shifted Laplacian") {
    const auto t = build_canonical(CanonicalMesh::octahedron);
    const auto p = symmetry_profile(t);
    const auto inv = recursion_inverse(p, 4 * kW + 1, -kW);
    REQUIRE(inv.valid);
    const Eigen::MatrixXd b = shifted_laplacian(t, 1.0);
    const Eigen::MatrixXd residual = b * inv.reconstruct(p.distances) - Eigen::MatrixXd::Identity(6, 6);
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("K4 matches the complete closed form") {
    const auto p = symmetry_profile(build_canonical(CanonicalMesh::tetrahedron));
    const auto inv = recursion_inverse(p, 3.3, 0.8);
    const auto closed = complete_pattern_inverse(4, 3.3, 0.8);
    REQUIRE(inv.valid);
    CHECK(inv.values[0] == doctest::Approx(closed.diagonal).epsilon(1e-12));
    CHECK(inv.values[1] == doctest::Approx(closed.off_diagonal).epsilon(1e-12));
  }
  SUBCASE("torus_9 matches grouped dense inverse") {
    const auto t = build_canonical(CanonicalMesh::torus_9);
    const auto p = symmetry_profile(t);
    const auto inv = recursion_inverse(p, 10.0, 1.0);
    REQUIRE(inv.valid);
    const auto dense = oracle::gauss_jordan_inverse(PatternMatrix{10.0, 1.0}.dense(t));
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j)
        CHECK(std::abs(dense(i, j) - inv.values[static_cast<std::size_t>(p.distances(i, j))]) <= 1e-12);
  }
  SUBCASE("y = 0") {
    const auto p = symmetry_profile(build_canonical(CanonicalMesh::icosahedron));
    const auto inv = recursion_inverse(p, 2.0, 0.0);
    REQUIRE(inv.valid);
    CHECK(inv.values == std::vector<double>{0.5, 0.0, 0.0, 0.0});
    CHECK_FALSE(recursion_inverse(p, 0.0, 0.0).valid);
  }
  SUBCASE("singular x is reported") {
    // x I + y A is singular at x = -y * lambda for an adjacency eigenvalue lambda;
    // the octahedron has lambda = 4 (all-ones vector).
    const auto p = symmetry_profile(build_canonical(CanonicalMesh::octahedron));
    CHECK_FALSE(recursion_inverse(p, -4.0, 1.0).valid);
  }
  SUBCASE("random admissible x on strongly symmetric canonicals") {
    std::mt19937 rng(14);
    std::uniform_real_distribution<double> xs(-10.0, 10.0);
    for (auto name : {CanonicalMesh::octahedron, CanonicalMesh::torus_9, CanonicalMesh::icosahedron}) {
      const auto t = build_canonical(name);
      const auto p = symmetry_profile(t);
      const double y = -kW;
      for (int trial = 0; trial < 20; ++trial) {
        const double x = xs(rng);
        const Eigen::MatrixXd b = PatternMatrix{x, y}.dense(t);
        const auto inv = recursion_inverse(p, x, y);
        if (!inv.valid) continue;
        const Eigen::MatrixXd residual = b * inv.reconstruct(p.distances) - Eigen::MatrixXd::Identity(b.rows(), b.cols());
        CHECK(residual.cwiseAbs().maxCoeff() <= 1e-9);
      }
    }
  }
}

TEST_CASE("distance-constant inverse verification") {
  const auto oct = build_canonical(CanonicalMesh::octahedron);
  auto check = verify_distance_constant_inverse(oct, shifted_laplacian(oct, 0.5), 1e-12);
  CHECK(check.constant);
  for (double s : check.spreads) CHECK(s < 1e-12);
  CHECK(check.class_values.size() == 3);

  const auto ico = build_canonical(CanonicalMesh::icosahedron);
  CHECK(verify_distance_constant_inverse(ico, shifted_laplacian(ico, 0.5), 1e-10).constant);
  CHECK(verify_distance_constant_inverse(ico, PatternMatrix{7.0, -1.0}, 1e-10).constant);

  const auto bip = build_canonical(CanonicalMesh::triangular_bipyramid);
  check = verify_distance_constant_inverse(bip, shifted_laplacian(bip, 0.5), 1e-10);
  CHECK_FALSE(check.constant);
  CHECK(check.spreads[0] > 1e-3);  // diagonal splits by degree

  // Singular: the Laplacian itself.
  CHECK_THROWS_AS(verify_distance_constant_inverse(oct, shifted_laplacian(oct, 0.0), 1e-10), SingularMatrixError);
}
