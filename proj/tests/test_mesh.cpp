#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <map>
#include <set>

#include "cotandet/mesh.hpp"
#include "oracles.hpp"

using namespace cotandet;

namespace {

struct Counts {
  int v, e, t, chi;
};

// Degree sequence, sorted.
std::vector<std::size_t> degrees(const Triangulation& t) {
  std::vector<std::size_t> d;
  for (int v = 0; v < t.vertex_count(); ++v) d.push_back(t.degree(v));
  std::sort(d.begin(), d.end());
  return d;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cotandet_test_" + name);
}

}  // namespace

TEST_CASE("canonical triangulations have the expected combinatorics") {
  const std::pair<CanonicalMesh, Counts> expected[] = {
      {CanonicalMesh::tetrahedron, {4, 6, 4, 2}},   {CanonicalMesh::csaszar_k7, {7, 21, 14, 0}},
      {CanonicalMesh::octahedron, {6, 12, 8, 2}},   {CanonicalMesh::torus_9, {9, 27, 18, 0}},
      {CanonicalMesh::icosahedron, {12, 30, 20, 2}}, {CanonicalMesh::triangular_bipyramid, {5, 9, 6, 2}},
  };
  for (const auto& [name, c] : expected) {
    CAPTURE(to_string(name));
    const auto t = build_canonical(name);
    CHECK(t.vertex_count() == c.v);
    CHECK(static_cast<int>(t.edge_count()) == c.e);
    CHECK(static_cast<int>(t.triangle_count()) == c.t);
    CHECK(t.euler_characteristic() == c.chi);
    CHECK(3 * t.triangle_count() == 2 * t.edge_count());

    const auto report = validate_closed(t);
    CHECK(report.is_closed);
    CHECK(report.is_connected);
    CHECK(report.offending_edges.empty());
    CHECK(report.euler_characteristic == c.chi);
  }
}

TEST_CASE("torus_9 face set: exhaustive edge-in-face count and degree sequence") {
  const auto t = build_canonical(CanonicalMesh::torus_9);
  // Count faces per vertex pair directly from the triangle list.
  std::map<std::pair<int, int>, int> faces_per_pair;
  for (const auto& tri : t.triangles())
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) ++faces_per_pair[{tri[static_cast<std::size_t>(a)], tri[static_cast<std::size_t>(b)]}];
  CHECK(faces_per_pair.size() == 27);
  for (const auto& [pair, count] : faces_per_pair) CHECK(count == 2);
  CHECK(degrees(t) == std::vector<std::size_t>(9, 6));
}

TEST_CASE("is_complete") {
  CHECK(is_complete(build_canonical(CanonicalMesh::tetrahedron)));
  CHECK(is_complete(build_canonical(CanonicalMesh::csaszar_k7)));
  CHECK_FALSE(is_complete(build_canonical(CanonicalMesh::octahedron)));
  CHECK_FALSE(is_complete(build_canonical(CanonicalMesh::torus_9)));
  CHECK_FALSE(is_complete(build_canonical(CanonicalMesh::icosahedron)));
}

TEST_CASE("validate_closed reports a boundary created by deleting a face") {
  const auto tet = build_canonical(CanonicalMesh::tetrahedron);
  auto tris = tet.triangles();
  tris.pop_back();
  const Triangulation open(4, tet.edges(), tris);
  const auto report = validate_closed(open);
  CHECK_FALSE(report.is_closed);
  CHECK(report.is_connected);
  CHECK(report.offending_edges.size() == 3);
  CHECK(report.euler_characteristic == 1);
  // Pure: the same input yields the same report.
  const auto again = validate_closed(open);
  CHECK(again.offending_edges == report.offending_edges);
  CHECK(again.face_counts == report.face_counts);
}

TEST_CASE("validate_closed detects disconnection") {
  // Two disjoint tetrahedra.
  std::vector<Triangle> tris = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}, {4, 5, 6}, {4, 5, 7}, {4, 6, 7}, {5, 6, 7}};
  const auto t = Triangulation::from_triangles(8, tris);
  const auto report = validate_closed(t);
  CHECK(report.is_closed);
  CHECK_FALSE(report.is_connected);
  CHECK(connected_components(t) == 2);
}

TEST_CASE("construction rejects malformed input") {
  CHECK_THROWS_AS(Triangulation(2, {}, {}), MeshError);
  CHECK_THROWS_AS(Triangulation(4, {{0, 0}}, {}), MeshError);
  CHECK_THROWS_AS(Triangulation(4, {{0, 4}}, {}), MeshError);
  CHECK_THROWS_AS(Triangulation(4, {{0, 1}, {1, 0}}, {}), MeshError);
  CHECK_THROWS_AS(Triangulation(4, {{0, 1}, {1, 2}}, {{0, 1, 2}}), MeshError);  // side (0,2) missing
  CHECK_THROWS_AS(Triangulation::from_triangles(4, {{0, 1, 1}}), MeshError);
}

TEST_CASE("edge lookup is order independent") {
  const auto t = build_canonical(CanonicalMesh::octahedron);
  CHECK(t.edge_index(0, 2) == t.edge_index(2, 0));
  CHECK_FALSE(t.edge_index(0, 1).has_value());  // antipodal
  CHECK_THROWS_AS(t.require_edge(0, 1), MeshError);
}

TEST_CASE("canonical names round trip") {
  for (auto name : all_canonical_meshes()) CHECK(canonical_from_string(to_string(name)) == name);
  CHECK_FALSE(canonical_from_string("cube").has_value());
}

TEST_CASE("save/load round trip for every canonical and random relabelings") {
  std::mt19937 rng(7);
  for (auto name : all_canonical_meshes()) {
    const auto base = build_canonical(name);
    const auto t = base.relabeled(oracle::random_permutation(base.vertex_count(), rng));
    const auto path = temp_file(std::string(to_string(name)) + ".mesh");
    save(t, path);
    CHECK(load(path) == t);
    std::filesystem::remove(path);
  }
}

TEST_CASE("parser handles comments and blank lines") {
  const auto t = parse_triangulation(
      "# tetrahedron\n"
      "vertices 4   # header\n"
      "\n"
      "edge 0 1\nedge 0 2\nedge 0 3\nedge 1 2\nedge 1 3\nedge 2 3\n"
      "triangle 2 1 0\ntriangle 0 1 3\ntriangle 3 2 0\ntriangle 1 2 3\n");
  CHECK(t == build_canonical(CanonicalMesh::tetrahedron));
}

TEST_CASE("parse errors carry line numbers") {
  SUBCASE("vertex out of range") {
    try {
      parse_triangulation("vertices 4\nedge 0 1\ntriangle 0 1 4\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("out of range") != std::string::npos);
    }
  }
  SUBCASE("unknown keyword") { CHECK_THROWS_AS(parse_triangulation("vertices 4\nface 0 1 2\n"), ParseError); }
  SUBCASE("missing header") { CHECK_THROWS_AS(parse_triangulation("edge 0 1\n"), ParseError); }
  SUBCASE("trailing token") { CHECK_THROWS_AS(parse_triangulation("vertices 4 5\n"), ParseError); }
  SUBCASE("non-integer") { CHECK_THROWS_AS(parse_triangulation("vertices 4\nedge 0 x\n"), ParseError); }
}

TEST_CASE("load rejects a surface with boundary") {
  const char* text =
      "vertices 4\n"
      "edge 0 1\nedge 0 2\nedge 0 3\nedge 1 2\nedge 1 3\nedge 2 3\n"
      "triangle 0 1 2\ntriangle 0 1 3\ntriangle 0 2 3\n";
  try {
    parse_triangulation(text);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("not closed") != std::string::npos);
  }
}

TEST_CASE("load of a missing file fails cleanly") {
  CHECK_THROWS_AS(load("/nonexistent/path/to.mesh"), MeshError);
}
