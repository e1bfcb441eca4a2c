#include "cotandet/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

namespace cotandet {

namespace {

Edge make_edge(int i, int j) { return i < j ? Edge{i, j} : Edge{j, i}; }

Triangle make_triangle(Triangle t) {
  std::sort(t.begin(), t.end());
  return t;
}

std::string describe(const Edge& e) {
  return "(" + std::to_string(e[0]) + "," + std::to_string(e[1]) + ")";
}

std::string describe(const Triangle& t) {
  return "(" + std::to_string(t[0]) + "," + std::to_string(t[1]) + "," + std::to_string(t[2]) + ")";
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : MeshError("line " + std::to_string(line) + ": " + what), line_(line) {}

Triangulation::Triangulation(int vertex_count, std::vector<Edge> edges, std::vector<Triangle> triangles)
    : vertex_count_(vertex_count), edges_(std::move(edges)), triangles_(std::move(triangles)) {
  if (vertex_count_ < 3) throw MeshError("triangulation needs at least 3 vertices, got " + std::to_string(vertex_count_));
  auto in_range = [this](int v) { return v >= 0 && v < vertex_count_; };

  for (auto& e : edges_) {
    if (!in_range(e[0]) || !in_range(e[1])) throw MeshError("edge " + describe(e) + " references a vertex out of range");
    if (e[0] == e[1]) throw MeshError("edge " + describe(e) + " repeats a vertex");
    e = make_edge(e[0], e[1]);
  }
  std::sort(edges_.begin(), edges_.end());
  if (auto dup = std::adjacent_find(edges_.begin(), edges_.end()); dup != edges_.end())
    throw MeshError("duplicate edge " + describe(*dup));

  for (auto& tri : triangles_) {
    for (int v : tri)
      if (!in_range(v)) throw MeshError("triangle " + describe(tri) + " references a vertex out of range");
    tri = make_triangle(tri);
    if (tri[0] == tri[1] || tri[1] == tri[2]) throw MeshError("triangle " + describe(tri) + " repeats a vertex");
  }
  std::sort(triangles_.begin(), triangles_.end());
  if (auto dup = std::adjacent_find(triangles_.begin(), triangles_.end()); dup != triangles_.end())
    throw MeshError("duplicate triangle " + describe(*dup));

  triangle_edges_.reserve(triangles_.size());
  for (const auto& tri : triangles_) {
    std::array<std::size_t, 3> sides{};
    for (int k = 0; k < 3; ++k) {
      const int a = tri[(k + 1) % 3];
      const int b = tri[(k + 2) % 3];
      auto idx = edge_index(a, b);
      if (!idx)
        throw MeshError("side " + describe(make_edge(a, b)) + " of triangle " + describe(tri) +
                        " is missing from the edge list");
      sides[static_cast<std::size_t>(k)] = *idx;
    }
    triangle_edges_.push_back(sides);
  }

  adjacency_.assign(static_cast<std::size_t>(vertex_count_), {});
  for (const auto& e : edges_) {
    adjacency_[static_cast<std::size_t>(e[0])].push_back(e[1]);
    adjacency_[static_cast<std::size_t>(e[1])].push_back(e[0]);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

Triangulation Triangulation::from_triangles(int vertex_count, std::vector<Triangle> triangles) {
  std::set<Edge> edges;
  for (const auto& tri : triangles) {
    edges.insert(make_edge(tri[0], tri[1]));
    edges.insert(make_edge(tri[1], tri[2]));
    edges.insert(make_edge(tri[0], tri[2]));
  }
  return Triangulation(vertex_count, std::vector<Edge>(edges.begin(), edges.end()), std::move(triangles));
}

std::optional<std::size_t> Triangulation::edge_index(int i, int j) const {
  const Edge key = make_edge(i, j);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

std::size_t Triangulation::require_edge(int i, int j) const {
  if (auto idx = edge_index(i, j)) return *idx;
  throw MeshError("edge " + describe(make_edge(i, j)) + " is not in the triangulation");
}

int Triangulation::euler_characteristic() const {
  return vertex_count_ - static_cast<int>(edges_.size()) + static_cast<int>(triangles_.size());
}

Triangulation Triangulation::relabeled(const std::vector<int>& permutation) const {
  if (permutation.size() != static_cast<std::size_t>(vertex_count_))
    throw MeshError("relabeling permutation has wrong size");
  auto map = [&](int v) { return permutation[static_cast<std::size_t>(v)]; };
  std::vector<Edge> edges;
  edges.reserve(edges_.size());
  for (const auto& e : edges_) edges.push_back({map(e[0]), map(e[1])});
  std::vector<Triangle> tris;
  tris.reserve(triangles_.size());
  for (const auto& t : triangles_) tris.push_back({map(t[0]), map(t[1]), map(t[2])});
  return Triangulation(vertex_count_, std::move(edges), std::move(tris));
}

ValidationReport validate_closed(const Triangulation& t) {
  ValidationReport report;
  report.face_counts.assign(t.edge_count(), 0);
  for (std::size_t f = 0; f < t.triangle_count(); ++f)
    for (std::size_t e : t.triangle_edges(f)) ++report.face_counts[e];

  for (std::size_t e = 0; e < t.edge_count(); ++e)
    if (report.face_counts[e] != 2) report.offending_edges.push_back(t.edges()[e]);

  report.is_closed = report.offending_edges.empty();
  report.is_connected = connected_components(t) == 1;
  report.euler_characteristic = t.euler_characteristic();
  return report;
}

int connected_components(const Triangulation& t) {
  const auto n = static_cast<std::size_t>(t.vertex_count());
  std::vector<bool> seen(n, false);
  int components = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (seen[root]) continue;
    ++components;
    std::queue<std::size_t> frontier;
    frontier.push(root);
    seen[root] = true;
    while (!frontier.empty()) {
      const auto v = frontier.front();
      frontier.pop();
      for (int w : t.adjacency()[v]) {
        const auto wi = static_cast<std::size_t>(w);
        if (!seen[wi]) {
          seen[wi] = true;
          frontier.push(wi);
        }
      }
    }
  }
  return components;
}

bool is_complete(const Triangulation& t) {
  const auto n = static_cast<std::size_t>(t.vertex_count());
  return t.edge_count() == n * (n - 1) / 2;
}

namespace {

Triangulation tetrahedron() { return Triangulation::from_triangles(4, {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}); }

// Seven-vertex torus: the two orbits {i, i+1, i+3} and {i, i+2, i+3} under i -> i+1 mod 7.
Triangulation csaszar_k7() {
  std::vector<Triangle> tris;
  for (int i = 0; i < 7; ++i) {
    tris.push_back({i, (i + 1) % 7, (i + 3) % 7});
    tris.push_back({i, (i + 2) % 7, (i + 3) % 7});
  }
  return Triangulation::from_triangles(7, std::move(tris));
}

// Antipodal pairs (0,1), (2,3), (4,5); one face per choice of a vertex from each pair.
Triangulation octahedron() {
  std::vector<Triangle> tris;
  for (int a : {0, 1})
    for (int b : {2, 3})
      for (int c : {4, 5}) tris.push_back({a, b, c});
  return Triangulation::from_triangles(6, std::move(tris));
}

// 3x3 grid with periodic identification; vertex (r, c) -> 3r + c and every
// square split along its (r, c)-(r+1, c+1) diagonal.
Triangulation torus_9() {
  auto v = [](int r, int c) { return 3 * (r % 3) + (c % 3); };
  std::vector<Triangle> tris;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      tris.push_back({v(r, c), v(r, c + 1), v(r + 1, c + 1)});
      tris.push_back({v(r, c), v(r + 1, c), v(r + 1, c + 1)});
    }
  }
  return Triangulation::from_triangles(9, std::move(tris));
}

// Vertex 0 on top, upper ring 1..5, lower ring 6..10, vertex 11 at the bottom.
// Lower-ring vertex 6+k sits below the gap between upper vertices 1+k and 1+(k+1)%5.
Triangulation icosahedron() {
  std::vector<Triangle> tris;
  for (int k = 0; k < 5; ++k) {
    const int u0 = 1 + k, u1 = 1 + (k + 1) % 5;
    const int d0 = 6 + k, d1 = 6 + (k + 1) % 5;
    tris.push_back({0, u0, u1});
    tris.push_back({u0, u1, d0});
    tris.push_back({u1, d0, d1});
    tris.push_back({11, d0, d1});
  }
  return Triangulation::from_triangles(12, std::move(tris));
}

// Apexes 0 and 1 over the equator 2, 3, 4.
Triangulation triangular_bipyramid() {
  std::vector<Triangle> tris;
  for (int apex : {0, 1})
    for (int k = 0; k < 3; ++k) tris.push_back({apex, 2 + k, 2 + (k + 1) % 3});
  return Triangulation::from_triangles(5, std::move(tris));
}

constexpr std::pair<CanonicalMesh, std::string_view> kNames[] = {
    {CanonicalMesh::tetrahedron, "tetrahedron"},
    {CanonicalMesh::csaszar_k7, "csaszar_k7"},
    {CanonicalMesh::octahedron, "octahedron"},
    {CanonicalMesh::torus_9, "torus_9"},
    {CanonicalMesh::icosahedron, "icosahedron"},
    {CanonicalMesh::triangular_bipyramid, "triangular_bipyramid"},
};

}  // namespace

Triangulation build_canonical(CanonicalMesh name) {
  switch (name) {
    case CanonicalMesh::tetrahedron: return tetrahedron();
    case CanonicalMesh::csaszar_k7: return csaszar_k7();
    case CanonicalMesh::octahedron: return octahedron();
    case CanonicalMesh::torus_9: return torus_9();
    case CanonicalMesh::icosahedron: return icosahedron();
    case CanonicalMesh::triangular_bipyramid: return triangular_bipyramid();
  }
  throw MeshError("unknown canonical triangulation");
}

std::string_view to_string(CanonicalMesh name) {
  for (const auto& [value, text] : kNames)
    if (value == name) return text;
  return "unknown";
}

std::optional<CanonicalMesh> canonical_from_string(std::string_view name) {
  for (const auto& [value, text] : kNames)
    if (text == name) return value;
  return std::nullopt;
}

const std::vector<CanonicalMesh>& all_canonical_meshes() {
  static const std::vector<CanonicalMesh> all = [] {
    std::vector<CanonicalMesh> v;
    for (const auto& entry : kNames) v.push_back(entry.first);
    return v;
  }();
  return all;
}

Triangulation parse_triangulation(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  std::optional<int> vertex_count;
  std::vector<Edge> edges;
  std::vector<Triangle> tris;

  auto read_index = [&](std::istringstream& fields, const char* what) {
    long long v = 0;
    if (!(fields >> v)) throw ParseError(lineno, std::string("expected integer ") + what);
    if (v < 0 || v >= *vertex_count)
      throw ParseError(lineno, "vertex " + std::to_string(v) + " out of range [0, " +
                                   std::to_string(*vertex_count) + ")");
    return static_cast<int>(v);
  };

  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream fields(raw);
    std::string keyword;
    if (!(fields >> keyword)) continue;

    if (keyword == "vertices") {
      if (vertex_count) throw ParseError(lineno, "duplicate 'vertices' header");
      long long n = 0;
      if (!(fields >> n) || n < 3 || n > 1'000'000) throw ParseError(lineno, "expected vertex count >= 3");
      vertex_count = static_cast<int>(n);
    } else if (keyword == "edge" || keyword == "triangle") {
      if (!vertex_count) throw ParseError(lineno, "'" + keyword + "' before 'vertices' header");
      if (keyword == "edge") {
        const int i = read_index(fields, "edge endpoint");
        const int j = read_index(fields, "edge endpoint");
        edges.push_back({i, j});
      } else {
        const int i = read_index(fields, "triangle vertex");
        const int j = read_index(fields, "triangle vertex");
        const int k = read_index(fields, "triangle vertex");
        tris.push_back({i, j, k});
      }
    } else {
      throw ParseError(lineno, "unknown keyword '" + keyword + "'");
    }
    std::string extra;
    if (fields >> extra) throw ParseError(lineno, "unexpected trailing token '" + extra + "'");
  }
  if (!vertex_count) throw ParseError(lineno, "missing 'vertices' header");

  std::optional<Triangulation> t;
  try {
    t.emplace(*vertex_count, std::move(edges), std::move(tris));
  } catch (const MeshError& e) {
    throw ValidationError(std::string("invalid triangulation: ") + e.what());
  }
  const auto report = validate_closed(*t);
  if (!report.is_closed) {
    const Edge& bad = report.offending_edges.front();
    const int count = report.face_counts[t->require_edge(bad[0], bad[1])];
    throw ValidationError("triangulation is not closed: edge " + describe(bad) + " lies in " +
                          std::to_string(count) + " triangle(s)");
  }
  if (!report.is_connected) throw ValidationError("triangulation is not connected");
  return std::move(*t);
}

std::string format_triangulation(const Triangulation& t) {
  std::ostringstream out;
  out << "vertices " << t.vertex_count() << '\n';
  for (const auto& e : t.edges()) out << "edge " << e[0] << ' ' << e[1] << '\n';
  for (const auto& tri : t.triangles()) out << "triangle " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  return out.str();
}

Triangulation load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_triangulation(buffer.str());
}

void save(const Triangulation& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file " + path.string());
  out << format_triangulation(t);
}

}  // namespace cotandet
