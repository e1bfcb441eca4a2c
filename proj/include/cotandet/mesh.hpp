#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cotandet {

/// Unordered vertex pair, stored sorted (first < second).
using Edge = std::array<int, 2>;
/// Unordered vertex triple, stored sorted.
using Triangle = std::array<int, 3>;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by load() with the offending line number in the message.
class ParseError : public MeshError {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Raised by load() when the parsed triangulation fails a closed-surface invariant.
class ValidationError : public MeshError {
 public:
  using MeshError::MeshError;
};

/// Combinatorial surface: vertex count plus canonical (sorted) edge and
/// triangle lists. No coordinates are stored.
///
/// Construction enforces only local well-formedness (indices in range, no
/// repeated vertices, no duplicates, every triangle side listed as an edge).
/// Global properties such as closedness are reported by validate_closed().
class Triangulation {
 public:
  Triangulation(int vertex_count, std::vector<Edge> edges, std::vector<Triangle> triangles);

  /// Builds the edge set as the union of triangle sides.
  static Triangulation from_triangles(int vertex_count, std::vector<Triangle> triangles);

  int vertex_count() const { return vertex_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }

  /// Index of edge {i, j} in edges(), in either vertex order.
  std::optional<std::size_t> edge_index(int i, int j) const;
  /// Same as edge_index but throws MeshError when absent.
  std::size_t require_edge(int i, int j) const;

  /// Edge indices of the three sides of triangle t, ordered so that side k is
  /// opposite the triangle's k-th vertex.
  const std::array<std::size_t, 3>& triangle_edges(std::size_t t) const { return triangle_edges_[t]; }

  /// Sorted neighbour lists.
  const std::vector<std::vector<int>>& adjacency() const { return adjacency_; }
  std::size_t degree(int v) const { return adjacency_[static_cast<std::size_t>(v)].size(); }

  int euler_characteristic() const;

  /// Returns a copy with vertex v renamed to permutation[v].
  Triangulation relabeled(const std::vector<int>& permutation) const;

  friend bool operator==(const Triangulation&, const Triangulation&) = default;

 private:
  int vertex_count_;
  std::vector<Edge> edges_;
  std::vector<Triangle> triangles_;
  std::vector<std::array<std::size_t, 3>> triangle_edges_;
  std::vector<std::vector<int>> adjacency_;
};

struct ValidationReport {
  bool is_closed = false;
  bool is_connected = false;
  int euler_characteristic = 0;
  /// Edges whose incident-triangle count differs from two.
  std::vector<Edge> offending_edges;
  /// Incident-triangle count per edge, aligned with Triangulation::edges().
  std::vector<int> face_counts;
};

ValidationReport validate_closed(const Triangulation& t);

/// Number of connected components of the edge graph (isolated vertices count).
int connected_components(const Triangulation& t);

bool is_complete(const Triangulation& t);

enum class CanonicalMesh {
  tetrahedron,
  csaszar_k7,
  octahedron,
  torus_9,
  icosahedron,
  /// Double pyramid over a triangle; closed but not vertex-regular.
  triangular_bipyramid,
};

Triangulation build_canonical(CanonicalMesh name);

std::string_view to_string(CanonicalMesh name);
std::optional<CanonicalMesh> canonical_from_string(std::string_view name);
const std::vector<CanonicalMesh>& all_canonical_meshes();

// Text format:
//   vertices N
//   edge i j
//   triangle i j k
// '#' starts a comment. Every triangle side must also appear as an edge line.
Triangulation parse_triangulation(std::string_view text);
std::string format_triangulation(const Triangulation& t);
Triangulation load(const std::filesystem::path& path);
void save(const Triangulation& t, const std::filesystem::path& path);

}  // namespace cotandet
