#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cotandet/mesh.hpp"

namespace cotandet {

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Positive length per edge, indexed like Triangulation::edges().
class DiscreteMetric {
 public:
  DiscreteMetric() = default;
  explicit DiscreteMetric(std::vector<double> lengths) : lengths_(std::move(lengths)) {}

  std::size_t size() const { return lengths_.size(); }
  double operator[](std::size_t edge) const { return lengths_[edge]; }
  double& operator[](std::size_t edge) { return lengths_[edge]; }
  const std::vector<double>& lengths() const { return lengths_; }

  /// Copy with every length multiplied by factor.
  DiscreteMetric scaled(double factor) const;
  /// Copy with lengths + step * direction.
  DiscreteMetric displaced(const std::vector<double>& direction, double step) const;

  friend bool operator==(const DiscreteMetric&, const DiscreteMetric&) = default;

 private:
  std::vector<double> lengths_;
};

/// A triangle inequality l_opposite < l_a + l_b that fails (or a non-positive length).
struct TriangleViolation {
  std::size_t triangle = 0;
  /// Edge whose length is not strictly less than the sum of the other two sides.
  Edge long_edge{};
  double long_length = 0.0;
  double other_sum = 0.0;
  std::string message;
};

DiscreteMetric uniform_metric(const Triangulation& t, double length);

/// Empty iff m is a discrete metric on t. Throws MetricError when the length
/// count does not match the edge count.
std::vector<TriangleViolation> validate_metric(const Triangulation& t, const DiscreteMetric& m);

/// Throws MetricError describing the first violation.
void require_valid_metric(const Triangulation& t, const DiscreteMetric& m);

/// Angle at each vertex of each triangle, in the triangle's sorted vertex order.
using CornerAngles = std::vector<std::array<double, 3>>;

CornerAngles corner_angles(const Triangulation& t, const DiscreteMetric& m);

/// Heron area per triangle.
std::vector<double> triangle_areas(const Triangulation& t, const DiscreteMetric& m);

/// A_i: one third of the total area of the triangles at vertex i.
std::vector<double> local_area_elements(const Triangulation& t, const DiscreteMetric& m);

double total_area(const Triangulation& t, const DiscreteMetric& m);

enum class CurvatureConvention {
  /// K_i = pi - angle sum.
  paper,
  /// K_i = 2 pi - angle sum (Gauss-Bonnet: sum K_i = 2 pi chi).
  standard,
};

struct CurvatureVector {
  std::vector<double> values;
  CurvatureConvention convention = CurvatureConvention::paper;
};

CurvatureVector gaussian_curvature(const Triangulation& t, const DiscreteMetric& m,
                                   CurvatureConvention convention = CurvatureConvention::paper);

std::string_view to_string(CurvatureConvention c);

/// Bordered Cayley-Menger determinant of a tetrahedron from its six edge
/// lengths, ordered (0,1), (0,2), (0,3), (1,2), (1,3), (2,3). Entries are
/// squared lengths; positive iff the lengths span a non-degenerate
/// tetrahedron in R^3 (given the face triangle inequalities).
double cayley_menger_tetrahedron(const std::array<double, 6>& lengths);

// Metric file: `length i j v` per edge, '#' comments.
DiscreteMetric parse_metric(const Triangulation& t, std::string_view text);
std::string format_metric(const Triangulation& t, const DiscreteMetric& m);
DiscreteMetric load_metric(const Triangulation& t, const std::filesystem::path& path);
void save_metric(const Triangulation& t, const DiscreteMetric& m, const std::filesystem::path& path);

}  // namespace cotandet
