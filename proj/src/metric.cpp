#include "cotandet/metric.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace cotandet {

namespace {

// Law of cosines for the angle between sides a and b, opposite side c.
double angle_between(double a, double b, double c) {
  const double cosine = (a * a + b * b - c * c) / (2.0 * a * b);
  return std::acos(std::clamp(cosine, -1.0, 1.0));
}

double heron(double a, double b, double c) {
  const double s = 0.5 * (a + b + c);
  return std::sqrt(std::max(0.0, s * (s - a) * (s - b) * (s - c)));
}

// Side lengths of triangle f, side k opposite the k-th vertex.
std::array<double, 3> sides(const Triangulation& t, const DiscreteMetric& m, std::size_t f) {
  const auto& e = t.triangle_edges(f);
  return {m[e[0]], m[e[1]], m[e[2]]};
}

std::string describe_edge(const Edge& e) {
  return "(" + std::to_string(e[0]) + "," + std::to_string(e[1]) + ")";
}

}  // namespace

DiscreteMetric DiscreteMetric::scaled(double factor) const {
  DiscreteMetric out = *this;
  for (auto& l : out.lengths_) l *= factor;
  return out;
}

DiscreteMetric DiscreteMetric::displaced(const std::vector<double>& direction, double step) const {
  if (direction.size() != lengths_.size()) throw MetricError("direction has wrong number of components");
  DiscreteMetric out = *this;
  for (std::size_t e = 0; e < lengths_.size(); ++e) out.lengths_[e] += step * direction[e];
  return out;
}

DiscreteMetric uniform_metric(const Triangulation& t, double length) {
  if (!(length > 0.0) || !std::isfinite(length))
    throw MetricError("uniform_metric: length must be positive and finite, got " + std::to_string(length));
  return DiscreteMetric(std::vector<double>(t.edge_count(), length));
}

std::vector<TriangleViolation> validate_metric(const Triangulation& t, const DiscreteMetric& m) {
  if (m.size() != t.edge_count())
    throw MetricError("metric has " + std::to_string(m.size()) + " lengths for " + std::to_string(t.edge_count()) +
                      " edges");
  std::vector<TriangleViolation> violations;
  for (std::size_t f = 0; f < t.triangle_count(); ++f) {
    const auto& e = t.triangle_edges(f);
    const auto l = sides(t, m, f);
    for (std::size_t k = 0; k < 3; ++k) {
      const double other = l[(k + 1) % 3] + l[(k + 2) % 3];
      // Strict inequality; also rejects NaN and non-positive lengths.
      if (!(l[k] > 0.0) || !(l[k] < other)) {
        TriangleViolation v;
        v.triangle = f;
        v.long_edge = t.edges()[e[k]];
        v.long_length = l[k];
        v.other_sum = other;
        std::ostringstream msg;
        msg << std::setprecision(17) << "triangle " << f << ": edge " << describe_edge(v.long_edge) << " length "
            << l[k] << (l[k] > 0.0 ? " is not less than " + std::to_string(other) : std::string(" is not positive"));
        v.message = msg.str();
        violations.push_back(std::move(v));
      }
    }
  }
  return violations;
}

void require_valid_metric(const Triangulation& t, const DiscreteMetric& m) {
  const auto violations = validate_metric(t, m);
  if (!violations.empty()) throw MetricError("invalid discrete metric: " + violations.front().message);
}

CornerAngles corner_angles(const Triangulation& t, const DiscreteMetric& m) {
  require_valid_metric(t, m);
  CornerAngles angles(t.triangle_count());
  for (std::size_t f = 0; f < t.triangle_count(); ++f) {
    const auto l = sides(t, m, f);
    for (std::size_t k = 0; k < 3; ++k) angles[f][k] = angle_between(l[(k + 1) % 3], l[(k + 2) % 3], l[k]);
  }
  return angles;
}

std::vector<double> triangle_areas(const Triangulation& t, const DiscreteMetric& m) {
  require_valid_metric(t, m);
  std::vector<double> areas(t.triangle_count());
  for (std::size_t f = 0; f < t.triangle_count(); ++f) {
    const auto l = sides(t, m, f);
    areas[f] = heron(l[0], l[1], l[2]);
  }
  return areas;
}

std::vector<double> local_area_elements(const Triangulation& t, const DiscreteMetric& m) {
  const auto areas = triangle_areas(t, m);
  std::vector<double> local(static_cast<std::size_t>(t.vertex_count()), 0.0);
  for (std::size_t f = 0; f < t.triangle_count(); ++f)
    for (int v : t.triangles()[f]) local[static_cast<std::size_t>(v)] += areas[f] / 3.0;
  return local;
}

double total_area(const Triangulation& t, const DiscreteMetric& m) {
  const auto areas = triangle_areas(t, m);
  double sum = 0.0;
  for (double a : areas) sum += a;
  return sum;
}

CurvatureVector gaussian_curvature(const Triangulation& t, const DiscreteMetric& m, CurvatureConvention convention) {
  const auto angles = corner_angles(t, m);
  const double base = convention == CurvatureConvention::paper ? std::numbers::pi : 2.0 * std::numbers::pi;
  CurvatureVector k{std::vector<double>(static_cast<std::size_t>(t.vertex_count()), base), convention};
  for (std::size_t f = 0; f < t.triangle_count(); ++f)
    for (std::size_t c = 0; c < 3; ++c) k.values[static_cast<std::size_t>(t.triangles()[f][c])] -= angles[f][c];
  return k;
}

std::string_view to_string(CurvatureConvention c) {
  return c == CurvatureConvention::paper ? "paper" : "standard";
}

double cayley_menger_tetrahedron(const std::array<double, 6>& lengths) {
  constexpr std::array<std::array<int, 2>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  Eigen::Matrix<double, 5, 5> cm = Eigen::Matrix<double, 5, 5>::Zero();
  for (int i = 1; i < 5; ++i) cm(0, i) = cm(i, 0) = 1.0;
  for (std::size_t p = 0; p < kPairs.size(); ++p) {
    const int i = kPairs[p][0] + 1, j = kPairs[p][1] + 1;
    cm(i, j) = cm(j, i) = lengths[p] * lengths[p];
  }
  return cm.fullPivLu().determinant();
}

DiscreteMetric parse_metric(const Triangulation& t, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  std::vector<double> lengths(t.edge_count(), 0.0);
  std::vector<bool> seen(t.edge_count(), false);
  auto fail = [&](const std::string& what) {
    throw MetricError("metric line " + std::to_string(lineno) + ": " + what);
  };

  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream fields(raw);
    std::string keyword;
    if (!(fields >> keyword)) continue;
    if (keyword != "length") fail("unknown keyword '" + keyword + "'");
    long long i = 0, j = 0;
    std::string value_text;
    if (!(fields >> i >> j >> value_text)) fail("expected 'length i j value'");
    std::string extra;
    if (fields >> extra) fail("unexpected trailing token '" + extra + "'");
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(value_text, &used);
      if (used != value_text.size()) fail("malformed length '" + value_text + "'");
    } catch (const std::logic_error&) {
      fail("malformed length '" + value_text + "'");
    }
    if (i < 0 || j < 0 || i >= t.vertex_count() || j >= t.vertex_count()) fail("vertex index out of range");
    auto idx = t.edge_index(static_cast<int>(i), static_cast<int>(j));
    if (!idx) fail("(" + std::to_string(i) + "," + std::to_string(j) + ") is not an edge");
    if (seen[*idx]) fail("duplicate length for edge " + describe_edge(t.edges()[*idx]));
    if (!(value > 0.0) || !std::isfinite(value)) fail("length must be positive and finite");
    lengths[*idx] = value;
    seen[*idx] = true;
  }
  for (std::size_t e = 0; e < seen.size(); ++e)
    if (!seen[e]) throw MetricError("metric is missing a length for edge " + describe_edge(t.edges()[e]));
  return DiscreteMetric(std::move(lengths));
}

std::string format_metric(const Triangulation& t, const DiscreteMetric& m) {
  if (m.size() != t.edge_count()) throw MetricError("metric does not match triangulation");
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t e = 0; e < t.edge_count(); ++e)
    out << "length " << t.edges()[e][0] << ' ' << t.edges()[e][1] << ' ' << m[e] << '\n';
  return out.str();
}

DiscreteMetric load_metric(const Triangulation& t, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MetricError("cannot open metric file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_metric(t, buffer.str());
}

void save_metric(const Triangulation& t, const DiscreteMetric& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MetricError("cannot write metric file " + path.string());
  out << format_metric(t, m);
}

}  // namespace cotandet
