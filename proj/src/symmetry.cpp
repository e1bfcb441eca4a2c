#include "cotandet/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

namespace cotandet {

DistanceMatrix distance_matrix(const Triangulation& t) {
  const int n = t.vertex_count();
  DistanceMatrix d = DistanceMatrix::Constant(n, n, -1);
  for (int source = 0; source < n; ++source) {
    std::queue<int> frontier;
    d(source, source) = 0;
    frontier.push(source);
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      for (int w : t.adjacency()[static_cast<std::size_t>(v)]) {
        if (d(source, w) < 0) {
          d(source, w) = d(source, v) + 1;
          frontier.push(w);
        }
      }
    }
    for (int v = 0; v < n; ++v)
      if (d(source, v) < 0)
        throw GraphError("distance_matrix: graph is disconnected (no path " + std::to_string(source) + " -> " +
                         std::to_string(v) + ")");
  }
  return d;
}

int SymmetryProfile::alpha(int s, int distance) const {
  if (s < 0 || distance < 0 || distance > diameter || s > diameter) return 0;
  auto it = alpha_table.find({distance, s});
  if (it == alpha_table.end())
    throw GraphError("alpha_" + std::to_string(s) + "(" + std::to_string(distance) +
                     ") is not constant on its distance class");
  return it->second;
}

SymmetryProfile symmetry_profile(const Triangulation& t) {
  SymmetryProfile profile;
  profile.distances = distance_matrix(t);
  profile.diameter = profile.distances.maxCoeff();
  const int n = t.vertex_count();
  const int classes = profile.diameter + 1;

  bool regular = true;
  for (int v = 1; v < n; ++v) regular = regular && t.degree(v) == t.degree(0);
  if (regular) profile.degree = static_cast<int>(t.degree(0));

  // First observed count and pair per (distance, s); mismatches mark the key inconsistent.
  struct Seen {
    int count = -1;
    std::pair<int, int> pair{};
    bool consistent = true;
  };
  std::vector<Seen> seen(static_cast<std::size_t>(classes * classes));
  std::vector<int> counts(static_cast<std::size_t>(classes));

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::fill(counts.begin(), counts.end(), 0);
      for (int k : t.adjacency()[static_cast<std::size_t>(i)]) ++counts[static_cast<std::size_t>(profile.distances(k, j))];
      const int l = profile.distances(i, j);
      for (int s = 0; s < classes; ++s) {
        auto& entry = seen[static_cast<std::size_t>(l * classes + s)];
        const int c = counts[static_cast<std::size_t>(s)];
        if (entry.count < 0) {
          entry.count = c;
          entry.pair = {i, j};
        } else if (entry.count != c && entry.consistent) {
          entry.consistent = false;
          if (!profile.witness) profile.witness = SymmetryWitness{entry.pair, {i, j}, l, s, entry.count, c};
        }
      }
    }
  }

  for (int l = 0; l < classes; ++l)
    for (int s = 0; s < classes; ++s) {
      const auto& entry = seen[static_cast<std::size_t>(l * classes + s)];
      if (entry.count >= 0 && entry.consistent) profile.alpha_table[{l, s}] = entry.count;
    }
  profile.is_strongly_symmetric = !profile.witness.has_value();
  return profile;
}

Eigen::MatrixXd adjacency_matrix(const Triangulation& t) {
  const int n = t.vertex_count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : t.edges()) a(e[0], e[1]) = a(e[1], e[0]) = 1.0;
  return a;
}

PathCountMatrix path_count_matrix(const Triangulation& t, int m_steps) {
  if (m_steps < 0) throw std::invalid_argument("path_count: number of steps must be non-negative");
  const int n = t.vertex_count();
  PathCountMatrix adjacency = PathCountMatrix::Zero(n, n);
  for (const auto& e : t.edges()) adjacency(e[0], e[1]) = adjacency(e[1], e[0]) = 1;

  PathCountMatrix power = PathCountMatrix::Identity(n, n);
  for (int step = 0; step < m_steps; ++step) {
    PathCountMatrix next = PathCountMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        if (power(i, k) == 0) continue;
        for (int j = 0; j < n; ++j) {
          if (adjacency(k, j) == 0) continue;
          if (__builtin_add_overflow(next(i, j), power(i, k), &next(i, j)))
            throw IntegerOverflowError("path_count: walk count for m = " + std::to_string(step + 1) +
                                       " exceeds 64-bit range");
        }
      }
    power = std::move(next);
  }
  return power;
}

std::int64_t path_count(const Triangulation& t, int m_steps, int i, int j) {
  if (i < 0 || j < 0 || i >= t.vertex_count() || j >= t.vertex_count())
    throw std::out_of_range("path_count: vertex index out of range");
  return path_count_matrix(t, m_steps)(i, j);
}

Eigen::MatrixXd PatternMatrix::dense(const Triangulation& t) const {
  const int n = t.vertex_count();
  return diagonal * Eigen::MatrixXd::Identity(n, n) + edge * adjacency_matrix(t);
}

CompletePatternInverse complete_pattern_inverse(int n, double x, double y) {
  if (n < 1) throw std::invalid_argument("complete_pattern_inverse: n must be positive");
  const double denominator = (x - y) * (x + (n - 1) * y);
  const double scale = std::max({std::abs(x), std::abs(y), 1.0});
  if (!(std::abs(denominator) > 1e-12 * scale * scale))
    throw SingularMatrixError("complete_pattern_inverse: (x - y)(x + (n - 1) y) vanishes for n = " +
                              std::to_string(n) + ", x = " + std::to_string(x) + ", y = " + std::to_string(y));
  return {(x + (n - 2) * y) / denominator, -y / denominator};
}

Eigen::MatrixXd StructuredInverse::reconstruct(const DistanceMatrix& distances) const {
  Eigen::MatrixXd c(distances.rows(), distances.cols());
  for (Eigen::Index i = 0; i < distances.rows(); ++i)
    for (Eigen::Index j = 0; j < distances.cols(); ++j) c(i, j) = values.at(static_cast<std::size_t>(distances(i, j)));
  return c;
}

StructuredInverse recursion_inverse(const SymmetryProfile& profile, double x, double y) {
  if (!profile.is_strongly_symmetric) throw GraphError("recursion_inverse: graph is not strongly symmetric");
  const int diameter = profile.diameter;
  StructuredInverse out;

  if (y == 0.0) {
    if (x == 0.0) return out;
    out.values.assign(static_cast<std::size_t>(diameter + 1), 0.0);
    out.values[0] = 1.0 / x;
    out.valid = true;
    return out;
  }

  // x_l = slope[l] * x_0 + offset[l].
  std::vector<double> slope(static_cast<std::size_t>(diameter + 1)), offset(slope.size());
  slope[0] = 1.0;
  offset[0] = 0.0;
  const double degree = profile.alpha(1, 0);
  if (degree <= 0) throw GraphError("recursion_inverse: graph has no edges");

  // Diagonal equation: x x_0 + alpha_1(0) y x_1 = 1.
  slope[1] = -x / (degree * y);
  offset[1] = 1.0 / (degree * y);
  // Distance-l equation, 1 <= l <= L - 1, solved for x_{l+1}:
  // x x_l + y (alpha_{l-1}(l) x_{l-1} + alpha_l(l) x_l + alpha_{l+1}(l) x_{l+1}) = 0.
  for (int l = 1; l < diameter; ++l) {
    const double back = profile.alpha(l - 1, l), same = profile.alpha(l, l), forward = profile.alpha(l + 1, l);
    const auto li = static_cast<std::size_t>(l);
    const double scale = -1.0 / (forward * y);
    slope[li + 1] = scale * ((x + same * y) * slope[li] + back * y * slope[li - 1]);
    offset[li + 1] = scale * ((x + same * y) * offset[li] + back * y * offset[li - 1]);
  }

  // Closing equation at maximal distance L:
  // (x + alpha_L(L) y) x_L + alpha_{L-1}(L) y x_{L-1} = 0.
  const auto L = static_cast<std::size_t>(diameter);
  const double last = x + profile.alpha(diameter, diameter) * y;
  const double back = profile.alpha(diameter - 1, diameter) * y;
  const double a = last * slope[L], b = back * slope[L - 1];
  const double denominator = a + b;
  const double numerator = -(last * offset[L] + back * offset[L - 1]);
  const double magnitude = std::abs(a) + std::abs(b);
  if (!std::isfinite(denominator) || !(std::abs(denominator) > 1e-12 * magnitude)) return out;

  const double x0 = numerator / denominator;
  out.values.resize(L + 1);
  for (std::size_t l = 0; l <= L; ++l) out.values[l] = slope[l] * x0 + offset[l];
  out.valid = std::all_of(out.values.begin(), out.values.end(), [](double v) { return std::isfinite(v); });
  return out;
}

DistanceClassCheck verify_distance_constant_inverse(const Triangulation& t, const Eigen::MatrixXd& b, double tol) {
  const int n = t.vertex_count();
  if (b.rows() != n || b.cols() != n) throw std::invalid_argument("verify_distance_constant_inverse: size mismatch");
  const auto distances = distance_matrix(t);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-12 * sv(0)))
    throw SingularMatrixError("verify_distance_constant_inverse: matrix is numerically singular");

  DistanceClassCheck check;
  check.inverse = b.fullPivLu().inverse();
  const int classes = distances.maxCoeff() + 1;
  std::vector<double> lo(static_cast<std::size_t>(classes), std::numeric_limits<double>::infinity());
  std::vector<double> hi(static_cast<std::size_t>(classes), -std::numeric_limits<double>::infinity());
  std::vector<double> sum(static_cast<std::size_t>(classes), 0.0);
  std::vector<int> count(static_cast<std::size_t>(classes), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto l = static_cast<std::size_t>(distances(i, j));
      const double c = check.inverse(i, j);
      lo[l] = std::min(lo[l], c);
      hi[l] = std::max(hi[l], c);
      sum[l] += c;
      ++count[l];
    }
  check.constant = true;
  for (std::size_t l = 0; l < lo.size(); ++l) {
    check.spreads.push_back(hi[l] - lo[l]);
    check.class_values.push_back(sum[l] / count[l]);
    if (!(check.spreads.back() < tol)) check.constant = false;
  }
  return check;
}

DistanceClassCheck verify_distance_constant_inverse(const Triangulation& t, const PatternMatrix& b, double tol) {
  return verify_distance_constant_inverse(t, b.dense(t), tol);
}

}  // namespace cotandet
