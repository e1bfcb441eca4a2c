#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cotandet/mesh.hpp"

namespace cotandet {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegerOverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

using DistanceMatrix = Eigen::MatrixXi;
using PathCountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// All-pairs graph distances by BFS. Throws GraphError on a disconnected graph.
DistanceMatrix distance_matrix(const Triangulation& t);

/// Two vertex pairs at the same distance whose alpha_s counts differ.
struct SymmetryWitness {
  std::pair<int, int> first;
  std::pair<int, int> second;
  int distance = 0;
  int s = 0;
  int first_count = 0;
  int second_count = 0;
};

/// alpha_s(i, j) = number of neighbours of i at distance s from j.
struct SymmetryProfile {
  DistanceMatrix distances;
  int diameter = 0;
  /// Common vertex degree alpha_1(0), or nullopt if the graph is not regular.
  std::optional<int> degree;
  /// (distance l, s) -> alpha_s(l), for every class on which the count is constant.
  std::map<std::pair<int, int>, int> alpha_table;
  bool is_strongly_symmetric = false;
  std::optional<SymmetryWitness> witness;

  /// alpha_s(l), zero when absent from the table. Throws if the class is not constant.
  int alpha(int s, int distance) const;
};

SymmetryProfile symmetry_profile(const Triangulation& t);

/// 0/1 adjacency matrix.
Eigen::MatrixXd adjacency_matrix(const Triangulation& t);

/// A^m with exact 64-bit arithmetic; IntegerOverflowError instead of wraparound.
PathCountMatrix path_count_matrix(const Triangulation& t, int m_steps);

/// Number of length-m walks from i to j, i.e. (A^m)_ij.
std::int64_t path_count(const Triangulation& t, int m_steps, int i, int j);

/// B = x I + y A over a triangulation's edge graph.
struct PatternMatrix {
  double diagonal = 0.0;
  double edge = 0.0;

  Eigen::MatrixXd dense(const Triangulation& t) const;
};

/// Entries of (x I + y (J - I))^{-1} for the n x n constant-pattern matrix.
struct CompletePatternInverse {
  double diagonal = 0.0;
  double off_diagonal = 0.0;
};

/// Closed-form inverse; SingularMatrixError when (x - y)(x + (n - 1) y) vanishes
/// (|.| <= 1e-12 * max(|x|, |y|, 1)^2).
CompletePatternInverse complete_pattern_inverse(int n, double x, double y);

/// Inverse of x I + y A with c_ij = values[L(i, j)].
struct StructuredInverse {
  std::vector<double> values;
  bool valid = false;

  /// Dense C with c_ij = values[L(i, j)].
  Eigen::MatrixXd reconstruct(const DistanceMatrix& distances) const;
};

/// Solves B C = I under the ansatz c_ij = x_{L(i,j)} for a strongly symmetric
/// graph by expressing x_1..x_L affinely in x_0 and closing the system with
/// the equation for pairs at maximal distance. Returns valid = false when x
/// sits on (or numerically next to) a root of the closing denominator.
/// Throws GraphError if the profile is not strongly symmetric.
StructuredInverse recursion_inverse(const SymmetryProfile& profile, double x, double y);

struct DistanceClassCheck {
  bool constant = false;
  /// max - min of the inverse's entries per distance class, indexed by distance.
  std::vector<double> spreads;
  /// Mean entry per distance class.
  std::vector<double> class_values;
  Eigen::MatrixXd inverse;
};

/// Inverts b densely and checks whether its entries depend only on graph distance.
/// Throws SingularMatrixError when b is numerically singular.
DistanceClassCheck verify_distance_constant_inverse(const Triangulation& t, const Eigen::MatrixXd& b, double tol);
DistanceClassCheck verify_distance_constant_inverse(const Triangulation& t, const PatternMatrix& b, double tol);

}  // namespace cotandet
