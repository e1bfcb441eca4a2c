#include "cotandet/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace cotandet {

std::string_view to_string(LaplaceKind kind) { return kind == LaplaceKind::cotan ? "cotan" : "normalized"; }

std::optional<LaplaceKind> laplace_kind_from_string(std::string_view name) {
  if (name == "cotan") return LaplaceKind::cotan;
  if (name == "normalized") return LaplaceKind::normalized;
  return std::nullopt;
}

EdgeWeights cotan_weights(const Triangulation& t, const DiscreteMetric& m) {
  const auto angles = corner_angles(t, m);
  EdgeWeights w(t.edge_count(), 0.0);
  std::vector<int> opposite_count(t.edge_count(), 0);
  for (std::size_t f = 0; f < t.triangle_count(); ++f) {
    const auto& sides = t.triangle_edges(f);
    for (std::size_t k = 0; k < 3; ++k) {
      // Side k is opposite corner k.
      w[sides[k]] += 1.0 / std::tan(angles[f][k]);
      ++opposite_count[sides[k]];
    }
  }
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    if (opposite_count[e] != 2) {
      const auto& edge = t.edges()[e];
      throw MeshError("cotan_weights: edge (" + std::to_string(edge[0]) + "," + std::to_string(edge[1]) + ") has " +
                      std::to_string(opposite_count[e]) + " opposite angles; triangulation must be closed");
    }
  }
  return w;
}

Eigen::MatrixXd LaplaceMatrix::symmetrized() const {
  if (kind == LaplaceKind::cotan) return entries;
  // Row i of entries is W_i / A_i, so sqrt(A_i) * entries(i, j) / sqrt(A_j) = W_ij / sqrt(A_i A_j).
  const Eigen::VectorXd root = areas.array().sqrt();
  Eigen::MatrixXd s = root.asDiagonal() * entries * root.cwiseInverse().asDiagonal();
  return 0.5 * (s + s.transpose());
}

LaplaceMatrix assemble(const Triangulation& t, const EdgeWeights& weights, LaplaceKind kind,
                       const std::vector<double>& areas) {
  if (weights.size() != t.edge_count()) throw SpectralError("assemble: weight count does not match edge count");
  const auto n = static_cast<Eigen::Index>(t.vertex_count());
  LaplaceMatrix out;
  out.kind = kind;
  out.entries = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    const Eigen::Index i = t.edges()[e][0], j = t.edges()[e][1];
    out.entries(i, j) = -weights[e];
    out.entries(j, i) = -weights[e];
    out.entries(i, i) += weights[e];
    out.entries(j, j) += weights[e];
  }
  if (kind == LaplaceKind::normalized) {
    if (areas.size() != static_cast<std::size_t>(n))
      throw SpectralError("assemble: normalized kind needs one area element per vertex");
    out.areas = Eigen::Map<const Eigen::VectorXd>(areas.data(), n);
    if ((out.areas.array() <= 0.0).any()) throw SpectralError("assemble: local area elements must be positive");
    out.entries = out.areas.cwiseInverse().asDiagonal() * out.entries;
  }
  return out;
}

LaplaceMatrix assemble(const Triangulation& t, const DiscreteMetric& m, LaplaceKind kind) {
  const auto w = cotan_weights(t, m);
  if (kind == LaplaceKind::cotan) return assemble(t, w, kind);
  return assemble(t, w, kind, local_area_elements(t, m));
}

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw SpectralError("symmetric eigensolver did not converge");
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

SpectrumResult spectrum(const LaplaceMatrix& laplacian, std::optional<int> expected_kernel_dim) {
  SpectrumResult result;
  result.eigenvalues = symmetric_eigenvalues(laplacian.symmetrized());
  const auto n = static_cast<int>(result.eigenvalues.size());
  if (n == 0) throw SpectralError("spectrum: empty matrix");

  const double largest = std::max(std::abs(result.eigenvalues.front()), std::abs(result.eigenvalues.back()));
  result.zero_threshold = kZeroEigenvalueTolerance * std::max(1.0, largest);

  std::vector<int> by_magnitude(static_cast<std::size_t>(n));
  std::iota(by_magnitude.begin(), by_magnitude.end(), 0);
  std::stable_sort(by_magnitude.begin(), by_magnitude.end(), [&](int a, int b) {
    return std::abs(result.eigenvalues[static_cast<std::size_t>(a)]) <
           std::abs(result.eigenvalues[static_cast<std::size_t>(b)]);
  });
  result.threshold_kernel_dim = static_cast<int>(std::count_if(
      result.eigenvalues.begin(), result.eigenvalues.end(), [&](double v) { return std::abs(v) < result.zero_threshold; }));

  if (expected_kernel_dim) {
    const int k = *expected_kernel_dim;
    if (k < 0 || k > n) throw SpectralError("spectrum: expected kernel dimension out of range");
    if (k > result.threshold_kernel_dim) {
      std::ostringstream msg;
      msg << "spectrum: expected kernel dimension " << k << " but only " << result.threshold_kernel_dim
          << " eigenvalue(s) are below the zero threshold " << result.zero_threshold;
      throw SpectralError(msg.str());
    }
    if (k < result.threshold_kernel_dim) {
      result.warnings.push_back("expected kernel dimension " + std::to_string(k) + " but " +
                                std::to_string(result.threshold_kernel_dim) +
                                " eigenvalues are below the zero threshold");
    }
    result.kernel_dim = k;
  } else {
    result.kernel_dim = result.threshold_kernel_dim;
  }

  std::vector<bool> dropped(static_cast<std::size_t>(n), false);
  for (int r = 0; r < result.kernel_dim; ++r) dropped[static_cast<std::size_t>(by_magnitude[static_cast<std::size_t>(r)])] = true;

  double log_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (dropped[static_cast<std::size_t>(i)]) continue;
    const double lambda = result.eigenvalues[static_cast<std::size_t>(i)];
    if (!(lambda > 0.0)) {
      std::ostringstream msg;
      msg << "spectrum: retained eigenvalue " << lambda << " is not positive; matrix is not positive semidefinite"
          << " off its kernel";
      throw SpectralError(msg.str());
    }
    log_sum += std::log(lambda);
  }
  result.log_pseudo_det = log_sum;
  result.pseudo_det = std::exp(log_sum);
  return result;
}

double log_pseudo_det(const Triangulation& t, const DiscreteMetric& m, LaplaceKind kind) {
  return spectrum(assemble(t, m, kind), connected_components(t)).log_pseudo_det;
}

Eigen::MatrixXd symmetric_pseudo_inverse(const Eigen::MatrixXd& symmetric, int kernel_dim) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) throw SpectralError("symmetric eigensolver did not converge");
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  const auto n = values.size();
  if (kernel_dim < 0 || kernel_dim > n) throw SpectralError("pseudo-inverse: kernel dimension out of range");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(values(a)) < std::abs(values(b)); });

  Eigen::VectorXd inverse_values = Eigen::VectorXd::Zero(n);
  for (auto r = static_cast<std::size_t>(kernel_dim); r < order.size(); ++r) inverse_values(order[r]) = 1.0 / values(order[r]);
  return vectors * inverse_values.asDiagonal() * vectors.transpose();
}

Eigen::MatrixXd group_inverse(const LaplaceMatrix& laplacian, int kernel_dim) {
  const Eigen::MatrixXd s_plus = symmetric_pseudo_inverse(laplacian.symmetrized(), kernel_dim);
  if (laplacian.kind == LaplaceKind::cotan) return s_plus;
  const Eigen::VectorXd root = laplacian.areas.array().sqrt();
  return root.cwiseInverse().asDiagonal() * s_plus * root.asDiagonal();
}

}  // namespace cotandet
