#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cotandet/mesh.hpp"
#include "cotandet/metric.hpp"

namespace cotandet {

class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LaplaceKind {
  /// (L f)(i) = sum_j w_ij (f(i) - f(j)); symmetric.
  cotan,
  /// Row i of the cotan matrix divided by the local area element A_i.
  normalized,
};

std::string_view to_string(LaplaceKind kind);
std::optional<LaplaceKind> laplace_kind_from_string(std::string_view name);

/// w_ij = cot(alpha_ij) + cot(beta_ij), indexed like Triangulation::edges().
/// Negative where the opposite angles are obtuse enough.
using EdgeWeights = std::vector<double>;

EdgeWeights cotan_weights(const Triangulation& t, const DiscreteMetric& m);

struct LaplaceMatrix {
  Eigen::MatrixXd entries;
  LaplaceKind kind = LaplaceKind::cotan;
  /// Local area elements used for the normalized kind; empty for cotan.
  Eigen::VectorXd areas;

  Eigen::Index size() const { return entries.rows(); }
  /// Symmetric matrix with the same spectrum: the matrix itself for cotan,
  /// A^{-1/2} W A^{-1/2} for normalized.
  Eigen::MatrixXd symmetrized() const;
};

/// Assembles from precomputed weights (off-diagonal -w_ij, diagonal sum of w_ij).
LaplaceMatrix assemble(const Triangulation& t, const EdgeWeights& weights, LaplaceKind kind = LaplaceKind::cotan,
                       const std::vector<double>& areas = {});

LaplaceMatrix assemble(const Triangulation& t, const DiscreteMetric& m, LaplaceKind kind);

struct SpectrumResult {
  /// Ascending.
  std::vector<double> eigenvalues;
  /// Number of eigenvalues treated as zero (the smallest-magnitude ones).
  int kernel_dim = 0;
  /// Number of eigenvalues below the relative zero threshold.
  int threshold_kernel_dim = 0;
  double zero_threshold = 0.0;
  double log_pseudo_det = 0.0;
  /// exp(log_pseudo_det); +inf on overflow.
  double pseudo_det = 0.0;
  /// Non-fatal diagnostics, e.g. more near-zero eigenvalues than the expected kernel.
  std::vector<std::string> warnings;
};

/// Relative threshold tau: |lambda| < tau * max(1, lambda_max) counts as zero.
inline constexpr double kZeroEigenvalueTolerance = 1e-9;

/// Sorted eigenvalues and log pseudo-determinant.
///
/// Without expected_kernel_dim every eigenvalue under the relative threshold is
/// dropped. With it, exactly that many smallest-magnitude eigenvalues are
/// dropped; SpectralError is thrown if any of them exceeds the threshold.
/// SpectralError is also thrown if a retained eigenvalue is not positive.
SpectrumResult spectrum(const LaplaceMatrix& laplacian, std::optional<int> expected_kernel_dim = std::nullopt);

/// Eigenvalues of a symmetric matrix via the dense self-adjoint solver.
std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& symmetric);

/// spectrum(assemble(t, m, kind), connected_components(t)).log_pseudo_det
double log_pseudo_det(const Triangulation& t, const DiscreteMetric& m, LaplaceKind kind);

/// Moore-Penrose pseudo-inverse of a symmetric matrix, inverting only on the
/// complement of its kernel_dim smallest-magnitude eigenvalues.
Eigen::MatrixXd symmetric_pseudo_inverse(const Eigen::MatrixXd& symmetric, int kernel_dim);

/// Group inverse L^# of the Laplacian (equals the pseudo-inverse for the
/// cotan kind; D^{-1/2} S^+ D^{1/2} for the normalized kind). This is the
/// delta -> 0 limit of (L + delta)^{-1} restricted off the kernel.
Eigen::MatrixXd group_inverse(const LaplaceMatrix& laplacian, int kernel_dim);

}  // namespace cotandet
