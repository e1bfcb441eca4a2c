#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cotandet/laplacian.hpp"
#include "cotandet/mesh.hpp"
#include "cotandet/metric.hpp"

namespace cotandet {

/// Rank of the Laplacian changed inside a finite-difference stencil.
class KernelChangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-edge perturbation of a metric.
using PerturbationDirection = std::vector<double>;

inline constexpr double kDefaultGradientStep = 1e-5;
inline constexpr double kDefaultHessianStep = 1e-3;
inline constexpr double kDefaultStationarityTolerance = 1e-6;
inline constexpr double kAreaGradientStep = 1e-6;

/// log det' of the Laplacian at m, requiring exactly kernel_dim near-zero
/// eigenvalues. Throws MetricError for an invalid metric and
/// KernelChangeError when the zero-eigenvalue count differs.
double pinned_log_pseudo_det(const Triangulation& t, const DiscreteMetric& m, LaplaceKind kind, int kernel_dim);

/// Two-sided difference quotient of log det' along direction.
double fd_directional_derivative(const Triangulation& t, const DiscreteMetric& m0, const PerturbationDirection& direction,
                                 LaplaceKind kind, double h = kDefaultGradientStep);

/// Central-difference gradient of log det' with respect to each edge length.
std::vector<double> fd_gradient(const Triangulation& t, const DiscreteMetric& m0, LaplaceKind kind,
                                double h = kDefaultGradientStep);

/// Central-difference gradient of the total area with respect to each edge length.
std::vector<double> fd_area_gradient(const Triangulation& t, const DiscreteMetric& m0, double h = kAreaGradientStep);

/// Orthonormal basis (|E| - 1 vectors) of the complement of the total-area gradient.
std::vector<PerturbationDirection> area_preserving_basis(const Triangulation& t, const DiscreteMetric& m0);

/// d/de log det' via tr(dL/de * L^#), with dL/de from a central difference of
/// the assembled matrix and L^# the inverse on the complement of the kernel.
double trace_formula_derivative(const Triangulation& t, const DiscreteMetric& m0, const PerturbationDirection& direction,
                                LaplaceKind kind, double h = kDefaultGradientStep);

struct DirectionProbe {
  std::string label;
  PerturbationDirection direction;
  double fd_derivative = 0.0;
  double trace_derivative = 0.0;
  double difference = 0.0;
};

struct StationarityReport {
  LaplaceKind kind = LaplaceKind::cotan;
  /// Probed along the area-preserving basis rather than coordinate directions.
  bool area_constrained = false;
  double h = kDefaultGradientStep;
  double tol = kDefaultStationarityTolerance;
  std::vector<DirectionProbe> probes;
  double max_abs_derivative = 0.0;
  bool pass = false;
  std::vector<std::string> warnings;
};

/// Probes coordinate directions for the cotan kind and the area-preserving
/// basis for the normalized kind. Passes iff every |FD derivative| < tol.
StationarityReport check_stationarity(const Triangulation& t, const DiscreteMetric& m0, LaplaceKind kind,
                                      double h = kDefaultGradientStep, double tol = kDefaultStationarityTolerance);

struct HessianReport {
  LaplaceKind kind = LaplaceKind::cotan;
  bool constrained = false;
  double h = kDefaultHessianStep;
  /// Columns are the probe directions (coordinate axes or the area-preserving basis).
  Eigen::MatrixXd directions;
  /// Symmetrized second differences of log det' along the directions.
  Eigen::MatrixXd hessian;
  /// Ascending.
  Eigen::VectorXd eigenvalues;
  /// For constrained runs: Lagrange multiplier mu = <grad F, grad A> / |grad A|^2
  /// and the area term subtracted from the raw second differences.
  double multiplier = 0.0;
  Eigen::MatrixXd raw_hessian;
  std::vector<std::string> warnings;
};

/// Second-order central-difference Hessian of log det'.
///
/// Unconstrained: along coordinate directions. Constrained: on the
/// total-area level set through m0, i.e. Z^T (H_F - mu H_A) Z for the
/// area-preserving basis Z, which is the Hessian of log det' restricted to
/// the constraint surface (the mu H_A term accounts for its curvature).
HessianReport fd_hessian(const Triangulation& t, const DiscreteMetric& m0, LaplaceKind kind,
                         double h = kDefaultHessianStep, bool constrained = false);

enum class SweepCell : std::uint8_t { ok, invalid_metric, spectral_failure };

struct SweepGrid {
  Edge edge_a{};
  Edge edge_b{};
  double lo = 0.0;
  double hi = 0.0;
  int steps = 0;
  LaplaceKind kind = LaplaceKind::cotan;
  /// Grid coordinates, shared by both axes.
  std::vector<double> axis;
  /// values(i, j) = log det' at l_a = axis[i], l_b = axis[j]; NaN when not ok.
  Eigen::MatrixXd values;
  std::vector<SweepCell> status;

  SweepCell cell(int i, int j) const { return status[static_cast<std::size_t>(i * steps + j)]; }
};

/// log det' over (l_a, l_b) in [lo, hi]^2 with the remaining lengths from m0.
/// Cells are evaluated concurrently; results do not depend on scheduling.
SweepGrid sweep_two_edges(const Triangulation& t, const DiscreteMetric& m0, Edge edge_a, Edge edge_b, double lo,
                          double hi, int steps, LaplaceKind kind = LaplaceKind::cotan);

/// CSV with header `la,lb,log_det`, row-major, `nan` for invalid cells.
std::string sweep_csv(const SweepGrid& grid);

}  // namespace cotandet
