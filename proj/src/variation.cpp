#include "cotandet/variation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

namespace cotandet {

namespace {

// Runs body(k) for k in [0, count) on a few worker threads. Each index is
// handled by exactly one thread; callers write results to slot k only.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::min(8u, std::thread::hardware_concurrency())));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t k = w; k < count; k += workers) body(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

PerturbationDirection unit_direction(std::size_t size, std::size_t axis) {
  PerturbationDirection d(size, 0.0);
  d[axis] = 1.0;
  return d;
}

std::string edge_label(const Edge& e) { return "edge(" + std::to_string(e[0]) + "," + std::to_string(e[1]) + ")"; }

DiscreteMetric perturbed(const Triangulation& t, const DiscreteMetric& m0, const PerturbationDirection& d, double step) {
  DiscreteMetric m = m0.displaced(d, step);
  const auto violations = validate_metric(t, m);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "perturbed metric (step " << step << ") is invalid: " << violations.front().message;
    throw MetricError(msg.str());
  }
  return m;
}

int kernel_dim_at(const Triangulation& t, const DiscreteMetric& m, LaplaceKind kind) {
  return spectrum(assemble(t, m, kind)).threshold_kernel_dim;
}

bool is_uniform(const DiscreteMetric& m) {
  const auto [lo, hi] = std::minmax_element(m.lengths().begin(), m.lengths().end());
  return lo != m.lengths().end() && (*hi - *lo) <= 1e-12 * *hi;
}

}  // namespace

double pinned_log_pseudo_det(const Triangulation& t, const DiscreteMetric& m, LaplaceKind kind, int kernel_dim) {
  require_valid_metric(t, m);
  const auto result = spectrum(assemble(t, m, kind), kernel_dim);
  if (result.threshold_kernel_dim != kernel_dim)
    throw KernelChangeError("kernel dimension changed from " + std::to_string(kernel_dim) + " to " +
                            std::to_string(result.threshold_kernel_dim));
  return result.log_pseudo_det;
}

double fd_directional_derivative(const Triangulation& t, const DiscreteMetric& m0, const PerturbationDirection& direction,
                                 LaplaceKind kind, double h) {
  const int kernel = kernel_dim_at(t, m0, kind);
  const double plus = pinned_log_pseudo_det(t, perturbed(t, m0, direction, h), kind, kernel);
  const double minus = pinned_log_pseudo_det(t, perturbed(t, m0, direction, -h), kind, kernel);
  return (plus - minus) / (2.0 * h);
}

std::vector<double> fd_gradient(const Triangulation& t, const DiscreteMetric& m0, LaplaceKind kind, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
  require_valid_metric(t, m0);
  const int kernel = kernel_dim_at(t, m0, kind);
  std::vector<double> grad(t.edge_count());
  parallel_for(t.edge_count(), [&](std::size_t e) {
    const auto d = unit_direction(t.edge_count(), e);
    const double plus = pinned_log_pseudo_det(t, perturbed(t, m0, d, h), kind, kernel);
    const double minus = pinned_log_pseudo_det(t, perturbed(t, m0, d, -h), kind, kernel);
    grad[e] = (plus - minus) / (2.0 * h);
  });
  return grad;
}

std::vector<double> fd_area_gradient(const Triangulation& t, const DiscreteMetric& m0, double h) {
  require_valid_metric(t, m0);
  std::vector<double> grad(t.edge_count());
  for (std::size_t e = 0; e < t.edge_count(); ++e) {
    const auto d = unit_direction(t.edge_count(), e);
    grad[e] = (total_area(t, perturbed(t, m0, d, h)) - total_area(t, perturbed(t, m0, d, -h))) / (2.0 * h);
  }
  return grad;
}

std::vector<PerturbationDirection> area_preserving_basis(const Triangulation& t, const DiscreteMetric& m0) {
  const auto grad = fd_area_gradient(t, m0);
  const auto n = static_cast<Eigen::Index>(grad.size());
  const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(grad.data(), n);
  if (!(g.norm() > 0.0)) throw std::domain_error("area_preserving_basis: total-area gradient vanishes");

  // The first Householder column spans g; the remaining columns span its orthogonal complement.
  const Eigen::MatrixXd column = g;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(column);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  std::vector<PerturbationDirection> basis;
  basis.reserve(static_cast<std::size_t>(n - 1));
  for (Eigen::Index c = 1; c < n; ++c) basis.emplace_back(q.col(c).data(), q.col(c).data() + n);
  return basis;
}

double trace_formula_derivative(const Triangulation& t, const DiscreteMetric& m0, const PerturbationDirection& direction,
                                LaplaceKind kind, double h) {
  require_valid_metric(t, m0);
  const auto base = assemble(t, m0, kind);
  const int kernel = spectrum(base).threshold_kernel_dim;

  const auto plus = assemble(t, perturbed(t, m0, direction, h), kind);
  const auto minus = assemble(t, perturbed(t, m0, direction, -h), kind);
  for (const auto* side : {&plus, &minus}) {
    const int k = spectrum(*side).threshold_kernel_dim;
    if (k != kernel)
      throw KernelChangeError("trace_formula_derivative: kernel dimension changed from " + std::to_string(kernel) +
                              " to " + std::to_string(k) + " across the stencil");
  }
  const Eigen::MatrixXd derivative = (plus.entries - minus.entries) / (2.0 * h);
  return (derivative * group_inverse(base, kernel)).trace();
}

StationarityReport check_stationarity(const Triangulation& t, const DiscreteMetric& m0, LaplaceKind kind, double h,
                                      double tol) {
  require_valid_metric(t, m0);
  StationarityReport report;
  report.kind = kind;
  report.h = h;
  report.tol = tol;
  report.area_constrained = kind == LaplaceKind::normalized;
  if (!is_uniform(m0)) report.warnings.push_back("base metric is not uniform; stationarity is not expected");

  std::vector<PerturbationDirection> directions;
  std::vector<std::string> labels;
  if (report.area_constrained) {
    directions = area_preserving_basis(t, m0);
    for (std::size_t k = 0; k < directions.size(); ++k) labels.push_back("area_basis_" + std::to_string(k));
  } else {
    for (std::size_t e = 0; e < t.edge_count(); ++e) {
      directions.push_back(unit_direction(t.edge_count(), e));
      labels.push_back(edge_label(t.edges()[e]));
    }
  }

  report.probes.resize(directions.size());
  parallel_for(directions.size(), [&](std::size_t k) {
    auto& probe = report.probes[k];
    probe.label = labels[k];
    probe.direction = directions[k];
    probe.fd_derivative = fd_directional_derivative(t, m0, directions[k], kind, h);
    probe.trace_derivative = trace_formula_derivative(t, m0, directions[k], kind, h);
    probe.difference = probe.fd_derivative - probe.trace_derivative;
  });
  for (const auto& probe : report.probes)
    report.max_abs_derivative = std::max(report.max_abs_derivative, std::abs(probe.fd_derivative));
  report.pass = report.max_abs_derivative < tol;
  return report;
}

HessianReport fd_hessian(const Triangulation& t, const DiscreteMetric& m0, LaplaceKind kind, double h,
                         bool constrained) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_hessian: step must be positive");
  require_valid_metric(t, m0);
  HessianReport report;
  report.kind = kind;
  report.constrained = constrained;
  report.h = h;
  if (!is_uniform(m0)) report.warnings.push_back("base metric is not uniform");

  const auto edges = static_cast<Eigen::Index>(t.edge_count());
  if (constrained) {
    const auto basis = area_preserving_basis(t, m0);
    report.directions.resize(edges, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t c = 0; c < basis.size(); ++c)
      report.directions.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(basis[c].data(), edges);
  } else {
    report.directions = Eigen::MatrixXd::Identity(edges, edges);
  }
  const Eigen::Index k = report.directions.cols();
  const int kernel = kernel_dim_at(t, m0, kind);

  auto direction = [&](Eigen::Index c) {
    return PerturbationDirection(report.directions.col(c).data(), report.directions.col(c).data() + edges);
  };
  auto combined = [&](Eigen::Index a, double sa, Eigen::Index b, double sb) {
    PerturbationDirection d(static_cast<std::size_t>(edges));
    for (Eigen::Index e = 0; e < edges; ++e)
      d[static_cast<std::size_t>(e)] = sa * report.directions(e, a) + sb * report.directions(e, b);
    return d;
  };

  // Second differences of an objective f along the probe directions.
  auto second_differences = [&](auto&& f) {
    const double f0 = f(m0);
    Eigen::MatrixXd out(k, k);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = a; b < k; ++b) pairs.emplace_back(a, b);
    parallel_for(pairs.size(), [&](std::size_t p) {
      const auto [a, b] = pairs[p];
      double value = 0.0;
      if (a == b) {
        const auto d = direction(a);
        value = (f(perturbed(t, m0, d, h)) - 2.0 * f0 + f(perturbed(t, m0, d, -h))) / (h * h);
      } else {
        const double pp = f(perturbed(t, m0, combined(a, 1, b, 1), h));
        const double pm = f(perturbed(t, m0, combined(a, 1, b, -1), h));
        const double mp = f(perturbed(t, m0, combined(a, -1, b, 1), h));
        const double mm = f(perturbed(t, m0, combined(a, -1, b, -1), h));
        value = (pp - pm - mp + mm) / (4.0 * h * h);
      }
      out(a, b) = value;
      out(b, a) = value;
    });
    return out;
  };

  const auto log_det = [&](const DiscreteMetric& m) { return pinned_log_pseudo_det(t, m, kind, kernel); };
  report.raw_hessian = second_differences(log_det);
  report.hessian = report.raw_hessian;

  if (constrained) {
    const auto grad_f = fd_gradient(t, m0, kind);
    const auto grad_a = fd_area_gradient(t, m0);
    double dot = 0.0, norm2 = 0.0;
    for (std::size_t e = 0; e < grad_f.size(); ++e) {
      dot += grad_f[e] * grad_a[e];
      norm2 += grad_a[e] * grad_a[e];
    }
    report.multiplier = dot / norm2;
    const auto area = [&](const DiscreteMetric& m) { return total_area(t, m); };
    report.hessian -= report.multiplier * second_differences(area);
  }

  report.hessian = 0.5 * (report.hessian + report.hessian.transpose()).eval();
  report.eigenvalues = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(report.hessian, Eigen::EigenvaluesOnly).eigenvalues();
  return report;
}

SweepGrid sweep_two_edges(const Triangulation& t, const DiscreteMetric& m0, Edge edge_a, Edge edge_b, double lo,
                          double hi, int steps, LaplaceKind kind) {
  if (steps < 2) throw std::invalid_argument("sweep_two_edges: need at least 2 steps per axis");
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("sweep_two_edges: range must satisfy 0 < lo < hi");
  const std::size_t ia = t.require_edge(edge_a[0], edge_a[1]);
  const std::size_t ib = t.require_edge(edge_b[0], edge_b[1]);
  if (ia == ib) throw std::invalid_argument("sweep_two_edges: the two edges must be distinct");
  if (m0.size() != t.edge_count()) throw MetricError("sweep_two_edges: metric does not match triangulation");

  SweepGrid grid;
  grid.edge_a = t.edges()[ia];
  grid.edge_b = t.edges()[ib];
  grid.lo = lo;
  grid.hi = hi;
  grid.steps = steps;
  grid.kind = kind;
  for (int i = 0; i < steps; ++i) grid.axis.push_back(lo + (hi - lo) * static_cast<double>(i) / (steps - 1));
  grid.values = Eigen::MatrixXd::Constant(steps, steps, std::numeric_limits<double>::quiet_NaN());
  grid.status.assign(static_cast<std::size_t>(steps * steps), SweepCell::ok);
  const int kernel = connected_components(t);

  parallel_for(grid.status.size(), [&](std::size_t cell) {
    const int i = static_cast<int>(cell) / steps, j = static_cast<int>(cell) % steps;
    DiscreteMetric m = m0;
    m[ia] = grid.axis[static_cast<std::size_t>(i)];
    m[ib] = grid.axis[static_cast<std::size_t>(j)];
    if (!validate_metric(t, m).empty()) {
      grid.status[cell] = SweepCell::invalid_metric;
      return;
    }
    try {
      grid.values(i, j) = pinned_log_pseudo_det(t, m, kind, kernel);
    } catch (const SpectralError&) {
      grid.status[cell] = SweepCell::spectral_failure;
    } catch (const KernelChangeError&) {
      grid.status[cell] = SweepCell::spectral_failure;
    }
  });
  return grid;
}

std::string sweep_csv(const SweepGrid& grid) {
  std::string out = "la,lb,log_det\n";
  char buffer[96];
  for (int i = 0; i < grid.steps; ++i)
    for (int j = 0; j < grid.steps; ++j) {
      const double v = grid.values(i, j);
      if (grid.cell(i, j) == SweepCell::ok && std::isfinite(v))
        std::snprintf(buffer, sizeof buffer, "%.17g,%.17g,%.17g\n", grid.axis[static_cast<std::size_t>(i)],
                      grid.axis[static_cast<std::size_t>(j)], v);
      else
        std::snprintf(buffer, sizeof buffer, "%.17g,%.17g,nan\n", grid.axis[static_cast<std::size_t>(i)],
                      grid.axis[static_cast<std::size_t>(j)]);
      out += buffer;
    }
  return out;
}

}  // namespace cotandet
