#include "cotandet/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "cotandet/laplacian.hpp"
#include "cotandet/mesh.hpp"
#include "cotandet/metric.hpp"
#include "cotandet/symmetry.hpp"
#include "cotandet/variation.hpp"

namespace cotandet::cli {
namespace {

using nlohmann::ordered_json;

enum class Format { json, csv };

struct RunConfig {
  std::string subcommand;
  std::string canonical;
  std::string mesh_path;
  std::optional<double> uniform;
  std::string metric_path;
  std::string kind_name = "cotan";
  LaplaceKind kind = LaplaceKind::cotan;
  double h = 0.0;
  double tol = 0.0;
  double delta = 1.0;
  std::vector<int> edges;
  std::vector<double> range{0.8, 1.2};
  int steps = 41;
  std::string convention_name = "paper";
  CurvatureConvention convention = CurvatureConvention::paper;
  std::string out_path;
  std::string format_name;
  std::optional<Format> format;
  bool constrained = false;
  bool constrained_given = false;
};

/// Input or numerical failure; maps to exit code 1.
struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Well-formed flags that do not fit the subcommand; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered_json edge_json(const Edge& e) { return ordered_json::array({e[0], e[1]}); }

ordered_json mesh_summary(const Triangulation& t) {
  return {{"vertices", t.vertex_count()},
          {"edges", t.edge_count()},
          {"triangles", t.triangle_count()},
          {"euler_characteristic", t.euler_characteristic()}};
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

class Session {
 public:
  Session(const RunConfig& config, std::ostream& err) : config_(config), err_(err) {}

  const Triangulation& mesh() {
    if (!mesh_) {
      if (!config_.canonical.empty()) {
        const auto name = canonical_from_string(config_.canonical);
        if (!name) throw UsageError("unknown canonical triangulation '" + config_.canonical + "'");
        mesh_ = build_canonical(*name);
      } else if (!config_.mesh_path.empty()) {
        mesh_ = load(config_.mesh_path);
      } else {
        throw UsageError("a triangulation source is required (--canonical NAME or --mesh PATH)");
      }
    }
    return *mesh_;
  }

  const DiscreteMetric& metric() {
    if (!metric_) {
      if (!config_.metric_path.empty())
        metric_ = load_metric(mesh(), config_.metric_path);
      else
        metric_ = uniform_metric(mesh(), config_.uniform.value_or(1.0));
      require_valid_metric(mesh(), *metric_);
    }
    return *metric_;
  }

  Format format(Format fallback, bool csv_supported) const {
    const Format f = config_.format.value_or(fallback);
    if (f == Format::csv && !csv_supported)
      throw UsageError("subcommand '" + config_.subcommand + "' does not support --format csv");
    return f;
  }

  void emit(const std::string& body, std::ostream& out) const {
    if (config_.out_path.empty()) {
      out << body;
      return;
    }
    std::ofstream file(config_.out_path, std::ios::binary);
    if (!file) throw Failure("cannot write output file " + config_.out_path);
    file << body;
    if (!file) throw Failure("failed writing output file " + config_.out_path);
  }

  void emit(const ordered_json& j, std::ostream& out) const { emit(j.dump(2) + "\n", out); }

  void warn(const std::vector<std::string>& warnings) const {
    for (const auto& w : warnings) err_ << "warning: " << w << "\n";
  }

 private:
  const RunConfig& config_;
  std::ostream& err_;
  std::optional<Triangulation> mesh_;
  std::optional<DiscreteMetric> metric_;
};

int cmd_validate(const RunConfig& config, Session& s, std::ostream& out) {
  s.format(Format::json, false);
  ordered_json j;
  try {
    s.mesh();
  } catch (const ValidationError& e) {
    j["valid"] = false;
    j["error"] = e.what();
    s.emit(j, out);
    return kExitFailure;
  }
  const auto& t = s.mesh();
  const auto report = validate_closed(t);
  j["valid"] = report.is_closed && report.is_connected;
  j["source"] = config.canonical.empty() ? config.mesh_path : config.canonical;
  j["mesh"] = mesh_summary(t);
  j["is_closed"] = report.is_closed;
  j["is_connected"] = report.is_connected;
  j["is_complete"] = is_complete(t);
  ordered_json offending = ordered_json::array();
  for (const auto& e : report.offending_edges) offending.push_back(edge_json(e));
  j["offending_edges"] = offending;
  s.emit(j, out);
  return j["valid"].get<bool>() ? kExitOk : kExitFailure;
}

int cmd_curvature(const RunConfig& config, Session& s, std::ostream& out) {
  const auto format = s.format(Format::json, true);
  const auto& t = s.mesh();
  const auto k = gaussian_curvature(t, s.metric(), config.convention);
  double sum = 0.0;
  for (double v : k.values) sum += v;
  const double expected = config.convention == CurvatureConvention::paper
                              ? std::numbers::pi * (t.vertex_count() - static_cast<double>(t.triangle_count()))
                              : 2.0 * std::numbers::pi * t.euler_characteristic();
  if (format == Format::csv) {
    std::string body = "vertex,curvature\n";
    for (std::size_t i = 0; i < k.values.size(); ++i) body += std::to_string(i) + "," + format_double(k.values[i]) + "\n";
    s.emit(body, out);
    return kExitOk;
  }
  ordered_json j;
  j["convention"] = std::string(to_string(config.convention));
  j["values"] = k.values;
  j["sum"] = sum;
  j["expected_sum"] = expected;
  s.emit(j, out);
  return kExitOk;
}

int cmd_spectrum(const RunConfig& config, Session& s, std::ostream& out) {
  const auto format = s.format(Format::json, true);
  const auto& t = s.mesh();
  const auto result = spectrum(assemble(t, s.metric(), config.kind), connected_components(t));
  s.warn(result.warnings);
  if (format == Format::csv) {
    std::string body = "index,eigenvalue\n";
    for (std::size_t i = 0; i < result.eigenvalues.size(); ++i)
      body += std::to_string(i) + "," + format_double(result.eigenvalues[i]) + "\n";
    s.emit(body, out);
    return kExitOk;
  }
  ordered_json j;
  j["kind"] = std::string(to_string(config.kind));
  j["eigenvalues"] = result.eigenvalues;
  j["kernel_dim"] = result.kernel_dim;
  j["threshold_kernel_dim"] = result.threshold_kernel_dim;
  j["zero_threshold"] = result.zero_threshold;
  j["log_pseudo_det"] = result.log_pseudo_det;
  j["pseudo_det"] = result.pseudo_det;
  j["warnings"] = result.warnings;
  s.emit(j, out);
  return kExitOk;
}

int cmd_detlog(const RunConfig& config, Session& s, std::ostream& out) {
  s.format(Format::json, false);
  ordered_json j;
  j["kind"] = std::string(to_string(config.kind));
  j["log_pseudo_det"] = log_pseudo_det(s.mesh(), s.metric(), config.kind);
  s.emit(j, out);
  return kExitOk;
}

ordered_json witness_json(const SymmetryWitness& w) {
  return {{"first", ordered_json::array({w.first.first, w.first.second})},
          {"second", ordered_json::array({w.second.first, w.second.second})},
          {"distance", w.distance},
          {"s", w.s},
          {"first_count", w.first_count},
          {"second_count", w.second_count}};
}

int cmd_symmetry(const RunConfig&, Session& s, std::ostream& out) {
  s.format(Format::json, false);
  const auto p = symmetry_profile(s.mesh());
  ordered_json j;
  j["is_strongly_symmetric"] = p.is_strongly_symmetric;
  j["diameter"] = p.diameter;
  j["degree"] = p.degree ? ordered_json(*p.degree) : ordered_json(nullptr);
  ordered_json alpha = ordered_json::array();
  for (const auto& [key, value] : p.alpha_table) alpha.push_back({{"distance", key.first}, {"s", key.second}, {"alpha", value}});
  j["alpha"] = alpha;
  j["witness"] = p.witness ? witness_json(*p.witness) : ordered_json(nullptr);
  s.emit(j, out);
  return kExitOk;
}

int cmd_inverse_structure(const RunConfig& config, Session& s, std::ostream& out) {
  s.format(Format::json, false);
  const auto& t = s.mesh();
  const double tol = config.tol > 0.0 ? config.tol : 1e-10;
  const auto laplacian = assemble(t, s.metric(), config.kind);
  const Eigen::MatrixXd b =
      laplacian.entries + config.delta * Eigen::MatrixXd::Identity(laplacian.size(), laplacian.size());
  const auto check = verify_distance_constant_inverse(t, b, tol);

  ordered_json j;
  j["kind"] = std::string(to_string(config.kind));
  j["delta"] = config.delta;
  j["tol"] = tol;
  j["distance_constant"] = check.constant;
  j["spreads"] = check.spreads;
  j["class_values"] = check.class_values;

  // The recursion applies when B = x I + y A on a strongly symmetric graph.
  ordered_json recursion;
  const auto profile = symmetry_profile(t);
  const Edge first = t.edges().front();
  const double x = b(0, 0), y = b(first[0], first[1]);
  const double pattern_error = (b - PatternMatrix{x, y}.dense(t)).cwiseAbs().maxCoeff();
  if (!profile.is_strongly_symmetric) {
    recursion["applicable"] = false;
    recursion["reason"] = "graph is not strongly symmetric";
  } else if (pattern_error > tol * std::max(1.0, std::abs(x))) {
    recursion["applicable"] = false;
    recursion["reason"] = "matrix is not of the form x I + y A";
  } else {
    const auto inv = recursion_inverse(profile, x, y);
    recursion["applicable"] = true;
    recursion["x"] = x;
    recursion["y"] = y;
    recursion["valid"] = inv.valid;
    if (inv.valid) {
      recursion["values"] = inv.values;
      recursion["max_abs_difference"] = (inv.reconstruct(profile.distances) - check.inverse).cwiseAbs().maxCoeff();
    }
  }
  j["recursion"] = recursion;
  s.emit(j, out);
  return kExitOk;
}

ordered_json probe_json(const DirectionProbe& p) {
  return {{"label", p.label},
          {"fd_derivative", p.fd_derivative},
          {"trace_derivative", p.trace_derivative},
          {"difference", p.difference}};
}

int cmd_stationarity(const RunConfig& config, Session& s, std::ostream& out) {
  s.format(Format::json, false);
  const double h = config.h > 0.0 ? config.h : kDefaultGradientStep;
  const double tol = config.tol > 0.0 ? config.tol : kDefaultStationarityTolerance;
  const auto report = check_stationarity(s.mesh(), s.metric(), config.kind, h, tol);
  s.warn(report.warnings);
  ordered_json j;
  j["kind"] = std::string(to_string(report.kind));
  j["area_constrained"] = report.area_constrained;
  j["h"] = report.h;
  j["tol"] = report.tol;
  j["max_abs_derivative"] = report.max_abs_derivative;
  j["pass"] = report.pass;
  ordered_json probes = ordered_json::array();
  for (const auto& p : report.probes) probes.push_back(probe_json(p));
  j["probes"] = probes;
  j["warnings"] = report.warnings;
  s.emit(j, out);
  return report.pass ? kExitOk : kExitFailure;
}

int cmd_hessian(const RunConfig& config, Session& s, std::ostream& out) {
  s.format(Format::json, false);
  const double h = config.h > 0.0 ? config.h : kDefaultHessianStep;
  const bool constrained = config.constrained_given ? config.constrained : config.kind == LaplaceKind::normalized;
  const auto report = fd_hessian(s.mesh(), s.metric(), config.kind, h, constrained);
  s.warn(report.warnings);
  ordered_json j;
  j["kind"] = std::string(to_string(report.kind));
  j["constrained"] = report.constrained;
  j["h"] = report.h;
  j["eigenvalues"] = vector_json(report.eigenvalues);
  j["min_eigenvalue"] = report.eigenvalues.minCoeff();
  j["hessian"] = matrix_json(report.hessian);
  if (report.constrained) {
    j["multiplier"] = report.multiplier;
    j["raw_hessian"] = matrix_json(report.raw_hessian);
    j["directions"] = matrix_json(report.directions);
  }
  j["warnings"] = report.warnings;
  s.emit(j, out);
  return kExitOk;
}

std::pair<Edge, Edge> sweep_edges(const RunConfig& config, const Triangulation& t) {
  if (!config.edges.empty()) {
    if (config.edges.size() != 4) throw UsageError("--edges expects four vertex indices a0,a1,b0,b1");
    Edge a{config.edges[0], config.edges[1]}, b{config.edges[2], config.edges[3]};
    for (auto* e : {&a, &b}) {
      if (!t.edge_index((*e)[0], (*e)[1]))
        throw Failure("sweep: (" + std::to_string((*e)[0]) + "," + std::to_string((*e)[1]) + ") is not an edge");
      if ((*e)[0] > (*e)[1]) std::swap((*e)[0], (*e)[1]);
    }
    return {a, b};
  }
  // Default: the first edge and the first edge disjoint from it.
  const Edge a = t.edges().front();
  for (const auto& e : t.edges())
    if (e[0] != a[0] && e[0] != a[1] && e[1] != a[0] && e[1] != a[1]) return {a, e};
  return {a, t.edges()[1]};
}

int cmd_sweep(const RunConfig& config, Session& s, std::ostream& out) {
  const auto format = s.format(Format::csv, true);
  if (config.range.size() != 2) throw UsageError("--range expects LO,HI");
  const auto& t = s.mesh();
  const auto [a, b] = sweep_edges(config, t);
  SweepGrid grid;
  try {
    grid = sweep_two_edges(t, s.metric(), a, b, config.range[0], config.range[1], config.steps, config.kind);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (format == Format::csv) {
    s.emit(sweep_csv(grid), out);
    return kExitOk;
  }
  ordered_json j;
  j["edge_a"] = edge_json(grid.edge_a);
  j["edge_b"] = edge_json(grid.edge_b);
  j["kind"] = std::string(to_string(grid.kind));
  j["range"] = {grid.lo, grid.hi};
  j["steps"] = grid.steps;
  j["axis"] = grid.axis;
  j["log_det"] = matrix_json(grid.values);
  int invalid = 0, failed = 0;
  for (auto c : grid.status) {
    invalid += c == SweepCell::invalid_metric;
    failed += c == SweepCell::spectral_failure;
  }
  j["invalid_metric_cells"] = invalid;
  j["spectral_failure_cells"] = failed;
  s.emit(j, out);
  return kExitOk;
}

struct Subcommand {
  const char* name;
  const char* description;
  std::function<int(const RunConfig&, Session&, std::ostream&)> handler;
  bool metric;
  bool kind;
};

void add_mesh_flags(CLI::App* sub, RunConfig& c) {
  auto* canonical = sub->add_option("--canonical", c.canonical, "Built-in triangulation")
                        ->check(CLI::IsMember({"tetrahedron", "csaszar_k7", "octahedron", "torus_9", "icosahedron",
                                               "triangular_bipyramid"}));
  auto* mesh = sub->add_option("--mesh", c.mesh_path, "Triangulation file");
  canonical->excludes(mesh);
}

void add_metric_flags(CLI::App* sub, RunConfig& c) {
  auto* uniform =
      sub->add_option("--uniform", c.uniform, "Uniform edge length (default 1.0)")->check(CLI::PositiveNumber);
  auto* metric = sub->add_option("--metric", c.metric_path, "Edge-length file");
  uniform->excludes(metric);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Log-determinants of cotan Laplacians on closed triangulations", "cotandet"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");

  const std::vector<Subcommand> table{
      {"validate", "Closed-surface report for a triangulation", cmd_validate, false, false},
      {"curvature", "Discrete Gaussian curvature per vertex", cmd_curvature, true, false},
      {"spectrum", "Laplacian eigenvalues and log pseudo-determinant", cmd_spectrum, true, true},
      {"detlog", "Log pseudo-determinant of the Laplacian", cmd_detlog, true, true},
      {"symmetry", "Distance profile and strong-symmetry classification", cmd_symmetry, false, false},
      {"inverse-structure", "Distance-class structure of (L + delta I)^-1", cmd_inverse_structure, true, true},
      {"stationarity", "Finite-difference gradient check of log det'", cmd_stationarity, true, true},
      {"hessian", "Finite-difference Hessian of log det'", cmd_hessian, true, true},
      {"sweep", "log det' over a grid of two edge lengths", cmd_sweep, true, true},
  };

  for (const auto& entry : table) {
    auto* sub = app.add_subcommand(entry.name, entry.description);
    sub->set_help_flag("--help", "Print this help message and exit");
    add_mesh_flags(sub, c);
    if (entry.metric) add_metric_flags(sub, c);
    if (entry.kind)
      sub->add_option("--kind", c.kind_name, "Laplacian kind")->check(CLI::IsMember({"cotan", "normalized"}))->capture_default_str();
    sub->add_option("--out", c.out_path, "Write results to PATH instead of stdout");
    sub->add_option("--format", c.format_name,
                    std::string(entry.name) == "sweep" ? "Output format (default csv)" : "Output format (default json)")->check(CLI::IsMember({"json", "csv"}));
  }
  auto sub = [&](const std::string& name) { return app.get_subcommand(name); };

  sub("curvature")
      ->add_option("--convention", c.convention_name, "Curvature constant: paper (pi) or standard (2 pi)")
      ->check(CLI::IsMember({"paper", "standard"}))
      ->capture_default_str();
  sub("inverse-structure")
      ->add_option("--delta", c.delta, "Diagonal shift delta")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub("inverse-structure")->add_option("--tol", c.tol, "Spread tolerance per distance class")->check(CLI::PositiveNumber)->default_str("1e-10");
  sub("stationarity")->add_option("--h", c.h, "Finite-difference step")->check(CLI::PositiveNumber)->default_str("1e-5");
  sub("stationarity")->add_option("--tol", c.tol, "Max-norm gradient tolerance")->check(CLI::PositiveNumber)->default_str("1e-6");
  sub("hessian")->add_option("--h", c.h, "Finite-difference step")->check(CLI::PositiveNumber)->default_str("1e-3");
  auto* constrained = sub("hessian")->add_flag(
      "--constrained,!--unconstrained", c.constrained,
      "Restrict to the total-area level set (default: on for normalized, off for cotan)");
  sub("sweep")
      ->add_option("--edges", c.edges, "Swept edges a0,a1,b0,b1 (default: first edge and a disjoint one)")
      ->delimiter(',')
      ->expected(4);
  sub("sweep")
      ->add_option("--range", c.range, "Length range LO,HI")
      ->delimiter(',')
      ->expected(2)
      ->check(CLI::PositiveNumber)
      ->default_str("0.8,1.2");
  sub("sweep")->add_option("--steps", c.steps, "Grid points per axis")->check(CLI::Range(2, 100000))->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  c.subcommand = app.get_subcommands().front()->get_name();
  c.constrained_given = constrained->count() > 0;
  c.kind = *laplace_kind_from_string(c.kind_name);
  c.convention = c.convention_name == "standard" ? CurvatureConvention::standard : CurvatureConvention::paper;
  if (!c.format_name.empty()) c.format = c.format_name == "csv" ? Format::csv : Format::json;

  const auto it = std::find_if(table.begin(), table.end(), [&](const Subcommand& s) { return c.subcommand == s.name; });
  if (it == table.end()) {
    err << "cotandet: no subcommand given\n";
    return kExitUsage;
  }
  Session session(c, err);
  try {
    return it->handler(c, session, out);
  } catch (const UsageError& e) {
    err << "cotandet " << c.subcommand << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "cotandet " << c.subcommand << ": " << e.what() << "\n";
    return kExitFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace cotandet::cli
