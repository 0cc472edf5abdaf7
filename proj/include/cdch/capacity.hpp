#ifndef CDCH_CAPACITY_HPP
#define CDCH_CAPACITY_HPP

#include "cdch/elliptic.hpp"
#include "cdch/geometry.hpp"
#include "cdch/pcg.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <vector>

namespace cdch {

/// Condenser (K, U) with U = B(center, outer_radius) and K one of a few
/// compact shapes. Rasterized on a lattice that has `center` as a node.
struct CondenserSpec {
  enum class Compact { empty, disk, nearest_node, node_set };

  Point center = Point::Zero();
  double outer_radius = 1.0;
  Compact k = Compact::disk;
  Point k_center = Point::Zero();  // disk centre, or the point snapped to a node
  double k_radius = 0.5;
  std::function<bool(const Point&)> k_contains;  // node_set membership

  static CondenserSpec disks(const Point& center, double k_radius, double outer_radius);
  static CondenserSpec point(const Point& center, const Point& at, double outer_radius);
  static CondenserSpec empty(const Point& center, double outer_radius);
  static CondenserSpec node_set(const Point& center, double outer_radius,
                                std::function<bool(const Point&)> contains);
};

/// Node roles on a capacity lattice.
enum class CapacityNode : std::uint8_t { free = 0, compact = 1, outside = 2 };

/// Discrete Dirichlet energy of the potential equal to 1 on `compact` nodes,
/// 0 on `outside` nodes and discrete-harmonic on `free` nodes of an
/// (nx + 1) x (ny + 1) lattice. Independent of the spacing in two dimensions.
double lattice_capacity(int nx, int ny, const std::vector<CapacityNode>& roles,
                        const SolverSettings& settings = {});

/// cap(K, U) on a lattice of spacing 2 * outer_radius / resolution.
/// Throws DegenerateCondenser when a nonempty K or U \ K has no nodes and
/// InvalidSpec when K comes closer than 2h to the edge of U.
double variational_capacity(const CondenserSpec& cond, int resolution,
                            const SolverSettings& settings = {});

struct ScanOptions {
  int samples = 512;          // all boundary nodes when there are at most this many
  int scales = 4;             // dyadic radii extent/4 * 2^-j, stopping at 8h
  std::vector<double> radii;  // explicit radii override `scales`
  int max_local_cells = 128;  // local lattices are coarsened beyond this many cells per 4R
  unsigned seed = 42;
  SolverSettings solver{};
};

struct ScanSample {
  Point xi = Point::Zero();
  double R = 0.0;
  double ratio = 0.0;
};

struct CdcReport {
  std::vector<ScanSample> samples;
  double gamma_min = 0.0;
  /// Largest |rho(xi, R/2) / rho(xi, R) - 1| over samples at consecutive scales.
  double scale_variation = 0.0;
  /// (R, min over xi of rho(xi, R)), largest R first.
  std::vector<std::pair<double, double>> minima_by_radius;
  /// max / min - 1 over `minima_by_radius`.
  double minimum_spread = 0.0;
};

/// Boundary nodes used by the scans: all of them, or a seeded subsample.
std::vector<int> sample_boundary(const DomainGrid& grid, int samples, unsigned seed = 42);

/// Scan radii for `grid` under `options`.
std::vector<double> scan_radii(const DomainGrid& grid, const ScanOptions& options);

/// cap(closed B(xi, R) minus Omega, B(xi, 2R)) / cap(closed B(xi, R), B(xi, 2R)) on a
/// lattice aligned with the grid. `xi` must be a grid node.
double cdc_ratio(const DomainGrid& grid, int xi_node, double R, const ScanOptions& options = {});

CdcReport cdc_scan(const DomainGrid& grid, const ScanOptions& options = {});

/// |closed B(xi, R) minus Omega| / R^2 by node counting: exterior nodes and
/// nodes off the grid weigh h^2, boundary nodes h^2 / 2.
double vdc_ratio(const DomainGrid& grid, int xi_node, double R);

CdcReport vdc_scan(const DomainGrid& grid, const ScanOptions& options = {});

struct PerfectnessReport {
  bool perfect = true;
  Point witness = Point::Zero();
  double witness_radius = 0.0;
  long annuli_checked = 0;
};

/// E is the set of non-interior nodes together with everything outside the
/// grid box. Checks that E meets B(x, R) minus B(x, cR) for sampled boundary
/// nodes x and dyadic R from the box extent down to the lattice limit.
PerfectnessReport uniform_perfectness_scan(const DomainGrid& grid, double c,
                                           const ScanOptions& options = {});

/// Same test for a compact set given as a union of closed segments, sampled at
/// segment endpoints and midpoints, for dyadic R below diam(E) and above `r_min`.
struct Segment {
  Point a;
  Point b;
};
PerfectnessReport uniform_perfectness_segments(const std::vector<Segment>& pieces, double c,
                                               double r_min);

/// Level-`level` Cantor prefractal on [0, 1] x {0} with middle-third gaps.
std::vector<Segment> cantor_segments(int level);

struct HardyReport {
  double estimate = 0.0;
  Eigen::VectorXd eigenfield;  // per node, unit weighted norm
  int iterations = 0;
  bool converged = false;
  std::vector<std::pair<int, double>> trace;  // (resolution, estimate)
};

struct HardyOptions {
  double tol = 1e-6;    // relative change of the Rayleigh quotient
  int max_iter = 200;   // inverse iteration cap
  SolverSettings solver{1e-9};
};

/// Lumped Hardy weights h^2 / max(delta, h/2)^2 on the interior nodes.
Eigen::VectorXd hardy_weights(const DomainGrid& grid);

/// Interior nodes whose four cells have every corner in the closure of
/// Omega. For convex domains their hat functions span a subspace of H^1_0.
DofMap conforming_dofs(const DomainGrid& grid);

/// Smallest eigenvalue of K phi = c W phi over the conforming nodes, by
/// inverse iteration. Throws
/// NoConvergence when the cap is hit without meeting `tol`.
HardyReport hardy_constant(const DomainGrid& grid, const HardyOptions& options = {});

/// Runs hardy_constant at each resolution and fills the trace.
HardyReport hardy_refinement(const DomainSpec& spec, const std::vector<int>& resolutions,
                             const HardyOptions& options = {});

struct BarrierReport {
  double c = 0.0;   // largest c with (K U)_i >= c W_i U_i on the checked nodes
  double C = 0.0;   // smallest C with delta^alpha / C <= U <= C delta^alpha
  bool supersolution = false;  // c above roundoff (1e-10)
  Point worst = Point::Zero();
  int checked = 0;
};

/// Checks the discrete barrier inequalities for a nodal field U (boundary
/// values included). `region` restricts the nodes that are checked.
BarrierReport verify_strong_barrier(const DomainGrid& grid, const Eigen::VectorXd& U, double alpha,
                                    const std::function<bool(const Point&)>& region = {});

/// delta^alpha at every node.
Eigen::VectorXd distance_power(const DomainGrid& grid, double alpha);

/// w^alpha where -Laplace w = 1 in Omega, w = 0 outside. Unlike delta^alpha it
/// stays superharmonic at reentrant corners.
Eigen::VectorXd torsion_power(const DomainGrid& grid, double alpha,
                              const SolverSettings& settings = {});

}  // namespace cdch

#endif  // CDCH_CAPACITY_HPP
