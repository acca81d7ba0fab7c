#pragma once

#include <cstdint>
#include <vector>

#include "fieldnav/geometry.hpp"

namespace fieldnav {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Unordered 2-D targets. Coordinates must be finite and pairwise distinct
// (closer than 1e-9 m counts as a duplicate and is rejected).
struct Field {
  std::vector<Point2> targets;

  static Field from_points(std::vector<Point2> points);

  int size() const { return static_cast<int>(targets.size()); }
  void bounding_box(double& min_x, double& min_y, double& max_x, double& max_y) const;
};

// Execution policy for the pairwise Dubins cost-matrix kernel. The serial
// path is the reference implementation; the parallel one must produce
// bit-identical results.
enum class CostFill { Serial, Parallel };

// Arc marked as not traversable in a dense cost matrix. Large but finite so
// move-gain arithmetic stays well defined.
constexpr double kForbiddenArc = 1e15;

// K candidate headings per target: a node per (target, heading) pair with
// all inter-cluster Dubins distances. Intra-cluster entries are +infinity.
struct ClusterGraph {
  int n_targets = 0;
  int headings = 1;  // K
  std::vector<Configuration> node_config;
  std::vector<double> cost;  // N*N row-major, N = n_targets * K

  int num_nodes() const { return n_targets * headings; }
  int cluster_of(int node) const { return node / headings; }
};

ClusterGraph build_cluster_graph(const Field& field, int k, double rho,
                                 CostFill mode = CostFill::Parallel);

struct AtspInstance {
  int n = 0;
  std::vector<double> cost;  // n*n row-major; kForbiddenArc marks disallowed arcs
};

// Noon-Bean reduction of the cluster graph to a plain ATSP: zero-cost
// directed cycles inside each cluster, inter-cluster arcs re-sourced from the
// cyclic predecessor and shifted by `omega` (> sum of all finite costs).
// An optimal ATSP tour maps back to an optimal one-node-per-cluster tour of
// cost (ATSP cost - n_targets * omega).
struct NoonBeanReduction {
  AtspInstance atsp;
  double omega = 0.0;
  int n_clusters = 0;
  int k = 1;

  // Entry node of each cluster, in tour order. Throws if the tour is not
  // cluster-contiguous (cannot happen for tours cheaper than any tour using
  // a forbidden arc).
  std::vector<int> extract(const std::vector<int>& atsp_order) const;
};

NoonBeanReduction gtsp_to_atsp(const ClusterGraph& graph);

struct AtspOptions {
  std::uint64_t seed = 1;
  int iterations = 200;       // ILS perturbation budget
  double time_limit_s = 0.0;  // 0 disables the wall-clock cap
};

// Iterated local search for the ATSP: nearest-neighbor construction plus
// orientation-preserving Or-opt/3-opt moves with neighbor lists and
// don't-look bits, perturbed by double-bridge kicks. Deterministic for a
// fixed seed and iteration budget; never worse than the construction.
std::vector<int> solve_atsp(const AtspInstance& instance, const AtspOptions& options);

// Heuristic Euclidean TSP order (nearest-neighbor + 2-opt/Or-opt ILS).
std::vector<int> solve_etsp(const Field& field, std::uint64_t seed, int iterations);

// An ordered, oriented waypoint tour with its Dubins cost.
struct Tour {
  std::vector<int> order;                    // permutation of target indices
  std::vector<double> headings;              // per target, tour order
  std::vector<Configuration> configurations; // (target position, heading)
  bool closed = true;
  double total_cost = 0.0;
};

// Decoupled heading assignment: odd tour legs (1st, 3rd, ...) become exact
// straight lines by aligning both endpoint headings with the leg; the
// remaining legs are Dubins connections.
Tour alternating_headings(const std::vector<int>& order, const Field& field, double rho,
                          bool closed = true);

// Coupled planner: heading discretization -> Noon-Bean -> ATSP -> extraction.
Tour solve_dtsp_coupled(const Field& field, int k, double rho, const AtspOptions& options,
                        bool closed = true);

// Recomputed tour cost (sum of shortest Dubins legs, wrap-around iff closed).
double tour_cost(const Tour& tour, double rho);

// The tour's legs as Dubins paths, in order (wrap-around leg iff closed).
std::vector<DubinsPath> tour_legs(const Tour& tour, double rho);

}  // namespace fieldnav
