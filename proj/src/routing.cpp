#include "fieldnav/routing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "fieldnav/errors.hpp"

namespace fieldnav {

Field Field::from_points(std::vector<Point2> points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y)) {
      throw ValidationError("target " + std::to_string(i) + " has non-finite coordinates");
    }
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (std::hypot(points[i].x - points[j].x, points[i].y - points[j].y) < 1e-9) {
        throw ValidationError("targets " + std::to_string(i) + " and " + std::to_string(j) +
                              " coincide; deduplicate the input");
      }
    }
  }
  Field f;
  f.targets = std::move(points);
  return f;
}

void Field::bounding_box(double& min_x, double& min_y, double& max_x, double& max_y) const {
  min_x = min_y = std::numeric_limits<double>::infinity();
  max_x = max_y = -std::numeric_limits<double>::infinity();
  for (const auto& t : targets) {
    min_x = std::min(min_x, t.x);
    min_y = std::min(min_y, t.y);
    max_x = std::max(max_x, t.x);
    max_y = std::max(max_y, t.y);
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void fill_cost_rows(const std::vector<Configuration>& nodes, int k, double rho, int row_begin,
                    int row_end, std::vector<double>& cost) {
  const int n = static_cast<int>(nodes.size());
  for (int i = row_begin; i < row_end; ++i) {
    const int ci = i / k;
    for (int j = 0; j < n; ++j) {
      cost[static_cast<std::size_t>(i) * n + j] =
          (j / k == ci) ? kInf : dubins_shortest(nodes[i], nodes[j], rho).length();
    }
  }
}

}  // namespace

ClusterGraph build_cluster_graph(const Field& field, int k, double rho, CostFill mode) {
  if (field.size() < 2) {
    throw TooFewTargets("need at least 2 targets, got " + std::to_string(field.size()));
  }
  if (k < 1) throw ValidationError("heading count must be >= 1");
  if (!(rho > 0.0)) throw InvalidRadius("turning radius must be positive");

  ClusterGraph g;
  g.n_targets = field.size();
  g.headings = k;
  const int n = g.num_nodes();
  g.node_config.reserve(n);
  for (const auto& t : field.targets) {
    for (int h = 0; h < k; ++h) {
      g.node_config.emplace_back(t.x, t.y, wrap_to_pi(h * 2.0 * kPi / k));
    }
  }
  g.cost.assign(static_cast<std::size_t>(n) * n, 0.0);

  if (mode == CostFill::Parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      fill_cost_rows(g.node_config, k, rho, i, i + 1, g.cost);
    }
  } else {
    fill_cost_rows(g.node_config, k, rho, 0, n, g.cost);
  }
  return g;
}

NoonBeanReduction gtsp_to_atsp(const ClusterGraph& graph) {
  const int n = graph.num_nodes();
  const int k = graph.headings;
  NoonBeanReduction red;
  red.n_clusters = graph.n_targets;
  red.k = k;

  double sum = 0.0;
  for (double c : graph.cost) {
    if (std::isfinite(c)) sum += c;
  }
  red.omega = sum + 1.0;

  red.atsp.n = n;
  red.atsp.cost.assign(static_cast<std::size_t>(n) * n, kForbiddenArc);
  for (int i = 0; i < n; ++i) {
    const int ci = i / k;
    const int succ = ci * k + (i % k + 1) % k;  // cyclic successor inside the cluster
    for (int j = 0; j < n; ++j) {
      if (j / k == ci) {
        if (j == succ && j != i) red.atsp.cost[static_cast<std::size_t>(i) * n + j] = 0.0;
      } else {
        // Outgoing arcs carry the costs of the cyclic successor, so a tour
        // that enters a cluster at v and walks the full cycle exits paying
        // the original cost from v.
        red.atsp.cost[static_cast<std::size_t>(i) * n + j] =
            graph.cost[static_cast<std::size_t>(succ) * n + j] + red.omega;
      }
    }
  }
  return red;
}

std::vector<int> NoonBeanReduction::extract(const std::vector<int>& atsp_order) const {
  const int n = n_clusters * k;
  std::vector<int> entries;
  entries.reserve(n_clusters);
  for (int p = 0; p < n; ++p) {
    const int prev = atsp_order[(p + n - 1) % n];
    const int cur = atsp_order[p];
    if (prev / k != cur / k) entries.push_back(p);
  }
  if (static_cast<int>(entries.size()) != n_clusters) {
    throw InfeasibleInstance("ATSP tour is not cluster-contiguous");
  }
  std::vector<int> nodes;
  nodes.reserve(n_clusters);
  for (int p : entries) {
    const int entry = atsp_order[p];
    for (int step = 1; step < k; ++step) {
      const int expect = (entry / k) * k + (entry % k + step) % k;
      if (atsp_order[(p + step) % n] != expect) {
        throw InfeasibleInstance("ATSP tour does not follow the intra-cluster cycle");
      }
    }
    nodes.push_back(entry);
  }
  return nodes;
}

// ---------------------------------------------------------------------------
// ATSP iterated local search
// ---------------------------------------------------------------------------

namespace {

constexpr double kAllowedMax = 1e14;  // anything above is a forbidden arc
constexpr int kNeighbors = 16;

struct AtspSearch {
  const AtspInstance& inst;
  int n;
  std::vector<std::vector<int>> out_neigh;
  std::vector<std::vector<int>> in_neigh;
  std::vector<int> tour;
  std::vector<int> pos;
  std::deque<int> queue;
  std::vector<char> queued;

  explicit AtspSearch(const AtspInstance& instance) : inst(instance), n(instance.n) {
    build_neighbor_lists();
    pos.resize(n);
    queued.assign(n, 0);
  }

  double arc(int i, int j) const { return inst.cost[static_cast<std::size_t>(i) * n + j]; }

  void build_neighbor_lists() {
    out_neigh.assign(n, {});
    in_neigh.assign(n, {});
    std::vector<std::pair<double, int>> buf;
    for (int i = 0; i < n; ++i) {
      buf.clear();
      for (int j = 0; j < n; ++j) {
        if (j != i && arc(i, j) < kAllowedMax) buf.emplace_back(arc(i, j), j);
      }
      const auto keep = std::min<std::size_t>(buf.size(), kNeighbors);
      std::partial_sort(buf.begin(), buf.begin() + keep, buf.end());
      for (std::size_t t = 0; t < keep; ++t) out_neigh[i].push_back(buf[t].second);
    }
    for (int j = 0; j < n; ++j) {
      buf.clear();
      for (int i = 0; i < n; ++i) {
        if (j != i && arc(i, j) < kAllowedMax) buf.emplace_back(arc(i, j), i);
      }
      const auto keep = std::min<std::size_t>(buf.size(), kNeighbors);
      std::partial_sort(buf.begin(), buf.begin() + keep, buf.end());
      for (std::size_t t = 0; t < keep; ++t) in_neigh[j].push_back(buf[t].second);
    }
  }

  double cost_of(const std::vector<int>& t) const {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += arc(t[i], t[(i + 1) % n]);
    return c;
  }

  void set_tour(std::vector<int> t) {
    tour = std::move(t);
    for (int i = 0; i < n; ++i) pos[tour[i]] = i;
  }

  void enqueue(int node) {
    if (!queued[node]) {
      queued[node] = 1;
      queue.push_back(node);
    }
  }

  void enqueue_all() {
    for (int i = 0; i < n; ++i) enqueue(i);
  }

  int rel(int node, int origin_pos) const { return (pos[node] - origin_pos + n) % n; }

  // Relocate the segment of `len` nodes following `a` to just after `dest`.
  void apply_oropt(int a, int len, int dest) {
    std::vector<int> seg(len);
    const int pa = pos[a];
    for (int t = 0; t < len; ++t) seg[t] = tour[(pa + 1 + t) % n];
    std::vector<int> rest;
    rest.reserve(n - len);
    for (int t = 0; t < n - len; ++t) rest.push_back(tour[(pa + len + 1 + t) % n]);
    // rest starts at f = succ(segment) and ends at a
    std::vector<int> next;
    next.reserve(n);
    for (int node : rest) {
      next.push_back(node);
      if (node == dest) next.insert(next.end(), seg.begin(), seg.end());
    }
    set_tour(std::move(next));
  }

  // Exchange the order of the two segments between the three removed arcs
  // (a,b) (pre,d) (e,f): reconnect a->d, e->b, pre->f.
  void apply_3opt(int a, int pre, int e) {
    const int pa = pos[a];
    const int rpre = rel(pre, pa);
    const int re = rel(e, pa);
    std::vector<int> next;
    next.reserve(n);
    next.push_back(a);
    for (int t = rpre + 1; t <= re; ++t) next.push_back(tour[(pa + t) % n]);
    for (int t = 1; t <= rpre; ++t) next.push_back(tour[(pa + t) % n]);
    for (int t = re + 1; t < n; ++t) next.push_back(tour[(pa + t) % n]);
    set_tour(std::move(next));
  }

  bool try_improve(int a) {
    const int pa = pos[a];
    const int b = tour[(pa + 1) % n];

    // Or-opt: move the 1..3 nodes after a somewhere cheaper.
    for (int len = 1; len <= 3 && len <= n - 2; ++len) {
      const int e = tour[(pa + len) % n];
      const int f = tour[(pa + len + 1) % n];
      const double removed_here = arc(a, b) + arc(e, f);
      const double joined = arc(a, f);
      for (int dest : in_neigh[b]) {
        const int rdest = rel(dest, pa);
        if (rdest <= len) continue;  // inside the segment or a itself
        const int after = tour[(pos[dest] + 1) % n];
        if (after == b) continue;  // no-op
        const double gain =
            removed_here + arc(dest, after) - joined - arc(dest, b) - arc(e, after);
        if (gain > 1e-9) {
          apply_oropt(a, len, dest);
          for (int node : {a, b, e, f, dest, after}) enqueue(node);
          return true;
        }
      }
    }

    // Orientation-preserving 3-opt segment exchange.
    for (int d : out_neigh[a]) {
      if (d == b) continue;
      const int rd = rel(d, pa);
      if (rd < 2) continue;
      const int pre = tour[(pa + rd - 1) % n];
      const double g1 = arc(a, b) + arc(pre, d) - arc(a, d);
      if (g1 <= 1e-9) continue;
      for (int e : in_neigh[b]) {
        const int re = rel(e, pa);
        if (re < rd) continue;  // e must come at or after d
        const int f = tour[(pa + re + 1) % n];
        const double gain = g1 + arc(e, f) - arc(e, b) - arc(pre, f);
        if (gain > 1e-9) {
          apply_3opt(a, pre, e);
          for (int node : {a, b, pre, d, e, f}) enqueue(node);
          return true;
        }
      }
    }
    return false;
  }

  void local_search() {
    while (!queue.empty()) {
      const int a = queue.front();
      queue.pop_front();
      queued[a] = 0;
      while (try_improve(a)) {
      }
    }
  }
};

std::vector<int> nearest_neighbor_tour(const AtspInstance& inst, int start) {
  const int n = inst.n;
  std::vector<char> used(n, 0);
  std::vector<int> tour;
  tour.reserve(n);
  tour.push_back(start);
  used[start] = 1;
  int cur = start;
  for (int step = 1; step < n; ++step) {
    int best = -1;
    double best_c = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double c = inst.cost[static_cast<std::size_t>(cur) * n + j];
      if (c < best_c) {
        best_c = c;
        best = j;
      }
    }
    tour.push_back(best);
    used[best] = 1;
    cur = best;
  }
  return tour;
}

std::vector<int> double_bridge(const std::vector<int>& tour, std::mt19937_64& rng) {
  const int n = static_cast<int>(tour.size());
  int cuts[3];
  cuts[0] = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - 3));
  cuts[1] = cuts[0] + 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - cuts[0] - 2));
  cuts[2] = cuts[1] + 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - cuts[1] - 1));
  std::vector<int> next;
  next.reserve(n);
  next.insert(next.end(), tour.begin(), tour.begin() + cuts[0]);
  next.insert(next.end(), tour.begin() + cuts[1], tour.begin() + cuts[2]);
  next.insert(next.end(), tour.begin() + cuts[0], tour.begin() + cuts[1]);
  next.insert(next.end(), tour.begin() + cuts[2], tour.end());
  return next;
}

}  // namespace

std::vector<int> solve_atsp(const AtspInstance& instance, const AtspOptions& options) {
  const int n = instance.n;
  if (n < 2 || static_cast<std::size_t>(n) * n != instance.cost.size()) {
    throw ValidationError("ATSP instance needs a square matrix with n >= 2");
  }
  for (int i = 0; i < n; ++i) {
    bool any = false;
    for (int j = 0; j < n && !any; ++j) {
      any = j != i && instance.cost[static_cast<std::size_t>(i) * n + j] < kAllowedMax;
    }
    if (!any) {
      throw InfeasibleInstance("node " + std::to_string(i) + " has no allowed outgoing arc");
    }
  }
  if (n == 2) return {0, 1};

  const auto t_start = std::chrono::steady_clock::now();
  auto out_of_time = [&]() {
    if (options.time_limit_s <= 0.0) return false;
    const std::chrono::duration<double> el = std::chrono::steady_clock::now() - t_start;
    return el.count() >= options.time_limit_s;
  };

  std::mt19937_64 rng(options.seed);
  AtspSearch search(instance);

  std::vector<int> best = nearest_neighbor_tour(instance, 0);
  double best_cost = search.cost_of(best);
  for (int extra = 0; extra < 2; ++extra) {
    const int start = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    auto t = nearest_neighbor_tour(instance, start);
    const double c = search.cost_of(t);
    if (c < best_cost) {
      best = std::move(t);
      best_cost = c;
    }
  }

  search.set_tour(best);
  search.enqueue_all();
  search.local_search();
  if (search.cost_of(search.tour) < best_cost) {
    best = search.tour;
    best_cost = search.cost_of(best);
  }

  for (int it = 0; it < options.iterations && !out_of_time(); ++it) {
    // Below 4 nodes the move set already explores every directed cycle.
    if (n < 4) break;
    search.set_tour(double_bridge(best, rng));
    search.enqueue_all();
    search.local_search();
    const double c = search.cost_of(search.tour);
    if (c < best_cost - 1e-9) {
      best = search.tour;
      best_cost = c;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Euclidean TSP heuristic
// ---------------------------------------------------------------------------

namespace {

struct EtspSearch {
  const std::vector<double>& dist;
  int n;
  std::vector<std::vector<int>> neigh;
  std::vector<int> tour;
  std::vector<int> pos;

  EtspSearch(const std::vector<double>& d, int n_) : dist(d), n(n_) {
    neigh.assign(n, {});
    std::vector<std::pair<double, int>> buf;
    for (int i = 0; i < n; ++i) {
      buf.clear();
      for (int j = 0; j < n; ++j) {
        if (j != i) buf.emplace_back(dist[static_cast<std::size_t>(i) * n + j], j);
      }
      const auto keep = std::min<std::size_t>(buf.size(), kNeighbors);
      std::partial_sort(buf.begin(), buf.begin() + keep, buf.end());
      for (std::size_t t = 0; t < keep; ++t) neigh[i].push_back(buf[t].second);
    }
    pos.resize(n);
  }

  double d(int i, int j) const { return dist[static_cast<std::size_t>(i) * n + j]; }

  double cost_of(const std::vector<int>& t) const {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += d(t[i], t[(i + 1) % n]);
    return c;
  }

  void set_tour(std::vector<int> t) {
    tour = std::move(t);
    for (int i = 0; i < n; ++i) pos[tour[i]] = i;
  }

  bool improve_once() {
    // 2-opt with segment reversal (valid because the metric is symmetric).
    for (int ia = 0; ia < n; ++ia) {
      const int a = tour[ia];
      const int b = tour[(ia + 1) % n];
      for (int c : neigh[a]) {
        const int ic = pos[c];
        const int dd = tour[(ic + 1) % n];
        if (c == b || dd == a || c == a) continue;
        const double gain = d(a, b) + d(c, dd) - d(a, c) - d(b, dd);
        if (gain > 1e-9) {
          int lo = (ia + 1) % n, hi = ic;
          // reverse tour[lo..hi] cyclically
          int steps = (hi - lo + n) % n + 1;
          for (int s = 0; s < steps / 2; ++s) {
            std::swap(tour[(lo + s) % n], tour[(hi - s + n) % n]);
          }
          for (int i = 0; i < n; ++i) pos[tour[i]] = i;
          return true;
        }
      }
    }
    return false;
  }

  void local_search() {
    while (improve_once()) {
    }
  }
};

}  // namespace

std::vector<int> solve_etsp(const Field& field, std::uint64_t seed, int iterations) {
  const int n = field.size();
  if (n < 2) throw TooFewTargets("need at least 2 targets, got " + std::to_string(n));
  std::vector<double> dist(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      dist[static_cast<std::size_t>(i) * n + j] =
          std::hypot(field.targets[i].x - field.targets[j].x,
                     field.targets[i].y - field.targets[j].y);
    }
  }
  if (n == 2) return {0, 1};

  AtspInstance as_atsp{n, dist};
  std::mt19937_64 rng(seed);
  EtspSearch search(dist, n);

  std::vector<int> best = nearest_neighbor_tour(as_atsp, 0);
  search.set_tour(best);
  search.local_search();
  best = search.tour;
  double best_cost = search.cost_of(best);

  for (int it = 0; it < iterations; ++it) {
    if (n < 4) break;
    search.set_tour(double_bridge(best, rng));
    search.local_search();
    const double c = search.cost_of(search.tour);
    if (c < best_cost - 1e-9) {
      best = search.tour;
      best_cost = c;
    }
  }
  // Canonical rotation for reproducible output.
  auto it0 = std::find(best.begin(), best.end(), 0);
  std::rotate(best.begin(), it0, best.end());
  return best;
}

// ---------------------------------------------------------------------------
// Tours
// ---------------------------------------------------------------------------

namespace {

void check_permutation(const std::vector<int>& order, int n) {
  if (static_cast<int>(order.size()) != n) {
    throw ValidationError("tour order size does not match the field");
  }
  std::vector<char> seen(n, 0);
  for (int t : order) {
    if (t < 0 || t >= n || seen[t]) throw ValidationError("tour order is not a permutation");
    seen[t] = 1;
  }
}

Tour finish_tour(std::vector<int> order, std::vector<double> headings, const Field& field,
                 double rho, bool closed) {
  Tour tour;
  tour.order = std::move(order);
  tour.headings = std::move(headings);
  tour.closed = closed;
  tour.configurations.reserve(tour.order.size());
  for (std::size_t i = 0; i < tour.order.size(); ++i) {
    const Point2& p = field.targets[tour.order[i]];
    tour.configurations.emplace_back(p.x, p.y, tour.headings[i]);
  }
  tour.total_cost = tour_cost(tour, rho);
  return tour;
}

}  // namespace

Tour alternating_headings(const std::vector<int>& order, const Field& field, double rho,
                          bool closed) {
  const int w = field.size();
  check_permutation(order, w);
  const int legs = closed ? w : w - 1;

  std::vector<double> heading(w, 0.0);
  std::vector<char> assigned(w, 0);
  for (int leg = 1; leg <= legs; leg += 2) {  // odd legs, 1-indexed
    const int a = order[leg - 1];
    const int b = order[leg % w];
    const Point2& pa = field.targets[a];
    const Point2& pb = field.targets[b];
    const double dir = std::atan2(pb.y - pa.y, pb.x - pa.x);
    if (!assigned[a]) {
      heading[a] = dir;
      assigned[a] = 1;
    }
    if (!assigned[b]) {
      heading[b] = dir;
      assigned[b] = 1;
    }
  }
  // Odd target counts leave at most one heading unset; align it with its
  // incoming leg.
  for (int i = 0; i < w; ++i) {
    const int t = order[i];
    if (assigned[t]) continue;
    const int prev = order[(i + w - 1) % w];
    const Point2& pa = field.targets[prev];
    const Point2& pb = field.targets[t];
    heading[t] = std::atan2(pb.y - pa.y, pb.x - pa.x);
    assigned[t] = 1;
  }

  std::vector<double> in_tour_order(w);
  for (int i = 0; i < w; ++i) in_tour_order[i] = heading[order[i]];
  return finish_tour(order, in_tour_order, field, rho, closed);
}

Tour solve_dtsp_coupled(const Field& field, int k, double rho, const AtspOptions& options,
                        bool closed) {
  const ClusterGraph graph = build_cluster_graph(field, k, rho);
  const NoonBeanReduction red = gtsp_to_atsp(graph);
  const std::vector<int> atsp_order = solve_atsp(red.atsp, options);
  const std::vector<int> entry_nodes = red.extract(atsp_order);

  std::vector<int> order;
  std::vector<double> headings;
  order.reserve(entry_nodes.size());
  headings.reserve(entry_nodes.size());
  for (int node : entry_nodes) {
    order.push_back(graph.cluster_of(node));
    headings.push_back(graph.node_config[node].theta);
  }

  const int w = static_cast<int>(order.size());
  int rotate_to = 0;
  if (closed) {
    rotate_to = static_cast<int>(std::find(order.begin(), order.end(), 0) - order.begin());
  } else {
    // Open traversal: drop the most expensive leg of the optimized cycle.
    double worst = -1.0;
    for (int i = 0; i < w; ++i) {
      const Configuration a(field.targets[order[i]].x, field.targets[order[i]].y, headings[i]);
      const int j = (i + 1) % w;
      const Configuration b(field.targets[order[j]].x, field.targets[order[j]].y, headings[j]);
      const double len = dubins_shortest(a, b, rho).length();
      if (len > worst) {
        worst = len;
        rotate_to = j;
      }
    }
  }
  std::rotate(order.begin(), order.begin() + rotate_to, order.end());
  std::rotate(headings.begin(), headings.begin() + rotate_to, headings.end());
  return finish_tour(std::move(order), std::move(headings), field, rho, closed);
}

double tour_cost(const Tour& tour, double rho) {
  const std::size_t w = tour.configurations.size();
  if (w < 2) return 0.0;
  double total = 0.0;
  const std::size_t legs = tour.closed ? w : w - 1;
  for (std::size_t i = 0; i < legs; ++i) {
    total += dubins_shortest(tour.configurations[i], tour.configurations[(i + 1) % w], rho)
                 .length();
  }
  return total;
}

std::vector<DubinsPath> tour_legs(const Tour& tour, double rho) {
  const std::size_t w = tour.configurations.size();
  std::vector<DubinsPath> legs;
  if (w < 2) return legs;
  const std::size_t count = tour.closed ? w : w - 1;
  legs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    legs.push_back(dubins_shortest(tour.configurations[i], tour.configurations[(i + 1) % w], rho));
  }
  return legs;
}

}  // namespace fieldnav
