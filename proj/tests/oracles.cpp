#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace oracles {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kForbidden = 1e14;

struct Vec2 {
  double x, y;
};

Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

double mod2pi(double a) {
  double r = std::fmod(a, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  return r;
}

// Center of the circle the vehicle rides when turning. dir = +1 left, -1 right.
Vec2 turn_center(const fieldnav::Configuration& q, double rho, int dir) {
  return {q.x - dir * rho * std::sin(q.theta), q.y + dir * rho * std::cos(q.theta)};
}

struct Candidate {
  std::array<int, 3> dirs;        // +1 L, -1 R, 0 straight
  std::array<double, 3> lengths;  // meters
  double total() const { return lengths[0] + lengths[1] + lengths[2]; }
};

// Replays a candidate from `from` using its own little integrator and checks
// it lands on `to`. Keeps the oracle honest about its constructions.
bool replays_to(const Candidate& c, const fieldnav::Configuration& from,
                const fieldnav::Configuration& to, double rho) {
  double x = from.x, y = from.y, th = from.theta;
  for (int i = 0; i < 3; ++i) {
    const double len = c.lengths[i];
    if (c.dirs[i] == 0) {
      x += len * std::cos(th);
      y += len * std::sin(th);
    } else {
      const double sweep = c.dirs[i] * len / rho;
      const double cx = x - c.dirs[i] * rho * std::sin(th);
      const double cy = y + c.dirs[i] * rho * std::cos(th);
      th += sweep;
      x = cx + c.dirs[i] * rho * std::sin(th);
      y = cy - c.dirs[i] * rho * std::cos(th);
    }
  }
  const double scale = std::max({1.0, std::fabs(to.x), std::fabs(to.y)});
  const double dth = std::remainder(th - to.theta, 2.0 * kPi);
  return std::hypot(x - to.x, y - to.y) <= 1e-7 * scale && std::fabs(dth) <= 1e-8;
}

// Arc sweep (radians, in [0, 2pi)) taking heading `a` to heading `b` while
// turning in direction dir.
double sweep(double a, double b, int dir) { return dir > 0 ? mod2pi(b - a) : mod2pi(a - b); }

void csc_candidates(const fieldnav::Configuration& from, const fieldnav::Configuration& to,
                    double rho, int d1, int d3, std::vector<Candidate>& out) {
  const Vec2 c1 = turn_center(from, rho, d1);
  const Vec2 c3 = turn_center(to, rho, d3);
  const double vx = c3.x - c1.x, vy = c3.y - c1.y;
  const double dist = std::hypot(vx, vy);
  if (d1 == d3) {
    if (dist < 1e-12) {
      // Coincident circles: the whole maneuver is one arc.
      out.push_back({{d1, 0, d3}, {rho * sweep(from.theta, to.theta, d1), 0.0, 0.0}});
      return;
    }
    const double psi = std::atan2(vy, vx);
    out.push_back({{d1, 0, d3},
                   {rho * sweep(from.theta, psi, d1), dist, rho * sweep(psi, to.theta, d3)}});
  } else {
    if (dist < 2.0 * rho) return;
    const double gamma = std::atan2(vy, vx);
    const double offset = std::asin(std::min(1.0, 2.0 * rho / dist));
    const double psi = d1 > 0 ? gamma + offset : gamma - offset;
    const double straight = std::sqrt(std::max(0.0, dist * dist - 4.0 * rho * rho));
    out.push_back({{d1, 0, d3},
                   {rho * sweep(from.theta, psi, d1), straight, rho * sweep(psi, to.theta, d3)}});
  }
}

void ccc_candidates(const fieldnav::Configuration& from, const fieldnav::Configuration& to,
                    double rho, int d1, std::vector<Candidate>& out) {
  const int d2 = -d1;
  const Vec2 c1 = turn_center(from, rho, d1);
  const Vec2 c3 = turn_center(to, rho, d1);
  const double vx = c3.x - c1.x, vy = c3.y - c1.y;
  const double dist = std::hypot(vx, vy);
  if (dist > 4.0 * rho) return;
  const double gamma = std::atan2(vy, vx);
  const double eta = std::acos(std::clamp(dist / (4.0 * rho), -1.0, 1.0));
  for (const double sign : {1.0, -1.0}) {
    const double delta = gamma + sign * eta;
    const Vec2 c2{c1.x + 2.0 * rho * std::cos(delta), c1.y + 2.0 * rho * std::sin(delta)};
    const double zeta = std::atan2(c3.y - c2.y, c3.x - c2.x);
    // Headings at the two tangency points follow from the position angles.
    const double h12 = delta + d1 * kPi / 2.0;   // heading when handing over c1 -> c2
    const double h23 = zeta + d2 * kPi / 2.0;    // heading when handing over c2 -> c3
    out.push_back({{d1, d2, d1},
                   {rho * sweep(from.theta, h12, d1), rho * sweep(h12, h23, d2),
                    rho * sweep(h23, to.theta, d1)}});
  }
}

}  // namespace

double dubins_length(const fieldnav::Configuration& from, const fieldnav::Configuration& to,
                     double rho) {
  std::vector<Candidate> cands;
  cands.reserve(8);
  csc_candidates(from, to, rho, +1, +1, cands);  // LSL
  csc_candidates(from, to, rho, -1, -1, cands);  // RSR
  csc_candidates(from, to, rho, +1, -1, cands);  // LSR
  csc_candidates(from, to, rho, -1, +1, cands);  // RSL
  ccc_candidates(from, to, rho, -1, cands);      // RLR (both placements)
  ccc_candidates(from, to, rho, +1, cands);      // LRL (both placements)

  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) {
    if (!replays_to(c, from, to, rho)) continue;
    best = std::min(best, c.total());
  }
  if (!std::isfinite(best)) {
    throw std::logic_error("dubins oracle produced no valid candidate");
  }
  return best;
}

fieldnav::Configuration unicycle_arc(const fieldnav::Configuration& q, double v, double omega,
                                     double dt) {
  if (std::fabs(omega) < 1e-12) {
    return {q.x + v * dt * std::cos(q.theta), q.y + v * dt * std::sin(q.theta), q.theta};
  }
  const double th1 = q.theta + omega * dt;
  return {q.x + v / omega * (std::sin(th1) - std::sin(q.theta)),
          q.y - v / omega * (std::cos(th1) - std::cos(q.theta)), th1};
}

double brute_force_atsp(const std::vector<double>& cost, int n) {
  std::vector<int> perm(n - 1);
  std::iota(perm.begin(), perm.end(), 1);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = cost[static_cast<std::size_t>(0) * n + perm.front()];
    for (int i = 0; i + 1 < n - 1; ++i) {
      c += cost[static_cast<std::size_t>(perm[i]) * n + perm[i + 1]];
    }
    c += cost[static_cast<std::size_t>(perm.back()) * n + 0];
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double held_karp_atsp(const std::vector<double>& cost, int n, std::vector<int>& order) {
  if (n < 2 || n > 22) throw std::invalid_argument("held_karp_atsp: n out of range");
  const std::size_t full = std::size_t{1} << (n - 1);  // subsets of nodes 1..n-1
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(full * (n - 1), inf);
  std::vector<int> parent(full * (n - 1), -1);
  for (int j = 1; j < n; ++j) {
    dp[(std::size_t{1} << (j - 1)) * (n - 1) + (j - 1)] = cost[0 * n + j];
  }
  for (std::size_t mask = 1; mask < full; ++mask) {
    for (int j = 1; j < n; ++j) {
      const std::size_t bit = std::size_t{1} << (j - 1);
      if (!(mask & bit)) continue;
      const double cur = dp[mask * (n - 1) + (j - 1)];
      if (!(cur < inf)) continue;
      for (int k = 1; k < n; ++k) {
        const std::size_t kbit = std::size_t{1} << (k - 1);
        if (mask & kbit) continue;
        const double cand = cur + cost[static_cast<std::size_t>(j) * n + k];
        const std::size_t idx = (mask | kbit) * (n - 1) + (k - 1);
        if (cand < dp[idx]) {
          dp[idx] = cand;
          parent[idx] = j;
        }
      }
    }
  }
  double best = inf;
  int last = -1;
  for (int j = 1; j < n; ++j) {
    const double cand = dp[(full - 1) * (n - 1) + (j - 1)] + cost[static_cast<std::size_t>(j) * n];
    if (cand < best) {
      best = cand;
      last = j;
    }
  }
  order.assign(1, 0);
  std::vector<int> rev;
  std::size_t mask = full - 1;
  int j = last;
  while (j > 0) {
    rev.push_back(j);
    const int p = parent[mask * (n - 1) + (j - 1)];
    mask &= ~(std::size_t{1} << (j - 1));
    j = p < 0 ? 0 : p;
  }
  order.insert(order.end(), rev.rbegin(), rev.rend());
  return best;
}

double held_karp_atsp(const std::vector<double>& cost, int n) {
  std::vector<int> order;
  return held_karp_atsp(cost, n, order);
}

double brute_force_gtsp(const std::vector<double>& cost, int n_clusters, int k) {
  const int n_nodes = n_clusters * k;
  std::vector<int> cluster_perm(n_clusters);
  std::iota(cluster_perm.begin(), cluster_perm.end(), 0);
  std::vector<int> pick(n_clusters, 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    std::fill(pick.begin(), pick.end(), 0);
    while (true) {
      double c = 0.0;
      for (int i = 0; i < n_clusters; ++i) {
        const int a = cluster_perm[i] * k + pick[i];
        const int b = cluster_perm[(i + 1) % n_clusters] * k + pick[(i + 1) % n_clusters];
        c += cost[static_cast<std::size_t>(a) * n_nodes + b];
      }
      if (c < kForbidden) best = std::min(best, c);
      int digit = 0;
      while (digit < n_clusters && ++pick[digit] == k) pick[digit++] = 0;
      if (digit == n_clusters) break;
    }
  } while (std::next_permutation(cluster_perm.begin() + 1, cluster_perm.end()));
  return best;
}

double uniform(std::uint64_t& state, double lo, double hi) {
  // splitmix64 step; stable across platforms unlike std distributions.
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z = z ^ (z >> 31);
  const double u = static_cast<double>(z >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

}  // namespace oracles
