#include "fieldnav/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "fieldnav/errors.hpp"

namespace fieldnav {

double wrap_to_pi(double angle) {
  double r = std::fmod(angle + kPi, 2.0 * kPi);
  if (r <= 0.0) r += 2.0 * kPi;
  return r - kPi;
}

double wrap_to_2pi(double angle) {
  double r = std::fmod(angle, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  return r;
}

Configuration::Configuration(double x_, double y_, double theta_)
    : x(x_), y(y_), theta(wrap_to_pi(theta_)) {
  if (!std::isfinite(x_) || !std::isfinite(y_) || !std::isfinite(theta_)) {
    throw ValidationError("configuration components must be finite");
  }
}

double Configuration::distance_to(const Configuration& other) const {
  return std::hypot(other.x - x, other.y - y);
}

const char* to_string(DubinsWord word) {
  switch (word) {
    case DubinsWord::LSL: return "LSL";
    case DubinsWord::RSR: return "RSR";
    case DubinsWord::LSR: return "LSR";
    case DubinsWord::RSL: return "RSL";
    case DubinsWord::RLR: return "RLR";
    case DubinsWord::LRL: return "LRL";
  }
  return "?";
}

namespace {

enum class Seg { L, S, R };

std::array<Seg, 3> segments_of(DubinsWord word) {
  switch (word) {
    case DubinsWord::LSL: return {Seg::L, Seg::S, Seg::L};
    case DubinsWord::RSR: return {Seg::R, Seg::S, Seg::R};
    case DubinsWord::LSR: return {Seg::L, Seg::S, Seg::R};
    case DubinsWord::RSL: return {Seg::R, Seg::S, Seg::L};
    case DubinsWord::RLR: return {Seg::R, Seg::L, Seg::R};
    case DubinsWord::LRL: return {Seg::L, Seg::R, Seg::L};
  }
  return {Seg::S, Seg::S, Seg::S};
}

// Advance a pose by `len` meters along one segment type.
Configuration advance(const Configuration& q, Seg seg, double len, double rho) {
  switch (seg) {
    case Seg::S:
      return {q.x + len * std::cos(q.theta), q.y + len * std::sin(q.theta), q.theta};
    case Seg::L: {
      const double phi = len / rho;
      const double cx = q.x + rho * std::cos(q.theta + kPi / 2.0);
      const double cy = q.y + rho * std::sin(q.theta + kPi / 2.0);
      const double a = q.theta - kPi / 2.0 + phi;  // position angle after sweep
      return {cx + rho * std::cos(a), cy + rho * std::sin(a), q.theta + phi};
    }
    case Seg::R: {
      const double phi = len / rho;
      const double cx = q.x + rho * std::cos(q.theta - kPi / 2.0);
      const double cy = q.y + rho * std::sin(q.theta - kPi / 2.0);
      const double a = q.theta + kPi / 2.0 - phi;
      return {cx + rho * std::cos(a), cy + rho * std::sin(a), q.theta - phi};
    }
  }
  return q;
}

// Segment lengths of one word in rho-normalized units (arcs in radians,
// straight in units of rho), for the canonical problem: start at the origin
// with heading alpha, goal at (d, 0) with heading beta.
struct WordSolution {
  double t, p, q;
  double total() const { return t + p + q; }
};

constexpr double kMergeEps = 1e-12;

std::optional<WordSolution> solve_lsl(double d, double alpha, double beta) {
  const double vx = d - std::sin(beta) + std::sin(alpha);
  const double vy = std::cos(beta) - std::cos(alpha);
  const double p = std::hypot(vx, vy);
  if (p < kMergeEps) {
    // Start and goal circles coincide: a single left arc.
    return WordSolution{wrap_to_2pi(beta - alpha), 0.0, 0.0};
  }
  const double psi = std::atan2(vy, vx);
  return WordSolution{wrap_to_2pi(psi - alpha), p, wrap_to_2pi(beta - psi)};
}

std::optional<WordSolution> solve_rsr(double d, double alpha, double beta) {
  const double vx = d + std::sin(beta) - std::sin(alpha);
  const double vy = std::cos(alpha) - std::cos(beta);
  const double p = std::hypot(vx, vy);
  if (p < kMergeEps) {
    return WordSolution{wrap_to_2pi(alpha - beta), 0.0, 0.0};
  }
  const double psi = std::atan2(vy, vx);
  return WordSolution{wrap_to_2pi(alpha - psi), p, wrap_to_2pi(psi - beta)};
}

std::optional<WordSolution> solve_lsr(double d, double alpha, double beta) {
  const double vx = d + std::sin(beta) + std::sin(alpha);
  const double vy = -std::cos(beta) - std::cos(alpha);
  const double dd = std::hypot(vx, vy);
  if (dd < 2.0) return std::nullopt;
  const double gamma = std::atan2(vy, vx);
  const double psi = gamma + std::asin(std::min(1.0, 2.0 / dd));
  const double p = std::sqrt(std::max(0.0, dd * dd - 4.0));
  return WordSolution{wrap_to_2pi(psi - alpha), p, wrap_to_2pi(psi - beta)};
}

std::optional<WordSolution> solve_rsl(double d, double alpha, double beta) {
  const double vx = d - std::sin(beta) - std::sin(alpha);
  const double vy = std::cos(beta) + std::cos(alpha);
  const double dd = std::hypot(vx, vy);
  if (dd < 2.0) return std::nullopt;
  const double gamma = std::atan2(vy, vx);
  const double psi = gamma - std::asin(std::min(1.0, 2.0 / dd));
  const double p = std::sqrt(std::max(0.0, dd * dd - 4.0));
  return WordSolution{wrap_to_2pi(alpha - psi), p, wrap_to_2pi(beta - psi)};
}

// CCC words have two tangent middle-circle placements; both are valid paths,
// so both are candidates and the caller keeps the shorter one.
std::optional<WordSolution> solve_lrl(double d, double alpha, double beta) {
  const double c1x = -std::sin(alpha), c1y = std::cos(alpha);
  const double c3x = d - std::sin(beta), c3y = std::cos(beta);
  const double vx = c3x - c1x, vy = c3y - c1y;
  const double dd = std::hypot(vx, vy);
  if (dd > 4.0) return std::nullopt;
  const double gamma = std::atan2(vy, vx);
  const double eta = std::acos(std::clamp(dd / 4.0, -1.0, 1.0));
  std::optional<WordSolution> best;
  for (const double sign : {1.0, -1.0}) {
    const double d1 = gamma + sign * eta;
    const double c2x = c1x + 2.0 * std::cos(d1);
    const double c2y = c1y + 2.0 * std::sin(d1);
    const double zeta = std::atan2(c3y - c2y, c3x - c2x);
    WordSolution s{wrap_to_2pi(d1 - alpha + kPi / 2.0), wrap_to_2pi(d1 + kPi - zeta),
                   wrap_to_2pi(beta - zeta - 3.0 * kPi / 2.0)};
    if (!best || s.total() < best->total()) best = s;
  }
  return best;
}

std::optional<WordSolution> solve_rlr(double d, double alpha, double beta) {
  const double c1x = std::sin(alpha), c1y = -std::cos(alpha);
  const double c3x = d + std::sin(beta), c3y = -std::cos(beta);
  const double vx = c3x - c1x, vy = c3y - c1y;
  const double dd = std::hypot(vx, vy);
  if (dd > 4.0) return std::nullopt;
  const double gamma = std::atan2(vy, vx);
  const double eta = std::acos(std::clamp(dd / 4.0, -1.0, 1.0));
  std::optional<WordSolution> best;
  for (const double sign : {1.0, -1.0}) {
    const double d1 = gamma + sign * eta;
    const double c2x = c1x + 2.0 * std::cos(d1);
    const double c2y = c1y + 2.0 * std::sin(d1);
    const double zeta = std::atan2(c3y - c2y, c3x - c2x);
    WordSolution s{wrap_to_2pi(alpha - d1 + kPi / 2.0), wrap_to_2pi(zeta - d1 - kPi),
                   wrap_to_2pi(zeta - beta + kPi / 2.0)};
    if (!best || s.total() < best->total()) best = s;
  }
  return best;
}

}  // namespace

Configuration DubinsPath::point_at(double arclength) const {
  double t = std::clamp(arclength, 0.0, length());
  Configuration q = start;
  const auto segs = segments_of(word);
  for (int i = 0; i < 3; ++i) {
    if (t <= seg_lengths[i]) return advance(q, segs[i], t, rho);
    q = advance(q, segs[i], seg_lengths[i], rho);
    t -= seg_lengths[i];
  }
  return q;
}

DubinsPath dubins_shortest(const Configuration& q_from, const Configuration& q_to, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw InvalidRadius("turning radius must be positive, got " + std::to_string(rho));
  }
  const double dx = q_to.x - q_from.x;
  const double dy = q_to.y - q_from.y;
  const double phi = std::atan2(dy, dx);
  const double d = std::hypot(dx, dy) / rho;
  const double alpha = wrap_to_pi(q_from.theta - phi);
  const double beta = wrap_to_pi(q_to.theta - phi);

  // Fixed enumeration order doubles as the tie-break rule.
  const DubinsWord words[] = {DubinsWord::LSL, DubinsWord::RSR, DubinsWord::LSR,
                              DubinsWord::RSL, DubinsWord::RLR, DubinsWord::LRL};
  std::optional<WordSolution> sols[] = {
      solve_lsl(d, alpha, beta), solve_rsr(d, alpha, beta), solve_lsr(d, alpha, beta),
      solve_rsl(d, alpha, beta), solve_rlr(d, alpha, beta), solve_lrl(d, alpha, beta)};

  DubinsPath best;
  double best_len = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 6; ++i) {
    if (!sols[i]) continue;
    const double len = rho * sols[i]->total();
    if (len < best_len) {
      best_len = len;
      best.word = words[i];
      best.seg_lengths = {rho * sols[i]->t, rho * sols[i]->p, rho * sols[i]->q};
    }
  }
  best.rho = rho;
  best.start = q_from;
  best.end = q_to;
  return best;
}

ReferencePath dubins_sample(const DubinsPath& path, double step) {
  if (!(step > 0.0)) {
    throw InvalidStep("sampling step must be positive, got " + std::to_string(step));
  }
  ReferencePath ref;
  const double total = path.length();
  ref.total_length = total;
  if (total <= 1e-9) {
    ref.samples.push_back(path.start);
    ref.cumulative_arclength.push_back(0.0);
    return ref;
  }
  const auto n = static_cast<std::size_t>(total / step) + 2;
  ref.samples.reserve(n);
  ref.cumulative_arclength.reserve(n);
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * step;
    if (t >= total - 1e-9) break;
    ref.samples.push_back(path.point_at(t));
    ref.cumulative_arclength.push_back(t);
  }
  ref.samples.push_back(path.end);  // snap to the analytic endpoint
  ref.cumulative_arclength.push_back(total);
  return ref;
}

ReferencePath straight_sample(double x0, double y0, double x1, double y1, double step) {
  if (!(step > 0.0)) {
    throw InvalidStep("sampling step must be positive, got " + std::to_string(step));
  }
  const double total = std::hypot(x1 - x0, y1 - y0);
  const double theta = std::atan2(y1 - y0, x1 - x0);
  ReferencePath ref;
  ref.total_length = total;
  if (total <= 1e-9) {
    ref.samples.emplace_back(x0, y0, theta);
    ref.cumulative_arclength.push_back(0.0);
    return ref;
  }
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * step;
    if (t >= total - 1e-9) break;
    const double f = t / total;
    ref.samples.emplace_back(x0 + f * (x1 - x0), y0 + f * (y1 - y0), theta);
    ref.cumulative_arclength.push_back(t);
  }
  ref.samples.emplace_back(x1, y1, theta);
  ref.cumulative_arclength.push_back(total);
  return ref;
}

namespace {

// Index of the interval [cum[i], cum[i+1]] containing arclength t.
std::size_t bracket(const std::vector<double>& cum, double t) {
  auto it = std::upper_bound(cum.begin(), cum.end(), t);
  std::size_t idx = (it == cum.begin()) ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
  if (idx + 1 >= cum.size()) idx = cum.size() - 2;
  return idx;
}

}  // namespace

Configuration ReferencePath::at(double s) const {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw OutOfDomain("path parameter must lie in [0,1], got " + std::to_string(s));
  }
  if (samples.size() == 1) return samples.front();
  const double t = s * total_length;
  const std::size_t i = bracket(cumulative_arclength, t);
  const double c0 = cumulative_arclength[i];
  const double c1 = cumulative_arclength[i + 1];
  const double f = std::clamp((t - c0) / (c1 - c0), 0.0, 1.0);
  const Configuration& a = samples[i];
  const Configuration& b = samples[i + 1];
  return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y),
          a.theta + f * wrap_to_pi(b.theta - a.theta)};
}

void ReferencePath::at_with_derivative(double s, Configuration& pose,
                                       std::array<double, 3>& dds) const {
  pose = at(s);
  if (samples.size() == 1) {
    dds = {0.0, 0.0, 0.0};
    return;
  }
  const double t = s * total_length;
  const std::size_t i = bracket(cumulative_arclength, t);
  const double span = cumulative_arclength[i + 1] - cumulative_arclength[i];
  const double k = total_length / span;
  const Configuration& a = samples[i];
  const Configuration& b = samples[i + 1];
  dds = {(b.x - a.x) * k, (b.y - a.y) * k, wrap_to_pi(b.theta - a.theta) * k};
}

std::vector<ReferencePath> concatenate(const std::vector<DubinsPath>& paths, double step) {
  for (std::size_t i = 0; i + 1 < paths.size(); ++i) {
    const Configuration& e = paths[i].end;
    const Configuration& s = paths[i + 1].start;
    const double pos_gap = e.distance_to(s);
    const double ang_gap = std::fabs(wrap_to_pi(s.theta - e.theta));
    if (pos_gap > 1e-6 || ang_gap > 1e-6) {
      throw DiscontinuousTour("tour legs " + std::to_string(i) + " and " + std::to_string(i + 1) +
                              " do not join: position gap " + std::to_string(pos_gap) +
                              " m, heading gap " + std::to_string(ang_gap) + " rad");
    }
  }
  std::vector<ReferencePath> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(dubins_sample(p, step));
  return out;
}

}  // namespace fieldnav
