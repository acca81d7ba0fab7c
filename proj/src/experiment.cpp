#include "fieldnav/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "fieldnav/errors.hpp"
#include "fieldnav/field_io.hpp"
#include "fieldnav/svg.hpp"

namespace fieldnav {

using nlohmann::json;

const char* to_string(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::Coupled: return "coupled";
    case PlannerKind::Decoupled: return "decoupled";
    case PlannerKind::EtspOnly: return "etsp_only";
  }
  return "?";
}

PlannerKind planner_from_string(const std::string& name) {
  if (name == "coupled") return PlannerKind::Coupled;
  if (name == "decoupled") return PlannerKind::Decoupled;
  if (name == "etsp_only") return PlannerKind::EtspOnly;
  throw ValidationError("unknown planner '" + name + "' (expected coupled, decoupled, or "
                        "etsp_only)");
}

void ExperimentConfig::validate() const {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (!(rho > 0.0)) throw ValidationError("rho must be positive");
  if (!(sample_step > 0.0)) throw ValidationError("sample_step must be positive");
  if (atsp_budget < 0) throw ValidationError("atsp_budget must be >= 0");
  if (!(rate_divisor >= 1.0)) throw ValidationError("rate_divisor must be >= 1");
  ocp.validate();
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::string& source_name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError(source_name + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError(source_name + ": config must be a JSON object");

  ExperimentConfig c;
  double v_max = c.ocp.limits.v_max;
  double omega_max = c.ocp.limits.omega_max;
  double r_min = c.ocp.limits.r_min;
  double goal_pos_tol = c.ocp.limits.goal_pos_tol;
  double goal_heading_tol = c.ocp.limits.goal_heading_tol;
  double footprint = c.ocp.limits.footprint_radius;

  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "planner") {
        c.planner = planner_from_string(value.get<std::string>());
      } else if (key == "k") {
        c.k = value.get<int>();
      } else if (key == "rho") {
        c.rho = value.get<double>();
      } else if (key == "closed_tour") {
        c.closed_tour = value.get<bool>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "atsp_budget") {
        c.atsp_budget = value.get<int>();
      } else if (key == "sample_step") {
        c.sample_step = value.get<double>();
      } else if (key == "rate_divisor") {
        c.rate_divisor = value.get<double>();
      } else if (key == "horizon") {
        c.ocp.horizon = value.get<int>();
      } else if (key == "dt") {
        c.ocp.dt = value.get<double>();
      } else if (key == "q_diag") {
        const auto a = value.get<std::array<double, 3>>();
        c.ocp.Q = Eigen::Vector3d(a[0], a[1], a[2]).asDiagonal();
      } else if (key == "r_diag") {
        const auto a = value.get<std::array<double, 2>>();
        c.ocp.R = Eigen::Vector2d(a[0], a[1]).asDiagonal();
      } else if (key == "q_s") {
        c.ocp.q_s = value.get<double>();
      } else if (key == "v_max") {
        v_max = value.get<double>();
      } else if (key == "omega_max") {
        omega_max = value.get<double>();
      } else if (key == "r_min") {
        r_min = value.get<double>();
      } else if (key == "goal_pos_tol") {
        goal_pos_tol = value.get<double>();
      } else if (key == "goal_heading_tol") {
        goal_heading_tol = value.get<double>();
      } else if (key == "footprint_radius") {
        footprint = value.get<double>();
      } else if (key == "obstacles") {
        for (const auto& row : value) {
          const auto a = row.get<std::array<double, 3>>();
          c.ocp.obstacles.push_back({a[0], a[1], a[2]});
        }
      } else if (key == "max_iterations") {
        c.ocp.max_iterations = value.get<int>();
      } else {
        throw ValidationError(source_name + ": unknown config key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw ValidationError(source_name + ": key '" + key + "': " + e.what());
    }
  }

  RobotLimits lim;
  lim.v_max = v_max;
  lim.omega_max = omega_max;
  lim.r_min = r_min;
  lim.dv_max = v_max / c.rate_divisor;
  lim.domega_max = omega_max / c.rate_divisor;
  lim.goal_pos_tol = goal_pos_tol;
  lim.goal_heading_tol = goal_heading_tol;
  lim.footprint_radius = footprint;
  c.ocp.limits = lim;
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file '" + file.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), file.string());
}

namespace {

// Rotates a cyclic order so the longest Euclidean leg becomes the (dropped)
// wrap-around leg of an open traversal.
std::vector<int> open_rotation(const std::vector<int>& order, const Field& field) {
  const int w = static_cast<int>(order.size());
  int cut = 0;
  double worst = -1.0;
  for (int i = 0; i < w; ++i) {
    const Point2& a = field.targets[order[i]];
    const Point2& b = field.targets[order[(i + 1) % w]];
    const double d = std::hypot(b.x - a.x, b.y - a.y);
    if (d > worst) {
      worst = d;
      cut = (i + 1) % w;
    }
  }
  std::vector<int> rotated(order.begin() + cut, order.end());
  rotated.insert(rotated.end(), order.begin(), order.begin() + cut);
  return rotated;
}

double euclidean_cost(const std::vector<int>& order, const Field& field, bool closed,
                      std::vector<double>* legs) {
  const int w = static_cast<int>(order.size());
  const int count = closed ? w : w - 1;
  double total = 0.0;
  for (int i = 0; i < count; ++i) {
    const Point2& a = field.targets[order[i]];
    const Point2& b = field.targets[order[(i + 1) % w]];
    const double d = std::hypot(b.x - a.x, b.y - a.y);
    total += d;
    if (legs) legs->push_back(d);
  }
  return total;
}

// Headings along the outgoing legs; the final target of an open traversal
// keeps its incoming direction.
Tour leg_aligned_tour(const std::vector<int>& order, const Field& field, double rho,
                      bool closed) {
  const int w = static_cast<int>(order.size());
  std::vector<double> headings(w, 0.0);
  for (int i = 0; i < w; ++i) {
    const bool last_open = !closed && i == w - 1;
    const int from = last_open ? order[i - 1] : order[i];
    const int to = last_open ? order[i] : order[(i + 1) % w];
    headings[i] = std::atan2(field.targets[to].y - field.targets[from].y,
                             field.targets[to].x - field.targets[from].x);
  }
  Tour tour;
  tour.order = order;
  tour.headings = headings;
  tour.closed = closed;
  for (int i = 0; i < w; ++i) {
    tour.configurations.emplace_back(field.targets[order[i]].x, field.targets[order[i]].y,
                                     headings[i]);
  }
  tour.total_cost = tour_cost(tour, rho);
  return tour;
}

}  // namespace

PlanResult plan(const Field& field, const ExperimentConfig& config) {
  config.validate();
  if (field.size() < 2) {
    throw TooFewTargets("need at least 2 targets, got " + std::to_string(field.size()));
  }

  PlanResult result;
  result.planner = config.planner;

  if (config.planner == PlannerKind::Coupled) {
    AtspOptions opts{config.seed, config.atsp_budget, 0.0};
    Tour tour = solve_dtsp_coupled(field, config.k, config.rho, opts, config.closed_tour);
    result.order = tour.order;
    for (const auto& leg : tour_legs(tour, config.rho)) {
      result.leg_lengths.push_back(leg.length());
    }
    result.segments = concatenate(tour_legs(tour, config.rho), config.sample_step);
    result.total_cost = tour.total_cost;
    result.tour = std::move(tour);
    return result;
  }

  std::vector<int> order = solve_etsp(field, config.seed, config.atsp_budget);
  if (!config.closed_tour) order = open_rotation(order, field);

  if (config.planner == PlannerKind::Decoupled) {
    Tour tour = alternating_headings(order, field, config.rho, config.closed_tour);
    result.order = tour.order;
    for (const auto& leg : tour_legs(tour, config.rho)) {
      result.leg_lengths.push_back(leg.length());
    }
    result.segments = concatenate(tour_legs(tour, config.rho), config.sample_step);
    result.total_cost = tour.total_cost;
    result.tour = std::move(tour);
    return result;
  }

  // etsp_only: curvature-free reference, straight segments between targets.
  result.order = order;
  result.total_cost = euclidean_cost(order, field, config.closed_tour, &result.leg_lengths);
  Tour tour = leg_aligned_tour(order, field, config.rho, config.closed_tour);
  const int w = static_cast<int>(order.size());
  const int count = config.closed_tour ? w : w - 1;
  for (int i = 0; i < count; ++i) {
    const Point2& a = field.targets[order[i]];
    const Point2& b = field.targets[order[(i + 1) % w]];
    result.segments.push_back(straight_sample(a.x, a.y, b.x, b.y, config.sample_step));
  }
  result.tour = std::move(tour);
  return result;
}

SimulateResult simulate(const Field& field, const ExperimentConfig& config) {
  SimulateResult res;
  res.plan = plan(field, config);
  res.log = run_mission(*res.plan.tour, res.plan.segments, config.ocp, config.ocp.dt);
  return res;
}

CompareResult compare(const Field& field, const ExperimentConfig& config_a,
                      const ExperimentConfig& config_b, bool with_simulation) {
  CompareResult out;
  for (const ExperimentConfig* cfg : {&config_a, &config_b}) {
    CompareRow row;
    row.label = to_string(cfg->planner);
    if (with_simulation) {
      SimulateResult sim = simulate(field, *cfg);
      row.tour_cost = sim.plan.total_cost;
      row.simulated = true;
      row.closed_loop_length = sim.log.closed_loop_length;
      row.mission_success = sim.log.success;
    } else {
      row.tour_cost = plan(field, *cfg).total_cost;
    }
    out.rows.push_back(std::move(row));
  }
  out.pct_difference =
      (out.rows[1].tour_cost - out.rows[0].tour_cost) / out.rows[0].tour_cost * 100.0;
  return out;
}

namespace {

json tour_to_json(const Field& field, const ExperimentConfig& config, const PlanResult& result) {
  json j;
  j["planner"] = to_string(result.planner);
  j["closed"] = config.closed_tour;
  j["rho"] = config.rho;
  j["k"] = config.k;
  j["seed"] = config.seed;
  j["cost_metric"] = result.planner == PlannerKind::EtspOnly ? "euclidean" : "dubins";
  j["total_cost"] = result.total_cost;
  j["order"] = result.order;
  j["leg_lengths"] = result.leg_lengths;
  json targets = json::array();
  json headings = json::array();
  for (int idx : result.order) {
    targets.push_back({field.targets[idx].x, field.targets[idx].y});
  }
  if (result.tour) {
    for (double h : result.tour->headings) headings.push_back(h);
  }
  j["targets"] = targets;
  j["headings"] = headings;
  return j;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + file.string() + "'");
  out << text;
}

}  // namespace

void write_plan_artifacts(const std::filesystem::path& out_dir, const Field& field,
                          const ExperimentConfig& config, const PlanResult& result) {
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "tour.json", tour_to_json(field, config, result).dump(2) + "\n");

  std::ostringstream csv;
  csv << "segment,s,x,y,theta\n";
  csv.precision(17);
  for (std::size_t si = 0; si < result.segments.size(); ++si) {
    const ReferencePath& seg = result.segments[si];
    for (std::size_t i = 0; i < seg.samples.size(); ++i) {
      const double s = seg.total_length > 0.0
                           ? seg.cumulative_arclength[i] / seg.total_length
                           : 1.0;
      csv << si << "," << s << "," << seg.samples[i].x << "," << seg.samples[i].y << ","
          << seg.samples[i].theta << "\n";
    }
  }
  write_text(out_dir / "reference_path.csv", csv.str());
  write_svg(out_dir / "plan.svg", render_svg(field, result.segments));
}

void write_mission_artifacts(const std::filesystem::path& out_dir, const Field& field,
                             const ExperimentConfig& config, const SimulateResult& result) {
  std::filesystem::create_directories(out_dir);

  std::ostringstream csv;
  csv << "t,x,y,theta,v,omega,s_bar,status,iters,solve_ms\n";
  csv.precision(17);
  for (const auto& s : result.log.steps) {
    csv << s.t << "," << s.state.x << "," << s.state.y << "," << s.state.theta << "," << s.u.v
        << "," << s.u.omega << "," << s.s_bar << "," << to_string(s.status) << ","
        << s.iterations << "," << s.solve_ms << "\n";
  }
  write_text(out_dir / "mission.csv", csv.str());

  json j;
  j["planner"] = to_string(config.planner);
  j["seed"] = config.seed;
  j["targets"] = field.size();
  j["reference_length"] = result.log.reference_length;
  j["closed_loop_length"] = result.log.closed_loop_length;
  j["success"] = result.log.success;
  switch (result.log.failure) {
    case MissionFailure::None: j["failure"] = "none"; break;
    case MissionFailure::StepCap: j["failure"] = "step_cap"; break;
    case MissionFailure::Infeasible: j["failure"] = "infeasible"; break;
  }
  j["failed_segment"] = result.log.failed_segment;
  j["steps"] = result.log.steps.size();
  j["min_turn_violations"] = result.log.min_turn_violations;
  j["infeasible_solves"] = result.log.infeasible_solves;
  j["max_iteration_solves"] = result.log.max_iteration_solves;
  j["total_solver_iterations"] = result.log.total_solver_iterations;
  double max_err = 0.0;
  json wps = json::array();
  for (const auto& w : result.log.waypoints) {
    max_err = std::max(max_err, w.position_error);
    wps.push_back({{"index", w.index},
                   {"arrival_time", w.arrival_time},
                   {"position_error", w.position_error},
                   {"heading_error", w.heading_error}});
  }
  j["max_position_error"] = max_err;
  j["waypoints"] = wps;
  write_text(out_dir / "summary.json", j.dump(2) + "\n");

  write_svg(out_dir / "mission.svg", render_svg(field, result.plan.segments, &result.log));
}

void write_compare_artifacts(const std::filesystem::path& out_dir, const CompareResult& result) {
  std::filesystem::create_directories(out_dir);

  std::ostringstream txt;
  txt << std::left << std::setw(12) << "planner" << std::right << std::setw(14) << "tour_cost"
      << std::setw(16) << "closed_loop" << std::setw(10) << "success" << "\n";
  for (const auto& row : result.rows) {
    txt << std::left << std::setw(12) << row.label << std::right << std::setw(14) << std::fixed
        << std::setprecision(3) << row.tour_cost;
    if (row.simulated) {
      txt << std::setw(16) << row.closed_loop_length << std::setw(10)
          << (row.mission_success ? "yes" : "no");
    } else {
      txt << std::setw(16) << "-" << std::setw(10) << "-";
    }
    txt << "\n";
  }
  txt << "difference (b vs a): " << std::setprecision(2) << result.pct_difference << "%\n";
  write_text(out_dir / "compare.txt", txt.str());

  std::ostringstream csv;
  csv << "label,tour_cost,closed_loop_length,success\n";
  csv.precision(17);
  for (const auto& row : result.rows) {
    csv << row.label << "," << row.tour_cost << ",";
    if (row.simulated) {
      csv << row.closed_loop_length << "," << (row.mission_success ? 1 : 0);
    } else {
      csv << ",";
    }
    csv << "\n";
  }
  write_text(out_dir / "compare.csv", csv.str());
}

LoadedTour load_tour_json(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot open tour file '" + file.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError(file.string() + ": " + e.what());
  }
  LoadedTour loaded;
  try {
    loaded.rho = j.at("rho").get<double>();
    loaded.stored_cost = j.at("total_cost").get<double>();
    loaded.cost_metric = j.at("cost_metric").get<std::string>();
    loaded.tour.closed = j.at("closed").get<bool>();
    loaded.tour.order = j.at("order").get<std::vector<int>>();
    loaded.tour.headings = j.at("headings").get<std::vector<double>>();
    const auto targets = j.at("targets").get<std::vector<std::array<double, 2>>>();
    if (targets.size() != loaded.tour.headings.size()) {
      throw ValidationError(file.string() + ": targets/headings size mismatch");
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
      loaded.tour.configurations.emplace_back(targets[i][0], targets[i][1],
                                              loaded.tour.headings[i]);
    }
  } catch (const json::exception& e) {
    throw ValidationError(file.string() + ": " + e.what());
  }
  loaded.tour.total_cost = tour_cost(loaded.tour, loaded.rho);
  return loaded;
}

}  // namespace fieldnav
