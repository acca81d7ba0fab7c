#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fieldnav/nmpc.hpp"
#include "fieldnav/routing.hpp"
#include "fieldnav/simulation.hpp"

namespace fieldnav {

enum class PlannerKind { Coupled, Decoupled, EtspOnly };

const char* to_string(PlannerKind kind);
PlannerKind planner_from_string(const std::string& name);

// Flat experiment configuration. Defaults reproduce the reference setup
// (K=10, rho=0.5, dt=0.1, H=20, Q=diag(0.1,0.1,0.01), R=diag(0.1,1.0),
// q_s=1e4, v_max=0.5, omega_max=1.9, rate bounds u_max/5).
struct ExperimentConfig {
  PlannerKind planner = PlannerKind::Coupled;
  int k = 10;
  double rho = 0.5;
  bool closed_tour = true;
  std::uint64_t seed = 1;
  int atsp_budget = 200;
  double sample_step = 0.05;
  double rate_divisor = 5.0;
  OcpParams ocp;

  // Parses the flat JSON schema; unknown keys are rejected.
  static ExperimentConfig from_json_text(const std::string& text,
                                         const std::string& source_name = "<config>");
  static ExperimentConfig from_json_file(const std::filesystem::path& file);

  void validate() const;
};

struct PlanResult {
  PlannerKind planner = PlannerKind::Coupled;
  std::vector<int> order;
  std::optional<Tour> tour;  // oriented tour; for etsp_only the headings follow the legs
  std::vector<ReferencePath> segments;
  double total_cost = 0.0;  // Dubins cost, or Euclidean for etsp_only
  std::vector<double> leg_lengths;
};

PlanResult plan(const Field& field, const ExperimentConfig& config);

struct SimulateResult {
  PlanResult plan;
  MissionLog log;
};

SimulateResult simulate(const Field& field, const ExperimentConfig& config);

struct CompareRow {
  std::string label;
  double tour_cost = 0.0;
  bool simulated = false;
  double closed_loop_length = 0.0;
  bool mission_success = false;
};

struct CompareResult {
  std::vector<CompareRow> rows;
  double pct_difference = 0.0;  // (b - a) / a * 100 over tour costs
};

CompareResult compare(const Field& field, const ExperimentConfig& config_a,
                      const ExperimentConfig& config_b, bool with_simulation);

// Artifact writers. Filenames inside out_dir: tour.json, reference_path.csv,
// plan.svg, mission.csv, summary.json, mission.svg, compare.txt, compare.csv.
void write_plan_artifacts(const std::filesystem::path& out_dir, const Field& field,
                          const ExperimentConfig& config, const PlanResult& result);
void write_mission_artifacts(const std::filesystem::path& out_dir, const Field& field,
                             const ExperimentConfig& config, const SimulateResult& result);
void write_compare_artifacts(const std::filesystem::path& out_dir, const CompareResult& result);

// Reloads a tour.json; used for round-trip validation.
struct LoadedTour {
  Tour tour;
  double rho = 0.0;
  double stored_cost = 0.0;
  std::string cost_metric;
};
LoadedTour load_tour_json(const std::filesystem::path& file);

}  // namespace fieldnav
