#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include "fieldnav/errors.hpp"
#include "fieldnav/experiment.hpp"
#include "fieldnav/field_io.hpp"

namespace fs = std::filesystem;
using namespace fieldnav;

namespace {

struct CommonArgs {
  std::string field_path;
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::string planner;
  int k = 0;
  double rho = 0.0;
  bool open_tour = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool field_required = true) {
  auto* f = cmd->add_option("--field", args.field_path, "Field CSV (one 'x,y' per line)");
  if (field_required) f->required();
  cmd->add_option("--config", args.config_path, "Experiment config JSON");
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--seed", args.seed, "Override the config seed");
  cmd->add_option("--planner", args.planner, "coupled|decoupled|etsp_only");
  cmd->add_option("--k", args.k, "Headings per target");
  cmd->add_option("--rho", args.rho, "Minimum turning radius [m]");
  cmd->add_flag("--open-tour", args.open_tour, "Plan an open traversal (default closed)");
}

ExperimentConfig load_config(const CLI::App* cmd, const CommonArgs& args) {
  ExperimentConfig cfg = args.config_path.empty()
                             ? ExperimentConfig{}
                             : ExperimentConfig::from_json_file(args.config_path);
  if (cmd->count("--seed")) cfg.seed = args.seed;
  if (cmd->count("--planner")) cfg.planner = planner_from_string(args.planner);
  if (cmd->count("--k")) cfg.k = args.k;
  if (cmd->count("--rho")) cfg.rho = args.rho;
  if (cmd->count("--open-tour")) cfg.closed_tour = false;
  cfg.validate();
  return cfg;
}

int run(int argc, char** argv) {
  CLI::App app{"Curvature-constrained tour planning with closed-loop NMPC waypoint following"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Write a random field CSV");
  GenerateOptions gen_opts;
  std::string gen_out = "out";
  gen->add_option("--seed", gen_opts.seed, "Random seed");
  gen->add_option("--count", gen_opts.count, "Number of targets")->required();
  gen->add_option("--width", gen_opts.width, "Field width [m]");
  gen->add_option("--height", gen_opts.height, "Field height [m]");
  gen->add_option("--min-sep", gen_opts.min_separation, "Minimum pairwise distance [m]");
  gen->add_option("--out", gen_out, "Output directory");

  auto* plan_cmd = app.add_subcommand("plan", "Plan a tour and write its artifacts");
  CommonArgs plan_args;
  add_common(plan_cmd, plan_args);

  auto* sim_cmd = app.add_subcommand("simulate", "Plan, then run the closed-loop mission");
  CommonArgs sim_args;
  add_common(sim_cmd, sim_args);

  auto* cmp_cmd = app.add_subcommand("compare", "Compare two planner configurations");
  CommonArgs cmp_args;
  add_common(cmp_cmd, cmp_args);
  std::string config_b_path, field_b_path, planner_b = "decoupled";
  bool cmp_simulate = false;
  cmp_cmd->add_option("--config-b", config_b_path, "Config JSON for the second planner");
  cmp_cmd->add_option("--field-b", field_b_path,
                      "Field for the second planner (must match --field)");
  cmp_cmd->add_option("--planner-b", planner_b, "Planner for side B when --config-b is absent");
  cmp_cmd->add_flag("--simulate", cmp_simulate, "Also run both closed-loop missions");

  app.parse(argc, argv);

  if (gen->parsed()) {
    const Field field = generate_field(gen_opts);
    fs::create_directories(gen_out);
    write_field(fs::path(gen_out) / "field.csv", field);
    std::cout << "wrote " << (fs::path(gen_out) / "field.csv").string() << " (" << field.size()
              << " targets)\n";
    return 0;
  }

  if (plan_cmd->parsed()) {
    const ExperimentConfig cfg = load_config(plan_cmd, plan_args);
    const Field field = load_field(plan_args.field_path);
    const PlanResult result = plan(field, cfg);
    write_plan_artifacts(plan_args.out_dir, field, cfg, result);
    std::cout << "planner=" << to_string(result.planner) << " targets=" << field.size()
              << " tour_cost=" << result.total_cost << "\n";
    return 0;
  }

  if (sim_cmd->parsed()) {
    const ExperimentConfig cfg = load_config(sim_cmd, sim_args);
    const Field field = load_field(sim_args.field_path);
    const SimulateResult result = simulate(field, cfg);
    write_plan_artifacts(sim_args.out_dir, field, cfg, result.plan);
    write_mission_artifacts(sim_args.out_dir, field, cfg, result);
    std::cout << "planner=" << to_string(cfg.planner) << " reference_length="
              << result.log.reference_length << " closed_loop_length="
              << result.log.closed_loop_length << " waypoints=" << result.log.waypoints.size()
              << " success=" << (result.log.success ? "yes" : "no") << "\n";
    return result.log.success ? 0 : 3;
  }

  if (cmp_cmd->parsed()) {
    const ExperimentConfig cfg_a = load_config(cmp_cmd, cmp_args);
    ExperimentConfig cfg_b;
    if (!config_b_path.empty()) {
      cfg_b = ExperimentConfig::from_json_file(config_b_path);
    } else {
      cfg_b = cfg_a;
      cfg_b.planner = planner_from_string(planner_b);
    }
    const Field field = load_field(cmp_args.field_path);
    if (!field_b_path.empty()) {
      const Field field_b = load_field(field_b_path);
      bool same = field.size() == field_b.size();
      for (int i = 0; same && i < field.size(); ++i) {
        same = field.targets[i].x == field_b.targets[i].x &&
               field.targets[i].y == field_b.targets[i].y;
      }
      if (!same) {
        throw ValidationError("compare requires both planners to run on the same field");
      }
    }
    const CompareResult result = compare(field, cfg_a, cfg_b, cmp_simulate);
    write_compare_artifacts(cmp_args.out_dir, result);
    for (const auto& row : result.rows) {
      std::cout << row.label << ": tour_cost=" << row.tour_cost;
      if (row.simulated) {
        std::cout << " closed_loop=" << row.closed_loop_length
                  << " success=" << (row.mission_success ? "yes" : "no");
      }
      std::cout << "\n";
    }
    std::cout << "difference (b vs a): " << result.pct_difference << "%\n";
    if (cmp_simulate) {
      for (const auto& row : result.rows) {
        if (!row.mission_success) return 3;
      }
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = CLI::App{}.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const SolverConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
