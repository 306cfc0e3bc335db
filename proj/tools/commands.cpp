#include "commands.hpp"

#include <fstream>
#include <ostream>

#include <json.hpp>

#include "dronho/csv.hpp"
#include "dronho/errors.hpp"

namespace dronho::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

template <class Fn>
void write_file(const fs::path& dir, const std::string& name, Fn&& fn) {
  auto out = open_output(dir, name);
  fn(out);
  if (!out) throw std::runtime_error("write failed for " + (dir / name).string());
}

}  // namespace

void cmd_synth_map(const RunConfig& config, bool write_samples, std::ostream& log) {
  RsrpGrid grid = build_grid(config);
  write_file(config.output_dir, "grid.csv", [&](std::ostream& o) { write_grid_csv(o, grid); });
  write_file(config.output_dir, "association.csv", [&](std::ostream& o) { write_association_csv(o, grid); });
  if (write_samples && config.map.source == MapSource::Synthetic) {
    RsrpSampleSet samples = synthesize_samples(config.map.synthetic, config.grid, config.map.samples_per_bin);
    write_file(config.output_dir, "samples.csv", [&](std::ostream& o) { write_samples_csv(o, samples); });
  }
  const GridSpec& s = grid.spec();
  log << "bins: " << s.bins_x() << " x " << s.bins_y() << " (" << s.num_bins() << ")\n"
      << "cells: " << grid.num_cells() << "\n"
      << "coverage: " << csv::format(static_cast<double>(grid.populated_bins()) / static_cast<double>(s.num_bins()))
      << "\n";
}

Trajectory resolve_route(const RunConfig& config, const RouteOptions& route) {
  if (route.route_csv) {
    std::ifstream in(*route.route_csv);
    if (!in) throw std::runtime_error("cannot open route file " + route.route_csv->string());
    return read_trajectory_csv(in);
  }
  Position start = config.route.start;
  Position end = config.route.end;
  if (route.random_route) {
    RouteEndpoints e = random_endpoints(config.grid, config.experiment.min_route_length_m,
                                        route_seed(config.experiment.seed, *route.random_route));
    start = e.start;
    end = e.end;
  }
  if (route.start) start = *route.start;
  if (route.end) end = *route.end;
  if (!config.grid.contains(start) || !config.grid.contains(end))
    throw ConfigError("route endpoints must lie inside the grid");
  return generate_trajectory(start, end, config.experiment.step_length_m, config.grid);
}

void cmd_gen_route(const RunConfig& config, const RouteOptions& route, std::ostream& log) {
  Trajectory t = resolve_route(config, route);
  write_file(config.output_dir, "route.csv", [&](std::ostream& o) { write_trajectory_csv(o, t); });
  log << "waypoints: " << t.size() << "\n";
}

void cmd_train(const RunConfig& config, const RouteOptions& route, bool oracle, std::ostream& log) {
  RsrpGrid grid = build_grid(config);
  Trajectory t = resolve_route(config, route);
  const HyperParams& hp = config.experiment.hp;
  hp.validate();
  if (auto gaps = validate_route_coverage(t, grid); !gaps.empty()) throw UncoveredRouteError(std::move(gaps));
  if (t.size() < 2) throw DegenerateRouteError("route has a single waypoint; nothing to train");

  CandidateTable candidates = build_candidates(grid, t, hp.k);
  RewardModel model = build_reward(candidates, hp.w_ho, hp.w_rsrp);
  QTable q = train(model.reward, hp, config.experiment.seed);
  Policy learned = extract_policy(q, candidates);
  Policy baseline = baseline_policy(candidates);

  write_file(config.output_dir, "policy.csv", [&](std::ostream& o) { write_policy_csv(o, learned, t); });
  write_file(config.output_dir, "baseline_policy.csv", [&](std::ostream& o) { write_policy_csv(o, baseline, t); });
  write_file(config.output_dir, "qtable.csv", [&](std::ostream& o) { write_qtable_csv(o, q); });
  log << "waypoints: " << t.size() << "\n"
      << "handovers: learned " << learned.handover_count() << ", baseline " << baseline.handover_count() << "\n";

  if (!oracle) return;
  DpSolution dp = dp_optimal(model.reward, hp.lambda);
  Policy exact = policy_from_ranks(candidates, dp.ranks);
  write_file(config.output_dir, "dp_policy.csv", [&](std::ostream& o) { write_policy_csv(o, exact, t); });

  double learned_return = discounted_return(model.reward, learned.ranks, hp.lambda);
  ordered_json report;
  report["waypoints"] = t.size();
  report["learned_return"] = learned_return;
  report["optimal_return"] = dp.optimal_return;
  report["baseline_return"] = discounted_return(model.reward, baseline.ranks, hp.lambda);
  report["return_gap"] = dp.optimal_return - learned_return;
  report["learned_handovers"] = learned.handover_count();
  report["optimal_handovers"] = exact.handover_count();
  report["baseline_handovers"] = baseline.handover_count();
  report["same_cells"] = learned.cells == exact.cells;
  write_file(config.output_dir, "oracle_report.json", [&](std::ostream& o) { o << report.dump(2) << '\n'; });
  log << "oracle: optimal return " << csv::format(dp.optimal_return) << ", learned "
      << csv::format(learned_return) << "\n";
}

void cmd_sweep(const RunConfig& config, std::ostream& log) {
  RsrpGrid grid = build_grid(config);
  SweepResult result = sweep(grid, config.experiment);

  write_file(config.output_dir, "summary.csv", [&](std::ostream& o) { write_summary_csv(o, result); });
  write_file(config.output_dir, "flights.csv", [&](std::ostream& o) { write_flights_csv(o, result); });
  write_file(config.output_dir, "cdf_hos.csv",
             [&](std::ostream& o) { write_cdf_csv(o, result, CdfKind::HandoverCount); });
  write_file(config.output_dir, "cdf_ho_ratio.csv",
             [&](std::ostream& o) { write_cdf_csv(o, result, CdfKind::HandoverRatio); });
  write_file(config.output_dir, "cdf_rsrp.csv", [&](std::ostream& o) { write_cdf_csv(o, result, CdfKind::RsrpDbm); });

  ordered_json manifest;
  manifest["master_seed"] = config.experiment.seed;
  manifest["num_routes"] = config.experiment.num_routes;
  ordered_json weights = ordered_json::array();
  for (std::size_t w = 0; w < config.experiment.weights.size(); ++w)
    weights.push_back({{"index", w},
                       {"w_ho", config.experiment.weights[w].w_ho},
                       {"w_rsrp", config.experiment.weights[w].w_rsrp}});
  manifest["weights"] = weights;
  ordered_json routes = ordered_json::array();
  for (const auto& r : result.routes) {
    ordered_json seeds = ordered_json::array();
    for (std::size_t w = 0; w < config.experiment.weights.size(); ++w)
      seeds.push_back(training_seed(config.experiment.seed, r.route_id, w));
    routes.push_back({{"route_id", r.route_id},
                      {"endpoint_seed", r.endpoint_seed},
                      {"start", {r.start.x, r.start.y}},
                      {"end", {r.end.x, r.end.y}},
                      {"waypoints", r.waypoints},
                      {"training_seeds", seeds}});
  }
  manifest["routes"] = routes;
  ordered_json skipped = ordered_json::array();
  for (const auto& s : result.skipped)
    skipped.push_back({{"route_id", s.route_id}, {"uncovered_waypoints", s.uncovered_waypoints}});
  manifest["skipped"] = skipped;
  write_file(config.output_dir, "manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });

  for (const auto& s : result.per_weight)
    log << series_label(s.weights) << ": mean HOs " << csv::format(s.mean_hos_proposed) << " (baseline "
        << csv::format(s.mean_hos_baseline) << "), mean HO ratio " << csv::format(s.mean_ho_ratio)
        << ", p5 RSRP " << csv::format(s.p5_rsrp_dbm) << " dBm\n";
  if (!result.skipped.empty()) log << "skipped routes: " << result.skipped.size() << "\n";
}

}  // namespace dronho::cli
