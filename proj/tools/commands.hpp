#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "run_config.hpp"

namespace dronho::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfigInvalid = 2,
  kRuntimeFailure = 3,
};

struct RouteOptions {
  std::optional<std::filesystem::path> route_csv;
  std::optional<Position> start;
  std::optional<Position> end;
  /// Draw the route_id-th random route of the experiment instead.
  std::optional<std::size_t> random_route;
};

/// grid.csv and association.csv (plus samples.csv when requested).
void cmd_synth_map(const RunConfig& config, bool write_samples, std::ostream& log);

/// route.csv
void cmd_gen_route(const RunConfig& config, const RouteOptions& route, std::ostream& log);

/// policy.csv, baseline_policy.csv and qtable.csv. With oracle, also
/// dp_policy.csv and oracle_report.json.
void cmd_train(const RunConfig& config, const RouteOptions& route, bool oracle, std::ostream& log);

/// summary.csv, flights.csv, cdf_hos.csv, cdf_ho_ratio.csv, cdf_rsrp.csv and
/// manifest.json.
void cmd_sweep(const RunConfig& config, std::ostream& log);

/// Resolves the route described by options (or the config's route section).
Trajectory resolve_route(const RunConfig& config, const RouteOptions& route);

}  // namespace dronho::cli
