#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "dronho/eval.hpp"
#include "dronho/qlearn.hpp"
#include "dronho/radio_map.hpp"

namespace dronho::cli {

enum class MapSource { Synthetic, SamplesCsv };

struct MapConfig {
  MapSource source = MapSource::Synthetic;
  std::filesystem::path samples_csv;
  std::size_t samples_per_bin = 1;
  double altitude_m = 50.0;
  SyntheticMapConfig synthetic;
};

struct RouteSpec {
  Position start{500.0, 2500.0};
  Position end{5500.0, 2500.0};
};

/// Everything a command needs, loaded from one JSON document.
struct RunConfig {
  GridSpec grid;
  MapConfig map;
  ExperimentConfig experiment;
  RouteSpec route;
  std::filesystem::path output_dir = "out";

  /// Throws ConfigError on the first violated invariant.
  void validate() const;
};

/// Unknown keys and wrongly typed values raise ConfigError. Missing keys keep
/// their defaults; a synthetic map without bs_positions uses the default
/// seven-site layout for the configured grid.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig default_run_config();

/// Accepts "w_ho:w_rsrp,w_ho:w_rsrp,...".
std::vector<WeightPair> parse_weight_list(const std::string& text);
Position parse_position(const std::string& text);

/// Builds the radio map described by the config.
RsrpGrid build_grid(const RunConfig& config);

}  // namespace dronho::cli
