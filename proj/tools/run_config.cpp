#include "run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dronho/csv.hpp"
#include "dronho/errors.hpp"

namespace dronho::cli {

using nlohmann::json;

namespace {

// Rejects keys outside `allowed` for the object at `where`.
void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_unsigned()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ConfigError("");
    }
    out = it->get<T>();
  } catch (const std::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

Position read_position(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(where + " must be a two-element [x, y] array");
  return {v[0].get<double>(), v[1].get<double>()};
}

void read_position(const json& obj, const char* key, const std::string& where, Position& out) {
  if (auto it = obj.find(key); it != obj.end()) out = read_position(*it, where + "." + key);
}

void parse_synthetic(const json& j, SyntheticMapConfig& s, bool& has_positions) {
  const std::string where = "map.synthetic";
  check_keys(j, where,
             {"bs_positions", "sectors_per_bs", "sector_azimuths", "bs_height_m", "altitude_m",
              "tx_power_dbm", "path_loss_exponent", "reference_loss_db", "main_lobe_gain_db",
              "sidelobe_gain_db", "downtilt_rad", "beamwidth_rad", "vertical_beamwidth_rad",
              "shadowing_std_db", "shadowing_decorrelation_m", "seed"});
  if (auto it = j.find("bs_positions"); it != j.end()) {
    if (!it->is_array()) throw ConfigError(where + ".bs_positions must be an array");
    s.bs_positions.clear();
    for (const auto& p : *it) s.bs_positions.push_back(read_position(p, where + ".bs_positions[]"));
    has_positions = true;
  }
  if (auto it = j.find("sector_azimuths"); it != j.end()) {
    if (!it->is_array()) throw ConfigError(where + ".sector_azimuths must be an array");
    s.sector_azimuths.clear();
    for (const auto& a : *it) {
      if (!a.is_number()) throw ConfigError(where + ".sector_azimuths must hold numbers");
      s.sector_azimuths.push_back(a.get<double>());
    }
  }
  read(j, "sectors_per_bs", where, s.sectors_per_bs);
  read(j, "bs_height_m", where, s.bs_height_m);
  read(j, "altitude_m", where, s.altitude_m);
  read(j, "tx_power_dbm", where, s.tx_power_dbm);
  read(j, "path_loss_exponent", where, s.path_loss_exponent);
  read(j, "reference_loss_db", where, s.reference_loss_db);
  read(j, "main_lobe_gain_db", where, s.main_lobe_gain_db);
  read(j, "sidelobe_gain_db", where, s.sidelobe_gain_db);
  read(j, "downtilt_rad", where, s.downtilt_rad);
  read(j, "beamwidth_rad", where, s.beamwidth_rad);
  read(j, "vertical_beamwidth_rad", where, s.vertical_beamwidth_rad);
  read(j, "shadowing_std_db", where, s.shadowing_std_db);
  read(j, "shadowing_decorrelation_m", where, s.shadowing_decorrelation_m);
  read(j, "seed", where, s.seed);
}

void parse_hyper(const json& j, HyperParams& hp) {
  const std::string where = "hyper";
  check_keys(j, where,
             {"alpha", "lambda", "epsilon", "episodes", "w_ho", "w_rsrp", "k",
              "conventional_epsilon_greedy"});
  read(j, "alpha", where, hp.alpha);
  read(j, "lambda", where, hp.lambda);
  read(j, "epsilon", where, hp.epsilon);
  read(j, "episodes", where, hp.episodes);
  read(j, "w_ho", where, hp.w_ho);
  read(j, "w_rsrp", where, hp.w_rsrp);
  read(j, "k", where, hp.k);
  read(j, "conventional_epsilon_greedy", where, hp.conventional_epsilon_greedy);
}

void parse_experiment(const json& j, ExperimentConfig& e) {
  const std::string where = "experiment";
  check_keys(j, where,
             {"num_routes", "weights", "step_length_m", "min_route_length_m", "seed", "parallel"});
  read(j, "num_routes", where, e.num_routes);
  read(j, "step_length_m", where, e.step_length_m);
  read(j, "min_route_length_m", where, e.min_route_length_m);
  read(j, "seed", where, e.seed);
  read(j, "parallel", where, e.parallel);
  if (auto it = j.find("weights"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("experiment.weights must be an array of [w_ho, w_rsrp]");
    e.weights.clear();
    for (const auto& w : *it) {
      Position p = read_position(w, "experiment.weights[]");
      e.weights.push_back({p.x, p.y});
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  grid.validate();
  if (map.source == MapSource::Synthetic) {
    map.synthetic.validate(grid);
    if (map.samples_per_bin < 1) throw ConfigError("map.samples_per_bin must be at least 1");
  } else if (map.samples_csv.empty()) {
    throw ConfigError("map.samples_csv is required when map.source is \"csv\"");
  }
  experiment.validate();
  if (experiment.hp.k > (map.source == MapSource::Synthetic ? map.synthetic.num_cells() : experiment.hp.k))
    throw ConfigError("hyper.k exceeds the number of cells in the map");
  if (!grid.contains(route.start) || !grid.contains(route.end))
    throw ConfigError("route endpoints must lie inside the grid");
}

RunConfig default_run_config() {
  RunConfig c;
  c.map.synthetic = default_synthetic_config(c.grid);
  return c;
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, "config", {"grid", "map", "hyper", "experiment", "route", "output_dir"});

  RunConfig c;
  if (auto it = root.find("grid"); it != root.end()) {
    check_keys(*it, "grid", {"width_m", "height_m", "bin_size_m", "origin"});
    read(*it, "width_m", "grid", c.grid.width_m);
    read(*it, "height_m", "grid", c.grid.height_m);
    read(*it, "bin_size_m", "grid", c.grid.bin_size_m);
    read_position(*it, "origin", "grid", c.grid.origin);
  }
  c.grid.validate();

  bool has_positions = false;
  if (auto it = root.find("map"); it != root.end()) {
    check_keys(*it, "map", {"source", "samples_csv", "samples_per_bin", "altitude_m", "synthetic"});
    std::string source = "synthetic";
    read(*it, "source", "map", source);
    if (source == "synthetic")
      c.map.source = MapSource::Synthetic;
    else if (source == "csv")
      c.map.source = MapSource::SamplesCsv;
    else
      throw ConfigError("map.source must be \"synthetic\" or \"csv\"");
    std::string path;
    read(*it, "samples_csv", "map", path);
    c.map.samples_csv = path;
    read(*it, "samples_per_bin", "map", c.map.samples_per_bin);
    read(*it, "altitude_m", "map", c.map.altitude_m);
    if (auto s = it->find("synthetic"); s != it->end()) parse_synthetic(*s, c.map.synthetic, has_positions);
  }
  if (!has_positions) c.map.synthetic.bs_positions = default_synthetic_config(c.grid).bs_positions;

  if (auto it = root.find("hyper"); it != root.end()) parse_hyper(*it, c.experiment.hp);
  if (auto it = root.find("experiment"); it != root.end()) parse_experiment(*it, c.experiment);
  if (auto it = root.find("route"); it != root.end()) {
    check_keys(*it, "route", {"start", "end"});
    read_position(*it, "start", "route", c.route.start);
    read_position(*it, "end", "route", c.route.end);
  }
  std::string out = c.output_dir.string();
  read(root, "output_dir", "config", out);
  c.output_dir = out;
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::vector<WeightPair> parse_weight_list(const std::string& text) {
  std::vector<WeightPair> out;
  for (auto item : csv::split(text)) {
    auto colon = item.find(':');
    if (colon == std::string_view::npos) throw ConfigError("weight pair '" + std::string(item) + "' must be w_ho:w_rsrp");
    try {
      out.push_back({csv::parse_double(item.substr(0, colon)), csv::parse_double(item.substr(colon + 1))});
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
  }
  if (out.empty()) throw ConfigError("weight list is empty");
  return out;
}

Position parse_position(const std::string& text) {
  auto parts = csv::split(text);
  if (parts.size() != 2) throw ConfigError("position '" + text + "' must be x,y");
  try {
    return {csv::parse_double(parts[0]), csv::parse_double(parts[1])};
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
}

RsrpGrid build_grid(const RunConfig& config) {
  if (config.map.source == MapSource::Synthetic)
    return quantize(synthesize_samples(config.map.synthetic, config.grid, config.map.samples_per_bin),
                    config.grid);
  std::ifstream in(config.map.samples_csv);
  if (!in) throw std::runtime_error("cannot open sample CSV " + config.map.samples_csv.string());
  RsrpSampleSet samples = read_samples_csv(in, config.map.altitude_m);
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!config.grid.contains(samples.position(i)))
      throw ConfigError("sample " + std::to_string(i) + " lies outside the grid");
  if (config.experiment.hp.k > samples.num_cells())
    throw ConfigError("hyper.k exceeds the number of cells in the sample CSV");
  return quantize(samples, config.grid);
}

}  // namespace dronho::cli
