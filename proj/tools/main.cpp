#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "dronho/errors.hpp"

using namespace dronho;
using namespace dronho::cli;

int main(int argc, char** argv) {
  CLI::App app{"Q-learning handover optimization for cellular-connected drones"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> map_seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> parallel;
  std::optional<std::string> weights;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed for routes and training");
  app.add_option("--map-seed", map_seed, "seed of the synthetic radio map");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--parallel", parallel, "worker threads for sweeps");
  app.add_option("--weights", weights, "weight pairs as w_ho:w_rsrp,...");

  auto add_route_options = [](CLI::App* cmd, RouteOptions& r, std::optional<std::string>& start,
                              std::optional<std::string>& end, std::optional<std::string>& file) {
    cmd->add_option("--start", start, "route start x,y in metres");
    cmd->add_option("--end", end, "route end x,y in metres");
    cmd->add_option("--random", r.random_route, "use the n-th random route of the experiment");
    cmd->add_option("--route", file, "trajectory CSV to fly")->check(CLI::ExistingFile);
  };

  bool write_samples = false;
  auto* synth = app.add_subcommand("synth-map", "synthesize and quantize the radio map");
  synth->add_flag("--samples", write_samples, "also write the raw samples");

  RouteOptions route;
  std::optional<std::string> start, end, route_file;
  auto* gen = app.add_subcommand("gen-route", "generate an eight-direction trajectory");
  add_route_options(gen, route, start, end, route_file);

  bool oracle = false;
  auto* train_cmd = app.add_subcommand("train", "learn the handover policy for one route");
  add_route_options(train_cmd, route, start, end, route_file);
  train_cmd->add_flag("--oracle", oracle, "also solve the route exactly and compare");

  auto* sweep_cmd = app.add_subcommand("sweep", "multi-route experiment over weight pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  RunConfig config;
  try {
    config = config_path.empty() ? default_run_config() : load_run_config(config_path);
    if (seed) config.experiment.seed = *seed;
    if (map_seed) config.map.synthetic.seed = *map_seed;
    if (out_dir) config.output_dir = *out_dir;
    if (parallel) config.experiment.parallel = *parallel;
    if (weights) {
      config.experiment.weights = parse_weight_list(*weights);
      if (config.experiment.weights.empty()) throw ConfigError("--weights is empty");
      config.experiment.hp.w_ho = config.experiment.weights.front().w_ho;
      config.experiment.hp.w_rsrp = config.experiment.weights.front().w_rsrp;
    }
    if (start) route.start = parse_position(*start);
    if (end) route.end = parse_position(*end);
    if (route_file) route.route_csv = *route_file;
    config.validate();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigInvalid;
  }

  try {
    if (*synth) cmd_synth_map(config, write_samples, std::cout);
    else if (*gen) cmd_gen_route(config, route, std::cout);
    else if (*train_cmd) cmd_train(config, route, oracle, std::cout);
    else if (*sweep_cmd) cmd_sweep(config, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kOk;
}
