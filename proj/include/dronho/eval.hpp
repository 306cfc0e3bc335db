#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dronho/qlearn.hpp"
#include "dronho/radio_map.hpp"
#include "dronho/trajectory.hpp"

namespace dronho {

/// Route contains waypoints outside the populated part of the map.
class UncoveredRouteError : public std::runtime_error {
public:
  explicit UncoveredRouteError(std::vector<std::size_t> waypoints);
  const std::vector<std::size_t>& waypoints() const { return waypoints_; }

private:
  std::vector<std::size_t> waypoints_;
};

class ExperimentError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct WeightPair {
  double w_ho = 0.0;
  double w_rsrp = 1.0;
  bool operator==(const WeightPair&) const = default;
};

struct FlightResult {
  std::size_t route_id = 0;
  WeightPair weights;
  std::size_t waypoints = 0;
  std::size_t ho_proposed = 0;
  std::size_t ho_baseline = 0;
  /// Empty when the baseline makes no handover but the proposed policy does.
  std::optional<double> ho_ratio;
  std::vector<double> rsrp_proposed_dbm;
  std::vector<double> rsrp_baseline_dbm;
  Policy proposed;
  Policy baseline;
};

/// HO ratio for one flight. 0/0 counts as 1; n/0 with n > 0 is excluded.
std::optional<double> handover_ratio(std::size_t proposed, std::size_t baseline);

/// Trains on the route with hp (weights taken from hp) and compares the
/// learned policy with the strongest-cell baseline. Throws
/// UncoveredRouteError when any waypoint falls in an empty bin.
FlightResult run_flight(const RsrpGrid& grid, const Trajectory& trajectory, const HyperParams& hp,
                        std::uint64_t seed, std::size_t route_id = 0);

/// Empirical CDF with one step per distinct value.
class CdfSeries {
public:
  CdfSeries() = default;
  std::size_t sample_count() const { return total_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probabilities() const { return probs_; }

  /// F(x): fraction of samples <= x.
  double at(double x) const;
  /// Smallest sample value v with F(v) >= q, for q in (0, 1].
  double percentile(double q) const;
  double mean() const { return mean_; }

private:
  friend CdfSeries empirical_cdf(std::span<const double> values);
  std::vector<double> values_;
  std::vector<double> probs_;
  std::vector<std::size_t> cumulative_;
  std::size_t total_ = 0;
  double mean_ = 0.0;
};

/// Throws std::invalid_argument on empty input.
CdfSeries empirical_cdf(std::span<const double> values);

struct ExperimentConfig {
  std::size_t num_routes = 2000;
  std::vector<WeightPair> weights{{0.0, 1.0}, {0.1, 0.9}, {0.2, 0.8}, {0.5, 0.5}, {0.8, 0.2}};
  HyperParams hp;
  double step_length_m = 50.0;
  double min_route_length_m = 1000.0;
  std::uint64_t seed = 2020;
  std::size_t parallel = 1;

  void validate() const;
};

struct WeightSummary {
  WeightPair weights;
  std::vector<FlightResult> flights;
  double mean_hos_proposed = 0.0;
  double mean_hos_baseline = 0.0;
  double mean_ho_ratio = 0.0;
  std::size_t ratio_excluded = 0;
  CdfSeries ho_proposed;
  CdfSeries ho_baseline;
  CdfSeries ho_ratio;
  CdfSeries rsrp_proposed_dbm;
  CdfSeries rsrp_baseline_dbm;
  double p5_rsrp_dbm = 0.0;
  double min_rsrp_dbm = 0.0;
};

struct SkippedRoute {
  std::size_t route_id = 0;
  std::vector<std::size_t> uncovered_waypoints;
};

struct RouteSeed {
  std::size_t route_id = 0;
  std::uint64_t endpoint_seed = 0;
  Position start;
  Position end;
  std::size_t waypoints = 0;
};

struct SweepResult {
  std::vector<WeightSummary> per_weight;
  std::vector<SkippedRoute> skipped;
  std::vector<RouteSeed> routes;
};

std::uint64_t route_seed(std::uint64_t master, std::size_t route_id);
std::uint64_t training_seed(std::uint64_t master, std::size_t route_id, std::size_t weight_index);

/// The same num_routes random routes are flown under every weight pair.
/// Output does not depend on config.parallel.
SweepResult sweep(const RsrpGrid& grid, const ExperimentConfig& config);

/// route_id,w_ho,w_rsrp,ho_proposed,ho_baseline,ho_ratio
void write_flights_csv(std::ostream& out, const SweepResult& result);
/// w_ho,w_rsrp,mean_hos_proposed,mean_hos_baseline,mean_ho_ratio,p5_rsrp_dbm,min_rsrp_dbm
void write_summary_csv(std::ostream& out, const SweepResult& result);

enum class CdfKind { HandoverCount, HandoverRatio, RsrpDbm };
/// value,cum_prob,series_label. One series per weight pair plus the baseline.
void write_cdf_csv(std::ostream& out, const SweepResult& result, CdfKind kind);
void write_cdf_rows(std::ostream& out, const CdfSeries& cdf, const std::string& label);

std::string series_label(const WeightPair& w);

}  // namespace dronho
