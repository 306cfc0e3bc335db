#include "dronho/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "dronho/csv.hpp"
#include "dronho/errors.hpp"
#include "dronho/rng.hpp"

namespace dronho {

UncoveredRouteError::UncoveredRouteError(std::vector<std::size_t> waypoints)
    : std::runtime_error([&] {
        std::string msg = "route crosses unpopulated bins at waypoints";
        for (std::size_t w : waypoints) msg += " " + std::to_string(w);
        return msg;
      }()),
      waypoints_(std::move(waypoints)) {}

std::optional<double> handover_ratio(std::size_t proposed, std::size_t baseline) {
  if (baseline > 0) return static_cast<double>(proposed) / static_cast<double>(baseline);
  if (proposed == 0) return 1.0;
  return std::nullopt;
}

FlightResult run_flight(const RsrpGrid& grid, const Trajectory& trajectory, const HyperParams& hp,
                        std::uint64_t seed, std::size_t route_id) {
  hp.validate();
  if (auto gaps = validate_route_coverage(trajectory, grid); !gaps.empty())
    throw UncoveredRouteError(std::move(gaps));

  FlightResult r;
  r.route_id = route_id;
  r.weights = {hp.w_ho, hp.w_rsrp};
  r.waypoints = trajectory.size();

  CandidateTable candidates = build_candidates(grid, trajectory, hp.k);
  r.baseline = baseline_policy(candidates);
  if (trajectory.size() < 2) {
    r.proposed = r.baseline;
  } else {
    RewardModel model = build_reward(candidates, hp.w_ho, hp.w_rsrp);
    QTable q = train(model.reward, hp, seed);
    r.proposed = extract_policy(q, candidates);
  }
  r.ho_proposed = r.proposed.handover_count();
  r.ho_baseline = r.baseline.handover_count();
  r.ho_ratio = handover_ratio(r.ho_proposed, r.ho_baseline);
  r.rsrp_proposed_dbm = r.proposed.raw_dbm;
  r.rsrp_baseline_dbm = r.baseline.raw_dbm;
  return r;
}

// CDF ----------------------------------------------------------------------------------

CdfSeries empirical_cdf(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("empirical CDF of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  CdfSeries cdf;
  cdf.total_ = sorted.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    sum += sorted[i];
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    cdf.values_.push_back(sorted[i]);
    cdf.cumulative_.push_back(i + 1);
    cdf.probs_.push_back(static_cast<double>(i + 1) / static_cast<double>(sorted.size()));
  }
  cdf.mean_ = sum / static_cast<double>(sorted.size());
  return cdf;
}

double CdfSeries::at(double x) const {
  auto it = std::upper_bound(values_.begin(), values_.end(), x);
  if (it == values_.begin()) return 0.0;
  return probs_[static_cast<std::size_t>(it - values_.begin()) - 1];
}

double CdfSeries::percentile(double q) const {
  if (total_ == 0) throw std::logic_error("percentile of an empty CDF");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("percentile level must lie in (0, 1]");
  // 1-based order statistic ceil(q * N).
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(total_) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, total_);
  auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), rank);
  return values_[static_cast<std::size_t>(it - cumulative_.begin())];
}

// Sweep -------------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (num_routes < 1) throw ConfigError("num_routes must be at least 1");
  if (weights.empty()) throw ConfigError("at least one weight pair is required");
  for (const auto& w : weights) {
    if (!(w.w_ho >= 0.0) || !(w.w_rsrp >= 0.0)) throw ConfigError("weights must be nonnegative");
    if (!(w.w_ho + w.w_rsrp > 0.0)) throw ConfigError("a weight pair cannot be all zero");
  }
  if (!(step_length_m > 0.0)) throw ConfigError("step_length_m must be positive");
  if (min_route_length_m < 0.0) throw ConfigError("min_route_length_m must be nonnegative");
  if (parallel < 1) throw ConfigError("parallel must be at least 1");
  HyperParams probe = hp;
  probe.w_ho = weights.front().w_ho;
  probe.w_rsrp = weights.front().w_rsrp;
  probe.validate();
}

std::uint64_t route_seed(std::uint64_t master, std::size_t route_id) {
  return derive_seed(master, {0, route_id});
}

std::uint64_t training_seed(std::uint64_t master, std::size_t route_id, std::size_t weight_index) {
  return derive_seed(master, {1, route_id, weight_index});
}

namespace {

// Runs fn(task) for task in [0, count) on up to `workers` threads. The first
// exception raised by any task is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t t = 0; t < count; ++t) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t t; (t = next.fetch_add(1)) < count;) {
          try {
            fn(t);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
  }
  if (failure) std::rethrow_exception(failure);
}

WeightSummary summarize(WeightPair w, std::vector<FlightResult> flights) {
  WeightSummary s;
  s.weights = w;
  std::vector<double> ho_p, ho_b, ratios, rsrp_p, rsrp_b;
  for (const auto& f : flights) {
    ho_p.push_back(static_cast<double>(f.ho_proposed));
    ho_b.push_back(static_cast<double>(f.ho_baseline));
    if (f.ho_ratio)
      ratios.push_back(*f.ho_ratio);
    else
      ++s.ratio_excluded;
    rsrp_p.insert(rsrp_p.end(), f.rsrp_proposed_dbm.begin(), f.rsrp_proposed_dbm.end());
    rsrp_b.insert(rsrp_b.end(), f.rsrp_baseline_dbm.begin(), f.rsrp_baseline_dbm.end());
  }
  s.ho_proposed = empirical_cdf(ho_p);
  s.ho_baseline = empirical_cdf(ho_b);
  s.mean_hos_proposed = s.ho_proposed.mean();
  s.mean_hos_baseline = s.ho_baseline.mean();
  if (!ratios.empty()) {
    s.ho_ratio = empirical_cdf(ratios);
    s.mean_ho_ratio = s.ho_ratio.mean();
  } else {
    s.mean_ho_ratio = std::nan("");
  }
  s.rsrp_proposed_dbm = empirical_cdf(rsrp_p);
  s.rsrp_baseline_dbm = empirical_cdf(rsrp_b);
  s.p5_rsrp_dbm = s.rsrp_proposed_dbm.percentile(0.05);
  s.min_rsrp_dbm = s.rsrp_proposed_dbm.values().front();
  s.flights = std::move(flights);
  return s;
}

}  // namespace

SweepResult sweep(const RsrpGrid& grid, const ExperimentConfig& config) {
  config.validate();
  const GridSpec& spec = grid.spec();
  SweepResult result;

  std::vector<Trajectory> routes;
  std::vector<std::size_t> route_ids;
  for (std::size_t r = 0; r < config.num_routes; ++r) {
    std::uint64_t seed = route_seed(config.seed, r);
    RouteEndpoints e = random_endpoints(spec, config.min_route_length_m, seed);
    Trajectory t = generate_trajectory(e.start, e.end, config.step_length_m, spec);
    result.routes.push_back({r, seed, e.start, e.end, t.size()});
    if (auto gaps = validate_route_coverage(t, grid); !gaps.empty()) {
      result.skipped.push_back({r, std::move(gaps)});
      continue;
    }
    routes.push_back(std::move(t));
    route_ids.push_back(r);
  }
  if (routes.empty()) throw ExperimentError("every route crosses unpopulated bins");

  const std::size_t nw = config.weights.size();
  const std::size_t nr = routes.size();
  std::vector<FlightResult> flights(nw * nr);
  parallel_for(nw * nr, config.parallel, [&](std::size_t task) {
    std::size_t w = task / nr;
    std::size_t r = task % nr;
    HyperParams hp = config.hp;
    hp.w_ho = config.weights[w].w_ho;
    hp.w_rsrp = config.weights[w].w_rsrp;
    flights[task] = run_flight(grid, routes[r], hp, training_seed(config.seed, route_ids[r], w), route_ids[r]);
  });

  for (std::size_t w = 0; w < nw; ++w) {
    std::vector<FlightResult> per(std::make_move_iterator(flights.begin() + static_cast<std::ptrdiff_t>(w * nr)),
                                  std::make_move_iterator(flights.begin() + static_cast<std::ptrdiff_t>((w + 1) * nr)));
    result.per_weight.push_back(summarize(config.weights[w], std::move(per)));
  }
  return result;
}

// Output ---------------------------------------------------------------------------

std::string series_label(const WeightPair& w) {
  return "w_ho=" + csv::format(w.w_ho) + ";w_rsrp=" + csv::format(w.w_rsrp);
}

void write_flights_csv(std::ostream& out, const SweepResult& result) {
  out << "route_id,w_ho,w_rsrp,ho_proposed,ho_baseline,ho_ratio\n";
  for (const auto& s : result.per_weight)
    for (const auto& f : s.flights) {
      out << f.route_id << ',' << csv::format(f.weights.w_ho) << ',' << csv::format(f.weights.w_rsrp)
          << ',' << f.ho_proposed << ',' << f.ho_baseline << ',';
      if (f.ho_ratio) out << csv::format(*f.ho_ratio);
      out << '\n';
    }
}

void write_summary_csv(std::ostream& out, const SweepResult& result) {
  out << "w_ho,w_rsrp,mean_hos_proposed,mean_hos_baseline,mean_ho_ratio,p5_rsrp_dbm,min_rsrp_dbm\n";
  for (const auto& s : result.per_weight)
    out << csv::format(s.weights.w_ho) << ',' << csv::format(s.weights.w_rsrp) << ','
        << csv::format(s.mean_hos_proposed) << ',' << csv::format(s.mean_hos_baseline) << ','
        << csv::format(s.mean_ho_ratio) << ',' << csv::format(s.p5_rsrp_dbm) << ','
        << csv::format(s.min_rsrp_dbm) << '\n';
}

void write_cdf_rows(std::ostream& out, const CdfSeries& cdf, const std::string& label) {
  for (std::size_t i = 0; i < cdf.values().size(); ++i)
    out << csv::format(cdf.values()[i]) << ',' << csv::format(cdf.probabilities()[i]) << ',' << label
        << '\n';
}

void write_cdf_csv(std::ostream& out, const SweepResult& result, CdfKind kind) {
  out << "value,cum_prob,series_label\n";
  if (result.per_weight.empty()) return;
  // The baseline does not depend on the weights; its series comes from the first pair.
  const WeightSummary& first = result.per_weight.front();
  switch (kind) {
    case CdfKind::HandoverCount:
      write_cdf_rows(out, first.ho_baseline, "baseline");
      for (const auto& s : result.per_weight) write_cdf_rows(out, s.ho_proposed, series_label(s.weights));
      break;
    case CdfKind::HandoverRatio:
      for (const auto& s : result.per_weight)
        if (s.ho_ratio.sample_count() > 0) write_cdf_rows(out, s.ho_ratio, series_label(s.weights));
      break;
    case CdfKind::RsrpDbm:
      write_cdf_rows(out, first.rsrp_baseline_dbm, "baseline");
      for (const auto& s : result.per_weight)
        write_cdf_rows(out, s.rsrp_proposed_dbm, series_label(s.weights));
      break;
  }
}

}  // namespace dronho
