#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dronho/errors.hpp"
#include "dronho/eval.hpp"
#include "oracles.hpp"

using namespace dronho;

namespace {

// A 1 x n strip of bins with random per-cell RSRP.
RsrpGrid strip_grid(std::size_t bins, std::size_t cells, std::uint64_t seed) {
  GridSpec spec{50.0 * static_cast<double>(bins), 50.0, 50.0, {}};
  Rng rng(seed);
  RsrpSampleSet s(cells);
  std::vector<double> row(cells);
  for (std::size_t b = 0; b < bins; ++b) {
    for (auto& v : row) v = rng.uniform(-110.0, -60.0);
    s.add(spec.bin_center({b, 0}), row);
  }
  return quantize(s, spec);
}

Trajectory strip_route(const RsrpGrid& g) {
  const GridSpec& s = g.spec();
  return generate_trajectory({25.0, 25.0}, {s.width_m - 25.0, 25.0}, 50.0, s);
}

const RsrpGrid& default_grid() {
  static const RsrpGrid grid = [] {
    GridSpec spec;
    return quantize(synthesize_samples(default_synthetic_config(spec), spec, 1), spec);
  }();
  return grid;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("handover ratio conventions") {
  CHECK(*handover_ratio(3, 6) == 0.5);
  CHECK(*handover_ratio(0, 0) == 1.0);
  CHECK_FALSE(handover_ratio(2, 0).has_value());
  CHECK(*handover_ratio(4, 4) == 1.0);
}

TEST_CASE("empirical CDF basics") {
  std::vector<double> one{5.0};
  CdfSeries c1 = empirical_cdf(one);
  CHECK(c1.values() == std::vector<double>{5.0});
  CHECK(c1.probabilities() == std::vector<double>{1.0});
  CHECK(c1.at(4.999) == 0.0);
  CHECK(c1.at(5.0) == 1.0);

  std::vector<double> four{3.0, 1.0, 4.0, 2.0};
  CdfSeries c4 = empirical_cdf(four);
  CHECK(c4.values() == std::vector<double>{1.0, 2.0, 3.0, 4.0});
  CHECK(c4.probabilities() == std::vector<double>{0.25, 0.5, 0.75, 1.0});
  CHECK(c4.mean() == 2.5);

  std::vector<double> dup{1.0, 1.0, 2.0};
  CdfSeries cd = empirical_cdf(dup);
  CHECK(cd.values() == std::vector<double>{1.0, 2.0});
  CHECK(cd.probabilities()[0] == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(empirical_cdf(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("percentiles match direct order statistics") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 1 + rng.index(500);
    std::vector<double> v(n);
    for (auto& x : v) x = std::round(rng.uniform(-100.0, -60.0) * 4.0) / 4.0;
    CdfSeries cdf = empirical_cdf(v);
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (double q : {0.05, 0.1, 0.5, 0.95, 1.0}) {
      auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
      rank = std::max<std::size_t>(rank, 1);
      CHECK(cdf.percentile(q) == sorted[rank - 1]);
    }
    CHECK(cdf.probabilities().back() == 1.0);
    CHECK(std::is_sorted(cdf.probabilities().begin(), cdf.probabilities().end()));
  }
}

TEST_CASE("run_flight with zero HO weight reproduces the baseline") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RsrpGrid g = strip_grid(30, 6, seed);
    HyperParams hp;
    hp.w_ho = 0.0;
    hp.w_rsrp = 1.0;
    FlightResult r = run_flight(g, strip_route(g), hp, seed);
    CHECK(r.ho_ratio.has_value());
    CHECK(*r.ho_ratio == 1.0);
    CHECK(r.proposed.cells == r.baseline.cells);
    CHECK(r.rsrp_proposed_dbm == r.rsrp_baseline_dbm);
  }
}

TEST_CASE("run_flight on a single-waypoint route") {
  RsrpGrid g = strip_grid(3, 4, 1);
  Trajectory t = generate_trajectory({75.0, 25.0}, {75.0, 25.0}, 50.0, g.spec());
  FlightResult r = run_flight(g, t, HyperParams{}, 1);
  CHECK(r.ho_proposed == 0);
  CHECK(r.ho_baseline == 0);
  CHECK(*r.ho_ratio == 1.0);
}

TEST_CASE("run_flight matches the DP oracle on small instances") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RsrpGrid g = strip_grid(5, 3, 100 + seed);
    Trajectory t = strip_route(g);
    REQUIRE(t.size() == 5);
    HyperParams hp;
    hp.k = 2;
    hp.episodes = 5000;
    FlightResult r = run_flight(g, t, hp, seed);
    CandidateTable ct = build_candidates(g, t, 2);
    RewardModel m = build_reward(ct, hp.w_ho, hp.w_rsrp);
    DpSolution dp = dp_optimal(m.reward, hp.lambda);
    CHECK(r.ho_proposed == policy_from_ranks(ct, dp.ranks).handover_count());
    CHECK(discounted_return(m.reward, r.proposed.ranks, hp.lambda) >=
          discounted_return(m.reward, r.baseline.ranks, hp.lambda) - 1e-12);
  }
}

TEST_CASE("run_flight refuses uncovered routes") {
  GridSpec spec{150.0, 50.0, 50.0, {}};
  RsrpSampleSet s(2);
  s.add({25, 25}, std::vector<double>{-70.0, -80.0});
  s.add({125, 25}, std::vector<double>{-75.0, -65.0});
  RsrpGrid g = quantize(s, spec);
  Trajectory t = generate_trajectory({25, 25}, {125, 25}, 50.0, spec);
  try {
    run_flight(g, t, HyperParams{.k = 2}, 1);
    FAIL("expected UncoveredRouteError");
  } catch (const UncoveredRouteError& e) {
    CHECK(e.waypoints() == std::vector<std::size_t>{1});
  }
}

TEST_CASE("sweep aggregates, determinism and parallel independence") {
  ExperimentConfig cfg;
  cfg.num_routes = 30;
  cfg.seed = 77;
  SweepResult a = sweep(default_grid(), cfg);
  REQUIRE(a.per_weight.size() == 5);
  CHECK(a.skipped.empty());

  const WeightSummary& zero = a.per_weight.front();
  CHECK(zero.mean_ho_ratio == 1.0);
  CHECK(zero.rsrp_proposed_dbm.values() == zero.rsrp_baseline_dbm.values());
  CHECK(zero.rsrp_proposed_dbm.probabilities() == zero.rsrp_baseline_dbm.probabilities());

  for (const auto& s : a.per_weight) {
    REQUIRE(s.flights.size() == 30);
    double sum = 0.0;
    for (const auto& f : s.flights) sum += static_cast<double>(f.ho_proposed);
    CHECK(s.mean_hos_proposed == doctest::Approx(sum / 30.0).epsilon(1e-14));
    CHECK(s.ho_proposed.mean() == s.mean_hos_proposed);
    CHECK(s.mean_hos_baseline == zero.mean_hos_baseline);
    CHECK(s.p5_rsrp_dbm == s.rsrp_proposed_dbm.percentile(0.05));
    CHECK(s.min_rsrp_dbm <= s.p5_rsrp_dbm);
  }

  cfg.parallel = 3;
  SweepResult b = sweep(default_grid(), cfg);
  std::ostringstream sa, sb, ca, cb;
  write_summary_csv(sa, a);
  write_summary_csv(sb, b);
  write_cdf_csv(ca, a, CdfKind::RsrpDbm);
  write_cdf_csv(cb, b, CdfKind::RsrpDbm);
  CHECK(sa.str() == sb.str());
  CHECK(ca.str() == cb.str());
}

TEST_CASE("sweep routes are shared across weights and independent of route count") {
  ExperimentConfig cfg;
  cfg.num_routes = 5;
  cfg.weights = {{0.5, 0.5}};
  SweepResult small = sweep(default_grid(), cfg);
  cfg.num_routes = 8;
  SweepResult large = sweep(default_grid(), cfg);
  for (std::size_t r = 0; r < 5; ++r) {
    CHECK(small.routes[r].start == large.routes[r].start);
    CHECK(small.per_weight[0].flights[r].ho_proposed == large.per_weight[0].flights[r].ho_proposed);
  }
}

TEST_CASE("sweep fails when no route is covered") {
  GridSpec spec{1000.0, 1000.0, 50.0, {}};
  RsrpSampleSet s(2);
  s.add({1, 1}, std::vector<double>{-70.0, -80.0});
  s.add({2, 2}, std::vector<double>{-75.0, -65.0});
  RsrpGrid g = quantize(s, spec);
  ExperimentConfig cfg;
  cfg.num_routes = 3;
  cfg.min_route_length_m = 500.0;
  cfg.hp.k = 2;
  CHECK_THROWS_AS(sweep(g, cfg), ExperimentError);
}

TEST_CASE("experiment config validation") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.num_routes = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.weights = {{0.0, 0.0}};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.weights = {{-1.0, 1.0}};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("result CSV layouts") {
  ExperimentConfig cfg;
  cfg.num_routes = 2;
  cfg.weights = {{0.0, 1.0}, {0.5, 0.5}};
  SweepResult r = sweep(default_grid(), cfg);
  std::ostringstream flights, summary, cdf;
  write_flights_csv(flights, r);
  write_summary_csv(summary, r);
  write_cdf_csv(cdf, r, CdfKind::HandoverCount);
  std::string f = flights.str();
  CHECK(f.rfind("route_id,w_ho,w_rsrp,ho_proposed,ho_baseline,ho_ratio\n0,0,1,", 0) == 0);
  CHECK(std::count(f.begin(), f.end(), '\n') == 5);
  CHECK(summary.str().rfind(
            "w_ho,w_rsrp,mean_hos_proposed,mean_hos_baseline,mean_ho_ratio,p5_rsrp_dbm,min_rsrp_dbm\n0,1,", 0) == 0);
  CHECK(cdf.str().rfind("value,cum_prob,series_label\n", 0) == 0);
  CHECK(cdf.str().find(",baseline\n") != std::string::npos);
  CHECK(cdf.str().find(",w_ho=0.5;w_rsrp=0.5\n") != std::string::npos);
}

}  // TEST_SUITE
