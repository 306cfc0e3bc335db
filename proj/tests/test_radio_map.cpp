#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "dronho/errors.hpp"
#include "dronho/radio_map.hpp"
#include "dronho/rng.hpp"
#include "oracles.hpp"

using namespace dronho;

namespace {

RsrpSampleSet one_cell_samples(std::initializer_list<std::pair<Position, double>> rows) {
  RsrpSampleSet s(1);
  for (auto [p, v] : rows) s.add(p, std::vector<double>{v});
  return s;
}

SyntheticMapConfig omni_single_site(const GridSpec& spec, Position bs) {
  SyntheticMapConfig cfg;
  cfg.bs_positions = {bs};
  cfg.sectors_per_bs = 1;
  cfg.sidelobe_gain_db = cfg.main_lobe_gain_db;  // flat pattern
  cfg.shadowing_std_db = 0.0;
  cfg.altitude_m = cfg.bs_height_m;  // 3D distance equals ground distance
  cfg.path_loss_exponent = 2.0;
  cfg.validate(spec);
  return cfg;
}

// Random map with a few cells; some bins deliberately share values to
// exercise tie-breaking.
RsrpGrid random_grid(std::uint64_t seed, std::size_t cells) {
  GridSpec spec{200.0, 200.0, 50.0, {}};
  Rng rng(seed);
  RsrpSampleSet s(cells);
  std::vector<double> row(cells);
  for (std::size_t i = 0; i < 64; ++i) {
    for (auto& v : row) v = std::round(rng.uniform(-110.0, -70.0));  // integer dBm, frequent ties
    s.add({rng.uniform(0.0, 200.0), rng.uniform(0.0, 200.0)}, row);
  }
  for (std::size_t by = 0; by < 4; ++by)
    for (std::size_t bx = 0; bx < 4; ++bx) {
      for (auto& v : row) v = std::round(rng.uniform(-110.0, -70.0));
      s.add(spec.bin_center({bx, by}), row);
    }
  return quantize(s, spec);
}

}  // namespace

TEST_SUITE("radio_map") {

TEST_CASE("grid spec bin geometry") {
  GridSpec spec;
  CHECK(spec.bins_x() == 120);
  CHECK(spec.bins_y() == 100);
  CHECK(spec.bin_of({0.0, 0.0}) == BinIndex{0, 0});
  CHECK(spec.bin_of({49.999, 50.0}) == BinIndex{0, 1});
  // Far edges belong to the last bin.
  CHECK(spec.bin_of({6000.0, 5000.0}) == BinIndex{119, 99});
  CHECK_THROWS_AS(spec.bin_of({-1.0, 0.0}), std::out_of_range);

  GridSpec odd{120.0, 70.0, 50.0, {10.0, -5.0}};
  CHECK(odd.bins_x() == 3);
  CHECK(odd.bins_y() == 2);
  CHECK(odd.bin_of({129.0, 64.0}) == BinIndex{2, 1});

  CHECK_THROWS_AS((GridSpec{0.0, 1.0, 1.0, {}}.validate()), ConfigError);
  CHECK_THROWS_AS((GridSpec{1.0, 1.0, -1.0, {}}.validate()), ConfigError);
}

TEST_CASE("normalize maps global extremes onto the unit interval") {
  auto s = one_cell_samples({{{0, 0}, -100.0}, {{1, 1}, -60.0}});
  auto [n, params] = normalize(s);
  CHECK(n.values(0)[0] == 0.0);
  CHECK(n.values(1)[0] == 1.0);

  auto three = one_cell_samples({{{0, 0}, -100.0}, {{1, 1}, -80.0}, {{2, 2}, -60.0}});
  auto [n3, p3] = normalize(three);
  CHECK(n3.values(1)[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p3.min_dbm == -100.0);
  CHECK(p3.max_dbm == -60.0);
}

TEST_CASE("normalize rejects empty and constant sample sets") {
  CHECK_THROWS_AS(normalize(RsrpSampleSet(2)), ConfigError);
  CHECK_THROWS_AS(normalize(one_cell_samples({{{0, 0}, -80.0}, {{1, 0}, -80.0}})), ConfigError);
}

TEST_CASE("denormalize inverts normalize and the map is monotone") {
  Rng rng(7);
  RsrpSampleSet s(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v{rng.uniform(-130, -50), rng.uniform(-130, -50), rng.uniform(-130, -50)};
    s.add({rng.uniform(0, 10), rng.uniform(0, 10)}, v);
  }
  auto [n, params] = normalize(s);
  RsrpSampleSet back = denormalize(n, params);
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t c = 0; c < 3; ++c) {
      double x = s.values(i)[c];
      CHECK(std::abs(back.values(i)[c] - x) <= 1e-12 * std::abs(x));
      CHECK(n.values(i)[c] >= 0.0);
      CHECK(n.values(i)[c] <= 1.0);
    }
  auto raw = s.all_values();
  auto norm = n.all_values();
  for (std::size_t a = 0; a < raw.size(); a += 7)
    for (std::size_t b = 0; b < raw.size(); b += 11)
      if (raw[a] < raw[b]) CHECK(norm[a] < norm[b]);
}

TEST_CASE("quantize averages samples per bin") {
  GridSpec spec{100.0, 100.0, 50.0, {}};
  auto s = one_cell_samples({{{10, 10}, -70.0}, {{20, 30}, -80.0}, {{60, 60}, -90.0}, {{99, 1}, -60.0}});
  RsrpGrid g = quantize(s, spec);
  CHECK(g.raw_mean_dbm({0, 0}, CellId{0}) == -75.0);
  CHECK(g.raw_mean_dbm({1, 1}, CellId{0}) == -90.0);  // singleton
  CHECK(g.sample_count({0, 0}) == 2);
  CHECK(g.populated_bins() == 3);
  CHECK_FALSE(g.populated({0, 1}));
  CHECK(g.norm({0, 0}, CellId{0}) == doctest::Approx((-75.0 + 90.0) / 30.0));
  CHECK_THROWS_AS(g.raw_mean_dbm({0, 1}, CellId{0}), UnpopulatedBinError);
  CHECK_THROWS_AS(g.top_k_cells(Position{10, 60}, 1), UnpopulatedBinError);
}

TEST_CASE("quantize is invariant to sample order") {
  GridSpec spec{200.0, 200.0, 50.0, {}};
  Rng rng(99);
  std::vector<std::pair<Position, std::vector<double>>> rows;
  for (int i = 0; i < 500; ++i)
    rows.push_back({{rng.uniform(0, 200), rng.uniform(0, 200)},
                    {rng.uniform(-120, -60), rng.uniform(-120, -60)}});
  auto build = [&](const auto& r) {
    RsrpSampleSet s(2);
    for (const auto& [p, v] : r) s.add(p, v);
    return quantize(s, spec);
  };
  RsrpGrid a = build(rows);
  for (int trial = 0; trial < 5; ++trial) {
    for (std::size_t i = rows.size() - 1; i > 0; --i) std::swap(rows[i], rows[rng.index(i + 1)]);
    RsrpGrid b = build(rows);
    for (std::size_t by = 0; by < 4; ++by)
      for (std::size_t bx = 0; bx < 4; ++bx)
        for (int c = 0; c < 2; ++c) {
          CHECK(a.raw_mean_dbm({bx, by}, CellId{c}) == b.raw_mean_dbm({bx, by}, CellId{c}));
          CHECK(a.norm({bx, by}, CellId{c}) == b.norm({bx, by}, CellId{c}));
        }
  }
}

TEST_CASE("top_k_cells ordering and errors") {
  GridSpec spec{50.0, 50.0, 50.0, {}};
  RsrpSampleSet s(4);
  s.add({25, 25}, std::vector<double>{-80.0, -70.0, -80.0, -90.0});
  s.add({30, 30}, std::vector<double>{-80.0, -70.0, -80.0, -60.0});
  RsrpGrid g = quantize(s, spec);
  // Means: -80, -70, -80, -75.
  auto all = g.top_k_cells(Position{1, 1}, 4);
  REQUIRE(all.size() == 4);
  CHECK(all[0].cell == CellId{1});
  CHECK(all[1].cell == CellId{3});
  CHECK(all[2].cell == CellId{0});  // tie with cell 2, lower id first
  CHECK(all[3].cell == CellId{2});
  CHECK(all[0].raw_dbm == -70.0);
  CHECK(all[0].norm == doctest::Approx(g.norm_params().apply(-70.0)));
  CHECK(g.strongest_cell(Position{1, 1}) == CellId{1});
  CHECK_THROWS_AS(g.top_k_cells(Position{1, 1}, 5), std::invalid_argument);
  CHECK_THROWS_AS(g.top_k_cells(Position{1, 1}, 0), std::invalid_argument);

  RsrpSampleSet single(1);
  single.add({1, 1}, std::vector<double>{-80.0});
  single.add({2, 2}, std::vector<double>{-70.0});
  CHECK(quantize(single, spec).strongest_cell(Position{5, 5}) == CellId{0});
}

TEST_CASE("rankings agree with independent oracles on random maps") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RsrpGrid g = random_grid(seed, 5);
    for (std::size_t by = 0; by < 4; ++by)
      for (std::size_t bx = 0; bx < 4; ++bx) {
        BinIndex b{bx, by};
        auto ranked = g.top_k_cells(b, 5);
        auto expected = oracle::full_sort_ranking(g, b);
        std::set<int> seen;
        for (std::size_t r = 0; r < 5; ++r) {
          CHECK(ranked[r].cell == expected[r]);
          seen.insert(ranked[r].cell.value);
          if (r > 0) {
            CHECK(ranked[r - 1].norm >= ranked[r].norm);
            if (ranked[r - 1].raw_dbm == ranked[r].raw_dbm) CHECK(ranked[r - 1].cell < ranked[r].cell);
          }
        }
        CHECK(seen.size() == 5);
        CHECK(g.top_k_cells(b, 1).front().cell == g.strongest_cell(b));
        CHECK(g.strongest_cell(b) == oracle::linear_scan_strongest(g, b));
      }
  }
}

TEST_CASE("synthesis: symmetric positions receive identical RSRP") {
  GridSpec spec{1000.0, 1000.0, 50.0, {}};
  auto cfg = omni_single_site(spec, {500.0, 500.0});
  CHECK(mean_rsrp_dbm(cfg, 0, {700.0, 500.0}) == mean_rsrp_dbm(cfg, 0, {300.0, 500.0}));
  CHECK(mean_rsrp_dbm(cfg, 0, {500.0, 800.0}) == mean_rsrp_dbm(cfg, 0, {500.0, 200.0}));
}

TEST_CASE("synthesis: doubling distance with exponent 2 costs 20 log10 2 dB") {
  GridSpec spec{1000.0, 1000.0, 50.0, {}};
  auto cfg = omni_single_site(spec, {0.0, 0.0});
  const double expected = 6.020599913279624;  // 10 * 2 * log10(2)
  CHECK(mean_rsrp_dbm(cfg, 0, {100.0, 0.0}) - mean_rsrp_dbm(cfg, 0, {200.0, 0.0}) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(mean_rsrp_dbm(cfg, 0, {0.0, 300.0}) - mean_rsrp_dbm(cfg, 0, {0.0, 600.0}) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("antenna pattern floors at the sidelobe level") {
  SyntheticMapConfig cfg;
  CHECK(antenna_gain_db(cfg, 0.0, 0.0) == cfg.main_lobe_gain_db);
  CHECK(antenna_gain_db(cfg, cfg.beamwidth_rad / 2.0, 0.0) == doctest::Approx(cfg.main_lobe_gain_db - 3.0));
  CHECK(antenna_gain_db(cfg, 3.0, 0.0) == cfg.sidelobe_gain_db);
  CHECK(antenna_gain_db(cfg, 0.0, 1.0) == cfg.sidelobe_gain_db);
}

TEST_CASE("synthesis validates geometry") {
  GridSpec spec{1000.0, 1000.0, 50.0, {}};
  SyntheticMapConfig cfg = omni_single_site(spec, {500.0, 500.0});
  cfg.bs_positions.push_back({1500.0, 0.0});
  CHECK_THROWS_AS(synthesize_samples(cfg, spec, 1), ConfigError);
  cfg.bs_positions.pop_back();
  cfg.sectors_per_bs = 0;
  CHECK_THROWS_AS(cfg.validate(spec), ConfigError);
  cfg.sectors_per_bs = 3;
  cfg.sector_azimuths = {0.0, 1.0};
  CHECK_THROWS_AS(cfg.validate(spec), ConfigError);
}

TEST_CASE("default synthetic map: 21 cells, full coverage, reproducible") {
  GridSpec spec;
  auto cfg = default_synthetic_config(spec);
  CHECK(cfg.num_cells() == 21);
  auto samples = synthesize_samples(cfg, spec, 1);
  CHECK(samples.size() == 12000);
  RsrpGrid g = quantize(samples, spec);
  CHECK(g.spec().bins_x() == 120);
  CHECK(g.spec().bins_y() == 100);
  CHECK(g.populated_bins() == 12000);
  std::set<int> strongest;
  for (std::size_t by = 0; by < 100; ++by)
    for (std::size_t bx = 0; bx < 120; ++bx) strongest.insert(g.strongest_cell(BinIndex{bx, by}).value);
  CHECK(strongest.size() == 21);

  auto again = synthesize_samples(cfg, spec, 1);
  CHECK(std::equal(samples.all_values().begin(), samples.all_values().end(), again.all_values().begin()));
  cfg.seed = 2;
  auto other = synthesize_samples(cfg, spec, 1);
  CHECK_FALSE(std::equal(samples.all_values().begin(), samples.all_values().end(), other.all_values().begin()));
}

TEST_CASE("sample CSV round trip and header checks") {
  RsrpSampleSet s(2);
  s.add({1.5, 2.25}, std::vector<double>{-80.125, -91.0});
  s.add({3.0, 4.0}, std::vector<double>{-70.0, -65.5});
  std::stringstream buf;
  write_samples_csv(buf, s);
  CHECK(buf.str().rfind("x_m,y_m,cell_0,cell_1\n", 0) == 0);
  RsrpSampleSet back = read_samples_csv(buf);
  REQUIRE(back.size() == 2);
  CHECK(back.position(0) == Position{1.5, 2.25});
  CHECK(back.values(1)[1] == -65.5);

  std::istringstream bad_header("x,y,cell_0\n1,2,3\n");
  CHECK_THROWS_AS(read_samples_csv(bad_header), ParseError);
  std::istringstream short_row("x_m,y_m,cell_0,cell_1\n1,2,3\n");
  CHECK_THROWS_AS(read_samples_csv(short_row), ParseError);
  std::istringstream junk("x_m,y_m,cell_0\n1,2,abc\n");
  CHECK_THROWS_AS(read_samples_csv(junk), ParseError);
}

TEST_CASE("grid and association exports") {
  GridSpec spec{100.0, 100.0, 50.0, {}};
  RsrpSampleSet s(2);
  s.add({10, 10}, std::vector<double>{-70.0, -80.0});
  s.add({60, 10}, std::vector<double>{-90.0, -60.0});
  s.add({10, 60}, std::vector<double>{-75.0, -75.0});
  s.add({60, 60}, std::vector<double>{-85.0, -65.0});
  RsrpGrid g = quantize(s, spec);
  std::ostringstream assoc;
  write_association_csv(assoc, g);
  CHECK(assoc.str() == "bin_x,bin_y,strongest_cell_id\n0,0,0\n1,0,1\n0,1,0\n1,1,1\n");
  std::ostringstream grid;
  write_grid_csv(grid, g);
  CHECK(grid.str().rfind("bin_x,bin_y,cell_id,raw_mean_dbm,norm\n0,0,0,-70,0.6666666666666666\n", 0) == 0);
}

}  // TEST_SUITE
