#include "dronho/radio_map.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "dronho/csv.hpp"
#include "dronho/errors.hpp"
#include "dronho/rng.hpp"

namespace dronho {

double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

// GridSpec ------------------------------------------------------------------

void GridSpec::validate() const {
  if (!(width_m > 0.0) || !(height_m > 0.0))
    throw ConfigError("grid width and height must be positive");
  if (!(bin_size_m > 0.0)) throw ConfigError("bin size must be positive");
}

std::size_t GridSpec::bins_x() const {
  return static_cast<std::size_t>(std::ceil(width_m / bin_size_m));
}

std::size_t GridSpec::bins_y() const {
  return static_cast<std::size_t>(std::ceil(height_m / bin_size_m));
}

bool GridSpec::contains(Position p) const {
  return p.x >= origin.x && p.x <= origin.x + width_m && p.y >= origin.y &&
         p.y <= origin.y + height_m;
}

BinIndex GridSpec::bin_of(Position p) const {
  if (!contains(p))
    throw std::out_of_range("position (" + csv::format(p.x) + ", " + csv::format(p.y) +
                            ") is outside the service area");
  auto ix = static_cast<std::size_t>(std::floor((p.x - origin.x) / bin_size_m));
  auto iy = static_cast<std::size_t>(std::floor((p.y - origin.y) / bin_size_m));
  return {std::min(ix, bins_x() - 1), std::min(iy, bins_y() - 1)};
}

Position GridSpec::bin_center(BinIndex b) const {
  double x = origin.x + (static_cast<double>(b.x) + 0.5) * bin_size_m;
  double y = origin.y + (static_cast<double>(b.y) + 0.5) * bin_size_m;
  return {std::min(x, origin.x + width_m), std::min(y, origin.y + height_m)};
}

// Samples ----------------------------------------------------------------------

void RsrpSampleSet::add(Position p, std::span<const double> rsrp_dbm) {
  if (rsrp_dbm.size() != num_cells_)
    throw std::invalid_argument("sample carries " + std::to_string(rsrp_dbm.size()) +
                                " values, expected " + std::to_string(num_cells_));
  positions_.push_back(p);
  values_.insert(values_.end(), rsrp_dbm.begin(), rsrp_dbm.end());
}

NormParams fit_norm_params(const RsrpSampleSet& samples) {
  if (samples.empty() || samples.num_cells() == 0)
    throw ConfigError("cannot normalize an empty sample set");
  auto [lo, hi] = std::minmax_element(samples.all_values().begin(), samples.all_values().end());
  if (!(*hi > *lo)) throw ConfigError("RSRP samples span a degenerate range");
  return {*lo, *hi};
}

namespace {

RsrpSampleSet map_values(const RsrpSampleSet& in, auto&& fn) {
  RsrpSampleSet out(in.num_cells(), in.altitude_m());
  std::vector<double> row(in.num_cells());
  for (std::size_t i = 0; i < in.size(); ++i) {
    auto v = in.values(i);
    std::transform(v.begin(), v.end(), row.begin(), fn);
    out.add(in.position(i), row);
  }
  return out;
}

}  // namespace

std::pair<RsrpSampleSet, NormParams> normalize(const RsrpSampleSet& samples) {
  NormParams params = fit_norm_params(samples);
  return {map_values(samples, [&](double v) { return params.apply(v); }), params};
}

RsrpSampleSet denormalize(const RsrpSampleSet& normalized, const NormParams& params) {
  return map_values(normalized, [&](double v) { return params.invert(v); });
}

// RsrpGrid -------------------------------------------------------------------------

RsrpGrid::RsrpGrid(GridSpec spec, std::size_t num_cells, NormParams params)
    : spec_(spec), num_cells_(num_cells), params_(params) {
  spec_.validate();
  if (num_cells_ == 0) throw ConfigError("radio map needs at least one cell");
  counts_.assign(spec_.num_bins(), 0);
  raw_.assign(spec_.num_bins() * num_cells_, std::numeric_limits<double>::quiet_NaN());
  norm_.assign(raw_.size(), std::numeric_limits<double>::quiet_NaN());
}

std::size_t RsrpGrid::populated_bins() const {
  return static_cast<std::size_t>(
      std::count_if(counts_.begin(), counts_.end(), [](std::size_t c) { return c > 0; }));
}

void RsrpGrid::require_populated(BinIndex b) const {
  if (b.x >= spec_.bins_x() || b.y >= spec_.bins_y()) throw std::out_of_range("bin index out of range");
  if (counts_[flat(b)] == 0) throw UnpopulatedBinError(b.x, b.y);
}

double RsrpGrid::raw_mean_dbm(BinIndex b, CellId c) const {
  require_populated(b);
  return raw_[flat(b) * num_cells_ + static_cast<std::size_t>(c.value)];
}

double RsrpGrid::norm(BinIndex b, CellId c) const {
  require_populated(b);
  return norm_[flat(b) * num_cells_ + static_cast<std::size_t>(c.value)];
}

void RsrpGrid::set_bin(BinIndex b, std::span<const double> raw_mean_dbm, std::size_t count) {
  if (raw_mean_dbm.size() != num_cells_) throw std::invalid_argument("wrong number of cell values");
  std::size_t base = flat(b) * num_cells_;
  for (std::size_t c = 0; c < num_cells_; ++c) {
    raw_[base + c] = raw_mean_dbm[c];
    norm_[base + c] = params_.apply(raw_mean_dbm[c]);
  }
  counts_[flat(b)] = count;
}

std::vector<RankedCell> RsrpGrid::top_k_cells(BinIndex b, std::size_t k) const {
  if (k == 0 || k > num_cells_)
    throw std::invalid_argument("k = " + std::to_string(k) + " must lie in [1, " +
                                std::to_string(num_cells_) + "]");
  require_populated(b);
  std::size_t base = flat(b) * num_cells_;
  std::vector<RankedCell> cells(num_cells_);
  for (std::size_t c = 0; c < num_cells_; ++c)
    cells[c] = {CellId{static_cast<int>(c)}, norm_[base + c], raw_[base + c]};
  std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(k), cells.end(),
                    [](const RankedCell& a, const RankedCell& b) {
                      if (a.raw_dbm != b.raw_dbm) return a.raw_dbm > b.raw_dbm;
                      return a.cell < b.cell;
                    });
  cells.resize(k);
  return cells;
}

std::vector<RankedCell> RsrpGrid::top_k_cells(Position p, std::size_t k) const {
  return top_k_cells(spec_.bin_of(p), k);
}

CellId RsrpGrid::strongest_cell(BinIndex b) const { return top_k_cells(b, 1).front().cell; }

CellId RsrpGrid::strongest_cell(Position p) const { return strongest_cell(spec_.bin_of(p)); }

RsrpGrid quantize(const RsrpSampleSet& samples, const GridSpec& spec,
                  std::optional<NormParams> params) {
  spec.validate();
  NormParams np = params ? *params : fit_norm_params(samples);
  RsrpGrid grid(spec, samples.num_cells(), np);

  // Sample indices bucketed by bin. Values are sorted before summation so the
  // bin mean does not depend on input order.
  std::vector<std::vector<std::size_t>> buckets(spec.num_bins());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    BinIndex b = spec.bin_of(samples.position(i));
    buckets[b.y * spec.bins_x() + b.x].push_back(i);
  }

  std::vector<double> means(samples.num_cells());
  std::vector<double> scratch;
  for (std::size_t flat = 0; flat < buckets.size(); ++flat) {
    const auto& idx = buckets[flat];
    if (idx.empty()) continue;
    for (std::size_t c = 0; c < samples.num_cells(); ++c) {
      scratch.clear();
      for (std::size_t i : idx) scratch.push_back(samples.values(i)[c]);
      std::sort(scratch.begin(), scratch.end());
      double sum = 0.0;
      for (double v : scratch) sum += v;
      means[c] = sum / static_cast<double>(scratch.size());
    }
    grid.set_bin({flat % spec.bins_x(), flat / spec.bins_x()}, means, idx.size());
  }
  return grid;
}

// Synthetic map -----------------------------------------------------------------------

double SyntheticMapConfig::azimuth(std::size_t sector) const {
  if (!sector_azimuths.empty()) return sector_azimuths.at(sector);
  return std::numbers::pi / 6.0 +
         2.0 * std::numbers::pi * static_cast<double>(sector) / static_cast<double>(sectors_per_bs);
}

void SyntheticMapConfig::validate(const GridSpec& spec) const {
  spec.validate();
  if (bs_positions.empty()) throw ConfigError("at least one base station is required");
  if (sectors_per_bs < 1) throw ConfigError("sectors_per_bs must be at least 1");
  if (!sector_azimuths.empty() && sector_azimuths.size() != sectors_per_bs)
    throw ConfigError("sector_azimuths must list one azimuth per sector");
  for (const auto& p : bs_positions)
    if (!spec.contains(p))
      throw ConfigError("base station at (" + csv::format(p.x) + ", " + csv::format(p.y) +
                        ") lies outside the service area");
  if (!(path_loss_exponent > 0.0)) throw ConfigError("path-loss exponent must be positive");
  if (sidelobe_gain_db > main_lobe_gain_db)
    throw ConfigError("sidelobe gain cannot exceed main-lobe gain");
  if (!(beamwidth_rad > 0.0) || !(vertical_beamwidth_rad > 0.0))
    throw ConfigError("beamwidths must be positive");
  if (shadowing_std_db < 0.0) throw ConfigError("shadowing std dev must be nonnegative");
  if (shadowing_std_db > 0.0 && !(shadowing_decorrelation_m > 0.0))
    throw ConfigError("shadowing decorrelation distance must be positive");
}

SyntheticMapConfig default_synthetic_config(const GridSpec& spec) {
  SyntheticMapConfig cfg;
  const Position centre{spec.origin.x + spec.width_m / 2.0, spec.origin.y + spec.height_m / 2.0};
  const double isd = 1732.0;
  cfg.bs_positions.push_back(centre);
  for (int i = 0; i < 6; ++i) {
    double a = std::numbers::pi / 6.0 + i * std::numbers::pi / 3.0;
    cfg.bs_positions.push_back({centre.x + isd * std::cos(a), centre.y + isd * std::sin(a)});
  }
  return cfg;
}

namespace {

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

// One zero-mean Gaussian lattice per site, bilinearly interpolated.
class ShadowingField {
public:
  ShadowingField(const SyntheticMapConfig& cfg, const GridSpec& spec, Rng& rng)
      : spec_(spec), spacing_(cfg.shadowing_decorrelation_m) {
    if (cfg.shadowing_std_db <= 0.0) return;
    nx_ = static_cast<std::size_t>(std::ceil(spec.width_m / spacing_)) + 2;
    ny_ = static_cast<std::size_t>(std::ceil(spec.height_m / spacing_)) + 2;
    nodes_.resize(cfg.bs_positions.size() * nx_ * ny_);
    for (double& v : nodes_) v = cfg.shadowing_std_db * rng.normal();
  }

  double at(std::size_t site, Position p) const {
    if (nodes_.empty()) return 0.0;
    double fx = (p.x - spec_.origin.x) / spacing_;
    double fy = (p.y - spec_.origin.y) / spacing_;
    auto ix = std::min(static_cast<std::size_t>(fx), nx_ - 2);
    auto iy = std::min(static_cast<std::size_t>(fy), ny_ - 2);
    double tx = fx - static_cast<double>(ix);
    double ty = fy - static_cast<double>(iy);
    auto node = [&](std::size_t x, std::size_t y) { return nodes_[(site * ny_ + y) * nx_ + x]; };
    return (1 - tx) * (1 - ty) * node(ix, iy) + tx * (1 - ty) * node(ix + 1, iy) +
           (1 - tx) * ty * node(ix, iy + 1) + tx * ty * node(ix + 1, iy + 1);
  }

private:
  GridSpec spec_;
  double spacing_;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<double> nodes_;
};

}  // namespace

double antenna_gain_db(const SyntheticMapConfig& cfg, double azimuth_offset_rad,
                       double elevation_offset_rad) {
  double h = azimuth_offset_rad / cfg.beamwidth_rad;
  double v = elevation_offset_rad / cfg.vertical_beamwidth_rad;
  double attenuation = 12.0 * (h * h + v * v);
  return cfg.main_lobe_gain_db -
         std::min(attenuation, cfg.main_lobe_gain_db - cfg.sidelobe_gain_db);
}

double mean_rsrp_dbm(const SyntheticMapConfig& cfg, std::size_t cell, Position p) {
  std::size_t site = cell / cfg.sectors_per_bs;
  std::size_t sector = cell % cfg.sectors_per_bs;
  Position bs = cfg.bs_positions.at(site);
  double dx = p.x - bs.x;
  double dy = p.y - bs.y;
  double dz = cfg.altitude_m - cfg.bs_height_m;
  double d2 = std::hypot(dx, dy);
  double d3 = std::max(std::hypot(d2, dz), 1.0);

  double path_loss = cfg.reference_loss_db + 10.0 * cfg.path_loss_exponent * std::log10(d3);
  double az_offset = (dx == 0.0 && dy == 0.0) ? 0.0 : wrap_angle(std::atan2(dy, dx) - cfg.azimuth(sector));
  // Boresight points downtilt_rad below the horizon.
  double el_offset = std::atan2(dz, d2) + cfg.downtilt_rad;
  return cfg.tx_power_dbm - path_loss + antenna_gain_db(cfg, az_offset, el_offset);
}

RsrpSampleSet synthesize_samples(const SyntheticMapConfig& cfg, const GridSpec& spec,
                                 std::size_t samples_per_bin) {
  cfg.validate(spec);
  if (samples_per_bin < 1) throw ConfigError("samples_per_bin must be at least 1");

  Rng rng(cfg.seed);
  ShadowingField shadow(cfg, spec, rng);
  RsrpSampleSet out(cfg.num_cells(), cfg.altitude_m);
  std::vector<double> row(cfg.num_cells());
  const double x_end = spec.origin.x + spec.width_m;
  const double y_end = spec.origin.y + spec.height_m;

  for (std::size_t by = 0; by < spec.bins_y(); ++by) {
    for (std::size_t bx = 0; bx < spec.bins_x(); ++bx) {
      double x0 = spec.origin.x + static_cast<double>(bx) * spec.bin_size_m;
      double y0 = spec.origin.y + static_cast<double>(by) * spec.bin_size_m;
      double x1 = std::min(x0 + spec.bin_size_m, x_end);
      double y1 = std::min(y0 + spec.bin_size_m, y_end);
      for (std::size_t s = 0; s < samples_per_bin; ++s) {
        Position p{rng.uniform(x0, x1), rng.uniform(y0, y1)};
        for (std::size_t c = 0; c < row.size(); ++c)
          row[c] = mean_rsrp_dbm(cfg, c, p) + shadow.at(c / cfg.sectors_per_bs, p);
        out.add(p, row);
      }
    }
  }
  return out;
}

// CSV ----------------------------------------------------------------------------------

RsrpSampleSet read_samples_csv(std::istream& in, double altitude_m) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("sample CSV is empty");
  auto header = csv::split(line);
  if (header.size() < 3 || header[0] != "x_m" || header[1] != "y_m")
    throw ParseError("sample CSV header must be x_m,y_m,cell_0,...");
  for (std::size_t c = 2; c < header.size(); ++c)
    if (header[c] != "cell_" + std::to_string(c - 2))
      throw ParseError("unexpected column '" + std::string(header[c]) + "'");

  RsrpSampleSet out(header.size() - 2, altitude_m);
  std::vector<double> row(out.num_cells());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = csv::split(line);
    if (fields.size() != header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields");
    Position p{csv::parse_double(fields[0]), csv::parse_double(fields[1])};
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = csv::parse_double(fields[c + 2]);
    out.add(p, row);
  }
  return out;
}

void write_samples_csv(std::ostream& out, const RsrpSampleSet& samples) {
  out << "x_m,y_m";
  for (std::size_t c = 0; c < samples.num_cells(); ++c) out << ",cell_" << c;
  out << '\n';
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out << csv::format(samples.position(i).x) << ',' << csv::format(samples.position(i).y);
    for (double v : samples.values(i)) out << ',' << csv::format(v);
    out << '\n';
  }
}

void write_grid_csv(std::ostream& out, const RsrpGrid& grid) {
  out << "bin_x,bin_y,cell_id,raw_mean_dbm,norm\n";
  const auto& spec = grid.spec();
  for (std::size_t by = 0; by < spec.bins_y(); ++by)
    for (std::size_t bx = 0; bx < spec.bins_x(); ++bx) {
      BinIndex b{bx, by};
      if (!grid.populated(b)) continue;
      for (std::size_t c = 0; c < grid.num_cells(); ++c) {
        CellId id{static_cast<int>(c)};
        out << bx << ',' << by << ',' << c << ',' << csv::format(grid.raw_mean_dbm(b, id)) << ','
            << csv::format(grid.norm(b, id)) << '\n';
      }
    }
}

void write_association_csv(std::ostream& out, const RsrpGrid& grid) {
  out << "bin_x,bin_y,strongest_cell_id\n";
  const auto& spec = grid.spec();
  for (std::size_t by = 0; by < spec.bins_y(); ++by)
    for (std::size_t bx = 0; bx < spec.bins_x(); ++bx) {
      BinIndex b{bx, by};
      if (!grid.populated(b)) continue;
      out << bx << ',' << by << ',' << grid.strongest_cell(b).value << '\n';
    }
}

}  // namespace dronho
