#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dronho {

struct CellId {
  int value = 0;
  auto operator<=>(const CellId&) const = default;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Position&) const = default;
};

double distance(Position a, Position b);

struct BinIndex {
  std::size_t x = 0;
  std::size_t y = 0;
  bool operator==(const BinIndex&) const = default;
};

/// Rectangular service area partitioned into square bins.
///
/// The area is the closed rectangle [origin.x, origin.x + width_m] x
/// [origin.y, origin.y + height_m]. Positions on the far edges fall into the
/// last bin so every area position maps to exactly one bin.
struct GridSpec {
  double width_m = 6000.0;
  double height_m = 5000.0;
  double bin_size_m = 50.0;
  Position origin{};

  void validate() const;
  std::size_t bins_x() const;
  std::size_t bins_y() const;
  std::size_t num_bins() const { return bins_x() * bins_y(); }
  bool contains(Position p) const;
  /// Throws std::out_of_range for positions outside the area.
  BinIndex bin_of(Position p) const;
  Position bin_center(BinIndex b) const;
};

/// Raw RSRP measurements: one row of per-cell dBm values per sample position.
class RsrpSampleSet {
public:
  RsrpSampleSet() = default;
  explicit RsrpSampleSet(std::size_t num_cells, double altitude_m = 50.0)
      : num_cells_(num_cells), altitude_m_(altitude_m) {}

  void add(Position p, std::span<const double> rsrp_dbm);

  std::size_t size() const { return positions_.size(); }
  bool empty() const { return positions_.empty(); }
  std::size_t num_cells() const { return num_cells_; }
  double altitude_m() const { return altitude_m_; }

  Position position(std::size_t i) const { return positions_[i]; }
  std::span<const double> values(std::size_t i) const {
    return {values_.data() + i * num_cells_, num_cells_};
  }
  std::span<const double> all_values() const { return values_; }

private:
  std::size_t num_cells_ = 0;
  double altitude_m_ = 50.0;
  std::vector<Position> positions_;
  std::vector<double> values_;
};

/// Affine map from [min_dbm, max_dbm] onto [0, 1].
struct NormParams {
  double min_dbm = 0.0;
  double max_dbm = 1.0;

  double apply(double dbm) const { return (dbm - min_dbm) / (max_dbm - min_dbm); }
  double invert(double norm) const { return min_dbm + norm * (max_dbm - min_dbm); }
};

/// Global min/max over every sample and cell. Throws ConfigError on an empty
/// set or a degenerate (constant) range.
NormParams fit_norm_params(const RsrpSampleSet& samples);

/// Returns the sample set with every value mapped into [0, 1].
std::pair<RsrpSampleSet, NormParams> normalize(const RsrpSampleSet& samples);

RsrpSampleSet denormalize(const RsrpSampleSet& normalized, const NormParams& params);

struct RankedCell {
  CellId cell;
  double norm = 0.0;
  double raw_dbm = 0.0;
};

/// Quantized radio map. Immutable once built.
class RsrpGrid {
public:
  RsrpGrid(GridSpec spec, std::size_t num_cells, NormParams params);

  const GridSpec& spec() const { return spec_; }
  std::size_t num_cells() const { return num_cells_; }
  const NormParams& norm_params() const { return params_; }

  bool populated(BinIndex b) const { return counts_[flat(b)] > 0; }
  std::size_t sample_count(BinIndex b) const { return counts_[flat(b)]; }
  std::size_t populated_bins() const;

  /// Throws UnpopulatedBinError when the bin is empty.
  double raw_mean_dbm(BinIndex b, CellId c) const;
  double norm(BinIndex b, CellId c) const;

  /// Cells ranked by descending RSRP, ties to the lower id. Length exactly k.
  std::vector<RankedCell> top_k_cells(Position p, std::size_t k) const;
  std::vector<RankedCell> top_k_cells(BinIndex b, std::size_t k) const;
  CellId strongest_cell(Position p) const;
  CellId strongest_cell(BinIndex b) const;

  /// Direct write access for builders; recomputes the normalized value.
  void set_bin(BinIndex b, std::span<const double> raw_mean_dbm, std::size_t count);

private:
  std::size_t flat(BinIndex b) const { return b.y * spec_.bins_x() + b.x; }
  void require_populated(BinIndex b) const;

  GridSpec spec_;
  std::size_t num_cells_;
  NormParams params_;
  std::vector<std::size_t> counts_;
  std::vector<double> raw_;
  std::vector<double> norm_;
};

/// Averages samples (in dBm) per bin. Norm parameters default to the global
/// min/max of the sample set. Empty bins are left unpopulated.
RsrpGrid quantize(const RsrpSampleSet& samples, const GridSpec& spec,
                  std::optional<NormParams> params = std::nullopt);

/// Parametric sectorized layout used in place of a measured map.
struct SyntheticMapConfig {
  std::vector<Position> bs_positions;
  std::size_t sectors_per_bs = 3;
  /// One azimuth per sector, radians counter-clockwise from +x. Empty means
  /// evenly spaced starting at pi/6.
  std::vector<double> sector_azimuths;
  double bs_height_m = 30.0;
  double altitude_m = 50.0;
  double tx_power_dbm = 15.0;
  double path_loss_exponent = 2.2;
  /// Path loss at the 1 m reference distance.
  double reference_loss_db = 38.0;
  double main_lobe_gain_db = 15.0;
  double sidelobe_gain_db = -10.0;
  double downtilt_rad = 0.14;
  double beamwidth_rad = 1.13;
  double vertical_beamwidth_rad = 0.17;
  double shadowing_std_db = 6.0;
  /// Lattice spacing of the correlated shadowing field.
  double shadowing_decorrelation_m = 150.0;
  std::uint64_t seed = 1;

  std::size_t num_cells() const { return bs_positions.size() * sectors_per_bs; }
  double azimuth(std::size_t sector) const;
  void validate(const GridSpec& spec) const;
};

/// Seven three-sector sites on a hexagonal layout centred in the area.
SyntheticMapConfig default_synthetic_config(const GridSpec& spec);

/// Gain in dB of a main-lobe/sidelobe sector antenna.
double antenna_gain_db(const SyntheticMapConfig& cfg, double azimuth_offset_rad,
                       double elevation_offset_rad);

/// Deterministic per-cell RSRP at a position, excluding shadowing.
double mean_rsrp_dbm(const SyntheticMapConfig& cfg, std::size_t cell, Position p);

/// Scatters samples_per_bin uniform positions inside every bin and evaluates
/// each cell's RSRP there. Deterministic given cfg.seed.
RsrpSampleSet synthesize_samples(const SyntheticMapConfig& cfg, const GridSpec& spec,
                                 std::size_t samples_per_bin);

// CSV formats -------------------------------------------------------------

/// Header `x_m,y_m,cell_0,...,cell_{C-1}`.
RsrpSampleSet read_samples_csv(std::istream& in, double altitude_m = 50.0);
void write_samples_csv(std::ostream& out, const RsrpSampleSet& samples);

/// `bin_x,bin_y,cell_id,raw_mean_dbm,norm` for every populated bin.
void write_grid_csv(std::ostream& out, const RsrpGrid& grid);

/// `bin_x,bin_y,strongest_cell_id` for every populated bin.
void write_association_csv(std::ostream& out, const RsrpGrid& grid);

}  // namespace dronho
