#pragma once

#include <stdexcept>
#include <string>

namespace dronho {

/// Invalid configuration or geometry supplied by the caller.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A query touched a grid bin that holds no samples.
class UnpopulatedBinError : public std::runtime_error {
public:
  UnpopulatedBinError(std::size_t bin_x, std::size_t bin_y)
      : std::runtime_error("bin (" + std::to_string(bin_x) + ", " + std::to_string(bin_y) +
                           ") has no RSRP samples"),
        bin_x_(bin_x), bin_y_(bin_y) {}

  std::size_t bin_x() const { return bin_x_; }
  std::size_t bin_y() const { return bin_y_; }

private:
  std::size_t bin_x_;
  std::size_t bin_y_;
};

/// A route with fewer than two waypoints has no handover decision to learn.
class DegenerateRouteError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed CSV input.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace dronho
