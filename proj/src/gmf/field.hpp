#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gmf {

using StateIndex = std::uint16_t;

/// Finite, ordered set of named particle states.
class StateSpace {
 public:
  explicit StateSpace(std::vector<std::string> labels);
  // States labelled "0", "1", ..., "count-1".
  static StateSpace range(std::size_t count);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t s) const { return labels_.at(s); }
  const std::vector<std::string>& labels() const { return labels_; }
  // Throws InvalidArgument for unknown labels.
  StateIndex index_of(const std::string& label) const;

  bool operator==(const StateSpace&) const = default;

 private:
  std::vector<std::string> labels_;
};

/// Step function on (0,1] x S: constant on each cell ((i-1)/g, i/g] of a
/// uniform partition with g = resolution(). Stores g x |S| values row-major.
/// Represents ODE states, drifts and empirical ensemble means alike.
class OccupancyField {
 public:
  OccupancyField() = default;
  OccupancyField(std::size_t resolution, std::size_t state_count);
  OccupancyField(std::size_t resolution, std::size_t state_count,
                 std::vector<double> values);

  // Same distribution in every cell.
  static OccupancyField uniform(std::size_t resolution,
                                std::span<const double> distribution);
  /// Indicator field of a particle configuration: cell block of particle k
  /// carries e_{states[k]}. resolution must be a multiple of states.size().
  static OccupancyField indicator(std::span<const StateIndex> states,
                                  std::size_t state_count,
                                  std::size_t resolution);

  std::size_t resolution() const { return resolution_; }
  std::size_t state_count() const { return state_count_; }

  double operator()(std::size_t cell, std::size_t s) const {
    return values_[cell * state_count_ + s];
  }
  double& operator()(std::size_t cell, std::size_t s) {
    return values_[cell * state_count_ + s];
  }
  std::span<const double> row(std::size_t cell) const {
    return {values_.data() + cell * state_count_, state_count_};
  }
  std::span<double> row(std::size_t cell) {
    return {values_.data() + cell * state_count_, state_count_};
  }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  // Value of the step function at u in (0,1].
  double at(double u, std::size_t s) const;

  // max over cells of |sum_s x(i,s) - 1|
  double max_row_sum_error() const;
  double min_value() const;

 private:
  std::size_t resolution_ = 0;
  std::size_t state_count_ = 0;
  std::vector<double> values_;
};

}  // namespace gmf
