#include "gmf/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "gmf/error.hpp"
#include "gmf/graphon.hpp"

namespace gmf {

StateSpace::StateSpace(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  if (labels_.empty()) throw InvalidArgument("state space must not be empty");
  if (labels_.size() > std::numeric_limits<StateIndex>::max()) {
    throw InvalidArgument("state space too large");
  }
  std::set<std::string> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size()) {
    throw InvalidArgument("state labels must be unique");
  }
}

StateSpace StateSpace::range(std::size_t count) {
  std::vector<std::string> labels;
  labels.reserve(count);
  for (std::size_t s = 0; s < count; ++s) labels.push_back(std::to_string(s));
  return StateSpace(std::move(labels));
}

StateIndex StateSpace::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw InvalidArgument("unknown state '" + label + "'");
  return static_cast<StateIndex>(it - labels_.begin());
}

OccupancyField::OccupancyField(std::size_t resolution, std::size_t state_count)
    : OccupancyField(resolution, state_count,
                     std::vector<double>(resolution * state_count, 0.0)) {}

OccupancyField::OccupancyField(std::size_t resolution, std::size_t state_count,
                               std::vector<double> values)
    : resolution_(resolution), state_count_(state_count), values_(std::move(values)) {
  if (resolution_ == 0 || state_count_ == 0) {
    throw InvalidArgument("occupancy field needs resolution >= 1 and |S| >= 1");
  }
  if (values_.size() != resolution_ * state_count_) {
    throw InvalidArgument("occupancy field value count does not match resolution x |S|");
  }
}

OccupancyField OccupancyField::uniform(std::size_t resolution,
                                       std::span<const double> distribution) {
  OccupancyField f(resolution, distribution.size());
  for (std::size_t i = 0; i < resolution; ++i) {
    std::copy(distribution.begin(), distribution.end(), f.row(i).begin());
  }
  return f;
}

OccupancyField OccupancyField::indicator(std::span<const StateIndex> states,
                                         std::size_t state_count,
                                         std::size_t resolution) {
  const std::size_t n = states.size();
  if (n == 0 || resolution % n != 0) {
    throw InvalidArgument("indicator embedding needs a resolution that is a multiple of N");
  }
  const std::size_t ratio = resolution / n;
  OccupancyField f(resolution, state_count);
  for (std::size_t i = 0; i < resolution; ++i) {
    const StateIndex s = states[i / ratio];
    if (s >= state_count) throw InvalidArgument("particle state index out of range");
    f(i, s) = 1.0;
  }
  return f;
}

double OccupancyField::at(double u, std::size_t s) const {
  return (*this)(cell_of(u, resolution_) - 1, s);
}

double OccupancyField::max_row_sum_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < resolution_; ++i) {
    double sum = 0.0;
    for (double v : row(i)) sum += v;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

double OccupancyField::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

}  // namespace gmf
