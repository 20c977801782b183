#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "core/errors.hpp"

namespace epifilter {

/// One scalar observation of the detected active-case fraction.
/// `day` is measured from the start of the computational grid (day 0).
struct Observation {
  double day = 0.0;
  double value = 0.0;
};

/// Daily (or sub-daily) observation series, strictly increasing in time.
/// Gaps are allowed; a missing day simply produces no measurement update.
struct ObservationSeries {
  std::vector<Observation> items;

  bool empty() const noexcept { return items.empty(); }
  std::size_t size() const noexcept { return items.size(); }

  void validate() const {
    for (std::size_t j = 0; j < items.size(); ++j) {
      if (!std::isfinite(items[j].day) || !std::isfinite(items[j].value))
        fail(ErrorKind::InvalidArgument, "observation " + std::to_string(j) + " is not finite");
      if (j > 0 && items[j].day <= items[j - 1].day)
        fail(ErrorKind::InvalidArgument,
             "observation days must be strictly increasing (index " + std::to_string(j) + ")");
    }
  }
};

/// Maps a time in days onto the computational grid with step `dt`.
/// Throws an alignment error if the time does not lie on the grid.
inline long grid_index_for_day(double day, double dt) {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be positive");
  const double steps = day / dt;
  const long idx = std::lround(steps);
  if (std::abs(steps - static_cast<double>(idx)) > 1e-6)
    fail(ErrorKind::Alignment,
         "observation time " + std::to_string(day) + " does not lie on the dt=" +
             std::to_string(dt) + " grid");
  if (idx < 0) fail(ErrorKind::Alignment, "observation time precedes the grid origin");
  return idx;
}

}  // namespace epifilter
