#pragma once

#include <string>

#include "specsense/eval/table.hpp"
#include "specsense/stats/density.hpp"
#include "specsense/stats/occupancy.hpp"

namespace specsense::stats {

inline eval::NumericTable histogram_table(const RunHistogram& h, const std::string& kind) {
  eval::NumericTable t;
  t.kind = kind;
  t.columns = {"bin_lo", "bin_hi", "count"};
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    const double hi = static_cast<double>(k + 1) * kMinutesPerObservation;
    t.rows.push_back({hi - kMinutesPerObservation, hi, static_cast<double>(h.counts[k])});
  }
  return t;
}

inline eval::NumericTable ccdf_table(const CcdfBand& b) {
  eval::NumericTable t;
  t.kind = "ccdf";
  t.columns = {"x", "ccdf", "lower", "upper"};
  for (std::size_t i = 0; i < b.grid.size(); ++i) t.rows.push_back({b.grid[i], b.ccdf[i], b.lower[i], b.upper[i]});
  return t;
}

}  // namespace specsense::stats
