#pragma once

#include <cstddef>
#include <vector>

#include "unitlab/units.hpp"

namespace unitlab::detail {

/// One sub-interval on which both sides sit in a single unit segment.
struct SegmentOverlap {
  double width = 0.0;
  std::size_t x_segment = 0;
  std::size_t y_segment = 0;
};

/// Where a term lives on the time axis: it occupies [top - length, top].
struct TermPlacement {
  const std::vector<double>* ends = nullptr;  // cumulative fractions from the latest end
  double top = 0.0;
  double length = 0.0;
};

/// Cumulative segment ends of a term, measured from its latest end; the
/// final entry is exactly 1.
std::vector<double> segment_ends(const Term& term);

/// Overlaps of two placed terms inside the window [lo, hi], latest first.
std::vector<SegmentOverlap> overlaps(const TermPlacement& x, const TermPlacement& y, double lo,
                                     double hi);

}  // namespace unitlab::detail
