#pragma once

// Interval partitions of [0, t]. A partition is written as the tuple
// (t_n, ..., t_1): t_1 is the earliest interval and the tuple reads from
// the latest piece of time to the earliest, matching y_{t_n} (.) ... (.) y_{t_1}.
// Partitions of the same length form a lattice under common refinement.

#include <cstdint>
#include <vector>

#include "unitlab/error.hpp"

namespace unitlab {

class Partition {
 public:
  /// parts in tuple order (t_n, ..., t_1); every part must be > 0.
  explicit Partition(std::vector<double> parts);

  static Partition uniform(double length, std::size_t parts);
  static Partition from_cut_points(const std::vector<double>& ascending_cuts);

  const std::vector<double>& parts() const { return parts_; }
  std::size_t size() const { return parts_.size(); }
  double length() const;
  double norm() const;

  /// Interval ends measured from 0: t_1, t_1 + t_2, ..., |t| (ascending).
  std::vector<double> cut_points() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<double> parts_;
};

/// Common refinement (lattice join) via the union of cut points.
/// Throws DomainError if the lengths differ by more than 1e-12.
Partition refine(const Partition& a, const Partition& b);

/// True when every cut point of `coarse` is a cut point of `fine`.
bool is_refinement_of(const Partition& fine, const Partition& coarse, double tol = 1e-12);

}  // namespace unitlab
