#include "unitlab/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace unitlab {

Partition::Partition(std::vector<double> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw DomainError("partition needs at least one part");
  for (double p : parts_)
    if (!(p > 0.0) || !std::isfinite(p))
      throw DomainError("partition parts must be positive and finite");
}

Partition Partition::uniform(double length, std::size_t parts) {
  if (parts == 0) throw DomainError("uniform partition needs at least one part");
  std::vector<double> cuts;
  cuts.reserve(parts);
  for (std::size_t k = 1; k <= parts; ++k)
    cuts.push_back(length * static_cast<double>(k) / static_cast<double>(parts));
  return from_cut_points(cuts);
}

Partition Partition::from_cut_points(const std::vector<double>& ascending_cuts) {
  std::vector<double> parts;
  double previous = 0.0;
  for (double c : ascending_cuts) {
    parts.push_back(c - previous);
    previous = c;
  }
  std::reverse(parts.begin(), parts.end());
  return Partition(std::move(parts));
}

double Partition::length() const { return cut_points().back(); }

double Partition::norm() const { return *std::max_element(parts_.begin(), parts_.end()); }

std::vector<double> Partition::cut_points() const {
  std::vector<double> cuts;
  cuts.reserve(parts_.size());
  double acc = 0.0;
  for (auto it = parts_.rbegin(); it != parts_.rend(); ++it) {
    acc += *it;
    cuts.push_back(acc);
  }
  return cuts;
}

Partition refine(const Partition& a, const Partition& b) {
  const auto ca = a.cut_points();
  const auto cb = b.cut_points();
  const double la = ca.back();
  const double lb = cb.back();
  if (std::abs(la - lb) > 1e-12 * std::max(1.0, std::max(la, lb)))
    throw DomainError("refine: partitions of different length (" + std::to_string(la) + " vs " +
                      std::to_string(lb) + ")");
  // Keep the stored parts when one side already refines the other, so that
  // join is exactly idempotent and absorbing rather than up to roundoff.
  if (is_refinement_of(a, b)) return a;
  if (is_refinement_of(b, a)) return b;
  std::vector<double> cuts;
  std::merge(ca.begin(), ca.end() - 1, cb.begin(), cb.end() - 1, std::back_inserter(cuts));
  const double eps = 1e-12 * std::max(1.0, la);
  std::vector<double> merged;
  for (double c : cuts)
    if (c > eps && (merged.empty() || c - merged.back() > eps) && la - c > eps) merged.push_back(c);
  merged.push_back(la);
  return Partition::from_cut_points(merged);
}

bool is_refinement_of(const Partition& fine, const Partition& coarse, double tol) {
  const auto cf = fine.cut_points();
  for (double c : coarse.cut_points()) {
    const auto it = std::lower_bound(cf.begin(), cf.end(), c - tol);
    if (it == cf.end() || std::abs(*it - c) > tol) return false;
  }
  return true;
}

}  // namespace unitlab
