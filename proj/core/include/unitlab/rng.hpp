#pragma once

#include <cstdint>
#include <random>

#include "unitlab/algebra.hpp"

namespace unitlab {

/// Seeded sampler with platform-independent output. Only the raw 64-bit
/// stream of std::mt19937_64 is used; the standard distributions are
/// implementation-defined, so uniform and normal variates are derived here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  double uniform();                            // [0, 1)
  double uniform(double lo, double hi);
  std::size_t index(std::size_t n);            // [0, n)
  double normal();                             // standard normal (Box-Muller)
  Complex complex_normal();                    // E|z|^2 = 1

  Matrix gaussian_matrix(int rows, int cols, double scale = 1.0);
  /// Haar-ish unitary from the QR factor of a complex Gaussian matrix.
  Matrix unitary(int dim);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace unitlab
