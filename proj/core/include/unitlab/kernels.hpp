#pragma once

// Operator-valued kernels S x S -> L(B) on finite label sets, complete
// positive definiteness, conditional complete positive definiteness and the
// entrywise exponential that turns a conditionally CPD generator into a
// CPD-semigroup.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unitlab/algebra.hpp"

namespace unitlab {

class OperatorKernel {
 public:
  OperatorKernel() = default;
  /// All entries start as the zero map.
  OperatorKernel(int dim, std::vector<std::string> labels);

  static OperatorKernel identity(int dim, std::vector<std::string> labels);
  /// d = 1 kernel from a scalar (covariance) matrix gamma(i, j).
  static OperatorKernel scalar(const Matrix& gamma, std::vector<std::string> labels);

  int dim() const { return dim_; }
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  bool contains(std::string_view label) const;
  /// Throws LabelError for unknown labels.
  std::size_t index_of(std::string_view label) const;

  const Superoperator& at(std::size_t row, std::size_t col) const;
  const Superoperator& at(std::string_view row, std::string_view col) const;
  void set(std::size_t row, std::size_t col, Superoperator entry);

  /// max over pairs and matrix units e of ||K^{s',s}(e) - (K^{s,s'}(e*))*||,
  /// divided by max(1, largest entry).
  double hermitian_defect() const;

  /// Kernel on labels()[order[0]], labels()[order[1]], ...
  OperatorKernel permuted(const std::vector<std::size_t>& order) const;

  friend bool operator==(const OperatorKernel& a, const OperatorKernel& b);

 private:
  int dim_ = 0;
  std::vector<std::string> labels_;
  std::vector<Superoperator> entries_;  // row-major
};

/// Thrown when a kernel fails the hermitian-symmetry precondition.
class NotAKernelCandidate : public Error {
 public:
  using Error::Error;
};

/// A tuple (a_i, b_i, sigma_i) for the positivity form
///   sum_ij b_i^* K^{sigma_i, sigma_j}(a_i^* a_j) b_j.
struct Witness {
  std::vector<Matrix> a;
  std::vector<Matrix> b;
  std::vector<std::size_t> labels;

  /// sum_i a_i b_i, which vanishes for tuples admissible in the conditional test.
  Matrix constraint() const;
};

Matrix quadratic_form(const OperatorKernel& kernel, const Witness& tuple);

/// Block Choi matrix, indexed by (sigma, i, k) x (sigma', j, l):
///   C = K^{sigma,sigma'}(e_ij)(k, l).
/// It is the nonzero part of the Choi matrix of the block map
/// (x_{ss'}) -> (K^{ss'}(x_{ss'})) on M_|S|(B).
Matrix block_choi(const OperatorKernel& kernel);

struct CpdVerdict {
  bool cpd = false;
  double min_eigenvalue = 0.0;
  double threshold = 0.0;
  std::optional<Witness> witness;  // set when cpd == false
};

CpdVerdict is_cpd(const OperatorKernel& kernel, double tol = kPsdTolerance);

std::vector<double> default_schoenberg_grid();

struct ConditionalOptions {
  std::size_t samples = 500;
  std::size_t max_tuple = 4;
  std::uint64_t seed = 20051001;
  double tol = kPsdTolerance;
  std::vector<double> grid = default_schoenberg_grid();
};

struct SamplerReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst = 0.0;  // most negative normalized eigenvalue seen
  bool passed = false;
  std::optional<Witness> witness;
};

struct SchoenbergReport {
  std::vector<double> grid;
  std::vector<double> min_eigenvalues;
  bool passed = false;
  std::optional<double> first_failure;
  std::optional<Witness> witness;  // CPD witness of exp(tQ) at first_failure
};

/// The block Choi matrix compressed to the complement of
/// Omega = sum_{sigma,i} e_sigma (x) e_i (x) e_i. Negative directions there are
/// exactly the admissible tuples (sum a_i b_i = 0) with a negative form.
struct CompressedChoiReport {
  double min_eigenvalue = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::optional<Witness> witness;
};

struct ConditionalReport {
  bool verdict = false;
  bool discrepancy = false;
  SamplerReport direct;
  SchoenbergReport schoenberg;
  CompressedChoiReport compressed;
  std::uint64_t seed = 0;
  /// Best admissible violating tuple found (direct sampler or compressed Choi).
  std::optional<Witness> witness;

  std::string summary() const;
};

ConditionalReport is_conditionally_cpd(const OperatorKernel& kernel,
                                       const ConditionalOptions& options = {});

/// Uniformly continuous CPD-semigroup t -> e^{tQ}, exponentiated entrywise.
class CpdSemigroup {
 public:
  explicit CpdSemigroup(OperatorKernel generator);

  const OperatorKernel& generator() const { return generator_; }
  OperatorKernel evaluate(double t) const;
  Superoperator entry(std::size_t row, std::size_t col, double t) const;

 private:
  OperatorKernel generator_;
};

OperatorKernel evaluate(const CpdSemigroup& semigroup, double t);

/// Single-time Kolmogorov decomposition K^{s,s'}(b) = sum_r V_{s,r}^* b V_{s',r}.
/// The family (V_{s,r})_r is the vector eta_s in the column module B^R.
struct KolmogorovDecomposition {
  int dim = 0;
  std::vector<std::string> labels;
  std::vector<std::vector<Matrix>> factors;  // factors[sigma][r]

  std::size_t rank() const { return factors.empty() ? 0 : factors.front().size(); }
  Superoperator entry(std::size_t row, std::size_t col) const;
  OperatorKernel reconstruct() const;
};

KolmogorovDecomposition kolmogorov_decompose(const OperatorKernel& kernel,
                                             double tol = kPsdTolerance);

}  // namespace unitlab
