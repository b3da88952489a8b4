#pragma once

// Sections t -> y_t built from units of a product system, their
// infinitesimal data, and the extension of the generator kernel by a new
// unit zeta.
//
// A term is  a . [e^{t beta}] . (xi^1_{k_1 t} (.) ... (.) xi^m_{k_m t}) . [e^{t beta}] . b
// where the twist sits on at most one side. Segments are listed left to
// right, and the leftmost segment is the latest piece of time. An
// expression is a finite sum of terms.

#include <string>
#include <utility>
#include <vector>

#include "unitlab/kernels.hpp"

namespace unitlab {

enum class TwistSide { none, left, right };

struct Segment {
  std::string label;
  double fraction = 1.0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct Term {
  Matrix left;
  Matrix right;
  Matrix twist;
  TwistSide side = TwistSide::none;
  std::vector<Segment> segments;

  /// a e^{t beta} for a left twist, otherwise a.
  Matrix left_factor(double t) const;
  /// e^{t beta} b for a right twist, otherwise b.
  Matrix right_factor(double t) const;
};

class UnitExpression {
 public:
  UnitExpression() = default;
  explicit UnitExpression(int dim, std::vector<Term> terms = {});

  static UnitExpression unit(std::string label, int dim);
  /// sum_l c_l xi^l with scalar coefficients embedded as c_l 1.
  static UnitExpression affine(const std::vector<std::pair<Complex, std::string>>& terms,
                               int dim);
  static UnitExpression concatenation(std::vector<Segment> segments, int dim);

  UnitExpression& add(Term term);

  int dim() const { return dim_; }
  const std::vector<Term>& terms() const { return terms_; }

  /// sum over terms of a b, the value of the section at t = 0 in B.
  Matrix value_at_zero() const;
  std::vector<std::string> referenced_labels() const;

  /// Checks shapes, positive fractions summing to 1 within each term, and
  /// that every label exists in the kernel. Throws DomainError / LabelError.
  void validate(const OperatorKernel& kernel) const;

 private:
  int dim_ = 0;
  std::vector<Term> terms_;
};

/// d/dt at t = 0 of t -> <e1_t, . e2_t> (a map on B).
Superoperator pair_derivative(const UnitExpression& e1, const UnitExpression& e2,
                              const OperatorKernel& generator);

struct ExtendedGenerator {
  OperatorKernel base;
  std::string zeta_label;
  Superoperator zeta_zeta;               // K
  std::vector<Superoperator> zeta_xi;    // K_xi, indexed like base.labels()
  OperatorKernel assembled;              // on base labels + zeta (last)
  ConditionalReport check;

  std::size_t zeta_index() const { return base.size(); }
};

struct ExtensionOptions {
  std::string zeta_label = "zeta";
  ConditionalOptions conditional;
  double unit_sum_tol = 1e-10;
};

/// The assembled kernel failed the conditional-CPD check.
class ExtensionError : public Error {
 public:
  enum class Kind { hypothesis_violation, numerical_breakdown };

  ExtensionError(const std::string& message, Kind kind, ConditionalReport report)
      : Error(message), kind_(kind), report_(std::move(report)) {}

  Kind kind() const { return kind_; }
  const ConditionalReport& report() const { return report_; }

 private:
  Kind kind_;
  ConditionalReport report_;
};

ExtendedGenerator extend_generator(const UnitExpression& y, const OperatorKernel& generator,
                                   const ExtensionOptions& options = {});

struct Normalization {
  Matrix beta;
  UnitExpression expression;
  ExtendedGenerator extension;
};

/// y_t = xi_t e^{t beta} (or e^{t beta} xi_t) with beta = -Q^{xi,xi}(1)/2 + i h,
/// which makes the diagonal generator K unital: K(1) = 0.
Normalization normalize_unit(const std::string& label, const OperatorKernel& generator,
                             const Matrix& h, TwistSide side = TwistSide::right,
                             const ExtensionOptions& options = {});

}  // namespace unitlab
