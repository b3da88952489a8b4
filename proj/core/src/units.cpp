#include "unitlab/units.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <unsupported/Eigen/MatrixFunctions>

#include "detail/segments.hpp"

namespace unitlab {

namespace detail {

std::vector<double> segment_ends(const Term& term) {
  std::vector<double> ends;
  double total = 0.0;
  for (const auto& s : term.segments) {
    total += s.fraction;
    ends.push_back(total);
  }
  if (!ends.empty()) {
    for (auto& e : ends) e /= total;
    ends.back() = 1.0;
  }
  return ends;
}

namespace {

std::size_t segment_at(const TermPlacement& p, double time) {
  const double f = (p.top - time) / p.length;
  const auto& ends = *p.ends;
  const auto it = std::lower_bound(ends.begin(), ends.end(), f);
  return it == ends.end() ? ends.size() - 1 : static_cast<std::size_t>(it - ends.begin());
}

void add_cuts(const TermPlacement& p, double lo, double hi, double eps, std::vector<double>& cuts) {
  const auto& ends = *p.ends;
  for (std::size_t j = 0; j + 1 < ends.size(); ++j) {
    const double at = p.top - p.length * ends[j];
    if (at > lo + eps && at < hi - eps) cuts.push_back(at);
  }
}

}  // namespace

std::vector<SegmentOverlap> overlaps(const TermPlacement& x, const TermPlacement& y, double lo,
                                     double hi) {
  const double eps = 1e-15 * std::max({1.0, std::abs(hi), std::abs(lo)});
  std::vector<double> cuts{hi, lo};
  add_cuts(x, lo, hi, eps, cuts);
  add_cuts(y, lo, hi, eps, cuts);
  std::sort(cuts.begin(), cuts.end(), std::greater<>());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<SegmentOverlap> out;
  out.reserve(cuts.size() - 1);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    out.push_back({cuts[k] - cuts[k + 1], segment_at(x, mid), segment_at(y, mid)});
  }
  return out;
}

}  // namespace detail

namespace {

Matrix twist_exp(const Matrix& beta, double t) {
  if (t == 0.0) return Matrix::Identity(beta.rows(), beta.cols());
  const Matrix scaled = beta * Complex(t, 0.0);
  return scaled.exp();
}

}  // namespace

Matrix Term::left_factor(double t) const {
  if (side == TwistSide::left) return left * twist_exp(twist, t);
  return left;
}

Matrix Term::right_factor(double t) const {
  if (side == TwistSide::right) return twist_exp(twist, t) * right;
  return right;
}

UnitExpression::UnitExpression(int dim, std::vector<Term> terms) : dim_(dim) {
  if (dim <= 0) throw DimensionError("expression dimension must be positive");
  for (auto& t : terms) add(std::move(t));
}

UnitExpression UnitExpression::unit(std::string label, int dim) {
  return concatenation({{std::move(label), 1.0}}, dim);
}

UnitExpression UnitExpression::affine(const std::vector<std::pair<Complex, std::string>>& terms,
                                      int dim) {
  UnitExpression e(dim);
  for (const auto& [coefficient, label] : terms) {
    Term t;
    t.left = coefficient * identity_element(dim);
    t.right = identity_element(dim);
    t.segments = {{label, 1.0}};
    e.add(std::move(t));
  }
  return e;
}

UnitExpression UnitExpression::concatenation(std::vector<Segment> segments, int dim) {
  Term t;
  t.left = identity_element(dim);
  t.right = identity_element(dim);
  t.segments = std::move(segments);
  return UnitExpression(dim, {std::move(t)});
}

UnitExpression& UnitExpression::add(Term term) {
  if (term.left.size() == 0) term.left = identity_element(dim_);
  if (term.right.size() == 0) term.right = identity_element(dim_);
  if (term.twist.size() == 0) term.twist = Matrix::Zero(dim_, dim_);
  for (const Matrix* m : {&term.left, &term.right, &term.twist})
    if (m->rows() != dim_ || m->cols() != dim_)
      throw DimensionError("expression term has a factor of the wrong dimension");
  if (term.side == TwistSide::none) term.twist = Matrix::Zero(dim_, dim_);
  terms_.push_back(std::move(term));
  return *this;
}

Matrix UnitExpression::value_at_zero() const {
  Matrix sum = Matrix::Zero(dim_, dim_);
  for (const auto& t : terms_) sum += t.left * t.right;
  return sum;
}

std::vector<std::string> UnitExpression::referenced_labels() const {
  std::vector<std::string> out;
  for (const auto& t : terms_)
    for (const auto& s : t.segments)
      if (std::find(out.begin(), out.end(), s.label) == out.end()) out.push_back(s.label);
  return out;
}

void UnitExpression::validate(const OperatorKernel& kernel) const {
  if (kernel.dim() != dim_)
    throw DimensionError("expression dimension " + std::to_string(dim_) +
                         " does not match kernel dimension " + std::to_string(kernel.dim()));
  if (terms_.empty()) throw DomainError("expression has no terms");
  for (const auto& t : terms_) {
    if (t.segments.empty()) throw DomainError("expression term without unit segments");
    double total = 0.0;
    for (const auto& s : t.segments) {
      if (!(s.fraction > 0.0))
        throw DomainError("segment fraction for '" + s.label + "' must be positive");
      total += s.fraction;
      kernel.index_of(s.label);
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw DomainError("segment fractions of a term sum to " + std::to_string(total) +
                        ", not 1");
  }
}

namespace {

// Derivative of the segment pairing P_t = <X_t, . X'_t>: each overlap of
// relative width w contributes w * Q^{sigma, sigma'}.
Superoperator segment_derivative(const Term& x, const Term& y, const OperatorKernel& q) {
  const auto x_ends = detail::segment_ends(x);
  const auto y_ends = detail::segment_ends(y);
  const detail::TermPlacement px{&x_ends, 1.0, 1.0};
  const detail::TermPlacement py{&y_ends, 1.0, 1.0};
  Superoperator out = Superoperator::zero(q.dim());
  for (const auto& piece : detail::overlaps(px, py, 0.0, 1.0))
    out += piece.width *
           q.at(x.segments[piece.x_segment].label, y.segments[piece.y_segment].label);
  return out;
}

// d/dt at 0 of m -> B_t^* P_t(A_t^* m A'_t) B'_t.
Superoperator term_derivative(const Term& x, const Term& y, const OperatorKernel& q) {
  const int d = q.dim();
  const Matrix zero = Matrix::Zero(d, d);
  const Matrix& beta_lx = x.side == TwistSide::left ? x.twist : zero;
  const Matrix& beta_ly = y.side == TwistSide::left ? y.twist : zero;
  const Matrix& beta_rx = x.side == TwistSide::right ? x.twist : zero;
  const Matrix& beta_ry = y.side == TwistSide::right ? y.twist : zero;

  const Superoperator inner = Superoperator::sandwich(x.left.adjoint(), y.left);
  const Superoperator outer = Superoperator::sandwich(x.right.adjoint(), y.right);

  Superoperator inner_rate = Superoperator::sandwich(beta_lx.adjoint() * x.left.adjoint(), y.left) +
                             Superoperator::sandwich(x.left.adjoint(), y.left * beta_ly);
  Superoperator outer_rate =
      Superoperator::sandwich(x.right.adjoint() * beta_rx.adjoint(), y.right) +
      Superoperator::sandwich(x.right.adjoint(), beta_ry * y.right);

  return compose(outer, compose(segment_derivative(x, y, q), inner)) + compose(outer, inner_rate) +
         compose(outer_rate, inner);
}

}  // namespace

Superoperator pair_derivative(const UnitExpression& e1, const UnitExpression& e2,
                              const OperatorKernel& generator) {
  e1.validate(generator);
  e2.validate(generator);
  Superoperator out = Superoperator::zero(generator.dim());
  for (const auto& x : e1.terms())
    for (const auto& y : e2.terms()) out += term_derivative(x, y, generator);
  return out;
}

ExtendedGenerator extend_generator(const UnitExpression& y, const OperatorKernel& generator,
                                   const ExtensionOptions& options) {
  y.validate(generator);
  const int d = generator.dim();
  const double unit_defect = element_norm(y.value_at_zero() - identity_element(d));
  if (unit_defect > options.unit_sum_tol)
    throw DomainError("section does not start at the identity: ||sum a b - 1|| = " +
                      std::to_string(unit_defect));

  ExtendedGenerator ext;
  ext.base = generator;
  ext.zeta_label = options.zeta_label;
  while (generator.contains(ext.zeta_label)) ext.zeta_label += "'";

  ext.zeta_zeta = pair_derivative(y, y, generator);
  for (const auto& label : generator.labels())
    ext.zeta_xi.push_back(pair_derivative(y, UnitExpression::unit(label, d), generator));

  auto labels = generator.labels();
  labels.push_back(ext.zeta_label);
  ext.assembled = OperatorKernel(d, labels);
  const std::size_t z = ext.zeta_index();
  for (std::size_t i = 0; i < generator.size(); ++i) {
    for (std::size_t j = 0; j < generator.size(); ++j) ext.assembled.set(i, j, generator.at(i, j));
    ext.assembled.set(z, i, ext.zeta_xi[i]);
    ext.assembled.set(i, z, ext.zeta_xi[i].star_conjugate());
  }
  ext.assembled.set(z, z, ext.zeta_zeta);

  ext.check = is_conditionally_cpd(ext.assembled, options.conditional);
  if (!ext.check.verdict) {
    // A violation at roundoff scale points at arithmetic, not at the section.
    const double worst = std::min(ext.check.compressed.min_eigenvalue,
                                  ext.check.direct.worst);
    const bool tiny = std::abs(worst) < 1e-6;
    throw ExtensionError("extended generator is not conditionally CPD\n" + ext.check.summary(),
                         tiny ? ExtensionError::Kind::numerical_breakdown
                              : ExtensionError::Kind::hypothesis_violation,
                         ext.check);
  }
  return ext;
}

Normalization normalize_unit(const std::string& label, const OperatorKernel& generator,
                             const Matrix& h, TwistSide side, const ExtensionOptions& options) {
  const int d = generator.dim();
  if (h.rows() != d || h.cols() != d) throw DimensionError("normalize_unit: h has wrong shape");
  if (side == TwistSide::none) throw DomainError("normalize_unit: twist side must be left or right");
  const double h_scale = std::max(1.0, element_norm(h));
  if (element_norm(h - h.adjoint()) > 1e-10 * h_scale)
    throw DomainError("normalize_unit: h is not self-adjoint");

  const Matrix q_one = generator.at(label, label)(identity_element(d));
  const double q_scale = std::max(1.0, element_norm(q_one));
  if (element_norm(q_one - q_one.adjoint()) > 1e-10 * q_scale)
    throw DomainError("normalize_unit: Q(1) is not self-adjoint; malformed generator");

  Normalization out;
  out.beta = -0.5 * q_one + Complex(0.0, 1.0) * h;

  Term term;
  term.left = identity_element(d);
  term.right = identity_element(d);
  term.twist = out.beta;
  term.side = side;
  term.segments = {{label, 1.0}};
  out.expression = UnitExpression(d, {std::move(term)});
  out.extension = extend_generator(out.expression, generator, options);

  const Matrix one = identity_element(d);
  const double unital_defect = element_norm(out.extension.zeta_zeta(one));
  if (unital_defect > 1e-10 * q_scale)
    throw NumericalError("normalize_unit: K(1) = " + std::to_string(unital_defect) + " != 0");
  for (double t : {0.25, 0.5, 1.0}) {
    const double drift = element_norm(superop_exp(out.extension.zeta_zeta, t)(one) - one);
    if (drift > 1e-9 * q_scale)
      throw NumericalError("normalize_unit: exp(tK)(1) != 1 at t = " + std::to_string(t));
  }
  return out;
}

}  // namespace unitlab
