#include "unitlab/fock.hpp"

#include <algorithm>
#include <cmath>

namespace unitlab {

StepFunction::StepFunction(int multiplicity) : multiplicity_(multiplicity), breakpoints_{0.0} {
  if (multiplicity < 1 || multiplicity > 4) throw DimensionError("multiplicity must be in 1..4");
}

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<Vector> values)
    : multiplicity_(values.empty() ? 1 : static_cast<int>(values.front().size())),
      breakpoints_(std::move(breakpoints)),
      values_(std::move(values)) {
  if (breakpoints_.empty() || breakpoints_.front() != 0.0)
    throw DomainError("step function breakpoints must start at 0");
  if (breakpoints_.size() != values_.size() + 1)
    throw DimensionError("step function needs one value per interval");
  if (multiplicity_ < 1 || multiplicity_ > 4) throw DimensionError("multiplicity must be in 1..4");
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (!(breakpoints_[j + 1] > breakpoints_[j]))
      throw DomainError("step function breakpoints must increase strictly");
    if (values_[j].size() != multiplicity_)
      throw DimensionError("step function values must share one multiplicity");
  }
}

StepFunction StepFunction::constant(const Vector& value, double length) {
  if (length == 0.0) return StepFunction(static_cast<int>(value.size()));
  return StepFunction({0.0, length}, {value});
}

StepFunction StepFunction::embedded(int multiplicity) const {
  if (multiplicity < multiplicity_) throw DimensionError("cannot embed into a smaller multiplicity");
  if (values_.empty()) return StepFunction(multiplicity);
  std::vector<Vector> values;
  for (const auto& v : values_) {
    Vector w = Vector::Zero(multiplicity);
    w.head(multiplicity_) = v;
    values.push_back(w);
  }
  return StepFunction(breakpoints_, std::move(values));
}

StepFunction concat(const StepFunction& f, const StepFunction& g) {
  if (f.multiplicity() != g.multiplicity())
    throw DimensionError("concat: multiplicity mismatch");
  if (f.values().empty()) return g;
  if (g.values().empty()) return f;
  std::vector<double> bp = f.breakpoints();
  std::vector<Vector> values = f.values();
  const double shift = f.length();
  for (std::size_t j = 1; j < g.breakpoints().size(); ++j) bp.push_back(shift + g.breakpoints()[j]);
  values.insert(values.end(), g.values().begin(), g.values().end());
  return StepFunction(std::move(bp), std::move(values));
}

Complex integrate_inner(const StepFunction& f, const StepFunction& g) {
  if (f.multiplicity() != g.multiplicity())
    throw DimensionError("fock_inner: multiplicity mismatch");
  const double len = f.length();
  if (std::abs(len - g.length()) > 1e-12 * std::max(1.0, len))
    throw DomainError("fock_inner: arguments live on intervals of different length");
  Complex sum = 0.0;
  std::size_t i = 0, j = 0;
  double pos = 0.0;
  const auto& fb = f.breakpoints();
  const auto& gb = g.breakpoints();
  while (i < f.values().size() && j < g.values().size()) {
    // Last pieces extend to the common end, absorbing roundoff in the lengths.
    const double fend = i + 1 == f.values().size() ? len : fb[i + 1];
    const double gend = j + 1 == g.values().size() ? len : gb[j + 1];
    const double end = std::min(fend, gend);
    sum += (end - pos) * f.values()[i].dot(g.values()[j]);
    pos = end;
    if (fend <= end) ++i;
    if (gend <= end) ++j;
  }
  return sum;
}

ExponentialVector concat(const ExponentialVector& a, const ExponentialVector& b) {
  return {a.prefactor * b.prefactor, concat(a.argument, b.argument)};
}

Complex fock_inner(const ExponentialVector& phi, const ExponentialVector& psi) {
  return std::conj(phi.prefactor) * psi.prefactor *
         std::exp(integrate_inner(phi.argument, psi.argument));
}

Matrix gram_matrix(const std::vector<ExponentialVector>& vectors) {
  const int n = static_cast<int>(vectors.size());
  Matrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = fock_inner(vectors[i], vectors[j]);
  return g;
}

FockUnit FockUnit::scalar(Complex alpha, Complex c) {
  Vector v(1);
  v(0) = c;
  return {alpha, v};
}

ExponentialVector FockUnit::at(double t) const {
  return {std::exp(t * alpha), StepFunction::constant(c, t)};
}

Complex fock_unit_pairing(const FockUnit& u, const FockUnit& v, double t) {
  return std::exp(t * (std::conj(u.alpha) + v.alpha + u.c.dot(v.c)));
}

std::vector<FockUnit> fock_realization(const OperatorKernel& generator, double tol) {
  if (generator.dim() != 1) throw DimensionError("fock_realization needs a d = 1 generator");
  const int n = static_cast<int>(generator.size());
  if (n == 0) return {};
  Matrix gamma(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gamma(i, j) = generator.at(i, j).rep()(0, 0);
  if ((gamma - gamma.adjoint()).cwiseAbs().maxCoeff() > tol * std::max(1.0, gamma.cwiseAbs().maxCoeff()))
    throw DomainError("fock_realization: generator is not hermitian");

  std::vector<Complex> alpha(n);
  alpha[0] = 0.5 * gamma(0, 0).real();
  for (int j = 1; j < n; ++j) alpha[j] = gamma(0, j) - alpha[0];
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = gamma(i, j) - std::conj(alpha[i]) - alpha[j];
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.adjoint()));
  const auto& lambda = eig.eigenvalues();
  const double cutoff = tol * std::max(1.0, lambda.cwiseAbs().maxCoeff());
  if (lambda(0) < -cutoff)
    throw DomainError("fock_realization: generator is not conditionally positive definite");
  std::vector<int> kept;
  for (int r = 0; r < n; ++r)
    if (lambda(r) > cutoff) kept.push_back(r);
  if (kept.size() > 4) throw DomainError("fock_realization: needs multiplicity > 4");
  const int k = std::max<int>(1, static_cast<int>(kept.size()));

  std::vector<FockUnit> units;
  for (int s = 0; s < n; ++s) {
    FockUnit u{alpha[s], Vector::Zero(k)};
    for (std::size_t r = 0; r < kept.size(); ++r)
      u.c(static_cast<int>(r)) = std::sqrt(lambda(kept[r])) * std::conj(eig.eigenvectors()(s, kept[r]));
    units.push_back(u);
  }
  return units;
}

ExponentialVector trotter_vector(const FockUnit& u, const FockUnit& v, const Partition& slots,
                                 double kappa, double lambda) {
  if (!(kappa > 0.0) || !(lambda > 0.0)) throw DomainError("slot fractions must be positive");
  if (u.c.size() != v.c.size()) throw DimensionError("trotter_vector: multiplicity mismatch");
  std::vector<double> bp{0.0};
  std::vector<Vector> values;
  Complex log_prefactor = 0.0;
  // parts() runs latest first; build from the earliest slot.
  const auto& parts = slots.parts();
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    const double p = *it;
    bp.push_back(bp.back() + kappa * p);
    values.push_back(u.c);
    bp.push_back(bp.back() + lambda * p);
    values.push_back(v.c);
    log_prefactor += kappa * p * u.alpha + lambda * p * v.alpha;
  }
  return {std::exp(log_prefactor), StepFunction(std::move(bp), std::move(values))};
}

ExponentialVector trotter_vector(const FockUnit& u, const FockUnit& v, double t, std::size_t n,
                                 double kappa, double lambda) {
  if (n == 0) throw DomainError("trotter_vector needs n >= 1");
  if (t == 0.0) return {1.0, StepFunction(static_cast<int>(u.c.size()))};
  return trotter_vector(u, v, Partition::uniform(t / (kappa + lambda), n), kappa, lambda);
}

namespace {

FockUnit constant_unit(std::vector<Complex> c) {
  Vector v(static_cast<int>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) v(static_cast<int>(i)) = c[i];
  return {0.0, v};
}

ExponentialVector embed(const ExponentialVector& v, int multiplicity) {
  return {v.prefactor, v.argument.embedded(multiplicity)};
}

}  // namespace

CounterexampleResult counterexample_scenario(double t, const Schedule& schedule) {
  if (t < 0.0) throw DomainError("counterexample horizon must be >= 0");
  CounterexampleResult out;
  out.horizon = t;
  const FockUnit u = constant_unit({0.0});
  const FockUnit v = constant_unit({1.0});
  const FockUnit w = constant_unit({0.5});
  out.zeta = constant_unit({0.5, 0.5});
  const int k = out.embedding_multiplicity;

  const auto members = schedule.materialize(t > 0.0 ? t : 1.0);
  const ExponentialVector wt = w.at(t);
  const ExponentialVector zt = out.zeta.at(t);
  // Ambient units of E, and their images in F.
  const std::vector<ExponentialVector> ambient{u.at(t), v.at(t)};

  ConvergenceReport& rw = out.vs_w;
  ConvergenceReport& rz = out.vs_zeta;
  for (auto* r : {&rw, &rz}) {
    r->horizon = t;
    r->expression = "y";
    r->schedule = schedule.to_string();
    r->seed = schedule.seed();
  }
  rw.candidate = "w";
  rz.candidate = "zeta";
  rw.scale = std::max(1.0, std::abs(fock_inner(wt, wt)));
  rz.scale = std::max(1.0, std::abs(fock_inner(zt, zt)));

  std::vector<Complex> previous_w, previous_z;
  for (const auto& part : members) {
    const ExponentialVector y =
        t > 0.0 ? trotter_vector(u, v, part) : ExponentialVector{1.0, StepFunction(1)};
    const ExponentialVector yf = embed(y, k);

    CounterexampleRow row;
    row.n = part.size();
    row.y_norm2 = fock_inner(y, y);
    row.w_y = fock_inner(wt, y);
    row.w_w = fock_inner(wt, wt);
    row.norm_defect = (row.y_norm2 - 2.0 * row.w_y.real() + row.w_w).real();
    row.zeta_y = fock_inner(zt, yf);
    row.zeta_zeta = fock_inner(zt, zt);
    out.rows.push_back(row);

    const double mesh = t > 0.0 ? part.norm() : 0.0;
    ReportRow a;
    a.parts = row.n;
    a.mesh = mesh;
    a.gram_defect = std::abs(row.y_norm2 - row.w_w);
    a.criterion_defect = std::abs(row.w_y - row.w_w);
    a.norm_defect = a.norm_defect_min = row.norm_defect;
    a.gram_norm = std::abs(row.y_norm2);
    for (const auto& e : ambient)
      a.ambient_defect = std::max(a.ambient_defect, std::abs(fock_inner(e, y) - fock_inner(e, wt)));
    const Complex wy_w = fock_inner(y, wt);
    a.identity_residual = std::abs((row.y_norm2 - wy_w - row.w_y + row.w_w) -
                                   (row.y_norm2 - 2.0 * row.w_y.real() + row.w_w));
    if (!previous_w.empty()) a.increment = std::abs(row.w_y - previous_w.back());
    previous_w.push_back(row.w_y);
    rw.rows.push_back(a);

    ReportRow b;
    b.parts = row.n;
    b.mesh = mesh;
    b.gram_defect = std::abs(row.y_norm2 - row.zeta_zeta);
    b.criterion_defect = std::abs(row.zeta_y - row.zeta_zeta);
    b.norm_defect = b.norm_defect_min =
        (row.y_norm2 - 2.0 * row.zeta_y.real() + row.zeta_zeta).real();
    b.gram_norm = std::abs(row.y_norm2);
    for (const auto& e : ambient) {
      const ExponentialVector ef = embed(e, k);
      b.ambient_defect = std::max(b.ambient_defect, std::abs(fock_inner(ef, yf) - fock_inner(ef, zt)));
    }
    const Complex yz = fock_inner(yf, zt);
    b.identity_residual = std::abs((row.y_norm2 - yz - row.zeta_y + row.zeta_zeta) -
                                   (row.y_norm2 - 2.0 * row.zeta_y.real() + row.zeta_zeta));
    if (!previous_z.empty()) b.increment = std::abs(row.zeta_y - previous_z.back());
    previous_z.push_back(row.zeta_y);
    rz.rows.push_back(b);
  }
  classify(rw);
  classify(rz);
  return out;
}

}  // namespace unitlab
