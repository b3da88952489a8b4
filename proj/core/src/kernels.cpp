#include "unitlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "unitlab/rng.hpp"

namespace unitlab {

OperatorKernel::OperatorKernel(int dim, std::vector<std::string> labels)
    : dim_(dim), labels_(std::move(labels)) {
  if (dim <= 0) throw DimensionError("kernel dimension must be positive");
  for (std::size_t i = 0; i < labels_.size(); ++i)
    for (std::size_t j = i + 1; j < labels_.size(); ++j)
      if (labels_[i] == labels_[j]) throw LabelError("duplicate label '" + labels_[i] + "'");
  entries_.assign(labels_.size() * labels_.size(), Superoperator::zero(dim));
}

OperatorKernel OperatorKernel::identity(int dim, std::vector<std::string> labels) {
  OperatorKernel k(dim, std::move(labels));
  for (auto& e : k.entries_) e = Superoperator::identity(dim);
  return k;
}

OperatorKernel OperatorKernel::scalar(const Matrix& gamma, std::vector<std::string> labels) {
  if (gamma.rows() != gamma.cols() || static_cast<std::size_t>(gamma.rows()) != labels.size())
    throw DimensionError("scalar kernel: gamma must be |S| x |S|");
  OperatorKernel k(1, std::move(labels));
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j = 0; j < k.size(); ++j) {
      Matrix rep(1, 1);
      rep(0, 0) = gamma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      k.set(i, j, Superoperator(rep));
    }
  return k;
}

bool OperatorKernel::contains(std::string_view label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t OperatorKernel::index_of(std::string_view label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw LabelError("unknown unit label '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

const Superoperator& OperatorKernel::at(std::size_t row, std::size_t col) const {
  if (row >= size() || col >= size()) throw LabelError("kernel index out of range");
  return entries_[row * size() + col];
}

const Superoperator& OperatorKernel::at(std::string_view row, std::string_view col) const {
  return at(index_of(row), index_of(col));
}

void OperatorKernel::set(std::size_t row, std::size_t col, Superoperator entry) {
  if (row >= size() || col >= size()) throw LabelError("kernel index out of range");
  if (entry.dim() != dim_) throw DimensionError("kernel entry has wrong dimension");
  entries_[row * size() + col] = std::move(entry);
}

double OperatorKernel::hermitian_defect() const {
  double scale = 1.0;
  for (const auto& e : entries_)
    if (e.rep().size() > 0) scale = std::max(scale, e.rep().cwiseAbs().maxCoeff());
  double worst = 0.0;
  for (std::size_t s = 0; s < size(); ++s)
    for (std::size_t t = s; t < size(); ++t) {
      const Superoperator mirrored = at(s, t).star_conjugate();
      worst = std::max(worst, at(t, s).max_abs_diff(mirrored));
    }
  return worst / scale;
}

OperatorKernel OperatorKernel::permuted(const std::vector<std::size_t>& order) const {
  if (order.size() != size()) throw LabelError("permutation has wrong length");
  std::vector<std::string> labels;
  labels.reserve(order.size());
  for (auto i : order) labels.push_back(labels_.at(i));
  OperatorKernel out(dim_, std::move(labels));
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = 0; j < order.size(); ++j) out.set(i, j, at(order[i], order[j]));
  return out;
}

bool operator==(const OperatorKernel& a, const OperatorKernel& b) {
  if (a.dim_ != b.dim_ || a.labels_ != b.labels_) return false;
  for (std::size_t k = 0; k < a.entries_.size(); ++k)
    if (a.entries_[k].rep() != b.entries_[k].rep()) return false;
  return true;
}

Matrix Witness::constraint() const {
  if (a.empty()) return {};
  Matrix sum = Matrix::Zero(a.front().rows(), b.front().cols());
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

Matrix quadratic_form(const OperatorKernel& kernel, const Witness& tuple) {
  const int d = kernel.dim();
  Matrix form = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < tuple.a.size(); ++i)
    for (std::size_t j = 0; j < tuple.a.size(); ++j)
      form += tuple.b[i].adjoint() *
              kernel.at(tuple.labels[i], tuple.labels[j])(tuple.a[i].adjoint() * tuple.a[j]) *
              tuple.b[j];
  return form;
}

Matrix block_choi(const OperatorKernel& kernel) {
  const int d = kernel.dim();
  const auto n = static_cast<int>(kernel.size());
  const int block = d * d;
  Matrix c(n * block, n * block);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t)
      c.block(s * block, t * block, block, block) =
          choi_matrix(kernel.at(static_cast<std::size_t>(s), static_cast<std::size_t>(t)));
  return c;
}

namespace {

void require_hermitian(const OperatorKernel& kernel, double tol) {
  const double defect = kernel.hermitian_defect();
  if (defect > tol)
    throw NotAKernelCandidate("not a kernel candidate: hermitian defect " +
                              std::to_string(defect));
}

// Tuple realizing x^* C x in the (0,0) entry of the positivity form:
// a_{s,i} = e_{0i}, b_{s,i} = (column 0 := x_{s,i,.}).
Witness witness_from_choi_vector(const Vector& x, int dim, std::size_t labels) {
  Witness w;
  for (std::size_t s = 0; s < labels; ++s)
    for (int i = 0; i < dim; ++i) {
      w.a.push_back(matrix_unit(dim, 0, i));
      Matrix b = Matrix::Zero(dim, dim);
      for (int k = 0; k < dim; ++k)
        b(k, 0) = x(static_cast<Eigen::Index>(s) * dim * dim + i * dim + k);
      w.b.push_back(std::move(b));
      w.labels.push_back(s);
    }
  return w;
}

double min_hermitian_eigenvalue(const Matrix& m) {
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

double entry_scale(const OperatorKernel& kernel) {
  double scale = 0.0;
  for (std::size_t s = 0; s < kernel.size(); ++s)
    for (std::size_t t = 0; t < kernel.size(); ++t)
      scale = std::max(scale, kernel.at(s, t).rep().norm());
  return scale;
}

Matrix well_conditioned_invertible(Rng& rng, int dim) {
  for (;;) {
    Matrix a = rng.gaussian_matrix(dim, dim);
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto& sv = svd.singularValues();
    if (sv(dim - 1) > 0.0 && sv(0) / sv(dim - 1) < 1e3) return a;
  }
}

SamplerReport sample_constrained(const OperatorKernel& kernel, const ConditionalOptions& options) {
  SamplerReport report;
  const int d = kernel.dim();
  const double kscale = entry_scale(kernel);
  Rng rng(options.seed);
  const std::size_t max_tuple = std::max<std::size_t>(2, options.max_tuple);
  for (std::size_t sample = 0; sample < options.samples; ++sample) {
    const std::size_t n = 2 + rng.index(max_tuple - 1);
    Witness w;
    Matrix partial = Matrix::Zero(d, d);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      w.a.push_back(rng.gaussian_matrix(d, d));
      w.b.push_back(rng.gaussian_matrix(d, d));
      w.labels.push_back(rng.index(kernel.size()));
      partial += w.a.back() * w.b.back();
    }
    Matrix last = well_conditioned_invertible(rng, d);
    w.b.push_back(-last.partialPivLu().solve(partial));
    w.a.push_back(std::move(last));
    w.labels.push_back(rng.index(kernel.size()));

    double weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) weight += element_norm(w.a[i]) * element_norm(w.b[i]);
    const double scale = kscale * weight * weight;
    ++report.samples;
    if (scale == 0.0) continue;
    const double value = min_hermitian_eigenvalue(quadratic_form(kernel, w)) / scale;
    if (value < report.worst) {
      report.worst = value;
      if (value < -options.tol) report.witness = w;
    }
    if (value < -options.tol) ++report.violations;
  }
  report.passed = report.violations == 0;
  return report;
}

CompressedChoiReport compressed_choi(const OperatorKernel& kernel, double tol) {
  CompressedChoiReport report;
  const int d = kernel.dim();
  const Matrix c = block_choi(kernel);
  Vector omega = Vector::Zero(c.rows());
  for (std::size_t s = 0; s < kernel.size(); ++s)
    for (int i = 0; i < d; ++i)
      omega(static_cast<Eigen::Index>(s) * d * d + i * d + i) = 1.0;
  omega.normalize();
  const Matrix proj = Matrix::Identity(c.rows(), c.cols()) - omega * omega.adjoint();
  const PsdCheck psd = check_psd(proj * c * proj, tol);
  report.min_eigenvalue = psd.min_eigenvalue;
  report.threshold = psd.threshold;
  report.passed = psd.positive;
  if (!psd.positive) {
    const Vector x = proj * psd.min_eigenvector;
    report.witness = witness_from_choi_vector(x, d, kernel.size());
  }
  return report;
}

}  // namespace

CpdVerdict is_cpd(const OperatorKernel& kernel, double tol) {
  require_hermitian(kernel, tol);
  CpdVerdict verdict;
  const PsdCheck psd = check_psd(block_choi(kernel), tol);
  verdict.cpd = psd.positive;
  verdict.min_eigenvalue = psd.min_eigenvalue;
  verdict.threshold = psd.threshold;
  if (!psd.positive)
    verdict.witness = witness_from_choi_vector(psd.min_eigenvector, kernel.dim(), kernel.size());
  return verdict;
}

std::vector<double> default_schoenberg_grid() {
  std::vector<double> grid;
  constexpr int kPoints = 12;
  for (int k = 0; k < kPoints; ++k)
    grid.push_back(std::pow(10.0, -3.0 + 3.0 * k / (kPoints - 1)));
  return grid;
}

ConditionalReport is_conditionally_cpd(const OperatorKernel& kernel,
                                       const ConditionalOptions& options) {
  require_hermitian(kernel, options.tol);
  ConditionalReport report;
  report.seed = options.seed;
  report.direct = sample_constrained(kernel, options);

  const CpdSemigroup semigroup(kernel);
  report.schoenberg.grid = options.grid;
  report.schoenberg.passed = true;
  for (double t : options.grid) {
    const CpdVerdict v = is_cpd(semigroup.evaluate(t), options.tol);
    report.schoenberg.min_eigenvalues.push_back(v.min_eigenvalue);
    if (!v.cpd && report.schoenberg.passed) {
      report.schoenberg.passed = false;
      report.schoenberg.first_failure = t;
      report.schoenberg.witness = v.witness;
    }
  }

  report.compressed = compressed_choi(kernel, options.tol);

  report.verdict = report.direct.passed && report.schoenberg.passed && report.compressed.passed;
  report.discrepancy = !(report.direct.passed == report.schoenberg.passed &&
                         report.schoenberg.passed == report.compressed.passed);
  if (report.direct.witness)
    report.witness = report.direct.witness;
  else if (report.compressed.witness)
    report.witness = report.compressed.witness;
  return report;
}

std::string ConditionalReport::summary() const {
  std::ostringstream out;
  out << "conditional-CPD " << (verdict ? "PASS" : "FAIL") << " (seed " << seed << ")\n"
      << "  direct sampler: " << direct.samples << " admissible tuples, " << direct.violations
      << " violations, worst normalized eigenvalue " << direct.worst << '\n'
      << "  schoenberg grid: " << (schoenberg.passed ? "all CPD" : "exp(tQ) not CPD");
  if (schoenberg.first_failure) out << " (first failure at t=" << *schoenberg.first_failure << ')';
  out << '\n'
      << "  compressed choi: min eigenvalue " << compressed.min_eigenvalue << " (threshold -"
      << compressed.threshold << ")\n";
  if (discrepancy) out << "  DIAGNOSTIC: the three checks disagree\n";
  return out.str();
}

CpdSemigroup::CpdSemigroup(OperatorKernel generator) : generator_(std::move(generator)) {}

Superoperator CpdSemigroup::entry(std::size_t row, std::size_t col, double t) const {
  return superop_exp(generator_.at(row, col), t);
}

OperatorKernel CpdSemigroup::evaluate(double t) const {
  if (t < 0.0) throw DomainError("CPD-semigroup evaluated at negative time");
  OperatorKernel out(generator_.dim(), generator_.labels());
  for (std::size_t i = 0; i < generator_.size(); ++i)
    for (std::size_t j = 0; j < generator_.size(); ++j) out.set(i, j, entry(i, j, t));
  return out;
}

OperatorKernel evaluate(const CpdSemigroup& semigroup, double t) { return semigroup.evaluate(t); }

Superoperator KolmogorovDecomposition::entry(std::size_t row, std::size_t col) const {
  Superoperator out = Superoperator::zero(dim);
  for (std::size_t r = 0; r < rank(); ++r)
    out += Superoperator::sandwich(factors[row][r].adjoint(), factors[col][r]);
  return out;
}

OperatorKernel KolmogorovDecomposition::reconstruct() const {
  OperatorKernel out(dim, labels);
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = 0; j < labels.size(); ++j) out.set(i, j, entry(i, j));
  return out;
}

KolmogorovDecomposition kolmogorov_decompose(const OperatorKernel& kernel, double tol) {
  const CpdVerdict verdict = is_cpd(kernel, tol);
  if (!verdict.cpd)
    throw DomainError("kolmogorov_decompose: kernel is not CPD (min eigenvalue " +
                      std::to_string(verdict.min_eigenvalue) + ")");
  const int d = kernel.dim();
  const Matrix c = block_choi(kernel);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (c + c.adjoint()));
  const auto& values = eig.eigenvalues();
  const double cutoff = 1e-13 * std::max(1.0, values.cwiseAbs().maxCoeff());

  KolmogorovDecomposition out;
  out.dim = d;
  out.labels = kernel.labels();
  out.factors.assign(kernel.size(), {});
  // Largest eigenvalues first; C = sum_r u_r u_r^*, V_{s,r}(i,k) = conj(u_r(s,i,k)).
  for (Eigen::Index r = values.size() - 1; r >= 0; --r) {
    if (values(r) <= cutoff) break;
    Vector u = eig.eigenvectors().col(r) * std::sqrt(values(r));
    Eigen::Index pivot = 0;
    u.cwiseAbs().maxCoeff(&pivot);
    u *= std::conj(u(pivot)) / std::abs(u(pivot));
    for (std::size_t s = 0; s < kernel.size(); ++s) {
      Matrix v(d, d);
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
          v(i, k) = std::conj(u(static_cast<Eigen::Index>(s) * d * d + i * d + k));
      out.factors[s].push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace unitlab
