#include "unitlab/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "unitlab/rng.hpp"

namespace unitlab {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

int root_dim(Eigen::Index n) {
  const auto d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (static_cast<Eigen::Index>(d) * d != n)
    throw DimensionError("superoperator representation of size " + std::to_string(n) +
                         " is not d^2 x d^2");
  return d;
}

void require_same_dim(const Superoperator& a, const Superoperator& b, const char* what) {
  if (a.dim() != b.dim())
    throw DimensionError(std::string(what) + ": dimension mismatch (" +
                         std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
}

double top_singular(const Matrix& y, Vector* u, Vector* v) {
  Eigen::JacobiSVD<Matrix> svd(y, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (u) *u = svd.matrixU().col(0);
  if (v) *v = svd.matrixV().col(0);
  return svd.singularValues()(0);
}

// Alternating ascent on the unitary group: b -> polar part of A^dagger(u v^*).
double refine_norm(const Superoperator& a, Matrix b) {
  const int d = a.dim();
  const Matrix adj = a.rep().adjoint();
  Vector u, v;
  double value = top_singular(a(b), &u, &v);
  for (int iter = 0; iter < 200; ++iter) {
    const Matrix g = unvec(adj * vec(u * v.adjoint()), d);
    Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
    b = svd.matrixU() * svd.matrixV().adjoint();
    const double next = top_singular(a(b), &u, &v);
    if (next <= value * (1.0 + 1e-15)) {
      value = std::max(value, next);
      break;
    }
    value = next;
  }
  return value;
}

}  // namespace

Matrix identity_element(int dim) { return Matrix::Identity(dim, dim); }

Matrix matrix_unit(int dim, int row, int col) {
  Matrix e = Matrix::Zero(dim, dim);
  e(row, col) = 1.0;
  return e;
}

Vector vec(const Matrix& b) {
  return Eigen::Map<const Vector>(b.data(), b.size());
}

Matrix unvec(const Vector& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim)
    throw DimensionError("unvec: vector length does not match dimension");
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

double element_norm(const Matrix& b) {
  if (b.size() == 0) return 0.0;
  return top_singular(b, nullptr, nullptr);
}

bool all_finite(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

Superoperator::Superoperator(Matrix rep) : rep_(std::move(rep)) {
  if (rep_.rows() != rep_.cols())
    throw DimensionError("superoperator representation must be square");
  dim_ = root_dim(rep_.rows());
}

Superoperator Superoperator::identity(int dim) {
  return Superoperator(Matrix::Identity(dim * dim, dim * dim));
}

Superoperator Superoperator::zero(int dim) {
  return Superoperator(Matrix::Zero(dim * dim, dim * dim));
}

Superoperator Superoperator::left(const Matrix& a) {
  return Superoperator(kron(Matrix::Identity(a.rows(), a.rows()), a));
}

Superoperator Superoperator::right(const Matrix& a) {
  return Superoperator(kron(a.transpose(), Matrix::Identity(a.rows(), a.rows())));
}

Superoperator Superoperator::sandwich(const Matrix& a, const Matrix& c) {
  if (a.rows() != c.rows())
    throw DimensionError("sandwich: factors of different dimension");
  return Superoperator(kron(c.transpose(), a));
}

Superoperator Superoperator::from_map(int dim,
                                      const std::function<Matrix(const Matrix&)>& map) {
  Matrix rep(dim * dim, dim * dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) {
      const Matrix image = map(matrix_unit(dim, i, j));
      if (image.rows() != dim || image.cols() != dim)
        throw DimensionError("from_map: image has wrong shape");
      rep.col(i + j * dim) = vec(image);
    }
  return Superoperator(std::move(rep));
}

Matrix Superoperator::operator()(const Matrix& b) const {
  if (b.rows() != dim_ || b.cols() != dim_)
    throw DimensionError("superoperator of dim " + std::to_string(dim_) +
                         " applied to a " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + " element");
  return unvec(rep_ * vec(b), dim_);
}

Superoperator Superoperator::star_conjugate() const {
  return from_map(dim_, [this](const Matrix& b) -> Matrix {
    return (*this)(b.adjoint()).adjoint();
  });
}

Superoperator& Superoperator::operator+=(const Superoperator& other) {
  require_same_dim(*this, other, "superoperator sum");
  rep_ += other.rep_;
  return *this;
}

Superoperator& Superoperator::operator-=(const Superoperator& other) {
  require_same_dim(*this, other, "superoperator difference");
  rep_ -= other.rep_;
  return *this;
}

Superoperator& Superoperator::operator*=(Complex scalar) {
  rep_ *= scalar;
  return *this;
}

double Superoperator::max_abs_diff(const Superoperator& other) const {
  require_same_dim(*this, other, "max_abs_diff");
  if (rep_.size() == 0) return 0.0;
  return (rep_ - other.rep_).cwiseAbs().maxCoeff();
}

Superoperator compose(const Superoperator& a, const Superoperator& b) {
  require_same_dim(a, b, "compose");
  return Superoperator(a.rep() * b.rep());
}

Superoperator superop_exp(const Superoperator& generator, double t, TimeDirection direction) {
  if (!std::isfinite(t)) throw NumericalError("superop_exp: non-finite time");
  if (t < 0.0 && direction == TimeDirection::forward_only)
    throw DomainError("superop_exp: negative time requires TimeDirection::allow_backward");
  if (!all_finite(generator.rep()))
    throw NumericalError("superop_exp: generator has non-finite entries");
  if (t == 0.0) return Superoperator::identity(generator.dim());
  Matrix scaled = generator.rep() * Complex(t, 0.0);
  Matrix result = scaled.exp();
  if (!all_finite(result)) throw NumericalError("superop_exp: exponential overflowed");
  return Superoperator(std::move(result));
}

double superop_norm(const Superoperator& a) {
  const int d = a.dim();
  if (d == 0 || a.rep().isZero(0.0)) return 0.0;
  if (d == 1) return std::abs(a.rep()(0, 0));

  // Fixed seed: the direction set is part of the definition of the estimate.
  Rng rng(0x6e6f726d5eedULL);
  constexpr int kDirections = 500;
  constexpr std::size_t kRefined = 6;

  std::vector<std::pair<double, Matrix>> starts;
  starts.reserve(kDirections + 1);
  const Matrix one = identity_element(d);
  starts.emplace_back(element_norm(a(one)), one);
  for (int k = 0; k < kDirections; ++k) {
    Matrix u = rng.unitary(d);
    const double value = element_norm(a(u));
    starts.emplace_back(value, std::move(u));
  }
  std::partial_sort(starts.begin(), starts.begin() + kRefined, starts.end(),
                    [](const auto& x, const auto& y) { return x.first > y.first; });
  double best = starts.front().first;
  for (std::size_t k = 0; k < kRefined; ++k)
    best = std::max(best, refine_norm(a, starts[k].second));
  return best;
}

Matrix choi_matrix(const Superoperator& a) {
  const int d = a.dim();
  Matrix c(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) c.block(i * d, j * d, d, d) = a(matrix_unit(d, i, j));
  return c;
}

PsdCheck check_psd(const Matrix& m, double tol) {
  PsdCheck out;
  if (m.size() == 0) {
    out.positive = true;
    return out;
  }
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  if (eig.info() != Eigen::Success) throw NumericalError("check_psd: eigensolver failed");
  const auto& values = eig.eigenvalues();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  out.min_eigenvalue = values(0);
  out.threshold = tol * scale;
  out.positive = out.min_eigenvalue >= -out.threshold;
  out.min_eigenvector = eig.eigenvectors().col(0);
  return out;
}

PsdCheck check_complete_positivity(const Superoperator& a, double tol) {
  return check_psd(choi_matrix(a), tol);
}

bool is_completely_positive(const Superoperator& a, double tol) {
  return check_complete_positivity(a, tol).positive;
}

}  // namespace unitlab
