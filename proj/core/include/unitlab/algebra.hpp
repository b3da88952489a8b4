#pragma once

// Finite-dimensional carrier for B = M_d(C) and for linear maps B -> B.
//
// Vectorization convention (used everywhere in the library): column stacking,
//   vec(b)[i + j*d] = b(i, j),
// so that vec(a b c) = (c^T (x) a) vec(b). A Superoperator stores the
// d^2 x d^2 matrix of the map in this basis.

#include <complex>
#include <cstddef>
#include <functional>

#include <Eigen/Dense>

#include "unitlab/error.hpp"

namespace unitlab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

Matrix identity_element(int dim);
Matrix matrix_unit(int dim, int row, int col);
Vector vec(const Matrix& b);
Matrix unvec(const Vector& v, int dim);

/// Spectral (operator) norm of an algebra element.
double element_norm(const Matrix& b);
bool all_finite(const Matrix& m);

class Superoperator {
 public:
  Superoperator() = default;

  /// Wraps a d^2 x d^2 representation. Throws DimensionError if the matrix is
  /// not square of perfect-square size.
  explicit Superoperator(Matrix rep);

  static Superoperator identity(int dim);
  static Superoperator zero(int dim);
  /// b -> a b
  static Superoperator left(const Matrix& a);
  /// b -> b a
  static Superoperator right(const Matrix& a);
  /// b -> a b c
  static Superoperator sandwich(const Matrix& a, const Matrix& c);
  /// Tabulates an arbitrary linear map on the matrix-unit basis.
  static Superoperator from_map(int dim,
                                const std::function<Matrix(const Matrix&)>& map);

  int dim() const { return dim_; }
  const Matrix& rep() const { return rep_; }

  Matrix operator()(const Matrix& b) const;

  /// The map b -> (A(b*))*, written * o A o * in the literature.
  Superoperator star_conjugate() const;

  Superoperator& operator+=(const Superoperator& other);
  Superoperator& operator-=(const Superoperator& other);
  Superoperator& operator*=(Complex scalar);

  friend Superoperator operator+(Superoperator a, const Superoperator& b) { return a += b; }
  friend Superoperator operator-(Superoperator a, const Superoperator& b) { return a -= b; }
  friend Superoperator operator*(Complex s, Superoperator a) { return a *= s; }
  friend Superoperator operator*(Superoperator a, Complex s) { return a *= s; }

  /// Largest absolute entry difference of the representations.
  double max_abs_diff(const Superoperator& other) const;

 private:
  int dim_ = 0;
  Matrix rep_;
};

/// (A o B)(b) = A(B(b)).
Superoperator compose(const Superoperator& a, const Superoperator& b);

enum class TimeDirection { forward_only, allow_backward };

/// e^{tG}. Negative t is a diagnostic-only use and must be requested with
/// TimeDirection::allow_backward.
Superoperator superop_exp(const Superoperator& generator, double t,
                          TimeDirection direction = TimeDirection::forward_only);

/// Operator norm sup ||A(b)|| / ||b|| with B carrying the spectral norm.
/// This is the plain bounded-map norm, not the cb-norm. The supremum is
/// attained on unitaries; we start from 500 deterministic pseudo-random
/// unitaries and refine the best ones by alternating ascent, so the value is
/// a lower estimate that is sharp on all maps we test against.
double superop_norm(const Superoperator& a);

/// Choi matrix C = sum_ij e_ij (x) A(e_ij); C((i,k),(j,l)) = A(e_ij)(k,l).
Matrix choi_matrix(const Superoperator& a);

constexpr double kPsdTolerance = 1e-10;

struct PsdCheck {
  bool positive = false;
  double min_eigenvalue = 0.0;
  double threshold = 0.0;  // verdict uses min_eigenvalue >= -threshold
  Vector min_eigenvector;
};

/// Hermitian PSD test with threshold tol * max(1, ||m||).
PsdCheck check_psd(const Matrix& m, double tol = kPsdTolerance);

PsdCheck check_complete_positivity(const Superoperator& a, double tol = kPsdTolerance);
bool is_completely_positive(const Superoperator& a, double tol = kPsdTolerance);

}  // namespace unitlab
