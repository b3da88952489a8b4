#pragma once

// Reference computations that share no code path with the library
// implementations they check.

#include <cmath>
#include <functional>
#include <vector>

#include "unitlab/algebra.hpp"
#include "unitlab/kernels.hpp"
#include "unitlab/rng.hpp"

namespace oracle {

using unitlab::Complex;
using unitlab::Matrix;

/// sum_{k < terms} (tG)^k / k!
inline Matrix taylor_exp(const Matrix& g, double t, int terms = 20) {
  Matrix sum = Matrix::Identity(g.rows(), g.cols());
  Matrix term = sum;
  for (int k = 1; k < terms; ++k) {
    term = term * g * (t / k);
    sum += term;
  }
  return sum;
}

/// Scaling and squaring on top of the Taylor series, for larger ||tG||.
inline Matrix squared_taylor_exp(const Matrix& g, double t) {
  const double norm = g.cwiseAbs().rowwise().sum().maxCoeff() * std::abs(t);
  int s = 0;
  while (norm / std::pow(2.0, s) > 0.25) ++s;
  Matrix e = taylor_exp(g, t / std::pow(2.0, s), 30);
  for (int i = 0; i < s; ++i) e = e * e;
  return e;
}

inline double spectral_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// max ||A(b)|| / ||b|| over random directions, applied through a callback.
inline double sampled_map_norm(const std::function<Matrix(const Matrix&)>& map, int d, int samples,
                               unitlab::Rng& rng) {
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    Matrix b = (i % 2 == 0) ? rng.unitary(d) : rng.gaussian_matrix(d, d);
    best = std::max(best, spectral_norm(map(b)) / spectral_norm(b));
  }
  return best;
}

/// Central Richardson derivative of a matrix-valued function at x.
inline Matrix derivative(const std::function<Matrix(double)>& f, double x, double h) {
  const Matrix d1 = (f(x + h) - f(x - h)) / (2 * h);
  const Matrix d2 = (f(x + h / 2) - f(x - h / 2)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

/// One-sided Richardson derivative at 0 for maps only defined on t >= 0.
inline Matrix forward_derivative(const std::function<Matrix(double)>& f, double h) {
  const Matrix f0 = f(0.0);
  const Matrix a = (f(h) - f0) / h;
  const Matrix b = (f(h / 2) - f0) / (h / 2);
  const Matrix c = (f(h / 4) - f0) / (h / 4);
  const Matrix r1 = 2.0 * b - a;
  const Matrix r2 = 2.0 * c - b;
  return (4.0 * r2 - r1) / 3.0;
}

/// Conditionally CPD by construction:
///   Q^{s,t}(b) = sum_r eta_{s,r}^* b eta_{t,r} + beta_s^* b + b beta_t.
struct CeData {
  std::vector<std::vector<Matrix>> eta;  // eta[s][r]
  std::vector<Matrix> beta;
};

inline CeData random_ce_data(int d, std::size_t labels, std::size_t rank, double scale,
                             unitlab::Rng& rng) {
  CeData data;
  for (std::size_t s = 0; s < labels; ++s) {
    std::vector<Matrix> e;
    for (std::size_t r = 0; r < rank; ++r) e.push_back(rng.gaussian_matrix(d, d, scale));
    data.eta.push_back(e);
    data.beta.push_back(rng.gaussian_matrix(d, d, scale));
  }
  return data;
}

/// Q^{s,t}(b) evaluated directly.
inline Matrix ce_apply(const CeData& data, std::size_t s, std::size_t t, const Matrix& b) {
  Matrix out = data.beta[s].adjoint() * b + b * data.beta[t];
  for (std::size_t r = 0; r < data.eta[s].size(); ++r)
    out += data.eta[s][r].adjoint() * b * data.eta[t][r];
  return out;
}

inline std::vector<std::string> names(std::size_t n, const std::string& stem = "x") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(stem + std::to_string(i + 1));
  return out;
}

inline unitlab::OperatorKernel ce_kernel(const CeData& data, const std::vector<std::string>& labels) {
  const int d = static_cast<int>(data.beta.front().rows());
  unitlab::OperatorKernel q(d, labels);
  for (std::size_t s = 0; s < labels.size(); ++s)
    for (std::size_t t = 0; t < labels.size(); ++t)
      q.set(s, t, unitlab::Superoperator::from_map(d, [&](const Matrix& b) { return ce_apply(data, s, t, b); }));
  return q;
}

/// Smallest eigenvalue (hermitian part) of sum_ij b_i^* K^{s_i,s_j}(a_i^* a_j) b_j,
/// computed by applying the kernel entries to matrices.
inline double form_min_eigenvalue(const unitlab::OperatorKernel& k, const std::vector<Matrix>& a,
                                  const std::vector<Matrix>& b, const std::vector<std::size_t>& s) {
  Matrix sum = Matrix::Zero(k.dim(), k.dim());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      sum += b[i].adjoint() * k.at(s[i], s[j])(a[i].adjoint() * a[j]) * b[j];
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sum + sum.adjoint()));
  return eig.eigenvalues()(0);
}

}  // namespace oracle
