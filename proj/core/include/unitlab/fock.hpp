#pragma once

// Exponential vectors psi(f) in the symmetric Fock space over
// L^2([0, t], C^k) for step functions f, with exact inner products
//   <pref1 psi(f), pref2 psi(g)> = conj(pref1) pref2 exp(int <f(s), g(s)> ds).
// No truncation: every quantity is the exponential of an exact integral.

#include <cstddef>
#include <vector>

#include "unitlab/algebra.hpp"
#include "unitlab/kernels.hpp"
#include "unitlab/partition.hpp"
#include "unitlab/trotter.hpp"

namespace unitlab {

class StepFunction {
 public:
  /// The function on the empty interval [0, 0].
  explicit StepFunction(int multiplicity = 1);
  /// breakpoints 0 = s_0 < ... < s_m; values[j] lives on [s_j, s_{j+1}).
  StepFunction(std::vector<double> breakpoints, std::vector<Vector> values);

  static StepFunction constant(const Vector& value, double length);

  int multiplicity() const { return multiplicity_; }
  double length() const { return breakpoints_.back(); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<Vector>& values() const { return values_; }

  /// Embeds C^k into C^k' (k' >= k) as the first k coordinates.
  StepFunction embedded(int multiplicity) const;

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  int multiplicity_;
  std::vector<double> breakpoints_;
  std::vector<Vector> values_;
};

/// f on [0, |f|) followed by g shifted to [|f|, |f| + |g|).
StepFunction concat(const StepFunction& f, const StepFunction& g);

/// int <f(s), g(s)> ds over merged breakpoints; conjugate-linear in f.
Complex integrate_inner(const StepFunction& f, const StepFunction& g);

struct ExponentialVector {
  Complex prefactor = 1.0;
  StepFunction argument;
};

ExponentialVector concat(const ExponentialVector& a, const ExponentialVector& b);

/// Throws DimensionError on multiplicity mismatch and DomainError on length mismatch.
Complex fock_inner(const ExponentialVector& phi, const ExponentialVector& psi);

/// Gram matrix G(i, j) = <v_i, v_j>.
Matrix gram_matrix(const std::vector<ExponentialVector>& vectors);

/// Unit t -> e^{t alpha} psi(c 1_[0,t]) of the Fock product system.
struct FockUnit {
  Complex alpha = 0.0;
  Vector c;

  static FockUnit scalar(Complex alpha, Complex c);
  ExponentialVector at(double t) const;
};

/// <u_t, u'_t> = e^{t(conj(alpha) + alpha' + <c, c'>)}: the semigroup entry of
/// the generator with Q^{u,u'} = conj(alpha) + alpha' + <c, c'>.
Complex fock_unit_pairing(const FockUnit& u, const FockUnit& v, double t);

/// Units realizing a d = 1 generator, Q(s, s') = conj(alpha_s) + alpha_s' + <c_s, c_s'>,
/// with the first label as the vacuum direction (c = 0). Throws DomainError
/// when Q is not conditionally positive definite or needs multiplicity > 4.
std::vector<FockUnit> fock_realization(const OperatorKernel& generator, double tol = 1e-10);

/// Each part of length p becomes u on [s, s + kappa p) then v on the rest
/// of the slot, scaled to total (kappa + lambda) p; the prefactor accumulates
/// e^{kappa p alpha + lambda p alpha'} per slot.
ExponentialVector trotter_vector(const FockUnit& u, const FockUnit& v, const Partition& slots,
                                 double kappa = 0.5, double lambda = 0.5);
ExponentialVector trotter_vector(const FockUnit& u, const FockUnit& v, double t, std::size_t n,
                                 double kappa = 0.5, double lambda = 0.5);

struct CounterexampleRow {
  std::size_t n = 0;
  Complex y_norm2;   // <y, y>
  Complex w_y;       // <w, y>
  Complex w_w;       // <w, w>
  double norm_defect = 0.0;  // ||y - w||^2
  Complex zeta_y;    // <zeta, y>
  Complex zeta_zeta;
};

struct CounterexampleResult {
  double horizon = 0.0;
  std::vector<CounterexampleRow> rows;
  ConvergenceReport vs_w;     // in E = Gamma(L^2([0,t], C))
  ConvergenceReport vs_zeta;  // in F = Gamma(L^2([0,t], C + C)), E as the first summand
  int embedding_multiplicity = 2;
  FockUnit zeta;
};

/// The alternating vacuum / indicator pair u_t = psi(0), v_t = psi(1), its
/// Trotter products y, the candidate w = psi(1/2 1) and the candidate
/// zeta = psi((1/2, 1/2) 1) of the enlarged space.
CounterexampleResult counterexample_scenario(double t, const Schedule& schedule);

}  // namespace unitlab
