// Copyright 2026 The catfb Authors
// SPDX-License-Identifier: Apache-2.0
//
// Truncated Fock-space primitives for a single bosonic cavity mode: state
// construction (Fock, coherent, two-component cat), ladder/parity operators,
// and the distance/fidelity measures used throughout the project.
//
// Conventions, pinned here and relied on everywhere else:
//   * Density matrices are (n_max+1) x (n_max+1) complex, indexed by photon
//     number n = 0..n_max.
//   * Pure constructors return exactly normalized states *within* the
//     truncated space (the retained coefficient vector is renormalized).
//   * fidelity() is the squared Uhlmann fidelity  (tr sqrt(sqrt(a) b
//     sqrt(a)))^2, which reduces to |<psi|phi>|^2 for pure states.
//   * trace_distance() is (1/2) * trace norm of the difference.

#ifndef CATFB_FOCK_HPP
#define CATFB_FOCK_HPP

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "catfb/errors.hpp"

namespace catfb {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Photon-number truncation and the tolerances that police it.
struct TruncationConfig {
  int n_max = 32;           // highest retained Fock level
  int k_max = 32;           // cap on the number of loss events per channel
  double tail_tol = 1e-12;  // largest neglectable probability mass

  int dim() const { return n_max + 1; }

  void validate() const {
    if (n_max < 1) throw std::invalid_argument("TruncationConfig: n_max must be >= 1");
    if (k_max < 0 || k_max > n_max)
      throw std::invalid_argument("TruncationConfig: k_max must be in [0, n_max]");
    if (!(tail_tol > 0.0) || tail_tol > 1.0)
      throw std::invalid_argument("TruncationConfig: tail_tol must be in (0, 1]");
  }
};

// ln(n!) with a cached table for the small arguments that dominate channel
// construction; falls through to lgamma above the table.
inline double log_factorial(int n) {
  if (n < 0) throw std::invalid_argument("log_factorial: negative argument");
  static const std::vector<double> table = [] {
    std::vector<double> t(512);
    for (int i = 0; i < static_cast<int>(t.size()); ++i) t[i] = std::lgamma(static_cast<double>(i) + 1.0);
    return t;
  }();
  if (n < static_cast<int>(table.size())) return table[n];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

// Returns M projected onto its Hermitian part, (M + M^dagger)/2.
inline Matrix hermitized(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

// A cavity state as a truncated density matrix. The wrapper is intentionally
// thin: it stores the matrix verbatim and offers cheap diagnostics. Use
// from_density() when ingesting untrusted matrices.
class FieldState {
 public:
  FieldState() = default;

  explicit FieldState(Matrix rho) : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols() || rho_.rows() < 1)
      throw std::invalid_argument("FieldState: density matrix must be square and non-empty");
  }

  // Ingests an untrusted matrix: checks hermiticity, hermitizes, and
  // normalizes the trace to one. Throws on non-square input, a hermiticity
  // defect above `herm_tol`, or a non-positive trace.
  static FieldState from_density(const Matrix& rho, double herm_tol = 1e-9) {
    FieldState s(rho);
    if (s.hermiticity_error() > herm_tol)
      throw std::invalid_argument("FieldState::from_density: matrix is not Hermitian");
    double tr = s.trace_real();
    if (!(tr > 0.0))
      throw std::invalid_argument("FieldState::from_density: trace must be positive");
    s.rho_ = hermitized(s.rho_) / tr;
    return s;
  }

  int dim() const { return static_cast<int>(rho_.rows()); }
  const Matrix& matrix() const { return rho_; }
  Matrix& matrix() { return rho_; }

  double trace_real() const { return rho_.trace().real(); }

  double mean_photon() const {
    double s = 0.0;
    for (int n = 0; n < dim(); ++n) s += n * rho_(n, n).real();
    return s;
  }

  // Expectation of the photon-number parity (-1)^n.
  double parity_expectation() const {
    double s = 0.0;
    for (int n = 0; n < dim(); ++n) s += ((n & 1) ? -1.0 : 1.0) * rho_(n, n).real();
    return s;
  }

  double purity() const { return (rho_ * rho_).trace().real(); }

  double hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitized(rho_), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  FieldState normalized() const {
    double tr = trace_real();
    if (!(std::abs(tr) > 0.0))
      throw std::invalid_argument("FieldState::normalized: zero trace");
    return FieldState(rho_ / tr);
  }

 private:
  Matrix rho_;
};

namespace detail {

// Probability mass of a Poisson(|alpha|^2) distribution above n_max, i.e.
// the coherent-state weight the truncation discards. Forward log-space sum;
// terms decay superexponentially once n exceeds |alpha|^2.
inline double coherent_tail_mass(Complex alpha, int n_max) {
  const double aa = std::norm(alpha);
  if (aa == 0.0) return 0.0;
  const double log_aa = std::log(aa);
  double tail = 0.0;
  for (int n = n_max + 1; n <= n_max + 512; ++n) {
    double log_term = -aa + n * log_aa - log_factorial(n);
    double term = std::exp(log_term);
    tail += term;
    if (term < 1e-30 && n > aa) break;
  }
  return tail;
}

// Shared truncation guard for coherent-superposition constructors: the
// amplitude must sit well inside the cutoff (|alpha|^2 <= n_max/4) and the
// discarded Poisson mass must stay below tail_tol.
inline void check_coherent_truncation(Complex alpha, const TruncationConfig& trunc) {
  trunc.validate();
  const double aa = std::norm(alpha);
  if (aa > trunc.n_max / 4.0) {
    std::ostringstream msg;
    msg << "coherent amplitude |alpha|^2 = " << aa << " exceeds n_max/4 = "
        << trunc.n_max / 4.0 << "; raise n_max";
    throw truncation_error(msg.str());
  }
  const double tail = coherent_tail_mass(alpha, trunc.n_max);
  if (tail >= trunc.tail_tol) {
    std::ostringstream msg;
    msg << "coherent-state mass " << tail << " beyond n_max = " << trunc.n_max
        << " exceeds tail_tol = " << trunc.tail_tol;
    throw truncation_error(msg.str());
  }
}

}  // namespace detail

// Coefficients <n|alpha> of a coherent state, truncated at n_max, without
// renormalization or truncation checks (callers that expose states apply
// detail::check_coherent_truncation first).
inline Vector coherent_amplitudes(Complex alpha, int n_max) {
  if (n_max < 0) throw std::invalid_argument("coherent_amplitudes: n_max must be >= 0");
  Vector c(n_max + 1);
  const double aa = std::norm(alpha);
  // <n|alpha> = e^{-|a|^2/2} a^n / sqrt(n!), built by the stable recurrence
  // c_{n} = c_{n-1} * a / sqrt(n).
  c(0) = std::exp(-0.5 * aa);
  for (int n = 1; n <= n_max; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

inline FieldState vacuum_state(const TruncationConfig& trunc) {
  trunc.validate();
  Matrix rho = Matrix::Zero(trunc.dim(), trunc.dim());
  rho(0, 0) = 1.0;
  return FieldState(std::move(rho));
}

inline FieldState fock_state(int n, const TruncationConfig& trunc) {
  trunc.validate();
  if (n < 0 || n > trunc.n_max)
    throw std::invalid_argument("fock_state: level outside [0, n_max]");
  Matrix rho = Matrix::Zero(trunc.dim(), trunc.dim());
  rho(n, n) = 1.0;
  return FieldState(std::move(rho));
}

inline FieldState coherent_state(Complex alpha, const TruncationConfig& trunc) {
  detail::check_coherent_truncation(alpha, trunc);
  Vector c = coherent_amplitudes(alpha, trunc.n_max);
  c /= c.norm();  // exact normalization within the truncated space
  return FieldState(c * c.adjoint());
}

// Two-component cat N(|alpha> + sign|-alpha>), sign in {+1, -1}. The minus
// (odd) cat has support only on odd Fock levels, the plus (even) cat only on
// even levels.
inline FieldState cat_state(Complex alpha, int sign, const TruncationConfig& trunc) {
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("cat_state: sign must be +1 or -1");
  detail::check_coherent_truncation(alpha, trunc);
  Vector c = coherent_amplitudes(alpha, trunc.n_max);
  Vector d = coherent_amplitudes(-alpha, trunc.n_max);
  Vector v = c + static_cast<double>(sign) * d;
  double nrm = v.norm();
  if (!(nrm > 0.0))
    throw std::invalid_argument("cat_state: zero superposition (alpha == 0 with sign -1)");
  v /= nrm;
  return FieldState(v * v.adjoint());
}

struct LadderOperators {
  Matrix annihilation;  // a, with a|n> = sqrt(n)|n-1>
  Matrix creation;      // a^dagger restricted to the truncated space
  Matrix number;        // a^dagger a = diag(0..n_max)
};

inline LadderOperators ladder_operators(const TruncationConfig& trunc) {
  trunc.validate();
  const int d = trunc.dim();
  LadderOperators ops;
  ops.annihilation = Matrix::Zero(d, d);
  for (int n = 1; n < d; ++n) ops.annihilation(n - 1, n) = std::sqrt(static_cast<double>(n));
  ops.creation = ops.annihilation.adjoint();
  ops.number = Matrix::Zero(d, d);
  for (int n = 0; n < d; ++n) ops.number(n, n) = static_cast<double>(n);
  return ops;
}

// Photon-number parity operator diag((-1)^n).
inline Matrix parity_operator(const TruncationConfig& trunc) {
  trunc.validate();
  const int d = trunc.dim();
  Matrix p = Matrix::Zero(d, d);
  for (int n = 0; n < d; ++n) p(n, n) = (n & 1) ? -1.0 : 1.0;
  return p;
}

namespace detail {

// Principal square root of a positive-semidefinite Hermitian matrix;
// eigenvalues below zero (numerical noise) are clamped.
inline Matrix sqrt_psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitized(m));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sqrt_psd: eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

// Trace norm (sum of singular values); for the Hermitian inputs used here
// this is the sum of absolute eigenvalues of the hermitized matrix.
inline double trace_norm(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitized(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

// Squared Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2. Inputs are used
// as-is (no renormalization); callers pass unit-trace states.
inline double fidelity(const FieldState& a, const FieldState& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("fidelity: dimension mismatch");
  Matrix sa = detail::sqrt_psd(a.matrix());
  Matrix inner = sa * b.matrix() * sa;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitized(inner), Eigen::EigenvaluesOnly);
  double root_sum = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return root_sum * root_sum;
}

// Trace distance (1/2)||a - b||_1.
inline double trace_distance(const FieldState& a, const FieldState& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("trace_distance: dimension mismatch");
  return 0.5 * trace_norm(a.matrix() - b.matrix());
}

}  // namespace catfb

#endif  // CATFB_FOCK_HPP
