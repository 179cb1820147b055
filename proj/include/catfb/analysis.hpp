// Copyright 2026 The catfb Authors
// SPDX-License-Identifier: Apache-2.0
//
// Observables and diagnostics: Wigner functions (displaced-parity
// convention), coherence witnesses against coherent-superposition and
// mixture references, and stationary-state checks.
//
// Wigner convention, pinned project-wide: W(beta) = (2/pi) tr[rho D(beta) P
// D(-beta)] with beta = x + i p and no sqrt(2) axis scaling, so that
// W(0,0) = (2/pi) <P> exactly — vacuum sits at +2/pi, an odd two-component
// superposition at -2/pi.

#ifndef CATFB_ANALYSIS_HPP
#define CATFB_ANALYSIS_HPP

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "catfb/errors.hpp"
#include "catfb/fock.hpp"

namespace catfb {

// Rectangular phase-space grid request, x = Re beta, p = Im beta.
struct WignerGridSpec {
  double x_min = -4.0;
  double x_max = 4.0;
  int nx = 81;
  double p_min = -4.0;
  double p_max = 4.0;
  int np = 81;

  void validate() const {
    if (!(x_max > x_min) || !(p_max > p_min))
      throw config_error("wigner grid: max must exceed min on both axes");
    if (nx < 2 || np < 2) throw config_error("wigner grid: need at least 2 points per axis");
  }
  double dx() const { return (x_max - x_min) / (nx - 1); }
  double dp() const { return (p_max - p_min) / (np - 1); }
};

// Evaluated Wigner function: values(i, j) = W(x_axis[i], p_axis[j]).
struct WignerGrid {
  Eigen::VectorXd x_axis;
  Eigen::VectorXd p_axis;
  Eigen::MatrixXd values;

  // Trapezoid-free Riemann sum; adequate because the integrand decays to
  // ~0 well inside the default grid.
  double integral() const {
    if (x_axis.size() < 2 || p_axis.size() < 2) return 0.0;
    const double dx = x_axis(1) - x_axis(0);
    const double dp = p_axis(1) - p_axis(0);
    return values.sum() * dx * dp;
  }
};

// Displacement operator D(beta) = exp(beta a^dag - conj(beta) a) on the
// truncated space: the exact unitary exponential of the truncated
// generator, computed by diagonalizing the Hermitian matrix
// G = -i (beta a^dag - conj(beta) a) and exponentiating its spectrum.
inline Matrix displacement_operator(Complex beta, const TruncationConfig& trunc) {
  trunc.validate();
  const int d = trunc.dim();
  Matrix g = Matrix::Zero(d, d);
  const Complex minus_i(0.0, -1.0);
  for (int n = 1; n < d; ++n) {
    const double r = std::sqrt(static_cast<double>(n));
    g(n, n - 1) = minus_i * beta * r;             // -i beta a^dag
    g(n - 1, n) = std::conj(g(n, n - 1));         // +i conj(beta) a
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("displacement_operator: eigensolver failed");
  const int m = static_cast<int>(es.eigenvalues().size());
  Vector phase(m);
  for (int k = 0; k < m; ++k) phase(k) = std::exp(Complex(0.0, es.eigenvalues()(k)));
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

// Grid evaluator with per-point displaced-parity kernels
// M(beta) = D(beta) P D(beta)^dag cached at construction, so repeated
// snapshots on the same grid cost only one Frobenius inner product per
// point. Memory: nx*np Hermitian d x d matrices (~114 MB for the default
// 81 x 81 grid at n_max = 32).
class WignerEvaluator {
 public:
  WignerEvaluator(const WignerGridSpec& spec, const TruncationConfig& trunc)
      : spec_(spec), dim_(trunc.dim()) {
    spec.validate();
    trunc.validate();
    // Displacements with |beta|^2 beyond n_max park the displaced origin on
    // the truncation edge and the kernel degrades; values that far out are
    // only trustworthy for states with no support there. The default +-4
    // window at n_max = 32 sits exactly on this boundary (corner
    // |beta|^2 = 32), hence the small slack.
    const double r2_max =
        std::max(spec.x_min * spec.x_min, spec.x_max * spec.x_max) +
        std::max(spec.p_min * spec.p_min, spec.p_max * spec.p_max);
    if (r2_max > static_cast<double>(trunc.n_max) + 1e-9) {
      std::ostringstream msg;
      msg << "wigner grid reaches |beta|^2 = " << r2_max
          << " beyond the reliable region n_max = " << trunc.n_max
          << "; enlarge n_max or shrink the grid";
      throw truncation_error(msg.str());
    }
    x_axis_.setLinSpaced(spec.nx, spec.x_min, spec.x_max);
    p_axis_.setLinSpaced(spec.np, spec.p_min, spec.p_max);
    const Matrix parity = parity_operator(trunc);
    kernels_.reserve(static_cast<std::size_t>(spec.nx) * spec.np);
    for (int i = 0; i < spec.nx; ++i)
      for (int j = 0; j < spec.np; ++j) {
        const Matrix disp = displacement_operator(Complex(x_axis_(i), p_axis_(j)), trunc);
        kernels_.push_back(disp * parity * disp.adjoint());
      }
  }

  const Eigen::VectorXd& x_axis() const { return x_axis_; }
  const Eigen::VectorXd& p_axis() const { return p_axis_; }
  const WignerGridSpec& spec() const { return spec_; }

  WignerGrid evaluate(const FieldState& rho) const {
    if (rho.dim() != dim_)
      throw std::invalid_argument("WignerEvaluator: state dimension mismatch");
    WignerGrid grid;
    grid.x_axis = x_axis_;
    grid.p_axis = p_axis_;
    grid.values.resize(spec_.nx, spec_.np);
    const double scale = 2.0 / M_PI;
    std::size_t idx = 0;
    for (int i = 0; i < spec_.nx; ++i)
      for (int j = 0; j < spec_.np; ++j, ++idx) {
        // tr[rho M] with both factors Hermitian is real; the imaginary
        // residue is pure rounding and is checked before being dropped.
        const Complex tr = (rho.matrix() * kernels_[idx]).trace();
        if (std::abs(tr.imag()) > 1e-10)
          throw tolerance_error("wigner: imaginary residue above 1e-10");
        grid.values(i, j) = scale * tr.real();
      }
    return grid;
  }

 private:
  WignerGridSpec spec_;
  int dim_;
  Eigen::VectorXd x_axis_;
  Eigen::VectorXd p_axis_;
  std::vector<Matrix> kernels_;
};

// One-shot evaluation; prefer a long-lived WignerEvaluator for repeated
// snapshots on the same grid.
inline WignerGrid wigner(const FieldState& rho, const WignerGridSpec& spec,
                         const TruncationConfig& trunc) {
  return WignerEvaluator(spec, trunc).evaluate(rho);
}

// W(0, 0) without building a grid: (2/pi) <P> exactly, by the displaced-
// parity definition with D(0) = identity.
inline double wigner_origin(const FieldState& rho) {
  return (2.0 / M_PI) * rho.parity_expectation();
}

// Frobenius norm of the off-diagonal part in the number basis; vanishes
// exactly on number-diagonal (rotationally invariant) states.
inline double offdiag_frobenius(const FieldState& rho) {
  double s = 0.0;
  for (int n = 0; n < rho.dim(); ++n)
    for (int m = 0; m < rho.dim(); ++m)
      if (n != m) s += std::norm(rho.matrix()(n, m));
  return std::sqrt(s);
}

// Population mass on the two lowest number levels.
inline double fock01_mass(const FieldState& rho) {
  double s = rho.matrix()(0, 0).real();
  if (rho.dim() > 1) s += rho.matrix()(1, 1).real();
  return s;
}

// Coherence witness bundle against a reference amplitude. The caller picks
// alpha_ref: the bare preparation amplitude for feedback-protected runs
// (the protocol restores it), or the attenuated alpha e^{-gamma t/2} for
// free decay.
struct CoherenceMetrics {
  double wigner_origin = 0.0;   // (2/pi) <P>
  double parity_expect = 0.0;   // <P>
  double mean_photon = 0.0;     // <n>
  double mixture_fidelity = 0.0;  // vs (|a><a| + |-a><-a|)/2 at a = alpha_ref
  double cat_fidelity = 0.0;      // vs the ideal two-component superposition
};

inline CoherenceMetrics coherence_metrics(const FieldState& rho, Complex alpha_ref,
                                          int cat_sign = -1) {
  CoherenceMetrics out;
  out.parity_expect = rho.parity_expectation();
  out.wigner_origin = (2.0 / M_PI) * out.parity_expect;
  out.mean_photon = rho.mean_photon();
  const TruncationConfig trunc{rho.dim() - 1, 0, 1e-9};
  const FieldState plus = coherent_state(alpha_ref, trunc);
  const FieldState minus = coherent_state(-alpha_ref, trunc);
  out.mixture_fidelity =
      fidelity(rho, FieldState(0.5 * (plus.matrix() + minus.matrix())));
  out.cat_fidelity = fidelity(rho, cat_state(alpha_ref, cat_sign, trunc));
  return out;
}

// Late-time diagnostics of an evolution history: how close the final state
// is to a number-diagonal mixture confined to Fock {0, 1}.
struct StationaryReport {
  double offdiag_norm = 0.0;
  double support_01_mass = 0.0;
};

inline StationaryReport stationary_check(const std::vector<FieldState>& history) {
  if (history.empty()) throw std::invalid_argument("stationary_check: empty history");
  const FieldState& last = history.back();
  return StationaryReport{offdiag_frobenius(last), fock01_mass(last)};
}

}  // namespace catfb

#endif  // CATFB_ANALYSIS_HPP
