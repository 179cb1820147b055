// Copyright 2026 The catfb Authors
// SPDX-License-Identifier: Apache-2.0
//
// Adiabatic rapid passage for the feedback photon release. The feedback atom
// crosses the cavity while its transition is swept linearly through
// resonance; within one photon manifold the dynamics reduce to a two-level
// problem on {|e,n>, |g,n+1>}:
//
//   H_n(t) = [[ delta(t) n,          Omega sqrt(n+1) ],
//             [ Omega sqrt(n+1),     delta(t) (n+1)  ]],   delta(t) = delta0 t / t_s.
//
// This module provides the instantaneous eigensystem, the closed-form
// accumulated phase of the upper branch, and a fixed-step integrator (with a
// step-doubling convergence driver) that verifies the transfer
// |e,n> -> |g,n+1> numerically. These routines justify the idealized photon
// injection used by the cycle maps; they are not composed into them.

#ifndef CATFB_ADIABATIC_HPP
#define CATFB_ADIABATIC_HPP

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "catfb/errors.hpp"

namespace catfb {

struct SweepParams {
  double omega = 0.0;   // Rabi coupling Omega, rad/s
  double delta0 = 0.0;  // sweep amplitude: detuning runs -delta0 -> +delta0, rad/s
  double t_s = 0.0;     // half-sweep duration, s (sweep window is [-t_s, t_s])
  int n = 0;            // photon number of the manifold

  void validate() const {
    if (!(delta0 > 0.0)) throw std::invalid_argument("SweepParams: delta0 must be > 0");
    if (!(t_s > 0.0)) throw std::invalid_argument("SweepParams: t_s must be > 0");
    if (omega < 0.0) throw std::invalid_argument("SweepParams: omega must be >= 0");
    if (n < 0) throw std::invalid_argument("SweepParams: n must be >= 0");
  }

  double detuning(double t) const { return delta0 * t / t_s; }

  // Off-diagonal coupling within the manifold, Omega sqrt(n+1).
  double coupling() const { return omega * std::sqrt(static_cast<double>(n) + 1.0); }
};

struct AdiabaticEigenvalues {
  double plus = 0.0;
  double minus = 0.0;
};

// Instantaneous branch energies
//   E_+/-(t) = delta(t)(n + 1/2) +/- sqrt(delta(t)^2/4 + Omega^2 (n+1)).
inline AdiabaticEigenvalues adiabatic_eigenvalues(const SweepParams& sp, double t) {
  sp.validate();
  if (std::abs(t) > sp.t_s * (1.0 + 1e-12))
    throw std::invalid_argument("adiabatic_eigenvalues: t outside sweep window");
  const double delta = sp.detuning(t);
  const double b = sp.coupling();
  const double root = std::sqrt(0.25 * delta * delta + b * b);
  const double base = delta * (sp.n + 0.5);
  return {base + root, base - root};
}

// Normalized upper-branch eigenstate as coefficients on {|e,n>, |g,n+1>},
// with the |g,n+1> component chosen real and non-negative. The ratio
// vg/ve = delta/2 + sqrt(delta^2/4 + b^2) is evaluated in the
// cancellation-free form b^2/(sqrt(...) - delta/2) for delta < 0.
inline Eigen::Vector2cd adiabatic_eigenstate_plus(const SweepParams& sp, double t) {
  sp.validate();
  if (std::abs(t) > sp.t_s * (1.0 + 1e-12))
    throw std::invalid_argument("adiabatic_eigenstate_plus: t outside sweep window");
  const double delta = sp.detuning(t);
  const double b = sp.coupling();
  Eigen::Vector2cd v;
  if (b == 0.0) {
    // Degenerate coupling-free limit: the upper branch is the higher
    // diagonal entry (|g,n+1> for delta >= 0, else |e,n>).
    v << (delta >= 0.0 ? 0.0 : 1.0), (delta >= 0.0 ? 1.0 : 0.0);
    return v;
  }
  const double root = std::sqrt(0.25 * delta * delta + b * b);
  const double vg = (delta >= 0.0) ? 0.5 * delta + root : b * b / (root - 0.5 * delta);
  v << b, vg;
  v /= v.norm();
  return v;
}

// Closed-form accumulated phase of the upper branch over the full sweep,
//   Phi_n = -Int_{-t_s}^{t_s} E_+(t) dt
//         = -(delta0 t_s / 2) [ sqrt(1 + x^2) + x^2 asinh(1/x) ],
// with x = 2 Omega sqrt(n+1) / delta0. The delta(t)(n+1/2) part of E_+ is
// odd in t and integrates to zero. The asinh form is exactly equivalent to
// the half-log form ln((sqrt(1+x^2)+1)/(sqrt(1+x^2)-1)) but remains stable
// as x -> 0, where Phi_n -> -delta0 t_s / 2.
inline double dynamical_phase(const SweepParams& sp) {
  sp.validate();
  const double x = 2.0 * sp.coupling() / sp.delta0;
  double bracket;
  if (x == 0.0) {
    bracket = 1.0;
  } else {
    bracket = std::sqrt(1.0 + x * x) + x * x * std::asinh(1.0 / x);
  }
  return -0.5 * sp.delta0 * sp.t_s * bracket;
}

// Direct numerical quadrature of -Int E_+(t) dt over the sweep window
// (composite Simpson), used as an independent cross-check of
// dynamical_phase.
inline double sweep_phase_quadrature(const SweepParams& sp, long intervals = (1L << 20)) {
  sp.validate();
  if (intervals < 2) throw std::invalid_argument("sweep_phase_quadrature: need >= 2 intervals");
  if (intervals % 2 != 0) ++intervals;
  const double h = 2.0 * sp.t_s / static_cast<double>(intervals);
  auto e_plus = [&sp](double t) {
    const double delta = sp.detuning(t);
    const double b = sp.coupling();
    return delta * (sp.n + 0.5) + std::sqrt(0.25 * delta * delta + b * b);
  };
  double sum = e_plus(-sp.t_s) + e_plus(sp.t_s);
  for (long i = 1; i < intervals; ++i) {
    const double t = -sp.t_s + i * h;
    sum += (i % 2 == 1 ? 4.0 : 2.0) * e_plus(t);
  }
  return -(h / 3.0) * sum;
}

namespace detail {

struct SweepRawResult {
  Eigen::Vector2cd state;
  double norm_drift = 0.0;
};

// Fixed-step RK4 propagation of i d/dt psi = H_tl(t) psi over [-t_s, t_s],
// where H_tl is the traceless part of the manifold Hamiltonian,
//   H_tl(t) = [[-delta(t)/2, b], [b, delta(t)/2]].
// The omitted scalar delta(t)(n+1/2) I commutes with everything and its
// integral over the symmetric window vanishes exactly (delta is odd), so
// the final state equals the full-frame result while avoiding the large
// fast-rotating global phase that would otherwise dominate the step error.
inline SweepRawResult sweep_rk4(const SweepParams& sp, const Eigen::Vector2cd& initial,
                                long steps) {
  sp.validate();
  if (steps < 1) throw std::invalid_argument("sweep_rk4: steps must be >= 1");
  using C = std::complex<double>;
  const double b = sp.coupling();
  const double h = 2.0 * sp.t_s / static_cast<double>(steps);
  const C mi(0.0, -1.0);

  C y0 = initial(0), y1 = initial(1);
  auto deriv = [&](double t, C a0, C a1, C& d0, C& d1) {
    const double hd = 0.5 * sp.detuning(t);
    d0 = mi * (-hd * a0 + b * a1);
    d1 = mi * (b * a0 + hd * a1);
  };

  for (long i = 0; i < steps; ++i) {
    const double t = -sp.t_s + i * h;
    C k10, k11, k20, k21, k30, k31, k40, k41;
    deriv(t, y0, y1, k10, k11);
    deriv(t + 0.5 * h, y0 + 0.5 * h * k10, y1 + 0.5 * h * k11, k20, k21);
    deriv(t + 0.5 * h, y0 + 0.5 * h * k20, y1 + 0.5 * h * k21, k30, k31);
    deriv(t + h, y0 + h * k30, y1 + h * k31, k40, k41);
    y0 += (h / 6.0) * (k10 + 2.0 * k20 + 2.0 * k30 + k40);
    y1 += (h / 6.0) * (k11 + 2.0 * k21 + 2.0 * k31 + k41);
  }

  SweepRawResult out;
  out.state << y0, y1;
  out.norm_drift = std::abs(out.state.norm() - initial.norm());
  return out;
}

}  // namespace detail

// Integrates the manifold Schroedinger equation with `steps` fixed RK4
// steps. Throws tolerance_error when the norm drift exceeds 1e-9 (the step
// count was too coarse for the requested sweep).
inline Eigen::Vector2cd sweep_integrate(const SweepParams& sp, const Eigen::Vector2cd& initial,
                                        long steps) {
  detail::SweepRawResult r = detail::sweep_rk4(sp, initial, steps);
  if (r.norm_drift > 1e-9)
    throw tolerance_error("sweep_integrate: norm drift " + std::to_string(r.norm_drift) +
                          " exceeds 1e-9; increase steps");
  return r.state;
}

struct SweepResult {
  Eigen::Vector2cd final_state;
  long steps = 0;          // step count of the accepted solution
  double norm_drift = 0.0;
  double state_delta = 0.0;  // |psi(steps) - psi(steps/2)| at acceptance
};

// Step-doubling driver: doubles the RK4 step count until both the norm
// drift and the change against the previous refinement fall below tol.
// Throws tolerance_error if max_steps is reached without convergence.
inline SweepResult sweep_integrate_converged(const SweepParams& sp,
                                             const Eigen::Vector2cd& initial,
                                             long initial_steps = (1L << 14),
                                             long max_steps = (1L << 26),
                                             double tol = 1e-9) {
  sp.validate();
  if (initial_steps < 1 || max_steps < initial_steps)
    throw std::invalid_argument("sweep_integrate_converged: bad step bounds");
  detail::SweepRawResult prev = detail::sweep_rk4(sp, initial, initial_steps);
  for (long steps = initial_steps * 2; steps <= max_steps; steps *= 2) {
    detail::SweepRawResult cur = detail::sweep_rk4(sp, initial, steps);
    const double delta = (cur.state - prev.state).norm();
    if (cur.norm_drift < tol && delta < tol) {
      SweepResult out;
      out.final_state = cur.state;
      out.steps = steps;
      out.norm_drift = cur.norm_drift;
      out.state_delta = delta;
      return out;
    }
    prev = cur;
  }
  throw tolerance_error("sweep_integrate_converged: no convergence within step budget");
}

}  // namespace catfb

#endif  // CATFB_ADIABATIC_HPP
