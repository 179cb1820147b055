// Copyright 2026 The catfb Authors
// SPDX-License-Identifier: Apache-2.0
//
// Field-only superoperators for the lossy cavity: the amplitude-damping
// Kraus channel, parity-conditional projections and interference blocks,
// the single-photon injection isometry, the auxiliary-cavity survival
// factor, and the semiclassical phase-diffusion generator.

#ifndef CATFB_CHANNELS_HPP
#define CATFB_CHANNELS_HPP

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "catfb/errors.hpp"
#include "catfb/fock.hpp"

namespace catfb {

// Amplitude-damping channel at fixed exposure gamma_t, stored as the real
// coefficient bands c_k(n) = <n|A_k|n+k> of its jump operators. A_k removes
// exactly k photons, so each operator has a single nonzero diagonal band;
// the channel application exploits that structure instead of dense products.
// Immutable after construction and safe to share across threads.
class KrausSet {
 public:
  // Builds the operators for exposure gamma*t. The number of retained jump
  // operators is the smallest K whose neglected jump mass at the top Fock
  // level stays below trunc.tail_tol, capped by trunc.k_max. Throws
  // truncation_error when the cap makes that tolerance unachievable.
  KrausSet(double gamma, double t, const TruncationConfig& trunc) {
    trunc.validate();
    if (gamma < 0.0 || t < 0.0)
      throw std::invalid_argument("KrausSet: gamma and t must be >= 0");
    gamma_t_ = gamma * t;
    dim_ = trunc.dim();
    const int n_max = trunc.n_max;
    // Loss probability per photon over the exposure; -expm1 keeps small
    // exposures accurate.
    const double p = -std::expm1(-gamma_t_);
    const double log_p = (p > 0.0) ? std::log(p) : 0.0;

    // Weight of exactly j loss events out of n_max photons (the worst row):
    // binomial(n_max, p). Evaluated in log space, then suffix-summed to find
    // the smallest K with tail mass below tail_tol.
    std::vector<double> top_row(n_max + 1, 0.0);
    if (p <= 0.0) {
      top_row[0] = 1.0;
    } else if (p >= 1.0) {
      top_row[n_max] = 1.0;
    } else {
      const double log_q = std::log1p(-p);
      for (int j = 0; j <= n_max; ++j) {
        double lw = log_factorial(n_max) - log_factorial(j) - log_factorial(n_max - j) +
                    j * log_p + (n_max - j) * log_q;
        top_row[j] = std::exp(lw);
      }
    }
    int k_cut = -1;
    double tail = 0.0;
    for (int k = n_max; k >= 0; --k) {
      if (tail >= trunc.tail_tol) break;
      k_cut = k;
      tail += top_row[k];
    }
    if (k_cut < 0 || k_cut > trunc.k_max) {
      std::ostringstream msg;
      msg << "KrausSet: jump tail below " << trunc.tail_tol
          << " needs k_max >= " << (k_cut < 0 ? n_max + 1 : k_cut)
          << " but the truncation caps it at " << trunc.k_max;
      throw truncation_error(msg.str());
    }

    // c_k(n) = sqrt( C(n+k, k) e^{-n*gamma_t} p^k ), log space for large n, k.
    bands_.resize(k_cut + 1);
    for (int k = 0; k <= k_cut; ++k) {
      Eigen::VectorXd band(dim_ - k);
      for (int n = 0; n + k <= n_max; ++n) {
        if (k == 0) {
          band(n) = std::exp(-0.5 * n * gamma_t_);
        } else {
          double log_c2 = log_factorial(n + k) - log_factorial(n) - log_factorial(k) -
                          n * gamma_t_ + k * log_p;
          band(n) = std::exp(0.5 * log_c2);
        }
      }
      bands_[k] = std::move(band);
    }
  }

  double gamma_t() const { return gamma_t_; }
  int dim() const { return dim_; }

  // Number of retained jump operators (k = 0 .. jump_count()-1).
  int jump_count() const { return static_cast<int>(bands_.size()); }

  const std::vector<Eigen::VectorXd>& bands() const { return bands_; }

  // Dense matrix of A_k: nonzero only on the (n, n+k) band.
  Matrix op(int k) const {
    if (k < 0 || k >= jump_count())
      throw std::invalid_argument("KrausSet::op: index out of range");
    Matrix a = Matrix::Zero(dim_, dim_);
    for (int n = 0; n + k < dim_; ++n) a(n, n + k) = bands_[k](n);
    return a;
  }

  std::vector<Matrix> operators() const {
    std::vector<Matrix> ops;
    ops.reserve(bands_.size());
    for (int k = 0; k < jump_count(); ++k) ops.push_back(op(k));
    return ops;
  }

  // Sum_k A_k rho A_k^dagger using the band structure:
  //   out(n, m) += c_k(n) c_k(m) rho(n+k, m+k).
  Matrix apply(const Matrix& rho) const {
    if (rho.rows() != dim_ || rho.cols() != dim_)
      throw std::invalid_argument("KrausSet::apply: dimension mismatch");
    Matrix out = Matrix::Zero(dim_, dim_);
    for (int k = 0; k < jump_count(); ++k) {
      const Eigen::VectorXd& c = bands_[k];
      const int nk = static_cast<int>(c.size());
      for (int m = 0; m < nk; ++m) {
        const double cm = c(m);
        for (int n = 0; n < nk; ++n) {
          out(n, m) += c(n) * cm * rho(n + k, m + k);
        }
      }
    }
    return out;
  }

 private:
  double gamma_t_ = 0.0;
  int dim_ = 0;
  std::vector<Eigen::VectorXd> bands_;
};

inline KrausSet damping_kraus(double gamma, double t, const TruncationConfig& trunc) {
  return KrausSet(gamma, t, trunc);
}

// Applies the damping channel and re-Hermitizes. The trace is intentionally
// NOT renormalized here so truncation leakage remains observable; the cycle
// maps renormalize once per cycle.
inline FieldState apply_channel(const FieldState& rho, const KrausSet& ks) {
  if (rho.dim() != ks.dim())
    throw std::invalid_argument("apply_channel: dimension mismatch");
  return FieldState(hermitized(ks.apply(rho.matrix())));
}

// Odd/even photon-number blocks of rho: odd = P_odd rho P_odd (the component
// a parity probe reads as "e"), even = P_even rho P_even (read as "g"). The
// blocks are subnormalized; their traces sum to tr rho.
struct ParityProjections {
  Matrix odd;   // rho_e
  Matrix even;  // rho_g
};

inline ParityProjections parity_projections(const FieldState& rho) {
  const int d = rho.dim();
  ParityProjections out;
  out.odd = Matrix::Zero(d, d);
  out.even = Matrix::Zero(d, d);
  for (int n = 0; n < d; ++n) {
    for (int m = 0; m < d; ++m) {
      if (((n ^ m) & 1) != 0) continue;  // cross-parity entries belong to neither block
      if (n & 1)
        out.odd(n, m) = rho.matrix()(n, m);
      else
        out.even(n, m) = rho.matrix()(n, m);
    }
  }
  return out;
}

// The two odd/even cross-block interference operators
//   rho_plus/minus = (1/4) [P rho P - rho +/- P rho -/+ rho P].
// They vanish on parity eigenstates and carry the coherence a parity
// measurement destroys; both are traceless.
struct ParityInterference {
  Matrix plus;
  Matrix minus;
};

inline ParityInterference parity_interference(const FieldState& rho) {
  const int d = rho.dim();
  // P rho has row n scaled by (-1)^n; rho P has column m scaled by (-1)^m.
  Matrix prp(d, d), pr(d, d), rp(d, d);
  for (int n = 0; n < d; ++n) {
    const double sn = (n & 1) ? -1.0 : 1.0;
    for (int m = 0; m < d; ++m) {
      const double sm = (m & 1) ? -1.0 : 1.0;
      const Complex v = rho.matrix()(n, m);
      prp(n, m) = sn * sm * v;
      pr(n, m) = sn * v;
      rp(n, m) = sm * v;
    }
  }
  ParityInterference out;
  out.plus = 0.25 * (prp - rho.matrix() + pr - rp);
  out.minus = 0.25 * (prp - rho.matrix() - pr + rp);
  return out;
}

// Single-photon injection rho_{n,m} -> rho_{n+1,m+1}: the exact Fock-shift
// isometry a^dagger (aa^dagger)^{-1/2} rho (aa^dagger)^{-1/2} a. Preserves
// trace exactly and flips the parity of every component. Throws when the top
// Fock level carries non-negligible population (the shifted state would fall
// off the truncation).
inline FieldState photon_injection(const FieldState& rho, double tail_tol = 1e-12) {
  const int d = rho.dim();
  const double top = rho.matrix()(d - 1, d - 1).real();
  if (top >= tail_tol) {
    std::ostringstream msg;
    msg << "photon_injection: top-level population " << top << " exceeds tail_tol "
        << tail_tol << "; raise n_max";
    throw truncation_error(msg.str());
  }
  Matrix out = Matrix::Zero(d, d);
  out.block(1, 1, d - 1, d - 1) = rho.matrix().block(0, 0, d - 1, d - 1);
  return FieldState(std::move(out));
}

// Probability that a photon stored in the auxiliary cavity C' survives the
// q waiting periods plus the two atomic crossings before it is consumed:
// exp(-gamma' (q tau_fb + t_cr_pr + t_cr_fb)). Acts exactly like a detector
// efficiency for the feedback branch.
inline double cprime_survival(double gamma_prime, int q, double tau_fb, double t_cr_pr,
                              double t_cr_fb) {
  if (gamma_prime < 0.0 || q < 0 || tau_fb < 0.0 || t_cr_pr < 0.0 || t_cr_fb < 0.0)
    throw std::invalid_argument("cprime_survival: arguments must be >= 0");
  return std::exp(-gamma_prime * (q * tau_fb + t_cr_pr + t_cr_fb));
}

// Semiclassical dephasing generator -(gamma/2) [sqrt(n), [sqrt(n), rho]]:
// entry (n, m) is scaled by -(gamma/2)(sqrt(n) - sqrt(m))^2, so the output is
// traceless with zero diagonal. Diagnostic only; not part of the cycle maps.
inline Matrix phase_diffusion_generator(const FieldState& rho, double gamma) {
  const int d = rho.dim();
  Matrix out(d, d);
  for (int n = 0; n < d; ++n) {
    const double sn = std::sqrt(static_cast<double>(n));
    for (int m = 0; m < d; ++m) {
      const double diff = sn - std::sqrt(static_cast<double>(m));
      out(n, m) = -0.5 * gamma * diff * diff * rho.matrix()(n, m);
    }
  }
  return out;
}

}  // namespace catfb

#endif  // CATFB_CHANNELS_HPP
