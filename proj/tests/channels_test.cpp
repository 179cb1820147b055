// Copyright 2026 The catfb Authors
// SPDX-License-Identifier: Apache-2.0

#include "catfb/channels.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

namespace catfb {
namespace {

const TruncationConfig kTrunc{24, 24, 1e-12};

Matrix random_hermitian(int d, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = Complex(u(gen), u(gen));
  return hermitized(m);
}

// Full-rank random density matrix: square of a random Hermitian, normalized.
FieldState random_density(int d, unsigned seed) {
  Matrix h = random_hermitian(d, seed);
  return FieldState::from_density(h * h);
}

TEST_CASE("damping operators are complete at every retained level", "[channels]") {
  for (double gt : {0.01, 0.1, 0.5, 1.0}) {
    KrausSet ks(1.0, gt, kTrunc);
    Matrix sum = Matrix::Zero(kTrunc.dim(), kTrunc.dim());
    for (const Matrix& a : ks.operators()) sum += a.adjoint() * a;
    double worst = 0.0;
    for (int n = 0; n <= kTrunc.n_max; ++n)
      worst = std::max(worst, std::abs(sum(n, n).real() - 1.0));
    // The retained-jump cutoff is chosen so the neglected mass at the top
    // level (the worst case) stays below tail_tol.
    REQUIRE(worst < 1e-10);
    REQUIRE((sum - Matrix(sum.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("zero exposure is the identity channel", "[channels]") {
  KrausSet ks(100.0, 0.0, kTrunc);
  REQUIRE(ks.jump_count() == 1);
  FieldState rho(random_hermitian(kTrunc.dim(), 11));
  REQUIRE((apply_channel(rho, ks).matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("banded application equals the dense operator sum", "[channels]") {
  TruncationConfig small{16, 16, 1e-12};
  KrausSet ks(1.0, 0.3, small);
  Matrix rho = random_hermitian(small.dim(), 7);
  Matrix dense = Matrix::Zero(small.dim(), small.dim());
  for (const Matrix& a : ks.operators()) dense += a * rho * a.adjoint();
  REQUIRE((ks.apply(rho) - dense).cwiseAbs().maxCoeff() < 1e-13);
  REQUIRE_THROWS_AS(ks.apply(Matrix::Zero(4, 4)), std::invalid_argument);
  REQUIRE_THROWS_AS(ks.op(-1), std::invalid_argument);
  REQUIRE_THROWS_AS(ks.op(ks.jump_count()), std::invalid_argument);
}

TEST_CASE("mean photon number contracts exponentially under damping", "[channels]") {
  const double gt = 0.37;
  KrausSet ks(1.0, gt, kTrunc);
  FieldState f6 = apply_channel(fock_state(6, kTrunc), ks);
  REQUIRE(std::abs(f6.mean_photon() - 6.0 * std::exp(-gt)) < 1e-10);
  FieldState coh = apply_channel(coherent_state(Complex(1.2, 0.3), kTrunc), ks);
  REQUIRE(std::abs(coh.mean_photon() - std::norm(Complex(1.2, 0.3)) * std::exp(-gt)) < 1e-10);
}

TEST_CASE("coherent states stay coherent with attenuated amplitude", "[channels]") {
  const Complex alpha(1.1, -0.4);
  const double gt = 0.5;
  FieldState out = apply_channel(coherent_state(alpha, kTrunc), KrausSet(1.0, gt, kTrunc));
  FieldState ref = coherent_state(alpha * std::exp(-0.5 * gt), kTrunc);
  REQUIRE(std::abs(out.trace_real() - 1.0) < 1e-12);  // leakage is below tail_tol here
  REQUIRE(fidelity(out.normalized(), ref) > 1.0 - 1e-12);
}

TEST_CASE("channel application preserves trace up to the truncation tail", "[channels]") {
  FieldState cat = cat_state(Complex(1.3, 0.0), -1, kTrunc);
  FieldState out = apply_channel(cat, KrausSet(1.0, 0.8, kTrunc));
  REQUIRE(std::abs(out.trace_real() - 1.0) < 1e-11);
  REQUIRE(out.hermiticity_error() < 1e-15);
  REQUIRE(out.min_eigenvalue() > -1e-12);
}

TEST_CASE("jump cap below the required rank trips the truncation guard", "[channels]") {
  TruncationConfig capped{16, 1, 1e-12};
  REQUIRE_THROWS_AS(KrausSet(1.0, 1.0, capped), truncation_error);
  REQUIRE_THROWS_AS(KrausSet(-1.0, 1.0, kTrunc), std::invalid_argument);
  REQUIRE_THROWS_AS(KrausSet(1.0, -1.0, kTrunc), std::invalid_argument);
}

TEST_CASE("parity projections split the state without cross-parity leakage", "[channels]") {
  FieldState rho = random_density(kTrunc.dim(), 3);
  ParityProjections blocks = parity_projections(rho);
  for (int n = 0; n < kTrunc.dim(); ++n)
    for (int m = 0; m < kTrunc.dim(); ++m) {
      if (((n ^ m) & 1) != 0) {
        REQUIRE(blocks.odd(n, m) == Complex(0.0, 0.0));
        REQUIRE(blocks.even(n, m) == Complex(0.0, 0.0));
      } else if ((n & 1) != 0) {
        REQUIRE(blocks.odd(n, m) == rho.matrix()(n, m));
      } else {
        REQUIRE(blocks.even(n, m) == rho.matrix()(n, m));
      }
    }
  REQUIRE(std::abs(blocks.odd.trace().real() + blocks.even.trace().real() - 1.0) < 1e-13);

  // A pure odd superposition lives entirely in the odd block.
  ParityProjections cat = parity_projections(cat_state(Complex(1.3, 0.0), -1, kTrunc));
  REQUIRE(cat.even.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("interference blocks vanish on parity eigenstates", "[channels]") {
  ParityInterference pi = parity_interference(cat_state(Complex(1.5, 0.0), -1, kTrunc));
  REQUIRE(pi.plus.cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE(pi.minus.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("interference blocks extract the cross-parity coherence", "[channels]") {
  // rho = |0><1| + |1><0| is purely cross-parity; the interference
  // decomposition maps it to plus = -|1><0|, minus = -|0><1|.
  Matrix m = Matrix::Zero(kTrunc.dim(), kTrunc.dim());
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  ParityInterference pi = parity_interference(FieldState(m));
  REQUIRE(std::abs(pi.plus.trace()) < 1e-15);
  REQUIRE(std::abs(pi.minus.trace()) < 1e-15);
  Matrix plus_ref = Matrix::Zero(kTrunc.dim(), kTrunc.dim());
  plus_ref(1, 0) = -1.0;
  Matrix minus_ref = Matrix::Zero(kTrunc.dim(), kTrunc.dim());
  minus_ref(0, 1) = -1.0;
  REQUIRE((pi.plus - plus_ref).cwiseAbs().maxCoeff() < 1e-15);
  REQUIRE((pi.minus - minus_ref).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("photon injection shifts the ladder and flips parity", "[channels]") {
  FieldState cat = cat_state(Complex(1.4, 0.0), -1, kTrunc);
  FieldState shifted = photon_injection(cat);
  REQUIRE(std::abs(shifted.trace_real() - cat.trace_real()) < 1e-15);
  REQUIRE(std::abs(shifted.parity_expectation() + cat.parity_expectation()) < 1e-14);
  REQUIRE(std::abs(shifted.mean_photon() - cat.mean_photon() - 1.0) < 1e-12);
  for (int m = 0; m < kTrunc.dim() - 1; ++m)
    REQUIRE(shifted.matrix()(m + 1, m + 1) == cat.matrix()(m, m));
  REQUIRE(shifted.matrix()(0, 0) == Complex(0.0, 0.0));

  // Population at the top level would fall off the truncation.
  REQUIRE_THROWS_AS(photon_injection(fock_state(kTrunc.n_max, kTrunc)), truncation_error);
}

TEST_CASE("auxiliary-cavity survival is the exposed exponential", "[channels]") {
  const double gp = 100.0, tau_fb = 15e-6, cr_pr = 30e-6, cr_fb = 15e-6;
  for (int q : {0, 1, 4})
    REQUIRE(std::abs(cprime_survival(gp, q, tau_fb, cr_pr, cr_fb) -
                     std::exp(-gp * (q * tau_fb + cr_pr + cr_fb))) < 1e-15);
  REQUIRE(cprime_survival(0.0, 3, tau_fb, cr_pr, cr_fb) == 1.0);
  REQUIRE_THROWS_AS(cprime_survival(-1.0, 0, tau_fb, cr_pr, cr_fb), std::invalid_argument);
  REQUIRE_THROWS_AS(cprime_survival(gp, -1, tau_fb, cr_pr, cr_fb), std::invalid_argument);
}

TEST_CASE("phase diffusion generator damps coherences only", "[channels]") {
  const double gamma = 2.0;
  FieldState rho = random_density(kTrunc.dim(), 5);
  Matrix g = phase_diffusion_generator(rho, gamma);
  REQUIRE(std::abs(g.trace()) < 1e-14);
  for (int n = 0; n < kTrunc.dim(); ++n) REQUIRE(g(n, n) == Complex(0.0, 0.0));
  const double w41 = -0.5 * gamma * std::pow(2.0 - 1.0, 2);
  REQUIRE(std::abs(g(4, 1) - w41 * rho.matrix()(4, 1)) < 1e-15);
}

}  // namespace
}  // namespace catfb
