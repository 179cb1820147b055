// Copyright 2026 The catfb Authors
// SPDX-License-Identifier: Apache-2.0
//
// The stroboscopic autofeedback protocol on the cavity field: single-cycle
// maps (feedback branch, dissipative branch, and their preparation-weighted
// mixture), the waiting-time-averaged cycle map, trajectory/averaged
// evolution drivers, and the protocol timing arithmetic.
//
// Cycle anatomy (field-only picture). One cycle consists of:
//   1. waiting for a probe atom: l extra probe periods -> damping over
//      l*tau_pr;
//   2. parity probing, which splits the state into its odd block (probe read
//      "e") and even block (probe read "g");
//   3. flight and feedback waiting: damping over t0 + q*tau_fb;
//   4. conditional correction: if the probe read "g" (even block), a photon
//      stored in the auxiliary cavity C' is re-injected, provided it
//      survived storage (probability s = cprime_survival(...)).
// The feedback branch map is
//   Damp_{t0+q*tau_fb}[rho_odd + (1-s) rho_even]
//     + s * Inject(Damp_{t0+q*tau_fb}[rho_even]),
// and the dissipative branch (failed atom preparation, probability 1-p_r^2)
// is plain damping over the same wall-clock span t0 + l*tau_pr + q*tau_fb.

#ifndef CATFB_FEEDBACK_HPP
#define CATFB_FEEDBACK_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "catfb/channels.hpp"
#include "catfb/errors.hpp"
#include "catfb/fock.hpp"

namespace catfb {

// All protocol constants. Defaults are the reference operating point used
// throughout the tests (damping rates are run inputs and default to a
// 10 ms relaxation time).
struct FeedbackParams {
  double gamma = 100.0;        // C field damping rate, 1/s
  double gamma_prime = 100.0;  // C' field damping rate, 1/s
  double t0 = 600e-6;          // probe->feedback flight time, s
  double tau_pr = 15e-6;       // probe packet period, s
  double tau_fb = 15e-6;       // feedback packet period, s
  double t_cr_pr = 30e-6;      // probe crossing time of C', s
  double t_cr_fb = 15e-6;      // feedback crossing time of C', s
  double p1 = 0.36787944117144233;  // single-atom probability per packet (1/e)
  double p_r = 0.9;            // circular-state preparation efficiency
  double omega = 2.0 * M_PI * 24e3;        // vacuum Rabi coupling in C, rad/s
  double omega_prime = 2.0 * M_PI * 24e3;  // Rabi coupling in C', rad/s
  double delta = 2.0 * M_PI * 70e3;        // dispersive detuning, rad/s
  double l_cavity = 0.0075;    // effective mode length of C, m
  double v_pr = 250.0;         // probe atom velocity, m/s
  double v_fb = 500.0;         // feedback atom velocity, m/s

  void validate() const {
    if (!(p1 > 0.0) || p1 > 1.0)
      throw std::invalid_argument("FeedbackParams: p1 must be in (0, 1]");
    if (!(p_r > 0.0) || p_r > 1.0)
      throw std::invalid_argument("FeedbackParams: p_r must be in (0, 1]");
    const double times[] = {gamma, gamma_prime, t0, tau_pr, tau_fb, t_cr_pr, t_cr_fb};
    for (double v : times)
      if (v < 0.0)
        throw std::invalid_argument("FeedbackParams: rates and times must be >= 0");
    if (omega < 0.0 || omega_prime < 0.0 || delta <= 0.0)
      throw std::invalid_argument("FeedbackParams: couplings must be >= 0 and delta > 0");
    if (l_cavity <= 0.0 || v_pr <= 0.0 || v_fb <= 0.0)
      throw std::invalid_argument("FeedbackParams: lengths and velocities must be > 0");
  }
};

// One Monte-Carlo cycle's sampled randomness.
struct CycleRecord {
  int l = 0;                  // probe waiting count
  int q = 0;                  // feedback waiting count
  bool prep_success = true;   // atom pair prepared (probability p_r^2)
  double elapsed = 0.0;       // this cycle's wall-clock duration, s
};

// Geometric waiting-time mass p(l) = p1 (1 - p1)^l.
inline double waiting_pmf(double p1, int l) {
  if (!(p1 > 0.0) || p1 > 1.0)
    throw std::invalid_argument("waiting_pmf: p1 must be in (0, 1]");
  if (l < 0) throw std::invalid_argument("waiting_pmf: l must be >= 0");
  return p1 * std::pow(1.0 - p1, l);
}

// Number of geometric terms per axis needed to keep the neglected tail mass
// of one waiting-time sum below eps: smallest L with (1 - p1)^L < eps.
inline int geometric_term_count(double p1, double eps) {
  if (!(p1 > 0.0) || p1 > 1.0)
    throw std::invalid_argument("geometric_term_count: p1 must be in (0, 1]");
  if (!(eps > 0.0)) throw std::invalid_argument("geometric_term_count: eps must be > 0");
  if (p1 >= 1.0 || eps >= 1.0) return 1;
  return static_cast<int>(std::ceil(std::log(eps) / std::log1p(-p1)));
}

namespace detail {

// Feedback-branch kernel given prebuilt waiting and flight channels.
// Output is hermitized but NOT renormalized; callers own the single
// per-cycle trace renormalization.
inline Matrix fb_kernel(const Matrix& rho, int q, const FeedbackParams& params,
                        const TruncationConfig& trunc, const KrausSet& waiting,
                        const KrausSet& flight) {
  Matrix pre = waiting.apply(rho);
  ParityProjections blocks = parity_projections(FieldState(pre));
  const double s =
      cprime_survival(params.gamma_prime, q, params.tau_fb, params.t_cr_pr, params.t_cr_fb);
  Matrix uncorrected = flight.apply(blocks.odd + (1.0 - s) * blocks.even);
  Matrix corrected =
      photon_injection(FieldState(flight.apply(blocks.even)), trunc.tail_tol).matrix();
  return hermitized(uncorrected + s * corrected);
}

inline Matrix diss_kernel(const Matrix& rho, const KrausSet& full_span) {
  return hermitized(full_span.apply(rho));
}

inline FieldState renormalized_state(Matrix m) {
  const double tr = m.trace().real();
  if (!(tr > 0.0))
    throw std::runtime_error("cycle map produced a non-positive trace");
  return FieldState(m / tr);
}

}  // namespace detail

// Feedback-branch cycle map (successful atom-pair preparation): damp over
// l*tau_pr, parity-split, damp over t0 + q*tau_fb, re-inject the even branch
// with survival weight s. Renormalizes trace once at the end.
inline FieldState cycle_map_fb(const FieldState& rho, int q, int l,
                               const FeedbackParams& params, const TruncationConfig& trunc) {
  params.validate();
  trunc.validate();
  if (rho.dim() != trunc.dim())
    throw std::invalid_argument("cycle_map_fb: state/truncation dimension mismatch");
  if (q < 0 || l < 0) throw std::invalid_argument("cycle_map_fb: q, l must be >= 0");
  KrausSet waiting(params.gamma, l * params.tau_pr, trunc);
  KrausSet flight(params.gamma, params.t0 + q * params.tau_fb, trunc);
  return detail::renormalized_state(
      detail::fb_kernel(rho.matrix(), q, params, trunc, waiting, flight));
}

// Dissipative-branch cycle map (failed preparation): plain damping over the
// full cycle span t0 + l*tau_pr + q*tau_fb.
inline FieldState cycle_map_diss(const FieldState& rho, int q, int l,
                                 const FeedbackParams& params, const TruncationConfig& trunc) {
  params.validate();
  trunc.validate();
  if (rho.dim() != trunc.dim())
    throw std::invalid_argument("cycle_map_diss: state/truncation dimension mismatch");
  if (q < 0 || l < 0) throw std::invalid_argument("cycle_map_diss: q, l must be >= 0");
  KrausSet full_span(params.gamma, params.t0 + l * params.tau_pr + q * params.tau_fb, trunc);
  return detail::renormalized_state(detail::diss_kernel(rho.matrix(), full_span));
}

// Preparation-weighted cycle map: p_r^2 * feedback branch + (1 - p_r^2) *
// dissipative branch.
inline FieldState cycle_map(const FieldState& rho, int q, int l, const FeedbackParams& params,
                            const TruncationConfig& trunc) {
  const double w = params.p_r * params.p_r;
  FieldState fb = cycle_map_fb(rho, q, l, params, trunc);
  if (w >= 1.0) return fb;
  FieldState diss = cycle_map_diss(rho, q, l, params, trunc);
  return detail::renormalized_state(w * fb.matrix() + (1.0 - w) * diss.matrix());
}

namespace detail {

// Waiting-time-averaged cycle kernel, shared by averaged_cycle_map and
// evolve. The double geometric sum over (l, q) factorizes exactly:
//   * the l-dependence enters only through the pre-probe damping, so
//     rho_bar = sum_l p(l) Damp_{l tau_pr} rho is formed once;
//   * damping is a semigroup, so the dissipative branch's damping over
//     t0 + l tau_pr + q tau_fb equals the flight channel applied to rho_bar.
// Each axis keeps L = geometric_term_count(p1, tail_eps) terms; the retained
// weights are renormalized to a proper distribution (the neglected joint
// mass is <= 2*tail_eps before renormalization). Output hermitized, not
// trace-renormalized.
inline Matrix averaged_kernel(const Matrix& rho, const FeedbackParams& params,
                              const TruncationConfig& trunc, double tail_eps) {
  const int terms = geometric_term_count(params.p1, tail_eps);
  std::vector<double> w(terms);
  double total = 0.0;
  for (int i = 0; i < terms; ++i) {
    w[i] = waiting_pmf(params.p1, i);
    total += w[i];
  }
  for (double& wi : w) wi /= total;

  const int d = trunc.dim();
  Matrix rho_bar = Matrix::Zero(d, d);
  for (int l = 0; l < terms; ++l) {
    KrausSet waiting(params.gamma, l * params.tau_pr, trunc);
    rho_bar += w[l] * waiting.apply(rho);
  }

  ParityProjections blocks = parity_projections(FieldState(rho_bar));
  const double prep = params.p_r * params.p_r;
  Matrix out = Matrix::Zero(d, d);
  for (int q = 0; q < terms; ++q) {
    KrausSet flight(params.gamma, params.t0 + q * params.tau_fb, trunc);
    const double s = cprime_survival(params.gamma_prime, q, params.tau_fb, params.t_cr_pr,
                                     params.t_cr_fb);
    Matrix fb = flight.apply(blocks.odd + (1.0 - s) * blocks.even) +
                s * photon_injection(FieldState(flight.apply(blocks.even)), trunc.tail_tol)
                        .matrix();
    Matrix diss = flight.apply(rho_bar);
    out += w[q] * (prep * fb + (1.0 - prep) * diss);
  }
  return hermitized(out);
}

}  // namespace detail

// Cycle map averaged over the waiting-time distributions of both atoms and
// the preparation branch. tail_eps bounds the per-axis geometric tail that
// is dropped (and renormalized away).
inline FieldState averaged_cycle_map(const FieldState& rho, const FeedbackParams& params,
                                     const TruncationConfig& trunc, double tail_eps = 1e-6) {
  params.validate();
  trunc.validate();
  if (rho.dim() != trunc.dim())
    throw std::invalid_argument("averaged_cycle_map: state/truncation dimension mismatch");
  return detail::renormalized_state(
      detail::averaged_kernel(rho.matrix(), params, trunc, tail_eps));
}

// Deterministic per-trajectory random stream: a 64-bit generator seeded by
// the splitmix64 stream value at (master_seed, trajectory index). Streams
// are independent and platform-stable, so any trajectory is reproducible
// from (seed, index) alone.
class TrajectoryRng {
 public:
  TrajectoryRng(std::uint64_t master_seed, std::uint64_t trajectory_index)
      : engine_(stream_seed(master_seed, trajectory_index)) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Geometric count with mass p1(1-p1)^l, l >= 0, by CDF inversion.
  int geometric(double p1) {
    if (p1 >= 1.0) return 0;
    const double u = uniform();
    const double r = std::ceil(std::log1p(-u) / std::log1p(-p1)) - 1.0;
    return r < 0.0 ? 0 : static_cast<int>(r);
  }

  bool bernoulli(double p) { return uniform() < p; }

  static std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

enum class EvolveMode { kAveraged, kMonteCarlo };

struct EvolveOptions {
  EvolveMode mode = EvolveMode::kAveraged;
  std::uint64_t seed = 0;            // master seed (monte carlo)
  std::uint64_t trajectory_index = 0;  // stream index within the seed
  double tail_eps = 1e-6;            // averaged-mode geometric tail bound
};

// Full evolution record. states[i] is the state after i cycles (states[0] is
// the input). Both elapsed-time conventions are kept per cycle index:
//   elapsed_attempt_s  — physical duration of the executed cycles
//                        (sampled in monte carlo, in expectation in averaged
//                        mode);
//   elapsed_effective_s — i * mean_cycle_time(params), which additionally
//                        charges failed preparations at rate 1/p_r^2.
// pre_renorm_traces[i] is the trace of cycle i's output before its single
// renormalization; 1 - trace is that cycle's truncation leakage.
struct EvolveResult {
  std::vector<FieldState> states;
  std::vector<CycleRecord> records;  // monte carlo only; empty in averaged mode
  std::vector<double> elapsed_attempt_s;
  std::vector<double> elapsed_effective_s;
  std::vector<double> pre_renorm_traces;
  double cumulative_leakage = 0.0;  // sum over cycles of |1 - pre-renorm trace|
};

// Effective mean duration of one feedback cycle, including the waiting-time
// means and the 1/p_r^2 preparation-retry factor:
//   (1/p_r^2) [ t0 + ((1-p1)/p1)(tau_pr + tau_fb) ].
inline double mean_cycle_time(const FeedbackParams& params) {
  params.validate();
  const double mean_wait = (1.0 - params.p1) / params.p1;
  return (params.t0 + mean_wait * (params.tau_pr + params.tau_fb)) / (params.p_r * params.p_r);
}

namespace detail {

// Cache of damping channels keyed by integer waiting counts; Monte-Carlo
// runs revisit the same few (l, q) values constantly.
class ChannelCache {
 public:
  ChannelCache(double gamma, double base_time, double period, const TruncationConfig& trunc)
      : gamma_(gamma), base_(base_time), period_(period), trunc_(trunc) {}

  const KrausSet& get(int count) {
    auto it = cache_.find(count);
    if (it == cache_.end())
      it = cache_.emplace(count, KrausSet(gamma_, base_ + count * period_, trunc_)).first;
    return it->second;
  }

 private:
  double gamma_, base_, period_;
  TruncationConfig trunc_;
  std::map<int, KrausSet> cache_;
};

}  // namespace detail

// Evolves rho0 for n_cycles cycles. Averaged mode iterates the averaged
// cycle map; monte carlo samples (l, q, preparation) per cycle — in that
// order, one uniform each — from a TrajectoryRng(seed, trajectory_index)
// stream and applies the corresponding branch map.
inline EvolveResult evolve(const FieldState& rho0, int n_cycles, const EvolveOptions& opts,
                           const FeedbackParams& params, const TruncationConfig& trunc) {
  params.validate();
  trunc.validate();
  if (n_cycles < 0) throw std::invalid_argument("evolve: n_cycles must be >= 0");
  if (rho0.dim() != trunc.dim())
    throw std::invalid_argument("evolve: state/truncation dimension mismatch");

  EvolveResult result;
  result.states.reserve(n_cycles + 1);
  result.states.push_back(rho0);
  result.elapsed_attempt_s.assign(1, 0.0);
  result.elapsed_effective_s.assign(1, 0.0);

  const double t_cyc = mean_cycle_time(params);
  const double mean_wait = (1.0 - params.p1) / params.p1;
  const double mean_attempt = params.t0 + mean_wait * (params.tau_pr + params.tau_fb);

  detail::ChannelCache waiting_cache(params.gamma, 0.0, params.tau_pr, trunc);
  detail::ChannelCache flight_cache(params.gamma, params.t0, params.tau_fb, trunc);
  TrajectoryRng rng(opts.seed, opts.trajectory_index);

  double attempt_elapsed = 0.0;
  for (int cycle = 1; cycle <= n_cycles; ++cycle) {
    const Matrix& current = result.states.back().matrix();
    Matrix raw;
    if (opts.mode == EvolveMode::kAveraged) {
      raw = detail::averaged_kernel(current, params, trunc, opts.tail_eps);
      attempt_elapsed += mean_attempt;
    } else {
      CycleRecord rec;
      rec.l = rng.geometric(params.p1);
      rec.q = rng.geometric(params.p1);
      rec.prep_success = rng.bernoulli(params.p_r * params.p_r);
      rec.elapsed = params.t0 + rec.l * params.tau_pr + rec.q * params.tau_fb;
      if (rec.prep_success) {
        raw = detail::fb_kernel(current, rec.q, params, trunc, waiting_cache.get(rec.l),
                                flight_cache.get(rec.q));
      } else {
        KrausSet full_span(params.gamma, rec.elapsed, trunc);
        raw = detail::diss_kernel(current, full_span);
      }
      attempt_elapsed += rec.elapsed;
      result.records.push_back(rec);
    }
    const double tr = raw.trace().real();
    result.pre_renorm_traces.push_back(tr);
    result.cumulative_leakage += std::abs(1.0 - tr);
    result.states.push_back(detail::renormalized_state(std::move(raw)));
    result.elapsed_attempt_s.push_back(attempt_elapsed);
    result.elapsed_effective_s.push_back(cycle * t_cyc);
  }
  return result;
}

// Ensemble of Monte-Carlo trajectories under one master seed: per-cycle mean
// states, and (optionally) a two-pass standard-error estimate for the final
// mean. Trajectories are re-generated from their (seed, index) streams in
// the second pass, so no per-trajectory storage is needed.
struct EnsembleResult {
  std::vector<FieldState> mean_states;
  std::vector<double> elapsed_attempt_s;    // ensemble-mean attempt time per cycle
  std::vector<double> elapsed_effective_s;  // i * mean_cycle_time
  int n_trajectories = 0;
  // Standard error of the ensemble-mean final state, estimated from the
  // per-trajectory trace distances d_i to the mean final state:
  // se = sqrt( sum d_i^2 / (M (M-1)) ). Zero when not requested.
  double se_final = 0.0;
};

inline EnsembleResult monte_carlo_ensemble(const FieldState& rho0, int n_cycles,
                                           int n_trajectories, std::uint64_t seed,
                                           const FeedbackParams& params,
                                           const TruncationConfig& trunc,
                                           bool with_standard_error = false) {
  params.validate();
  trunc.validate();
  if (n_trajectories < 1)
    throw std::invalid_argument("monte_carlo_ensemble: need at least one trajectory");

  const int d = trunc.dim();
  std::vector<Matrix> sums(n_cycles + 1, Matrix::Zero(d, d));
  std::vector<double> attempt_sums(n_cycles + 1, 0.0);

  EvolveOptions opts;
  opts.mode = EvolveMode::kMonteCarlo;
  opts.seed = seed;
  for (int t = 0; t < n_trajectories; ++t) {
    opts.trajectory_index = static_cast<std::uint64_t>(t);
    EvolveResult r = evolve(rho0, n_cycles, opts, params, trunc);
    for (int i = 0; i <= n_cycles; ++i) {
      sums[i] += r.states[i].matrix();
      attempt_sums[i] += r.elapsed_attempt_s[i];
    }
  }

  EnsembleResult out;
  out.n_trajectories = n_trajectories;
  out.mean_states.reserve(n_cycles + 1);
  const double t_cyc = mean_cycle_time(params);
  for (int i = 0; i <= n_cycles; ++i) {
    out.mean_states.emplace_back(hermitized(sums[i] / n_trajectories));
    out.elapsed_attempt_s.push_back(attempt_sums[i] / n_trajectories);
    out.elapsed_effective_s.push_back(i * t_cyc);
  }

  if (with_standard_error && n_trajectories > 1) {
    const FieldState& mean_final = out.mean_states.back();
    double ssd = 0.0;
    for (int t = 0; t < n_trajectories; ++t) {
      opts.trajectory_index = static_cast<std::uint64_t>(t);
      EvolveResult r = evolve(rho0, n_cycles, opts, params, trunc);
      const double dist = trace_distance(r.states.back(), mean_final);
      ssd += dist * dist;
    }
    out.se_final = std::sqrt(ssd / (static_cast<double>(n_trajectories) *
                                    (n_trajectories - 1.0)));
  }
  return out;
}

// Protection-threshold bookkeeping: a cat of size alpha_sq is protected when
// the field relaxation time 1/gamma exceeds threshold = 2 * t_cyc * alpha_sq.
struct ProtectionBound {
  bool satisfied = false;
  double threshold_s = 0.0;  // 2 * mean_cycle_time * alpha_sq
  double t_rel_s = 0.0;      // 1/gamma (infinity when gamma == 0)
};

inline ProtectionBound protection_bound(const FeedbackParams& params, double alpha_sq) {
  if (!(alpha_sq > 0.0))
    throw std::invalid_argument("protection_bound: alpha_sq must be > 0");
  ProtectionBound b;
  b.threshold_s = 2.0 * mean_cycle_time(params) * alpha_sq;
  b.t_rel_s = params.gamma > 0.0 ? 1.0 / params.gamma
                                 : std::numeric_limits<double>::infinity();
  b.satisfied = b.t_rel_s > b.threshold_s;
  return b;
}

// One row of the feasibility table for the protocol's hardware timing.
struct TimingCheck {
  std::string name;
  double actual = 0.0;
  double required = 0.0;
  double margin = 0.0;  // positive iff satisfied
  bool satisfied = false;
};

// Evaluates the three operating-point constraints:
//  (a) the probe velocity implied by the pi/2 dispersive phase condition,
//      v = 2 Omega^2 L_C / (pi delta), must match params.v_pr within 2%;
//  (b) both C' crossing times must exceed the quarter exchange period
//      pi / (2 Omega');
//  (c) the feedback crossing time must exceed the Rabi time 1/Omega.
inline std::vector<TimingCheck> check_timing_constraints(const FeedbackParams& params) {
  params.validate();
  std::vector<TimingCheck> checks;

  TimingCheck velocity;
  velocity.name = "probe_velocity_pi_half_phase";
  velocity.actual = 2.0 * params.omega * params.omega * params.l_cavity / (M_PI * params.delta);
  velocity.required = params.v_pr;
  velocity.margin = 0.02 - std::abs(velocity.actual - velocity.required) / velocity.required;
  velocity.satisfied = velocity.margin >= 0.0;
  checks.push_back(velocity);

  const double quarter_exchange = M_PI / (2.0 * params.omega_prime);
  const std::pair<const char*, double> crossings[] = {
      {"t_cr_pr_exceeds_quarter_exchange", params.t_cr_pr},
      {"t_cr_fb_exceeds_quarter_exchange", params.t_cr_fb}};
  for (const auto& [name, actual] : crossings) {
    TimingCheck c;
    c.name = name;
    c.actual = actual;
    c.required = quarter_exchange;
    c.margin = (c.actual - c.required) / c.required;
    c.satisfied = c.actual > c.required;
    checks.push_back(c);
  }

  TimingCheck rabi;
  rabi.name = "t_cr_fb_exceeds_rabi_time";
  rabi.actual = params.t_cr_fb;
  rabi.required = 1.0 / params.omega;
  rabi.margin = (rabi.actual - rabi.required) / rabi.required;
  rabi.satisfied = rabi.actual > rabi.required;
  checks.push_back(rabi);

  return checks;
}

}  // namespace catfb

#endif  // CATFB_FEEDBACK_HPP
