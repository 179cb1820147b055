// Copyright 2026 The catfb Authors
// SPDX-License-Identifier: Apache-2.0
//
// Batch drivers behind the CLI subcommands. Each cmd_* function runs one
// experiment or check suite, writes machine-readable artifacts into an
// output directory, optionally narrates to stdout, and returns a process
// exit code:
//   0 — success;
//   3 — a check suite ran to completion and at least one check failed its
//       documented tolerance.
// Configuration and numerical-guard failures are reported by exception
// (config_error -> 1, truncation/tolerance errors -> 2, mapped in main).
//
// Artifact formats (stable, diff-friendly):
//   * density matrices: CSV rows n,m,re,im (all entries, row-major);
//   * Wigner grids: CSV rows x,p,w;
//   * metrics: one CSV row per snapshot, header included;
//   * manifest.cfg: re-parseable echo of the effective configuration.
// All floating-point cells use %.17g, so outputs are bit-reproducible and
// round-trip exactly.

#ifndef CATFB_RUNNER_HPP
#define CATFB_RUNNER_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "catfb/adiabatic.hpp"
#include "catfb/analysis.hpp"
#include "catfb/channels.hpp"
#include "catfb/config.hpp"
#include "catfb/errors.hpp"
#include "catfb/feedback.hpp"
#include "catfb/fock.hpp"
#include "catfb/oracle.hpp"

namespace catfb {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitNumericalGuard = 2;
inline constexpr int kExitCheckFailure = 3;

namespace detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);  // binary: keep '\n' byte-exact
  if (!out) throw config_error("cannot open output file '" + path.string() + "'");
  out << content;
  if (!out) throw config_error("failed writing output file '" + path.string() + "'");
}

inline std::string state_csv(const FieldState& rho) {
  std::string out = "n,m,re,im\n";
  for (int n = 0; n < rho.dim(); ++n)
    for (int m = 0; m < rho.dim(); ++m) {
      const Complex v = rho.matrix()(n, m);
      out += std::to_string(n) + "," + std::to_string(m) + "," + format_double(v.real()) + "," +
             format_double(v.imag()) + "\n";
    }
  return out;
}

inline std::string wigner_csv(const WignerGrid& grid) {
  std::string out = "x,p,w\n";
  for (Eigen::Index i = 0; i < grid.x_axis.size(); ++i)
    for (Eigen::Index j = 0; j < grid.p_axis.size(); ++j)
      out += format_double(grid.x_axis(i)) + "," + format_double(grid.p_axis(j)) + "," +
             format_double(grid.values(i, j)) + "\n";
  return out;
}

inline std::string indexed_name(const char* prefix, int index, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%04d%s", prefix, index, suffix);
  return buf;
}

inline bool is_snapshot(int cycle, int n_cycles, int stride) {
  return cycle == 0 || cycle == n_cycles || cycle % stride == 0;
}

}  // namespace detail

// One row of a pass/fail table. comparator is "<", ">", or "info"
// (informational rows never fail a suite).
struct CheckRow {
  std::string name;
  double actual = 0.0;
  double required = 0.0;
  std::string comparator;
  bool pass = true;
};

namespace detail {

inline std::string check_table_csv(const std::vector<CheckRow>& rows) {
  std::string out = "name,actual,required,comparator,pass\n";
  for (const CheckRow& r : rows)
    out += r.name + "," + format_double(r.actual) + "," + format_double(r.required) + "," +
           r.comparator + "," + (r.pass ? "true" : "false") + "\n";
  return out;
}

inline void print_check_table(const std::vector<CheckRow>& rows, std::ostream& os) {
  for (const CheckRow& r : rows) {
    char line[160];
    if (r.comparator == "info")
      std::snprintf(line, sizeof(line), "  [INFO] %-44s %14.8g", r.name.c_str(), r.actual);
    else
      std::snprintf(line, sizeof(line), "  [%s] %-44s %14.8g  (required %s %g)",
                    r.pass ? "PASS" : "FAIL", r.name.c_str(), r.actual, r.comparator.c_str(),
                    r.required);
    os << line << "\n";
  }
}

inline int check_suite_exit(const std::vector<CheckRow>& rows) {
  for (const CheckRow& r : rows)
    if (r.comparator != "info" && !r.pass) return kExitCheckFailure;
  return kExitOk;
}

}  // namespace detail

// Protocol evolution driver: prepares the configured two-component
// superposition, evolves it for n_cycles (averaged map or seeded Monte
// Carlo), and writes snapshots, metrics, Wigner grids, and the manifest.
inline int cmd_run(const RunConfig& rc, const std::string& out_dir, bool quiet = false) {
  using detail::format_double;
  rc.validate();
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  fs::create_directories(dir);

  const FieldState rho0 = cat_state(rc.alpha, rc.cat_sign, rc.trunc);

  std::vector<FieldState> states;
  std::vector<double> attempt_s, effective_s, row_trace;
  std::string records_csv;

  if (rc.mode == EvolveMode::kAveraged || rc.n_trajectories == 1) {
    EvolveOptions opts;
    opts.mode = rc.mode;
    opts.seed = rc.seed;
    opts.tail_eps = rc.tail_eps;
    EvolveResult r = evolve(rho0, rc.n_cycles, opts, rc.params, rc.trunc);
    states = std::move(r.states);
    attempt_s = std::move(r.elapsed_attempt_s);
    effective_s = std::move(r.elapsed_effective_s);
    row_trace.push_back(1.0);  // the input state is written as-is
    for (double tr : r.pre_renorm_traces) row_trace.push_back(tr);
    if (rc.mode == EvolveMode::kMonteCarlo) {
      // Per-cycle draws are an artifact only for a single trajectory; an
      // ensemble has no meaningful single record stream.
      records_csv = "cycle,l,q,prep_success,elapsed_s\n";
      for (std::size_t i = 0; i < r.records.size(); ++i) {
        const CycleRecord& rec = r.records[i];
        records_csv += std::to_string(i + 1) + "," + std::to_string(rec.l) + "," +
                       std::to_string(rec.q) + "," + (rec.prep_success ? "1" : "0") + "," +
                       format_double(rec.elapsed) + "\n";
      }
    }
    if (!quiet && rc.mode == EvolveMode::kAveraged)
      std::cout << "averaged evolution, " << rc.n_cycles << " cycles, cumulative truncation leakage "
                << detail::format_double(r.cumulative_leakage) << "\n";
  } else {
    EnsembleResult r = monte_carlo_ensemble(rho0, rc.n_cycles, rc.n_trajectories, rc.seed,
                                            rc.params, rc.trunc);
    states = std::move(r.mean_states);
    attempt_s = std::move(r.elapsed_attempt_s);
    effective_s = std::move(r.elapsed_effective_s);
    // Ensemble rows report the trace of the written mean state (per-
    // trajectory pre-renormalization traces are not aggregated).
    for (const FieldState& s : states) row_trace.push_back(s.trace_real());
    if (!quiet)
      std::cout << "monte carlo ensemble, " << rc.n_trajectories << " trajectories x "
                << rc.n_cycles << " cycles, seed " << rc.seed << "\n";
  }

  // Shared Wigner kernels across snapshots.
  std::unique_ptr<WignerEvaluator> wig;
  if (rc.wigner_enable) wig = std::make_unique<WignerEvaluator>(rc.wigner, rc.trunc);

  std::string metrics =
      "cycle,elapsed_attempt_s,elapsed_effective_s,pre_renorm_trace,mean_photon,parity_expect,"
      "wigner_origin,cat_fidelity,mixture_fidelity,offdiag_frobenius,fock01_mass\n";
  int snapshots = 0;
  for (int i = 0; i <= rc.n_cycles; ++i) {
    if (!detail::is_snapshot(i, rc.n_cycles, rc.snapshot_stride)) continue;
    const FieldState& s = states[static_cast<std::size_t>(i)];
    // The protocol restores the prepared amplitude, so the coherence
    // references stay at the preparation alpha.
    const CoherenceMetrics cm = coherence_metrics(s, rc.alpha, rc.cat_sign);
    metrics += std::to_string(i) + "," + format_double(attempt_s[i]) + "," +
               format_double(effective_s[i]) + "," + format_double(row_trace[i]) + "," +
               format_double(cm.mean_photon) + "," + format_double(cm.parity_expect) + "," +
               format_double(cm.wigner_origin) + "," + format_double(cm.cat_fidelity) + "," +
               format_double(cm.mixture_fidelity) + "," + format_double(offdiag_frobenius(s)) +
               "," + format_double(fock01_mass(s)) + "\n";
    detail::write_text_file(dir / detail::indexed_name("state_cycle_", i, ".csv"), detail::state_csv(s));
    if (wig)
      detail::write_text_file(dir / detail::indexed_name("wigner_cycle_", i, ".csv"),
                              detail::wigner_csv(wig->evaluate(s)));
    ++snapshots;
    if (!quiet) {
      char line[160];
      std::snprintf(line, sizeof(line),
                    "  cycle %4d  <n>=%8.5f  <P>=%+9.6f  W(0,0)=%+9.6f  F_cat=%8.6f", i,
                    cm.mean_photon, cm.parity_expect, cm.wigner_origin, cm.cat_fidelity);
      std::cout << line << "\n";
    }
  }

  detail::write_text_file(dir / "metrics.csv", metrics);
  if (!records_csv.empty()) detail::write_text_file(dir / "records.csv", records_csv);
  detail::write_text_file(dir / "manifest.cfg", rc.to_manifest());
  if (!quiet)
    std::cout << "wrote " << snapshots << " snapshot(s) to " << dir.string() << "\n";
  return kExitOk;
}

// Free-decay driver: pure damping of the prepared superposition, with the
// analytic dyad reconstruction as a per-snapshot cross-check column.
inline int cmd_nofeedback(const RunConfig& rc, const std::string& out_dir, bool quiet = false) {
  using detail::format_double;
  rc.validate();
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  fs::create_directories(dir);

  const FieldState rho0 = cat_state(rc.alpha, rc.cat_sign, rc.trunc);
  const std::vector<double> times = rc.nofeedback_times();

  std::unique_ptr<WignerEvaluator> wig;
  if (rc.wigner_enable) wig = std::make_unique<WignerEvaluator>(rc.wigner, rc.trunc);

  std::string metrics =
      "index,time_s,gamma_t,mean_photon,parity_expect,wigner_origin,cat_fidelity,"
      "mixture_fidelity,offdiag_frobenius,fock01_mass,dyad_oracle_trace_distance,"
      "interference_weight\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    const double gamma_t = rc.params.gamma * t;
    const FieldState s = apply_channel(rho0, KrausSet(rc.params.gamma, t, rc.trunc));
    // Free decay shrinks the coherent amplitude; reference it accordingly.
    const Complex alpha_t = rc.alpha * std::exp(-0.5 * gamma_t);
    const CoherenceMetrics cm = coherence_metrics(s, alpha_t, rc.cat_sign);
    const FieldState analytic(analytic_cat_decay(rc.alpha, rc.cat_sign, gamma_t, rc.trunc));
    const double oracle_dist = trace_distance(s, analytic);
    const double interference = std::abs(dyad_decay_scalar(rc.alpha, -rc.alpha, gamma_t));
    metrics += std::to_string(i) + "," + format_double(t) + "," + format_double(gamma_t) + "," +
               format_double(cm.mean_photon) + "," + format_double(cm.parity_expect) + "," +
               format_double(cm.wigner_origin) + "," + format_double(cm.cat_fidelity) + "," +
               format_double(cm.mixture_fidelity) + "," + format_double(offdiag_frobenius(s)) +
               "," + format_double(fock01_mass(s)) + "," + format_double(oracle_dist) + "," +
               format_double(interference) + "\n";
    detail::write_text_file(dir / detail::indexed_name("state_t", static_cast<int>(i), ".csv"),
                            detail::state_csv(s));
    if (wig)
      detail::write_text_file(dir / detail::indexed_name("wigner_t", static_cast<int>(i), ".csv"),
                              detail::wigner_csv(wig->evaluate(s)));
    if (!quiet) {
      char line[160];
      std::snprintf(line, sizeof(line),
                    "  t=%10.6fs (gamma_t=%6.3f)  <P>=%+9.6f  W(0,0)=%+9.6f  oracle_dist=%.3g", t,
                    gamma_t, cm.parity_expect, cm.wigner_origin, oracle_dist);
      std::cout << line << "\n";
    }
  }

  detail::write_text_file(dir / "metrics.csv", metrics);
  detail::write_text_file(dir / "manifest.cfg", rc.to_manifest());
  if (!quiet) std::cout << "wrote " << times.size() << " snapshot(s) to " << dir.string() << "\n";
  return kExitOk;
}

// Excitation-transfer check suite: sweep transfer probabilities per photon
// number, closed-form vs quadrature phase agreement, and the inter-level
// phase spread.
inline int cmd_adiabatic_check(const RunConfig& rc, const std::string& out_dir,
                               bool quiet = false) {
  rc.validate();
  std::vector<CheckRow> rows;

  const double omega = rc.sweep_omega;
  const double delta0 = rc.effective_sweep_delta0();
  const double t_s = rc.effective_sweep_t_s();

  for (int n = 0; n < rc.sweep_transfer_levels; ++n) {
    SweepParams sp{omega, delta0, t_s, n};
    const Eigen::Vector2cd start(1.0, 0.0);  // upper level, n photons
    const SweepResult res = sweep_integrate_converged(sp, start);
    const double transfer = std::norm(res.final_state(1));
    rows.push_back({"transfer_probability_n" + std::to_string(n), transfer, 0.99, ">",
                    transfer > 0.99});
  }

  // Closed form vs numerical quadrature of the sweep phase, on a
  // 3 x 3 x 3 grid of (omega, delta0, t_s) scalings.
  double max_rel = 0.0;
  for (double fo : {0.5, 1.0, 2.0})
    for (double fd : {0.5, 1.0, 2.0})
      for (double ft : {0.5, 1.0, 2.0}) {
        SweepParams sp{omega * fo, delta0 * fd, t_s * ft, 0};
        const double closed = dynamical_phase(sp);
        const double quad = sweep_phase_quadrature(sp);
        max_rel = std::max(max_rel, std::abs(closed - quad) / std::abs(quad));
      }
  rows.push_back({"phase_closed_form_vs_quadrature_max_rel", max_rel, 1e-8, "<", max_rel < 1e-8});

  SweepParams sp0{omega, delta0, t_s, 0};
  const double phi0 = dynamical_phase(sp0);
  double spread = 0.0;
  for (int n = 1; n < rc.sweep_spread_levels; ++n) {
    SweepParams sp{omega, delta0, t_s, n};
    spread = std::max(spread, std::abs(dynamical_phase(sp) - phi0));
  }
  rows.push_back({"phase_spread_max_abs_rad", spread, 0.1, "<", spread < 0.1});

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    detail::write_text_file(std::filesystem::path(out_dir) / "adiabatic_check.csv",
                            detail::check_table_csv(rows));
    detail::write_text_file(std::filesystem::path(out_dir) / "manifest.cfg", rc.to_manifest());
  }
  if (!quiet) detail::print_check_table(rows, std::cout);
  return detail::check_suite_exit(rows);
}

// Joint-system oracle suite: the field-only feedback map against the
// step-by-step three-system replay, across waiting-count combinations.
inline int cmd_oracle_check(const RunConfig& rc, const std::string& out_dir, bool quiet = false) {
  rc.validate();
  // The dense replay space is deliberately small; its truncation tail only
  // needs to sit well below the comparison tolerance, not below the
  // production-run tail budget.
  const TruncationConfig small{rc.oracle_n_max, rc.oracle_n_max, 0.01 * rc.oracle_tol};
  const FieldState rho0 = cat_state(rc.oracle_alpha, rc.cat_sign, small);

  std::vector<CheckRow> rows;
  for (int l : {0, 1, 3})
    for (int q : {0, 1, 3}) {
      const FieldState mapped = cycle_map_fb(rho0, q, l, rc.params, small);
      const FieldState replay = joint_cycle_oracle(rho0, q, l, rc.params, small, true);
      const FieldState replay_mid = joint_cycle_oracle(rho0, q, l, rc.params, small, false);
      const double dist = trace_distance(mapped, replay);
      const double split_delta = trace_distance(replay, replay_mid);
      const std::string tag = "_l" + std::to_string(l) + "_q" + std::to_string(q);
      rows.push_back({"joint_vs_field_map" + tag, dist, rc.oracle_tol, "<",
                      dist < rc.oracle_tol});
      // Sensitivity of the storage-decay bookkeeping: lumping the
      // feedback-crossing exposure before the exchange vs splitting it
      // around the exchange.
      rows.push_back({"storage_split_sensitivity" + tag, split_delta, 0.0, "info", true});
    }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    detail::write_text_file(std::filesystem::path(out_dir) / "oracle_check.csv",
                            detail::check_table_csv(rows));
    detail::write_text_file(std::filesystem::path(out_dir) / "manifest.cfg", rc.to_manifest());
  }
  if (!quiet) detail::print_check_table(rows, std::cout);
  return detail::check_suite_exit(rows);
}

// Timing bookkeeping: cycle-duration formula, protection threshold, and the
// geometric/crossing-time consistency table.
inline int cmd_timing(const RunConfig& rc, const std::string& out_dir, bool quiet = false) {
  rc.validate();
  std::vector<CheckRow> rows;

  const double t_cyc = mean_cycle_time(rc.params);
  const double mean_wait = (1.0 - rc.params.p1) / rc.params.p1;
  const double mean_attempt =
      rc.params.t0 + mean_wait * (rc.params.tau_pr + rc.params.tau_fb);
  rows.push_back({"mean_cycle_time_us", t_cyc * 1e6, 0.0, "info", true});
  rows.push_back({"mean_attempt_time_us", mean_attempt * 1e6, 0.0, "info", true});

  const ProtectionBound bound = protection_bound(rc.params, std::norm(rc.alpha));
  rows.push_back({"protection_threshold_vs_relaxation_s", bound.threshold_s, bound.t_rel_s, "<",
                  bound.satisfied});

  for (const TimingCheck& tc : check_timing_constraints(rc.params)) {
    // The velocity row is a consistency band (within 2 percent of the
    // value implied by the phase condition); the rest are lower bounds.
    const bool band = tc.name == std::string("probe_velocity_pi_half_phase");
    rows.push_back({tc.name, tc.actual, tc.required, band ? "~" : ">", tc.satisfied});
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    detail::write_text_file(std::filesystem::path(out_dir) / "timing.csv",
                            detail::check_table_csv(rows));
    detail::write_text_file(std::filesystem::path(out_dir) / "manifest.cfg", rc.to_manifest());
  }
  if (!quiet) detail::print_check_table(rows, std::cout);
  return detail::check_suite_exit(rows);
}

}  // namespace catfb

#endif  // CATFB_RUNNER_HPP
