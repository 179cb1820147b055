// Copyright 2026 The catfb Authors
// SPDX-License-Identifier: Apache-2.0
//
// Configuration: flat `section.key = value` text files with `#` comments.
// Units are embedded in key names (..._per_s, ..._us, ..._m) so a config is
// unambiguous without a manual. Unknown keys are errors — a typo must not
// silently fall back to a default. The manifest emitted next to run outputs
// echoes every effective value and re-parses as a config, so any run can be
// reproduced from its artifacts alone.

#ifndef CATFB_CONFIG_HPP
#define CATFB_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <climits>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "catfb/analysis.hpp"
#include "catfb/errors.hpp"
#include "catfb/feedback.hpp"
#include "catfb/fock.hpp"
#include "catfb/version.hpp"

namespace catfb {

namespace detail {

inline std::string trimmed(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Round-trip-safe double formatting for manifests and CSV cells.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Unit value to write for a quantity the parser will rescale: the u nearest
// x / parse_scale with parse_scale * u == x bitwise, so an emitted manifest
// re-parses to exactly the in-memory value instead of drifting by an ulp per
// write/read cycle. Falls back to the nearest representative if no exact
// preimage exists within a few ulps (not expected for power-of-ten scales).
inline double manifest_unit_value(double x, double parse_scale) {
  double u = x / parse_scale;
  if (parse_scale * u == x) return u;
  double up = u, dn = u;
  for (int step = 0; step < 4; ++step) {
    up = std::nextafter(up, std::numeric_limits<double>::infinity());
    if (parse_scale * up == x) return up;
    dn = std::nextafter(dn, -std::numeric_limits<double>::infinity());
    if (parse_scale * dn == x) return dn;
  }
  return u;
}

}  // namespace detail

// Parsed key-value file with consumption tracking: every key read through a
// getter is marked, and check_all_consumed() rejects leftovers.
class ConfigMap {
 public:
  static ConfigMap from_text(const std::string& text) {
    ConfigMap out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trimmed(line);
      if (line.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = detail::trimmed(line.substr(0, eq));
      const std::string value = detail::trimmed(line.substr(eq + 1));
      if (key.empty())
        throw config_error("config line " + std::to_string(lineno) + ": empty key");
      if (!out.values_.emplace(key, value).second)
        throw config_error("config: duplicate key '" + key + "'");
    }
    return out;
  }

  static ConfigMap from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw config_error("config: missing key '" + key + "'");
    consumed_.insert(key);
    return it->second;
  }
  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
  }

  double get_double(const std::string& key) const { return parse_double(key, get_string(key)); }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  int get_int(const std::string& key) const {
    const std::string v = get_string(key);
    char* end = nullptr;
    errno = 0;
    const long long n = std::strtoll(v.c_str(), &end, 10);
    if (errno != 0 || end == v.c_str() || *end != '\0' || n < INT_MIN || n > INT_MAX)
      throw config_error("config: key '" + key + "' is not an integer: '" + v + "'");
    return static_cast<int>(n);
  }
  int get_int(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::uint64_t get_uint64(const std::string& key) const {
    const std::string v = get_string(key);
    if (!v.empty() && v[0] == '-')
      throw config_error("config: key '" + key + "' must be non-negative: '" + v + "'");
    char* end = nullptr;
    errno = 0;
    const unsigned long long n = std::strtoull(v.c_str(), &end, 10);
    if (errno != 0 || end == v.c_str() || *end != '\0')
      throw config_error("config: key '" + key + "' is not an unsigned integer: '" + v + "'");
    return static_cast<std::uint64_t>(n);
  }

  bool get_bool(const std::string& key) const {
    const std::string v = get_string(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw config_error("config: key '" + key + "' must be true/false: '" + v + "'");
  }
  bool get_bool(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
  }

  std::vector<double> get_double_list(const std::string& key) const {
    const std::string v = get_string(key);
    std::vector<double> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(parse_double(key, detail::trimmed(item)));
    if (out.empty()) throw config_error("config: key '" + key + "' holds an empty list");
    return out;
  }

  void check_all_consumed() const {
    std::string unknown;
    for (const auto& [key, value] : values_)
      if (consumed_.count(key) == 0) unknown += (unknown.empty() ? "" : ", ") + key;
    if (!unknown.empty()) throw config_error("config: unknown key(s): " + unknown);
  }

 private:
  double parse_double(const std::string& key, const std::string& v) const {
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(v.c_str(), &end);
    if (errno != 0 || end == v.c_str() || *end != '\0' || !std::isfinite(d))
      throw config_error("config: key '" + key + "' is not a finite number: '" + v + "'");
    return d;
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

// Complete, validated description of one experiment.
struct RunConfig {
  TruncationConfig trunc;
  FeedbackParams params;

  Complex alpha{std::sqrt(3.3), 0.0};  // preparation amplitude
  int cat_sign = -1;                   // -1: odd superposition, +1: even

  EvolveMode mode = EvolveMode::kAveraged;
  int n_cycles = 13;
  int n_trajectories = 1;   // monte carlo only
  bool has_seed = false;
  std::uint64_t seed = 0;   // required when mode == monte_carlo
  int snapshot_stride = 1;
  double tail_eps = 1e-6;   // averaged-map geometric tail bound

  bool wigner_enable = true;
  WignerGridSpec wigner;

  // Free-decay snapshot times; empty means "derive defaults from params"
  // (see nofeedback_times()).
  std::vector<double> nofeedback_times_s;

  // Excitation-transfer sweep checks. Zero means "derive from omega": the
  // documented operating regime delta0 = 20 omega sqrt(6), t_s = 200/omega.
  double sweep_omega = 2.0 * M_PI * 24e3;
  double sweep_delta0 = 0.0;
  double sweep_t_s = 0.0;
  int sweep_transfer_levels = 6;  // transfer check on n = 0..levels-1
  int sweep_spread_levels = 9;    // phase-spread check on n = 0..levels-1

  // Joint-oracle cross-check (small dense space).
  int oracle_n_max = 12;
  Complex oracle_alpha{1.0, 0.0};
  double oracle_tol = 1e-8;

  double effective_sweep_delta0() const {
    return sweep_delta0 > 0.0 ? sweep_delta0 : 20.0 * std::sqrt(6.0) * sweep_omega;
  }
  double effective_sweep_t_s() const {
    return sweep_t_s > 0.0 ? sweep_t_s : 200.0 / sweep_omega;
  }

  // Configured free-decay times, or the derived default ladder: fractions
  // {0, 1/4, 1/2, 1, 2} of the relaxation time 1/gamma, plus the protection-
  // relevant point 2 * mean_cycle_time (one cycle's worth of decoherence
  // exposure for a one-photon-sensitive superposition).
  std::vector<double> nofeedback_times() const {
    if (!nofeedback_times_s.empty()) return nofeedback_times_s;
    const double t_rel = 1.0 / params.gamma;
    std::vector<double> t{0.0, 2.0 * mean_cycle_time(params), 0.25 * t_rel, 0.5 * t_rel,
                          1.0 * t_rel, 2.0 * t_rel};
    std::sort(t.begin(), t.end());
    return t;
  }

  void validate() const {
    trunc.validate();
    params.validate();
    if (cat_sign != 1 && cat_sign != -1) throw config_error("state.cat_sign must be +1 or -1");
    if (n_cycles < 0) throw config_error("run.n_cycles must be >= 0");
    if (n_trajectories < 1) throw config_error("run.n_trajectories must be >= 1");
    if (snapshot_stride < 1) throw config_error("run.snapshot_stride must be >= 1");
    if (!(tail_eps > 0.0 && tail_eps < 1.0)) throw config_error("run.tail_eps must be in (0, 1)");
    if (mode == EvolveMode::kMonteCarlo && !has_seed)
      throw config_error("run.seed is required when run.mode = monte_carlo");
    if (wigner_enable) wigner.validate();
    for (double t : nofeedback_times_s)
      if (t < 0.0) throw config_error("nofeedback.times_s entries must be >= 0");
    if (sweep_omega <= 0.0) throw config_error("adiabatic.omega_rad_per_s must be > 0");
    if (sweep_delta0 < 0.0) throw config_error("adiabatic.delta0_rad_per_s must be >= 0");
    if (sweep_t_s < 0.0) throw config_error("adiabatic.t_s_s must be >= 0");
    if (sweep_transfer_levels < 1 || sweep_spread_levels < 1)
      throw config_error("adiabatic level counts must be >= 1");
    if (oracle_n_max < 1 || oracle_n_max > 15)
      throw config_error("oracle.n_max must be in [1, 15]");
    if (!(oracle_tol > 0.0)) throw config_error("oracle.tolerance must be > 0");
  }

  static RunConfig from_config(const ConfigMap& cfg) {
    RunConfig rc;
    rc.trunc.n_max = cfg.get_int("truncation.n_max", rc.trunc.n_max);
    rc.trunc.k_max = cfg.get_int("truncation.k_max", rc.trunc.n_max);
    rc.trunc.tail_tol = cfg.get_double("truncation.tail_tol", rc.trunc.tail_tol);

    FeedbackParams& p = rc.params;
    p.gamma = cfg.get_double("protocol.gamma_per_s", p.gamma);
    p.gamma_prime = cfg.get_double("protocol.gamma_prime_per_s", p.gamma_prime);
    // Defaults go through the same exact-preimage mapping as the manifest so
    // an absent key reproduces the built-in value bitwise after rescaling.
    using detail::manifest_unit_value;
    p.t0 = 1e-6 * cfg.get_double("protocol.t0_us", manifest_unit_value(p.t0, 1e-6));
    p.tau_pr = 1e-6 * cfg.get_double("protocol.tau_pr_us", manifest_unit_value(p.tau_pr, 1e-6));
    p.tau_fb = 1e-6 * cfg.get_double("protocol.tau_fb_us", manifest_unit_value(p.tau_fb, 1e-6));
    p.t_cr_pr = 1e-6 * cfg.get_double("protocol.t_cr_pr_us", manifest_unit_value(p.t_cr_pr, 1e-6));
    p.t_cr_fb = 1e-6 * cfg.get_double("protocol.t_cr_fb_us", manifest_unit_value(p.t_cr_fb, 1e-6));
    p.p1 = cfg.get_double("protocol.p1", p.p1);
    p.p_r = cfg.get_double("protocol.p_r", p.p_r);
    p.omega = cfg.get_double("protocol.omega_rad_per_s", p.omega);
    p.omega_prime = cfg.get_double("protocol.omega_prime_rad_per_s", p.omega_prime);
    p.delta = cfg.get_double("protocol.delta_rad_per_s", p.delta);
    p.l_cavity = cfg.get_double("protocol.l_cavity_m", p.l_cavity);
    p.v_pr = cfg.get_double("protocol.v_pr_m_per_s", p.v_pr);
    p.v_fb = cfg.get_double("protocol.v_fb_m_per_s", p.v_fb);

    rc.alpha = Complex(cfg.get_double("state.alpha_re", rc.alpha.real()),
                       cfg.get_double("state.alpha_im", rc.alpha.imag()));
    rc.cat_sign = cfg.get_int("state.cat_sign", rc.cat_sign);

    const std::string mode = cfg.get_string("run.mode", "averaged");
    if (mode == "averaged")
      rc.mode = EvolveMode::kAveraged;
    else if (mode == "monte_carlo")
      rc.mode = EvolveMode::kMonteCarlo;
    else
      throw config_error("run.mode must be 'averaged' or 'monte_carlo', got '" + mode + "'");
    rc.n_cycles = cfg.get_int("run.n_cycles", rc.n_cycles);
    rc.n_trajectories = cfg.get_int("run.n_trajectories", rc.n_trajectories);
    if (cfg.has("run.seed")) {
      rc.seed = cfg.get_uint64("run.seed");
      rc.has_seed = true;
    }
    rc.snapshot_stride = cfg.get_int("run.snapshot_stride", rc.snapshot_stride);
    rc.tail_eps = cfg.get_double("run.tail_eps", rc.tail_eps);

    rc.wigner_enable = cfg.get_bool("wigner.enable", rc.wigner_enable);
    rc.wigner.x_min = cfg.get_double("wigner.x_min", rc.wigner.x_min);
    rc.wigner.x_max = cfg.get_double("wigner.x_max", rc.wigner.x_max);
    rc.wigner.nx = cfg.get_int("wigner.nx", rc.wigner.nx);
    rc.wigner.p_min = cfg.get_double("wigner.p_min", rc.wigner.p_min);
    rc.wigner.p_max = cfg.get_double("wigner.p_max", rc.wigner.p_max);
    rc.wigner.np = cfg.get_int("wigner.np", rc.wigner.np);

    if (cfg.has("nofeedback.times_s"))
      rc.nofeedback_times_s = cfg.get_double_list("nofeedback.times_s");

    rc.sweep_omega = cfg.get_double("adiabatic.omega_rad_per_s", rc.sweep_omega);
    rc.sweep_delta0 = cfg.get_double("adiabatic.delta0_rad_per_s", rc.sweep_delta0);
    rc.sweep_t_s = cfg.get_double("adiabatic.t_s_s", rc.sweep_t_s);
    rc.sweep_transfer_levels = cfg.get_int("adiabatic.transfer_levels", rc.sweep_transfer_levels);
    rc.sweep_spread_levels = cfg.get_int("adiabatic.spread_levels", rc.sweep_spread_levels);

    rc.oracle_n_max = cfg.get_int("oracle.n_max", rc.oracle_n_max);
    rc.oracle_alpha = Complex(cfg.get_double("oracle.alpha_re", rc.oracle_alpha.real()),
                              cfg.get_double("oracle.alpha_im", rc.oracle_alpha.imag()));
    rc.oracle_tol = cfg.get_double("oracle.tolerance", rc.oracle_tol);

    cfg.check_all_consumed();
    rc.validate();
    return rc;
  }

  static RunConfig from_file(const std::string& path) {
    return from_config(ConfigMap::from_file(path));
  }

  // Re-parseable echo of every effective value. Versions ride along as
  // comments so the file stays a valid config.
  std::string to_manifest() const;
};

inline std::string RunConfig::to_manifest() const {
  using detail::format_double;
  std::ostringstream out;
  out << "# catfb manifest: effective configuration echo; re-runnable as-is\n";
  out << "# catfb_version = " << CATFB_VERSION_STRING << "\n";
  out << "# eigen_version = " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
      << EIGEN_MINOR_VERSION << "\n";
  out << "truncation.n_max = " << trunc.n_max << "\n";
  out << "truncation.k_max = " << trunc.k_max << "\n";
  out << "truncation.tail_tol = " << format_double(trunc.tail_tol) << "\n";
  out << "protocol.gamma_per_s = " << format_double(params.gamma) << "\n";
  out << "protocol.gamma_prime_per_s = " << format_double(params.gamma_prime) << "\n";
  // Microsecond keys are rescaled by the parser; emit the exact preimage so
  // the echoed value reproduces the in-memory seconds bitwise.
  using detail::manifest_unit_value;
  out << "protocol.t0_us = " << format_double(manifest_unit_value(params.t0, 1e-6)) << "\n";
  out << "protocol.tau_pr_us = " << format_double(manifest_unit_value(params.tau_pr, 1e-6)) << "\n";
  out << "protocol.tau_fb_us = " << format_double(manifest_unit_value(params.tau_fb, 1e-6)) << "\n";
  out << "protocol.t_cr_pr_us = " << format_double(manifest_unit_value(params.t_cr_pr, 1e-6))
      << "\n";
  out << "protocol.t_cr_fb_us = " << format_double(manifest_unit_value(params.t_cr_fb, 1e-6))
      << "\n";
  out << "protocol.p1 = " << format_double(params.p1) << "\n";
  out << "protocol.p_r = " << format_double(params.p_r) << "\n";
  out << "protocol.omega_rad_per_s = " << format_double(params.omega) << "\n";
  out << "protocol.omega_prime_rad_per_s = " << format_double(params.omega_prime) << "\n";
  out << "protocol.delta_rad_per_s = " << format_double(params.delta) << "\n";
  out << "protocol.l_cavity_m = " << format_double(params.l_cavity) << "\n";
  out << "protocol.v_pr_m_per_s = " << format_double(params.v_pr) << "\n";
  out << "protocol.v_fb_m_per_s = " << format_double(params.v_fb) << "\n";
  out << "state.alpha_re = " << format_double(alpha.real()) << "\n";
  out << "state.alpha_im = " << format_double(alpha.imag()) << "\n";
  out << "state.cat_sign = " << cat_sign << "\n";
  out << "run.mode = " << (mode == EvolveMode::kAveraged ? "averaged" : "monte_carlo") << "\n";
  out << "run.n_cycles = " << n_cycles << "\n";
  out << "run.n_trajectories = " << n_trajectories << "\n";
  if (has_seed) out << "run.seed = " << seed << "\n";
  out << "run.snapshot_stride = " << snapshot_stride << "\n";
  out << "run.tail_eps = " << format_double(tail_eps) << "\n";
  out << "wigner.enable = " << (wigner_enable ? "true" : "false") << "\n";
  out << "wigner.x_min = " << format_double(wigner.x_min) << "\n";
  out << "wigner.x_max = " << format_double(wigner.x_max) << "\n";
  out << "wigner.nx = " << wigner.nx << "\n";
  out << "wigner.p_min = " << format_double(wigner.p_min) << "\n";
  out << "wigner.p_max = " << format_double(wigner.p_max) << "\n";
  out << "wigner.np = " << wigner.np << "\n";
  {
    const std::vector<double> times = nofeedback_times();
    out << "nofeedback.times_s = ";
    for (std::size_t i = 0; i < times.size(); ++i)
      out << (i ? "," : "") << format_double(times[i]);
    out << "\n";
  }
  out << "adiabatic.omega_rad_per_s = " << format_double(sweep_omega) << "\n";
  out << "adiabatic.delta0_rad_per_s = " << format_double(effective_sweep_delta0()) << "\n";
  out << "adiabatic.t_s_s = " << format_double(effective_sweep_t_s()) << "\n";
  out << "adiabatic.transfer_levels = " << sweep_transfer_levels << "\n";
  out << "adiabatic.spread_levels = " << sweep_spread_levels << "\n";
  out << "oracle.n_max = " << oracle_n_max << "\n";
  out << "oracle.alpha_re = " << format_double(oracle_alpha.real()) << "\n";
  out << "oracle.alpha_im = " << format_double(oracle_alpha.imag()) << "\n";
  out << "oracle.tolerance = " << format_double(oracle_tol) << "\n";
  return out.str();
}

}  // namespace catfb

#endif  // CATFB_CONFIG_HPP
