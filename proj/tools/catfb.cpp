// Copyright 2026 The catfb Authors
// SPDX-License-Identifier: Apache-2.0
//
// catfb — batch front end for the cavity-field feedback simulator.
//
// Subcommands:
//   run              evolve the prepared state under the feedback protocol
//   nofeedback       free decay of the same state, with analytic cross-checks
//   adiabatic-check  excitation-transfer sweep check suite
//   oracle-check     field-map vs joint-system replay check suite
//   timing           cycle-duration and crossing-time consistency table
//
// Exit codes: 0 success; 1 configuration error; 2 numerical guard tripped;
// 3 a check suite completed with failures.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "catfb/catfb.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  bool quiet = false;
  bool has_seed = false;
  std::uint64_t seed = 0;
};

void add_common_flags(CLI::App* cmd, CommonArgs* args, const std::string& default_out) {
  cmd->add_option("--config", args->config_path, "configuration file (key = value lines)")
      ->required();
  cmd->add_option("--out", args->out_dir, "output directory")->default_val(default_out);
  cmd->add_option("--seed", args->seed, "override run.seed from the config");
  cmd->add_flag("--quiet", args->quiet, "suppress progress output");
}

catfb::RunConfig load_config(const CommonArgs& args, const CLI::App* cmd) {
  catfb::RunConfig rc = catfb::RunConfig::from_file(args.config_path);
  if (cmd->count("--seed") > 0) {
    rc.seed = args.seed;
    rc.has_seed = true;
    rc.validate();
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stroboscopic feedback protection of a cavity field — batch simulator"};
  app.require_subcommand(1);

  CommonArgs run_args, nofb_args, adia_args, oracle_args, timing_args;
  CLI::App* cmd_run = app.add_subcommand("run", "feedback-protocol evolution");
  add_common_flags(cmd_run, &run_args, "catfb_out/run");
  CLI::App* cmd_nofb = app.add_subcommand("nofeedback", "free decay, no feedback");
  add_common_flags(cmd_nofb, &nofb_args, "catfb_out/nofeedback");
  CLI::App* cmd_adia = app.add_subcommand("adiabatic-check", "excitation-transfer checks");
  add_common_flags(cmd_adia, &adia_args, "catfb_out/adiabatic_check");
  CLI::App* cmd_oracle = app.add_subcommand("oracle-check", "joint-system replay checks");
  add_common_flags(cmd_oracle, &oracle_args, "catfb_out/oracle_check");
  CLI::App* cmd_timing = app.add_subcommand("timing", "timing consistency table");
  add_common_flags(cmd_timing, &timing_args, "catfb_out/timing");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed())
      return catfb::cmd_run(load_config(run_args, cmd_run), run_args.out_dir, run_args.quiet);
    if (cmd_nofb->parsed())
      return catfb::cmd_nofeedback(load_config(nofb_args, cmd_nofb), nofb_args.out_dir,
                                   nofb_args.quiet);
    if (cmd_adia->parsed())
      return catfb::cmd_adiabatic_check(load_config(adia_args, cmd_adia), adia_args.out_dir,
                                        adia_args.quiet);
    if (cmd_oracle->parsed())
      return catfb::cmd_oracle_check(load_config(oracle_args, cmd_oracle), oracle_args.out_dir,
                                     oracle_args.quiet);
    if (cmd_timing->parsed())
      return catfb::cmd_timing(load_config(timing_args, cmd_timing), timing_args.out_dir,
                               timing_args.quiet);
  } catch (const catfb::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return catfb::kExitConfigError;
  } catch (const catfb::truncation_error& e) {
    std::cerr << "numerical guard: " << e.what() << "\n";
    return catfb::kExitNumericalGuard;
  } catch (const catfb::tolerance_error& e) {
    std::cerr << "numerical guard: " << e.what() << "\n";
    return catfb::kExitNumericalGuard;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return catfb::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return catfb::kExitConfigError;
  }
  return catfb::kExitOk;
}
