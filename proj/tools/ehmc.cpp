#include <iostream>
#include <numbers>
#include <string>

#include <CLI11.hpp>

#include "ehmc/cli.hpp"

namespace {

void add_sampling_flags(CLI::App* cmd, ehmc::cli::SampleOptions& opt) {
  cmd->add_option("model", opt.model_path, "Model document")->required();
  cmd->add_option("--n", opt.n, "Number of kept samples")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", opt.seed, "RNG seed");
  cmd->add_option("--tmax", opt.t_max, "Integration time per iterate (default pi/2)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--region", opt.region, "Initial region (1-based); defaults to the model's init block");
  cmd->add_option("--init", opt.init, "Initial point, comma-separated")->delimiter(',');
  cmd->add_option("--burnin", opt.burn_in, "Iterates discarded before recording")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--thin", opt.thin, "Keep every k-th iterate")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", opt.tol, "Validation and initial-point tolerance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact HMC sampling of piecewise Gaussians on piecewise affine level sets", "ehmc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ehmc::kToolVersion);

  std::string validate_path;
  double validate_tol = 1e-8;
  auto* validate = app.add_subcommand("validate", "Check a model document");
  validate->add_option("model", validate_path, "Model document")->required();
  validate->add_option("--tol", validate_tol, "Continuity tolerance");

  ehmc::cli::SampleOptions sample_opt;
  auto* sample = app.add_subcommand("sample", "Run chains and write samples");
  add_sampling_flags(sample, sample_opt);
  sample->add_option("--out", sample_opt.out, "Samples CSV path")->required();
  sample->add_option("--events", sample_opt.events, "Event log path (JSON lines)");
  sample->add_option("--chains", sample_opt.chains, "Independent chains run concurrently")
      ->check(CLI::PositiveNumber);

  ehmc::cli::SampleOptions diag_opt;
  diag_opt.n = 2000;
  auto* diagnose = app.add_subcommand("diagnose", "Short chain with invariant checks");
  add_sampling_flags(diagnose, diag_opt);

  std::string manifest_path, replay_out, replay_events;
  auto* replay = app.add_subcommand("replay", "Re-run a recorded sample invocation");
  replay->add_option("manifest", manifest_path, "Run manifest")->required();
  replay->add_option("--out", replay_out, "Write samples here instead of the recorded path");
  replay->add_option("--events", replay_events, "Write events here instead of the recorded path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : ehmc::cli::kIo;
  }

  if (*validate) return ehmc::cli::cmd_validate(validate_path, validate_tol, std::cout, std::cerr);
  if (*sample) return ehmc::cli::cmd_sample(sample_opt, std::cout, std::cerr);
  if (*diagnose) return ehmc::cli::cmd_diagnose(diag_opt, std::cout, std::cerr);
  if (*replay) return ehmc::cli::cmd_replay(manifest_path, replay_out, replay_events, std::cout, std::cerr);
  return ehmc::cli::kIo;
}
