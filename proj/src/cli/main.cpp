#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "orthospec/acceptance.hpp"
#include "orthospec/config.hpp"
#include "orthospec/error.hpp"
#include "orthospec/experiment.hpp"
#include "orthospec/kernels.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitAcceptance = 4;

int exit_code_for(orthospec::ErrorCode code) {
  using orthospec::ErrorCode;
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidParameter:
    case ErrorCode::kIo:
    case ErrorCode::kCapExceeded:
    case ErrorCode::kNotApplicable: return kExitConfig;
    default: return kExitNumeric;
  }
}

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool force = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "experiment config file (TOML subset)");
  cmd->add_option("--seed", f.seed, "root seed, overrides the config");
  cmd->add_option("--out", f.out, "output directory, overrides the config");
  cmd->add_option("--threads", f.threads, "OpenMP threads, overrides the config")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--force", f.force, "allow writing into a non-empty output directory");
}

orthospec::ExperimentConfig resolve(const Flags& f) {
  orthospec::ExperimentConfig cfg;
  if (!f.config.empty()) cfg = orthospec::load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.output_dir = *f.out;
  if (f.threads) cfg.threads = *f.threads;
  if (cfg.threads > 0) orthospec::kernels::set_thread_count(cfg.threads);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral initialization for phase retrieval with orthogonal sensing matrices"};
  app.require_subcommand(1);
  Flags flags;

  auto* predict = app.add_subcommand("predict", "asymptotic predictions over a delta grid");
  auto* sweep = app.add_subcommand("sweep", "simulated spectral estimates against predictions");
  auto* pcaep = app.add_subcommand("pcaep", "PCA-EP iterates against state evolution");
  auto* spectrum = app.add_subcommand("spectrum", "dense spectra of D and E(mu)");
  auto* check = app.add_subcommand("check", "run the acceptance criteria");
  for (auto* cmd : {predict, sweep, pcaep, spectrum}) add_common(cmd, flags);
  std::vector<std::string> only;
  check->add_option("--only", only, "criteria to run, e.g. AC1 AC3");
  check->add_option("--threads", flags.threads, "OpenMP threads")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (check->parsed()) {
      if (flags.threads && *flags.threads > 0) orthospec::kernels::set_thread_count(*flags.threads);
      orthospec::AcceptanceOptions opt;
      opt.only.insert(only.begin(), only.end());
      opt.log = &std::cerr;
      bool all = true;
      for (const auto& r : orthospec::run_acceptance(opt)) {
        std::cout << orthospec::summary_line(r) << '\n';
        all = all && r.passed;
      }
      return all ? kExitOk : kExitAcceptance;
    }
    const orthospec::ExperimentConfig cfg = resolve(flags);
    if (predict->parsed()) orthospec::cmd_predict(cfg, flags.force, std::cerr);
    if (sweep->parsed()) orthospec::cmd_sweep(cfg, flags.force, std::cerr);
    if (pcaep->parsed()) orthospec::cmd_pcaep(cfg, flags.force, std::cerr);
    if (spectrum->parsed()) orthospec::cmd_spectrum(cfg, flags.force, std::cerr);
  } catch (const orthospec::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}
