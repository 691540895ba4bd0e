#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bgsm/error.hpp"
#include "bgsm/io.hpp"
#include "bgsm/pipeline.hpp"
#include "bgsm/simulation.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kNumericalError = 3;
constexpr int kPartial = 4;

struct Flags {
  std::string config;
  std::optional<std::string> genotypes, phenotypes, groups, out, draws, grid;
  std::optional<std::uint64_t> seed;
  std::optional<long> iterations, burn_in, thin, chains_parallel;
  std::optional<double> level;
  bool dataset_only = false;
};

void add_common(CLI::App* cmd, Flags& f, bool data_inputs) {
  cmd->add_option("--config", f.config, "key = value settings file");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--level", f.level, "credible / confidence level");
  cmd->add_option("--chains-parallel", f.chains_parallel, "worker threads");
  if (data_inputs) {
    cmd->add_option("--genotypes", f.genotypes, "genotype CSV");
    cmd->add_option("--phenotypes", f.phenotypes, "phenotype CSV");
    cmd->add_option("--groups", f.groups, "SNP to gene map CSV (snp_id,gene_id)");
  }
}

void add_sampler(CLI::App* cmd, Flags& f) {
  cmd->add_option("--iterations", f.iterations, "Gibbs iterations");
  cmd->add_option("--burn-in", f.burn_in, "discarded initial iterations");
  cmd->add_option("--thin", f.thin, "keep every n-th draw");
}

bgsm::KeyValues overrides(const Flags& f, const std::string& command) {
  bgsm::KeyValues kv;
  auto put = [&](const char* key, const auto& value) {
    if (!value) return;
    if constexpr (std::is_same_v<std::decay_t<decltype(*value)>, std::string>) {
      kv.entries.emplace_back(key, *value);
    } else if constexpr (std::is_same_v<std::decay_t<decltype(*value)>, double>) {
      kv.entries.emplace_back(key, bgsm::format_double(*value));
    } else {
      kv.entries.emplace_back(key, std::to_string(*value));
    }
  };
  put("genotypes", f.genotypes);
  put("phenotypes", f.phenotypes);
  put("groups", f.groups);
  put("out", f.out);
  put("draws", f.draws);
  put(command == "bootstrap" ? "cv_grid" : "grid", f.grid);
  put("seed", f.seed);
  put("iterations", f.iterations);
  put("burn_in", f.burn_in);
  put("thin", f.thin);
  put("chains_parallel", f.chains_parallel);
  put("level", f.level);
  return kv;
}

int finish(const bgsm::RunResult& result) {
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  return result.failed_chains > 0 ? kPartial : kOk;
}

int run(const std::string& command, const Flags& flags) {
  if (command == "simulate") {
    bgsm::StudyDesign design =
        flags.config.empty() ? bgsm::StudyDesign{}
                             : bgsm::StudyDesign::parse(bgsm::read_text_file(flags.config));
    if (flags.seed) design.seed = *flags.seed;
    if (flags.iterations) design.iterations = *flags.iterations;
    if (flags.burn_in) design.burn_in = *flags.burn_in;
    if (flags.thin) design.thin = *flags.thin;
    if (flags.level) design.level = *flags.level;
    if (flags.grid) design.bayes_grid = *flags.grid;
    if (flags.chains_parallel) design.workers = static_cast<int>(*flags.chains_parallel);
    const std::string out = flags.out.value_or(".");
    const auto result = bgsm::run_simulate(design, out, flags.dataset_only);
    bgsm::write_manifest(out, flags.dataset_only ? "simulate --dataset-only" : "simulate",
                         design.seed, design.to_config(), result);
    return finish(result);
  }

  bgsm::RunConfig config;
  if (!flags.config.empty()) config.apply(bgsm::parse_key_values(bgsm::read_text_file(flags.config)));
  config.apply(overrides(flags, command));
  bgsm::RunResult result;
  if (command == "fit") result = bgsm::run_fit(config);
  else if (command == "tune") result = bgsm::run_tune(config);
  else if (command == "bootstrap") result = bgsm::run_bootstrap(config);
  else result = bgsm::run_report(config);
  bgsm::write_manifest(config.out, command, config.seed, config.to_config(), result);
  return finish(result);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian group sparse multi-task regression"};
  app.set_version_flag("--version", BGSM_VERSION);
  app.require_subcommand(1);
  Flags flags;

  auto* fit = app.add_subcommand("fit", "Gibbs sampler at one (lambda1^2, lambda2^2) pair");
  add_common(fit, flags, true);
  add_sampler(fit, flags);

  auto* tune = app.add_subcommand("tune", "WAIC search over a tuning grid");
  add_common(tune, flags, true);
  add_sampler(tune, flags);
  tune->add_option("--grid", flags.grid, "full, 49, LO:HI, a,b,c or a,b/c,d");

  auto* boot = app.add_subcommand("bootstrap", "penalized estimate with bootstrap intervals");
  add_common(boot, flags, true);
  boot->add_option("--grid", flags.grid, "cross-validation grid for (gamma1, gamma2)");

  auto* sim = app.add_subcommand("simulate", "coverage study from a design file");
  add_common(sim, flags, false);
  add_sampler(sim, flags);
  sim->add_option("--grid", flags.grid, "tuning grid for the Bayesian fits, or 'truth'");
  sim->add_flag("--dataset-only", flags.dataset_only, "write one simulated dataset and stop");

  auto* report = app.add_subcommand("report", "intervals, selection, ranking and plots from draws");
  add_common(report, flags, false);
  report->add_option("--draws", flags.draws, "draws.csv written by fit or tune with save_draws");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, flags);
  } catch (const bgsm::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::domain_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalError;
  }
}
