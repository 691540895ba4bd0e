#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bgsm/gibbs.hpp"
#include "bgsm/io.hpp"
#include "bgsm/types.hpp"

namespace bgsm {

struct StudyDesign;

enum class PlotSelection { none, selected, all };

/// Settings shared by the fit, tune, bootstrap and report commands. Read from
/// a key = value file; command-line flags are applied afterwards with the same keys.
struct RunConfig {
  std::filesystem::path genotypes;
  std::filesystem::path phenotypes;
  std::filesystem::path groups;
  std::filesystem::path out = ".";
  std::filesystem::path draws;  // report: draws file written by fit/tune

  std::uint64_t seed = 1;
  Index iterations = 10000;
  Index burn_in = 5000;
  Index thin = 1;
  InitKind init = InitKind::zeros;
  double level = 0.95;
  Hyperparams hyper;
  std::string grid = "49";
  int workers = 1;

  bool standardize = true;  // center and scale phenotype columns after loading
  PlotSelection plots = PlotSelection::selected;
  bool save_draws = false;

  Index bootstrap_replicates = 1000;
  std::string cv_grid = "-2:2";
  Index folds = 5;
  std::optional<double> gamma1;  // both set: skip cross-validation
  std::optional<double> gamma2;

  /// Unknown keys and malformed values are an InputError.
  void apply(const KeyValues& values);
  static RunConfig parse(const std::string& text);
  /// Canonical key = value text; its hash goes into the manifest.
  std::string to_config() const;
  SamplerConfig sampler() const;
};

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string config_hash(const std::string& text);

struct RunResult {
  std::vector<std::filesystem::path> files;
  Index failed_chains = 0;
  std::vector<std::string> warnings;
};

/// Loads the three input CSVs and standardizes phenotypes if requested.
Dataset load_inputs(const RunConfig& config);

/// Writes posterior_summary.csv, selection.csv, ranking.csv and plots for one chain.
RunResult write_chain_outputs(const ChainOutput& chain, const Dataset& data,
                              const RunConfig& config);

RunResult run_fit(const RunConfig& config);
RunResult run_tune(const RunConfig& config);
RunResult run_bootstrap(const RunConfig& config);
RunResult run_report(const RunConfig& config);

/// Runs the coverage study and writes coverage.csv. With `dataset_only`, writes one
/// simulated replicate (genotypes.csv, phenotypes.csv, groups.csv, truth.csv) instead.
RunResult run_simulate(const StudyDesign& design, const std::filesystem::path& out,
                       bool dataset_only = false);

/// Draws file: header "draw,sigma2,<snp>|<phenotype>..." (row-major over W), one row per draw.
std::string draws_csv(const ChainOutput& chain, const std::vector<std::string>& snps,
                      const std::vector<std::string>& phenotypes);
struct LoadedDraws {
  std::vector<Matrix> w;
  Vector sigma2;
  std::vector<std::string> snps;
  std::vector<std::string> phenotypes;
};
LoadedDraws load_draws(const std::filesystem::path& path);

/// Writes manifest.json into `out`.
void write_manifest(const std::filesystem::path& out, const std::string& command,
                    std::uint64_t seed, const std::string& config_text, const RunResult& result);

}  // namespace bgsm
