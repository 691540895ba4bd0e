#include "bgsm/pipeline.hpp"

#include <boost/version.hpp>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "bgsm/error.hpp"
#include "bgsm/report.hpp"
#include "bgsm/simulation.hpp"
#include "bgsm/tuning.hpp"
#include "bgsm/wang.hpp"

namespace bgsm {
namespace {

Index parse_count(const std::string& key, const std::string& value) {
  const long v = parse_long(value);
  if (v < 0) throw InputError(key + " must be non-negative");
  return static_cast<Index>(v);
}

std::string init_name(InitKind kind) {
  switch (kind) {
    case InitKind::zeros: return "zeros";
    case InitKind::wang: return "wang";
    case InitKind::user: return "user";
  }
  return "zeros";
}

std::string plots_name(PlotSelection p) {
  switch (p) {
    case PlotSelection::none: return "none";
    case PlotSelection::selected: return "selected";
    case PlotSelection::all: return "all";
  }
  return "selected";
}

std::string safe_file_stem(const std::string& name) {
  std::string out = name;
  for (char& ch : out) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                    ch == '_' || ch == '-' || ch == '.';
    if (!ok) ch = '_';
  }
  return out.empty() ? "snp" : out;
}

void emit(RunResult& result, const std::filesystem::path& path, const std::string& text) {
  write_text_file(path, text);
  result.files.push_back(path);
}

void prepare_out(const std::filesystem::path& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw InputError("cannot create output directory " + out.string() + ": " + ec.message());
}

void write_report_files(const IntervalReport& report, const Matrix& w_hat, const RunConfig& config,
                        RunResult& result) {
  emit(result, config.out / "posterior_summary.csv", posterior_summary_csv(report));
  emit(result, config.out / "selection.csv", selection_csv(report));
  emit(result, config.out / "ranking.csv", ranking_csv(report, w_hat));
  if (config.plots == PlotSelection::none) return;
  const std::filesystem::path dir = config.out / "plots";
  prepare_out(dir);
  for (Index i = 0; i < report.num_snps(); ++i) {
    if (config.plots == PlotSelection::selected && !report.snp_selected(i)) continue;
    const auto path = dir / (safe_file_stem(report.snp_names[i]) + ".svg");
    emit(result, path, render_interval_plot(report, i, nullptr));
  }
}

}  // namespace

void RunConfig::apply(const KeyValues& values) {
  for (const auto& [key, value] : values.entries) {
    if (key == "genotypes") genotypes = value;
    else if (key == "phenotypes") phenotypes = value;
    else if (key == "groups") groups = value;
    else if (key == "out") out = value;
    else if (key == "draws") draws = value;
    else if (key == "seed") seed = parse_u64(value);
    else if (key == "iterations") iterations = parse_count(key, value);
    else if (key == "burn_in") burn_in = parse_count(key, value);
    else if (key == "thin") thin = parse_count(key, value);
    else if (key == "init") {
      if (value == "zeros") init = InitKind::zeros;
      else if (value == "wang") init = InitKind::wang;
      else throw InputError("init must be 'zeros' or 'wang', got '" + value + "'");
    } else if (key == "level") level = parse_double(value);
    else if (key == "lambda1_sq") hyper.lambda1_sq = parse_double(value);
    else if (key == "lambda2_sq") hyper.lambda2_sq = parse_double(value);
    else if (key == "a_sigma") hyper.a_sigma = parse_double(value);
    else if (key == "b_sigma") hyper.b_sigma = parse_double(value);
    else if (key == "grid") grid = value;
    else if (key == "chains_parallel") workers = static_cast<int>(parse_count(key, value));
    else if (key == "standardize") standardize = parse_bool(value);
    else if (key == "plots") {
      if (value == "none") plots = PlotSelection::none;
      else if (value == "selected") plots = PlotSelection::selected;
      else if (value == "all") plots = PlotSelection::all;
      else throw InputError("plots must be none, selected or all, got '" + value + "'");
    } else if (key == "save_draws") save_draws = parse_bool(value);
    else if (key == "bootstrap_replicates") bootstrap_replicates = parse_count(key, value);
    else if (key == "cv_grid") cv_grid = value;
    else if (key == "folds") folds = parse_count(key, value);
    else if (key == "gamma1") gamma1 = parse_double(value);
    else if (key == "gamma2") gamma2 = parse_double(value);
    else throw InputError("unknown config key '" + key + "'");
  }
  if (!(level > 0.0 && level < 1.0)) throw InputError("level must lie in (0, 1)");
  if (workers < 1) throw InputError("chains_parallel must be at least 1");
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig config;
  config.apply(parse_key_values(text));
  return config;
}

std::string RunConfig::to_config() const {
  std::ostringstream s;
  s << "genotypes = " << genotypes.string() << "\nphenotypes = " << phenotypes.string()
    << "\ngroups = " << groups.string() << "\nout = " << out.string()
    << "\ndraws = " << draws.string() << "\nseed = " << seed << "\niterations = " << iterations
    << "\nburn_in = " << burn_in << "\nthin = " << thin << "\ninit = " << init_name(init)
    << "\nlevel = " << format_double(level)
    << "\nlambda1_sq = " << format_double(hyper.lambda1_sq)
    << "\nlambda2_sq = " << format_double(hyper.lambda2_sq)
    << "\na_sigma = " << format_double(hyper.a_sigma)
    << "\nb_sigma = " << format_double(hyper.b_sigma) << "\ngrid = " << grid
    << "\nchains_parallel = " << workers << "\nstandardize = " << (standardize ? "true" : "false")
    << "\nplots = " << plots_name(plots) << "\nsave_draws = " << (save_draws ? "true" : "false")
    << "\nbootstrap_replicates = " << bootstrap_replicates << "\ncv_grid = " << cv_grid
    << "\nfolds = " << folds;
  if (gamma1) s << "\ngamma1 = " << format_double(*gamma1);
  if (gamma2) s << "\ngamma2 = " << format_double(*gamma2);
  s << '\n';
  return s.str();
}

SamplerConfig RunConfig::sampler() const {
  SamplerConfig c;
  c.iterations = iterations;
  c.burn_in = burn_in;
  c.thin = thin;
  c.seed = seed;
  c.init = init;
  c.validate();
  return c;
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Dataset load_inputs(const RunConfig& config) {
  if (config.genotypes.empty() || config.phenotypes.empty() || config.groups.empty()) {
    throw InputError("--genotypes, --phenotypes and --groups are all required");
  }
  Dataset data = load_dataset(config.genotypes, config.phenotypes, config.groups);
  if (config.standardize) {
    data.y = standardize_phenotypes(data.y, data.phenotype_names).y;
  }
  data.validate(config.standardize);
  return data;
}

RunResult write_chain_outputs(const ChainOutput& chain, const Dataset& data,
                              const RunConfig& config) {
  RunResult result;
  prepare_out(config.out);
  IntervalReport report = credible_intervals(chain, config.level);
  report.snp_names = data.snp_names;
  report.phenotype_names = data.phenotype_names;
  write_report_files(report, chain.posterior_mean(), config, result);
  emit(result, config.out / "diagnostics.csv",
       diagnostics_csv(chain, data.snp_names, data.phenotype_names));
  if (config.save_draws) {
    emit(result, config.out / "draws.csv", draws_csv(chain, data.snp_names, data.phenotype_names));
  }
  return result;
}

RunResult run_fit(const RunConfig& config) {
  const Dataset data = load_inputs(config);
  config.hyper.validate();
  const ChainOutput chain = run_gibbs(data, config.hyper, config.sampler());
  RunResult result = write_chain_outputs(chain, data, config);
  if (chain.jitter_events > 0) {
    result.warnings.push_back(std::to_string(chain.jitter_events) +
                              " Cholesky factorizations needed diagonal jitter");
  }
  return result;
}

RunResult run_tune(const RunConfig& config) {
  const Dataset data = load_inputs(config);
  const TuningGrid grid = TuningGrid::parse(config.grid);
  const GridSearchResult search =
      grid_search(data, grid, config.hyper, config.sampler(), config.workers);
  RunResult result = write_chain_outputs(search.best_chain, data, config);
  emit(result, config.out / "waic_grid.csv", waic_grid_csv(search.report));
  result.failed_chains = search.report.failed();
  for (const auto& row : search.report.rows) {
    if (!row.ok) {
      result.warnings.push_back("chain at lambda1_sq=" + format_double(row.point.lambda1_sq) +
                                ", lambda2_sq=" + format_double(row.point.lambda2_sq) +
                                " failed: " + row.error);
    }
  }
  return result;
}

RunResult run_bootstrap(const RunConfig& config) {
  const Dataset data = load_inputs(config);
  prepare_out(config.out);
  RunResult result;
  double g1 = 0.0;
  double g2 = 0.0;
  if (config.gamma1 && config.gamma2) {
    g1 = *config.gamma1;
    g2 = *config.gamma2;
  } else {
    std::vector<PenaltyPair> grid;
    for (const auto& p : TuningGrid::parse(config.cv_grid).points()) {
      grid.push_back({p.lambda1_sq, p.lambda2_sq});
    }
    const CvResult cv = cv_select(data, grid, config.folds, config.seed, config.workers);
    g1 = cv.best.gamma1;
    g2 = cv.best.gamma2;
    std::string table = "gamma1,gamma2,heldout_rss\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      table += format_double(grid[i].gamma1) + "," + format_double(grid[i].gamma2) + "," +
               format_double(cv.heldout_rss[i]) + "\n";
    }
    emit(result, config.out / "cv_grid.csv", table);
  }
  const BootstrapResult boot = bootstrap_intervals(data, g1, g2, config.bootstrap_replicates,
                                                   config.level, config.seed, config.workers);
  emit(result, config.out / "bootstrap.csv",
       bootstrap_csv(boot, data.snp_names, data.phenotype_names));
  if (boot.nonconverged > 0) {
    result.warnings.push_back(std::to_string(boot.nonconverged) +
                              " bootstrap fits stopped at the iteration cap");
  }
  return result;
}

RunResult run_report(const RunConfig& config) {
  if (config.draws.empty()) throw InputError("report needs a draws file (--draws)");
  const LoadedDraws loaded = load_draws(config.draws);
  prepare_out(config.out);
  IntervalReport report = credible_intervals(loaded.w, config.level);
  report.snp_names = loaded.snps;
  report.phenotype_names = loaded.phenotypes;
  RunResult result;
  write_report_files(report, report.mean, config, result);
  return result;
}

RunResult run_simulate(const StudyDesign& design, const std::filesystem::path& out,
                       bool dataset_only) {
  design.validate();
  prepare_out(out);
  RunResult result;
  if (dataset_only) {
    const GroupStructure groups = GroupStructure::contiguous(design.group_sizes);
    Rng rng(design.seed);
    Dataset data;
    data.groups = groups;
    data.x = simulate_genotypes(design.n, groups, design.maf_min, design.maf_max,
                                design.ld_correlation, rng);
    const TruthDraw truth = simulate_truth(design, groups, rng);
    data.y = simulate_phenotypes(data.x, truth.w, design.sigma2, design.family, rng);
    data.ensure_names();
    save_dataset(data, out / "genotypes.csv", out / "phenotypes.csv", out / "groups.csv");
    result.files = {out / "genotypes.csv", out / "phenotypes.csv", out / "groups.csv"};
    std::string table = "snp,phenotype,value\n";
    for (Index i = 0; i < truth.w.rows(); ++i) {
      for (Index j = 0; j < truth.w.cols(); ++j) {
        table += data.snp_names[i] + "," + data.phenotype_names[j] + "," +
                 format_double(truth.w(i, j)) + "\n";
      }
    }
    emit(result, out / "truth.csv", table);
    return result;
  }
  const CoverageTable table = run_study(design);
  emit(result, out / "coverage.csv", coverage_csv(table, to_string(design.family)));
  result.warnings = table.warnings;
  for (const auto& m : table.methods) result.failed_chains += m.failures;
  return result;
}

std::string draws_csv(const ChainOutput& chain, const std::vector<std::string>& snps,
                      const std::vector<std::string>& phenotypes) {
  std::string out = "draw,sigma2";
  for (const auto& s : snps) {
    for (const auto& p : phenotypes) out += "," + s + "|" + p;
  }
  out += '\n';
  for (Index s = 0; s < chain.num_draws(); ++s) {
    out += std::to_string(s) + "," + format_double(chain.sigma2[s]);
    const Matrix& w = chain.w[s];
    for (Index i = 0; i < w.rows(); ++i) {
      for (Index j = 0; j < w.cols(); ++j) out += "," + format_double(w(i, j));
    }
    out += '\n';
  }
  return out;
}

LoadedDraws load_draws(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 3 || table.header[0] != "draw" || table.header[1] != "sigma2") {
    throw InputError(path.string() + ": not a draws file");
  }
  LoadedDraws out;
  std::vector<std::pair<std::string, std::string>> cells;
  for (std::size_t k = 2; k < table.header.size(); ++k) {
    const auto bar = table.header[k].find('|');
    if (bar == std::string::npos) throw InputError(path.string() + ": bad column " + table.header[k]);
    cells.emplace_back(table.header[k].substr(0, bar), table.header[k].substr(bar + 1));
  }
  for (const auto& [s, p] : cells) {
    if (out.snps.empty() || out.snps.back() != s) out.snps.push_back(s);
    if (out.snps.size() == 1 && (out.phenotypes.empty() || out.phenotypes.back() != p)) {
      out.phenotypes.push_back(p);
    }
  }
  const Index d = static_cast<Index>(out.snps.size());
  const Index c = static_cast<Index>(out.phenotypes.size());
  if (d * c != static_cast<Index>(cells.size())) {
    throw InputError(path.string() + ": columns do not form a SNP x phenotype grid");
  }
  out.sigma2.resize(static_cast<Index>(table.rows.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out.sigma2[static_cast<Index>(r)] = parse_double(table.rows[r][1]);
    Matrix w(d, c);
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < c; ++j) w(i, j) = parse_double(table.rows[r][2 + i * c + j]);
    }
    out.w.push_back(std::move(w));
  }
  return out;
}

void write_manifest(const std::filesystem::path& out, const std::string& command,
                    std::uint64_t seed, const std::string& config_text, const RunResult& result) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["seed"] = seed;
  j["config_hash"] = config_hash(config_text);
  j["config"] = config_text;
  j["versions"] = {
      {"bgsm", BGSM_VERSION},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                    "." + std::to_string(EIGEN_MINOR_VERSION)},
      {"boost", BOOST_LIB_VERSION},
      {"compiler", __VERSION__},
  };
  std::vector<std::string> files;
  for (const auto& f : result.files) files.push_back(f.lexically_relative(out).generic_string());
  j["outputs"] = files;
  j["failed_chains"] = result.failed_chains;
  j["warnings"] = result.warnings;
  prepare_out(out);
  write_text_file(out / "manifest.json", j.dump(2) + "\n");
}

}  // namespace bgsm
