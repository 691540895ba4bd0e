#include "bgsm/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bgsm/error.hpp"
#include "bgsm/gibbs.hpp"
#include "bgsm/io.hpp"
#include "bgsm/parallel.hpp"
#include "bgsm/report.hpp"
#include "bgsm/tuning.hpp"
#include "bgsm/wang.hpp"

namespace bgsm {

std::string to_string(ErrorFamily family) {
  return family == ErrorFamily::gaussian ? "gaussian" : "student_t4";
}

ErrorFamily parse_error_family(const std::string& text) {
  if (text == "gaussian") return ErrorFamily::gaussian;
  if (text == "student_t4" || text == "t4") return ErrorFamily::student_t4;
  throw InputError("unknown error family '" + text + "'");
}

Index StudyDesign::d() const {
  return std::accumulate(group_sizes.begin(), group_sizes.end(), Index{0});
}

Index StudyDesign::active_rows() const {
  Index rows = extra_active_rows;
  for (Index k : active_genes) {
    if (k >= 0 && k < num_groups()) rows += group_sizes[k];
  }
  return rows;
}

void StudyDesign::validate() const {
  if (n <= 0 || c <= 0) throw InputError("n and c must be positive");
  if (group_sizes.empty()) throw InputError("design has no genes");
  for (Index m : group_sizes) {
    if (m <= 0) throw InputError("gene sizes must be positive");
  }
  for (double v : {lambda1_sq, lambda2_sq, sigma2}) {
    if (!(v > 0.0)) throw InputError("true lambda1_sq, lambda2_sq, sigma2 must be positive");
  }
  std::vector<Index> genes = active_genes;
  std::sort(genes.begin(), genes.end());
  if (std::adjacent_find(genes.begin(), genes.end()) != genes.end()) {
    throw InputError("active_genes lists a gene twice");
  }
  Index fixed_rows = 0;
  for (Index k : genes) {
    if (k < 0 || k >= num_groups()) throw InputError("active gene index out of range");
    fixed_rows += group_sizes[k];
  }
  if (extra_active_rows < 0 || extra_active_rows > d() - fixed_rows) {
    throw InputError("extra_active_rows does not fit outside the active genes");
  }
  if (!(maf_min > 0.0 && maf_min <= maf_max && maf_max <= 0.5)) {
    throw InputError("MAF range must satisfy 0 < maf_min <= maf_max <= 0.5");
  }
  if (!(ld_correlation >= 0.0 && ld_correlation < 1.0)) {
    throw InputError("ld_correlation must lie in [0, 1)");
  }
  if (replicates < 2) throw InputError("a study needs at least 2 replicates");
  if (!(level > 0.0 && level < 1.0)) throw InputError("level must lie in (0, 1)");
  if (burn_in < 0 || burn_in >= iterations || thin <= 0) throw InputError("bad sampler settings");
  if (folds < 2) throw InputError("folds must be at least 2");
  if (bootstrap_replicates < 100) throw InputError("bootstrap_replicates must be at least 100");
}

namespace {

std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<Index>(parse_long(item)));
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  return out.str();
}

}  // namespace

StudyDesign StudyDesign::parse(const std::string& text) {
  StudyDesign design;
  for (const auto& [key, value] : parse_key_values(text).entries) {
    if (key == "n") design.n = parse_long(value);
    else if (key == "c") design.c = parse_long(value);
    else if (key == "group_sizes") design.group_sizes = parse_index_list(value);
    else if (key == "family") design.family = parse_error_family(value);
    else if (key == "lambda1_sq") design.lambda1_sq = parse_double(value);
    else if (key == "lambda2_sq") design.lambda2_sq = parse_double(value);
    else if (key == "sigma2") design.sigma2 = parse_double(value);
    else if (key == "active_genes") design.active_genes = parse_index_list(value);
    else if (key == "extra_active_rows") design.extra_active_rows = parse_long(value);
    else if (key == "maf_min") design.maf_min = parse_double(value);
    else if (key == "maf_max") design.maf_max = parse_double(value);
    else if (key == "ld_correlation") design.ld_correlation = parse_double(value);
    else if (key == "redraw_truth") design.redraw_truth = parse_bool(value);
    else if (key == "replicates") design.replicates = parse_long(value);
    else if (key == "seed") design.seed = parse_u64(value);
    else if (key == "level") design.level = parse_double(value);
    else if (key == "iterations") design.iterations = parse_long(value);
    else if (key == "burn_in") design.burn_in = parse_long(value);
    else if (key == "thin") design.thin = parse_long(value);
    else if (key == "bayes_grid") design.bayes_grid = value;
    else if (key == "cv_grid") design.cv_grid = value;
    else if (key == "folds") design.folds = parse_long(value);
    else if (key == "bootstrap_replicates") design.bootstrap_replicates = parse_long(value);
    else if (key == "workers") design.workers = static_cast<int>(parse_long(value));
    else throw InputError("unknown study design key '" + key + "'");
  }
  design.validate();
  return design;
}

std::string StudyDesign::to_config() const {
  std::ostringstream out;
  out << "n = " << n << "\nc = " << c << "\ngroup_sizes = " << join(group_sizes)
      << "\nfamily = " << to_string(family) << "\nlambda1_sq = " << format_double(lambda1_sq)
      << "\nlambda2_sq = " << format_double(lambda2_sq) << "\nsigma2 = " << format_double(sigma2)
      << "\nactive_genes = " << join(active_genes) << "\nextra_active_rows = " << extra_active_rows
      << "\nmaf_min = " << format_double(maf_min) << "\nmaf_max = " << format_double(maf_max)
      << "\nld_correlation = " << format_double(ld_correlation)
      << "\nredraw_truth = " << (redraw_truth ? "true" : "false") << "\nreplicates = " << replicates
      << "\nseed = " << seed << "\nlevel = " << format_double(level)
      << "\niterations = " << iterations << "\nburn_in = " << burn_in << "\nthin = " << thin
      << "\nbayes_grid = " << bayes_grid << "\ncv_grid = " << cv_grid << "\nfolds = " << folds
      << "\nbootstrap_replicates = " << bootstrap_replicates << "\nworkers = " << workers << "\n";
  return out.str();
}

Matrix simulate_genotypes(Index n, const GroupStructure& groups, double maf_min, double maf_max,
                          double ld_correlation, Rng& rng) {
  const Index d = groups.num_snps();
  Vector maf(d);
  for (Index i = 0; i < d; ++i) maf[i] = maf_min + (maf_max - maf_min) * rng.uniform();
  Matrix x(n, d);
  const double shared = std::sqrt(ld_correlation);
  const double own = std::sqrt(1.0 - ld_correlation);
  for (Index l = 0; l < n; ++l) {
    for (Index k = 0; k < groups.num_groups(); ++k) {
      const double g = rng.normal();
      for (Index i : groups.members(k)) {
        const double z = shared * g + own * rng.normal();
        const double u = 0.5 * std::erfc(-z / std::sqrt(2.0));
        const double p = maf[i];
        x(l, i) = u < (1.0 - p) * (1.0 - p) ? 0.0 : (u < 1.0 - p * p ? 1.0 : 2.0);
      }
    }
  }
  return x;
}

Matrix draw_coefficients(const MixingState& mix, const GroupStructure& groups, Index c, Rng& rng) {
  Matrix w(groups.num_snps(), c);
  for (Index i = 0; i < groups.num_snps(); ++i) {
    const double var = mix.sigma2 / (1.0 / mix.tau2[groups.group_of(i)] + 1.0 / mix.omega2[i]);
    const double sd = std::sqrt(var);
    for (Index j = 0; j < c; ++j) w(i, j) = sd * rng.normal();
  }
  return w;
}

TruthDraw simulate_truth(const StudyDesign& design, const GroupStructure& groups, Rng& rng) {
  design.validate();
  if (groups.sizes() != design.group_sizes) {
    throw InputError("group structure does not match the design's gene sizes");
  }
  const Index d = groups.num_snps();
  const double c = static_cast<double>(design.c);
  TruthDraw truth;
  truth.mix.sigma2 = design.sigma2;
  truth.mix.tau2.resize(groups.num_groups());
  truth.mix.omega2.resize(d);
  for (Index k = 0; k < groups.num_groups(); ++k) {
    const double m = static_cast<double>(groups.size(k));
    truth.mix.tau2[k] = rng.gamma(0.5 * (m * c + 1.0), 0.5 * design.lambda1_sq);
  }
  for (Index i = 0; i < d; ++i) truth.mix.omega2[i] = rng.gamma(0.5 * (c + 1.0), 0.5 * design.lambda2_sq);
  truth.w = draw_coefficients(truth.mix, groups, design.c, rng);

  std::vector<char> keep(static_cast<std::size_t>(d), 0);
  for (Index k : design.active_genes) {
    for (Index i : groups.members(k)) keep[i] = 1;
  }
  std::vector<Index> pool;
  for (Index i = 0; i < d; ++i) {
    if (!keep[i]) pool.push_back(i);
  }
  // partial Fisher-Yates for the extra rows
  for (Index r = 0; r < design.extra_active_rows; ++r) {
    const Index pick = r + rng.uniform_index(static_cast<Index>(pool.size()) - r);
    std::swap(pool[r], pool[pick]);
    keep[pool[r]] = 1;
  }
  for (Index i = 0; i < d; ++i) {
    if (keep[i]) {
      truth.active_rows.push_back(i);
    } else {
      truth.w.row(i).setZero();
    }
  }
  return truth;
}

Matrix simulate_phenotypes(const Matrix& x, const Matrix& w, double sigma2, ErrorFamily family,
                           Rng& rng) {
  if (x.cols() != w.rows()) throw InputError("X and W shapes do not conform");
  if (sigma2 < 0.0) throw DomainError("sigma2 must be nonnegative");
  Matrix y = x * w;
  const double sd = std::sqrt(sigma2);
  for (Index l = 0; l < y.rows(); ++l) {
    const double scale = family == ErrorFamily::gaussian ? 1.0 : std::sqrt(4.0 / rng.chi_squared(4.0));
    for (Index j = 0; j < y.cols(); ++j) y(l, j) += sd * scale * rng.normal();
  }
  return y;
}

const MethodCoverage& CoverageTable::method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.method == name) return m;
  }
  throw InputError("coverage table has no method '" + name + "'");
}

namespace {

struct ReplicateOutcome {
  bool bayes_ok = false;
  bool boot_ok = false;
  std::string bayes_error;
  std::string boot_error;
  Matrix truth;
  Matrix bayes_cover;
  Matrix boot_cover;
};

Matrix covers(const Matrix& lower, const Matrix& upper, const Matrix& truth) {
  return ((lower.array() <= truth.array()) && (truth.array() <= upper.array())).cast<double>().matrix();
}

struct Scenario {
  Dataset data;
  TruthDraw truth;
};

Scenario make_scenario(const StudyDesign& design, const GroupStructure& groups, Rng& rng) {
  Scenario s;
  s.data.x = simulate_genotypes(design.n, groups, design.maf_min, design.maf_max,
                                design.ld_correlation, rng);
  s.data.groups = groups;
  s.truth = simulate_truth(design, groups, rng);
  return s;
}

}  // namespace

CoverageTable run_study(const StudyDesign& design, StudyMethods methods, const StudyHooks& hooks) {
  design.validate();
  const GroupStructure groups = GroupStructure::contiguous(design.group_sizes);
  const Index d = groups.num_snps();

  Scenario fixed;
  if (!design.redraw_truth) {
    Rng rng(mix_seed(design.seed, 0xF1CEDULL));
    fixed = make_scenario(design, groups, rng);
  }

  const TuningGrid cv_points = TuningGrid::parse(design.cv_grid);
  std::vector<PenaltyPair> penalty_grid;
  for (const auto& p : cv_points.points()) penalty_grid.push_back({p.lambda1_sq, p.lambda2_sq});

  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(design.replicates));
  parallel_for(design.replicates, design.workers, [&](Index r) {
    ReplicateOutcome& out = outcomes[r];
    Rng rng(mix_seed(design.seed, static_cast<std::uint64_t>(r)));
    Scenario scenario = design.redraw_truth ? make_scenario(design, groups, rng) : fixed;
    Dataset& data = scenario.data;
    data.y = simulate_phenotypes(data.x, scenario.truth.w, design.sigma2, design.family, rng);
    out.truth = scenario.truth.w;
    const std::uint64_t fit_seed = rng.engine()();

    if (methods.bayes) {
      try {
        SamplerConfig config;
        config.iterations = design.iterations;
        config.burn_in = design.burn_in;
        config.thin = design.thin;
        config.seed = fit_seed;
        Hyperparams hyper;
        ChainOutput chain;
        if (design.bayes_grid == "truth") {
          hyper.lambda1_sq = design.lambda1_sq;
          hyper.lambda2_sq = design.lambda2_sq;
          chain = run_gibbs(data, hyper, config);
        } else {
          chain = grid_search(data, TuningGrid::parse(design.bayes_grid), hyper, config, 1).best_chain;
        }
        IntervalReport report = credible_intervals(chain, design.level);
        if (hooks.adjust_intervals) hooks.adjust_intervals(report.lower, report.upper);
        out.bayes_cover = covers(report.lower, report.upper, out.truth);
        out.bayes_ok = true;
      } catch (const std::exception& e) {
        out.bayes_error = e.what();
      }
    }
    if (methods.bootstrap) {
      try {
        const CvResult cv = cv_select(data, penalty_grid, design.folds, fit_seed ^ 0xC5ULL, 1);
        BootstrapResult boot =
            bootstrap_intervals(data, cv.best.gamma1, cv.best.gamma2, design.bootstrap_replicates,
                                design.level, mix_seed(fit_seed, 0xB007ULL), 1);
        if (hooks.adjust_intervals) hooks.adjust_intervals(boot.lower, boot.upper);
        out.boot_cover = covers(boot.lower, boot.upper, out.truth);
        out.boot_ok = true;
      } catch (const std::exception& e) {
        out.boot_error = e.what();
      }
    }
  });

  CoverageTable table;
  auto aggregate = [&](const std::string& name, bool ReplicateOutcome::*ok,
                       Matrix ReplicateOutcome::*cover, std::string ReplicateOutcome::*error) {
    MethodCoverage m;
    m.method = name;
    m.coverage = Matrix::Zero(d, design.c);
    double active_hits = 0.0;
    double active_total = 0.0;
    for (Index r = 0; r < design.replicates; ++r) {
      const auto& o = outcomes[r];
      if (!(o.*ok)) {
        ++m.failures;
        table.warnings.push_back(name + " failed on replicate " + std::to_string(r) + ": " + o.*error);
        continue;
      }
      ++m.replicates_used;
      m.coverage += o.*cover;
      const auto active = (o.truth.array() != 0.0).cast<double>();
      active_hits += (active * (o.*cover).array()).sum();
      active_total += active.sum();
    }
    if (m.replicates_used > 0) {
      m.coverage /= static_cast<double>(m.replicates_used);
      m.mcp_overall = m.coverage.mean();
      m.mcp_active = active_total > 0.0 ? active_hits / active_total : 0.0;
    }
    table.methods.push_back(std::move(m));
  };
  if (methods.bayes) {
    aggregate("bayes", &ReplicateOutcome::bayes_ok, &ReplicateOutcome::bayes_cover,
              &ReplicateOutcome::bayes_error);
  }
  if (methods.bootstrap) {
    aggregate("bootstrap", &ReplicateOutcome::boot_ok, &ReplicateOutcome::boot_cover,
              &ReplicateOutcome::boot_error);
  }
  return table;
}

}  // namespace bgsm
