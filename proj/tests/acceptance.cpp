#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "bgsm/gibbs.hpp"
#include "bgsm/io.hpp"
#include "bgsm/model.hpp"
#include "bgsm/pipeline.hpp"
#include "bgsm/random.hpp"
#include "bgsm/report.hpp"
#include "bgsm/simulation.hpp"
#include "bgsm/tuning.hpp"
#include "bgsm/wang.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bgsm;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome gibbs_vs_metropolis() {
  Dataset data = fixture::make_dataset(20, {2}, 2, 2024, 1.0);
  Hyperparams hyper;
  SamplerConfig config;
  config.iterations = 60000;
  config.burn_in = 10000;
  config.seed = 5;
  const auto chain = run_gibbs(data, hyper, config);

  std::vector<Index> group_of{0, 0};
  const auto mh = oracle::collapsed_metropolis(data.y, data.x, group_of, 1, std::sqrt(hyper.lambda1_sq),
                                               std::sqrt(hyper.lambda2_sq), hyper.a_sigma,
                                               hyper.b_sigma, 200000, 20000, 6);

  Outcome out;
  double worst = 0.0;
  auto compare = [&](const std::vector<double>& g, const std::vector<double>& m) {
    const auto a = oracle::chain_moments(g), b = oracle::chain_moments(m);
    const double zm = std::abs(a.mean.mean - b.mean.mean) / std::hypot(a.mean.se, b.mean.se);
    const double zs = std::abs(a.sd.mean - b.sd.mean) / std::hypot(a.sd.se, b.sd.se);
    worst = std::max({worst, zm, zs});
  };
  for (Index i = 0; i < 2; ++i) {
    for (Index j = 0; j < 2; ++j) {
      std::vector<double> g;
      for (const auto& w : chain.w) g.push_back(w(i, j));
      compare(g, mh.w[i * 2 + j]);
    }
  }
  compare(std::vector<double>(chain.sigma2.data(), chain.sigma2.data() + chain.sigma2.size()), mh.sigma2);
  out.pass = worst <= 3.0;
  out.detail = "largest discrepancy " + fmt(worst, 3) + " combined SEs (limit 3)";
  return out;
}

Outcome kronecker_equivalence() {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> pos(0.2, 3.0);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    Dataset data = fixture::make_dataset(7 + rep % 5, {1 + rep % 3, 2, 3}, 1 + rep % 4, 100 + rep);
    GibbsState s = GibbsState::initial(data, fixture::random_matrix(data.d(), data.c(), gen));
    for (Index k = 0; k < s.mix.tau2.size(); ++k) s.mix.tau2[k] = pos(gen);
    for (Index i = 0; i < s.mix.omega2.size(); ++i) s.mix.omega2[i] = pos(gen);
    s.mix.sigma2 = pos(gen);
    const GramCache cache(data);
    const Index k = rep % 3;
    const auto cond = block_conditional(s, data, cache, k);

    const auto& members = data.groups.members(k);
    Matrix others = s.w;
    for (Index i : members) others.row(i).setZero();
    Vector diag(static_cast<Index>(members.size()));
    for (std::size_t r = 0; r < members.size(); ++r) {
      diag[r] = 1.0 / s.mix.tau2[k] + 1.0 / s.mix.omega2[members[r]];
    }
    const auto dense = oracle::dense_block(cache.x_block(k), data.y - data.x * others, diag);
    const Vector mu = dense.precision.ldlt().solve(dense.linear);
    const Matrix sigma = s.mix.sigma2 * dense.precision.inverse();

    const Index m = static_cast<Index>(members.size()), c = data.c();
    Vector mu_structured(m * c);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < c; ++j) mu_structured[i * c + j] = cond.mean(i, j);
    const Matrix kron = Eigen::kroneckerProduct(Matrix(s.mix.sigma2 * cond.precision.inverse()),
                                                Matrix(Matrix::Identity(c, c)));
    worst = std::max(worst, (mu_structured - mu).norm() / std::max(1.0, mu.norm()));
    worst = std::max(worst, (kron - sigma).norm() / sigma.norm());
  }
  return {worst <= 1e-8, "max relative error " + fmt(worst, 3) + " over 100 states"};
}

Outcome mode_identity() {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> pos(0.1, 3.0);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    Dataset data = fixture::make_dataset(10 + rep % 7, {1 + rep % 3, 2}, 1 + rep % 3, 500 + rep);
    const Matrix w1 = fixture::random_matrix(data.d(), data.c(), gen);
    const Matrix w2 = fixture::random_matrix(data.d(), data.c(), gen);
    const double l1 = pos(gen), l2 = pos(gen), s2 = pos(gen), s = std::sqrt(s2);
    const auto& g = data.groups;
    const double lhs = (log_likelihood(data.y, data.x, w1, s2) + log_prior_kernel(w1, g, l1, l2, s)) -
                       (log_likelihood(data.y, data.x, w2, s2) + log_prior_kernel(w2, g, l1, l2, s));
    const double rhs = -(wang_objective(w1, data.y, data.x, g, 2 * s * l1, 2 * s * l2) -
                         wang_objective(w2, data.y, data.x, g, 2 * s * l1, 2 * s * l2)) /
                       (2.0 * s2);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)));
  }
  return {worst <= 1e-10, "max relative difference " + fmt(worst, 3) + " over 1000 pairs"};
}

Outcome inverse_gaussian() {
  Outcome out;
  std::ostringstream detail;
  const std::vector<std::pair<double, double>> params{{2, 3}, {0.5, 1}, {1, 10}};
  std::uint64_t seed = 40;
  for (const auto& [mu, lambda] : params) {
    Rng rng(seed++);
    std::vector<double> v(100000);
    for (auto& x : v) x = sample_inverse_gaussian(mu, lambda, rng);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size() - 1);
    const double true_var = mu * mu * mu / lambda;
    const double z = std::abs(mean - mu) / std::sqrt(true_var / static_cast<double>(v.size()));
    const double rel = std::abs(var - true_var) / true_var;
    const double mu_ = mu, lambda_ = lambda;
    const double ks = oracle::ks_distance_quadrature(
        v, [=](double x) { return oracle::ig_density(x, mu_, lambda_); });
    out.pass = out.pass && z <= 3.0 && rel <= 0.05 && ks <= 0.01;
    detail << "(" << mu << "," << lambda << "): z=" << fmt(z, 3) << " var err=" << fmt(rel, 3)
           << " KS=" << fmt(ks, 3) << "; ";
  }
  out.detail = detail.str();
  return out;
}

Outcome coverage_studies() {
  struct Study {
    const char* name;
    Index n;
    ErrorFamily family;
  };
  const std::vector<Study> studies{{"I", 100, ErrorFamily::gaussian},
                                   {"II", 15, ErrorFamily::gaussian},
                                   {"III", 100, ErrorFamily::student_t4},
                                   {"IV", 15, ErrorFamily::student_t4}};
  Outcome out;
  std::ostringstream detail;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& s : studies) {
    StudyDesign d;
    d.n = s.n;
    d.family = s.family;
    d.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const auto table = run_study(d);
    const auto& bayes = table.method("bayes");
    const auto& boot = table.method("bootstrap");
    const bool a = bayes.mcp_overall >= 0.88 && bayes.mcp_overall <= 1.0;
    const bool b = bayes.mcp_overall >= boot.mcp_overall;
    const bool c = bayes.mcp_active >= boot.mcp_active;
    out.pass = out.pass && a && b && c;
    detail << "\n    study " << s.name << ": bayes " << fmt(bayes.mcp_overall) << "/" << fmt(bayes.mcp_active)
           << " bootstrap " << fmt(boot.mcp_overall) << "/" << fmt(boot.mcp_active) << " (a)"
           << (a ? "ok" : "FAIL") << " (b)" << (b ? "ok" : "FAIL") << " (c)" << (c ? "ok" : "FAIL");
  }
  out.detail = "overall/active MCP, " + fmt(seconds_since(t0), 4) + " s" + detail.str();
  return out;
}

double time_fit(Index n, Index d, Index c, std::uint64_t seed) {
  std::vector<Index> sizes(static_cast<std::size_t>(d / 5), 5);
  Dataset data = fixture::make_dataset(n, sizes, c, seed, 1.0);
  SamplerConfig config;
  config.iterations = 2000;
  config.burn_in = 1000;
  config.seed = seed;
  double best = 1e300;
  for (int rep = 0; rep < 5; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    run_gibbs(data, Hyperparams{}, config);
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

double loglog_slope(const std::vector<double>& size, const std::vector<double>& time) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < size.size(); ++i) {
    mx += std::log(size[i]);
    my += std::log(time[i]);
  }
  mx /= static_cast<double>(size.size());
  my /= static_cast<double>(size.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < size.size(); ++i) {
    sxy += (std::log(size[i]) - mx) * (std::log(time[i]) - my);
    sxx += (std::log(size[i]) - mx) * (std::log(size[i]) - mx);
  }
  return sxy / sxx;
}

Outcome scaling() {
  Outcome out;
  std::ostringstream detail;
  auto axis = [&](const char* name, const std::vector<double>& values,
                  const std::function<double(double)>& timer) {
    std::vector<double> t;
    for (double v : values) t.push_back(timer(v));
    const double slope = loglog_slope(values, t);
    out.pass = out.pass && slope >= 0.7 && slope <= 1.3;
    detail << name << " slope " << fmt(slope, 3) << " (";
    for (std::size_t i = 0; i < t.size(); ++i) detail << (i ? "," : "") << fmt(t[i], 3);
    detail << " s); ";
  };
  axis("d", {50, 100, 200, 400}, [](double d) { return time_fit(200, static_cast<Index>(d), 4, 1); });
  axis("c", {2, 4, 8, 16}, [](double c) { return time_fit(200, 100, static_cast<Index>(c), 2); });
  axis("n", {100, 200, 400, 800}, [](double n) { return time_fit(static_cast<Index>(n), 100, 4, 3); });
  out.detail = detail.str();
  return out;
}

Outcome degenerate_waic() {
  Dataset data = fixture::make_dataset(30, {2, 3}, 3, 77);
  std::mt19937_64 gen(77);
  const Matrix w = fixture::random_matrix(5, 3, gen, 0.3);
  const double sigma2 = 0.8;
  const Vector per = subject_log_likelihoods(data.y, data.x, w, sigma2);
  Matrix loglik(200, 30);
  for (Index s = 0; s < 200; ++s) loglik.row(s) = per.transpose();
  const auto t = waic(loglik);
  const double expected = -2.0 * oracle::loglik(data.y, data.x, w, sigma2);
  const double rel = std::abs(t.waic - expected) / std::abs(expected);
  return {t.penalty == 0.0 && rel <= 1e-10,
          "penalty " + fmt(t.penalty) + ", relative WAIC error " + fmt(rel, 3)};
}

Outcome wang_solver() {
  int violations = 0;
  for (int rep = 0; rep < 50; ++rep) {
    Dataset data = fixture::make_dataset(12 + rep, {2, 3, 2}, 1 + rep % 4, 900 + rep, 1.0, {0, 2, 5});
    WangOptions opt;
    opt.record_trace = true;
    const auto fit = fit_wang(data, 0.2 * (1 + rep % 10), 0.3 * (rep % 7), opt);
    for (std::size_t t = 1; t < fit.objective_trace.size(); ++t) {
      if (fit.objective_trace[t] > fit.objective_trace[t - 1] * (1.0 + 1e-12)) ++violations;
    }
  }
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    Dataset data = fixture::make_dataset(40, {2, 3, 1}, 3, 950 + rep);
    const Matrix ols = data.x.householderQr().solve(data.y);
    worst = std::max(worst, (fit_wang(data, 0.0, 0.0).w - ols).cwiseAbs().maxCoeff());
  }
  return {violations == 0 && worst <= 1e-6,
          std::to_string(violations) + " monotonicity violations in 50 instances, OLS max diff " + fmt(worst, 3)};
}

Outcome selection_protocol() {
  std::mt19937_64 gen(56);
  std::normal_distribution<double> z;
  const Index c = 56, d = 6;
  std::vector<Matrix> draws;
  for (int s = 0; s < 4000; ++s) {
    Matrix w(d, c);
    for (Index j = 0; j < c; ++j) {
      w(0, j) = 0.8 + 2.0 * z(gen);  // large mean magnitude, diffuse
      w(1, j) = 0.1 + 0.02 * z(gen);
      for (Index i = 2; i < d; ++i) w(i, j) = 0.05 * z(gen);
    }
    draws.push_back(w);
  }
  const auto report = credible_intervals(draws, 0.95);
  Index straddling = 0;
  for (Index j = 0; j < c; ++j) straddling += report.lower(0, j) < 0.0 && report.upper(0, j) > 0.0;
  const auto ranked = rank_snps(report.mean);
  const auto sel = select_snps(report);
  const bool excluded = std::find(sel.snps.begin(), sel.snps.end(), 0) == sel.snps.end();
  return {ranked.front().snp == 0 && straddling == c && excluded,
          "top-ranked SNP " + std::to_string(ranked.front().snp) + ", " + std::to_string(straddling) +
              "/56 intervals contain 0, " + (excluded ? "not selected" : "selected")};
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "bgsm_acceptance_determinism";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  Dataset data = fixture::make_dataset(50, {3, 3, 2}, 3, 10, 1.0, {0, 4});
  save_dataset(data, dir / "g.csv", dir / "p.csv", dir / "m.csv");
  RunConfig c;
  c.genotypes = dir / "g.csv";
  c.phenotypes = dir / "p.csv";
  c.groups = dir / "m.csv";
  c.iterations = 2000;
  c.burn_in = 500;
  c.seed = 99;
  c.out = dir / "first";
  run_fit(c);
  c.out = dir / "second";
  run_fit(c);
  const bool same = read_text_file(dir / "first" / "posterior_summary.csv") ==
                    read_text_file(dir / "second" / "posterior_summary.csv");
  return {same, same ? "posterior_summary.csv byte-identical" : "outputs differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"Gibbs vs collapsed Metropolis", gibbs_vs_metropolis},
      {"Kronecker-solve equivalence", kronecker_equivalence},
      {"posterior-mode identity", mode_identity},
      {"inverse Gaussian sampler", inverse_gaussian},
      {"coverage studies I-IV", coverage_studies},
      {"linear scaling", scaling},
      {"degenerate WAIC", degenerate_waic},
      {"Wang MM solver", wang_solver},
      {"selection protocol", selection_protocol},
      {"determinism", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %2d %-30s %s  [%.1f s] %s\n", id, criteria[k].first, o.pass ? "PASS" : "FAIL",
                seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
