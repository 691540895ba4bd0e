#include <doctest.h>

#include <filesystem>
#include <random>
#include <regex>

#include "bgsm/error.hpp"
#include "bgsm/gibbs.hpp"
#include "bgsm/io.hpp"
#include "bgsm/report.hpp"
#include "fixtures.hpp"

using namespace bgsm;

namespace {

std::vector<Matrix> scalar_draws(const std::vector<double>& values) {
  std::vector<Matrix> out;
  for (double v : values) out.push_back(Matrix::Constant(1, 1, v));
  return out;
}

IntervalReport toy_report() {
  IntervalReport r;
  r.mean = Matrix(2, 2);
  r.lower = Matrix(2, 2);
  r.upper = Matrix(2, 2);
  r.mean << 0.3, 0.0, -0.2, 0.1;
  r.lower << 0.1, -0.5, -0.6, 0.0;
  r.upper << 0.5, 0.5, 0.1, 0.5;
  r.snp_names = {"rsA", "rsB"};
  r.phenotype_names = {"left", "right"};
  return r;
}

}  // namespace

TEST_CASE("credible intervals") {
  SUBCASE("constant draws") {
    const auto r = credible_intervals(scalar_draws(std::vector<double>(200, 3.0)), 0.95);
    CHECK(r.mean(0, 0) == 3.0);
    CHECK(r.lower(0, 0) == 3.0);
    CHECK(r.upper(0, 0) == 3.0);
  }
  SUBCASE("order statistic interpolation") {
    std::vector<double> v;
    for (int i = 100; i >= 1; --i) v.push_back(i);
    const auto r = credible_intervals(scalar_draws(v), 0.90);
    // h = 99 * 0.05 = 4.95 -> 5 + 0.95 * (6 - 5)
    CHECK(r.lower(0, 0) == doctest::Approx(5.95).epsilon(1e-12));
    CHECK(r.upper(0, 0) == doctest::Approx(95.05).epsilon(1e-12));
    CHECK(r.mean(0, 0) == doctest::Approx(50.5));
  }
  SUBCASE("symmetric draws") {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> z;
    std::vector<double> v;
    for (int i = 0; i < 20000; ++i) {
      const double x = z(gen);
      v.push_back(x);
      v.push_back(-x);
    }
    const auto r = credible_intervals(scalar_draws(v), 0.95);
    CHECK(r.lower(0, 0) == doctest::Approx(-r.upper(0, 0)).epsilon(1e-12));
  }
  SUBCASE("nesting, bounds and errors") {
    std::mt19937_64 gen(2);
    std::vector<Matrix> draws;
    for (int i = 0; i < 500; ++i) draws.push_back(fixture::random_matrix(3, 2, gen));
    const auto r95 = credible_intervals(draws, 0.95);
    const auto r99 = credible_intervals(draws, 0.99);
    CHECK((r99.lower.array() <= r95.lower.array()).all());
    CHECK((r99.upper.array() >= r95.upper.array()).all());
    CHECK((r95.lower.array() <= r95.upper.array()).all());
    for (Index i = 0; i < 3; ++i) {
      for (Index j = 0; j < 2; ++j) {
        for (Index s = 0; s < 3; ++s) {
          if (r99.selected(i, j)) CHECK(r95.selected(i, j));
        }
      }
    }
    CHECK_THROWS_AS(credible_intervals(scalar_draws({1, 2, 3}), 0.95), InputError);
    CHECK_THROWS_AS(credible_intervals(draws, 1.0), DomainError);
  }
}

TEST_CASE("selection uses strict exclusion of zero") {
  IntervalReport r;
  r.mean = Matrix::Zero(3, 1);
  r.lower = Matrix(3, 1);
  r.upper = Matrix(3, 1);
  r.lower << -1.0, 0.1, 0.0;
  r.upper << 1.0, 0.5, 0.5;
  const auto s = select_snps(r);
  REQUIRE(s.pairs.size() == 1);
  CHECK(s.pairs[0] == std::pair<Index, Index>{1, 0});
  CHECK(s.snps == std::vector<Index>{1});

  r.lower(1, 0) = -0.1;
  CHECK(select_snps(r).pairs.empty());
}

TEST_CASE("ranking") {
  Matrix w(2, 2);
  w << 0.5, 0.5, 1.0, -1.0;
  auto ranked = rank_snps(w);
  CHECK(ranked[0].snp == 1);
  CHECK(ranked[0].score == 2.0);
  CHECK(ranked[1].score == 1.0);

  const auto zeros = rank_snps(Matrix::Zero(4, 3));
  for (Index i = 0; i < 4; ++i) CHECK(zeros[i].snp == i);

  std::mt19937_64 gen(3);
  const Matrix r = fixture::random_matrix(6, 4, gen);
  Matrix permuted(6, 4);
  permuted << r.col(2), r.col(0), r.col(3), r.col(1);
  const auto a = rank_snps(r), b = rank_snps(permuted);
  for (Index i = 0; i < 6; ++i) CHECK(a[i].snp == b[i].snp);
}

TEST_CASE("top-ranked SNP with every interval covering zero is not selected") {
  // SNP 0: large but diffuse effects; SNP 1: small, sharply estimated effects.
  std::mt19937_64 gen(4);
  std::normal_distribution<double> z;
  const Index c = 56;
  std::vector<Matrix> draws;
  for (int s = 0; s < 2000; ++s) {
    Matrix w(2, c);
    for (Index j = 0; j < c; ++j) {
      w(0, j) = 0.8 + 2.0 * z(gen);
      w(1, j) = 0.1 + 0.02 * z(gen);
    }
    draws.push_back(w);
  }
  const auto report = credible_intervals(draws, 0.95);
  const auto ranked = rank_snps(report.mean);
  CHECK(ranked.front().snp == 0);
  const auto sel = select_snps(report);
  CHECK(std::find(sel.snps.begin(), sel.snps.end(), 0) == sel.snps.end());
  CHECK(std::find(sel.snps.begin(), sel.snps.end(), 1) != sel.snps.end());
}

TEST_CASE("phenotype standardization") {
  std::mt19937_64 gen(5);
  const Matrix raw = (fixture::random_matrix(40, 3, gen) * 4.0).array() + 7.0;
  const auto s = standardize_phenotypes(raw, {"a", "b", "c"});
  for (Index j = 0; j < 3; ++j) {
    CHECK(std::abs(s.y.col(j).mean()) < 1e-12);
    CHECK(s.y.col(j).squaredNorm() / 39.0 == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK((s.back_transform(s.y) - raw).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((standardize_phenotypes(s.y, {}).y - s.y).cwiseAbs().maxCoeff() < 1e-8);

  Matrix constant = raw;
  constant.col(1).setConstant(2.0);
  try {
    standardize_phenotypes(constant, {"a", "hippocampus", "c"});
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("hippocampus") != std::string::npos);
  }
}

TEST_CASE("rescaled phenotypes give the same fitted ranking") {
  Dataset data = fixture::make_dataset(30, {2, 2}, 2, 6, 1.0);
  Dataset scaled = data;
  data.y = standardize_phenotypes(data.y, {}).y;
  scaled.y = standardize_phenotypes(3.7 * scaled.y, {}).y;
  CHECK((data.y - scaled.y).cwiseAbs().maxCoeff() < 1e-12);
  SamplerConfig c;
  c.iterations = 400;
  c.burn_in = 100;
  const Matrix a = run_gibbs(data, Hyperparams{}, c).posterior_mean();
  const Matrix b = run_gibbs(scaled, Hyperparams{}, c).posterior_mean();
  for (Index j = 0; j < 2; ++j) {
    const auto ra = rank_snps(a.col(j)), rb = rank_snps(b.col(j));
    for (Index i = 0; i < 4; ++i) CHECK(ra[i].snp == rb[i].snp);
  }
}

TEST_CASE("interval plot markup") {
  const auto report = toy_report();
  const std::string svg = render_interval_plot(report, 0, nullptr);
  const std::regex glyph("<g class=\"interval( selected)?\"");
  const auto count = std::distance(std::sregex_iterator(svg.begin(), svg.end(), glyph), std::sregex_iterator());
  CHECK(count == 2);
  CHECK(svg.find("<g class=\"interval selected\" data-phenotype=\"left\"") != std::string::npos);
  CHECK(svg.find("<g class=\"interval\" data-phenotype=\"right\"") != std::string::npos);
  CHECK(svg == render_interval_plot(report, 0, nullptr));

  const Matrix overlay = Matrix::Constant(2, 2, 0.2);
  CHECK(render_interval_plot(report, 1, &overlay).find("class=\"overlay\"") != std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "bgsm_plot_test";
  std::filesystem::create_directories(dir);
  emit_interval_plot(report, "rsB", dir / "rsB.svg");
  CHECK(read_text_file(dir / "rsB.svg") == render_interval_plot(report, 1, nullptr));
  CHECK_THROWS_AS(emit_interval_plot(report, "rsZ", dir / "x.svg"), InputError);
  CHECK_THROWS_AS(emit_interval_plot(report, "rsA", dir / "missing" / "x.svg"), InputError);
}

TEST_CASE("interval plot golden file") {
  const std::string golden = read_text_file(std::filesystem::path(BGSM_TEST_DATA) / "golden_plot.svg");
  CHECK(render_interval_plot(toy_report(), 0, nullptr) == golden);
}
