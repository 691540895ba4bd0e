#include "bgsm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bgsm/error.hpp"
#include "bgsm/stats.hpp"

namespace bgsm {

bool IntervalReport::snp_selected(Index snp) const {
  for (Index j = 0; j < num_phenotypes(); ++j) {
    if (selected(snp, j)) return true;
  }
  return false;
}

Index IntervalReport::snp_index(const std::string& name) const {
  const auto it = std::find(snp_names.begin(), snp_names.end(), name);
  if (it == snp_names.end()) throw InputError("unknown SNP '" + name + "'");
  return static_cast<Index>(it - snp_names.begin());
}

IntervalReport credible_intervals(const std::vector<Matrix>& draws, double level,
                                  Index min_draws) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("credible level must lie in (0, 1)");
  if (static_cast<Index>(draws.size()) < std::max<Index>(min_draws, 1)) {
    throw InputError("credible intervals need at least " + std::to_string(min_draws) +
                     " draws, chain has " + std::to_string(draws.size()));
  }
  const Index d = draws.front().rows();
  const Index c = draws.front().cols();
  IntervalReport report;
  report.level = level;
  report.mean = Matrix::Zero(d, c);
  report.lower.resize(d, c);
  report.upper.resize(d, c);
  const double alpha = 0.5 * (1.0 - level);
  std::vector<double> values(draws.size());
  for (Index j = 0; j < c; ++j) {
    for (Index i = 0; i < d; ++i) {
      double sum = 0.0;
      for (std::size_t s = 0; s < draws.size(); ++s) {
        values[s] = draws[s](i, j);
        sum += values[s];
      }
      report.mean(i, j) = sum / static_cast<double>(draws.size());
      std::sort(values.begin(), values.end());
      report.lower(i, j) = stats::quantile_sorted(values, alpha);
      report.upper(i, j) = stats::quantile_sorted(values, 1.0 - alpha);
    }
  }
  for (Index i = 0; i < d; ++i) report.snp_names.push_back("snp" + std::to_string(i));
  for (Index j = 0; j < c; ++j) report.phenotype_names.push_back("pheno" + std::to_string(j));
  return report;
}

IntervalReport credible_intervals(const ChainOutput& chain, double level, Index min_draws) {
  return credible_intervals(chain.w, level, min_draws);
}

Selection select_snps(const IntervalReport& report) {
  Selection out;
  for (Index i = 0; i < report.num_snps(); ++i) {
    bool any = false;
    for (Index j = 0; j < report.num_phenotypes(); ++j) {
      if (report.selected(i, j)) {
        out.pairs.emplace_back(i, j);
        any = true;
      }
    }
    if (any) out.snps.push_back(i);
  }
  return out;
}

std::vector<RankedSnp> rank_snps(const Matrix& w_hat) {
  std::vector<RankedSnp> out(static_cast<std::size_t>(w_hat.rows()));
  for (Index i = 0; i < w_hat.rows(); ++i) out[i] = {i, w_hat.row(i).cwiseAbs().sum()};
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedSnp& a, const RankedSnp& b) { return a.score > b.score; });
  return out;
}

Matrix Standardization::back_transform(const Matrix& standardized) const {
  Matrix raw = standardized;
  for (Index j = 0; j < raw.cols(); ++j) {
    raw.col(j) = (standardized.col(j).array() * sd[j] + mean[j]).matrix();
  }
  return raw;
}

Standardization standardize_phenotypes(const Matrix& y_raw, const std::vector<std::string>& names) {
  if (y_raw.rows() < 2) throw InputError("standardization needs at least 2 subjects");
  Standardization out;
  out.mean = y_raw.colwise().mean().transpose();
  out.sd.resize(y_raw.cols());
  out.y.resize(y_raw.rows(), y_raw.cols());
  const double denom = static_cast<double>(y_raw.rows() - 1);
  for (Index j = 0; j < y_raw.cols(); ++j) {
    const Vector centered = (y_raw.col(j).array() - out.mean[j]).matrix();
    out.sd[j] = std::sqrt(centered.squaredNorm() / denom);
    if (!(out.sd[j] > 0.0) || !std::isfinite(out.sd[j])) {
      const std::string label =
          static_cast<std::size_t>(j) < names.size() ? names[j] : "column " + std::to_string(j);
      throw InputError("phenotype '" + label + "' has zero variance");
    }
    out.y.col(j) = centered / out.sd[j];
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string render_interval_plot(const IntervalReport& report, Index snp, const Matrix* overlay) {
  if (snp < 0 || snp >= report.num_snps()) throw InputError("SNP index out of range");
  const Index c = report.num_phenotypes();
  const double left = 70.0;
  const double right = 20.0;
  const double top = 40.0;
  const double bottom = 110.0;
  const double slot = 24.0;
  const double plot_h = 300.0;
  const double width = left + right + slot * static_cast<double>(c);
  const double height = top + plot_h + bottom;

  double lo = 0.0;
  double hi = 0.0;
  for (Index j = 0; j < c; ++j) {
    lo = std::min({lo, report.lower(snp, j), report.mean(snp, j)});
    hi = std::max({hi, report.upper(snp, j), report.mean(snp, j)});
    if (overlay != nullptr) {
      lo = std::min(lo, (*overlay)(snp, j));
      hi = std::max(hi, (*overlay)(snp, j));
    }
  }
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto ypix = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };
  auto xpix = [&](Index j) { return left + slot * (static_cast<double>(j) + 0.5); };

  const std::string name =
      static_cast<std::size_t>(snp) < report.snp_names.size() ? report.snp_names[snp] : "snp";
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n";
  svg << "<style>.interval line{stroke:#555;stroke-width:2}"
         ".interval.selected line{stroke:#c0392b}"
         ".mean{fill:#1f4e9c}.overlay{fill:#2e8b57}"
         ".zero{stroke:#999;stroke-dasharray:4 3}"
         "text{font-family:sans-serif;font-size:10px}</style>\n";
  svg << "<text class=\"title\" x=\"" << fmt(left) << "\" y=\"20\">" << escape_xml(name) << " ("
      << fmt(100.0 * report.level) << "% equal-tail intervals)</text>\n";
  svg << "<line class=\"zero\" x1=\"" << fmt(left) << "\" y1=\"" << fmt(ypix(0.0)) << "\" x2=\""
      << fmt(width - right) << "\" y2=\"" << fmt(ypix(0.0)) << "\"/>\n";
  svg << "<text class=\"axis\" x=\"" << fmt(left - 6.0) << "\" y=\"" << fmt(ypix(hi - pad))
      << "\" text-anchor=\"end\">" << fmt(hi - pad) << "</text>\n";
  svg << "<text class=\"axis\" x=\"" << fmt(left - 6.0) << "\" y=\"" << fmt(ypix(lo + pad))
      << "\" text-anchor=\"end\">" << fmt(lo + pad) << "</text>\n";
  for (Index j = 0; j < c; ++j) {
    const std::string pheno = static_cast<std::size_t>(j) < report.phenotype_names.size()
                                  ? report.phenotype_names[j]
                                  : "pheno" + std::to_string(j);
    svg << "<g class=\"interval" << (report.selected(snp, j) ? " selected" : "")
        << "\" data-phenotype=\"" << escape_xml(pheno) << "\">";
    svg << "<line x1=\"" << fmt(xpix(j)) << "\" y1=\"" << fmt(ypix(report.lower(snp, j)))
        << "\" x2=\"" << fmt(xpix(j)) << "\" y2=\"" << fmt(ypix(report.upper(snp, j))) << "\"/>";
    svg << "<circle class=\"mean\" cx=\"" << fmt(xpix(j)) << "\" cy=\""
        << fmt(ypix(report.mean(snp, j))) << "\" r=\"3\"/>";
    if (overlay != nullptr) {
      svg << "<rect class=\"overlay\" x=\"" << fmt(xpix(j) - 2.5) << "\" y=\""
          << fmt(ypix((*overlay)(snp, j)) - 2.5) << "\" width=\"5\" height=\"5\"/>";
    }
    svg << "</g>\n";
    svg << "<text class=\"label\" transform=\"translate(" << fmt(xpix(j)) << ','
        << fmt(top + plot_h + 8.0) << ") rotate(60)\">" << escape_xml(pheno) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_interval_plot(const IntervalReport& report, const std::string& snp,
                        const std::filesystem::path& path, const Matrix* overlay) {
  const std::string svg = render_interval_plot(report, report.snp_index(snp), overlay);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write plot to " + path.string());
  out << svg;
  if (!out) throw InputError("failed writing plot to " + path.string());
}

}  // namespace bgsm
