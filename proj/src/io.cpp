#include "bgsm/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "bgsm/error.hpp"
#include "bgsm/simulation.hpp"
#include "bgsm/stats.hpp"
#include "bgsm/tuning.hpp"
#include "bgsm/wang.hpp"

namespace bgsm {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream stream(line);
  while (std::getline(stream, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

double parse_double(const std::string& text) {
  const std::string s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("not a number: '" + text + "'");
  }
  return value;
}

long parse_long(const std::string& text) {
  const std::string s = trim(text);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("not an integer: '" + text + "'");
  }
  return value;
}

std::uint64_t parse_u64(const std::string& text) {
  const std::string s = trim(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("not an unsigned integer: '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw InputError("not a boolean: '" + text + "'");
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw InputError("cannot format number");
  return std::string(buf, ptr);
}

std::optional<std::string> KeyValues::get(const std::string& key) const {
  std::optional<std::string> found;
  for (const auto& [k, v] : entries) {
    if (k == key) found = v;
  }
  return found;
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues out;
  std::stringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(line_no) + " is not 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw InputError("config line " + std::to_string(line_no) + " has no key");
    out.entries.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable table;
  std::stringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_commas(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw InputError(source + " line " + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw InputError(source + " is empty");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(read_text_file(path), path.string());
}

namespace {

Matrix numeric_matrix(const CsvTable& table, const std::string& source) {
  Matrix m(static_cast<Index>(table.rows.size()), static_cast<Index>(table.header.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      try {
        m(static_cast<Index>(r), static_cast<Index>(j)) = parse_double(table.rows[r][j]);
      } catch (const InputError&) {
        throw InputError(source + " row " + std::to_string(r + 1) + ", column '" +
                         table.header[j] + "': '" + table.rows[r][j] + "' is not a number");
      }
    }
  }
  return m;
}

std::string matrix_csv(const Matrix& m, const std::vector<std::string>& header) {
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) out += (j ? "," : "") + header[j];
  out += '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(r, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& genotypes, const std::filesystem::path& phenotypes,
                     const std::filesystem::path& groups) {
  const CsvTable geno = read_csv(genotypes);
  const CsvTable pheno = read_csv(phenotypes);
  const CsvTable map = read_csv(groups);

  Dataset data;
  data.x = numeric_matrix(geno, genotypes.string());
  data.y = numeric_matrix(pheno, phenotypes.string());
  data.snp_names = geno.header;
  data.phenotype_names = pheno.header;

  if (map.header.size() != 2 || map.header[0] != "snp_id" || map.header[1] != "gene_id") {
    throw InputError(groups.string() + ": header must be 'snp_id,gene_id'");
  }
  std::map<std::string, Index> snp_index;
  for (std::size_t i = 0; i < geno.header.size(); ++i) {
    if (!snp_index.emplace(geno.header[i], static_cast<Index>(i)).second) {
      throw InputError(genotypes.string() + ": duplicate SNP id '" + geno.header[i] + "'");
    }
  }
  std::map<std::string, Index> gene_index;
  std::vector<std::string> gene_labels;
  std::vector<Index> group_of(geno.header.size(), -1);
  for (const auto& row : map.rows) {
    const auto snp = snp_index.find(row[0]);
    if (snp == snp_index.end()) {
      throw InputError(groups.string() + ": SNP '" + row[0] + "' is not in the genotype file");
    }
    if (group_of[snp->second] != -1) {
      throw InputError(groups.string() + ": SNP '" + row[0] + "' listed twice");
    }
    auto [gene, inserted] = gene_index.emplace(row[1], static_cast<Index>(gene_labels.size()));
    if (inserted) gene_labels.push_back(row[1]);
    group_of[snp->second] = gene->second;
  }
  for (std::size_t i = 0; i < group_of.size(); ++i) {
    if (group_of[i] == -1) {
      throw InputError(groups.string() + ": SNP '" + geno.header[i] + "' has no gene");
    }
  }
  data.groups = GroupStructure::from_assignment(group_of, gene_labels);
  data.validate();
  return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& genotypes,
                  const std::filesystem::path& phenotypes, const std::filesystem::path& groups) {
  Dataset named = data;
  named.ensure_names();
  write_text_file(genotypes, matrix_csv(named.x, named.snp_names));
  write_text_file(phenotypes, matrix_csv(named.y, named.phenotype_names));
  std::string map = "snp_id,gene_id\n";
  for (Index i = 0; i < data.d(); ++i) {
    map += named.snp_names[i] + "," + data.groups.labels()[data.groups.group_of(i)] + "\n";
  }
  write_text_file(groups, map);
}

std::string posterior_summary_csv(const IntervalReport& report) {
  std::string out = "snp,phenotype,mean,lower,upper,selected\n";
  for (Index i = 0; i < report.num_snps(); ++i) {
    for (Index j = 0; j < report.num_phenotypes(); ++j) {
      out += report.snp_names[i] + "," + report.phenotype_names[j] + "," +
             format_double(report.mean(i, j)) + "," + format_double(report.lower(i, j)) + "," +
             format_double(report.upper(i, j)) + "," + (report.selected(i, j) ? "1" : "0") + "\n";
    }
  }
  return out;
}

std::string selection_csv(const IntervalReport& report) {
  std::string out = "snp,phenotype,mean,lower,upper\n";
  for (const auto& [i, j] : select_snps(report).pairs) {
    out += report.snp_names[i] + "," + report.phenotype_names[j] + "," +
           format_double(report.mean(i, j)) + "," + format_double(report.lower(i, j)) + "," +
           format_double(report.upper(i, j)) + "\n";
  }
  return out;
}

std::string ranking_csv(const IntervalReport& report, const Matrix& w_hat) {
  std::string out = "rank,snp,score,selected\n";
  Index rank = 1;
  for (const auto& r : rank_snps(w_hat)) {
    out += std::to_string(rank++) + "," + report.snp_names[r.snp] + "," + format_double(r.score) +
           "," + (report.snp_selected(r.snp) ? "1" : "0") + "\n";
  }
  return out;
}

std::string waic_grid_csv(const WaicReport& report) {
  std::string out = "lambda1_sq,lambda2_sq,waic,lppd,penalty,seed,seconds\n";
  for (const auto& row : report.rows) {
    out += format_double(row.point.lambda1_sq) + "," + format_double(row.point.lambda2_sq) + ",";
    if (row.ok) {
      out += format_double(row.terms.waic) + "," + format_double(row.terms.lppd) + "," +
             format_double(row.terms.penalty);
    } else {
      out += "NA,NA,NA";
    }
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.3f", row.seconds);
    out += "," + std::to_string(row.seed) + "," + secs + "\n";
  }
  return out;
}

std::string diagnostics_csv(const ChainOutput& chain, const std::vector<std::string>& snps,
                            const std::vector<std::string>& phenotypes) {
  std::string out = "snp,phenotype,split_rhat\n";
  std::vector<double> trace(chain.w.size());
  for (Index i = 0; i < static_cast<Index>(snps.size()); ++i) {
    for (Index j = 0; j < static_cast<Index>(phenotypes.size()); ++j) {
      for (std::size_t s = 0; s < chain.w.size(); ++s) trace[s] = chain.w[s](i, j);
      out += snps[i] + "," + phenotypes[j] + "," + format_double(stats::split_rhat(trace)) + "\n";
    }
  }
  const std::vector<double> sigma2(chain.sigma2.data(), chain.sigma2.data() + chain.sigma2.size());
  out += "sigma2,," + format_double(stats::split_rhat(sigma2)) + "\n";
  return out;
}

std::string bootstrap_csv(const BootstrapResult& result, const std::vector<std::string>& snps,
                          const std::vector<std::string>& phenotypes) {
  std::string out = "snp,phenotype,estimate,lower,upper,converged_fraction\n";
  const std::string fraction = format_double(result.converged_fraction());
  for (Index i = 0; i < result.estimate.rows(); ++i) {
    for (Index j = 0; j < result.estimate.cols(); ++j) {
      out += snps[i] + "," + phenotypes[j] + "," + format_double(result.estimate(i, j)) + "," +
             format_double(result.lower(i, j)) + "," + format_double(result.upper(i, j)) + "," +
             fraction + "\n";
    }
  }
  return out;
}

std::string coverage_csv(const CoverageTable& table, const std::string& study) {
  std::string out = "study,method,mcp_overall,mcp_active,replicates_used,failures\n";
  for (const auto& m : table.methods) {
    char line[256];
    std::snprintf(line, sizeof line, "%s,%s,%.4f,%.4f,%ld,%ld\n", study.c_str(), m.method.c_str(),
                  m.mcp_overall, m.mcp_active, static_cast<long>(m.replicates_used),
                  static_cast<long>(m.failures));
    out += line;
  }
  return out;
}

}  // namespace bgsm
