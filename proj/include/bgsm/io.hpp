#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bgsm/report.hpp"
#include "bgsm/types.hpp"

namespace bgsm {

struct BootstrapResult;
struct CoverageTable;
struct WaicReport;

// Scalar parsing; every function throws InputError on malformed text.
double parse_double(const std::string& text);
long parse_long(const std::string& text);
std::uint64_t parse_u64(const std::string& text);
bool parse_bool(const std::string& text);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

struct KeyValues {
  std::vector<std::pair<std::string, std::string>> entries;  // file order

  std::optional<std::string> get(const std::string& key) const;
};

/// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
KeyValues parse_key_values(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Comma-separated, no quoting, header row required, rows must match header width.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::string& source = "<memory>");

/// Genotype CSV (header = SNP ids), phenotype CSV (header = phenotype ids), and
/// group map CSV with columns snp_id, gene_id. Genes are numbered in order of
/// first appearance in the group map.
Dataset load_dataset(const std::filesystem::path& genotypes, const std::filesystem::path& phenotypes,
                     const std::filesystem::path& groups);

/// Inverse of load_dataset; numbers are written with format_double.
void save_dataset(const Dataset& data, const std::filesystem::path& genotypes,
                  const std::filesystem::path& phenotypes, const std::filesystem::path& groups);

std::string posterior_summary_csv(const IntervalReport& report);
std::string selection_csv(const IntervalReport& report);
std::string ranking_csv(const IntervalReport& report, const Matrix& w_hat);
std::string waic_grid_csv(const WaicReport& report);
/// Split R-hat per coefficient plus a final sigma2 row; columns snp,phenotype,split_rhat.
std::string diagnostics_csv(const ChainOutput& chain, const std::vector<std::string>& snps,
                            const std::vector<std::string>& phenotypes);
std::string bootstrap_csv(const BootstrapResult& result, const std::vector<std::string>& snps,
                          const std::vector<std::string>& phenotypes);
std::string coverage_csv(const CoverageTable& table, const std::string& study);

}  // namespace bgsm
