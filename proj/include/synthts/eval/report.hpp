#ifndef SYNTHTS_EVAL_REPORT_HPP
#define SYNTHTS_EVAL_REPORT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "synthts/eval/protocols.hpp"

namespace synthts::eval {

// Identification shared by every report. Reports can only be compared when
// their real-dataset fingerprints agree.
struct ReportHeader {
  std::string config_id;
  std::string config_hash;  // SHA-256 of config.dump()
  nlohmann::json config = nlohmann::json::object();
  std::string dataset;
  std::string real_fingerprint;
  std::string synth_fingerprint;
  std::vector<std::string> class_names;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> warnings;
};

// Builds a header with config_hash filled in from `config`.
ReportHeader make_header(std::string config_id, nlohmann::json config, const data::WindowedDataset& real,
                         const data::WindowedDataset& synth, std::vector<std::uint64_t> seeds);

struct QualityEntry {
  std::string modality;
  std::string metric;
  std::vector<std::optional<double>> per_class;
  std::optional<double> class_average;
  std::optional<double> pooled;
  std::string plan;  // pair plan, kernel bandwidths or classifier seeds behind the value
};

struct QualityReport {
  ReportHeader header;
  std::vector<QualityEntry> entries;
};

struct UtilityReport {
  ReportHeader header;
  std::vector<UtilityRun> runs;
};

enum class Format { Json, Csv, Markdown };
Format format_from_string(const std::string& text);
std::set<Format> all_formats();

nlohmann::json to_json(const QualityReport& report);
nlohmann::json to_json(const UtilityReport& report);
QualityReport quality_from_json(const nlohmann::json& j);
UtilityReport utility_from_json(const nlohmann::json& j);

std::string to_csv(const QualityReport& report);
std::string to_csv(const UtilityReport& report);
std::string to_markdown(const QualityReport& report);
std::string to_markdown(const UtilityReport& report);

// Mean delta per non-baseline protocol, averaged over classifiers.
std::vector<std::pair<Protocol, double>> global_deltas(const UtilityResult& result);

// Side-by-side tables, one row per report, best value per column in bold
// (lowest for quality, highest for utility deltas). Throws DataError when
// the reports stem from different real datasets.
std::string compare_markdown(std::span<const QualityReport> reports);
std::string compare_markdown(std::span<const UtilityReport> reports);
std::string compare_csv(std::span<const QualityReport> reports);
std::string compare_csv(std::span<const UtilityReport> reports);
void require_same_dataset(std::span<const ReportHeader* const> headers);

// Writes <stem>.json / .csv / .md into `directory` for the requested formats.
void write_report(const QualityReport& report, const std::filesystem::path& directory, const std::string& stem,
                  const std::set<Format>& formats);
void write_report(const UtilityReport& report, const std::filesystem::path& directory, const std::string& stem,
                  const std::set<Format>& formats);

// Cell text for tables: 4 significant digits, "n/a" when absent.
std::string format_cell(std::optional<double> value);

}  // namespace synthts::eval

#endif  // SYNTHTS_EVAL_REPORT_HPP
