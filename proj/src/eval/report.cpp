#include "synthts/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "synthts/core/digest.hpp"
#include "synthts/core/error.hpp"
#include "synthts/data/canonical.hpp"

namespace synthts::eval {

using nlohmann::json;

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json optionals_json(const std::vector<std::optional<double>>& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(optional_json(x));
  return out;
}

std::vector<std::optional<double>> optionals_from(const json& j) {
  std::vector<std::optional<double>> out;
  for (const auto& x : j) out.push_back(optional_from(x));
  return out;
}

json header_json(const ReportHeader& h) {
  return {{"config_id", h.config_id},
          {"config_hash", h.config_hash},
          {"config", h.config},
          {"dataset", h.dataset},
          {"real_fingerprint", h.real_fingerprint},
          {"synth_fingerprint", h.synth_fingerprint},
          {"class_names", h.class_names},
          {"seeds", h.seeds},
          {"warnings", h.warnings}};
}

ReportHeader header_from(const json& j) {
  ReportHeader h;
  h.config_id = j.at("config_id").get<std::string>();
  h.config_hash = j.at("config_hash").get<std::string>();
  h.config = j.at("config");
  h.dataset = j.at("dataset").get<std::string>();
  h.real_fingerprint = j.at("real_fingerprint").get<std::string>();
  h.synth_fingerprint = j.at("synth_fingerprint").get<std::string>();
  h.class_names = j.at("class_names").get<std::vector<std::string>>();
  h.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  h.warnings = j.at("warnings").get<std::vector<std::string>>();
  return h;
}

void check_kind(const json& j, const std::string& kind) {
  if (j.value("schema_version", "") != "1") throw DataError("report: unsupported schema version");
  if (j.value("kind", "") != kind) throw DataError("report: expected a " + kind + " report");
}

std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

std::string join_counts(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + std::to_string(v[i]);
  return out;
}

std::string short_hash(const std::string& h) { return h.substr(0, 12); }

std::string class_label(const ReportHeader& h, std::size_t k) {
  return k < h.class_names.size() && !h.class_names[k].empty() ? h.class_names[k] : "class " + std::to_string(k);
}

// Markdown table with per-column best in bold. Cells of column c are compared
// when `rank[c]` is set: +1 lower is better, -1 higher is better.
std::string table(const std::vector<std::string>& head, const std::vector<std::vector<std::optional<double>>>& rows,
                  const std::vector<std::string>& row_names, const std::vector<int>& rank) {
  std::vector<std::optional<double>> best(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) {
    std::size_t present = 0;
    for (const auto& r : rows) {
      if (!r[c]) continue;
      ++present;
      if (!best[c] || (rank[c] > 0 ? *r[c] < *best[c] : *r[c] > *best[c])) best[c] = r[c];
    }
    if (present < 2 || rank[c] == 0) best[c].reset();
  }
  std::ostringstream os;
  os << "| Config ID";
  for (const auto& h : head) os << " | " << h;
  os << " |\n|---";
  for (std::size_t c = 0; c < head.size(); ++c) os << "|---";
  os << "|\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    os << "| " << row_names[r];
    for (std::size_t c = 0; c < head.size(); ++c) {
      const auto text = format_cell(rows[r][c]);
      const bool bold = best[c] && rows[r][c] && format_cell(best[c]) == text;
      os << " | " << (bold ? "**" + text + "**" : text);
    }
    os << " |\n";
  }
  return os.str();
}

std::vector<Protocol> protocols_in(const std::vector<UtilityRun>& runs) {
  std::vector<Protocol> out;
  for (const auto& r : runs) {
    if (std::find(out.begin(), out.end(), r.protocol) == out.end()) out.push_back(r.protocol);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot write");
  out << text;
}

}  // namespace

ReportHeader make_header(std::string config_id, json config, const data::WindowedDataset& real,
                         const data::WindowedDataset& synth, std::vector<std::uint64_t> seeds) {
  ReportHeader h;
  h.config_id = std::move(config_id);
  h.config_hash = sha256_hex(config.dump());
  h.config = std::move(config);
  h.dataset = real.meta().name;
  h.real_fingerprint = data::tensor_fingerprint(real);
  h.synth_fingerprint = data::tensor_fingerprint(synth);
  h.class_names = real.meta().class_names;
  h.seeds = std::move(seeds);
  return h;
}

std::string format_cell(std::optional<double> value) {
  if (!value) return "n/a";
  if (*value == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", *value);
  return buf;
}

Format format_from_string(const std::string& text) {
  if (text == "json") return Format::Json;
  if (text == "csv") return Format::Csv;
  if (text == "md" || text == "markdown") return Format::Markdown;
  throw UsageError("unknown format '" + text + "' (expected json, csv or md)");
}

std::set<Format> all_formats() { return {Format::Json, Format::Csv, Format::Markdown}; }

json to_json(const QualityReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"modality", e.modality},
                       {"metric", e.metric},
                       {"per_class", optionals_json(e.per_class)},
                       {"class_average", optional_json(e.class_average)},
                       {"pooled", optional_json(e.pooled)},
                       {"plan", e.plan}});
  }
  return {{"schema_version", "1"}, {"kind", "quality"}, {"header", header_json(report.header)}, {"entries", entries}};
}

QualityReport quality_from_json(const json& j) {
  check_kind(j, "quality");
  try {
    QualityReport r;
    r.header = header_from(j.at("header"));
    for (const auto& e : j.at("entries")) {
      r.entries.push_back({e.at("modality").get<std::string>(), e.at("metric").get<std::string>(),
                           optionals_from(e.at("per_class")), optional_from(e.at("class_average")),
                           optional_from(e.at("pooled")), e.at("plan").get<std::string>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("quality report: ") + e.what());
  }
}

json to_json(const UtilityReport& report) {
  json runs = json::array();
  for (const auto& r : report.runs) {
    runs.push_back({{"protocol", to_string(r.protocol)},
                    {"classifier", nn::to_string(r.classifier)},
                    {"seed", r.seed},
                    {"auroc", r.auroc},
                    {"delta", optional_json(r.delta)},
                    {"train_counts", r.train_counts},
                    {"val_counts", r.val_counts},
                    {"synthetic_ratio", optional_json(r.synthetic_ratio)},
                    {"best_epoch", r.best_epoch}});
  }
  json summary = json::array();
  for (const auto& s : summarize(UtilityResult{report.runs})) {
    summary.push_back({{"protocol", to_string(s.protocol)},
                       {"classifier", nn::to_string(s.classifier)},
                       {"auroc", s.auroc},
                       {"delta", optional_json(s.delta)}});
  }
  json global = json::object();
  for (const auto& [p, d] : global_deltas(UtilityResult{report.runs})) global[to_string(p)] = d;
  return {{"schema_version", "1"},     {"kind", "utility"}, {"header", header_json(report.header)},
          {"runs", runs},              {"summary", summary}, {"global_deltas", global}};
}

UtilityReport utility_from_json(const json& j) {
  check_kind(j, "utility");
  try {
    UtilityReport r;
    r.header = header_from(j.at("header"));
    for (const auto& x : j.at("runs")) {
      UtilityRun run;
      run.protocol = protocol_from_string(x.at("protocol").get<std::string>());
      run.classifier = nn::architecture_from_string(x.at("classifier").get<std::string>());
      run.seed = x.at("seed").get<std::uint64_t>();
      run.auroc = x.at("auroc").get<double>();
      run.delta = optional_from(x.at("delta"));
      run.train_counts = x.at("train_counts").get<std::vector<std::size_t>>();
      run.val_counts = x.at("val_counts").get<std::vector<std::size_t>>();
      run.synthetic_ratio = optional_from(x.at("synthetic_ratio"));
      run.best_epoch = x.at("best_epoch").get<std::size_t>();
      r.runs.push_back(std::move(run));
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("utility report: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("utility report: ") + e.what());
  }
}

std::vector<std::pair<Protocol, double>> global_deltas(const UtilityResult& result) {
  std::map<Protocol, std::pair<double, std::size_t>> acc;
  for (const auto& s : summarize(result)) {
    if (!s.delta) continue;
    acc[s.protocol].first += *s.delta;
    ++acc[s.protocol].second;
  }
  std::vector<std::pair<Protocol, double>> out;
  for (const auto& [p, v] : acc) out.emplace_back(p, v.first / static_cast<double>(v.second));
  return out;
}

std::string to_csv(const QualityReport& report) {
  std::ostringstream os;
  os << "config_id,modality,metric,class,value,plan\n";
  for (const auto& e : report.entries) {
    for (std::size_t k = 0; k < e.per_class.size(); ++k) {
      os << report.header.config_id << ',' << e.modality << ',' << e.metric << ',' << k << ','
         << csv_number(e.per_class[k]) << ',' << e.plan << '\n';
    }
    os << report.header.config_id << ',' << e.modality << ',' << e.metric << ",average,"
       << csv_number(e.class_average) << ',' << e.plan << '\n';
    if (e.pooled) {
      os << report.header.config_id << ',' << e.modality << ',' << e.metric << ",pooled," << csv_number(e.pooled)
         << ',' << e.plan << '\n';
    }
  }
  return os.str();
}

std::string to_csv(const UtilityReport& report) {
  std::ostringstream os;
  os << "config_id,protocol,classifier,seed,auroc,delta,train_counts,val_counts,synthetic_ratio\n";
  for (const auto& r : report.runs) {
    os << report.header.config_id << ',' << to_string(r.protocol) << ',' << nn::to_string(r.classifier) << ','
       << r.seed << ',' << csv_number(r.auroc) << ',' << csv_number(r.delta) << ',' << join_counts(r.train_counts)
       << ',' << join_counts(r.val_counts) << ',' << csv_number(r.synthetic_ratio) << '\n';
  }
  return os.str();
}

void require_same_dataset(std::span<const ReportHeader* const> headers) {
  for (const auto* h : headers) {
    if (h->real_fingerprint != headers.front()->real_fingerprint) {
      throw DataError("reports '" + headers.front()->config_id + "' and '" + h->config_id +
                      "' were computed on different real datasets (fingerprints " +
                      short_hash(headers.front()->real_fingerprint) + " vs " + short_hash(h->real_fingerprint) + ")");
    }
  }
}

std::string compare_markdown(std::span<const QualityReport> reports) {
  std::vector<const ReportHeader*> headers;
  for (const auto& r : reports) headers.push_back(&r.header);
  require_same_dataset(headers);
  std::vector<std::pair<std::string, std::string>> columns;
  for (const auto& r : reports) {
    for (const auto& e : r.entries) {
      const std::pair key{e.modality, e.metric};
      if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
    }
  }
  std::vector<std::string> head;
  for (const auto& [m, metric] : columns) head.push_back(m + " " + metric);
  std::vector<std::vector<std::optional<double>>> rows;
  std::vector<std::string> names;
  for (const auto& r : reports) {
    std::vector<std::optional<double>> row(columns.size());
    for (const auto& e : r.entries) {
      const auto c = static_cast<std::size_t>(
          std::find(columns.begin(), columns.end(), std::pair{e.modality, e.metric}) - columns.begin());
      row[c] = e.class_average ? e.class_average : e.pooled;
    }
    rows.push_back(std::move(row));
    names.push_back(r.header.config_id);
  }
  return table(head, rows, names, std::vector<int>(head.size(), 1));
}

std::string compare_markdown(std::span<const UtilityReport> reports) {
  std::vector<const ReportHeader*> headers;
  for (const auto& r : reports) headers.push_back(&r.header);
  require_same_dataset(headers);
  std::vector<Protocol> protos;
  for (const auto& r : reports) {
    for (auto p : protocols_in(r.runs)) {
      if (p != Protocol::TRTR && std::find(protos.begin(), protos.end(), p) == protos.end()) protos.push_back(p);
    }
  }
  std::sort(protos.begin(), protos.end());
  std::vector<std::string> head;
  for (auto p : protos) head.push_back(to_string(p) + " Δ");
  std::vector<std::vector<std::optional<double>>> rows;
  std::vector<std::string> names;
  for (const auto& r : reports) {
    std::vector<std::optional<double>> row(protos.size());
    for (const auto& [p, d] : global_deltas(UtilityResult{r.runs})) {
      row[static_cast<std::size_t>(std::find(protos.begin(), protos.end(), p) - protos.begin())] = d;
    }
    rows.push_back(std::move(row));
    names.push_back(r.header.config_id);
  }
  return table(head, rows, names, std::vector<int>(head.size(), -1));
}

std::string compare_csv(std::span<const QualityReport> reports) {
  std::string out;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    auto text = to_csv(reports[i]);
    out += i == 0 ? text : text.substr(text.find('\n') + 1);
  }
  return out;
}

std::string compare_csv(std::span<const UtilityReport> reports) {
  std::string out;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    auto text = to_csv(reports[i]);
    out += i == 0 ? text : text.substr(text.find('\n') + 1);
  }
  return out;
}

std::string to_markdown(const QualityReport& report) {
  const auto& h = report.header;
  std::ostringstream os;
  os << "## Quality: " << h.config_id << "\n\n";
  os << "Dataset `" << h.dataset << "`, real `" << short_hash(h.real_fingerprint) << "`, synthetic `"
     << short_hash(h.synth_fingerprint) << "`, config hash `" << short_hash(h.config_hash) << "`.\n\n";
  os << "Class averages (sample metrics on features: CD, CrD, L2; on raw windows: DTWD; distribution: MMD, En, "
        "DS).\n\n";
  os << compare_markdown(std::span<const QualityReport>(&report, 1)) << '\n';
  std::size_t classes = h.class_names.size();
  for (const auto& e : report.entries) classes = std::max(classes, e.per_class.size());
  os << "### Per class\n\n| Modality | Metric";
  for (std::size_t k = 0; k < classes; ++k) os << " | " << class_label(h, k);
  os << " | Class avg | Pooled | Plan |\n|---|---";
  for (std::size_t k = 0; k < classes + 3; ++k) os << "|---";
  os << "|\n";
  for (const auto& e : report.entries) {
    os << "| " << e.modality << " | " << e.metric;
    for (std::size_t k = 0; k < classes; ++k) os << " | " << format_cell(k < e.per_class.size() ? e.per_class[k] : std::nullopt);
    os << " | " << format_cell(e.class_average) << " | " << format_cell(e.pooled) << " | " << e.plan << " |\n";
  }
  if (!h.warnings.empty()) {
    os << "\n### Warnings\n\n";
    for (const auto& w : h.warnings) os << "- " << w << '\n';
  }
  return os.str();
}

std::string to_markdown(const UtilityReport& report) {
  const auto& h = report.header;
  std::ostringstream os;
  os << "## Utility: " << h.config_id << "\n\n";
  os << "Dataset `" << h.dataset << "`, real `" << short_hash(h.real_fingerprint) << "`, synthetic `"
     << short_hash(h.synth_fingerprint) << "`, config hash `" << short_hash(h.config_hash) << "`, seeds ";
  for (std::size_t i = 0; i < h.seeds.size(); ++i) os << (i ? ", " : "") << h.seeds[i];
  os << ".\n\nTest AUROC averaged over seeds; Δ is the change against TRTR for the same classifier and seed.\n\n";

  const auto protos = protocols_in(report.runs);
  const auto summary = summarize(UtilityResult{report.runs});
  std::vector<std::string> head;
  std::vector<int> rank;
  for (auto p : protos) {
    head.push_back(to_string(p));
    rank.push_back(-1);
    if (p != Protocol::TRTR) {
      head.push_back(to_string(p) + " Δ");
      rank.push_back(-1);
    }
  }
  std::vector<nn::Architecture> archs;
  for (const auto& s : summary) {
    if (std::find(archs.begin(), archs.end(), s.classifier) == archs.end()) archs.push_back(s.classifier);
  }
  std::vector<std::vector<std::optional<double>>> rows;
  std::vector<std::string> names;
  for (auto a : archs) {
    std::vector<std::optional<double>> row;
    for (auto p : protos) {
      std::optional<double> auroc, delta;
      for (const auto& s : summary) {
        if (s.protocol == p && s.classifier == a) {
          auroc = s.auroc;
          delta = s.delta;
        }
      }
      row.push_back(auroc);
      if (p != Protocol::TRTR) row.push_back(delta);
    }
    rows.push_back(std::move(row));
    names.push_back(nn::to_string(a));
  }
  auto text = table(head, rows, names, rank);
  // Row label column is the classifier here.
  text.replace(text.find("Config ID"), 9, "Classifier");
  os << text;
  const auto global = global_deltas(UtilityResult{report.runs});
  if (!global.empty()) {
    os << "\nAverage Δ over classifiers: ";
    for (std::size_t i = 0; i < global.size(); ++i) {
      os << (i ? ", " : "") << to_string(global[i].first) << " " << format_cell(global[i].second);
    }
    os << "\n";
  }
  os << "\n### Runs\n\n| Protocol | Classifier | Seed | AUROC | Δ | Train counts | Val counts | Synthetic/real |\n"
        "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : report.runs) {
    os << "| " << to_string(r.protocol) << " | " << nn::to_string(r.classifier) << " | " << r.seed << " | "
       << format_cell(r.auroc) << " | " << format_cell(r.delta) << " | " << join_counts(r.train_counts) << " | "
       << join_counts(r.val_counts) << " | " << format_cell(r.synthetic_ratio) << " |\n";
  }
  if (!h.warnings.empty()) {
    os << "\n### Warnings\n\n";
    for (const auto& w : h.warnings) os << "- " << w << '\n';
  }
  return os.str();
}

void write_report(const QualityReport& report, const std::filesystem::path& directory, const std::string& stem,
                  const std::set<Format>& formats) {
  std::filesystem::create_directories(directory);
  if (formats.count(Format::Json)) write_text(directory / (stem + ".json"), to_json(report).dump(2) + "\n");
  if (formats.count(Format::Csv)) write_text(directory / (stem + ".csv"), to_csv(report));
  if (formats.count(Format::Markdown)) write_text(directory / (stem + ".md"), to_markdown(report));
}

void write_report(const UtilityReport& report, const std::filesystem::path& directory, const std::string& stem,
                  const std::set<Format>& formats) {
  std::filesystem::create_directories(directory);
  if (formats.count(Format::Json)) write_text(directory / (stem + ".json"), to_json(report).dump(2) + "\n");
  if (formats.count(Format::Csv)) write_text(directory / (stem + ".csv"), to_csv(report));
  if (formats.count(Format::Markdown)) write_text(directory / (stem + ".md"), to_markdown(report));
}

}  // namespace synthts::eval
