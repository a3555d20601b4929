#include "synthts/data/canonical.hpp"

#include <fstream>
#include <sstream>

#include "synthts/core/binary_io.hpp"
#include "synthts/core/digest.hpp"
#include "synthts/core/error.hpp"
#include "synthts/data/csv.hpp"

namespace synthts::data {

using nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kTensor = "windows.f32";
constexpr const char* kLabels = "labels.csv";

void check_identifier(const std::string& s) {
  if (s.empty() || s.find_first_of(",\"\n\r") != std::string::npos) {
    throw DataError("subject id '" + s + "' must be non-empty and free of commas, quotes and newlines");
  }
}

}  // namespace

json meta_to_json(const DatasetMeta& meta) {
  json channels = json::array();
  for (const auto& c : meta.channels) {
    json e = {{"name", c.name}, {"native_rate", c.native_rate}, {"kind", to_string(c.kind)}};
    e["lowpass_cutoff"] = c.lowpass_cutoff ? json(*c.lowpass_cutoff) : json(nullptr);
    channels.push_back(e);
  }
  json norm = {{"state", to_string(meta.normalization.state)}};
  if (meta.normalization.state == NormalizationState::ZScored) {
    norm["mean"] = meta.normalization.mean;
    norm["std"] = meta.normalization.stddev;
    norm["degenerate"] = meta.normalization.degenerate;
  }
  json j = {{"name", meta.name},
            {"channels", channels},
            {"rate", meta.rate},
            {"window_seconds", meta.window_seconds},
            {"n_classes", meta.n_classes},
            {"class_names", meta.class_names},
            {"normalization", norm}};
  if (!meta.provenance.empty()) j["provenance"] = meta.provenance;
  return j;
}

DatasetMeta meta_from_json(const json& j) {
  try {
    DatasetMeta meta;
    meta.name = j.at("name").get<std::string>();
    for (const auto& c : j.at("channels")) {
      ChannelSpec spec;
      spec.name = c.at("name").get<std::string>();
      spec.native_rate = c.at("native_rate").get<double>();
      spec.kind = channel_kind_from_string(c.at("kind").get<std::string>());
      if (c.contains("lowpass_cutoff") && !c.at("lowpass_cutoff").is_null()) {
        spec.lowpass_cutoff = c.at("lowpass_cutoff").get<double>();
      }
      meta.channels.push_back(spec);
    }
    meta.rate = j.at("rate").get<double>();
    meta.window_seconds = j.at("window_seconds").get<double>();
    meta.n_classes = j.at("n_classes").get<int>();
    meta.class_names = j.value("class_names", std::vector<std::string>{});
    const auto& norm = j.at("normalization");
    meta.normalization.state = normalization_state_from_string(norm.at("state").get<std::string>());
    if (meta.normalization.state == NormalizationState::ZScored) {
      meta.normalization.mean = norm.at("mean").get<std::vector<double>>();
      meta.normalization.stddev = norm.at("std").get<std::vector<double>>();
      meta.normalization.degenerate = norm.at("degenerate").get<std::vector<bool>>();
    }
    if (j.contains("provenance")) meta.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
    return meta;
  } catch (const json::exception& e) {
    throw DataError(std::string("canonical manifest: ") + e.what());
  }
}

std::string tensor_fingerprint(const WindowedDataset& dataset) {
  return sha256_hex(float32_le_bytes(dataset.values()));
}

void write_canonical(const WindowedDataset& dataset, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  const auto bytes = float32_le_bytes(dataset.values());
  {
    std::ofstream out(directory / kTensor, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError((directory / kTensor).string() + ": cannot write");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  {
    std::ofstream out(directory / kLabels, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError((directory / kLabels).string() + ": cannot write");
    out << "index,class_id,subject_id\n";
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      check_identifier(dataset.subjects()[i]);
      out << i << ',' << dataset.labels()[i] << ',' << dataset.subjects()[i] << '\n';
    }
  }
  json manifest = {{"schema_version", "1"},
                   {"dataset", meta_to_json(dataset.meta())},
                   {"shape", {{"n", dataset.size()}, {"channels", dataset.channels()}, {"length", dataset.length()}}},
                   {"tensor", {{"file", kTensor}, {"dtype", "float32-le"}, {"sha256", sha256_hex(bytes)}}},
                   {"labels", {{"file", kLabels}}}};
  std::ofstream out(directory / kManifest, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError((directory / kManifest).string() + ": cannot write");
  out << manifest.dump(2) << '\n';
}

WindowedDataset read_canonical(const std::filesystem::path& directory) {
  const auto manifest_path = directory / kManifest;
  std::ifstream in(manifest_path);
  if (!in) throw DataError(manifest_path.string() + ": cannot open (not a canonical dataset directory?)");
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": invalid JSON: " + e.what());
  }
  if (manifest.value("schema_version", "") != "1") throw DataError(manifest_path.string() + ": unsupported schema");
  auto meta = meta_from_json(manifest.at("dataset"));
  std::size_t n = 0, channels = 0, length = 0;
  std::string expected_sha;
  try {
    n = manifest.at("shape").at("n").get<std::size_t>();
    channels = manifest.at("shape").at("channels").get<std::size_t>();
    length = manifest.at("shape").at("length").get<std::size_t>();
    expected_sha = manifest.at("tensor").at("sha256").get<std::string>();
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  if (channels != meta.channels.size()) {
    std::ostringstream os;
    os << manifest_path.string() << ": shape declares " << channels << " channels but " << meta.channels.size()
       << " channel specs are listed";
    throw DataError(os.str());
  }

  const auto tensor_path = directory / kTensor;
  std::ifstream tin(tensor_path, std::ios::binary);
  if (!tin) throw DataError(tensor_path.string() + ": cannot open");
  std::vector<std::byte> bytes(std::filesystem::file_size(tensor_path));
  tin.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (bytes.size() != n * channels * length * 4) {
    std::ostringstream os;
    os << tensor_path.string() << ": shape mismatch, file holds " << bytes.size() << " bytes but manifest shape [" << n
       << ", " << channels << ", " << length << "] needs " << n * channels * length * 4;
    throw DataError(os.str());
  }
  if (sha256_hex(bytes) != expected_sha) throw DataError(tensor_path.string() + ": checksum mismatch");

  std::vector<int> labels;
  std::vector<std::string> subjects;
  const auto labels_path = directory / kLabels;
  std::ifstream lin(labels_path);
  if (!lin) throw DataError(labels_path.string() + ": cannot open");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lin, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    double index = 0.0, cls = 0.0;
    if (c2 == std::string::npos || !parse_finite(std::string_view(line).substr(0, c1), index) ||
        !parse_finite(std::string_view(line).substr(c1 + 1, c2 - c1 - 1), cls) ||
        index != static_cast<double>(labels.size())) {
      throw DataError(labels_path.string() + ":" + std::to_string(line_no) + ": malformed label row");
    }
    labels.push_back(static_cast<int>(cls));
    subjects.push_back(line.substr(c2 + 1));
  }
  if (labels.size() != n) {
    throw DataError(labels_path.string() + ": " + std::to_string(labels.size()) + " label rows for " +
                    std::to_string(n) + " windows");
  }
  return WindowedDataset(std::move(meta), n, length, float32_from_le(bytes), std::move(labels), std::move(subjects));
}

}  // namespace synthts::data
