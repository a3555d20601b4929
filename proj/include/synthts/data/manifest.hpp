#ifndef SYNTHTS_DATA_MANIFEST_HPP
#define SYNTHTS_DATA_MANIFEST_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "synthts/data/dataset.hpp"
#include "synthts/data/labeling.hpp"

namespace synthts::data {

// Where one channel of one subject lives on disk.
struct FileEntry {
  std::string subject;
  std::string channel;
  std::filesystem::path path;  // relative paths resolve against the manifest directory
  std::size_t column = 0;
  std::size_t skip = 0;  // leading header rows
  double native_rate = 0.0;
};

// Declarative description of a raw multimodal recording set. JSON schema
// version "1":
//
//   {
//     "schema_version": "1",
//     "name": "...",
//     "target_rate": 100, "window_seconds": 10,
//     "channels": [{"name": "ECG", "native_rate": 700, "kind": "quasi-periodic",
//                   "lowpass_cutoff": 5}],
//     "files": [{"subject": "S2", "channel": "ECG", "path": "s2_ecg.csv",
//                "column": 0, "skip": 1, "native_rate": 700}],
//     "phases": [{"subject": "S2", "phase": "baseline", "start": 0, "end": 60,
//                 "annotations": {"rate": 20, "valence": [...], "arousal": [...]}}],
//     "label_map": "wesad" | "swell" | {"class_names": [...], "threshold": 5,
//                   "rules": [{"phase": "TSST", "class": 1},
//                             {"phase": "recovery", "class": "EXCLUDED"},
//                             {"phase": "video", "class": "THRESHOLD"}]}
//   }
struct DatasetManifest {
  std::string name;
  std::vector<ChannelSpec> channels;
  std::vector<FileEntry> files;
  std::vector<PhaseAnnotation> phases;
  LabelMap label_map;
  double target_rate = 0.0;
  double window_seconds = 0.0;
  std::filesystem::path base_dir;

  // Ordered unique subject ids as they first appear in `files`.
  std::vector<std::string> subjects() const;
  // Structural checks; with check_files also verifies every file exists.
  void validate(bool check_files = true) const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

DatasetManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json manifest_to_json(const DatasetManifest& m);
DatasetManifest load_manifest(const std::filesystem::path& path);

nlohmann::json label_map_to_json(const LabelMap& map);
LabelMap label_map_from_json(const nlohmann::json& j);

}  // namespace synthts::data

#endif  // SYNTHTS_DATA_MANIFEST_HPP
