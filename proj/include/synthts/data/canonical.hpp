#ifndef SYNTHTS_DATA_CANONICAL_HPP
#define SYNTHTS_DATA_CANONICAL_HPP

#include <filesystem>
#include <string>

#include <json.hpp>

#include "synthts/data/dataset.hpp"

namespace synthts::data {

// On-disk container, one directory:
//   manifest.json  metadata, shape, normalization state, SHA-256 of the tensor
//   windows.f32    little-endian float32, row-major [N, C, L]
//   labels.csv     index,class_id,subject_id
// Output bytes are a pure function of the dataset.
void write_canonical(const WindowedDataset& dataset, const std::filesystem::path& directory);

// Validates shape against file size and the checksum; throws DataError on
// any mismatch.
WindowedDataset read_canonical(const std::filesystem::path& directory);

// SHA-256 over the little-endian tensor bytes; used as dataset fingerprint.
std::string tensor_fingerprint(const WindowedDataset& dataset);

nlohmann::json meta_to_json(const DatasetMeta& meta);
DatasetMeta meta_from_json(const nlohmann::json& j);

}  // namespace synthts::data

#endif  // SYNTHTS_DATA_CANONICAL_HPP
