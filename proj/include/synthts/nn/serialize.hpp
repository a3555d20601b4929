#ifndef SYNTHTS_NN_SERIALIZE_HPP
#define SYNTHTS_NN_SERIALIZE_HPP

#include <filesystem>

#include <json.hpp>

#include "synthts/nn/train.hpp"

namespace synthts::nn {

// Directory layout:
//   model.json   spec, seed, training trace, parameter names/shapes, blob checksum
//   params.f32   little-endian float32: every parameter in order, then each
//                normalization layer's running mean and variance
void save_model(const TrainedModel& model, const std::filesystem::path& directory);
TrainedModel load_model(const std::filesystem::path& directory);

nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);

}  // namespace synthts::nn

#endif  // SYNTHTS_NN_SERIALIZE_HPP
