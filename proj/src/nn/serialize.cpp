#include "synthts/nn/serialize.hpp"

#include <fstream>

#include "synthts/core/binary_io.hpp"
#include "synthts/core/digest.hpp"
#include "synthts/core/error.hpp"

namespace synthts::nn {

using nlohmann::json;

json spec_to_json(const ModelSpec& spec) {
  const auto& s = spec.sizes;
  return {{"architecture", to_string(spec.architecture)},
          {"channels", spec.channels},
          {"length", spec.length},
          {"classes", spec.classes},
          {"sizes",
           {{"mlp_width", s.mlp_width},
            {"dropout", s.dropout},
            {"cnn_filters", s.cnn_filters},
            {"cnn_kernel", s.cnn_kernel},
            {"cnn_pool", s.cnn_pool},
            {"cnn_dense", s.cnn_dense},
            {"fcn_filters", s.fcn_filters},
            {"fcn_kernels", s.fcn_kernels},
            {"resnet_blocks", s.resnet_blocks},
            {"lstm_filters", s.lstm_filters},
            {"lstm_kernel", s.lstm_kernel},
            {"lstm_pool", s.lstm_pool},
            {"lstm_units", s.lstm_units},
            {"ae_hidden", s.ae_hidden},
            {"ae_code", s.ae_code},
            {"ae_reconstruction_weight", s.ae_reconstruction_weight}}}};
}

ModelSpec spec_from_json(const json& j) {
  try {
    ModelSpec spec;
    spec.architecture = architecture_from_string(j.at("architecture").get<std::string>());
    spec.channels = j.at("channels").get<std::size_t>();
    spec.length = j.at("length").get<std::size_t>();
    spec.classes = j.at("classes").get<std::size_t>();
    const auto& z = j.at("sizes");
    auto& s = spec.sizes;
    s.mlp_width = z.at("mlp_width").get<std::size_t>();
    s.dropout = z.at("dropout").get<double>();
    s.cnn_filters = z.at("cnn_filters").get<std::array<std::size_t, 2>>();
    s.cnn_kernel = z.at("cnn_kernel").get<std::size_t>();
    s.cnn_pool = z.at("cnn_pool").get<std::size_t>();
    s.cnn_dense = z.at("cnn_dense").get<std::size_t>();
    s.fcn_filters = z.at("fcn_filters").get<std::array<std::size_t, 3>>();
    s.fcn_kernels = z.at("fcn_kernels").get<std::array<std::size_t, 3>>();
    s.resnet_blocks = z.at("resnet_blocks").get<std::size_t>();
    s.lstm_filters = z.at("lstm_filters").get<std::size_t>();
    s.lstm_kernel = z.at("lstm_kernel").get<std::size_t>();
    s.lstm_pool = z.at("lstm_pool").get<std::size_t>();
    s.lstm_units = z.at("lstm_units").get<std::size_t>();
    s.ae_hidden = z.at("ae_hidden").get<std::size_t>();
    s.ae_code = z.at("ae_code").get<std::size_t>();
    s.ae_reconstruction_weight = z.at("ae_reconstruction_weight").get<double>();
    return spec;
  } catch (const json::exception& e) {
    throw DataError(std::string("model spec: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  const auto& net = *model.network;
  std::vector<float> flat;
  json params = json::array();
  for (std::size_t i = 0; i < net.parameters().size(); ++i) {
    const auto& v = net.parameters()[i]->value;
    flat.insert(flat.end(), v.data.begin(), v.data.end());
    params.push_back({{"name", net.parameter_names()[i]}, {"shape", v.shape}});
  }
  json norms = json::array();
  for (const auto& n : net.norm_stats()) {
    flat.insert(flat.end(), n.mean.begin(), n.mean.end());
    flat.insert(flat.end(), n.var.begin(), n.var.end());
    norms.push_back(n.mean.size());
  }
  const auto bytes = float32_le_bytes(flat);
  write_file_bytes(directory / "params.f32", bytes);
  json trace = json::array();
  for (const auto& r : model.trace) {
    trace.push_back({{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"val_loss", r.val_loss}});
  }
  json doc = {{"schema_version", "1"},
              {"spec", spec_to_json(net.spec())},
              {"seed", model.seed},
              {"best_epoch", model.best_epoch},
              {"best_val_loss", model.best_val_loss},
              {"trace", trace},
              {"parameters", params},
              {"norm_widths", norms},
              {"blob", {{"file", "params.f32"}, {"sha256", sha256_hex(bytes)}}}};
  std::ofstream out(directory / "model.json", std::ios::trunc);
  if (!out) throw DataError((directory / "model.json").string() + ": cannot write");
  out << doc.dump(2) << '\n';
}

TrainedModel load_model(const std::filesystem::path& directory) {
  const auto path = directory / "model.json";
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
  const auto bytes = read_file_bytes(directory / "params.f32");
  TrainedModel model;
  try {
    if (sha256_hex(bytes) != doc.at("blob").at("sha256").get<std::string>()) {
      throw DataError((directory / "params.f32").string() + ": checksum mismatch");
    }
    model.seed = doc.at("seed").get<std::uint64_t>();
    model.best_epoch = doc.at("best_epoch").get<std::size_t>();
    model.best_val_loss = doc.at("best_val_loss").get<double>();
    for (const auto& r : doc.at("trace")) {
      model.trace.push_back({r.at("epoch").get<std::size_t>(), r.at("train_loss").get<double>(),
                             r.at("val_loss").get<double>()});
    }
    auto net = std::make_shared<Network<float>>(spec_from_json(doc.at("spec")), 0);
    const auto flat = float32_from_le(bytes);
    std::size_t pos = 0;
    auto take = [&](std::size_t count) {
      if (pos + count > flat.size()) throw DataError(path.string() + ": parameter blob too short");
      std::vector<float> out(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                             flat.begin() + static_cast<std::ptrdiff_t>(pos + count));
      pos += count;
      return out;
    };
    typename Network<float>::State state;
    for (const auto& p : net->parameters()) state.parameters.push_back(take(p->value.size()));
    for (const auto& n : net->norm_stats()) {
      NormStats<float> s;
      s.mean = take(n.mean.size());
      s.var = take(n.var.size());
      state.norms.push_back(std::move(s));
    }
    if (pos != flat.size()) throw DataError(path.string() + ": parameter blob has trailing values");
    net->restore(state);
    model.network = std::move(net);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return model;
}

}  // namespace synthts::nn
