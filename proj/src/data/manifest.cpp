#include "synthts/data/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "synthts/core/error.hpp"

namespace synthts::data {

using nlohmann::json;

namespace {

template <typename T>
T required(const json& j, const char* key, const std::string& context) {
  if (!j.is_object() || !j.contains(key)) throw DataError(context + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(context + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

json label_map_to_json(const LabelMap& map) {
  json rules = json::array();
  for (const auto& r : map.rules) {
    json rule = {{"phase", r.phase}};
    switch (r.kind) {
      case RuleKind::Class:
        rule["class"] = r.class_id;
        break;
      case RuleKind::Excluded:
        rule["class"] = "EXCLUDED";
        break;
      case RuleKind::Threshold:
        rule["class"] = "THRESHOLD";
        break;
    }
    rules.push_back(rule);
  }
  return {{"class_names", map.class_names}, {"threshold", map.threshold}, {"rules", rules}};
}

LabelMap label_map_from_json(const json& j) {
  if (j.is_string()) {
    const auto preset = j.get<std::string>();
    if (preset == "wesad") return LabelMap::wesad();
    if (preset == "swell") return LabelMap::swell();
    throw DataError("label_map: unknown preset '" + preset + "'");
  }
  LabelMap map;
  if (j.contains("class_names")) map.class_names = j.at("class_names").get<std::vector<std::string>>();
  if (j.contains("threshold")) map.threshold = j.at("threshold").get<double>();
  for (const auto& r : required<json>(j, "rules", "label_map")) {
    LabelRule rule;
    rule.phase = required<std::string>(r, "phase", "label_map rule");
    const auto& cls = r.at("class");
    if (cls.is_string()) {
      const auto tag = cls.get<std::string>();
      if (tag == "EXCLUDED") {
        rule.kind = RuleKind::Excluded;
      } else if (tag == "THRESHOLD") {
        rule.kind = RuleKind::Threshold;
      } else {
        throw DataError("label_map rule for '" + rule.phase + "': unknown class tag '" + tag + "'");
      }
    } else if (cls.is_number_integer()) {
      rule.kind = RuleKind::Class;
      rule.class_id = cls.get<int>();
    } else {
      throw DataError("label_map rule for '" + rule.phase + "': class must be an integer, EXCLUDED or THRESHOLD");
    }
    map.rules.push_back(rule);
  }
  return map;
}

DatasetManifest manifest_from_json(const json& j, const std::filesystem::path& base_dir) {
  const std::string ctx = "manifest";
  if (required<std::string>(j, "schema_version", ctx) != "1") {
    throw DataError("manifest: unsupported schema_version (expected \"1\")");
  }
  DatasetManifest m;
  m.base_dir = base_dir;
  m.name = required<std::string>(j, "name", ctx);
  m.target_rate = required<double>(j, "target_rate", ctx);
  m.window_seconds = required<double>(j, "window_seconds", ctx);
  for (const auto& c : required<json>(j, "channels", ctx)) {
    ChannelSpec spec;
    spec.name = required<std::string>(c, "name", "channel");
    spec.native_rate = required<double>(c, "native_rate", "channel '" + spec.name + "'");
    if (c.contains("kind")) spec.kind = channel_kind_from_string(c.at("kind").get<std::string>());
    if (c.contains("lowpass_cutoff") && !c.at("lowpass_cutoff").is_null()) {
      spec.lowpass_cutoff = c.at("lowpass_cutoff").get<double>();
    }
    m.channels.push_back(spec);
  }
  for (const auto& f : required<json>(j, "files", ctx)) {
    FileEntry e;
    e.subject = required<std::string>(f, "subject", "file entry");
    e.channel = required<std::string>(f, "channel", "file entry");
    e.path = required<std::string>(f, "path", "file entry");
    e.column = f.value("column", std::size_t{0});
    e.skip = f.value("skip", std::size_t{0});
    const auto ch = std::find_if(m.channels.begin(), m.channels.end(),
                                 [&](const ChannelSpec& c) { return c.name == e.channel; });
    e.native_rate = f.value("native_rate", ch == m.channels.end() ? 0.0 : ch->native_rate);
    m.files.push_back(e);
  }
  for (const auto& p : required<json>(j, "phases", ctx)) {
    PhaseAnnotation a;
    a.subject_id = required<std::string>(p, "subject", "phase");
    a.phase_name = required<std::string>(p, "phase", "phase");
    a.start = required<double>(p, "start", "phase '" + a.phase_name + "'");
    a.end = required<double>(p, "end", "phase '" + a.phase_name + "'");
    if (p.contains("annotations") && !p.at("annotations").is_null()) {
      const auto& an = p.at("annotations");
      ContinuousAnnotation c;
      c.rate = required<double>(an, "rate", "annotations of phase '" + a.phase_name + "'");
      c.valence = required<std::vector<double>>(an, "valence", "annotations of phase '" + a.phase_name + "'");
      c.arousal = required<std::vector<double>>(an, "arousal", "annotations of phase '" + a.phase_name + "'");
      a.annotation = std::move(c);
    }
    m.phases.push_back(std::move(a));
  }
  if (!j.contains("label_map")) throw DataError("manifest: missing field 'label_map'");
  m.label_map = label_map_from_json(j.at("label_map"));
  return m;
}

json manifest_to_json(const DatasetManifest& m) {
  json channels = json::array();
  for (const auto& c : m.channels) {
    json e = {{"name", c.name}, {"native_rate", c.native_rate}, {"kind", to_string(c.kind)}};
    e["lowpass_cutoff"] = c.lowpass_cutoff ? json(*c.lowpass_cutoff) : json(nullptr);
    channels.push_back(e);
  }
  json files = json::array();
  for (const auto& f : m.files) {
    files.push_back({{"subject", f.subject},
                     {"channel", f.channel},
                     {"path", f.path.generic_string()},
                     {"column", f.column},
                     {"skip", f.skip},
                     {"native_rate", f.native_rate}});
  }
  json phases = json::array();
  for (const auto& p : m.phases) {
    json e = {{"subject", p.subject_id}, {"phase", p.phase_name}, {"start", p.start}, {"end", p.end}};
    if (p.annotation) {
      e["annotations"] = {
          {"rate", p.annotation->rate}, {"valence", p.annotation->valence}, {"arousal", p.annotation->arousal}};
    }
    phases.push_back(e);
  }
  return {{"schema_version", "1"},   {"name", m.name},   {"target_rate", m.target_rate},
          {"window_seconds", m.window_seconds}, {"channels", channels}, {"files", files},
          {"phases", phases},        {"label_map", label_map_to_json(m.label_map)}};
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open manifest");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
  auto m = manifest_from_json(j, path.parent_path());
  m.validate(true);
  return m;
}

std::vector<std::string> DatasetManifest::subjects() const {
  std::vector<std::string> out;
  for (const auto& f : files) {
    if (std::find(out.begin(), out.end(), f.subject) == out.end()) out.push_back(f.subject);
  }
  return out;
}

std::filesystem::path DatasetManifest::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : base_dir / p;
}

void DatasetManifest::validate(bool check_files) const {
  if (name.empty()) throw DataError("manifest: empty dataset name");
  if (!(target_rate > 0.0)) throw DataError("manifest: target_rate must be > 0");
  window_length(target_rate, window_seconds);
  if (channels.empty()) throw DataError("manifest: no channels declared");
  std::set<std::string> channel_names;
  for (const auto& c : channels) {
    c.validate(target_rate);
    if (!channel_names.insert(c.name).second) throw DataError("manifest: duplicate channel '" + c.name + "'");
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& f : files) {
    if (!channel_names.contains(f.channel)) {
      throw DataError("manifest: file " + f.path.string() + " refers to unknown channel '" + f.channel + "'");
    }
    if (!(f.native_rate > 0.0)) throw DataError("manifest: file " + f.path.string() + " has native_rate <= 0");
    if (!seen.insert({f.subject, f.channel}).second) {
      throw DataError("manifest: subject " + f.subject + " lists channel '" + f.channel + "' twice");
    }
    if (check_files && !std::filesystem::exists(resolve(f.path))) {
      throw DataError("manifest: file " + resolve(f.path).string() + " does not exist");
    }
  }
  const auto subject_list = subjects();
  for (const auto& s : subject_list) {
    for (const auto& c : channels) {
      if (!seen.contains({s, c.name})) {
        throw DataError("manifest: subject " + s + " has no file for channel '" + c.name + "'");
      }
    }
    if (std::none_of(phases.begin(), phases.end(), [&](const PhaseAnnotation& p) { return p.subject_id == s; })) {
      throw DataError("manifest: subject " + s + " has no phase annotations");
    }
  }
  label_map.validate();
  for (const auto& p : phases) {
    p.validate();
    if (std::find(subject_list.begin(), subject_list.end(), p.subject_id) == subject_list.end()) {
      throw DataError("manifest: phase '" + p.phase_name + "' refers to subject " + p.subject_id +
                      " without files");
    }
    const auto* rule = label_map.find(p.phase_name);
    if (rule == nullptr) {
      throw DataError("manifest: unmapped phase '" + p.phase_name + "' (subject " + p.subject_id + ")");
    }
    if (rule->kind == RuleKind::Threshold && !p.annotation) {
      throw DataError("manifest: phase '" + p.phase_name + "' of subject " + p.subject_id +
                      " needs a valence/arousal annotation");
    }
  }
}

}  // namespace synthts::data
