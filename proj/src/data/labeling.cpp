#include "synthts/data/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "synthts/core/error.hpp"

namespace synthts::data {

void PhaseAnnotation::validate() const {
  if (subject_id.empty() || phase_name.empty()) throw DataError("phase annotation without subject or phase name");
  if (!(end > start) || start < 0.0) {
    std::ostringstream os;
    os << "phase '" << phase_name << "' of subject " << subject_id << ": end (" << end << ") must exceed start ("
       << start << ") and start must be >= 0";
    throw DataError(os.str());
  }
  if (annotation) {
    if (!(annotation->rate > 0.0)) {
      throw DataError("phase '" + phase_name + "' of subject " + subject_id + ": annotation rate must be > 0");
    }
    for (const auto* stream : {&annotation->valence, &annotation->arousal}) {
      for (const double v : *stream) {
        if (!(v >= 0.0 && v <= 10.0)) {
          throw DataError("phase '" + phase_name + "' of subject " + subject_id +
                          ": annotation value outside [0, 10]");
        }
      }
    }
    if (annotation->valence.size() != annotation->arousal.size()) {
      throw DataError("phase '" + phase_name + "' of subject " + subject_id +
                      ": valence and arousal streams differ in length");
    }
  }
}

LabelMap LabelMap::wesad() {
  LabelMap m;
  m.rules = {{"baseline", RuleKind::Class, 0},
             {"amusement", RuleKind::Class, 0},
             {"TSST", RuleKind::Class, 1},
             {"recovery", RuleKind::Excluded, -1},
             {"meditation", RuleKind::Excluded, -1}};
  m.class_names = {"no stress", "stress"};
  return m;
}

LabelMap LabelMap::swell() {
  LabelMap m;
  m.rules = {{"neutral", RuleKind::Class, 0},
             {"time_pressure", RuleKind::Class, 1},
             {"interruption", RuleKind::Class, 1}};
  m.class_names = {"no stress", "stress"};
  return m;
}

LabelMap LabelMap::valence_arousal(const std::vector<std::string>& phases) {
  LabelMap m;
  for (const auto& p : phases) m.rules.push_back({p, RuleKind::Threshold, -1});
  m.class_names = {"LV-LA", "LV-HA", "HV-LA", "HV-HA"};
  return m;
}

const LabelRule* LabelMap::find(const std::string& phase) const {
  const auto it = std::find_if(rules.begin(), rules.end(), [&](const LabelRule& r) { return r.phase == phase; });
  return it == rules.end() ? nullptr : &*it;
}

int LabelMap::n_classes() const {
  int max_id = -1;
  for (const auto& r : rules) {
    if (r.kind == RuleKind::Class) max_id = std::max(max_id, r.class_id);
    if (r.kind == RuleKind::Threshold) max_id = std::max(max_id, 3);
  }
  return max_id + 1;
}

int LabelMap::validate() const {
  std::set<std::string> seen;
  std::set<int> ids;
  for (const auto& r : rules) {
    if (!seen.insert(r.phase).second) throw DataError("label map: phase '" + r.phase + "' has more than one rule");
    if (r.kind == RuleKind::Class) {
      if (r.class_id < 0) throw DataError("label map: phase '" + r.phase + "' has a negative class id");
      ids.insert(r.class_id);
    } else if (r.kind == RuleKind::Threshold) {
      for (int c = 0; c < 4; ++c) ids.insert(c);
    }
  }
  if (ids.empty()) throw DataError("label map assigns no classes");
  const int n = *ids.rbegin() + 1;
  if (static_cast<int>(ids.size()) != n) throw DataError("label map: class ids are not contiguous from 0");
  if (!class_names.empty() && static_cast<int>(class_names.size()) != n) {
    throw DataError("label map: " + std::to_string(class_names.size()) + " class names for " + std::to_string(n) +
                    " classes");
  }
  if (!std::isfinite(threshold)) throw DataError("label map: threshold must be finite");
  return n;
}

int quadrant_class(double mean_valence, double mean_arousal, double threshold) {
  return 2 * (mean_valence >= threshold ? 1 : 0) + (mean_arousal >= threshold ? 1 : 0);
}

std::optional<int> label_window(const LabelMap& map, const PhaseAnnotation& phase, std::size_t window_index,
                                double window_seconds) {
  const auto* rule = map.find(phase.phase_name);
  if (rule == nullptr) {
    throw DataError("unmapped phase '" + phase.phase_name + "' (subject " + phase.subject_id + ")");
  }
  switch (rule->kind) {
    case RuleKind::Excluded:
      return std::nullopt;
    case RuleKind::Class:
      return rule->class_id;
    case RuleKind::Threshold:
      break;
  }
  if (!phase.annotation) {
    throw DataError("phase '" + phase.phase_name + "' of subject " + phase.subject_id +
                    " has no valence/arousal annotation");
  }
  const auto& a = *phase.annotation;
  const auto first = static_cast<std::size_t>(std::floor(static_cast<double>(window_index) * window_seconds * a.rate));
  auto last = static_cast<std::size_t>(std::floor(static_cast<double>(window_index + 1) * window_seconds * a.rate));
  last = std::min(last, a.valence.size());
  if (first >= last) {
    std::ostringstream os;
    os << "phase '" << phase.phase_name << "' of subject " << phase.subject_id << ": no annotation samples for window "
       << window_index;
    throw DataError(os.str());
  }
  double v = 0.0;
  double ar = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    v += a.valence[i];
    ar += a.arousal[i];
  }
  const auto count = static_cast<double>(last - first);
  return quadrant_class(v / count, ar / count, map.threshold);
}

}  // namespace synthts::data
