#ifndef SYNTHTS_DATA_LABELING_HPP
#define SYNTHTS_DATA_LABELING_HPP

#include <optional>
#include <string>
#include <vector>

namespace synthts::data {

// Continuous self-assessment streams (0-10 scale) sampled at `rate`, starting
// at the phase start.
struct ContinuousAnnotation {
  double rate = 0.0;
  std::vector<double> valence;
  std::vector<double> arousal;
};

struct PhaseAnnotation {
  std::string subject_id;
  std::string phase_name;
  double start = 0.0;  // seconds from recording origin
  double end = 0.0;
  std::optional<ContinuousAnnotation> annotation;

  void validate() const;
};

enum class RuleKind { Class, Excluded, Threshold };

struct LabelRule {
  std::string phase;
  RuleKind kind = RuleKind::Class;
  int class_id = -1;  // only for RuleKind::Class
};

// Windows of Threshold phases are labeled from the window-mean valence and
// arousal: class = 2 * (valence >= threshold) + (arousal >= threshold), so
// 0 = low/low, 1 = low valence/high arousal, 2 = high/low, 3 = high/high.
struct LabelMap {
  std::vector<LabelRule> rules;
  double threshold = 5.0;
  std::vector<std::string> class_names;

  // Binary stress maps and the four-quadrant valence/arousal map.
  static LabelMap wesad();
  static LabelMap swell();
  static LabelMap valence_arousal(const std::vector<std::string>& phases);

  const LabelRule* find(const std::string& phase) const;
  // Checks duplicate rules, contiguous class ids from 0 and the class-name
  // count. Returns the number of classes.
  int validate() const;
  int n_classes() const;
};

// Class for window `window_index` (0-based, phase-relative) of a phase, or
// nullopt when the phase is excluded. Throws DataError for unmapped phases
// and for threshold phases without annotation samples in the window.
std::optional<int> label_window(const LabelMap& map, const PhaseAnnotation& phase, std::size_t window_index,
                                double window_seconds);

// Valence/arousal quadrant for window means; boundary values count as high.
int quadrant_class(double mean_valence, double mean_arousal, double threshold);

}  // namespace synthts::data

#endif  // SYNTHTS_DATA_LABELING_HPP
