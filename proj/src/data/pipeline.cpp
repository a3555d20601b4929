#include "synthts/data/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "synthts/core/error.hpp"
#include "synthts/core/parallel.hpp"
#include "synthts/data/csv.hpp"
#include "synthts/data/labeling.hpp"
#include "synthts/data/signal.hpp"

namespace synthts::data {

namespace {

struct SubjectWindows {
  std::vector<float> values;
  std::vector<int> labels;
};

SubjectWindows process_subject(const DatasetManifest& m, const RawRecording& rec) {
  const double rate = m.target_rate;
  const std::size_t len = window_length(rate, m.window_seconds);
  std::vector<std::vector<double>> signals;
  for (std::size_t c = 0; c < m.channels.size(); ++c) {
    auto s = resample(rec.signals[c], rec.rates[c], rate);
    if (m.channels[c].lowpass_cutoff) s = lowpass(s, rate, *m.channels[c].lowpass_cutoff);
    signals.push_back(std::move(s));
  }
  SubjectWindows out;
  for (const auto& phase : m.phases) {
    if (phase.subject_id != rec.subject) continue;
    const auto first = static_cast<std::size_t>(std::llround(phase.start * rate));
    const auto last = static_cast<std::size_t>(std::llround(phase.end * rate));
    std::vector<std::vector<std::vector<double>>> per_channel;
    for (std::size_t c = 0; c < signals.size(); ++c) {
      if (last > signals[c].size()) {
        std::ostringstream os;
        os << "phase '" << phase.phase_name << "' of subject " << rec.subject << " ends at " << phase.end
           << " s, beyond the " << static_cast<double>(signals[c].size()) / rate << " s recording of channel '"
           << m.channels[c].name << "'";
        throw DataError(os.str());
      }
      const std::span<const double> slice(signals[c].data() + first, last - first);
      try {
        per_channel.push_back(segment(slice, rate, m.window_seconds));
      } catch (const DataError& e) {
        throw DataError("phase '" + phase.phase_name + "' of subject " + rec.subject + ": " + e.what());
      }
    }
    const std::size_t count = per_channel.front().size();
    for (std::size_t w = 0; w < count; ++w) {
      const auto label = label_window(m.label_map, phase, w, m.window_seconds);
      if (!label) continue;
      for (std::size_t c = 0; c < signals.size(); ++c) {
        for (std::size_t t = 0; t < len; ++t) out.values.push_back(static_cast<float>(per_channel[c][w][t]));
      }
      out.labels.push_back(*label);
    }
  }
  return out;
}

}  // namespace

std::vector<RawRecording> ingest(const DatasetManifest& manifest, std::size_t workers) {
  manifest.validate(true);
  const auto subjects = manifest.subjects();
  std::vector<RawRecording> out(subjects.size());
  parallel_for(subjects.size(), workers, [&](std::size_t s) {
    RawRecording rec;
    rec.subject = subjects[s];
    for (const auto& channel : manifest.channels) {
      const auto it = std::find_if(manifest.files.begin(), manifest.files.end(), [&](const FileEntry& f) {
        return f.subject == rec.subject && f.channel == channel.name;
      });
      rec.signals.push_back(read_csv_column(manifest.resolve(it->path), it->column, it->skip));
      if (rec.signals.back().empty()) throw DataError(manifest.resolve(it->path).string() + ": no samples");
      rec.rates.push_back(it->native_rate);
    }
    out[s] = std::move(rec);
  });
  return out;
}

WindowedDataset prepare_dataset(const DatasetManifest& manifest, const PipelineOptions& options) {
  const auto recordings = ingest(manifest, options.workers);
  std::vector<SubjectWindows> parts(recordings.size());
  parallel_for(recordings.size(), options.workers,
               [&](std::size_t s) { parts[s] = process_subject(manifest, recordings[s]); });

  DatasetMeta meta;
  meta.name = manifest.name;
  meta.channels = manifest.channels;
  meta.rate = manifest.target_rate;
  meta.window_seconds = manifest.window_seconds;
  meta.n_classes = manifest.label_map.validate();
  meta.class_names = manifest.label_map.class_names;

  std::vector<float> values;
  std::vector<int> labels;
  std::vector<std::string> subjects;
  for (std::size_t s = 0; s < parts.size(); ++s) {
    values.insert(values.end(), parts[s].values.begin(), parts[s].values.end());
    labels.insert(labels.end(), parts[s].labels.begin(), parts[s].labels.end());
    subjects.insert(subjects.end(), parts[s].labels.size(), recordings[s].subject);
  }
  if (labels.empty()) throw DataError("manifest '" + manifest.name + "' produced no labeled windows");
  const auto len = window_length(meta.rate, meta.window_seconds);
  const auto n = labels.size();
  WindowedDataset raw(std::move(meta), n, len, std::move(values), std::move(labels), std::move(subjects));
  return normalize(raw, options.normalization);
}

DatasetSummary summarize(const WindowedDataset& dataset) {
  DatasetSummary s;
  s.name = dataset.meta().name;
  s.subjects = std::set<std::string>(dataset.subjects().begin(), dataset.subjects().end()).size();
  s.n_classes = dataset.n_classes();
  s.samples = dataset.size();
  s.class_counts = dataset.class_counts();
  const auto majority = *std::max_element(s.class_counts.begin(), s.class_counts.end());
  std::vector<double> ratios;
  bool majority_skipped = false;
  for (const auto c : s.class_counts) {
    if (c == majority && !majority_skipped) {
      majority_skipped = true;
      continue;
    }
    ratios.push_back(c == 0 ? std::numeric_limits<double>::infinity()
                            : static_cast<double>(majority) / static_cast<double>(c));
  }
  std::sort(ratios.begin(), ratios.end());
  std::ostringstream os;
  os << std::fixed << std::setprecision(1);
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (i) os << '/';
    if (std::isinf(ratios[i])) {
      os << "inf";
    } else {
      os << ratios[i];
    }
  }
  s.ratio_text = ratios.empty() ? "1.0" : os.str();
  return s;
}

std::string format_summary(const DatasetSummary& s) {
  std::ostringstream os;
  os << "| Dataset | # subjects | # classes | # samples | Class ratio(s) |\n";
  os << "|---|---|---|---|---|\n";
  os << "| " << s.name << " | " << s.subjects << " | " << s.n_classes << " | " << s.samples << " | " << s.ratio_text
     << " |\n";
  os << "class counts:";
  for (std::size_t c = 0; c < s.class_counts.size(); ++c) os << ' ' << c << '=' << s.class_counts[c];
  os << '\n';
  return os.str();
}

}  // namespace synthts::data
