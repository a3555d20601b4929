#include "synthts/eval/quality.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "synthts/core/error.hpp"

namespace synthts::eval {

std::string to_string(QualityMetric m) {
  switch (m) {
    case QualityMetric::CD: return "CD";
    case QualityMetric::CrD: return "CrD";
    case QualityMetric::L2: return "L2";
    case QualityMetric::DTWD: return "DTWD";
    case QualityMetric::MMD: return "MMD";
    case QualityMetric::En: return "En";
    case QualityMetric::DS: return "DS";
  }
  return "?";
}

QualityMetric quality_metric_from_string(const std::string& text) {
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (auto m : all_quality_metrics()) {
    std::string name;
    for (char c : to_string(m)) name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (name == lower) return m;
  }
  throw UsageError("unknown metric '" + text + "' (expected cd, crd, l2, dtwd, mmd, en or ds)");
}

const std::vector<QualityMetric>& all_quality_metrics() {
  static const std::vector<QualityMetric> all{QualityMetric::CD,  QualityMetric::CrD, QualityMetric::L2,
                                              QualityMetric::DTWD, QualityMetric::MMD, QualityMetric::En,
                                              QualityMetric::DS};
  return all;
}

namespace {

std::string seeds_text(const std::vector<std::uint64_t>& seeds) {
  std::string out = "seeds ";
  for (std::size_t i = 0; i < seeds.size(); ++i) out += (i ? "," : "") + std::to_string(seeds[i]);
  return out;
}

std::string bandwidth_text(const std::vector<distribution::Bandwidth>& bws) {
  std::string out = "sigma";
  char buf[48];
  for (std::size_t i = 0; i < bws.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.6g%s", i ? ";" : " ", bws[i].sigma, bws[i].fallback ? "(fallback)" : "");
    out += buf;
  }
  return out;
}

}  // namespace

std::vector<QualityEntry> evaluate_quality(const data::WindowedDataset& real, const data::WindowedDataset& synth,
                                           const QualityOptions& options, std::vector<std::string>& warnings) {
  require_compatible(real, synth);
  const auto K = static_cast<std::size_t>(real.n_classes());
  const auto real_counts = real.class_counts();
  const auto synth_counts = synth.class_counts();
  for (std::size_t k = 0; k < K; ++k) {
    if (real_counts[k] == 0 || synth_counts[k] == 0) {
      warnings.push_back("class " + std::to_string(k) + " is missing from the " +
                         (real_counts[k] == 0 ? "real" : "synthetic") + " dataset; its cells are absent");
    }
  }
  std::vector<QualityEntry> entries;
  for (std::size_t c = 0; c < real.channels(); ++c) {
    const auto& modality = real.meta().channels[c].name;
    for (auto m : options.metrics) {
      QualityEntry e;
      e.modality = modality;
      e.metric = to_string(m);
      switch (m) {
        case QualityMetric::CD:
        case QualityMetric::CrD:
        case QualityMetric::L2:
        case QualityMetric::DTWD: {
          const auto sm = metrics::sample_metric_from_string(to_string(m));
          metrics::SampleMetricOptions so{options.band_radius, options.workers};
          const auto r = metrics::evaluate_sample_metric(sm, real, synth, c, options.plan, so);
          e.per_class = r.per_class;
          e.class_average = r.class_average;
          e.plan = options.plan.describe() + ", " + std::to_string(r.pairs) + " pairs";
          break;
        }
        case QualityMetric::MMD: {
          const auto r = distribution::evaluate_mmd(real, synth, c, options.kernel);
          e.per_class = r.per_class;
          e.class_average = r.class_average;
          e.pooled = r.pooled;
          e.plan = bandwidth_text(r.bandwidths);
          break;
        }
        case QualityMetric::En: {
          const auto r = distribution::entropy_gap(real, synth, c, options.entropy);
          e.per_class = r.per_class;
          e.class_average = r.class_average;
          e.plan = distribution::to_string(options.entropy.aggregation);
          break;
        }
        case QualityMetric::DS: {
          auto ds_cfg = options.ds;
          ds_cfg.workers = std::max<std::size_t>(ds_cfg.workers, options.workers);
          const auto r = discriminative_score(real, synth, c, ds_cfg, options.ds_mode);
          e.per_class = r.per_class;
          e.class_average = r.class_average;
          e.pooled = r.pooled;
          std::string archs;
          for (auto a : ds_cfg.classifiers) archs += (archs.empty() ? "" : "+") + nn::to_string(a);
          e.plan = archs + ", " + seeds_text(ds_cfg.seeds);
          for (const auto& w : r.warnings) warnings.push_back(modality + ": " + w);
          break;
        }
      }
      if (e.per_class.empty() && m != QualityMetric::DS) e.per_class.assign(K, std::nullopt);
      entries.push_back(std::move(e));
    }
  }
  return entries;
}

}  // namespace synthts::eval
