#include "synthts/eval/protocols.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <numeric>

#include "synthts/core/error.hpp"
#include "synthts/core/parallel.hpp"
#include "synthts/core/rng.hpp"
#include "synthts/nn/scoring.hpp"

namespace synthts::eval {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t arch_tag(nn::Architecture a) {
  const auto& all = nn::all_architectures();
  return static_cast<std::uint64_t>(std::find(all.begin(), all.end(), a) - all.begin());
}

nn::TrainedModel fit(nn::Architecture arch, const nn::LabeledTensor& train, const nn::LabeledTensor& val,
                     std::size_t classes, nn::LossKind loss, std::uint64_t seed, std::uint64_t stream,
                     const ProtocolConfig& cfg) {
  nn::ModelSpec spec;
  spec.architecture = arch;
  spec.channels = train.values.dim(1);
  spec.length = train.values.dim(2);
  spec.classes = classes;
  spec.sizes = cfg.sizes;
  nn::TrainingConfig tc = cfg.training;
  tc.loss = loss;
  tc.seed = derive_seed(seed, {arch_tag(arch), stream, 2});
  return nn::train(nn::Network<float>(spec, derive_seed(seed, {arch_tag(arch), stream, 1})), train, val, tc);
}

std::vector<double> to_double(const nn::Tensor<float>& t) { return {t.data.begin(), t.data.end()}; }

std::vector<std::size_t> counts_of(std::span<const int> labels, std::size_t classes) {
  std::vector<std::size_t> out(classes, 0);
  for (int y : labels) ++out[static_cast<std::size_t>(y)];
  return out;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report(const ProtocolConfig& cfg, RunRecord rec) {
  if (cfg.on_run) cfg.on_run(rec);
}

// Real/synthetic discrimination on one pair of same-class (or pooled) sets.
DsRun discriminate(const nn::LabeledTensor& real, const nn::LabeledTensor& synth, nn::Architecture arch,
                   std::uint64_t seed, std::optional<int> class_id, const ProtocolConfig& cfg) {
  const auto t0 = Clock::now();
  SplitSpec spec = cfg.split;
  spec.seed = derive_seed(seed, {static_cast<std::uint64_t>(class_id.value_or(-1) + 1), 0xd5});
  const std::vector<int> zeros_r(real.size(), 0), zeros_s(synth.size(), 0);
  const Split sr = stratified_split(zeros_r, spec);
  const Split ss = stratified_split(zeros_s, spec);
  auto part = [&](const std::vector<std::size_t>& ri, const std::vector<std::size_t>& si) {
    auto a = real.subset(ri);
    auto b = synth.subset(si);
    std::fill(a.labels.begin(), a.labels.end(), 0);
    std::fill(b.labels.begin(), b.labels.end(), 1);
    return nn::LabeledTensor::concat(a, b);
  };
  const auto train = part(sr.train, ss.train);
  const auto val = part(sr.val, ss.val);
  const auto test = part(sr.test, ss.test);
  const auto stream = static_cast<std::uint64_t>(class_id.value_or(-1) + 1) + 0x100;
  auto model = fit(arch, train, val, 2, nn::LossKind::Binary, seed, stream, cfg);
  const auto probs = to_double(model.predict_proba(test.values));
  const double acc = nn::accuracy(nn::argmax_rows(probs, 2), test.labels);
  DsRun run{class_id, arch, seed, acc, std::abs(0.5 - acc)};
  report(cfg, {"ds", arch, seed, class_id, acc, seconds_since(t0)});
  return run;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

void ProtocolConfig::validate() const {
  if (classifiers.empty()) throw UsageError("no classifiers selected");
  if (seeds.empty()) throw UsageError("seed list is empty");
  training.validate();
  split.validate();
}

nn::LabeledTensor to_labeled(const data::WindowedDataset& dataset, std::span<const std::size_t> indices,
                             std::optional<std::size_t> channel) {
  const std::size_t C = channel ? 1 : dataset.channels();
  const std::size_t L = dataset.length();
  if (channel && *channel >= dataset.channels()) {
    throw UsageError("modality index " + std::to_string(*channel) + " out of range");
  }
  nn::LabeledTensor out;
  out.values = nn::Tensor<float>({indices.size(), C, L});
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = channel ? dataset.channel(indices[i], *channel) : dataset.window(indices[i]);
    std::copy(src.begin(), src.end(), out.values.data.begin() + static_cast<std::ptrdiff_t>(i * C * L));
    out.labels.push_back(dataset.labels()[indices[i]]);
  }
  return out;
}

void require_compatible(const data::WindowedDataset& real, const data::WindowedDataset& synth) {
  if (real.channels() != synth.channels() || real.length() != synth.length()) {
    throw DataError("shape mismatch: real windows are [" + std::to_string(real.channels()) + ", " +
                    std::to_string(real.length()) + "], synthetic windows are [" + std::to_string(synth.channels()) +
                    ", " + std::to_string(synth.length()) + "]");
  }
  if (real.n_classes() != synth.n_classes()) {
    throw DataError("class structure mismatch: real has " + std::to_string(real.n_classes()) +
                    " classes, synthetic has " + std::to_string(synth.n_classes()));
  }
}

DsResult discriminative_score(const data::WindowedDataset& real, const data::WindowedDataset& synth,
                              std::optional<std::size_t> channel, const ProtocolConfig& cfg, DsMode mode) {
  cfg.validate();
  require_compatible(real, synth);
  DsResult result;
  struct Job {
    std::optional<int> class_id;
    nn::Architecture arch;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  std::vector<nn::LabeledTensor> real_sets, synth_sets;
  std::vector<std::optional<int>> groups;
  const auto K = static_cast<std::size_t>(real.n_classes());
  if (mode == DsMode::Pooled) {
    std::vector<std::size_t> ri(real.size()), si(synth.size());
    std::iota(ri.begin(), ri.end(), std::size_t{0});
    std::iota(si.begin(), si.end(), std::size_t{0});
    real_sets.push_back(to_labeled(real, ri, channel));
    synth_sets.push_back(to_labeled(synth, si, channel));
    groups.push_back(std::nullopt);
  } else {
    result.per_class.assign(K, std::nullopt);
    for (std::size_t k = 0; k < K; ++k) {
      const auto ri = real.indices_of_class(static_cast<int>(k));
      const auto si = synth.indices_of_class(static_cast<int>(k));
      if (ri.size() < 5 || si.size() < 5) {
        result.warnings.push_back("class " + std::to_string(k) + ": too few windows (real " +
                                  std::to_string(ri.size()) + ", synthetic " + std::to_string(si.size()) +
                                  "); discriminative score absent");
        continue;
      }
      real_sets.push_back(to_labeled(real, ri, channel));
      synth_sets.push_back(to_labeled(synth, si, channel));
      groups.push_back(static_cast<int>(k));
    }
  }
  if (mode == DsMode::Pooled && (real.size() < 5 || synth.size() < 5)) {
    throw DataError("discriminative score: need at least 5 real and 5 synthetic windows");
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (auto seed : cfg.seeds) {
      for (auto arch : cfg.classifiers) jobs.push_back({groups[g], arch, seed});
    }
  }
  std::vector<DsRun> runs(jobs.size());
  std::vector<std::size_t> group_of(jobs.size());
  for (std::size_t j = 0, g = 0; g < groups.size(); ++g) {
    for (std::size_t r = 0; r < cfg.seeds.size() * cfg.classifiers.size(); ++r) group_of[j++] = g;
  }
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t j) {
    const auto g = group_of[j];
    runs[j] = discriminate(real_sets[g], synth_sets[g], jobs[j].arch, jobs[j].seed, jobs[j].class_id, cfg);
  });
  result.runs = runs;
  const std::size_t per_group = cfg.seeds.size() * cfg.classifiers.size();
  std::vector<double> group_means;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    // Average over classifiers within a seed, then over seeds.
    std::vector<double> seed_means;
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
      std::vector<double> v;
      for (std::size_t a = 0; a < cfg.classifiers.size(); ++a) {
        v.push_back(runs[g * per_group + s * cfg.classifiers.size() + a].score);
      }
      seed_means.push_back(mean(v));
    }
    group_means.push_back(mean(seed_means));
  }
  if (mode == DsMode::Pooled) {
    result.pooled = group_means.at(0);
  } else {
    for (std::size_t g = 0; g < groups.size(); ++g) result.per_class[static_cast<std::size_t>(*groups[g])] = group_means[g];
    if (!group_means.empty()) result.class_average = mean(group_means);
  }
  return result;
}

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::TRTR: return "TRTR";
    case Protocol::TSTR: return "TSTR";
    case Protocol::DaBalance: return "DA-Balance";
    case Protocol::DaDouble: return "DA-Double";
    case Protocol::DaBalanceDouble: return "DA-BalanceDouble";
  }
  return "?";
}

Protocol protocol_from_string(const std::string& text) {
  for (auto p : {Protocol::TRTR, Protocol::TSTR, Protocol::DaBalance, Protocol::DaDouble, Protocol::DaBalanceDouble}) {
    if (to_string(p) == text) return p;
  }
  throw DataError("unknown protocol '" + text + "'");
}

std::string to_string(DaPolicy p) {
  switch (p) {
    case DaPolicy::Balance: return "Balance";
    case DaPolicy::Double: return "Double";
    case DaPolicy::BalanceDouble: return "BalanceDouble";
  }
  return "?";
}

Protocol protocol_of(DaPolicy p) {
  switch (p) {
    case DaPolicy::Balance: return Protocol::DaBalance;
    case DaPolicy::Double: return Protocol::DaDouble;
    case DaPolicy::BalanceDouble: return Protocol::DaBalanceDouble;
  }
  return Protocol::DaBalance;
}

std::vector<std::size_t> da_requirement(std::span<const std::size_t> counts, DaPolicy policy) {
  const std::size_t top = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  std::vector<std::size_t> need(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    switch (policy) {
      case DaPolicy::Balance: need[k] = top - counts[k]; break;
      case DaPolicy::Double: need[k] = counts[k]; break;
      case DaPolicy::BalanceDouble: need[k] = 2 * top - counts[k]; break;
    }
  }
  return need;
}

HybridSets apply_da_policy(const nn::LabeledTensor& real_train, const nn::LabeledTensor& real_val,
                           const nn::LabeledTensor& pool, std::size_t classes, DaPolicy policy, std::uint64_t seed) {
  const auto train_counts = counts_of(real_train.labels, classes);
  const auto val_counts = counts_of(real_val.labels, classes);
  const auto need_train = da_requirement(train_counts, policy);
  const auto need_val = da_requirement(val_counts, policy);
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < pool.size(); ++i) by_class[static_cast<std::size_t>(pool.labels[i])].push_back(i);

  std::string deficits;
  for (std::size_t k = 0; k < classes; ++k) {
    const std::size_t need = need_train[k] + need_val[k];
    if (need > by_class[k].size()) {
      deficits += "\n  class " + std::to_string(k) + ": required " + std::to_string(need) + ", available " +
                  std::to_string(by_class[k].size()) + ", deficit " + std::to_string(need - by_class[k].size());
    }
  }
  if (!deficits.empty()) throw DataError("synthetic pool too small for " + to_string(policy) + ":" + deficits);

  HybridSets out;
  for (std::size_t k = 0; k < classes; ++k) {
    auto& idx = by_class[k];
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(k), 0xda}));
    rng.shuffle(idx.begin(), idx.end());
    out.synthetic_train.insert(out.synthetic_train.end(), idx.begin(),
                               idx.begin() + static_cast<std::ptrdiff_t>(need_train[k]));
    out.synthetic_val.insert(out.synthetic_val.end(), idx.begin() + static_cast<std::ptrdiff_t>(need_train[k]),
                             idx.begin() + static_cast<std::ptrdiff_t>(need_train[k] + need_val[k]));
  }
  std::sort(out.synthetic_train.begin(), out.synthetic_train.end());
  std::sort(out.synthetic_val.begin(), out.synthetic_val.end());
  out.train = nn::LabeledTensor::concat(real_train, pool.subset(out.synthetic_train));
  out.val = nn::LabeledTensor::concat(real_val, pool.subset(out.synthetic_val));
  out.train_counts = counts_of(out.train.labels, classes);
  out.val_counts = counts_of(out.val.labels, classes);
  out.synthetic_ratio = static_cast<double>(out.synthetic_train.size() + out.synthetic_val.size()) /
                        static_cast<double>(real_train.size() + real_val.size());
  return out;
}

namespace {

struct Partitions {
  nn::LabeledTensor train, val, test;
};

Partitions partitions(const data::WindowedDataset& ds, const Split& s) {
  return {to_labeled(ds, s.train), to_labeled(ds, s.val), to_labeled(ds, s.test)};
}

Split split_with_seed(const data::WindowedDataset& ds, const ProtocolConfig& cfg, std::uint64_t seed) {
  SplitSpec spec = cfg.split;
  spec.seed = seed;
  return stratified_split(ds, spec);
}

UtilityRun evaluate(Protocol protocol, nn::Architecture arch, std::uint64_t seed, const nn::LabeledTensor& train,
                    const nn::LabeledTensor& val, const nn::LabeledTensor& test, std::size_t classes,
                    const ProtocolConfig& cfg) {
  const auto t0 = Clock::now();
  auto model = fit(arch, train, val, classes, nn::LossKind::Categorical, seed, 0, cfg);
  const auto probs = to_double(model.predict_proba(test.values));
  UtilityRun run;
  run.protocol = protocol;
  run.classifier = arch;
  run.seed = seed;
  run.auroc = nn::auroc_multiclass(probs, classes, test.labels);
  run.train_counts = counts_of(train.labels, classes);
  run.val_counts = counts_of(val.labels, classes);
  run.best_epoch = model.best_epoch;
  report(cfg, {to_string(protocol), arch, seed, std::nullopt, run.auroc, seconds_since(t0)});
  return run;
}

void attach_deltas(UtilityResult& result, const UtilityResult& trtr) {
  for (auto& run : result.runs) {
    for (const auto& base : trtr.runs) {
      if (base.protocol == Protocol::TRTR && base.classifier == run.classifier && base.seed == run.seed) {
        run.delta = run.auroc - base.auroc;
      }
    }
    if (!run.delta) {
      throw InvariantError("no TRTR baseline for " + nn::to_string(run.classifier) + " seed " +
                           std::to_string(run.seed));
    }
  }
}

// Runs every (seed, classifier) pair; `build` prepares train/val/test per seed.
template <typename Build>
UtilityResult run_grid(const ProtocolConfig& cfg, Protocol protocol, std::size_t classes, Build build) {
  std::vector<Partitions> sets;
  std::vector<std::optional<double>> ratios;
  for (auto seed : cfg.seeds) {
    auto [p, ratio] = build(seed);
    sets.push_back(std::move(p));
    ratios.push_back(ratio);
  }
  const std::size_t A = cfg.classifiers.size();
  UtilityResult result;
  result.runs.resize(cfg.seeds.size() * A);
  parallel_for(result.runs.size(), cfg.workers, [&](std::size_t j) {
    const auto& p = sets[j / A];
    result.runs[j] = evaluate(protocol, cfg.classifiers[j % A], cfg.seeds[j / A], p.train, p.val, p.test, classes, cfg);
    result.runs[j].synthetic_ratio = ratios[j / A];
  });
  return result;
}

}  // namespace

UtilityResult run_trtr(const data::WindowedDataset& real, const ProtocolConfig& cfg) {
  cfg.validate();
  const auto K = static_cast<std::size_t>(real.n_classes());
  return run_grid(cfg, Protocol::TRTR, K, [&](std::uint64_t seed) {
    return std::pair{partitions(real, split_with_seed(real, cfg, seed)), std::optional<double>{}};
  });
}

UtilityResult run_tstr(const data::WindowedDataset& real, const data::WindowedDataset& synth,
                       const ProtocolConfig& cfg, const UtilityResult& trtr) {
  cfg.validate();
  require_compatible(real, synth);
  const auto K = static_cast<std::size_t>(real.n_classes());
  auto result = run_grid(cfg, Protocol::TSTR, K, [&](std::uint64_t seed) {
    const auto rs = split_with_seed(real, cfg, seed);
    const auto ss = split_with_seed(synth, cfg, seed);
    Partitions p{to_labeled(synth, ss.train), to_labeled(synth, ss.val), to_labeled(real, rs.test)};
    const auto need_t = counts_of(to_labeled(real, rs.train).labels, K);
    const auto need_v = counts_of(to_labeled(real, rs.val).labels, K);
    const auto have_t = counts_of(p.train.labels, K);
    const auto have_v = counts_of(p.val.labels, K);
    std::string deficits;
    for (std::size_t k = 0; k < K; ++k) {
      if (have_t[k] < need_t[k] || have_v[k] < need_v[k]) {
        deficits += "\n  class " + std::to_string(k) + ": synthetic train/val " + std::to_string(have_t[k]) + "/" +
                    std::to_string(have_v[k]) + ", real train/val " + std::to_string(need_t[k]) + "/" +
                    std::to_string(need_v[k]);
      }
    }
    if (!deficits.empty()) throw DataError("insufficient synthetic samples for TSTR:" + deficits);
    return std::pair{std::move(p), std::optional<double>{}};
  });
  attach_deltas(result, trtr);
  return result;
}

UtilityResult run_da(const data::WindowedDataset& real, const data::WindowedDataset& synth, DaPolicy policy,
                     const ProtocolConfig& cfg, const UtilityResult& trtr) {
  cfg.validate();
  require_compatible(real, synth);
  const auto K = static_cast<std::size_t>(real.n_classes());
  std::vector<std::size_t> all(synth.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto pool = to_labeled(synth, all);
  auto result = run_grid(cfg, protocol_of(policy), K, [&](std::uint64_t seed) {
    const auto rs = split_with_seed(real, cfg, seed);
    auto hybrid = apply_da_policy(to_labeled(real, rs.train), to_labeled(real, rs.val), pool, K, policy, seed);
    return std::pair{Partitions{std::move(hybrid.train), std::move(hybrid.val), to_labeled(real, rs.test)},
                     std::optional<double>{hybrid.synthetic_ratio}};
  });
  attach_deltas(result, trtr);
  return result;
}

std::vector<UtilitySummary> summarize(const UtilityResult& result) {
  std::vector<UtilitySummary> out;
  std::map<std::pair<int, int>, std::size_t> slot;
  std::vector<std::vector<const UtilityRun*>> groups;
  for (const auto& run : result.runs) {
    const auto key = std::pair{static_cast<int>(run.protocol), static_cast<int>(arch_tag(run.classifier))};
    auto [it, inserted] = slot.emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(&run);
  }
  for (const auto& g : groups) {
    UtilitySummary s{g.front()->protocol, g.front()->classifier, 0.0, std::nullopt};
    double delta = 0.0;
    for (const auto* r : g) {
      s.auroc += r->auroc;
      if (r->delta) delta += *r->delta;
    }
    s.auroc /= static_cast<double>(g.size());
    if (g.front()->delta) s.delta = delta / static_cast<double>(g.size());
    out.push_back(s);
  }
  return out;
}

}  // namespace synthts::eval
