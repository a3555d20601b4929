#include "synthts/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "synthts/core/error.hpp"
#include "synthts/core/parallel.hpp"
#include "synthts/data/canonical.hpp"
#include "synthts/data/manifest.hpp"
#include "synthts/data/pipeline.hpp"
#include "synthts/distribution/tsne.hpp"
#include "synthts/eval/ledger.hpp"
#include "synthts/eval/quality.hpp"
#include "synthts/refgen/refgen.hpp"

namespace synthts::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string out;
  std::size_t workers = default_workers();
  std::vector<std::string> formats{"json", "csv", "md"};
  std::string config_id = "default";
};

struct TrainingFlags {
  std::vector<std::string> classifiers{"MLP", "AE", "CNN", "FCN", "ConvLSTM", "ResNet"};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  bool subject_disjoint = false;
};

void add_common(CLI::App* cmd, Common& c, bool formats) {
  cmd->add_option("--out", c.out, "Output directory")->required();
  cmd->add_option("--workers", c.workers, "Worker threads (default: hardware execution units)")
      ->check(CLI::PositiveNumber);
  if (formats) {
    cmd->add_option("--format", c.formats, "Report formats: json, csv, md (repeatable or comma-separated)")
        ->delimiter(',');
    cmd->add_option("--config-id", c.config_id, "Configuration label used as the report row name");
  }
}

void add_training(CLI::App* cmd, TrainingFlags& t) {
  cmd->add_option("--classifiers", t.classifiers, "Classifiers: MLP, AE, CNN, FCN, ConvLSTM, ResNet")->delimiter(',');
  cmd->add_option("--seeds", t.seeds, "Seed list for splits and training")->delimiter(',');
  cmd->add_option("--epochs", t.epochs, "Training epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--batch-size", t.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  cmd->add_flag("--subject-disjoint", t.subject_disjoint, "Experimental: split by subject instead of window");
}

eval::ProtocolConfig protocol_config(const TrainingFlags& t, std::size_t workers) {
  eval::ProtocolConfig cfg;
  cfg.classifiers.clear();
  for (const auto& name : t.classifiers) cfg.classifiers.push_back(nn::architecture_from_string(name));
  cfg.seeds = t.seeds;
  cfg.training.epochs = t.epochs;
  cfg.training.batch_size = t.batch_size;
  cfg.split.subject_disjoint = t.subject_disjoint;
  cfg.workers = workers;
  cfg.validate();
  return cfg;
}

json training_json(const TrainingFlags& t) {
  return {{"classifiers", t.classifiers},
          {"seeds", t.seeds},
          {"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"subject_disjoint", t.subject_disjoint}};
}

std::set<eval::Format> parse_formats(const std::vector<std::string>& names) {
  std::set<eval::Format> out;
  for (const auto& n : names) out.insert(eval::format_from_string(n));
  if (out.empty()) throw UsageError("--format needs at least one of json, csv, md");
  return out;
}

// Loads real and synthetic datasets and checks they can be compared.
std::pair<data::WindowedDataset, data::WindowedDataset> load_pair(const std::string& real_dir,
                                                                  const std::string& synth_dir) {
  auto real = data::read_canonical(real_dir);
  auto synth = data::read_canonical(synth_dir);
  eval::require_compatible(real, synth);
  const auto& prov = synth.meta().provenance;
  if (auto it = prov.find("source_fingerprint"); it != prov.end()) {
    const auto fp = data::tensor_fingerprint(real);
    if (it->second != fp) {
      throw DataError("dataset fingerprint mismatch: " + synth_dir + " was generated from a dataset with fingerprint " +
                      it->second.substr(0, 12) + ", but " + real_dir + " has " + fp.substr(0, 12));
    }
  }
  if (real.meta().normalization.state != synth.meta().normalization.state) {
    throw DataError("real and synthetic datasets differ in normalization state");
  }
  return {std::move(real), std::move(synth)};
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

std::string mode_to_protocol_name(const std::string& mode) {
  if (mode == "tstr") return "TSTR";
  if (mode == "da-balance") return "DA-Balance";
  if (mode == "da-double") return "DA-Double";
  if (mode == "da-balance-double") return "DA-BalanceDouble";
  throw UsageError("unknown mode '" + mode + "' (expected tstr, da-balance, da-double or da-balance-double)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"synthts_bench: quality and utility evaluation of synthetic biosignal windows"};
  app.require_subcommand(1);

  // prepare
  Common prep;
  std::string manifest_path;
  bool no_normalize = false;
  auto* prepare = app.add_subcommand("prepare", "Ingest raw recordings into a canonical windowed dataset");
  prepare->add_option("manifest", manifest_path, "Dataset manifest (JSON)")->required();
  add_common(prepare, prep, false);
  prepare->add_flag("--no-normalize", no_normalize, "Keep raw amplitudes (skip per-channel z-scoring)");

  // refgen
  Common gen;
  std::string gen_real, kind = "identity";
  refgen::DegradationSpec deg;
  bool toy = false;
  refgen::ToyTaskSpec toy_spec;
  bool toy_raw = false;
  auto* refgen_cmd = app.add_subcommand("refgen", "Write a reference synthetic dataset (degraded copy or toy task)");
  refgen_cmd->add_option("--real", gen_real, "Canonical real dataset to degrade");
  refgen_cmd->add_option("--kind", kind,
                         "identity, jitter, amplitude-scale, circular-shift, white-noise or label-permute");
  refgen_cmd->add_option("--sigma", deg.sigma, "Jitter standard deviation (>= 0)");
  refgen_cmd->add_option("--alpha", deg.alpha, "Amplitude-scale factor (> 0)");
  refgen_cmd->add_option("--shift", deg.shift, "Circular shift in samples (taken modulo window length)");
  refgen_cmd->add_option("--seed", deg.seed, "Generator seed");
  refgen_cmd->add_flag("--toy", toy, "Generate the separable toy task instead of degrading --real");
  refgen_cmd->add_option("--per-class", toy_spec.per_class, "Toy task: windows per class");
  refgen_cmd->add_option("--length", toy_spec.length, "Toy task: window length in samples");
  refgen_cmd->add_option("--channels", toy_spec.channels, "Toy task: channel count");
  refgen_cmd->add_option("--f0", toy_spec.f0, "Toy task: class-0 tone frequency (Hz)");
  refgen_cmd->add_flag("--no-normalize", toy_raw, "Toy task: keep raw amplitudes");
  add_common(refgen_cmd, gen, false);

  // eval-quality
  Common q;
  std::string q_real, q_synth;
  std::vector<std::string> metric_names{"cd", "crd", "l2", "dtwd", "mmd", "en", "ds"};
  std::size_t pairs_cap = 20000;
  std::uint64_t q_seed = 0;
  std::optional<std::size_t> band;
  std::optional<double> bandwidth;
  std::string entropy_agg = "sum", ds_mode = "per-class";
  TrainingFlags q_train;
  q_train.classifiers = {"MLP", "AE", "CNN", "FCN", "ConvLSTM", "ResNet"};
  auto* quality = app.add_subcommand("eval-quality", "Sample- and distribution-level similarity metrics");
  quality->add_option("--real", q_real, "Canonical real dataset")->required();
  quality->add_option("--synth", q_synth, "Canonical synthetic dataset")->required();
  quality->add_option("--metrics", metric_names, "Metrics: cd, crd, l2, dtwd, mmd, en, ds")->delimiter(',');
  quality->add_option("--pairs-cap", pairs_cap, "Maximum (real, synthetic) pairs per class; 0 uses all pairs");
  quality->add_option("--seed", q_seed, "Seed for pair sampling and the bandwidth subsample");
  quality->add_option("--band", band, "Sakoe-Chiba band radius for DTWD (default: unconstrained)");
  quality->add_option("--bandwidth", bandwidth, "Fixed MMD kernel bandwidth (default: median heuristic)")
      ->check(CLI::PositiveNumber);
  quality->add_option("--entropy-agg", entropy_agg, "Spectral entropy aggregation: sum or mean");
  quality->add_option("--ds-mode", ds_mode, "Discriminative score mode: per-class or pooled");
  add_training(quality, q_train);
  add_common(quality, q, true);

  // eval-utility
  Common u;
  std::string u_real, u_synth;
  std::vector<std::string> modes{"tstr"};
  TrainingFlags u_train;
  auto* utility = app.add_subcommand("eval-utility", "TRTR baseline, TSTR and data-augmentation policies");
  utility->add_option("--real", u_real, "Canonical real dataset")->required();
  utility->add_option("--synth", u_synth, "Canonical synthetic dataset")->required();
  utility->add_option("--mode", modes, "tstr, da-balance, da-double, da-balance-double (repeatable)")
      ->delimiter(',');
  add_training(utility, u_train);
  add_common(utility, u, true);

  // embed
  Common e;
  std::string e_real, e_synth;
  distribution::EmbeddingConfig tsne_cfg;
  std::size_t embed_cap = 1000;
  bool svg = false;
  auto* embed = app.add_subcommand("embed", "Per-modality, per-class t-SNE of real and synthetic windows");
  embed->add_option("--real", e_real, "Canonical real dataset")->required();
  embed->add_option("--synth", e_synth, "Canonical synthetic dataset")->required();
  embed->add_option("--perplexity", tsne_cfg.perplexity, "t-SNE perplexity")->check(CLI::PositiveNumber);
  embed->add_option("--iterations", tsne_cfg.iterations, "Gradient-descent iterations");
  embed->add_option("--seed", tsne_cfg.seed, "Seed for subsampling");
  embed->add_option("--cap", embed_cap, "Maximum windows per source and class");
  embed->add_flag("--svg", svg, "Also write an SVG scatter per file");
  add_common(embed, e, false);

  // report
  Common r;
  std::vector<std::string> inputs;
  auto* report = app.add_subcommand("report", "Combine JSON reports from several configurations into tables");
  report->add_option("inputs", inputs, "Quality or utility report JSON files")->required();
  report->add_option("--out", r.out, "Output directory")->required();
  report->add_option("--format", r.formats, "Formats: csv, md")->delimiter(',');

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (prepare->parsed()) {
      auto manifest = data::load_manifest(manifest_path);
      data::PipelineOptions opts;
      opts.normalization = no_normalize ? data::NormalizationScheme::None : data::NormalizationScheme::ZScore;
      opts.workers = prep.workers;
      const auto ds = data::prepare_dataset(manifest, opts);
      data::write_canonical(ds, prep.out);
      out << data::format_summary(data::summarize(ds));
      return 0;
    }

    if (refgen_cmd->parsed()) {
      if (toy) {
        toy_spec.seed = deg.seed;
        auto ds = refgen::make_toy_task(toy_spec);
        if (!toy_raw) ds = data::normalize(ds, data::NormalizationScheme::ZScore);
        data::write_canonical(ds, gen.out);
        out << data::format_summary(data::summarize(ds));
        return 0;
      }
      if (gen_real.empty()) throw UsageError("refgen needs --real (or --toy)");
      deg.kind = refgen::degradation_kind_from_string(kind);
      const auto real = data::read_canonical(gen_real);
      const auto synth = refgen::generate(real, deg);
      data::write_canonical(synth, gen.out);
      out << "wrote " << deg.describe() << " of " << gen_real << " to " << gen.out << '\n';
      return 0;
    }

    if (quality->parsed()) {
      const auto formats = parse_formats(q.formats);
      auto [real, synth] = load_pair(q_real, q_synth);
      eval::QualityOptions opts;
      opts.metrics.clear();
      for (const auto& m : metric_names) opts.metrics.push_back(eval::quality_metric_from_string(m));
      opts.plan = pairs_cap == 0 ? metrics::PairPlan::all_pairs() : metrics::PairPlan::capped(pairs_cap, q_seed);
      opts.band_radius = band;
      opts.kernel.bandwidth = bandwidth;
      opts.kernel.seed = q_seed;
      opts.entropy.aggregation = distribution::entropy_aggregation_from_string(entropy_agg);
      if (ds_mode != "per-class" && ds_mode != "pooled") throw UsageError("--ds-mode must be per-class or pooled");
      opts.ds_mode = ds_mode == "pooled" ? eval::DsMode::Pooled : eval::DsMode::PerClass;
      opts.workers = q.workers;
      const bool wants_ds = std::find(opts.metrics.begin(), opts.metrics.end(), eval::QualityMetric::DS) !=
                            opts.metrics.end();
      json config = {{"command", "eval-quality"},
                     {"metrics", metric_names},
                     {"pair_plan", opts.plan.describe()},
                     {"seed", q_seed},
                     {"band", band ? json(*band) : json(nullptr)},
                     {"bandwidth", bandwidth ? json(*bandwidth) : json(nullptr)},
                     {"entropy_aggregation", entropy_agg}};
      if (wants_ds) {
        config["ds_mode"] = ds_mode;
        config["training"] = training_json(q_train);
        opts.ds = protocol_config(q_train, q.workers);
      }
      auto header = eval::make_header(q.config_id, config, real, synth, wants_ds ? q_train.seeds : std::vector<std::uint64_t>{q_seed});
      std::unique_ptr<eval::RunLedger> ledger;
      if (wants_ds) {
        ledger = std::make_unique<eval::RunLedger>(q.out, header.config_hash);
        opts.ds.on_run = [&](const eval::RunRecord& rec) { ledger->append(rec); };
      }
      eval::QualityReport rep{header, eval::evaluate_quality(real, synth, opts, header.warnings)};
      rep.header.warnings = header.warnings;
      print_warnings(rep.header.warnings, err);
      eval::write_report(rep, q.out, "quality", formats);
      if (formats.count(eval::Format::Markdown)) out << eval::to_markdown(rep);
      return 0;
    }

    if (utility->parsed()) {
      const auto formats = parse_formats(u.formats);
      auto [real, synth] = load_pair(u_real, u_synth);
      auto cfg = protocol_config(u_train, u.workers);
      std::vector<std::string> protocol_names;
      for (const auto& m : modes) protocol_names.push_back(mode_to_protocol_name(m));
      json config = {{"command", "eval-utility"}, {"modes", modes}, {"training", training_json(u_train)}};
      auto header = eval::make_header(u.config_id, config, real, synth, u_train.seeds);
      eval::RunLedger ledger(u.out, header.config_hash);
      cfg.on_run = [&](const eval::RunRecord& rec) { ledger.append(rec); };
      const auto trtr = eval::run_trtr(real, cfg);
      eval::UtilityReport rep{header, trtr.runs};
      for (const auto& m : modes) {
        eval::UtilityResult res;
        if (m == "tstr") {
          res = eval::run_tstr(real, synth, cfg, trtr);
        } else {
          const auto policy = m == "da-balance"  ? eval::DaPolicy::Balance
                              : m == "da-double" ? eval::DaPolicy::Double
                                                 : eval::DaPolicy::BalanceDouble;
          res = eval::run_da(real, synth, policy, cfg, trtr);
        }
        rep.runs.insert(rep.runs.end(), res.runs.begin(), res.runs.end());
      }
      eval::write_report(rep, u.out, "utility", formats);
      if (formats.count(eval::Format::Markdown)) out << eval::to_markdown(rep);
      return 0;
    }

    if (embed->parsed()) {
      auto [real, synth] = load_pair(e_real, e_synth);
      fs::create_directories(e.out);
      std::size_t files = 0;
      for (std::size_t c = 0; c < real.channels(); ++c) {
        for (int k = 0; k < real.n_classes(); ++k) {
          distribution::EmbedRequest req;
          req.channel = c;
          req.class_id = k;
          req.cap_per_source = embed_cap;
          req.config = tsne_cfg;
          const auto points = distribution::embed_class(real, synth, req);
          const std::string stem = real.meta().channels[c].name + "_class" + std::to_string(k);
          distribution::write_embedding_csv(points, fs::path(e.out) / (stem + ".csv"));
          if (svg) {
            distribution::write_embedding_svg(points, fs::path(e.out) / (stem + ".svg"),
                                              real.meta().channels[c].name + ", class " + std::to_string(k));
          }
          ++files;
        }
      }
      out << "wrote " << files << " embedding files to " << e.out << '\n';
      return 0;
    }

    if (report->parsed()) {
      std::vector<eval::QualityReport> qs;
      std::vector<eval::UtilityReport> us;
      for (const auto& path : inputs) {
        std::ifstream in(path);
        if (!in) throw DataError(path + ": cannot open");
        json j;
        try {
          in >> j;
        } catch (const json::exception& ex) {
          throw DataError(path + ": invalid JSON: " + ex.what());
        }
        const auto kind_name = j.value("kind", "");
        if (kind_name == "quality") {
          qs.push_back(eval::quality_from_json(j));
        } else if (kind_name == "utility") {
          us.push_back(eval::utility_from_json(j));
        } else {
          throw DataError(path + ": not a quality or utility report");
        }
      }
      std::vector<const eval::ReportHeader*> headers;
      for (const auto& x : qs) headers.push_back(&x.header);
      for (const auto& x : us) headers.push_back(&x.header);
      eval::require_same_dataset(headers);
      const auto formats = parse_formats(r.formats);
      fs::create_directories(r.out);
      auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream o(fs::path(r.out) / name, std::ios::binary | std::ios::trunc);
        if (!o) throw DataError((fs::path(r.out) / name).string() + ": cannot write");
        o << text;
      };
      std::string md;
      if (!qs.empty()) {
        md += "## Quality\n\n" + eval::compare_markdown(std::span<const eval::QualityReport>(qs)) + "\n";
        if (formats.count(eval::Format::Csv)) write("quality_comparison.csv", eval::compare_csv(std::span<const eval::QualityReport>(qs)));
      }
      if (!us.empty()) {
        md += "## Utility (average Δ AUROC over classifiers)\n\n" +
              eval::compare_markdown(std::span<const eval::UtilityReport>(us)) + "\n";
        if (formats.count(eval::Format::Csv)) write("utility_comparison.csv", eval::compare_csv(std::span<const eval::UtilityReport>(us)));
      }
      if (formats.count(eval::Format::Markdown)) write("comparison.md", md);
      out << md;
      return 0;
    }
  } catch (const UsageError& ex) {
    err << "usage error: " << ex.what() << '\n';
    return 1;
  } catch (const DataError& ex) {
    err << "error: " << ex.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << '\n';
    return 2;
  } catch (const InvariantError& ex) {
    err << "internal error: " << ex.what() << '\n';
    return 3;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << '\n';
    return 3;
  }
  return 1;
}

}  // namespace synthts::cli
