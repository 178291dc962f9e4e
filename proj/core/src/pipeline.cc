/*
 * Copyright 2026 The Vital Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "vital/pipeline.h"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "json.hpp"
#include "vital/metrics.h"
#include "vital/svg.h"

namespace vital {

namespace fs = std::filesystem;

void finalize_dataset(Dataset& dataset, std::uint64_t split_seed, double threshold,
                      const std::vector<std::string>& vitals,
                      const std::vector<std::string>& labs) {
  auto& m = dataset.manifest;
  std::vector<double> ratios;
  std::vector<VariableKind> kinds;
  for (const auto& v : m.variables) {
    ratios.push_back(v.missing_ratio);
    kinds.push_back(v.nominal_kind);
  }
  std::optional<PartitionOverride> override_lists;
  if (!vitals.empty() || !labs.empty()) {
    PartitionOverride o;
    auto lookup = [&](const std::string& name) {
      try {
        return m.index_of(name);
      } catch (const std::exception&) {
        throw ConfigError("config key 'dataset.partition' names unknown variable '" + name + "'");
      }
    };
    for (const auto& n : vitals) o.vitals.push_back(lookup(n));
    for (const auto& n : labs) o.labs.push_back(lookup(n));
    override_lists = std::move(o);
  }
  try {
    m.partition = partition_variables(ratios, kinds, override_lists, threshold);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config key 'dataset.partition': " + std::string(e.what()));
  }
  if (m.splits.train.empty() && m.splits.validation.empty() && m.splits.test.empty()) {
    m.splits = split_indices(dataset.records.size(), split_seed);
  }
  if (!m.normalization) {
    Normalizer n;
    n.fit(dataset.records, m.splits.train);
    m.normalization = n.stats();
  }
}

LoadedData load_dataset(const RunConfig& config) {
  LoadedData out;
  const auto& src = config.dataset;
  if (src.kind == "synthetic") {
    auto syn = generate_synthetic(src.synthetic);
    out.dataset = std::move(syn.dataset);
    out.truth = std::move(syn.truth);
  } else if (src.kind == "bundle") {
    if (!fs::exists(src.path / "manifest.json")) {
      throw ConfigError("config key 'dataset.path': no manifest.json in " + src.path.string());
    }
    out.dataset = read_bundle(src.path);
  } else {
    if (!fs::is_directory(src.path)) {
      throw ConfigError("config key 'dataset.path': " + src.path.string() + " is not a directory");
    }
    try {
      out.dataset = ingest_psv(src.path, src.preset == "p12" ? IngestOptions::p12()
                                                             : IngestOptions::p19());
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
  }
  finalize_dataset(out.dataset, src.synthetic.seed, src.partition_threshold, src.vitals,
                   src.labs);
  out.normalizer = Normalizer(*out.dataset.manifest.normalization);
  return out;
}

PreparedSplits prepare_splits(const LoadedData& data) {
  const auto& s = data.dataset.manifest.splits;
  return {prepare_inputs(data.dataset, s.train, data.normalizer),
          prepare_inputs(data.dataset, s.validation, data.normalizer),
          prepare_inputs(data.dataset, s.test, data.normalizer)};
}

TrainedRun train_run(const RunConfig& config, const LoadedData& data,
                     const PreparedSplits& splits) {
  VitalModel model(config.model, ModelLayout::from_manifest(data.dataset.manifest),
                   config.train.seed);
  TrainResult result = train(model, splits.train, splits.validation, config.train);
  SplitMetrics val = evaluate(model, splits.validation, "validation", config.train.threads);
  SplitMetrics test = evaluate(model, splits.test, "test", config.train.threads);
  return {std::move(model), std::move(result), val, test};
}

MetricsReport training_report(const RunConfig& config, const TrainedRun& run) {
  MetricsReport r;
  r.protocol = "train";
  r.settings = {{"config_hash", config.hash()},
                {"seed", std::to_string(config.train.seed)},
                {"nm_mode", to_string(config.model.nm_mode)},
                {"missing_word", config.model.reprogramming.missing_word},
                {"best_epoch", std::to_string(run.result.best_epoch)},
                {"steps", std::to_string(run.result.steps)},
                {"backbone_fingerprint", std::to_string(run.result.backbone_after)}};
  r.splits = {run.validation, run.test};
  return r;
}

fs::path default_output_root() {
  if (const char* env = std::getenv("VITAL_OUTPUT_ROOT"); env != nullptr && *env != '\0') {
    return env;
  }
  return "runs";
}

fs::path default_run_directory(const RunConfig& config) {
  const fs::path root = config.output.empty() ? default_output_root() : config.output;
  return root / (config.hash() + "-seed" + std::to_string(config.train.seed));
}

void claim_output(const fs::path& path, bool force) {
  if (fs::exists(path) && !(fs::is_directory(path) && fs::is_empty(path)) && !force) {
    throw ConfigError("output " + path.string() + " already exists (use --force to overwrite)");
  }
  fs::create_directories(path);
}

void save_run(const fs::path& directory, const RunConfig& config, const LoadedData& data,
              const TrainedRun& run) {
  fs::create_directories(directory);
  {
    std::ofstream out(directory / kConfigFile, std::ios::trunc);
    out << config.to_json_text() << '\n';
  }
  run.model.parameters().save(directory / kCheckpointFile);
  run.model.backbone().vocab().save(directory / "vocab.txt");
  write_history_csv(run.result.history, directory / "history.csv");
  training_report(config, run).write(directory / "metrics.json");
  if (data.truth) write_ground_truth(*data.truth, (directory / "ground_truth.json").string());
}

LoadedRun load_run(const fs::path& directory) {
  if (!fs::exists(directory / kConfigFile)) {
    throw ConfigError("run directory " + directory.string() + " has no " + kConfigFile);
  }
  if (!fs::exists(directory / kCheckpointFile)) {
    throw ConfigError("run directory " + directory.string() + " has no " + kCheckpointFile);
  }
  RunConfig config = RunConfig::load(directory / kConfigFile);
  LoadedData data = load_dataset(config);
  VitalModel model(config.model, ModelLayout::from_manifest(data.dataset.manifest),
                   config.train.seed);
  ParameterStore checkpoint;
  try {
    checkpoint = ParameterStore::load(directory / kCheckpointFile);
    model.load_parameters(checkpoint);
  } catch (const std::runtime_error& e) {
    throw ConfigError("checkpoint " + (directory / kCheckpointFile).string() + ": " + e.what());
  }
  return {std::move(config), std::move(data), std::move(model)};
}

void export_figures(const LoadedRun& run, const fs::path& directory) {
  fs::create_directories(directory);
  const auto& ds = run.data.dataset;
  const auto& model = run.model;
  const auto test = prepare_inputs(ds, ds.manifest.splits.test, run.data.normalizer);
  if (test.empty()) throw std::invalid_argument("test split is empty");

  // Attention maps of the first test patient, one file per vital.
  const auto& first = test.front();
  const std::size_t t = first.steps;
  for (std::size_t v = 0; v < ds.manifest.partition.vitals.size(); ++v) {
    const std::string name = ds.manifest.variables[ds.manifest.partition.vitals[v]].name;
    std::span<const double> x(first.vital_values.data() + v * t, t);
    std::span<const std::uint8_t> m(first.vital_mask.data() + v * t, t);
    const auto att = model.vital_embedding().attention_map(model.parameters(), x, m);
    write_attention_csv(att, m, directory / ("attention_" + name + ".csv"));
    write_heatmap_svg(att, "attention " + name, directory / ("attention_" + name + ".svg"));
  }

  std::vector<std::string> lab_names;
  for (std::size_t p : ds.manifest.partition.labs) lab_names.push_back(ds.manifest.variables[p].name);
  if (!lab_names.empty()) {
    const auto points = lab_embedding_points(model, test, lab_names);
    std::vector<std::vector<double>> vecs;
    for (const auto& p : points) vecs.push_back(p.embedding);
    if (vecs.size() >= 3) {
      const auto pca = pca_project(vecs, 2);
      std::ofstream csv(directory / "lab_embeddings_pca.csv", std::ios::trunc);
      csv << "tag,variable,pc1,pc2\n" << std::setprecision(17);
      std::vector<ScatterPoint> sp;
      for (std::size_t i = 0; i < points.size(); ++i) {
        csv << points[i].tag << ',' << points[i].variable << ',' << pca.coordinates[i][0] << ','
            << pca.coordinates[i][1] << '\n';
        sp.push_back({pca.coordinates[i][0], pca.coordinates[i][1],
                      points[i].tag == "measured" ? 0 : 1});
      }
      write_scatter_svg(sp, {"measured", "not_measured"}, "lab embeddings",
                        directory / "lab_embeddings_pca.svg");
      const auto sep = separation_diagnostic(model, test);
      nlohmann::ordered_json j{{"measured_points", sep.measured_points},
                               {"token_knn_distance", sep.token_knn_distance},
                               {"token_nearest_distance", sep.token_nearest_distance},
                               {"median_pairwise_distance", sep.median_pairwise_distance},
                               {"separated", sep.separated}};
      std::ofstream(directory / "separation.json", std::ios::trunc) << j.dump(2) << '\n';
    }
  }

  std::vector<std::vector<double>> reps;
  std::vector<int> labels;
  for (const auto& in : test) {
    const auto tr = model.trace(model.parameters(), in);
    reps.emplace_back(tr.representation.data().begin(), tr.representation.data().end());
    labels.push_back(in.label);
  }
  if (reps.size() >= 3) {
    const auto pca = pca_project(reps, 2);
    std::ofstream csv(directory / "representations_pca.csv", std::ios::trunc);
    csv << "label,pc1,pc2\n" << std::setprecision(17);
    std::vector<ScatterPoint> sp;
    for (std::size_t i = 0; i < reps.size(); ++i) {
      csv << labels[i] << ',' << pca.coordinates[i][0] << ',' << pca.coordinates[i][1] << '\n';
      sp.push_back({pca.coordinates[i][0], pca.coordinates[i][1], labels[i]});
    }
    std::vector<std::string> names;
    for (int c = 0; c < ds.manifest.num_classes; ++c) names.push_back("label " + std::to_string(c));
    write_scatter_svg(sp, names, "patient representations", directory / "representations_pca.svg");
  }
}

MetricsReport robustness_report(const LoadedRun& run, const RobustnessSettings& settings,
                                std::size_t threads) {
  const auto& ds = run.data.dataset;
  RobustnessProtocol protocol;
  protocol.order = sensor_removal_order(ds, ds.manifest.splits.train);
  protocol.ratios = settings.ratios;
  protocol.lab_only = settings.lab_only;
  const auto points = leave_fixed_sensors_out(run.model, ds, ds.manifest.splits.test,
                                              run.data.normalizer, protocol, threads);
  MetricsReport r;
  r.protocol = settings.lab_only ? "robustness_lab_only" : "robustness";
  std::string order;
  for (std::size_t p : protocol.order) {
    if (!order.empty()) order += ',';
    order += ds.manifest.variables[p].name;
  }
  r.settings = {{"config_hash", run.config.hash()},
                {"seed", std::to_string(run.config.train.seed)},
                {"lab_only", settings.lab_only ? "true" : "false"},
                {"removal_order", order}};
  for (const auto& pt : points) {
    std::string removed;
    for (std::size_t p : pt.removed) {
      if (!removed.empty()) removed += ',';
      removed += ds.manifest.variables[p].name;
    }
    std::ostringstream label;
    label << "ratio=" << pt.ratio;
    r.settings.emplace_back("removed[" + label.str() + "]", removed);
    SplitMetrics m = pt.metrics;
    m.split = "test@" + label.str();
    r.splits.push_back(m);
    r.groups.push_back({label.str(), {run.config.train.seed}, {m.auroc}, {m.auprc}});
  }
  if (settings.lab_only) {
    r.reference = {{"p19_lab_only_0.5_auroc", 85.9}, {"p19_lab_only_0.5_auprc", 52.4}};
  } else {
    r.reference = {{"p19_0.1_auroc", 87.8}, {"p19_0.1_auprc", 53.2}};
  }
  return r;
}

AblationKind parse_ablation_kind(const std::string& text) {
  if (text == "not-measured") return AblationKind::kNotMeasured;
  if (text == "missing-word") return AblationKind::kMissingWord;
  throw ConfigError("unknown ablation kind '" + text + "' (expected not-measured or missing-word)");
}

MetricsReport ablation_report(const RunConfig& config, const LoadedData& data,
                              const PreparedSplits& splits, AblationKind kind) {
  const bool nm = kind == AblationKind::kNotMeasured;
  const auto& settings = nm ? config.ablation.modes : config.ablation.words;
  MetricsReport r;
  r.protocol = nm ? "ablate_not_measured" : "ablate_missing_word";
  std::string seeds;
  for (auto s : config.ablation.seeds) seeds += (seeds.empty() ? "" : ",") + std::to_string(s);
  r.settings = {{"config_hash", config.hash()}, {"seeds", seeds}};
  for (const auto& setting : settings) {
    RunConfig c = config;
    if (nm) {
      c.model.nm_mode = parse_not_measured_mode(setting);
    } else {
      c.model.reprogramming.missing_word = setting;
    }
    MetricsGroup g{setting, {}, {}, {}};
    for (auto seed : config.ablation.seeds) {
      c.train.seed = seed;
      const TrainedRun run = train_run(c, data, splits);
      g.seeds.push_back(seed);
      g.auroc.push_back(run.test.auroc);
      g.auprc.push_back(run.test.auprc);
    }
    r.groups.push_back(std::move(g));
  }
  if (nm) {
    r.reference = {{"p19_trainable_auroc", 89.3}, {"p19_trainable_auprc", 57.5},
                   {"p19_zero_auroc", 88.5},      {"p19_zero_auprc", 55.2},
                   {"p19_random_auroc", 86.0},    {"p19_random_auprc", 50.5}};
  } else {
    r.reference = {{"p19_Missing_auroc", 89.3}, {"p19_Null_auroc", 87.2},
                   {"p19_Apple_auroc", 86.1}, {"p19_Engineering_auroc", 84.3}};
  }
  return r;
}

GradCheckResult pipeline_grad_check(const RunConfig& config, const LoadedData& data,
                                    const GradCheckOptions& options) {
  const auto& train_idx = data.dataset.manifest.splits.train;
  if (train_idx.size() < 2) throw ConfigError("grad-check needs at least two training patients");
  const std::vector<std::size_t> pick = {train_idx[0], train_idx[1]};
  const auto inputs = prepare_inputs(data.dataset, pick, data.normalizer);
  VitalModel model(config.model, ModelLayout::from_manifest(data.dataset.manifest),
                   config.train.seed);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> jitter(0.0, 0.05);
  for (auto& e : model.parameters().entries()) {
    if (e.frozen) continue;
    Tensor t = e.tensor;
    for (double& v : t.mutable_data()) v += jitter(rng);
  }
  const std::vector<const ModelInput*> ptrs = {&inputs[0], &inputs[1]};
  return grad_check(
      [&] { return model.loss_batch(model.parameters(), ptrs, config.train.pos_weight); },
      model.parameters(), options);
}

}  // namespace vital
