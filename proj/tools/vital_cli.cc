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

// vital: command-line entry point for data, training and experiments.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vital/pipeline.h"

namespace fs = std::filesystem;
using namespace vital;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string output;
  bool force = false;
  std::string mode;
  std::string missing_word;
  bool lab_only = false;
  std::vector<double> ratios;
};

RunConfig resolve_config(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : RunConfig::load(o.config_path);
  if (o.seed) c.train.seed = *o.seed;
  if (o.threads) c.train.threads = *o.threads;
  if (!o.mode.empty()) c.model.nm_mode = parse_not_measured_mode(o.mode);
  if (!o.missing_word.empty()) c.model.reprogramming.missing_word = o.missing_word;
  if (o.lab_only) c.robustness.lab_only = true;
  if (!o.ratios.empty()) c.robustness.ratios = o.ratios;
  c.validate();
  return c;
}

// Refuses to replace an existing file unless forced.
void claim_file(const fs::path& path, bool force) {
  if (fs::exists(path) && !force) {
    throw ConfigError("output " + path.string() + " already exists (use --force to overwrite)");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void print_split(const SplitMetrics& m) {
  std::cout << std::fixed << std::setprecision(4) << m.split << " AUROC " << m.auroc
            << " AUPRC " << m.auprc << " (n=" << m.count << ", positives=" << m.positives
            << ")\n";
}

int cmd_synth(const Overrides& o) {
  if (o.output.empty()) throw ConfigError("synth requires --output");
  RunConfig c = o.config_path.empty() ? RunConfig{} : RunConfig::load(o.config_path);
  if (o.seed) c.dataset.synthetic.seed = *o.seed;
  c.dataset.kind = "synthetic";
  c.validate();
  claim_output(o.output, o.force);
  auto syn = generate_synthetic(c.dataset.synthetic);
  finalize_dataset(syn.dataset, c.dataset.synthetic.seed, c.dataset.partition_threshold,
                   c.dataset.vitals, c.dataset.labs);
  write_bundle(syn.dataset, o.output);
  write_ground_truth(syn.truth, (fs::path(o.output) / "ground_truth.json").string());
  std::cout << "wrote " << syn.dataset.records.size() << " patients to " << o.output << "\n"
            << "generator ceiling AUROC " << std::fixed << std::setprecision(6)
            << bayes_ceiling_auroc(syn) << "\n";
  return 0;
}

int cmd_ingest(const Overrides& o, const std::string& input, const std::string& preset) {
  if (o.output.empty()) throw ConfigError("ingest requires --output");
  RunConfig c = o.config_path.empty() ? RunConfig{} : RunConfig::load(o.config_path);
  c.dataset.kind = "psv";
  c.dataset.path = input;
  if (!preset.empty()) c.dataset.preset = preset;
  if (o.seed) c.dataset.synthetic.seed = *o.seed;
  c.validate();
  claim_output(o.output, o.force);
  LoadedData data = load_dataset(c);
  write_bundle(data.dataset, o.output);
  std::cout << "wrote " << data.dataset.records.size() << " patients to " << o.output << "\n";
  return 0;
}

int cmd_train(const Overrides& o) {
  RunConfig c = resolve_config(o);
  if (!o.output.empty()) c.output = o.output;
  const fs::path dir = default_run_directory(c);
  claim_output(dir, o.force);
  LoadedData data = load_dataset(c);
  PreparedSplits splits = prepare_splits(data);
  TrainedRun run = train_run(c, data, splits);
  save_run(dir, c, data, run);
  std::cout << "run directory " << dir.string() << "\n"
            << "best epoch " << run.result.best_epoch << ", steps " << run.result.steps << "\n";
  print_split(run.validation);
  print_split(run.test);
  return 0;
}

int cmd_eval(const Overrides& o, const std::string& run_dir, const std::string& split) {
  LoadedRun run = load_run(run_dir);
  const auto& s = run.data.dataset.manifest.splits;
  const std::vector<std::size_t>* idx = nullptr;
  if (split == "train") idx = &s.train;
  else if (split == "validation") idx = &s.validation;
  else if (split == "test") idx = &s.test;
  else throw ConfigError("unknown split '" + split + "' (expected train, validation or test)");
  const fs::path out = o.output.empty() ? fs::path(run_dir) / ("eval_" + split + ".json")
                                        : fs::path(o.output);
  claim_file(out, o.force);
  const std::size_t threads = o.threads.value_or(run.config.train.threads);
  const auto inputs = prepare_inputs(run.data.dataset, *idx, run.data.normalizer);
  MetricsReport r;
  r.protocol = "eval";
  r.settings = {{"config_hash", run.config.hash()},
                {"seed", std::to_string(run.config.train.seed)}};
  r.splits = {evaluate(run.model, inputs, split, threads)};
  r.write(out);
  print_split(r.splits.front());
  return 0;
}

int cmd_robustness(const Overrides& o, const std::string& run_dir) {
  LoadedRun run = load_run(run_dir);
  RobustnessSettings settings = run.config.robustness;
  if (o.lab_only) settings.lab_only = true;
  if (!o.ratios.empty()) settings.ratios = o.ratios;
  const fs::path out =
      o.output.empty()
          ? fs::path(run_dir) / (settings.lab_only ? "robustness_lab_only.json" : "robustness.json")
          : fs::path(o.output);
  claim_file(out, o.force);
  const MetricsReport r =
      robustness_report(run, settings, o.threads.value_or(run.config.train.threads));
  r.write(out);
  for (const auto& m : r.splits) print_split(m);
  return 0;
}

int cmd_ablate(const Overrides& o, const std::string& kind_text) {
  const AblationKind kind = parse_ablation_kind(kind_text);
  RunConfig c = resolve_config(o);
  if (o.seed) c.ablation.seeds = {*o.seed};
  if (!o.mode.empty()) c.ablation.modes = {o.mode};
  if (!o.missing_word.empty()) c.ablation.words = {o.missing_word};
  c.validate();
  const fs::path root = o.output.empty() ? (c.output.empty() ? default_output_root() : c.output)
                                         : fs::path(o.output);
  const fs::path dir = root / (c.hash() + "-ablate-" + kind_text);
  claim_output(dir, o.force);
  LoadedData data = load_dataset(c);
  PreparedSplits splits = prepare_splits(data);
  const MetricsReport r = ablation_report(c, data, splits, kind);
  {
    std::ofstream(dir / kConfigFile, std::ios::trunc) << c.to_json_text() << '\n';
  }
  r.write(dir / "metrics.json");
  std::cout << "run directory " << dir.string() << "\n";
  for (const auto& g : r.groups) {
    std::cout << std::fixed << std::setprecision(4) << g.label << " AUROC " << mean_of(g.auroc)
              << " +- " << sample_stddev(g.auroc) << " AUPRC " << mean_of(g.auprc) << " +- "
              << sample_stddev(g.auprc) << "\n";
  }
  return 0;
}

int cmd_export(const Overrides& o, const std::string& run_dir) {
  LoadedRun run = load_run(run_dir);
  const fs::path out = o.output.empty() ? fs::path(run_dir) / "figures" : fs::path(o.output);
  claim_output(out, o.force);
  export_figures(run, out);
  std::cout << "figures written to " << out.string() << "\n";
  return 0;
}

int cmd_grad_check(const Overrides& o, std::size_t coords) {
  RunConfig c = resolve_config(o);
  LoadedData data = load_dataset(c);
  GradCheckOptions opt;
  opt.coords_per_tensor = coords;
  opt.seed = c.train.seed;
  const GradCheckResult r = pipeline_grad_check(c, data, opt);
  std::cout << "checked " << r.checked << " coordinates, skipped " << r.skipped_frozen
            << " frozen tensors\n"
            << "max relative error " << std::scientific << std::setprecision(3)
            << r.max_relative_error << " (" << r.worst_tensor << "[" << r.worst_index << "])\n";
  return r.max_relative_error < 1e-4 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-aware clinical time series models on a frozen transformer"};
  app.require_subcommand(1);
  Overrides o;
  std::string run_dir, split = "test", input, preset, kind;
  std::size_t coords = 16;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Seed override");
    sub->add_option("--output", o.output, "Output location");
    sub->add_flag("--force", o.force, "Overwrite existing outputs");
    sub->add_option("--threads", o.threads, "Worker threads");
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--mode", o.mode, "Not-measured token mode")
        ->check(CLI::IsMember({"trainable", "zero", "random"}));
    sub->add_option("--missing-word", o.missing_word, "Vocabulary word for missing steps");
  };
  auto add_robustness = [&](CLI::App* sub) {
    sub->add_flag("--lab-only", o.lab_only, "Remove laboratory variables only");
    sub->add_option("--ratios", o.ratios, "Removal ratios")->delimiter(',');
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset bundle");
  add_common(synth);
  auto* ingest = app.add_subcommand("ingest", "Convert a directory of PSV files to a bundle");
  add_common(ingest);
  ingest->add_option("input", input, "PSV directory")->required();
  ingest->add_option("--preset", preset, "Column preset")->check(CLI::IsMember({"p19", "p12"}));
  auto* train = app.add_subcommand("train", "Train a model and write a run directory");
  add_common(train);
  add_model(train);
  auto* eval = app.add_subcommand("eval", "Evaluate a run directory on one split");
  add_common(eval);
  eval->add_option("run", run_dir, "Run directory")->required();
  eval->add_option("--split", split, "train, validation or test");
  auto* robust = app.add_subcommand("robustness", "Leave-fixed-sensors-out evaluation");
  add_common(robust);
  add_robustness(robust);
  robust->add_option("run", run_dir, "Run directory")->required();
  auto* ablate = app.add_subcommand("ablate", "Multi-seed ablation");
  add_common(ablate);
  add_model(ablate);
  ablate->add_option("kind", kind, "not-measured or missing-word")
      ->required()
      ->check(CLI::IsMember({"not-measured", "missing-word"}));
  auto* figures = app.add_subcommand("export-figures", "Attention and embedding exports");
  add_common(figures);
  figures->add_option("run", run_dir, "Run directory")->required();
  auto* grad = app.add_subcommand("grad-check", "Finite-difference check of the full model");
  add_common(grad);
  add_model(grad);
  grad->add_option("--coords", coords, "Coordinates sampled per tensor (0 = all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*ingest) return cmd_ingest(o, input, preset);
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o, run_dir, split);
    if (*robust) return cmd_robustness(o, run_dir);
    if (*ablate) return cmd_ablate(o, kind);
    if (*figures) return cmd_export(o, run_dir);
    if (*grad) return cmd_grad_check(o, coords);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
