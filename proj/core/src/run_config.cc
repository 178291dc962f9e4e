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

#include "vital/run_config.h"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace vital {

namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& obj, std::string path, std::set<std::string> allowed)
      : obj_(obj), path_(std::move(path)) {
    if (!obj.is_object()) throw ConfigError("config key '" + path_ + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
      if (!allowed.count(key)) throw ConfigError("unknown config key '" + where(key) + "'");
    }
  }

  template <typename T>
  void read(const std::string& key, T& out) const {
    if (!obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + where(key) + "' has the wrong type");
    }
  }

  std::optional<Reader> child(const std::string& key, std::set<std::string> allowed) const {
    if (!obj_.contains(key)) return std::nullopt;
    return Reader(obj_.at(key), where(key), std::move(allowed));
  }

  std::string where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& obj_;
  std::string path_;
};

void require(bool ok, const std::string& key, const std::string& why) {
  if (!ok) throw ConfigError("config key '" + key + "' " + why);
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Reader top(root, "", {"dataset", "model", "train", "robustness", "ablation", "output"});
  std::string output;
  top.read("output", output);
  c.output = output;

  if (auto d = top.child("dataset", {"kind", "path", "preset", "synthetic", "partition"})) {
    std::string path;
    d->read("kind", c.dataset.kind);
    d->read("path", path);
    c.dataset.path = path;
    d->read("preset", c.dataset.preset);
    if (auto s = d->child("synthetic", {"num_patients", "num_steps", "num_vitals", "num_labs",
                                        "min_valid_steps", "vital_missing_rates",
                                        "lab_missing_rates", "lab_never_measured",
                                        "label_scale", "lab_weight", "informative_never",
                                        "positive_fraction", "seed"})) {
      auto& sc = c.dataset.synthetic;
      s->read("num_patients", sc.num_patients);
      s->read("num_steps", sc.num_steps);
      s->read("num_vitals", sc.num_vitals);
      s->read("num_labs", sc.num_labs);
      s->read("min_valid_steps", sc.min_valid_steps);
      s->read("vital_missing_rates", sc.vital_missing_rates);
      s->read("lab_missing_rates", sc.lab_missing_rates);
      s->read("lab_never_measured", sc.lab_never_measured);
      s->read("label_scale", sc.label_scale);
      s->read("lab_weight", sc.lab_weight);
      s->read("informative_never", sc.informative_never);
      s->read("positive_fraction", sc.positive_fraction);
      s->read("seed", sc.seed);
    }
    if (auto p = d->child("partition", {"threshold", "vitals", "labs"})) {
      p->read("threshold", c.dataset.partition_threshold);
      p->read("vitals", c.dataset.vitals);
      p->read("labs", c.dataset.labs);
    }
  }
  if (auto m = top.child("model", {"num_layers", "num_heads", "hidden_dim", "ff_dim",
                                   "vocab_size", "max_context", "backbone_seed",
                                   "num_prototypes", "reprogram_heads", "head_dim",
                                   "embed_dim", "missing_word", "nm_mode", "pretrain_steps"})) {
    auto& b = c.model.backbone;
    auto& r = c.model.reprogramming;
    m->read("num_layers", b.num_layers);
    m->read("num_heads", b.num_heads);
    m->read("hidden_dim", b.hidden_dim);
    m->read("ff_dim", b.ff_dim);
    m->read("vocab_size", b.vocab_size);
    m->read("max_context", b.max_context);
    m->read("backbone_seed", b.seed);
    m->read("num_prototypes", r.num_prototypes);
    m->read("reprogram_heads", r.num_heads);
    m->read("head_dim", r.head_dim);
    m->read("embed_dim", r.embed_dim);
    m->read("missing_word", r.missing_word);
    std::string mode = to_string(c.model.nm_mode);
    m->read("nm_mode", mode);
    try {
      c.model.nm_mode = parse_not_measured_mode(mode);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config key 'model.nm_mode': " + std::string(e.what()));
    }
    m->read("pretrain_steps", c.model.pretrain_steps);
  }
  if (auto t = top.child("train", {"learning_rate", "batch_size", "epochs", "patience", "seed",
                                   "pos_weight", "max_steps", "threads", "chunk_size"})) {
    t->read("learning_rate", c.train.learning_rate);
    t->read("batch_size", c.train.batch_size);
    t->read("epochs", c.train.epochs);
    t->read("patience", c.train.patience);
    t->read("seed", c.train.seed);
    t->read("pos_weight", c.train.pos_weight);
    t->read("max_steps", c.train.max_steps);
    t->read("threads", c.train.threads);
    t->read("chunk_size", c.train.chunk_size);
  }
  if (auto r = top.child("robustness", {"ratios", "lab_only"})) {
    r->read("ratios", c.robustness.ratios);
    r->read("lab_only", c.robustness.lab_only);
  }
  if (auto a = top.child("ablation", {"seeds", "modes", "words"})) {
    a->read("seeds", c.ablation.seeds);
    a->read("modes", c.ablation.modes);
    a->read("words", c.ablation.words);
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void RunConfig::validate() const {
  require(dataset.kind == "synthetic" || dataset.kind == "bundle" || dataset.kind == "psv",
          "dataset.kind", "must be synthetic, bundle or psv");
  require(dataset.kind == "synthetic" || !dataset.path.empty(), "dataset.path",
          "is required for bundle and psv datasets");
  require(dataset.preset == "p19" || dataset.preset == "p12", "dataset.preset",
          "must be p19 or p12");
  require(dataset.partition_threshold > 0.0 && dataset.partition_threshold < 1.0,
          "dataset.partition.threshold", "must lie in (0,1)");
  try {
    if (dataset.kind == "synthetic") dataset.synthetic.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config key 'dataset.synthetic': " + std::string(e.what()));
  }
  try {
    model.backbone.validate();
    model.reprogramming.validate(model.backbone);
    Vocabulary::standard(model.backbone.vocab_size).index(model.reprogramming.missing_word);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config key 'model': " + std::string(e.what()));
  }
  try {
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config key 'train': " + std::string(e.what()));
  }
  for (double r : robustness.ratios)
    require(r >= 0.0 && r <= 1.0, "robustness.ratios", "entries must lie in [0,1]");
  for (const auto& m : ablation.modes) {
    try {
      parse_not_measured_mode(m);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config key 'ablation.modes': " + std::string(e.what()));
    }
  }
  require(!ablation.seeds.empty(), "ablation.seeds", "must not be empty");
}

std::string RunConfig::to_json_text() const {
  const auto& sc = dataset.synthetic;
  const auto& b = model.backbone;
  const auto& r = model.reprogramming;
  json j;
  j["dataset"] = {{"kind", dataset.kind},
                  {"path", dataset.path.string()},
                  {"preset", dataset.preset},
                  {"synthetic",
                   {{"num_patients", sc.num_patients},
                    {"num_steps", sc.num_steps},
                    {"num_vitals", sc.num_vitals},
                    {"num_labs", sc.num_labs},
                    {"min_valid_steps", sc.min_valid_steps},
                    {"vital_missing_rates", sc.vital_missing_rates},
                    {"lab_missing_rates", sc.lab_missing_rates},
                    {"lab_never_measured", sc.lab_never_measured},
                    {"label_scale", sc.label_scale},
                    {"lab_weight", sc.lab_weight},
                    {"informative_never", sc.informative_never},
                    {"positive_fraction", sc.positive_fraction},
                    {"seed", sc.seed}}},
                  {"partition",
                   {{"threshold", dataset.partition_threshold},
                    {"vitals", dataset.vitals},
                    {"labs", dataset.labs}}}};
  j["model"] = {{"num_layers", b.num_layers},
                {"num_heads", b.num_heads},
                {"hidden_dim", b.hidden_dim},
                {"ff_dim", b.ff_dim},
                {"vocab_size", b.vocab_size},
                {"max_context", b.max_context},
                {"backbone_seed", b.seed},
                {"num_prototypes", r.num_prototypes},
                {"reprogram_heads", r.num_heads},
                {"head_dim", r.head_dim},
                {"embed_dim", r.embed_dim},
                {"missing_word", r.missing_word},
                {"nm_mode", to_string(model.nm_mode)},
                {"pretrain_steps", model.pretrain_steps}};
  j["train"] = {{"learning_rate", train.learning_rate},
                {"batch_size", train.batch_size},
                {"epochs", train.epochs},
                {"patience", train.patience},
                {"seed", train.seed},
                {"pos_weight", train.pos_weight},
                {"max_steps", train.max_steps},
                {"threads", train.threads},
                {"chunk_size", train.chunk_size}};
  j["robustness"] = {{"ratios", robustness.ratios}, {"lab_only", robustness.lab_only}};
  j["ablation"] = {{"seeds", ablation.seeds},
                   {"modes", ablation.modes},
                   {"words", ablation.words}};
  j["output"] = output.string();
  return j.dump(2);
}

std::string RunConfig::hash() const {
  RunConfig copy = *this;
  copy.output.clear();
  copy.train.seed = 0;
  copy.train.threads = 1;
  const std::string text = copy.to_json_text();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vital
