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

#include "vital/dataset.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace vital {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> PatientRecord::observed_values(std::size_t p) const {
  std::vector<double> out;
  for (std::size_t t = 0; t < num_steps; ++t)
    if (observed(t, p)) out.push_back(value(t, p));
  return out;
}

bool PatientRecord::ever_observed(std::size_t p) const {
  for (std::size_t t = 0; t < num_steps; ++t)
    if (observed(t, p)) return true;
  return false;
}

void PatientRecord::validate(int num_classes) const {
  const std::size_t cells = num_steps * num_variables;
  if (values.size() != cells || mask.size() != cells || padding.size() != num_steps) {
    throw std::invalid_argument("record " + id + ": grid sizes disagree");
  }
  for (std::size_t i = 0; i < cells; ++i) {
    const bool obs = mask[i] != 0;
    if (obs == std::isnan(values[i])) {
      throw std::invalid_argument("record " + id + ": mask disagrees with value at cell " +
                                  std::to_string(i));
    }
  }
  if (label < 0 || label >= num_classes) {
    throw std::invalid_argument("record " + id + ": label " + std::to_string(label) +
                                " out of range");
  }
  if (valid_length < 1 || valid_length > num_steps) {
    throw std::invalid_argument("record " + id + ": valid_length out of range");
  }
}

PatientRecord PatientRecord::from_grid(std::string id, std::size_t num_variables,
                                       std::vector<double> values,
                                       std::vector<double> demographics, int label) {
  if (num_variables == 0 || values.size() % num_variables != 0) {
    throw std::invalid_argument("record " + id + ": grid is not rectangular");
  }
  PatientRecord r;
  r.id = std::move(id);
  r.num_variables = num_variables;
  r.num_steps = values.size() / num_variables;
  r.mask.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) r.mask[i] = std::isnan(values[i]) ? 0 : 1;
  r.values = std::move(values);
  r.padding.assign(r.num_steps, 0);
  r.demographics = std::move(demographics);
  r.label = label;
  r.valid_length = r.num_steps;
  return r;
}

std::size_t DatasetManifest::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < variables.size(); ++i)
    if (variables[i].name == name) return i;
  throw std::out_of_range("unknown variable '" + name + "'");
}

IngestOptions IngestOptions::p19() { return IngestOptions{}; }

IngestOptions IngestOptions::p12() {
  IngestOptions o;
  o.max_steps = 215;
  o.label_column = "In-hospital_death";
  o.demographic_columns = {"Age", "Gender", "Height", "ICUType", "Weight"};
  o.ignored_columns = {"RecordID", "Time"};
  o.vital_names = {"HR",    "DiasABP", "SysABP", "MAP",  "NIDiasABP",
                   "NIMAP", "NISysABP", "RespRate", "Temp", "SaO2"};
  return o;
}

namespace {

std::vector<std::string> split_pipe(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, '|')) out.push_back(cell);
  if (!line.empty() && line.back() == '|') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, const fs::path& file, std::size_t line) {
  const std::string cell = trim(raw);
  if (cell.empty() || cell == "NaN" || cell == "nan" || cell == "NA") return kMissing;
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() ||
      !std::isfinite(v)) {
    throw std::runtime_error(file.string() + ":" + std::to_string(line) +
                             ": cannot parse number '" + cell + "'");
  }
  return v;
}

std::map<std::string, int> read_sidecar(const fs::path& path) {
  std::map<std::string, int> labels;
  std::ifstream in(path);
  if (!in) return labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split_pipe(line);
    if (lineno == 1 && cells.size() >= 2 && trim(cells[1]) == "label") continue;
    if (cells.size() < 2) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected id|label");
    }
    const double v = parse_cell(cells[1], path, lineno);
    if (std::isnan(v)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": missing label");
    }
    labels[trim(cells[0])] = static_cast<int>(v);
  }
  return labels;
}

}  // namespace

Dataset ingest_psv(const fs::path& directory, const IngestOptions& options) {
  if (!fs::is_directory(directory)) {
    throw std::runtime_error("not a directory: " + directory.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".psv" &&
        entry.path().filename() != options.label_sidecar) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no .psv files in " + directory.string());
  const auto sidecar = read_sidecar(directory / options.label_sidecar);

  Dataset ds;
  std::vector<std::string> header;
  std::vector<int> role;  // -1 ignored, -2 label, -3-k demographic k, >=0 variable
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(file.string() + ":1: empty file");
    auto cols = split_pipe(line);
    for (auto& c : cols) c = trim(c);
    if (header.empty()) {
      header = cols;
      std::set<std::string> seen;
      for (const auto& name : header) {
        if (!seen.insert(name).second) {
          throw std::runtime_error(file.string() + ":1: duplicate column '" + name + "'");
        }
        if (name == options.label_column) {
          role.push_back(-2);
        } else if (auto it = std::find(options.demographic_columns.begin(),
                                       options.demographic_columns.end(), name);
                   it != options.demographic_columns.end()) {
          role.push_back(-3 - static_cast<int>(ds.manifest.demographic_names.size()));
          ds.manifest.demographic_names.push_back(name);
        } else if (std::find(options.ignored_columns.begin(),
                             options.ignored_columns.end(),
                             name) != options.ignored_columns.end()) {
          role.push_back(-1);
        } else {
          role.push_back(static_cast<int>(ds.manifest.variables.size()));
          VariableInfo info;
          info.name = name;
          info.nominal_kind = std::find(options.vital_names.begin(),
                                        options.vital_names.end(),
                                        name) != options.vital_names.end()
                                  ? VariableKind::kVital
                                  : VariableKind::kLab;
          ds.manifest.variables.push_back(info);
        }
      }
    } else if (cols != header) {
      throw std::runtime_error(file.string() + ":1: header differs from " +
                               files.front().string());
    }

    const std::size_t p = ds.manifest.variables.size();
    const std::size_t demo = ds.manifest.demographic_names.size();
    std::vector<double> grid;
    std::vector<double> demographics(demo, kMissing);
    double label = kMissing;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      const auto cells = split_pipe(line);
      if (cells.size() != header.size()) {
        throw std::runtime_error(file.string() + ":" + std::to_string(lineno) +
                                 ": expected " + std::to_string(header.size()) +
                                 " columns, got " + std::to_string(cells.size()));
      }
      std::vector<double> row(p, kMissing);
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (role[c] == -1) continue;
        const double v = parse_cell(cells[c], file, lineno);
        if (role[c] >= 0) {
          row[static_cast<std::size_t>(role[c])] = v;
        } else if (role[c] == -2) {
          if (!std::isnan(v)) label = std::isnan(label) ? v : std::max(label, v);
        } else {
          auto& slot = demographics[static_cast<std::size_t>(-3 - role[c])];
          if (std::isnan(slot)) slot = v;
        }
      }
      grid.insert(grid.end(), row.begin(), row.end());
    }
    if (grid.empty()) throw std::runtime_error(file.string() + ": no data rows");
    const std::string id = file.stem().string();
    if (std::isnan(label)) {
      auto it = sidecar.find(id);
      if (it == sidecar.end()) {
        throw std::runtime_error(file.string() + ": missing label (no '" +
                                 options.label_column + "' column or sidecar entry)");
      }
      label = it->second;
    }
    auto record = PatientRecord::from_grid(id, p, std::move(grid), std::move(demographics),
                                           static_cast<int>(label));
    record = truncate_front(record, options.max_steps);
    ds.records.push_back(std::move(record));
  }

  int max_label = 0;
  for (const auto& r : ds.records) {
    if (r.label < 0) {
      throw std::runtime_error("record " + r.id + ": negative label");
    }
    max_label = std::max(max_label, r.label);
  }
  ds.manifest.num_classes = std::max(2, max_label + 1);
  ds.manifest.max_steps = options.max_steps;
  const auto ratios = compute_missing_ratios(ds.records, ds.manifest.num_variables());
  for (std::size_t i = 0; i < ratios.size(); ++i)
    ds.manifest.variables[i].missing_ratio = ratios[i];
  return ds;
}

std::vector<double> compute_missing_ratios(const std::vector<PatientRecord>& records,
                                           std::size_t num_variables) {
  if (records.empty()) throw std::invalid_argument("compute_missing_ratios: no records");
  std::vector<double> observed(num_variables, 0.0);
  double total = 0.0;
  for (const auto& r : records) {
    for (std::size_t t = 0; t < r.num_steps; ++t) {
      if (r.padding[t]) continue;
      total += 1.0;
      for (std::size_t p = 0; p < num_variables; ++p)
        if (r.observed(t, p)) observed[p] += 1.0;
    }
  }
  std::vector<double> ratios(num_variables);
  for (std::size_t p = 0; p < num_variables; ++p)
    ratios[p] = total > 0 ? 1.0 - observed[p] / total : 1.0;
  return ratios;
}

Partition partition_variables(const std::vector<double>& ratios,
                              const std::vector<VariableKind>& nominal,
                              const std::optional<PartitionOverride>& override_lists,
                              double threshold) {
  const std::size_t n = ratios.size();
  if (nominal.size() != n) {
    throw std::invalid_argument("partition: ratio and kind counts differ");
  }
  Partition out;
  if (override_lists) {
    std::vector<int> seen(n, 0);
    for (auto* list : {&override_lists->vitals, &override_lists->labs}) {
      for (std::size_t i : *list) {
        if (i >= n) throw std::invalid_argument("partition override: index out of range");
        if (seen[i]++) {
          throw std::invalid_argument("partition override lists overlap at variable " +
                                      std::to_string(i));
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!seen[i]) {
        throw std::invalid_argument("partition override does not cover variable " +
                                    std::to_string(i));
      }
    }
    out.vitals = override_lists->vitals;
    out.labs = override_lists->labs;
    std::sort(out.vitals.begin(), out.vitals.end());
    std::sort(out.labs.begin(), out.labs.end());
    return out;
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("partition threshold must lie in (0,1)");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (nominal[i] == VariableKind::kVital && ratios[i] <= threshold) {
      out.vitals.push_back(i);
    } else {
      out.labs.push_back(i);
    }
  }
  return out;
}

void Normalizer::fit(const std::vector<PatientRecord>& records,
                     const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw std::invalid_argument("Normalizer::fit: empty training set");
  const std::size_t p = records[indices.front()].num_variables;
  const std::size_t demo = records[indices.front()].demographics.size();
  NormalizationStats s;
  s.mean.assign(p, 0.0);
  s.stddev.assign(p, 0.0);
  s.constant.assign(p, 0);
  s.demo_mean.assign(demo, 0.0);
  s.demo_stddev.assign(demo, 0.0);
  std::vector<double> count(p, 0.0), demo_count(demo, 0.0);
  for (std::size_t i : indices) {
    const auto& r = records.at(i);
    for (std::size_t t = 0; t < r.num_steps; ++t)
      for (std::size_t v = 0; v < p; ++v)
        if (r.observed(t, v)) {
          s.mean[v] += r.value(t, v);
          count[v] += 1.0;
        }
    for (std::size_t k = 0; k < demo; ++k)
      if (!std::isnan(r.demographics[k])) {
        s.demo_mean[k] += r.demographics[k];
        demo_count[k] += 1.0;
      }
  }
  for (std::size_t v = 0; v < p; ++v) s.mean[v] = count[v] > 0 ? s.mean[v] / count[v] : 0.0;
  for (std::size_t k = 0; k < demo; ++k)
    s.demo_mean[k] = demo_count[k] > 0 ? s.demo_mean[k] / demo_count[k] : 0.0;
  for (std::size_t i : indices) {
    const auto& r = records[i];
    for (std::size_t t = 0; t < r.num_steps; ++t)
      for (std::size_t v = 0; v < p; ++v)
        if (r.observed(t, v)) {
          const double d = r.value(t, v) - s.mean[v];
          s.stddev[v] += d * d;
        }
    for (std::size_t k = 0; k < demo; ++k)
      if (!std::isnan(r.demographics[k])) {
        const double d = r.demographics[k] - s.demo_mean[k];
        s.demo_stddev[k] += d * d;
      }
  }
  for (std::size_t v = 0; v < p; ++v) {
    s.stddev[v] = count[v] > 0 ? std::sqrt(s.stddev[v] / count[v]) : 0.0;
    if (s.stddev[v] < 1e-12) s.constant[v] = 1;
  }
  for (std::size_t k = 0; k < demo; ++k)
    s.demo_stddev[k] = demo_count[k] > 0 ? std::sqrt(s.demo_stddev[k] / demo_count[k]) : 0.0;
  stats_ = std::move(s);
}

const NormalizationStats& Normalizer::stats() const {
  if (!stats_) throw std::logic_error("normalizer used before fit");
  return *stats_;
}

PatientRecord Normalizer::apply(const PatientRecord& record) const {
  const auto& s = stats();
  if (record.num_variables != s.mean.size() ||
      record.demographics.size() != s.demo_mean.size()) {
    throw std::invalid_argument("normalizer fitted for a different variable layout");
  }
  PatientRecord out = record;
  for (std::size_t t = 0; t < out.num_steps; ++t)
    for (std::size_t v = 0; v < out.num_variables; ++v) {
      if (!out.observed(t, v)) continue;
      double& x = out.values[t * out.num_variables + v];
      x = s.constant[v] ? 0.0 : (x - s.mean[v]) / s.stddev[v];
    }
  for (std::size_t k = 0; k < out.demographics.size(); ++k) {
    double& x = out.demographics[k];
    if (std::isnan(x)) {
      x = 0.0;
    } else {
      x = s.demo_stddev[k] < 1e-12 ? 0.0 : (x - s.demo_mean[k]) / s.demo_stddev[k];
    }
  }
  return out;
}

PatientRecord pad_left(const PatientRecord& record, std::size_t max_steps) {
  if (record.num_steps > max_steps) {
    throw std::invalid_argument("record " + record.id + " has " +
                                std::to_string(record.num_steps) + " steps, more than " +
                                std::to_string(max_steps));
  }
  const std::size_t pad = max_steps - record.num_steps;
  if (pad == 0) return record;
  const std::size_t p = record.num_variables;
  PatientRecord out = record;
  out.num_steps = max_steps;
  out.values.assign(pad * p, kMissing);
  out.values.insert(out.values.end(), record.values.begin(), record.values.end());
  out.mask.assign(pad * p, 0);
  out.mask.insert(out.mask.end(), record.mask.begin(), record.mask.end());
  out.padding.assign(pad, 1);
  out.padding.insert(out.padding.end(), record.padding.begin(), record.padding.end());
  return out;
}

PatientRecord truncate_front(const PatientRecord& record, std::size_t max_steps) {
  if (record.num_steps <= max_steps) return record;
  const std::size_t drop = record.num_steps - max_steps;
  const std::size_t p = record.num_variables;
  PatientRecord out = record;
  out.num_steps = max_steps;
  out.values.assign(record.values.begin() + static_cast<std::ptrdiff_t>(drop * p),
                    record.values.end());
  out.mask.assign(record.mask.begin() + static_cast<std::ptrdiff_t>(drop * p),
                  record.mask.end());
  out.padding.assign(record.padding.begin() + static_cast<std::ptrdiff_t>(drop),
                     record.padding.end());
  out.valid_length = std::min(record.valid_length, max_steps);
  return out;
}

Splits split_indices(std::size_t count, std::uint64_t seed, double train_fraction,
                     double validation_fraction) {
  if (train_fraction <= 0 || validation_fraction < 0 ||
      train_fraction + validation_fraction > 1) {
    throw std::invalid_argument("invalid split fractions");
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * count));
  const auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * count));
  Splits s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                      order.begin() + static_cast<std::ptrdiff_t>(std::min(count, n_train + n_val)));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(std::min(count, n_train + n_val)),
                order.end());
  for (auto* v : {&s.train, &s.validation, &s.test}) std::sort(v->begin(), v->end());
  return s;
}

namespace {

json record_to_json(const PatientRecord& r) {
  json rows = json::array();
  for (std::size_t t = 0; t < r.num_steps; ++t) {
    if (r.padding[t]) continue;
    json row = json::array();
    for (std::size_t p = 0; p < r.num_variables; ++p) {
      if (r.observed(t, p)) {
        row.push_back(r.value(t, p));
      } else {
        row.push_back(nullptr);
      }
    }
    rows.push_back(std::move(row));
  }
  json demo = json::array();
  for (double d : r.demographics) {
    if (std::isnan(d)) {
      demo.push_back(nullptr);
    } else {
      demo.push_back(d);
    }
  }
  return json{{"id", r.id}, {"label", r.label}, {"demographics", demo}, {"values", rows}};
}

PatientRecord record_from_json(const json& j, std::size_t num_variables,
                               const std::string& where) {
  try {
    std::vector<double> grid;
    for (const auto& row : j.at("values")) {
      if (row.size() != num_variables) {
        throw std::runtime_error("row has " + std::to_string(row.size()) +
                                 " values, expected " + std::to_string(num_variables));
      }
      for (const auto& v : row) grid.push_back(v.is_null() ? kMissing : v.get<double>());
    }
    std::vector<double> demo;
    for (const auto& v : j.at("demographics"))
      demo.push_back(v.is_null() ? kMissing : v.get<double>());
    return PatientRecord::from_grid(j.at("id").get<std::string>(), num_variables,
                                    std::move(grid), std::move(demo),
                                    j.at("label").get<int>());
  } catch (const json::exception& e) {
    throw std::runtime_error(where + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(where + ": " + e.what());
  }
}

json manifest_to_json(const DatasetManifest& m) {
  json vars = json::array();
  for (const auto& v : m.variables) {
    vars.push_back({{"name", v.name},
                    {"kind", v.nominal_kind == VariableKind::kVital ? "vital" : "lab"},
                    {"missing_ratio", v.missing_ratio}});
  }
  json out{{"variables", vars},
           {"demographics", m.demographic_names},
           {"partition", {{"vitals", m.partition.vitals}, {"labs", m.partition.labs}}},
           {"max_steps", m.max_steps},
           {"num_classes", m.num_classes},
           {"splits",
            {{"train", m.splits.train},
             {"validation", m.splits.validation},
             {"test", m.splits.test}}}};
  if (m.normalization) {
    const auto& s = *m.normalization;
    out["normalization"] = {{"mean", s.mean},           {"std", s.stddev},
                            {"constant", s.constant},   {"demo_mean", s.demo_mean},
                            {"demo_std", s.demo_stddev}};
  }
  return out;
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  for (const auto& v : j.at("variables")) {
    VariableInfo info;
    info.name = v.at("name").get<std::string>();
    info.nominal_kind = v.at("kind").get<std::string>() == "vital" ? VariableKind::kVital
                                                                   : VariableKind::kLab;
    info.missing_ratio = v.at("missing_ratio").get<double>();
    m.variables.push_back(info);
  }
  m.demographic_names = j.at("demographics").get<std::vector<std::string>>();
  m.partition.vitals = j.at("partition").at("vitals").get<std::vector<std::size_t>>();
  m.partition.labs = j.at("partition").at("labs").get<std::vector<std::size_t>>();
  m.max_steps = j.at("max_steps").get<std::size_t>();
  m.num_classes = j.at("num_classes").get<int>();
  const auto& s = j.at("splits");
  m.splits.train = s.at("train").get<std::vector<std::size_t>>();
  m.splits.validation = s.at("validation").get<std::vector<std::size_t>>();
  m.splits.test = s.at("test").get<std::vector<std::size_t>>();
  if (j.contains("normalization")) {
    const auto& n = j.at("normalization");
    NormalizationStats st;
    st.mean = n.at("mean").get<std::vector<double>>();
    st.stddev = n.at("std").get<std::vector<double>>();
    st.constant = n.at("constant").get<std::vector<std::uint8_t>>();
    st.demo_mean = n.at("demo_mean").get<std::vector<double>>();
    st.demo_stddev = n.at("demo_std").get<std::vector<double>>();
    m.normalization = std::move(st);
  }
  return m;
}

}  // namespace

void write_patients_jsonl(const std::vector<PatientRecord>& records, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

std::vector<PatientRecord> read_patients_jsonl(const fs::path& path,
                                               std::size_t num_variables) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<PatientRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
    records.push_back(record_from_json(j, num_variables, where));
  }
  return records;
}

void write_bundle(const Dataset& dataset, const fs::path& directory) {
  fs::create_directories(directory);
  write_patients_jsonl(dataset.records, directory / "patients.jsonl");
  std::ofstream out(directory / "manifest.json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest in " + directory.string());
  out << manifest_to_json(dataset.manifest).dump(2) << '\n';
}

Dataset read_bundle(const fs::path& directory) {
  std::ifstream in(directory / "manifest.json");
  if (!in) throw std::runtime_error("no manifest.json in " + directory.string());
  Dataset ds;
  try {
    ds.manifest = manifest_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error((directory / "manifest.json").string() + ": " + e.what());
  }
  ds.records = read_patients_jsonl(directory / "patients.jsonl",
                                   ds.manifest.num_variables());
  return ds;
}

}  // namespace vital
