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

#include "vital/parameter_store.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vital {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'V', 'I', 'T', 'L'};

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto view = bytes_.substr(pos_, n);
    pos_ += n;
    return view;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw std::runtime_error("checkpoint truncated at byte " +
                               std::to_string(pos_));
    }
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Tensor& ParameterStore::add(std::string name, Tensor tensor, bool frozen) {
  if (index_.count(name)) {
    throw std::invalid_argument("duplicate parameter name '" + name + "'");
  }
  tensor.set_requires_grad(!frozen);
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(tensor), frozen});
  return entries_.back().tensor;
}

std::size_t ParameterStore::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw std::out_of_range("unknown parameter '" + std::string(name) + "'");
  }
  return it->second;
}

bool ParameterStore::contains(std::string_view name) const {
  return index_.count(std::string(name)) > 0;
}

const Tensor& ParameterStore::get(std::string_view name) const {
  return entries_[index_of(name)].tensor;
}

Tensor& ParameterStore::get(std::string_view name) {
  return entries_[index_of(name)].tensor;
}

bool ParameterStore::is_frozen(std::string_view name) const {
  return entries_[index_of(name)].frozen;
}

void ParameterStore::set_frozen(std::string_view name, bool frozen) {
  auto& e = entries_[index_of(name)];
  e.frozen = frozen;
  e.tensor.set_requires_grad(!frozen);
}

std::size_t ParameterStore::trainable_elements() const {
  std::size_t n = 0;
  for (const auto& e : entries_)
    if (!e.frozen) n += e.tensor.size();
  return n;
}

ParameterStore ParameterStore::fork() const {
  ParameterStore out;
  out.entries_.reserve(entries_.size());
  for (const auto& e : entries_) {
    out.index_.emplace(e.name, out.entries_.size());
    out.entries_.push_back({e.name, e.frozen ? e.tensor : e.tensor.alias(),
                            e.frozen});
  }
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

std::string ParameterStore::serialize() const {
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& e : entries_) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    put<std::uint8_t>(out, e.frozen ? 1 : 0);
    const Shape& shape = e.tensor.shape();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) put<std::uint64_t>(out, d);
    const auto values = e.tensor.data();
    out.append(reinterpret_cast<const char*>(values.data()),
               values.size() * sizeof(double));
  }
  return out;
}

ParameterStore ParameterStore::deserialize(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(4) != std::string_view(kMagic, 4)) {
    throw std::runtime_error("not a checkpoint: bad magic bytes");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }
  const auto count = in.get<std::uint32_t>();
  ParameterStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = in.get<std::uint32_t>();
    std::string name(in.take(name_len));
    const bool frozen = in.get<std::uint8_t>() != 0;
    const auto rank = in.get<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(in.get<std::uint64_t>());
    std::vector<double> values(num_elements(shape));
    const auto raw = in.take(values.size() * sizeof(double));
    std::memcpy(values.data(), raw.data(), raw.size());
    store.add(std::move(name), Tensor::from(std::move(shape), std::move(values)),
              frozen);
  }
  if (!in.done()) throw std::runtime_error("trailing bytes after checkpoint");
  return store;
}

void ParameterStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::string bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ParameterStore ParameterStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

std::uint64_t ParameterStore::fingerprint(std::string_view prefix) const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& e : entries_) {
    if (!prefix.empty() && !std::string_view(e.name).starts_with(prefix)) continue;
    mix(e.name.data(), e.name.size());
    const unsigned char f = e.frozen ? 1 : 0;
    mix(&f, 1);
    for (std::size_t d : e.tensor.shape()) mix(&d, sizeof(d));
    const auto v = e.tensor.data();
    mix(v.data(), v.size() * sizeof(double));
  }
  return h;
}

void ParameterStore::copy_values_from(const ParameterStore& other) {
  for (auto& e : entries_) {
    if (!other.contains(e.name)) continue;
    const auto src = other.get(e.name).data();
    auto dst = e.tensor.mutable_data();
    if (src.size() != dst.size()) {
      throw ShapeError("copy_values_from: size mismatch for " + e.name);
    }
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

}  // namespace vital
