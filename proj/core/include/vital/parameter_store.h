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

#ifndef VITAL_PARAMETER_STORE_H_
#define VITAL_PARAMETER_STORE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vital/tensor.h"

namespace vital {

struct ParameterEntry {
  std::string name;
  Tensor tensor;
  bool frozen = false;
};

// Named model parameters in insertion order. Frozen entries never require a
// gradient and are never touched by an optimizer.
class ParameterStore {
 public:
  Tensor& add(std::string name, Tensor tensor, bool frozen);
  bool contains(std::string_view name) const;
  const Tensor& get(std::string_view name) const;
  Tensor& get(std::string_view name);
  bool is_frozen(std::string_view name) const;
  void set_frozen(std::string_view name, bool frozen);

  const std::vector<ParameterEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t trainable_elements() const;

  // Store whose trainable leaves alias this store's values but collect their
  // own gradients. Used to run independent samples on separate tapes.
  ParameterStore fork() const;
  void zero_grad();

  // Checkpoint encoding: "VITL", u32 version, u32 entry count, then per entry
  // u32 name length, name bytes, u8 frozen, u32 rank, u64 dims, f64 payload.
  // All integers and floats little-endian.
  std::string serialize() const;
  static ParameterStore deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static ParameterStore load(const std::filesystem::path& path);

  // FNV-1a over names, flags, shapes and raw value bytes of the selected
  // entries. Entries are selected by name prefix when one is given.
  std::uint64_t fingerprint(std::string_view prefix = {}) const;

  // Copies values (not flags) from other for all entries present in both.
  void copy_values_from(const ParameterStore& other);

 private:
  std::size_t index_of(std::string_view name) const;
  std::vector<ParameterEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace vital

#endif  // VITAL_PARAMETER_STORE_H_
