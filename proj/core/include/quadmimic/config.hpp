// Copyright 2026 The quadmimic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QUADMIMIC_CONFIG_HPP_
#define QUADMIMIC_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace quadmimic {

// Flat `key = value` configuration. Lines starting with '#' are comments.
// Keys are dotted paths (e.g. `model.thigh_length`); values are kept as text
// and converted on access.
class Config {
 public:
  Config() = default;

  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;

  // Entries sharing `prefix.`, with the prefix stripped.
  Config subtree(const std::string& prefix) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

  // Canonical text form: sorted `key = value` lines.
  std::string canonical() const;

 private:
  std::map<std::string, std::string> values_;
};

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace quadmimic

#endif  // QUADMIMIC_CONFIG_HPP_
