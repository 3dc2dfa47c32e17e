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

#ifndef QUADMIMIC_CLI_MANIFEST_HPP_
#define QUADMIMIC_CLI_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace quadmimic::cli {

inline constexpr const char* kManifestFile = "manifest.json";

// One command's record inside an output directory's manifest.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::map<std::string, std::uint64_t> seeds;
  std::string model_hash;
  std::vector<std::string> outputs;  // relative to the manifest's directory
  nlohmann::json arguments = nlohmann::json::object();
  std::string started;  // UTC, ISO 8601
  std::string finished;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

std::string utc_timestamp();

// Each directory holds a single manifest.json listing one record per
// command; a rerun of the same command replaces its record.
void record_manifest(const std::filesystem::path& dir, const RunManifest& run);
std::vector<RunManifest> read_manifest(const std::filesystem::path& dir);

// Relative paths whose contents differ between two output directories, or
// that exist in only one of them. Manifest timestamps are ignored.
std::vector<std::string> compare_output_dirs(const std::filesystem::path& a, const std::filesystem::path& b);

}  // namespace quadmimic::cli

#endif  // QUADMIMIC_CLI_MANIFEST_HPP_
