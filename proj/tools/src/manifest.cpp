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

#include "quadmimic/cli/manifest.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iterator>
#include <set>

#include "quadmimic/common.hpp"

namespace quadmimic::cli {

nlohmann::json RunManifest::to_json() const {
  return {{"command", command}, {"config_hash", config_hash}, {"seeds", seeds},
          {"model_hash", model_hash}, {"outputs", outputs},   {"arguments", arguments},
          {"started", started},   {"finished", finished}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
    m.model_hash = j.at("model_hash").get<std::string>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.arguments = j.value("arguments", nlohmann::json::object());
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("manifest: ") + e.what());
  }
  return m;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<RunManifest> read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / kManifestFile;
  if (!std::filesystem::exists(path)) return {};
  std::ifstream in(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": " + e.what());
  }
  std::vector<RunManifest> runs;
  for (const auto& r : doc.value("runs", nlohmann::json::array())) runs.push_back(RunManifest::from_json(r));
  return runs;
}

void record_manifest(const std::filesystem::path& dir, const RunManifest& run) {
  std::filesystem::create_directories(dir);
  auto runs = read_manifest(dir);
  std::erase_if(runs, [&](const RunManifest& r) { return r.command == run.command; });
  runs.push_back(run);
  std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.command < b.command; });
  nlohmann::json doc = {{"kind", "quadmimic-manifest"}, {"runs", nlohmann::json::array()}};
  for (const auto& r : runs) doc["runs"].push_back(r.to_json());
  std::ofstream out(dir / kManifestFile);
  if (!out) throw Error(ErrorCode::kIo, "cannot write manifest in " + dir.string());
  out << doc.dump(2) << '\n';
}

namespace {

std::set<std::string> relative_files(const std::filesystem::path& root) {
  std::set<std::string> out;
  if (!std::filesystem::exists(root)) return out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.insert(std::filesystem::relative(e.path(), root).generic_string());
  }
  return out;
}

std::string file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json manifest_without_timestamps(const std::filesystem::path& dir) {
  nlohmann::json runs = nlohmann::json::array();
  for (auto run : read_manifest(dir)) {
    run.started.clear();
    run.finished.clear();
    runs.push_back(run.to_json());
  }
  return runs;
}

}  // namespace

std::vector<std::string> compare_output_dirs(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::set<std::string> names = relative_files(a);
  names.merge(relative_files(b));
  std::vector<std::string> differing;
  for (const auto& name : names) {
    const auto pa = a / name, pb = b / name;
    if (!std::filesystem::exists(pa) || !std::filesystem::exists(pb)) {
      differing.push_back(name);
      continue;
    }
    bool same;
    if (pa.filename() == kManifestFile) {
      same = manifest_without_timestamps(pa.parent_path()) == manifest_without_timestamps(pb.parent_path());
    } else {
      same = file_bytes(pa) == file_bytes(pb);
    }
    if (!same) differing.push_back(name);
  }
  return differing;
}

}  // namespace quadmimic::cli
