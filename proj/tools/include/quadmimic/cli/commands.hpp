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

#ifndef QUADMIMIC_CLI_COMMANDS_HPP_
#define QUADMIMIC_CLI_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "quadmimic/config.hpp"
#include "quadmimic/datagen.hpp"
#include "quadmimic/ppo.hpp"
#include "quadmimic/retarget.hpp"
#include "quadmimic/workspace.hpp"

namespace quadmimic::cli {

namespace fs = std::filesystem;

// Settings shared by every command. Config keys are documented in the README.
struct CommandContext {
  Config config;
  bool deterministic = false;
  int workers = 0;  // 0: hardware concurrency; forced to 1 when deterministic
  std::function<void(const std::string&)> log;

  QuadrupedModel model() const { return QuadrupedModel::from_config(config); }
  int worker_count() const;
  void info(const std::string& message) const;
};

// Runs fn(0..n-1) over the context's workers. Results must be written by
// index so the outcome does not depend on scheduling.
void parallel_for(const CommandContext& ctx, int n, const std::function<void(int)>& fn);

struct GenDataResult {
  Dataset dataset;
  std::vector<std::pair<Task, int>> samples_per_task;
};

// Writes dataset.jsonl.
GenDataResult cmd_gen_data(const CommandContext& ctx, const fs::path& out_dir);

// Writes the per-state retarget networks, knn.bin and retarget_metrics.csv
// into an expert bundle directory.
std::vector<TrainReport> cmd_train_retarget(const CommandContext& ctx, const fs::path& dataset,
                                            const fs::path& out_dir);
// Writes the per-state contact networks and contact_metrics.csv.
std::vector<TrainReport> cmd_train_contact(const CommandContext& ctx, const fs::path& dataset,
                                           const fs::path& out_dir);

struct GenClipOptions {
  Task task = Task::kTiltAtStand;
  double difficulty = 1.0;
  double duration = 10.0;
  std::uint64_t seed = 1;
};

// Writes reference.jsonl (labelled robot clip) and human.jsonl.
void cmd_gen_clip(const CommandContext& ctx, const GenClipOptions& options, const fs::path& out_dir);

struct RetargetReport {
  int frames = 0;
  double max_joint_velocity = 0.0;  // rad/s
  double velocity_limit = 0.0;
  int velocity_violations = 0;
  double foot_skate = 0.0;  // m per frame, against the predicted contacts
  int fallback_frames = 0;
  int state_switches = 0;

  nlohmann::json to_json() const;
};

RetargetReport cmd_retarget(const CommandContext& ctx, const fs::path& experts, const fs::path& human,
                            const fs::path& out_clip, RobotState initial_state,
                            const RetargetOptions& options);

struct TrainPolicyOptions {
  bool curriculum = true;
  bool randomize = true;
  std::optional<long> total_steps;  // overrides policy.total_steps
  std::optional<std::uint64_t> seed;
  std::optional<double> stop_reward;
};

PolicyTrainOptions policy_train_options(const CommandContext& ctx, const TrainPolicyOptions& options);

// Writes policy.json, value.json, training_log.csv and episodes.jsonl.
PolicyTrainResult cmd_train_policy(const CommandContext& ctx, const TrainPolicyOptions& options,
                                   const fs::path& out_dir);

// Retargeting pipeline variants compared by the ablation.
struct AblationVariant {
  std::string name;
  RetargetOptions options;
};
std::vector<AblationVariant> default_variants();

struct AblateOptions {
  int episodes = 128;
  double duration = 10.0;
  double noise = 0.03;  // rad
  double dr_scale = 1.0;
  std::vector<RobotState> states = {RobotState::kStand, RobotState::kSit, RobotState::kWalk};
  std::uint64_t seed = 1;
  std::optional<fs::path> policy;  // tracking controller when absent
};

struct AblationRow {
  RobotState state = RobotState::kStand;
  std::string variant;
  int episodes = 0;
  double success_time_ratio = 0.0;
  double mean_reward = 0.0;
  int terminations = 0;
};

// Writes ablation.csv with one row per state and variant.
std::vector<AblationRow> cmd_ablate(const CommandContext& ctx, const fs::path& experts,
                                    const AblateOptions& options, const fs::path& out_dir);

// Writes fixed_cloud.csv, tilting_cloud.csv and workspace.json.
WorkspaceResult cmd_workspace(const CommandContext& ctx, const WorkspaceOptions& options,
                              const fs::path& out_dir);

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

int exit_code_for(ErrorCode code);

// Full command-line entry point; argv[0] is the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace quadmimic::cli

#endif  // QUADMIMIC_CLI_COMMANDS_HPP_
