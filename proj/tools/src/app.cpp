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

#include <iostream>

#include "CLI11.hpp"
#include "quadmimic/cli/commands.hpp"

namespace quadmimic::cli {

namespace {

RobotState parse_state(const std::string& name) { return state_from_name(name); }

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Human to quadruped motion retargeting and imitation toolkit", "quadmimic"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool deterministic = false;
  bool quiet = false;
  int workers = 0;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--set", overrides, "override a config entry, key=value");
  app.add_flag("--deterministic", deterministic, "single worker, fixed ordering");
  app.add_option("--workers", workers, "worker threads (0: one per core)")->check(CLI::NonNegativeNumber);
  app.add_flag("-q,--quiet", quiet, "suppress progress output");

  std::string out, dataset, experts, human, state = "stand", policy;

  auto* gen_data = app.add_subcommand("gen-data", "build a paired human/robot dataset");
  gen_data->add_option("--out", out, "output directory")->required();

  auto* train_retarget_cmd = app.add_subcommand("train-retarget", "train the per-state retargeting networks");
  train_retarget_cmd->add_option("--dataset", dataset, "dataset.jsonl")->required();
  train_retarget_cmd->add_option("--out", out, "expert bundle directory")->required();

  auto* train_contact_cmd = app.add_subcommand("train-contact", "train the per-state contact networks");
  train_contact_cmd->add_option("--dataset", dataset, "dataset.jsonl")->required();
  train_contact_cmd->add_option("--out", out, "expert bundle directory")->required();

  GenClipOptions clip;
  std::string task = "tilt_at_stand";
  auto* gen_clip = app.add_subcommand("gen-clip", "generate a labelled robot clip and its human counterpart");
  gen_clip->add_option("--task", task, "task name");
  gen_clip->add_option("--difficulty", clip.difficulty)->check(CLI::Range(0.0, 1.0));
  gen_clip->add_option("--duration", clip.duration, "seconds")->check(CLI::PositiveNumber);
  gen_clip->add_option("--seed", clip.seed);
  gen_clip->add_option("--out", out, "output directory")->required();

  RetargetOptions retarget_options;
  bool no_contact = false, no_temporal = false;
  auto* retarget_cmd = app.add_subcommand("retarget", "retarget a human clip onto the robot");
  retarget_cmd->add_option("--experts", experts, "expert bundle directory")->required();
  retarget_cmd->add_option("--human", human, "human clip (JSON lines)")->required();
  retarget_cmd->add_option("--out", out, "output motion clip (JSON lines)")->required();
  retarget_cmd->add_option("--state", state, "initial robot state");
  retarget_cmd->add_flag("--no-contact-correction", no_contact);
  retarget_cmd->add_flag("--no-temporal-correction", no_temporal);
  retarget_cmd->add_flag("--clip-before-pin", retarget_options.clip_before_pin);

  TrainPolicyOptions train;
  bool no_curriculum = false, no_dr = false;
  long steps = 0;
  std::uint64_t seed = 0;
  auto* train_policy_cmd = app.add_subcommand("train-policy", "train an imitation policy with PPO");
  train_policy_cmd->add_option("--out", out, "output directory")->required();
  train_policy_cmd->add_flag("--no-curriculum", no_curriculum, "train on the final stage only");
  train_policy_cmd->add_flag("--no-dr", no_dr, "nominal dynamics in every episode");
  auto* steps_opt = train_policy_cmd->add_option("--steps", steps, "environment steps")->check(CLI::PositiveNumber);
  auto* seed_opt = train_policy_cmd->add_option("--seed", seed);

  AblateOptions ablate;
  std::vector<std::string> states;
  auto* ablate_cmd = app.add_subcommand("ablate", "success time ratio of the retargeting variants");
  ablate_cmd->add_option("--experts", experts, "expert bundle directory")->required();
  ablate_cmd->add_option("--out", out, "output directory")->required();
  ablate_cmd->add_option("--episodes", ablate.episodes)->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--duration", ablate.duration, "seconds")->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--noise", ablate.noise, "reference noise std, rad")->check(CLI::NonNegativeNumber);
  ablate_cmd->add_option("--dr-scale", ablate.dr_scale)->check(CLI::Range(0.0, 1.0));
  ablate_cmd->add_option("--states", states, "robot states")->delimiter(',');
  ablate_cmd->add_option("--seed", ablate.seed);
  ablate_cmd->add_option("--policy", policy, "policy checkpoint; the tracking controller when omitted");

  WorkspaceOptions workspace;
  double tilt_deg = 40.0;
  auto* workspace_cmd = app.add_subcommand("workspace", "front-right foot reachable volume, fixed vs tilting trunk");
  workspace_cmd->add_option("--out", out, "output directory")->required();
  workspace_cmd->add_option("--tilt-range", tilt_deg, "degrees about each axis")->check(CLI::Range(0.0, 90.0));
  workspace_cmd->add_option("--voxel", workspace.voxel, "voxel edge, m")->check(CLI::PositiveNumber);
  workspace_cmd->add_option("--tilt-samples", workspace.tilt_samples, "per axis")->check(CLI::PositiveNumber);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    CommandContext ctx;
    if (!config_path.empty()) ctx.config = Config::load(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "--set expects key=value: " + kv);
      ctx.config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    ctx.deterministic = deterministic;
    ctx.workers = workers;
    if (!quiet) ctx.log = [](const std::string& m) { std::cerr << m << '\n'; };

    if (*gen_data) {
      cmd_gen_data(ctx, out);
    } else if (*train_retarget_cmd) {
      cmd_train_retarget(ctx, dataset, out);
    } else if (*train_contact_cmd) {
      cmd_train_contact(ctx, dataset, out);
    } else if (*gen_clip) {
      clip.task = task_from_name(task);
      cmd_gen_clip(ctx, clip, out);
    } else if (*retarget_cmd) {
      retarget_options.contact_correction = !no_contact;
      retarget_options.temporal_correction = !no_temporal;
      const RetargetReport r = cmd_retarget(ctx, experts, human, out, parse_state(state), retarget_options);
      std::cout << r.to_json().dump(2) << '\n';
    } else if (*train_policy_cmd) {
      train.curriculum = !no_curriculum;
      train.randomize = !no_dr;
      if (*steps_opt) train.total_steps = steps;
      if (*seed_opt) train.seed = seed;
      cmd_train_policy(ctx, train, out);
    } else if (*ablate_cmd) {
      if (!states.empty()) {
        ablate.states.clear();
        for (const auto& s : states) ablate.states.push_back(parse_state(s));
      }
      if (!policy.empty()) ablate.policy = policy;
      for (const auto& row : cmd_ablate(ctx, experts, ablate, out)) {
        std::cout << state_name(row.state) << ' ' << row.variant << ' ' << row.success_time_ratio << '\n';
      }
    } else if (*workspace_cmd) {
      workspace.tilt_range = deg2rad(tilt_deg);
      const WorkspaceResult r = cmd_workspace(ctx, workspace, out);
      std::cout << "ratio " << r.ratio << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace quadmimic::cli
