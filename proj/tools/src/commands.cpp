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

#include "quadmimic/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "quadmimic/cli/manifest.hpp"
#include "quadmimic/imitation.hpp"

namespace quadmimic::cli {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

void require_file(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::kFileNotFound, path.string());
}

std::string config_hash(const CommandContext& ctx) { return fnv1a_hex(ctx.config.canonical()); }

struct RunRecorder {
  RunManifest run;

  RunRecorder(const CommandContext& ctx, std::string command) {
    run.command = std::move(command);
    run.config_hash = config_hash(ctx);
    run.model_hash = ctx.model().hash();
    run.started = utc_timestamp();
  }

  void finish(const fs::path& dir) {
    run.finished = utc_timestamp();
    record_manifest(dir, run);
  }
};

TrainOptions train_options(const Config& cfg, const std::string& prefix) {
  TrainOptions o;
  o.max_steps = static_cast<int>(cfg.get_int(prefix + ".max_steps", o.max_steps));
  o.batch_size = static_cast<int>(cfg.get_int(prefix + ".batch_size", o.batch_size));
  o.learning_rate = cfg.get_double(prefix + ".learning_rate", o.learning_rate);
  o.eval_interval = static_cast<int>(cfg.get_int(prefix + ".eval_interval", o.eval_interval));
  o.patience = static_cast<int>(cfg.get_int(prefix + ".patience", o.patience));
  o.seed = static_cast<std::uint64_t>(cfg.get_int(prefix + ".seed", 1));
  o.weights.orientation = cfg.get_double("loss.orientation", o.weights.orientation);
  o.weights.joints = cfg.get_double("loss.joints", o.weights.joints);
  o.weights.velocity = cfg.get_double("loss.velocity", o.weights.velocity);
  o.weights.acceleration = cfg.get_double("loss.acceleration", o.weights.acceleration);
  return o;
}

std::vector<RobotState> states_in(const Dataset& ds, const Config& cfg, const std::string& key) {
  if (cfg.has(key)) {
    std::vector<RobotState> out;
    for (const auto& name : cfg.get_list(key)) out.push_back(state_from_name(name));
    return out;
  }
  std::set<RobotState> present;
  for (const auto& s : ds.samples) present.insert(s.state);
  return {present.begin(), present.end()};
}

std::vector<Task> tasks_of(RobotState state) {
  switch (state) {
    case RobotState::kStand: return {Task::kTiltAtStand, Task::kManipAtStand};
    case RobotState::kSit: return {Task::kTiltAtSit, Task::kManipAtSit};
    case RobotState::kWalk: return {Task::kWalkForward, Task::kTurnLeft, Task::kTurnRight};
  }
  return {};
}

}  // namespace

int CommandContext::worker_count() const {
  if (deterministic) return 1;
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

void CommandContext::info(const std::string& message) const {
  if (log) log(message);
}

void parallel_for(const CommandContext& ctx, int n, const std::function<void(int)>& fn) {
  const int workers = std::min(ctx.worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

GenDataResult cmd_gen_data(const CommandContext& ctx, const fs::path& out_dir) {
  const Config& cfg = ctx.config;
  RunRecorder rec(ctx, "gen-data");
  std::vector<TaskSpec> tasks;
  const double difficulty = cfg.get_double("data.difficulty", 1.0);
  if (cfg.has("data.tasks")) {
    for (const auto& name : cfg.get_list("data.tasks")) tasks.push_back({task_from_name(name), difficulty});
  } else {
    for (int t = 0; t <= static_cast<int>(Task::kTurnRight); ++t) tasks.push_back({static_cast<Task>(t), difficulty});
  }
  DatasetOptions opts;
  opts.clip_duration = cfg.get_double("data.clip_duration", opts.clip_duration);
  opts.style_seed = static_cast<std::uint64_t>(cfg.get_int("data.style_seed", static_cast<long long>(opts.style_seed)));
  opts.min_per_task = static_cast<int>(cfg.get_int("data.min_per_task", opts.min_per_task));
  opts.max_per_task = static_cast<int>(cfg.get_int("data.max_per_task", opts.max_per_task));
  opts.holdout_fraction = cfg.get_double("data.holdout_fraction", opts.holdout_fraction);
  const int clips = static_cast<int>(cfg.get_int("data.clips_per_task", 20));
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("data.seed", 1));

  GenDataResult result;
  result.dataset = build_dataset(ctx.model(), tasks, clips, seed, opts);
  for (const auto& t : tasks) {
    const auto n = std::count_if(result.dataset.samples.begin(), result.dataset.samples.end(),
                                 [&](const PairedSample& s) { return s.task.task == t.task; });
    result.samples_per_task.emplace_back(t.task, static_cast<int>(n));
    ctx.info(std::string(task_name(t.task)) + ": " + std::to_string(n) + " samples");
  }
  fs::create_directories(out_dir);
  save_dataset(out_dir / "dataset.jsonl", result.dataset);

  rec.run.seeds = {{"data", seed}, {"style", opts.style_seed}};
  rec.run.outputs = {"dataset.jsonl"};
  rec.finish(out_dir);
  return result;
}

std::vector<TrainReport> cmd_train_retarget(const CommandContext& ctx, const fs::path& dataset_path,
                                            const fs::path& out_dir) {
  require_file(dataset_path);
  RunRecorder rec(ctx, "train-retarget");
  const Dataset ds = load_dataset(dataset_path);
  const QuadrupedModel model = ctx.model();
  const auto states = states_in(ds, ctx.config, "retarget.states");
  const TrainOptions base = train_options(ctx.config, "retarget");

  std::vector<TrainReport> reports(states.size());
  std::vector<RetargetNet> nets(states.size());
  parallel_for(ctx, static_cast<int>(states.size()), [&](int i) {
    TrainOptions o = base;
    o.seed = derive_seed(base.seed, static_cast<std::uint64_t>(states[i]));
    nets[i] = train_retarget(ds, states[i], model, o, &reports[i]);
  });

  fs::create_directories(out_dir);
  auto csv = open_output(out_dir / "retarget_metrics.csv");
  csv << "state,step,train_loss,holdout_loss,orientation,joints,velocity,acceleration\n";
  for (size_t i = 0; i < states.size(); ++i) {
    save_retarget_net(retarget_file(out_dir, states[i]), nets[i], states[i]);
    rec.run.outputs.push_back(retarget_file({}, states[i]).string());
    rec.run.seeds[std::string("retarget.") + state_name(states[i])] =
        derive_seed(base.seed, static_cast<std::uint64_t>(states[i]));
    for (const auto& r : reports[i].history) {
      const MapLoss& c = r.holdout_components;
      csv << state_name(states[i]) << ',' << r.step << ',' << num(r.train_loss) << ',' << num(r.holdout_loss) << ','
          << num(c.orientation) << ',' << num(c.joints) << ',' << num(c.velocity) << ',' << num(c.acceleration) << '\n';
    }
    const RetargetEval ev = evaluate_retarget(nets[i], ds.select(states[i], true), model, base.weights);
    ctx.info(std::string(state_name(states[i])) + ": holdout L_map " + num(ev.loss.total) + " (untrained " +
             num(reports[i].initial_holdout) + "), joint MAE " + num(ev.joint_mae) + " rad");
  }
  const int k = static_cast<int>(ctx.config.get_int("retarget.knn_k", 5));
  KnnIndex::from_dataset(ds, k).save(index_file(out_dir));
  rec.run.outputs.push_back(index_file({}).string());
  rec.run.outputs.push_back("retarget_metrics.csv");
  rec.run.arguments = {{"dataset", dataset_path.string()}};
  rec.finish(out_dir);
  return reports;
}

std::vector<TrainReport> cmd_train_contact(const CommandContext& ctx, const fs::path& dataset_path,
                                           const fs::path& out_dir) {
  require_file(dataset_path);
  RunRecorder rec(ctx, "train-contact");
  const Dataset ds = load_dataset(dataset_path);
  const auto states = states_in(ds, ctx.config, "contact.states");
  const TrainOptions base = train_options(ctx.config, "contact");

  std::vector<TrainReport> reports(states.size());
  std::vector<ContactNet> nets(states.size());
  parallel_for(ctx, static_cast<int>(states.size()), [&](int i) {
    TrainOptions o = base;
    o.seed = derive_seed(base.seed, static_cast<std::uint64_t>(states[i]));
    nets[i] = train_contact(ds, states[i], o, &reports[i]);
  });

  fs::create_directories(out_dir);
  auto csv = open_output(out_dir / "contact_metrics.csv");
  csv << "state,step,train_loss,holdout_loss\n";
  for (size_t i = 0; i < states.size(); ++i) {
    save_contact_net(contact_file(out_dir, states[i]), nets[i], states[i]);
    rec.run.outputs.push_back(contact_file({}, states[i]).string());
    rec.run.seeds[std::string("contact.") + state_name(states[i])] =
        derive_seed(base.seed, static_cast<std::uint64_t>(states[i]));
    for (const auto& r : reports[i].history) {
      csv << state_name(states[i]) << ',' << r.step << ',' << num(r.train_loss) << ',' << num(r.holdout_loss) << '\n';
    }
    const ContactEval ev = evaluate_contact(nets[i], ds.select(states[i], true));
    ctx.info(std::string(state_name(states[i])) + ": holdout contact accuracy " + num(ev.accuracy));
  }
  rec.run.outputs.push_back("contact_metrics.csv");
  rec.run.arguments = {{"dataset", dataset_path.string()}};
  rec.finish(out_dir);
  return reports;
}

void cmd_gen_clip(const CommandContext& ctx, const GenClipOptions& o, const fs::path& out_dir) {
  RunRecorder rec(ctx, "gen-clip");
  const QuadrupedModel model = ctx.model();
  Rng rng(o.seed);
  const MotionClip reference = label_contacts(gen_task_motion(model, {o.task, o.difficulty}, o.duration, rng), model);
  const auto style_seed = static_cast<std::uint64_t>(ctx.config.get_int("data.style_seed", 7));
  const HumanClip human = gen_human_clip(model, reference, HumanStyle(style_seed), rng);
  fs::create_directories(out_dir);
  save_clip(out_dir / "reference.jsonl", reference);
  save_human_clip(out_dir / "human.jsonl", human);
  rec.run.seeds = {{"clip", o.seed}, {"style", style_seed}};
  rec.run.outputs = {"reference.jsonl", "human.jsonl"};
  rec.run.arguments = {{"task", task_name(o.task)}, {"difficulty", o.difficulty}, {"duration", o.duration}};
  rec.finish(out_dir);
}

nlohmann::json RetargetReport::to_json() const {
  return {{"frames", frames},
          {"max_joint_velocity", max_joint_velocity},
          {"max_joint_velocity_deg", rad2deg(max_joint_velocity)},
          {"velocity_limit", velocity_limit},
          {"velocity_violations", velocity_violations},
          {"foot_skate", foot_skate},
          {"fallback_frames", fallback_frames},
          {"state_switches", state_switches}};
}

RetargetReport cmd_retarget(const CommandContext& ctx, const fs::path& experts_dir, const fs::path& human_path,
                            const fs::path& out_clip, RobotState initial_state, const RetargetOptions& options) {
  require_file(human_path);
  RunRecorder rec(ctx, "retarget");
  const QuadrupedModel model = ctx.model();
  const ExpertSet experts = ExpertSet::load(experts_dir);
  const HumanClip human = load_human_clip(human_path);
  double frame_rate = ctx.config.get_double("retarget.frame_rate", 30.0);
  if (human.size() >= 2 && human[1].time > human[0].time) frame_rate = 1.0 / (human[1].time - human[0].time);

  const RetargetRun run = retarget_clip(experts, model, human, initial_state, frame_rate, options);
  RetargetReport report;
  report.frames = static_cast<int>(run.clip.size());
  report.max_joint_velocity = run.max_joint_velocity;
  report.velocity_limit = model.joint_velocity_limit;
  for (size_t i = 1; i < run.clip.size(); ++i) {
    const JointVector dq = run.clip.frames[i].pose.joints - run.clip.frames[i - 1].pose.joints;
    if (dq.cwiseAbs().maxCoeff() * frame_rate > model.joint_velocity_limit + 1e-9) ++report.velocity_violations;
  }
  report.foot_skate = foot_skate(model, run.clip, run.contact_probabilities);
  report.fallback_frames = run.fallback_frames;
  for (size_t i = 1; i < run.states.size(); ++i) report.state_switches += run.states[i] != run.states[i - 1];

  if (out_clip.has_parent_path()) fs::create_directories(out_clip.parent_path());
  save_clip(out_clip, run.clip);
  const fs::path report_path = fs::path(out_clip).replace_extension(".report.json");
  open_output(report_path) << report.to_json().dump(2) << '\n';

  const fs::path dir = out_clip.has_parent_path() ? out_clip.parent_path() : fs::path(".");
  rec.run.outputs = {out_clip.filename().string(), report_path.filename().string()};
  rec.run.arguments = {{"experts", experts_dir.string()},
                       {"human", human_path.string()},
                       {"initial_state", state_name(initial_state)},
                       {"contact_correction", options.contact_correction},
                       {"temporal_correction", options.temporal_correction}};
  rec.finish(dir);
  return report;
}

PolicyTrainOptions policy_train_options(const CommandContext& ctx, const TrainPolicyOptions& o) {
  const Config& cfg = ctx.config;
  PolicyTrainOptions p;
  PpoConfig& c = p.ppo;
  c.clip_range = cfg.get_double("ppo.clip_range", c.clip_range);
  c.learning_rate = cfg.get_double("ppo.learning_rate", c.learning_rate);
  c.gamma = cfg.get_double("ppo.gamma", c.gamma);
  c.gae_lambda = cfg.get_double("ppo.gae_lambda", c.gae_lambda);
  c.minibatch = static_cast<int>(cfg.get_int("ppo.minibatch", c.minibatch));
  c.max_grad_norm = cfg.get_double("ppo.max_grad_norm", c.max_grad_norm);
  c.epochs_per_iter = static_cast<int>(cfg.get_int("ppo.epochs_per_iter", c.epochs_per_iter));
  c.rollout_horizon = static_cast<int>(cfg.get_int("ppo.rollout_horizon", c.rollout_horizon));
  c.num_envs = static_cast<int>(cfg.get_int("ppo.num_envs", c.num_envs));
  c.hidden = static_cast<int>(cfg.get_int("ppo.hidden", c.hidden));
  c.log_std_init = cfg.get_double("ppo.log_std_init", c.log_std_init);
  c.action_scale = cfg.get_double("ppo.action_scale", c.action_scale);
  c.reference_offset = cfg.get_bool("ppo.reference_offset", c.reference_offset);
  c.validate();

  const RobotState state = state_from_name(cfg.get_string("policy.state", "stand"));
  CurriculumSchedule schedule = CurriculumSchedule::for_state(state);
  schedule.advance_threshold = cfg.get_double("curriculum.threshold", schedule.advance_threshold);
  schedule.patience = static_cast<int>(cfg.get_int("curriculum.patience", schedule.patience));
  if (!o.curriculum) schedule = schedule.final_only();
  if (!o.randomize) schedule = schedule.without_randomization();
  schedule.validate();
  p.schedule = schedule;
  p.randomize = o.randomize;
  p.total_steps = o.total_steps.value_or(cfg.get_int("policy.total_steps", p.total_steps));
  p.seed = o.seed.value_or(static_cast<std::uint64_t>(cfg.get_int("policy.seed", static_cast<long long>(p.seed))));
  p.reference_noise = cfg.get_double("policy.reference_noise", p.reference_noise);
  p.episode_duration = cfg.get_double("policy.episode_duration", p.episode_duration);
  p.env.max_duration = p.episode_duration;
  p.stop_reward = o.stop_reward;
  if (!p.stop_reward && cfg.has("policy.stop_reward")) p.stop_reward = cfg.get_double("policy.stop_reward", 0.0);
  return p;
}

PolicyTrainResult cmd_train_policy(const CommandContext& ctx, const TrainPolicyOptions& o, const fs::path& out_dir) {
  RunRecorder rec(ctx, "train-policy");
  PolicyTrainOptions p = policy_train_options(ctx, o);
  const int every = static_cast<int>(ctx.config.get_int("policy.log_every", 10));
  p.on_iteration = [&](const PolicyLogRow& row) {
    if (row.iteration % every == 0) {
      ctx.info("iteration " + std::to_string(row.iteration) + " steps " + std::to_string(row.steps) + " reward " +
               num(row.mean_reward) + " stage " + std::to_string(row.stage));
    }
  };
  PolicyTrainResult result = train_policy(ctx.model(), p);

  fs::create_directories(out_dir);
  save_checkpoint(out_dir / "policy.json", result.policy.to_checkpoint());
  Checkpoint value;
  value.net = result.value;
  value.metadata = {{"kind", "value_function"}};
  save_checkpoint(out_dir / "value.json", value);

  auto csv = open_output(out_dir / "training_log.csv");
  csv << "iteration,steps,stage,mean_reward,joint,end_effector,root_position,root_orientation,support,"
         "acceleration,policy_loss,value_loss,entropy,approx_kl,clip_fraction,grad_norm,log_std_mean,episodes\n";
  for (const auto& r : result.log) {
    const RewardComponents& c = r.components;
    const PpoStats& s = r.stats;
    csv << r.iteration << ',' << r.steps << ',' << r.stage << ',' << num(r.mean_reward) << ',' << num(c.joint) << ','
        << num(c.end_effector) << ',' << num(c.root_position) << ',' << num(c.root_orientation) << ','
        << num(c.support) << ',' << num(c.acceleration) << ',' << num(s.policy_loss) << ',' << num(s.value_loss)
        << ',' << num(s.entropy) << ',' << num(s.approx_kl) << ',' << num(s.clip_fraction) << ','
        << num(s.grad_norm) << ',' << num(r.log_std_mean) << ',' << r.episodes_finished << '\n';
  }
  auto episodes = open_output(out_dir / "episodes.jsonl");
  for (const auto& e : result.episodes) {
    const nlohmann::json j = {{"index", e.index}, {"task", task_name(e.task)}, {"difficulty", e.difficulty},
                              {"stage", e.stage}, {"seed", e.seed},           {"domain", e.domain.to_json()}};
    episodes << j.dump() << '\n';
  }

  rec.run.seeds = {{"policy", p.seed}};
  rec.run.outputs = {"policy.json", "value.json", "training_log.csv", "episodes.jsonl"};
  rec.run.arguments = {{"curriculum", o.curriculum},
                       {"randomize", o.randomize},
                       {"total_steps", p.total_steps},
                       {"ppo", p.ppo.to_json()}};
  rec.finish(out_dir);
  return result;
}

std::vector<AblationVariant> default_variants() {
  std::vector<AblationVariant> v(4);
  v[0].name = "full";
  v[1].name = "no_contact";
  v[1].options.contact_correction = false;
  v[2].name = "no_temporal";
  v[2].options.temporal_correction = false;
  v[3].name = "raw";
  v[3].options.contact_correction = false;
  v[3].options.temporal_correction = false;
  return v;
}

std::vector<AblationRow> cmd_ablate(const CommandContext& ctx, const fs::path& experts_dir, const AblateOptions& o,
                                    const fs::path& out_dir) {
  if (o.episodes < 1) throw Error(ErrorCode::kInvalidArgument, "ablation needs at least one episode");
  RunRecorder rec(ctx, "ablate");
  const QuadrupedModel model = ctx.model();
  const ExpertSet experts = ExpertSet::load(experts_dir);
  const HumanStyle style(static_cast<std::uint64_t>(ctx.config.get_int("data.style_seed", 7)));
  std::optional<GaussianPolicy> learned;
  if (o.policy) {
    require_file(*o.policy);
    learned = GaussianPolicy::from_checkpoint(load_checkpoint(*o.policy));
    learned->set_deterministic(true);
  }
  const auto variants = default_variants();
  EnvOptions env;
  env.max_duration = o.duration;

  std::vector<AblationRow> rows;
  for (const RobotState state : o.states) {
    const auto tasks = tasks_of(state);
    const auto s = static_cast<std::uint64_t>(state);
    std::vector<std::vector<EpisodeResult>> results(o.episodes);
    parallel_for(ctx, o.episodes, [&](int e) {
      Rng rng(derive_seed(o.seed, s, static_cast<std::uint64_t>(e)));
      const Task task = tasks[static_cast<size_t>(e) % tasks.size()];
      const MotionClip truth = gen_task_motion(model, {task, 1.0}, o.duration, rng);
      const HumanClip human = gen_human_clip(model, truth, style, rng);
      const DomainParams domain = sample_domain(o.dr_scale, rng);
      const std::uint64_t noise_seed = rng();
      const std::uint64_t episode_seed = rng();
      for (const auto& v : variants) {
        const RetargetRun run = retarget_clip(experts, model, human, state, truth.frame_rate, v.options);
        Rng noise(noise_seed);
        const MotionClip reference = inject_noise(run.clip, o.noise, noise);
        if (learned) {
          GaussianPolicy policy = *learned;
          results[e].push_back(run_episode(policy, reference, domain, model, episode_seed, env));
        } else {
          ReferencePolicy policy;
          results[e].push_back(run_episode(policy, reference, domain, model, episode_seed, env));
        }
      }
    });
    for (size_t v = 0; v < variants.size(); ++v) {
      AblationRow row;
      row.state = state;
      row.variant = variants[v].name;
      row.episodes = o.episodes;
      for (const auto& per_episode : results) {
        row.success_time_ratio += per_episode[v].success_time_ratio;
        row.mean_reward += per_episode[v].mean_reward;
        row.terminations += per_episode[v].termination.has_value();
      }
      row.success_time_ratio /= o.episodes;
      row.mean_reward /= o.episodes;
      ctx.info(std::string(state_name(state)) + " " + row.variant + ": success time ratio " +
               num(row.success_time_ratio));
      rows.push_back(row);
    }
  }

  auto csv = open_output(out_dir / "ablation.csv");
  csv << "state,variant,episodes,success_time_ratio,mean_reward,terminations\n";
  for (const auto& r : rows) {
    csv << state_name(r.state) << ',' << r.variant << ',' << r.episodes << ',' << num(r.success_time_ratio) << ','
        << num(r.mean_reward) << ',' << r.terminations << '\n';
  }
  rec.run.seeds = {{"ablation", o.seed}};
  rec.run.outputs = {"ablation.csv"};
  nlohmann::json states = nlohmann::json::array();
  for (const auto st : o.states) states.push_back(state_name(st));
  rec.run.arguments = {{"experts", experts_dir.string()}, {"episodes", o.episodes}, {"duration", o.duration},
                       {"noise", o.noise},   {"dr_scale", o.dr_scale}, {"states", states},
                       {"policy", o.policy ? o.policy->string() : std::string()}};
  rec.finish(out_dir);
  return rows;
}

WorkspaceResult cmd_workspace(const CommandContext& ctx, const WorkspaceOptions& options, const fs::path& out_dir) {
  RunRecorder rec(ctx, "workspace");
  const WorkspaceResult r = compare_workspace(ctx.model(), options);
  auto write_cloud = [&](const std::string& name, const std::vector<Vec3>& cloud) {
    auto out = open_output(out_dir / name);
    out << "x,y,z\n";
    for (const auto& p : cloud) out << num(p.x()) << ',' << num(p.y()) << ',' << num(p.z()) << '\n';
  };
  write_cloud("fixed_cloud.csv", r.fixed);
  write_cloud("tilting_cloud.csv", r.tilting);
  const nlohmann::json summary = {{"tilt_range_deg", rad2deg(options.tilt_range)},
                                  {"voxel", options.voxel},
                                  {"fixed_voxels", r.fixed.size()},
                                  {"tilting_voxels", r.tilting.size()},
                                  {"fixed_volume", r.fixed_volume},
                                  {"tilting_volume", r.tilting_volume},
                                  {"ratio", r.ratio},
                                  {"feasible_tilts", r.feasible_tilts}};
  open_output(out_dir / "workspace.json") << summary.dump(2) << '\n';
  ctx.info("workspace volume ratio " + num(r.ratio));
  rec.run.outputs = {"fixed_cloud.csv", "tilting_cloud.csv", "workspace.json"};
  rec.run.arguments = {{"tilt_range_deg", rad2deg(options.tilt_range)}, {"voxel", options.voxel}};
  rec.finish(out_dir);
  return r;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return kExitUsage;
    case ErrorCode::kNumericFailure: return kExitNumeric;
    default: return kExitData;
  }
}

}  // namespace quadmimic::cli
