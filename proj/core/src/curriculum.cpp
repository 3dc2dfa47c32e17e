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

#include "quadmimic/curriculum.hpp"

#include <algorithm>

namespace quadmimic {

nlohmann::json CurriculumStage::to_json() const {
  nlohmann::json names = nlohmann::json::array();
  for (Task t : tasks) names.push_back(task_name(t));
  return {{"tasks", names}, {"difficulty", difficulty}, {"dr_scale", dr_scale}};
}

namespace {

bool contains_all(const std::vector<Task>& super, const std::vector<Task>& sub) {
  return std::all_of(sub.begin(), sub.end(),
                     [&](Task t) { return std::find(super.begin(), super.end(), t) != super.end(); });
}

}  // namespace

void CurriculumSchedule::validate() const {
  if (stages.empty()) throw Error(ErrorCode::kInvalidArgument, "curriculum has no stages");
  if (patience < 1) throw Error(ErrorCode::kInvalidArgument, "curriculum patience must be >= 1");
  for (size_t i = 0; i < stages.size(); ++i) {
    const auto& s = stages[i];
    if (s.tasks.empty()) throw Error(ErrorCode::kEmptyTasks, "curriculum stage without tasks");
    if (!(s.difficulty > 0.0 && s.difficulty <= 1.0) || !(s.dr_scale >= 0.0 && s.dr_scale <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "stage difficulty must be in (0, 1] and scale in [0, 1]");
    }
    if (i == 0) continue;
    const auto& p = stages[i - 1];
    if (!contains_all(s.tasks, p.tasks)) {
      throw Error(ErrorCode::kInvalidArgument, "curriculum task sets must grow monotonically");
    }
    const bool same_tasks = s.tasks.size() == p.tasks.size();
    if (same_tasks && s.difficulty < p.difficulty) {
      throw Error(ErrorCode::kInvalidArgument, "difficulty must not decrease within a task set");
    }
    if (s.dr_scale < p.dr_scale) {
      throw Error(ErrorCode::kInvalidArgument, "randomization scale must not decrease");
    }
  }
}

CurriculumSchedule CurriculumSchedule::for_state(RobotState state) {
  Task first = Task::kTiltAtStand, second = Task::kManipAtStand;
  if (state == RobotState::kSit) {
    first = Task::kTiltAtSit;
    second = Task::kManipAtSit;
  } else if (state == RobotState::kWalk) {
    first = Task::kWalkForward;
    second = Task::kTurnLeft;
  }
  std::vector<Task> both = {first, second};
  if (state == RobotState::kWalk) both.push_back(Task::kTurnRight);
  CurriculumSchedule c;
  c.stages = {
      {{first}, 0.25, 0.0}, {{first}, 0.5, 0.25}, {{first}, 1.0, 0.5}, {both, 0.5, 0.75}, {both, 1.0, 1.0},
  };
  return c;
}

CurriculumSchedule CurriculumSchedule::final_only() const {
  CurriculumSchedule c = *this;
  c.stages = {stages.back()};
  return c;
}

CurriculumSchedule CurriculumSchedule::without_randomization() const {
  CurriculumSchedule c = *this;
  for (auto& s : c.stages) s.dr_scale = 0.0;
  return c;
}

int curriculum_update(const CurriculumSchedule& schedule, CurriculumProgress& progress, double performance) {
  const int last = static_cast<int>(schedule.stages.size()) - 1;
  if (progress.stage >= last) {
    progress.stage = last;
    return progress.stage;
  }
  progress.streak = performance > schedule.advance_threshold ? progress.streak + 1 : 0;
  if (progress.streak >= schedule.patience) {
    ++progress.stage;
    progress.streak = 0;
  }
  return progress.stage;
}

}  // namespace quadmimic
