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

#ifndef QUADMIMIC_CURRICULUM_HPP_
#define QUADMIMIC_CURRICULUM_HPP_

#include <vector>

#include <nlohmann/json.hpp>

#include "quadmimic/datagen.hpp"

namespace quadmimic {

struct CurriculumStage {
  std::vector<Task> tasks;
  double difficulty = 1.0;  // cap on the task difficulty
  double dr_scale = 1.0;    // domain randomization range scale

  nlohmann::json to_json() const;
};

// Stages are ordered with the task set as the primary key (each set contains
// the previous one) and difficulty as the secondary key; randomization
// scales never decrease.
struct CurriculumSchedule {
  std::vector<CurriculumStage> stages;
  double advance_threshold = 0.6;
  int patience = 20;  // consecutive iterations above the threshold

  void validate() const;

  static CurriculumSchedule for_state(RobotState state);
  // The final stage alone, as used by curriculum-free training.
  CurriculumSchedule final_only() const;
  // Same stages with randomization disabled.
  CurriculumSchedule without_randomization() const;
};

struct CurriculumProgress {
  int stage = 0;
  int streak = 0;
};

// Advances one stage after `patience` consecutive updates whose performance
// exceeds the threshold. Never regresses. Returns the stage index.
int curriculum_update(const CurriculumSchedule& schedule, CurriculumProgress& progress, double performance);

}  // namespace quadmimic

#endif  // QUADMIMIC_CURRICULUM_HPP_
