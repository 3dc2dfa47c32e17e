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

#ifndef QUADMIMIC_WORKSPACE_HPP_
#define QUADMIMIC_WORKSPACE_HPP_

#include <vector>

#include "quadmimic/kinematics.hpp"

namespace quadmimic {

struct WorkspaceOptions {
  double tilt_range = deg2rad(40.0);  // about every trunk axis
  int tilt_samples = 9;               // per axis, spanning [-range, range]
  double voxel = 0.01;                // m
  double sample_spacing = 0.005;      // m, target spacing of the swept foot samples
};

struct WorkspaceResult {
  std::vector<Vec3> fixed;    // occupied voxel centres, trunk frame at the stand pose
  std::vector<Vec3> tilting;
  double fixed_volume = 0.0;  // m^3
  double tilting_volume = 0.0;
  double ratio = 1.0;
  int feasible_tilts = 0;
};

// Reachable set of the front-right foot with the trunk fixed at the stand
// pose versus the trunk tilting about its centre. A tilt counts only when the
// other three feet can still reach their stance positions. Volumes are
// voxel counts.
WorkspaceResult compare_workspace(const QuadrupedModel& model, const WorkspaceOptions& options = {});

}  // namespace quadmimic

#endif  // QUADMIMIC_WORKSPACE_HPP_
