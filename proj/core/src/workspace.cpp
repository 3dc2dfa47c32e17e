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

#include "quadmimic/workspace.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "quadmimic/datagen.hpp"

namespace quadmimic {

namespace {

struct VoxelKey {
  long x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelHash {
  size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ull;
    h ^= static_cast<std::uint64_t>(k.y) * 0xc2b2ae3d27d4eb4full + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667b19e3779f9ull + (h << 6) + (h >> 2);
    return static_cast<size_t>(h);
  }
};

using VoxelSet = std::unordered_set<VoxelKey, VoxelHash>;

VoxelKey voxel_of(const Vec3& p, double size) {
  return {static_cast<long>(std::floor(p.x() / size)), static_cast<long>(std::floor(p.y() / size)),
          static_cast<long>(std::floor(p.z() / size))};
}

std::vector<Vec3> centres(const VoxelSet& set, double size) {
  std::vector<Vec3> out;
  out.reserve(set.size());
  for (const auto& k : set) {
    out.emplace_back((static_cast<double>(k.x) + 0.5) * size, (static_cast<double>(k.y) + 0.5) * size,
                     (static_cast<double>(k.z) + 0.5) * size);
  }
  std::sort(out.begin(), out.end(), [](const Vec3& a, const Vec3& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  });
  return out;
}

bool stance_feasible(const QuadrupedModel& model, const Pose& stand, const FootArray& feet, const Quat& tilt) {
  Pose p = stand;
  p.root_orientation = tilt;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (leg == kManipulationLeg) continue;
    if (!solve_leg_ik(model, p, leg, feet[leg]).ok()) return false;
  }
  return true;
}

}  // namespace

WorkspaceResult compare_workspace(const QuadrupedModel& model, const WorkspaceOptions& o) {
  if (!(o.voxel > 0.0) || !(o.sample_spacing > 0.0) || o.tilt_samples < 1 || o.tilt_range < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid workspace options");
  }
  const Pose stand = canonical_pose(model, RobotState::kStand);
  const FootArray feet = canonical_feet(model, RobotState::kStand);
  const int leg = kManipulationLeg;

  // Dense joint sweep: angular steps small enough that neighbouring samples
  // land within sample_spacing of each other.
  const double reach = model.thigh_length + model.calf_length + model.abduction_offset;
  const double step = o.sample_spacing / reach;
  std::array<int, 3> counts{};
  for (int j = 0; j < 3; ++j) {
    const auto& lim = model.joint_limits[3 * leg + j];
    counts[j] = std::max(2, static_cast<int>(std::ceil((lim.hi - lim.lo) / step)) + 1);
  }
  VoxelSet fine;
  for (int a = 0; a < counts[0]; ++a) {
    for (int h = 0; h < counts[1]; ++h) {
      for (int k = 0; k < counts[2]; ++k) {
        const std::array<int, 3> idx{a, h, k};
        Vec3 q;
        for (int j = 0; j < 3; ++j) {
          const auto& lim = model.joint_limits[3 * leg + j];
          q[j] = lim.lo + (lim.hi - lim.lo) * idx[j] / (counts[j] - 1);
        }
        fine.insert(voxel_of(leg_foot_body<double>(model, leg, q), o.sample_spacing));
      }
    }
  }
  const std::vector<Vec3> samples = centres(fine, o.sample_spacing);

  VoxelSet fixed, tilting;
  for (const Vec3& p : samples) fixed.insert(voxel_of(p, o.voxel));

  WorkspaceResult r;
  const int n = o.tilt_range > 0.0 ? o.tilt_samples : 1;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        auto angle = [&](int t) { return n == 1 ? 0.0 : -o.tilt_range + 2.0 * o.tilt_range * t / (n - 1); };
        const Quat tilt = quat_from_rpy(angle(i), angle(j), angle(k));
        if (!stance_feasible(model, stand, feet, tilt)) continue;
        ++r.feasible_tilts;
        const Mat3 rot = tilt.toRotationMatrix();
        for (const Vec3& p : samples) tilting.insert(voxel_of(rot * p, o.voxel));
      }
    }
  }
  // The untilted trunk always belongs to the tilting set.
  for (const auto& key : fixed) tilting.insert(key);

  const double cell = o.voxel * o.voxel * o.voxel;
  r.fixed = centres(fixed, o.voxel);
  r.tilting = centres(tilting, o.voxel);
  r.fixed_volume = static_cast<double>(fixed.size()) * cell;
  r.tilting_volume = static_cast<double>(tilting.size()) * cell;
  r.ratio = static_cast<double>(tilting.size()) / static_cast<double>(fixed.size());
  return r;
}

}  // namespace quadmimic
