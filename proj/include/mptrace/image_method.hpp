// SPDX-License-Identifier: Apache-2.0
//
// mptrace - image-based ray tracing for radio propagation with diffraction-aware path search
// Copyright (C) 2026 mptrace contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "mptrace/ray_path.hpp"
#include "mptrace/scene.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace mptrace
{

/// Infinite mirror plane: unit normal and a point on the plane.
struct MirrorPlane
{
    Vec3 normal{0, 0, 1};
    Vec3 point{0, 0, 0};
};

/// Reflect p across the plane.
Vec3 mirror_point(const Vec3 &p, const MirrorPlane &plane);

/// Forward pass: I_0 = bs, I_k = mirror of I_{k-1} across plane k.
std::vector<Vec3> build_image_chain(const Vec3 &bs, std::span<const MirrorPlane> planes);

/**
 * Backward pass: starting from the UE, intersect the segment toward each image
 * with its mirror plane, last plane first. Returns the interaction points in
 * forward order, or nullopt when a segment runs parallel to its plane
 * (denominator within 1e-12).
 */
std::optional<std::vector<Vec3>> backward_intersections(std::span<const Vec3> images,
                                                        std::span<const MirrorPlane> planes, const Vec3 &ue);

enum class ImageStatus
{
    Solved,
    Unsolvable,   // parallel backward segment
    NotApplicable // candidate has diffractions or non-planar facets
};

struct ImageResult
{
    ImageStatus status = ImageStatus::NotApplicable;
    RayPath path; // meaningful when status == Solved (status field Unvalidated)
};

/**
 * Solve a reflection-only candidate on planar facets exactly. The path's cost
 * is evaluated with the minimization-based residual so both solvers score
 * paths identically.
 */
ImageResult trace_image_path(const Scene &scene, const Vec3 &bs, const Vec3 &ue, const InteractionList &candidate);

} // namespace mptrace
