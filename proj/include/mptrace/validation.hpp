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

#include <set>

namespace mptrace
{

/// Facet ids a blocking query must ignore (elements a segment starts/ends on).
using FacetExclusions = std::set<int>;

/**
 * True iff the open segment (a,b) is blocked by any non-excluded facet.
 * Both ends are shrunk by 1e-6 m so interaction points sitting exactly on
 * their own element never self-block; intersections within 1e-9 m of a facet
 * boundary count as blocked (grazing hits are obstructions, not misses).
 */
bool segment_obstructed(const Scene &scene, const Vec3 &a, const Vec3 &b, const FacetExclusions &exclude = {});

/**
 * Classify a candidate path. Checks run in order: degeneracy (consecutive
 * points closer than 1e-9 m), containment of each interaction point in its
 * element (1e-6 m; diffraction points must fall strictly inside the open edge
 * parameter interval), then per-segment obstruction. Each segment's endpoint
 * elements are excluded from its blocking query, as are both parent facets of
 * a diffracting edge for the segments incident to it.
 */
RayPath validate_path(const Scene &scene, RayPath path);

} // namespace mptrace
