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

#include "mptrace/geometry.hpp"
#include "mptrace/interaction.hpp"

#include <string_view>

namespace mptrace
{

enum class PathStatus
{
    Unvalidated,
    Valid,
    RejectedContainment,
    RejectedObstruction,
    RejectedDegenerate
};

constexpr std::string_view to_string(PathStatus s)
{
    switch (s)
    {
    case PathStatus::Unvalidated:
        return "Unvalidated";
    case PathStatus::Valid:
        return "Valid";
    case PathStatus::RejectedContainment:
        return "RejectedContainment";
    case PathStatus::RejectedObstruction:
        return "RejectedObstruction";
    case PathStatus::RejectedDegenerate:
        return "RejectedDegenerate";
    }
    return "?";
}

/// A geometric ray path BS -> X_1 -> ... -> X_n -> UE with its candidate.
struct RayPath
{
    std::vector<Vec3> points; // includes BS first and UE last
    InteractionList candidate;
    double cost = 0.0;
    PathStatus status = PathStatus::Unvalidated;

    int n_interactions() const { return static_cast<int>(points.size()) - 2; }

    double total_length() const
    {
        double len = 0.0;
        for (std::size_t i = 0; i + 1 < points.size(); ++i)
            len += (points[i + 1] - points[i]).norm();
        return len;
    }
};

} // namespace mptrace
