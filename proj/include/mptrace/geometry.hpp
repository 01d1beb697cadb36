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

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>

namespace mptrace
{

using Vec3 = Eigen::Vector3d;

// Construction-time geometric tolerance (meters).
inline constexpr double kGeomTol = 1e-9;

// Solver-facing containment tolerance (meters).
inline constexpr double kSolverTol = 1e-6;

struct Aabb
{
    Vec3 lo{Vec3::Constant(std::numeric_limits<double>::infinity())};
    Vec3 hi{Vec3::Constant(-std::numeric_limits<double>::infinity())};

    void expand(const Vec3 &p)
    {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }

    void expand(const Aabb &other)
    {
        lo = lo.cwiseMin(other.lo);
        hi = hi.cwiseMax(other.hi);
    }

    bool valid() const { return (lo.array() <= hi.array()).all(); }

    double diagonal() const { return valid() ? (hi - lo).norm() : 0.0; }

    bool contains(const Vec3 &p, double tol) const
    {
        return valid() && (p.array() >= lo.array() - tol).all() && (p.array() <= hi.array() + tol).all();
    }
};

// Unit vector orthogonal to n, chosen deterministically (smallest |component| axis).
inline Vec3 any_orthonormal(const Vec3 &n)
{
    int k = 0;
    if (std::abs(n[1]) < std::abs(n[k]))
        k = 1;
    if (std::abs(n[2]) < std::abs(n[k]))
        k = 2;
    Vec3 axis = Vec3::Zero();
    axis[k] = 1.0;
    return n.cross(axis).normalized();
}

// SplitMix64; used to derive independent per-candidate RNG streams from one seed.
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace mptrace
