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

#include "mptrace/validation.hpp"

namespace mptrace
{

namespace
{

constexpr double kEndShrink = 1e-6;   // meters trimmed off both segment ends
constexpr double kGrazeTol = 1e-9;    // boundary inflation: grazing counts as blocked
constexpr double kParallelTol = 1e-12;

bool facet_blocks(const Facet &f, const Vec3 &a, const Vec3 &dir, double seg_len)
{
    if (!f.quadric)
    {
        const double denom = dir.dot(f.plane_normal());
        if (std::abs(denom) < kParallelTol)
            return false; // parallel or in-plane: no crossing
        const double t = (f.plane_offset() - a.dot(f.plane_normal())) / denom;
        if (t < 0.0 || t > seg_len)
            return false;
        return f.contains(a + t * dir, kGrazeTol);
    }

    // Quadric: substitute p = a + t*dir into the implicit and solve the
    // quadratic for crossings inside the segment.
    const Quadric &q = *f.quadric;
    const Vec3 g = q.gradient(a);
    const double c0 = q.value(a);
    const double c1 = g.dot(dir);
    // second-order coefficient: dir' A dir
    const double xx = q.coeff[0] * dir[0] * dir[0] + q.coeff[1] * dir[1] * dir[1] + q.coeff[2] * dir[2] * dir[2] +
                      q.coeff[3] * dir[0] * dir[1] + q.coeff[4] * dir[0] * dir[2] + q.coeff[5] * dir[1] * dir[2];
    double roots[2];
    int n_roots = 0;
    if (std::abs(xx) < 1e-15)
    {
        if (std::abs(c1) > 1e-15)
            roots[n_roots++] = -c0 / c1;
    }
    else
    {
        const double disc = c1 * c1 - 4.0 * xx * c0;
        if (disc >= 0.0)
        {
            const double sq = std::sqrt(disc);
            roots[n_roots++] = (-c1 - sq) / (2.0 * xx);
            roots[n_roots++] = (-c1 + sq) / (2.0 * xx);
        }
    }
    for (int i = 0; i < n_roots; ++i)
    {
        const double t = roots[i];
        if (t >= 0.0 && t <= seg_len && f.contains(a + t * dir, kGrazeTol))
            return true;
    }
    return false;
}

} // namespace

bool segment_obstructed(const Scene &scene, const Vec3 &a, const Vec3 &b, const FacetExclusions &exclude)
{
    const Vec3 d = b - a;
    const double len = d.norm();
    if (len <= 2.0 * kEndShrink)
        return false;
    const Vec3 dir = d / len;
    const Vec3 a2 = a + kEndShrink * dir;
    const double inner_len = len - 2.0 * kEndShrink;

    for (const Facet &f : scene.facets)
    {
        if (exclude.count(f.id))
            continue;
        if (facet_blocks(f, a2, dir, inner_len))
            return true;
    }
    return false;
}

RayPath validate_path(const Scene &scene, RayPath path)
{
    const int n = path.n_interactions();
    if (n < 0 || static_cast<int>(path.candidate.items.size()) != n)
    {
        path.status = PathStatus::RejectedDegenerate;
        return path;
    }

    for (std::size_t i = 0; i + 1 < path.points.size(); ++i)
    {
        if ((path.points[i + 1] - path.points[i]).norm() < kGeomTol)
        {
            path.status = PathStatus::RejectedDegenerate;
            return path;
        }
    }

    for (int k = 0; k < n; ++k)
    {
        const Vec3 &x = path.points[static_cast<std::size_t>(k + 1)];
        const ElementRef &el = path.candidate.items[static_cast<std::size_t>(k)];
        if (el.kind == Interaction::Reflection)
        {
            if (!scene.facets[static_cast<std::size_t>(el.id)].contains(x, kSolverTol))
            {
                path.status = PathStatus::RejectedContainment;
                return path;
            }
        }
        else
        {
            // Diffraction points must sit strictly inside the edge: the
            // endpoint itself (a corner) does not diffract like the edge.
            const Edge &e = scene.edges[static_cast<std::size_t>(el.id)];
            const double t = e.nearest_param(x);
            if (e.implicit(x) > kSolverTol || !(t > 0.0) || !(t < 1.0))
            {
                path.status = PathStatus::RejectedContainment;
                return path;
            }
        }
    }

    for (int seg = 0; seg <= n; ++seg)
    {
        FacetExclusions excl;
        auto add_element = [&](int k)
        {
            const ElementRef &el = path.candidate.items[static_cast<std::size_t>(k)];
            if (el.kind == Interaction::Reflection)
            {
                excl.insert(el.id);
            }
            else
            {
                const Edge &e = scene.edges[static_cast<std::size_t>(el.id)];
                excl.insert(e.parents[0]);
                excl.insert(e.parents[1]);
            }
        };
        if (seg >= 1)
            add_element(seg - 1);
        if (seg < n)
            add_element(seg);
        if (segment_obstructed(scene, path.points[static_cast<std::size_t>(seg)],
                               path.points[static_cast<std::size_t>(seg + 1)], excl))
        {
            path.status = PathStatus::RejectedObstruction;
            return path;
        }
    }

    path.status = PathStatus::Valid;
    return path;
}

} // namespace mptrace
