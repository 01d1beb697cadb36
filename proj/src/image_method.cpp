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

#include "mptrace/image_method.hpp"

#include "mptrace/mpt.hpp"

namespace mptrace
{

Vec3 mirror_point(const Vec3 &p, const MirrorPlane &plane)
{
    return p - 2.0 * (p - plane.point).dot(plane.normal) * plane.normal;
}

std::vector<Vec3> build_image_chain(const Vec3 &bs, std::span<const MirrorPlane> planes)
{
    std::vector<Vec3> images;
    images.reserve(planes.size() + 1);
    images.push_back(bs);
    for (const MirrorPlane &pl : planes)
        images.push_back(mirror_point(images.back(), pl));
    return images;
}

std::optional<std::vector<Vec3>> backward_intersections(std::span<const Vec3> images,
                                                        std::span<const MirrorPlane> planes, const Vec3 &ue)
{
    const std::size_t n = planes.size();
    std::vector<Vec3> points(n);
    Vec3 behind = ue; // X_{k+1}, starts at the UE
    for (std::size_t k = n; k-- > 0;)
    {
        const MirrorPlane &pl = planes[k];
        const Vec3 &image = images[k + 1]; // I_k (images[0] is the BS)
        const Vec3 seg = behind - image;
        const double denom = seg.dot(pl.normal);
        if (std::abs(denom) <= 1e-12)
            return std::nullopt;
        const double ratio = (pl.point - behind).dot(pl.normal) / denom;
        points[k] = behind + ratio * seg;
        behind = points[k];
    }
    return points;
}

ImageResult trace_image_path(const Scene &scene, const Vec3 &bs, const Vec3 &ue, const InteractionList &candidate)
{
    ImageResult result;

    std::vector<MirrorPlane> planes;
    planes.reserve(candidate.items.size());
    for (const ElementRef &el : candidate.items)
    {
        if (el.kind != Interaction::Reflection)
            return result; // IM cannot handle diffraction
        const Facet &f = scene.facets[static_cast<std::size_t>(el.id)];
        if (!f.planar())
            return result; // IM needs planes
        planes.push_back({f.plane_normal(), f.frame_origin()});
    }

    const auto images = build_image_chain(bs, planes);
    const auto points = backward_intersections(images, planes, ue);
    if (!points)
    {
        result.status = ImageStatus::Unsolvable;
        return result;
    }

    result.status = ImageStatus::Solved;
    result.path.candidate = candidate;
    result.path.points.reserve(points->size() + 2);
    result.path.points.push_back(bs);
    for (const Vec3 &p : *points)
        result.path.points.push_back(p);
    result.path.points.push_back(ue);
    result.path.status = PathStatus::Unvalidated;
    result.path.cost = path_cost(scene, bs, ue, candidate, *points);
    return result;
}

} // namespace mptrace
