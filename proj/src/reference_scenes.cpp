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

#include "mptrace/reference_scenes.hpp"

namespace mptrace
{

Scene make_two_mirror_scene()
{
    Scene scene;
    // Diagonal mirror, normal toward the x > y half-space where the
    // terminals sit.
    scene.facets.push_back(Facet::from_vertices(0,
                                                {Vec3(0.0, 0.0, -5.0), Vec3(3.5, 3.5, -5.0),
                                                 Vec3(3.5, 3.5, 5.0), Vec3(0.0, 0.0, 5.0)}));
    // Vertical mirror on x = 5, normal toward -x.
    scene.facets.push_back(Facet::from_vertices(1,
                                                {Vec3(5.0, 0.5, -5.0), Vec3(5.0, 0.5, 5.0),
                                                 Vec3(5.0, 4.0, 5.0), Vec3(5.0, 4.0, -5.0)}));
    derive_edges(scene);
    finalize_scene(scene);
    return scene;
}

namespace
{

void add_roof_screen(Scene &scene, double center, double half_width, double height, double half_depth)
{
    const double xw = center - half_width;
    const double xe = center + half_width;
    const int roof = static_cast<int>(scene.facets.size());
    // Roof strip, outward normal +z.
    scene.facets.push_back(Facet::from_vertices(roof,
                                                {Vec3(xw, -half_depth, height), Vec3(xe, -half_depth, height),
                                                 Vec3(xe, half_depth, height), Vec3(xw, half_depth, height)}));
    // Knife edges along the strip boundaries: both wedge faces coincide with
    // the strip, so the interior angle is zero.
    for (double x : {xw, xe})
    {
        Edge e = Edge::make_line(static_cast<int>(scene.edges.size()), Vec3(x, -half_depth, height),
                                 Vec3(x, half_depth, height), {roof, roof});
        e.interior_angle = 0.0;
        scene.edges.push_back(std::move(e));
    }
}

void add_building(Scene &scene, double center, double half_width, double height, double half_depth,
                  double base_z)
{
    const double xw = center - half_width;
    const double xe = center + half_width;
    const int base = static_cast<int>(scene.facets.size());
    // Roof, outward normal +z.
    scene.facets.push_back(Facet::from_vertices(base,
                                                {Vec3(xw, -half_depth, height), Vec3(xe, -half_depth, height),
                                                 Vec3(xe, half_depth, height), Vec3(xw, half_depth, height)}));
    if (base_z > 0.0)
    {
        // Soffit, outward normal -z; shares its corners with the side strips.
        scene.facets.push_back(Facet::from_vertices(base + 1,
                                                    {Vec3(xw, -half_depth, base_z), Vec3(xw, half_depth, base_z),
                                                     Vec3(xe, half_depth, base_z), Vec3(xe, -half_depth, base_z)}));
    }
    // West side, outward normal -x; shares its top corners with the roof.
    scene.facets.push_back(Facet::from_vertices(static_cast<int>(scene.facets.size()),
                                                {Vec3(xw, -half_depth, base_z), Vec3(xw, -half_depth, height),
                                                 Vec3(xw, half_depth, height), Vec3(xw, half_depth, base_z)}));
    // East side, outward normal +x.
    scene.facets.push_back(Facet::from_vertices(static_cast<int>(scene.facets.size()),
                                                {Vec3(xe, -half_depth, base_z), Vec3(xe, half_depth, base_z),
                                                 Vec3(xe, half_depth, height), Vec3(xe, -half_depth, height)}));
}

} // namespace

Scene make_urban_scene(const UrbanParams &params)
{
    Scene scene;
    const double hd = params.depth / 2.0;
    const double centers[3] = {0.0, 15.0, 27.0};
    const double heights[3] = {20.0, 10.0, 40.0};
    for (int i = 0; i < 3; ++i)
    {
        const double hw = params.widths[static_cast<std::size_t>(i)] / 2.0;
        if (!params.facades && params.slab_thickness <= 0.0)
        {
            add_roof_screen(scene, centers[i], hw, heights[i], hd);
            continue;
        }
        const double base_z = params.facades ? 0.0 : heights[i] - params.slab_thickness;
        add_building(scene, centers[i], hw, heights[i], hd, base_z);
    }
    if (params.ground)
    {
        const double x0 = centers[0] - params.widths[0] / 2.0 - params.ground_margin;
        const double x1 = centers[2] + params.widths[2] / 2.0 + params.ground_margin;
        const int id = static_cast<int>(scene.facets.size());
        // Street level, normal +z; shares no vertices with the walls so it
        // derives no edges.
        scene.facets.push_back(Facet::from_vertices(id,
                                                    {Vec3(x0, -hd, 0.0), Vec3(x1, -hd, 0.0),
                                                     Vec3(x1, hd, 0.0), Vec3(x0, hd, 0.0)}));
    }
    scene.n_explicit_edges = scene.edges.size();
    derive_edges(scene);
    finalize_scene(scene);
    return scene;
}

} // namespace mptrace
