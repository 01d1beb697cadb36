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

#include <array>

#include "mptrace/scene.hpp"

namespace mptrace
{

/**
 * Two-mirror bench: a mirror along y = x from (0,0) to (3.5,3.5) and a mirror
 * on x = 5 from y = 0.5 to y = 4, both extruded to z in [-5, 5]. The standard
 * terminals are bs = (2,-1,0) and ue = (2,4,0); the two-reflection path off
 * mirror 0 then mirror 1 has exact interaction points (20/7, 20/7, 0) and
 * (5, 10/3, 0).
 */
Scene make_two_mirror_scene();

inline Vec3 two_mirror_bs() { return {2.0, -1.0, 0.0}; }
inline Vec3 two_mirror_ue() { return {2.0, 4.0, 0.0}; }

/**
 * Three-building skyline, uniform in y. Buildings of the given widths are
 * centered at x = 0, 15, 27 with rooftops at 20, 10, 40 m; the transmitter
 * sits above the first rooftop at (0, 0, 22) and the receiver in the street
 * below at (8, 0, 2), with line of sight blocked by the first building.
 *
 * By default each building is modelled by its rooftop only: a zero-thickness
 * horizontal strip whose west and east boundaries are knife edges. Leaving
 * out the street-level facades keeps every route that would end in a
 * reflection toward the receiver empty, so diffraction is the only mechanism
 * that turns rays down into the street, while the rooftops still host the
 * bounces feeding reflection-then-diffraction routes. The middle building is
 * narrower than its neighbours: its roof must screen the tall building's
 * west corner from the receiver (or a bounce off the first rooftop would
 * reach the street with a single diffraction) yet still catch the bounce
 * that links the tall rooftop to the first one.
 *
 * The routes that bounce once and diffract twice interfere: both run through
 * the tall building's corners, and that building's width sets their relative
 * phase. The default of 14.4 m keeps the pair adding constructively; widths
 * a few decimetres away drop the class into a cancellation notch.
 *
 * A positive slab_thickness expands each rooftop into a slab (roof, soffit,
 * and two fascia strips) with four right-angle corner edges. facades = true
 * instead drops the side walls to street level, which adds strong facade
 * bounces into the receiver street; facade footprints must stay at most
 * 12 m wide or adjacent footprints would meet.
 */
struct UrbanParams
{
    std::array<double, 3> widths{15.0, 10.0, 14.4}; // footprint extents along x
    double depth = 200.0;        // extrusion along y, centered on y = 0
    double slab_thickness = 0.0; // rooftop slab height; zero keeps thin screens
    bool facades = false;        // carry the side walls down to street level
    bool ground = false;         // include a street-level reflecting plane
    double ground_margin = 50.0; // ground overhang beyond the outer walls
};

Scene make_urban_scene(const UrbanParams &params = {});

inline Vec3 urban_bs() { return {0.0, 0.0, 22.0}; }
inline Vec3 urban_ue() { return {8.0, 0.0, 2.0}; }

} // namespace mptrace
