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

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mptrace
{

struct SceneError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/**
 * Quadric surface f(p) = x'Ax + b'x + c with the ten coefficients ordered
 * [a_xx, a_yy, a_zz, a_xy, a_xz, a_yz, b_x, b_y, b_z, c].
 */
struct Quadric
{
    std::array<double, 10> coeff{};

    double value(const Vec3 &p) const
    {
        const double x = p[0], y = p[1], z = p[2];
        return coeff[0] * x * x + coeff[1] * y * y + coeff[2] * z * z + coeff[3] * x * y + coeff[4] * x * z +
               coeff[5] * y * z + coeff[6] * x + coeff[7] * y + coeff[8] * z + coeff[9];
    }

    Vec3 gradient(const Vec3 &p) const
    {
        const double x = p[0], y = p[1], z = p[2];
        return Vec3(2.0 * coeff[0] * x + coeff[3] * y + coeff[4] * z + coeff[6],
                    2.0 * coeff[1] * y + coeff[3] * x + coeff[5] * z + coeff[7],
                    2.0 * coeff[2] * z + coeff[4] * x + coeff[5] * y + coeff[8]);
    }
};

/**
 * @brief Reflecting scene element: a convex planar polygon, or a quadric patch.
 *
 * Planar facets carry a CCW vertex loop; the winding fixes the front side via
 * the right-hand rule. The implicit form is the signed plane distance and the
 * parameter map is the affine frame spanned by the first two edge vectors.
 * Quadric facets use the quadric value/gradient instead and have no parameter
 * map; their (optional) vertices only bound containment.
 */
class Facet
{
  public:
    int id = -1;
    std::vector<Vec3> vertices;
    std::string material = "PEC";
    std::optional<Quadric> quadric;

    static Facet from_vertices(int id, std::vector<Vec3> verts, std::string material = "PEC");
    static Facet from_quadric(int id, const std::array<double, 10> &coeff, std::vector<Vec3> verts = {},
                              std::string material = "PEC");

    bool planar() const { return !quadric.has_value(); }

    /// Signed plane distance (planar) or quadric value.
    double implicit(const Vec3 &p) const;
    Vec3 implicit_gradient(const Vec3 &p) const;

    /// Unit surface normal at p; throws if the gradient vanishes.
    Vec3 normal_at(const Vec3 &p) const;

    /// Affine map (s,t) -> origin + s*u + t*v; extrapolates smoothly. Planar only.
    Vec3 param_point(double s, double t) const;

    /// True iff p lies within tol of the bounded facet region.
    bool contains(const Vec3 &p, double tol) const;

    Vec3 centroid() const;
    Aabb aabb() const;
    double characteristic_length() const;

    // Planar cache, valid when planar() (also computed for quadrics with >= 3 vertices).
    const Vec3 &plane_normal() const { return normal_; }
    double plane_offset() const { return offset_; }
    const Vec3 &frame_origin() const { return origin_; }
    const Vec3 &frame_u() const { return u_; }
    const Vec3 &frame_v() const { return v_; }

  private:
    Vec3 normal_{0, 0, 1};
    double offset_ = 0.0;
    Vec3 origin_{0, 0, 0}, u_{1, 0, 0}, v_{0, 1, 0};

    void finalize_planar();
};

struct LineCurve
{
    Vec3 a{0, 0, 0}, b{1, 0, 0};
};

/// Circular arc: p(t) = center + radius*(cos(th)*e1 + sin(th)*e2), th = theta0 + t*sweep.
struct ArcCurve
{
    Vec3 center{0, 0, 0};
    Vec3 e1{1, 0, 0}, e2{0, 1, 0}; // orthonormal in-plane frame; axis = e1 x e2
    double radius = 1.0;
    double theta0 = 0.0;
    double sweep = 1.0;
};

/**
 * @brief Diffracting edge between two parent facets.
 *
 * Scene files only declare straight edges; arcs exist for programmatic
 * construction against curved geometry. The implicit form is the distance to
 * the supporting curve (infinite line / full circle), zero on the curve.
 */
class Edge
{
  public:
    int id = -1;
    std::array<int, 2> parents{-1, -1};
    double interior_angle = 1.5707963267948966; // wedge material angle, radians

    static Edge make_line(int id, const Vec3 &a, const Vec3 &b, std::array<int, 2> parents = {-1, -1});
    static Edge make_arc(int id, const ArcCurve &arc, std::array<int, 2> parents = {-1, -1});

    bool straight() const { return std::holds_alternative<LineCurve>(curve_); }

    Vec3 endpoint(int i) const;
    Vec3 param_point(double t) const;

    /// Unit tangent at the curve parameter nearest to p (constant for lines).
    Vec3 direction_at(const Vec3 &p) const;

    /// Distance from p to the supporting curve.
    double implicit(const Vec3 &p) const;

    /// True iff p lies within tol of the bounded edge (closed, inflated ends).
    bool contains(const Vec3 &p, double tol) const;

    /// Curve parameter of the point on the supporting curve nearest to p. Unclamped.
    double nearest_param(const Vec3 &p) const;

    double length() const;
    double characteristic_length() const;
    Aabb aabb() const;

    const LineCurve *line() const { return std::get_if<LineCurve>(&curve_); }
    const ArcCurve *arc() const { return std::get_if<ArcCurve>(&curve_); }

  private:
    std::variant<LineCurve, ArcCurve> curve_{};
};

struct Scene
{
    std::vector<Facet> facets;
    std::vector<Edge> edges;
    std::size_t n_explicit_edges = 0; // edges beyond this index were auto-derived
    Aabb aabb;

    int n_elements() const { return static_cast<int>(facets.size() + edges.size()); }
};

/// Parse and validate a scene, auto-deriving edges from facet pairs that share
/// exactly two vertices. Throws SceneError on malformed input.
Scene load_scene(const std::filesystem::path &path);
Scene scene_from_json_text(const std::string &text);

/// Append an edge for every facet pair sharing exactly two vertices, skipping
/// pairs already covered by an explicit edge; ids continue after the explicit
/// ones. For programmatically built scenes call this before finalize_scene.
void derive_edges(Scene &scene);

/// Validate ids, parent links, endpoint containment and materials, then
/// compute the scene bounds. Required after building a Scene by hand.
void finalize_scene(Scene &scene);

/// Canonical serialization: fixed key order, 17-significant-digit floats.
/// serialize(load(serialize(s))) is byte-identical to serialize(s).
std::string serialize_scene(const Scene &scene);

} // namespace mptrace
