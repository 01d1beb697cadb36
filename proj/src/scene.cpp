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

#include "mptrace/scene.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace mptrace
{

// --- Facet ---------------------------------------------------------------

Facet Facet::from_vertices(int id, std::vector<Vec3> verts, std::string material)
{
    Facet f;
    f.id = id;
    f.vertices = std::move(verts);
    f.material = std::move(material);

    if (f.vertices.size() < 3)
        throw SceneError("facet " + std::to_string(id) + ": needs at least 3 vertices");
    f.finalize_planar();

    // Coplanarity and convexity of the CCW loop.
    for (const Vec3 &v : f.vertices)
        if (std::abs(v.dot(f.normal_) - f.offset_) > kGeomTol)
            throw SceneError("facet " + std::to_string(id) + ": vertices not coplanar");
    const std::size_t m = f.vertices.size();
    for (std::size_t i = 0; i < m; ++i)
    {
        const Vec3 &a = f.vertices[i];
        const Vec3 &b = f.vertices[(i + 1) % m];
        const Vec3 &c = f.vertices[(i + 2) % m];
        if ((b - a).norm() < kGeomTol)
            throw SceneError("facet " + std::to_string(id) + ": repeated vertex");
        if ((b - a).cross(c - b).dot(f.normal_) < -kGeomTol)
            throw SceneError("facet " + std::to_string(id) + ": vertex loop not convex/CCW");
    }
    return f;
}

Facet Facet::from_quadric(int id, const std::array<double, 10> &coeff, std::vector<Vec3> verts, std::string material)
{
    Facet f;
    f.id = id;
    f.vertices = std::move(verts);
    f.material = std::move(material);
    f.quadric = Quadric{coeff};
    if (f.vertices.size() >= 3)
        f.finalize_planar(); // frame only used for sampling heuristics
    return f;
}

void Facet::finalize_planar()
{
    // Newell's method; robust for any simple polygon.
    Vec3 n = Vec3::Zero();
    const std::size_t m = vertices.size();
    for (std::size_t i = 0; i < m; ++i)
    {
        const Vec3 &a = vertices[i];
        const Vec3 &b = vertices[(i + 1) % m];
        n += a.cross(b);
    }
    const double len = n.norm();
    if (len < 1e-12)
        throw SceneError("facet " + std::to_string(id) + ": degenerate (zero area)");
    normal_ = n / len;

    double off = 0.0;
    for (const Vec3 &v : vertices)
        off += v.dot(normal_);
    offset_ = off / static_cast<double>(m);

    origin_ = vertices[0];
    u_ = vertices[1] - vertices[0];
    v_ = vertices[m - 1] - vertices[0];
}

double Facet::implicit(const Vec3 &p) const
{
    if (quadric)
        return quadric->value(p);
    return p.dot(normal_) - offset_;
}

Vec3 Facet::implicit_gradient(const Vec3 &p) const
{
    if (quadric)
        return quadric->gradient(p);
    return normal_;
}

Vec3 Facet::normal_at(const Vec3 &p) const
{
    const Vec3 g = implicit_gradient(p);
    const double len = g.norm();
    if (len < 1e-12)
        throw std::domain_error("facet normal undefined: zero implicit gradient");
    return g / len;
}

Vec3 Facet::param_point(double s, double t) const
{
    if (quadric)
        throw std::logic_error("quadric facets have no parameter map");
    return origin_ + s * u_ + t * v_;
}

bool Facet::contains(const Vec3 &p, double tol) const
{
    if (quadric)
    {
        // Proximity to the surface via a first-order distance estimate, bounded
        // by the vertex AABB when one was declared.
        const double g = implicit_gradient(p).norm();
        if (std::abs(implicit(p)) > tol * std::max(1.0, g))
            return false;
        if (vertices.size() >= 3)
            return aabb().contains(p, tol);
        return true;
    }
    if (std::abs(p.dot(normal_) - offset_) > tol)
        return false;
    const std::size_t m = vertices.size();
    for (std::size_t i = 0; i < m; ++i)
    {
        const Vec3 &a = vertices[i];
        const Vec3 edge = vertices[(i + 1) % m] - a;
        const Vec3 inward = normal_.cross(edge).normalized();
        if ((p - a).dot(inward) < -tol)
            return false;
    }
    return true;
}

Vec3 Facet::centroid() const
{
    Vec3 c = Vec3::Zero();
    if (vertices.empty())
        return c;
    for (const Vec3 &v : vertices)
        c += v;
    return c / static_cast<double>(vertices.size());
}

Aabb Facet::aabb() const
{
    Aabb box;
    for (const Vec3 &v : vertices)
        box.expand(v);
    return box;
}

double Facet::characteristic_length() const
{
    const double d = aabb().diagonal();
    return d > 0.0 ? d : 1.0; // vertex-less quadrics fall back to unit scale
}

// --- Edge ----------------------------------------------------------------

Edge Edge::make_line(int id, const Vec3 &a, const Vec3 &b, std::array<int, 2> parents)
{
    if ((b - a).norm() < kGeomTol)
        throw SceneError("edge " + std::to_string(id) + ": endpoints coincide");
    Edge e;
    e.id = id;
    e.parents = parents;
    e.curve_ = LineCurve{a, b};
    return e;
}

Edge Edge::make_arc(int id, const ArcCurve &arc, std::array<int, 2> parents)
{
    if (arc.radius < kGeomTol || std::abs(arc.sweep) < 1e-12)
        throw SceneError("edge " + std::to_string(id) + ": degenerate arc");
    Edge e;
    e.id = id;
    e.parents = parents;
    e.curve_ = arc;
    return e;
}

Vec3 Edge::endpoint(int i) const { return param_point(i == 0 ? 0.0 : 1.0); }

Vec3 Edge::param_point(double t) const
{
    if (const LineCurve *l = line())
        return l->a + t * (l->b - l->a);
    const ArcCurve &a = *arc();
    const double th = a.theta0 + t * a.sweep;
    return a.center + a.radius * (std::cos(th) * a.e1 + std::sin(th) * a.e2);
}

double Edge::nearest_param(const Vec3 &p) const
{
    if (const LineCurve *l = line())
    {
        const Vec3 d = l->b - l->a;
        return (p - l->a).dot(d) / d.squaredNorm();
    }
    const ArcCurve &a = *arc();
    const Vec3 r = p - a.center;
    const double th = std::atan2(r.dot(a.e2), r.dot(a.e1));
    // Unwrap onto the branch nearest the arc's parameter interval midpoint.
    const double mid = a.theta0 + 0.5 * a.sweep;
    double best = th;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    while (best < mid - std::numbers::pi)
        best += two_pi;
    while (best > mid + std::numbers::pi)
        best -= two_pi;
    return (best - a.theta0) / a.sweep;
}

Vec3 Edge::direction_at(const Vec3 &p) const
{
    if (const LineCurve *l = line())
        return (l->b - l->a).normalized();
    const ArcCurve &a = *arc();
    const double th = a.theta0 + nearest_param(p) * a.sweep;
    const Vec3 tangent = -std::sin(th) * a.e1 + std::cos(th) * a.e2;
    return (a.sweep >= 0.0 ? tangent : Vec3(-tangent)).normalized();
}

double Edge::implicit(const Vec3 &p) const
{
    if (const LineCurve *l = line())
    {
        const Vec3 d = (l->b - l->a).normalized();
        return (p - l->a).cross(d).norm();
    }
    const ArcCurve &a = *arc();
    const Vec3 r = p - a.center;
    const Vec3 axis = a.e1.cross(a.e2);
    const double h = r.dot(axis);
    const double rho = (r - h * axis).norm();
    return std::hypot(h, rho - a.radius);
}

bool Edge::contains(const Vec3 &p, double tol) const
{
    if (implicit(p) > tol)
        return false;
    const double len = length();
    const double t = nearest_param(p);
    return t >= -tol / len && t <= 1.0 + tol / len;
}

double Edge::length() const
{
    if (const LineCurve *l = line())
        return (l->b - l->a).norm();
    const ArcCurve &a = *arc();
    return a.radius * std::abs(a.sweep);
}

double Edge::characteristic_length() const { return aabb().diagonal(); }

Aabb Edge::aabb() const
{
    Aabb box;
    box.expand(endpoint(0));
    box.expand(endpoint(1));
    if (arc())
        box.expand(param_point(0.5));
    return box;
}

// --- Scene construction --------------------------------------------------

namespace
{

Vec3 parse_vec3(const nlohmann::json &j, const char *what)
{
    if (!j.is_array() || j.size() != 3)
        throw SceneError(std::string(what) + ": expected [x,y,z]");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

// Wedge material angle from the parent-facet dihedral. Convex wedges (each
// facet centroid behind the other's plane) get pi - angle(n0,n1); a box corner
// therefore gets pi/2 and a UTD wedge parameter of 1.5.
double dihedral_interior_angle(const Facet &f0, const Facet &f1, const Vec3 &edge_mid)
{
    const Vec3 n0 = f0.quadric ? f0.normal_at(edge_mid) : f0.plane_normal();
    const Vec3 n1 = f1.quadric ? f1.normal_at(edge_mid) : f1.plane_normal();
    const double angle = std::atan2(n0.cross(n1).norm(), n0.dot(n1));
    const double s0 = (f0.centroid() - edge_mid).dot(n1);
    const double s1 = (f1.centroid() - edge_mid).dot(n0);
    if (s0 > kGeomTol && s1 > kGeomTol)
        return std::numbers::pi + angle; // reflex wedge
    return std::numbers::pi - angle;
}

void check_contiguous_ids(const std::vector<int> &ids, const char *what)
{
    std::vector<int> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        if (sorted[i] != static_cast<int>(i))
            throw SceneError(std::string(what) + " ids must be unique and contiguous from 0");
}

} // namespace

void derive_edges(Scene &scene)
{
    struct Pair
    {
        int f0, f1;
        Vec3 a, b;
    };
    std::vector<Pair> pairs;
    const int nf = static_cast<int>(scene.facets.size());
    for (int i = 0; i < nf; ++i)
    {
        for (int j = i + 1; j < nf; ++j)
        {
            std::vector<Vec3> shared;
            for (const Vec3 &va : scene.facets[i].vertices)
                for (const Vec3 &vb : scene.facets[j].vertices)
                    if ((va - vb).norm() <= kGeomTol)
                    {
                        bool dup = false;
                        for (const Vec3 &s : shared)
                            dup = dup || (s - va).norm() <= kGeomTol;
                        if (!dup)
                            shared.push_back(va);
                    }
            if (shared.size() == 2)
                pairs.push_back({i, j, shared[0], shared[1]});
        }
    }
    // already ordered by (min parent, max parent) due to the loop nest
    for (const Pair &p : pairs)
    {
        bool covered = false;
        for (std::size_t k = 0; k < scene.n_explicit_edges; ++k)
        {
            const auto par = scene.edges[k].parents;
            covered = covered || (std::min(par[0], par[1]) == p.f0 && std::max(par[0], par[1]) == p.f1);
        }
        if (covered)
            continue;
        Vec3 a = p.a, b = p.b;
        if (std::lexicographical_compare(b.data(), b.data() + 3, a.data(), a.data() + 3))
            std::swap(a, b); // deterministic endpoint order
        const double angle =
            dihedral_interior_angle(scene.facets[p.f0], scene.facets[p.f1], 0.5 * (a + b));
        // A vanishing or full material angle is a surface contact (touching
        // solids, closed seam), not a wedge; no edge exists there.
        if (angle <= kGeomTol || angle >= 2.0 * std::numbers::pi - kGeomTol)
            continue;
        Edge e = Edge::make_line(static_cast<int>(scene.edges.size()), a, b, {p.f0, p.f1});
        e.interior_angle = angle;
        scene.edges.push_back(std::move(e));
    }
}

void finalize_scene(Scene &scene)
{
    std::vector<int> fids, eids;
    for (const Facet &f : scene.facets)
        fids.push_back(f.id);
    for (const Edge &e : scene.edges)
        eids.push_back(e.id);
    check_contiguous_ids(fids, "facet");
    std::sort(scene.facets.begin(), scene.facets.end(), [](const Facet &a, const Facet &b) { return a.id < b.id; });
    check_contiguous_ids(eids, "edge");
    std::sort(scene.edges.begin(), scene.edges.end(), [](const Edge &a, const Edge &b) { return a.id < b.id; });

    for (const Edge &e : scene.edges)
    {
        for (int pid : e.parents)
        {
            if (pid < 0 || pid >= static_cast<int>(scene.facets.size()))
                throw SceneError("edge " + std::to_string(e.id) + ": parent facet " + std::to_string(pid) +
                                 " does not exist");
            const Facet &parent = scene.facets[pid];
            for (int i = 0; i < 2; ++i)
            {
                // Endpoints must lie on the parent's supporting surface. The
                // construction tolerance is scaled for quadrics (their implicit
                // value is not a distance).
                const Vec3 p = e.endpoint(i);
                const double scale = parent.quadric ? std::max(1.0, parent.implicit_gradient(p).norm()) : 1.0;
                if (std::abs(parent.implicit(p)) > 1e-6 * scale)
                    throw SceneError("edge " + std::to_string(e.id) + ": endpoint off parent facet " +
                                     std::to_string(pid));
            }
        }
        // Zero is a valid interior angle: a knife edge on a thin screen.
        if (!(e.interior_angle >= 0.0) || !(e.interior_angle < 2.0 * std::numbers::pi))
            throw SceneError("edge " + std::to_string(e.id) + ": interior angle out of range");
    }

    for (const Facet &f : scene.facets)
    {
        if (f.material != "PEC")
            throw SceneError("facet " + std::to_string(f.id) + ": only PEC material is supported");
        for (const Vec3 &v : f.vertices)
            scene.aabb.expand(v);
    }
    for (const Edge &e : scene.edges)
        scene.aabb.expand(e.aabb());
}

Scene scene_from_json_text(const std::string &text)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error &err)
    {
        throw SceneError(std::string("scene JSON parse error: ") + err.what());
    }

    Scene scene;
    if (!j.is_object() || !j.contains("facets") || !j["facets"].is_array())
        throw SceneError("scene JSON must be an object with a \"facets\" array");

    for (const auto &jf : j["facets"])
    {
        if (!jf.contains("id"))
            throw SceneError("facet missing id");
        const int id = jf["id"].get<int>();
        std::vector<Vec3> verts;
        if (jf.contains("vertices"))
            for (const auto &jv : jf["vertices"])
                verts.push_back(parse_vec3(jv, "facet vertex"));
        const std::string material = jf.value("material", std::string("PEC"));
        if (jf.contains("quadric"))
        {
            const auto &jq = jf["quadric"];
            if (!jq.is_array() || jq.size() != 10)
                throw SceneError("facet quadric: expected 10 coefficients");
            std::array<double, 10> coeff{};
            for (int i = 0; i < 10; ++i)
                coeff[static_cast<std::size_t>(i)] = jq[static_cast<std::size_t>(i)].get<double>();
            scene.facets.push_back(Facet::from_quadric(id, coeff, std::move(verts), material));
        }
        else
        {
            scene.facets.push_back(Facet::from_vertices(id, std::move(verts), material));
        }
    }

    if (j.contains("edges"))
    {
        for (const auto &je : j["edges"])
        {
            if (!je.contains("id") || !je.contains("endpoints") || !je.contains("parents"))
                throw SceneError("edge missing id/endpoints/parents");
            const int id = je["id"].get<int>();
            const auto &jp = je["endpoints"];
            if (!jp.is_array() || jp.size() != 2)
                throw SceneError("edge endpoints: expected two points");
            const Vec3 a = parse_vec3(jp[0], "edge endpoint");
            const Vec3 b = parse_vec3(jp[1], "edge endpoint");
            const auto &jpar = je["parents"];
            if (!jpar.is_array() || jpar.size() != 2)
                throw SceneError("edge parents: expected two facet ids");
            Edge e = Edge::make_line(id, a, b, {jpar[0].get<int>(), jpar[1].get<int>()});
            if (je.contains("interior_angle"))
                e.interior_angle = je["interior_angle"].get<double>();
            else
                e.interior_angle = -1.0; // filled below once facets are ordered
            scene.edges.push_back(std::move(e));
        }
    }
    scene.n_explicit_edges = scene.edges.size();

    // Resolve pending interior angles before deriving more edges (facets are
    // addressed by id, which equals the index after finalize; sort here first).
    std::sort(scene.facets.begin(), scene.facets.end(), [](const Facet &a, const Facet &b) { return a.id < b.id; });
    {
        std::vector<int> fids;
        for (const Facet &f : scene.facets)
            fids.push_back(f.id);
        check_contiguous_ids(fids, "facet");
    }
    for (Edge &e : scene.edges)
    {
        if (e.interior_angle < 0.0)
        {
            for (int pid : e.parents)
                if (pid < 0 || pid >= static_cast<int>(scene.facets.size()))
                    throw SceneError("edge " + std::to_string(e.id) + ": parent facet does not exist");
            e.interior_angle = dihedral_interior_angle(scene.facets[static_cast<std::size_t>(e.parents[0])],
                                                       scene.facets[static_cast<std::size_t>(e.parents[1])],
                                                       0.5 * (e.endpoint(0) + e.endpoint(1)));
        }
    }

    derive_edges(scene);
    finalize_scene(scene);
    return scene;
}

Scene load_scene(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw SceneError("cannot open scene file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return scene_from_json_text(buf.str());
}

// --- Serialization -------------------------------------------------------

namespace
{

void fmt_double(std::string &out, double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

void fmt_vec3(std::string &out, const Vec3 &v)
{
    out += '[';
    fmt_double(out, v[0]);
    out += ',';
    fmt_double(out, v[1]);
    out += ',';
    fmt_double(out, v[2]);
    out += ']';
}

} // namespace

std::string serialize_scene(const Scene &scene)
{
    std::string out = "{\"facets\":[";
    bool first = true;
    for (const Facet &f : scene.facets)
    {
        if (!first)
            out += ',';
        first = false;
        out += "{\"id\":" + std::to_string(f.id) + ",\"vertices\":[";
        for (std::size_t i = 0; i < f.vertices.size(); ++i)
        {
            if (i)
                out += ',';
            fmt_vec3(out, f.vertices[i]);
        }
        out += "],\"material\":\"" + f.material + "\"";
        if (f.quadric)
        {
            out += ",\"quadric\":[";
            for (int i = 0; i < 10; ++i)
            {
                if (i)
                    out += ',';
                fmt_double(out, f.quadric->coeff[static_cast<std::size_t>(i)]);
            }
            out += ']';
        }
        out += '}';
    }
    out += "],\"edges\":[";
    first = true;
    for (const Edge &e : scene.edges)
    {
        if (!first)
            out += ',';
        first = false;
        out += "{\"id\":" + std::to_string(e.id) + ",\"endpoints\":[";
        fmt_vec3(out, e.endpoint(0));
        out += ',';
        fmt_vec3(out, e.endpoint(1));
        out += "],\"parents\":[" + std::to_string(e.parents[0]) + "," + std::to_string(e.parents[1]) +
               "],\"interior_angle\":";
        fmt_double(out, e.interior_angle);
        out += '}';
    }
    out += "]}";
    return out;
}

} // namespace mptrace
