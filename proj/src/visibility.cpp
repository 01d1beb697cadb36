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

#include "mptrace/visibility.hpp"

#include "mptrace/validation.hpp"

#include <ostream>

namespace mptrace
{

namespace
{

constexpr int kMaxSamplePairs = 16;
constexpr double kFrontTol = 1e-12; // strictly positive clearance: coplanar is not visible

struct ElementSamples
{
    std::vector<Vec3> points;
    bool is_facet = false;
    int id = -1;
};

ElementSamples facet_samples(const Facet &f)
{
    ElementSamples s;
    s.is_facet = true;
    s.id = f.id;
    if (!f.vertices.empty())
    {
        s.points.push_back(f.centroid());
        for (const Vec3 &v : f.vertices)
            s.points.push_back(v);
    }
    return s;
}

ElementSamples edge_samples(const Edge &e)
{
    ElementSamples s;
    s.id = e.id;
    s.points.push_back(e.param_point(0.5));
    s.points.push_back(e.endpoint(0));
    s.points.push_back(e.endpoint(1));
    return s;
}

// Strictly in front of a planar facet; quadrics skip the side test.
bool front_side(const Facet &f, const Vec3 &p)
{
    if (f.quadric)
        return true;
    return f.implicit(p) > kFrontTol;
}

bool pair_visible(const Scene &scene, const ElementSamples &sa, const ElementSamples &sb, const FacetExclusions &excl)
{
    // Vertex-less quadrics cannot be sampled; stay conservative (visible).
    if (sa.points.empty() || sb.points.empty())
        return true;
    const int na = static_cast<int>(sa.points.size());
    const int nb = static_cast<int>(sb.points.size());
    const int pairs = std::min(kMaxSamplePairs, na * nb);
    const bool facet_pair = sa.is_facet && sb.is_facet;
    for (int k = 0; k < pairs; ++k)
    {
        const Vec3 &a = sa.points[static_cast<std::size_t>(k % na)];
        const Vec3 &b = sb.points[static_cast<std::size_t>((k / na) % nb)];
        if ((b - a).norm() < kGeomTol)
            continue;
        if (facet_pair)
        {
            const Facet &fa = scene.facets[static_cast<std::size_t>(sa.id)];
            const Facet &fb = scene.facets[static_cast<std::size_t>(sb.id)];
            if (!front_side(fb, a) || !front_side(fa, b))
                continue;
        }
        if (!segment_obstructed(scene, a, b, excl))
            return true;
    }
    return false;
}

// Point terminal (BS or UE) against an element.
bool point_sees_element(const Scene &scene, const Vec3 &p, const ElementSamples &se, const FacetExclusions &excl)
{
    if (se.points.empty())
        return true;
    if (se.is_facet && !front_side(scene.facets[static_cast<std::size_t>(se.id)], p))
        return false;
    const int n = std::min(kMaxSamplePairs, static_cast<int>(se.points.size()));
    for (int k = 0; k < n; ++k)
    {
        const Vec3 &b = se.points[static_cast<std::size_t>(k)];
        if ((b - p).norm() < kGeomTol)
            continue;
        if (!segment_obstructed(scene, p, b, excl))
            return true;
    }
    return false;
}

bool edge_has_parent(const Edge &e, int facet_id) { return e.parents[0] == facet_id || e.parents[1] == facet_id; }

} // namespace

BinaryMatrix build_visibility(const Scene &scene, VisibilityMode mode)
{
    const int nf = static_cast<int>(scene.facets.size());
    const int ne = static_cast<int>(scene.edges.size());
    const int n = nf + ne;
    BinaryMatrix vis(n);

    if (mode == VisibilityMode::Full)
    {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                vis.set(i, j, i != j);
        return vis;
    }

    std::vector<ElementSamples> samples;
    samples.reserve(static_cast<std::size_t>(n));
    for (const Facet &f : scene.facets)
        samples.push_back(facet_samples(f));
    for (const Edge &e : scene.edges)
        samples.push_back(edge_samples(e));

    for (int i = 0; i < n; ++i)
    {
        for (int j = i + 1; j < n; ++j)
        {
            // A facet never sees its own boundary edges.
            if (i < nf && j >= nf && edge_has_parent(scene.edges[static_cast<std::size_t>(j - nf)], i))
                continue;

            FacetExclusions excl;
            if (i < nf)
                excl.insert(i);
            if (j < nf)
                excl.insert(j);
            if (pair_visible(scene, samples[static_cast<std::size_t>(i)], samples[static_cast<std::size_t>(j)], excl))
            {
                // Symmetrized: either direction open counts for both.
                vis.set(i, j, true);
                vis.set(j, i, true);
            }
        }
    }
    return vis;
}

PropagationGraph build_adjacency(const BinaryMatrix &vis, const Scene &scene, const Vec3 &bs, const Vec3 &ue,
                                 VisibilityMode mode)
{
    PropagationGraph g;
    g.n_facets = static_cast<int>(scene.facets.size());
    g.n_edges = static_cast<int>(scene.edges.size());
    const int n = g.n_facets + g.n_edges;
    g.adj = BinaryMatrix(g.n_nodes());

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (vis.at(i, j))
                g.adj.set(i + 1, j + 1, true);

    if (mode == VisibilityMode::Full)
    {
        for (int i = 0; i < n; ++i)
        {
            g.adj.set(g.bs_node(), i + 1, true);
            g.adj.set(i + 1, g.ue_node(), true);
        }
        g.adj.set(g.bs_node(), g.ue_node(), true);
        return g;
    }

    std::vector<ElementSamples> samples;
    for (const Facet &f : scene.facets)
        samples.push_back(facet_samples(f));
    for (const Edge &e : scene.edges)
        samples.push_back(edge_samples(e));

    for (int i = 0; i < n; ++i)
    {
        FacetExclusions excl;
        if (i < g.n_facets)
            excl.insert(i);
        if (point_sees_element(scene, bs, samples[static_cast<std::size_t>(i)], excl))
            g.adj.set(g.bs_node(), i + 1, true);
        if (point_sees_element(scene, ue, samples[static_cast<std::size_t>(i)], excl))
            g.adj.set(i + 1, g.ue_node(), true);
    }
    g.adj.set(g.bs_node(), g.ue_node(), !segment_obstructed(scene, bs, ue));
    return g;
}

std::vector<std::vector<int>> enumerate_node_paths(const BinaryMatrix &adj, int bs, int ue, int max_intermediate,
                                                   bool allow_revisits)
{
    std::vector<std::vector<int>> out;
    std::vector<int> current;
    std::vector<char> visited(static_cast<std::size_t>(adj.size()), 0);

    // Iterative deepening: all k-interaction paths precede any (k+1)-interaction
    // path, which also makes the listing a prefix of any deeper enumeration.
    for (int k = 0; k <= max_intermediate; ++k)
    {
        auto dfs = [&](auto &&self, int node, int depth) -> void
        {
            if (depth == k)
            {
                if (adj.at(node, ue))
                    out.push_back(current);
                return;
            }
            for (int next = 0; next < adj.size(); ++next)
            {
                if (next == ue || next == bs || !adj.at(node, next))
                    continue;
                if (allow_revisits ? (next == node) : (visited[static_cast<std::size_t>(next)] != 0))
                    continue;
                visited[static_cast<std::size_t>(next)] = 1;
                current.push_back(next);
                self(self, next, depth + 1);
                current.pop_back();
                visited[static_cast<std::size_t>(next)] = 0;
            }
        };
        dfs(dfs, bs, 0);
    }
    return out;
}

std::vector<InteractionList> enumerate_candidates(const PropagationGraph &graph, int max_interactions,
                                                  bool allow_revisits)
{
    const auto node_paths =
        enumerate_node_paths(graph.adj, graph.bs_node(), graph.ue_node(), max_interactions, allow_revisits);
    std::vector<InteractionList> out;
    out.reserve(node_paths.size());
    for (const auto &nodes : node_paths)
    {
        InteractionList list;
        for (int node : nodes)
            list.items.push_back(graph.element_of(node));
        out.push_back(std::move(list));
    }
    return out;
}

void write_graph_csv(const PropagationGraph &graph, std::ostream &out)
{
    const auto label = [&](int node) -> std::string
    {
        if (node == graph.bs_node())
            return "BS";
        if (node == graph.ue_node())
            return "UE";
        const ElementRef e = graph.element_of(node);
        return (e.kind == Interaction::Reflection ? "s" : "e") + std::to_string(e.id + 1);
    };
    out << "";
    for (int j = 0; j < graph.n_nodes(); ++j)
        out << ',' << label(j);
    out << '\n';
    for (int i = 0; i < graph.n_nodes(); ++i)
    {
        out << label(i);
        for (int j = 0; j < graph.n_nodes(); ++j)
            out << ',' << (graph.adj.at(i, j) ? 1 : 0);
        out << '\n';
    }
}

} // namespace mptrace
