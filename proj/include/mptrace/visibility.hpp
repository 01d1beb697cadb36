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

#include "mptrace/interaction.hpp"
#include "mptrace/scene.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace mptrace
{

enum class VisibilityMode
{
    Sampled, // K-sample mutual-sight test with front-side culling
    Full     // no pruning: everything sees everything
};

/// Dense square 0/1 matrix.
class BinaryMatrix
{
  public:
    BinaryMatrix() = default;
    explicit BinaryMatrix(int n) : n_(n), data_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {}

    int size() const { return n_; }
    bool at(int i, int j) const { return data_[idx(i, j)] != 0; }
    void set(int i, int j, bool v) { data_[idx(i, j)] = v ? 1 : 0; }

    friend bool operator==(const BinaryMatrix &, const BinaryMatrix &) = default;

  private:
    std::size_t idx(int i, int j) const
    {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
    }
    int n_ = 0;
    std::vector<std::uint8_t> data_;
};

/**
 * Propagation graph over scene elements plus the two terminals. Node 0 is the
 * BS, nodes 1..n_f are facets (by id), nodes n_f+1..n_f+n_e are edges (by id),
 * and the last node is the UE. The UE row is always zero: paths end there.
 */
struct PropagationGraph
{
    int n_facets = 0;
    int n_edges = 0;
    BinaryMatrix adj;

    int n_nodes() const { return n_facets + n_edges + 2; }
    int bs_node() const { return 0; }
    int ue_node() const { return n_facets + n_edges + 1; }
    int facet_node(int id) const { return 1 + id; }
    int edge_node(int id) const { return 1 + n_facets + id; }

    ElementRef element_of(int node) const
    {
        if (node >= 1 && node <= n_facets)
            return {Interaction::Reflection, node - 1};
        return {Interaction::Diffraction, node - 1 - n_facets};
    }
};

/**
 * Element-to-element visibility matrix (symmetric, zero diagonal). Sampled
 * mode tests up to 16 sample-point pairs (centroid plus vertices, paired
 * round-robin) for mutual unocclusion; facet-facet pairs additionally require
 * each sample to lie strictly on the other facet's front side. An edge is
 * never visible to its own parent facets.
 */
BinaryMatrix build_visibility(const Scene &scene, VisibilityMode mode);

/// Embed the element matrix and connect the terminals: BS row from sampled
/// visibility at the BS point, element->UE column likewise, BS->UE iff LOS.
PropagationGraph build_adjacency(const BinaryMatrix &vis, const Scene &scene, const Vec3 &bs, const Vec3 &ue,
                                 VisibilityMode mode);

/**
 * All candidate interaction sequences with at most max_interactions elements,
 * in deterministic order: fewer interactions first, then depth-first by
 * ascending node index. With allow_revisits, element revisits are permitted
 * (only immediate repetition is forbidden) and the walks stay bounded by the
 * same length cap.
 */
std::vector<InteractionList> enumerate_candidates(const PropagationGraph &graph, int max_interactions,
                                                  bool allow_revisits = false);

/// Node-index form of the enumeration (BS/UE omitted); used by the wrapper
/// above and directly testable against brute force on arbitrary graphs.
std::vector<std::vector<int>> enumerate_node_paths(const BinaryMatrix &adj, int bs, int ue, int max_intermediate,
                                                   bool allow_revisits = false);

/// CSV dump with element labels (BS, s_i, e_j, UE) on both axes.
void write_graph_csv(const PropagationGraph &graph, std::ostream &out);

} // namespace mptrace
