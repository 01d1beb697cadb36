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

#include <string>
#include <vector>

namespace mptrace
{

enum class Interaction
{
    Reflection,
    Diffraction
};

/// One interaction site: the element kind decides the physics (facets reflect,
/// edges diffract); id indexes the scene's facet or edge list respectively.
struct ElementRef
{
    Interaction kind = Interaction::Reflection;
    int id = -1;

    friend bool operator==(const ElementRef &, const ElementRef &) = default;
};

/// Ordered interaction sequence of a candidate path (BS and UE implicit).
struct InteractionList
{
    std::vector<ElementRef> items;

    int size() const { return static_cast<int>(items.size()); }

    int count(Interaction kind) const
    {
        int n = 0;
        for (const ElementRef &e : items)
            n += (e.kind == kind) ? 1 : 0;
        return n;
    }

    /// Kind signature, e.g. "RD" for a reflection followed by a diffraction.
    std::string signature() const
    {
        std::string s;
        for (const ElementRef &e : items)
            s += (e.kind == Interaction::Reflection) ? 'R' : 'D';
        return s;
    }

    friend bool operator==(const InteractionList &, const InteractionList &) = default;
};

} // namespace mptrace
