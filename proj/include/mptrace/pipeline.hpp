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

#include "mptrace/em.hpp"
#include "mptrace/image_method.hpp"
#include "mptrace/mpt.hpp"
#include "mptrace/ray_path.hpp"
#include "mptrace/scene.hpp"
#include "mptrace/validation.hpp"
#include "mptrace/visibility.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mptrace
{

enum class SolverKind
{
    MptParametric,
    MptCartesian,
    ImageMethod, // reflection-only planar candidates; everything else is skipped
    Hybrid       // image method where exact, minimization otherwise
};

std::optional<SolverKind> solver_kind_from(const std::string &name);
std::string to_string(SolverKind kind);

struct RunConfig
{
    std::string scene_path; // informational; run_pipeline takes the Scene directly
    Vec3 bs{0.0, 0.0, 0.0};
    std::vector<Vec3> ues;
    int max_interactions = 2;
    int max_diffractions = -1; // negative: no cap beyond max_interactions
    SolverKind solver = SolverKind::Hybrid;
    int restarts = 0;          // <= 0: scene-dependent default
    double cost_threshold = 1e-12;
    std::uint64_t seed = 0;
    double frequency_hz = 1e9;
    double e0 = 1.0;
    VisibilityMode visibility = VisibilityMode::Sampled;
    bool allow_revisits = false;
    int workers = 1;
    std::string out_dir;    // empty: no files written
    bool dump_graph = false; // also write the propagation graph adjacency
};

/// One solver outcome for one candidate at one receiver. Rejected paths are
/// kept with their status so reports show why a candidate dropped out.
struct PathOutcome
{
    int ue_index = 0;
    long ordinal = 0; // candidate ordinal in global enumeration order
    RayPath path;
    CVec3 field{Complex(0, 0), Complex(0, 0), Complex(0, 0)};
    bool has_field = false;
};

struct StageTimings
{
    double visibility_s = 0.0;
    double enumerate_s = 0.0;
    double solve_s = 0.0;
    double validate_s = 0.0;
    double fields_s = 0.0;
};

struct RunReport
{
    long candidates_enumerated = 0; // across all receivers, after the diffraction cap
    long candidates_filtered = 0;   // removed by the diffraction cap
    long candidates_solved = 0;     // produced at least one converged path
    long paths_found = 0;
    long paths_valid = 0;
    long rejected_containment = 0;
    long rejected_obstruction = 0;
    long rejected_degenerate = 0;
    long image_unsolvable = 0;
    long image_not_applicable = 0;
    long field_errors = 0;
    StageTimings timings; // reported on stdout only, never serialized
    TransitionStats transition;
};

struct UeResult
{
    Vec3 ue;
    std::vector<PathOutcome> paths; // candidate order; includes rejected paths
    FieldSummary summary;
};

struct RunResult
{
    std::vector<UeResult> ues;
    RunReport report;
};

/// Throws std::invalid_argument when the configuration is inconsistent.
void validate_config(const RunConfig &cfg);

/**
 * Full pipeline: visibility, per-receiver candidate enumeration, per-candidate
 * solving over a worker pool, geometric validation, field accumulation.
 * Deterministic for a given seed: candidates get their own generator seeded by
 * position in enumeration order, and all merges happen in that order, so the
 * worker count never changes the result.
 */
RunResult run_pipeline(const Scene &scene, const RunConfig &cfg);

/**
 * Write paths.json (every solver outcome with status), fields.csv (per-path
 * complex components and relative dB), classes.csv (interaction_list, n_paths,
 * E_over_ELOS_dB; a ue_index column is prepended when the run has several
 * receivers), and polylines.csv (valid-path vertices). All floats carry 17
 * significant digits; reruns are byte-identical.
 */
void emit_outputs(const RunResult &result, const RunConfig &cfg, const Scene &scene);

/// Shortest-round-trip style float formatting used by every emitter ("%.17g",
/// infinities as "inf"/"-inf").
std::string format_double(double v);

} // namespace mptrace
