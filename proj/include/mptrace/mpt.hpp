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

#include "mptrace/ray_path.hpp"
#include "mptrace/scene.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace mptrace
{

enum class MptMode
{
    Cartesian, // unknowns: the 3D interaction points; surface constraints appended
    Parametric // unknowns: surface/curve parameters; constraints implicit
};

struct SolverConfig
{
    int restarts = 5;            // multistart count (quadric scenes default to 25 via make_solver_config)
    int max_iters = 200;
    double cost_threshold = 1e-12;
    double step_tol = 1e-12;
    double dedupe_tol = 1e-6;    // meters; solutions with all points closer are duplicates
    std::uint64_t rng_seed = 0;
};

/// Default configuration for a scene: restarts 5, or 25 when any quadric facet
/// is present (their cost landscape has more local minima).
SolverConfig make_solver_config(const Scene &scene);

/**
 * Mirror-law defect at x: gamma*(x_next - x) - reflect(x - x_prev), rescaled
 * by the incoming segment length so the result is a dimensionless direction
 * error. gamma re-stretches the outgoing segment to the incoming length and
 * is recomputed on every evaluation.
 */
Vec3 reflection_residual(const Vec3 &x_prev, const Vec3 &x, const Vec3 &x_next, const Vec3 &normal);

/// Cone-angle defect at x: difference of the direction cosines along the edge
/// tangent between the incoming and outgoing segments. Zero on the Keller cone.
double diffraction_residual(const Vec3 &x_prev, const Vec3 &x, const Vec3 &x_next, const Vec3 &edge_dir);

struct ResidualVector
{
    Eigen::VectorXd interaction; // stacked mirror-law / cone residuals
    Eigen::VectorXd constraint;  // on-surface defects (Cartesian mode only)

    double cost() const { return interaction.squaredNorm() + constraint.squaredNorm(); }
};

/// Number of unknowns for the candidate in the given mode.
int unknown_dimension(const InteractionList &candidate, MptMode mode);

/// Map the unknown vector to interaction points.
std::vector<Vec3> points_from_unknowns(const Scene &scene, const InteractionList &candidate, const Eigen::VectorXd &u,
                                       MptMode mode);

/// Stacked residual at the unknown vector u. Total and NaN-free for finite u.
ResidualVector assemble_residual(const Scene &scene, const Vec3 &bs, const Vec3 &ue, const InteractionList &candidate,
                                 const Eigen::VectorXd &u, MptMode mode);

/// Scalar cost of explicit interaction points: interaction residuals plus
/// rescaled surface defects. Both solvers score paths with this function.
double path_cost(const Scene &scene, const Vec3 &bs, const Vec3 &ue, const InteractionList &candidate,
                 const std::vector<Vec3> &points);

struct MptSolution
{
    RayPath path;
    double cost = 0.0;
    Eigen::VectorXd unknowns;
};

/**
 * Multistart damped least-squares minimization of the path residual. Returns
 * the deduplicated solutions with converged cost below the threshold, ordered
 * by the restart that first found them. Pure given cfg.rng_seed. Candidates
 * containing a quadric facet are solved in Cartesian mode regardless of the
 * requested mode (quadrics carry no parameter map).
 */
std::vector<MptSolution> solve_candidate(const Scene &scene, const Vec3 &bs, const Vec3 &ue,
                                         const InteractionList &candidate, const SolverConfig &cfg, MptMode mode);

// --- solver internals, exposed for verification --------------------------

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd &)>;

struct LmResult
{
    Eigen::VectorXd x;
    double cost = 0.0;
    int iterations = 0;
};

/// Damped least-squares with forward-difference Jacobian and a backtracking
/// gradient fallback when the normal equations go singular.
LmResult minimize_least_squares(const ResidualFn &fn, const Eigen::VectorXd &x0, const SolverConfig &cfg);

/// Forward-difference Jacobian with the solver's step rule h = 1e-7*(1+|x_i|).
Eigen::MatrixXd forward_difference_jacobian(const ResidualFn &fn, const Eigen::VectorXd &x,
                                            const Eigen::VectorXd &f0);

/// Cost gradient 2 J'r as the solver sees it at u.
Eigen::VectorXd solver_cost_gradient(const Scene &scene, const Vec3 &bs, const Vec3 &ue,
                                     const InteractionList &candidate, const Eigen::VectorXd &u, MptMode mode);

} // namespace mptrace
