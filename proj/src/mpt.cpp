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

#include "mptrace/mpt.hpp"

#include <random>

namespace mptrace
{

namespace
{

constexpr double kNormEps = 1e-9; // degenerate-segment clamp

// Unit normal that stays finite for any query point (quadric gradients can
// vanish at isolated points the optimizer may cross).
Vec3 safe_normal(const Facet &f, const Vec3 &p)
{
    const Vec3 g = f.implicit_gradient(p);
    return g / std::max(g.norm(), 1e-12);
}

} // namespace

SolverConfig make_solver_config(const Scene &scene)
{
    SolverConfig cfg;
    for (const Facet &f : scene.facets)
        if (!f.planar())
        {
            cfg.restarts = 25;
            break;
        }
    return cfg;
}

Vec3 reflection_residual(const Vec3 &x_prev, const Vec3 &x, const Vec3 &x_next, const Vec3 &normal)
{
    const Vec3 in = x - x_prev;
    const Vec3 out = x_next - x;
    const double in_len = in.norm();
    const double gamma = in_len / std::max(out.norm(), kNormEps);
    const Vec3 reflected = in - 2.0 * in.dot(normal) * normal;
    return (gamma * out - reflected) / (in_len + kNormEps);
}

double diffraction_residual(const Vec3 &x_prev, const Vec3 &x, const Vec3 &x_next, const Vec3 &edge_dir)
{
    const Vec3 in = x - x_prev;
    const Vec3 out = x_next - x;
    return in.dot(edge_dir) / std::max(in.norm(), kNormEps) - out.dot(edge_dir) / std::max(out.norm(), kNormEps);
}

int unknown_dimension(const InteractionList &candidate, MptMode mode)
{
    if (mode == MptMode::Cartesian)
        return 3 * candidate.size();
    int dim = 0;
    for (const ElementRef &el : candidate.items)
        dim += (el.kind == Interaction::Reflection) ? 2 : 1;
    return dim;
}

std::vector<Vec3> points_from_unknowns(const Scene &scene, const InteractionList &candidate, const Eigen::VectorXd &u,
                                       MptMode mode)
{
    std::vector<Vec3> points;
    points.reserve(static_cast<std::size_t>(candidate.size()));
    if (mode == MptMode::Cartesian)
    {
        for (int k = 0; k < candidate.size(); ++k)
            points.emplace_back(u[3 * k], u[3 * k + 1], u[3 * k + 2]);
        return points;
    }
    int off = 0;
    for (const ElementRef &el : candidate.items)
    {
        if (el.kind == Interaction::Reflection)
        {
            points.push_back(scene.facets[static_cast<std::size_t>(el.id)].param_point(u[off], u[off + 1]));
            off += 2;
        }
        else
        {
            points.push_back(scene.edges[static_cast<std::size_t>(el.id)].param_point(u[off]));
            off += 1;
        }
    }
    return points;
}

namespace
{

Eigen::VectorXd interaction_residuals(const Scene &scene, const Vec3 &bs, const Vec3 &ue,
                                      const InteractionList &candidate, const std::vector<Vec3> &points)
{
    const int n = candidate.size();
    int rows = 0;
    for (const ElementRef &el : candidate.items)
        rows += (el.kind == Interaction::Reflection) ? 3 : 1;
    Eigen::VectorXd r(rows);
    int off = 0;
    for (int k = 0; k < n; ++k)
    {
        const Vec3 &prev = (k == 0) ? bs : points[static_cast<std::size_t>(k - 1)];
        const Vec3 &here = points[static_cast<std::size_t>(k)];
        const Vec3 &next = (k == n - 1) ? ue : points[static_cast<std::size_t>(k + 1)];
        const ElementRef &el = candidate.items[static_cast<std::size_t>(k)];
        if (el.kind == Interaction::Reflection)
        {
            const Facet &f = scene.facets[static_cast<std::size_t>(el.id)];
            r.segment<3>(off) = reflection_residual(prev, here, next, safe_normal(f, here));
            off += 3;
        }
        else
        {
            const Edge &e = scene.edges[static_cast<std::size_t>(el.id)];
            r[off] = diffraction_residual(prev, here, next, e.direction_at(here));
            off += 1;
        }
    }
    return r;
}

Eigen::VectorXd constraint_residuals(const Scene &scene, const InteractionList &candidate,
                                     const std::vector<Vec3> &points)
{
    const int n = candidate.size();
    Eigen::VectorXd c(n);
    for (int k = 0; k < n; ++k)
    {
        const ElementRef &el = candidate.items[static_cast<std::size_t>(k)];
        const Vec3 &p = points[static_cast<std::size_t>(k)];
        if (el.kind == Interaction::Reflection)
        {
            const Facet &f = scene.facets[static_cast<std::size_t>(el.id)];
            c[k] = f.implicit(p) / f.characteristic_length();
        }
        else
        {
            const Edge &e = scene.edges[static_cast<std::size_t>(el.id)];
            c[k] = e.implicit(p) / e.characteristic_length();
        }
    }
    return c;
}

} // namespace

ResidualVector assemble_residual(const Scene &scene, const Vec3 &bs, const Vec3 &ue, const InteractionList &candidate,
                                 const Eigen::VectorXd &u, MptMode mode)
{
    const auto points = points_from_unknowns(scene, candidate, u, mode);
    ResidualVector rv;
    rv.interaction = interaction_residuals(scene, bs, ue, candidate, points);
    if (mode == MptMode::Cartesian)
        rv.constraint = constraint_residuals(scene, candidate, points);
    else
        rv.constraint = Eigen::VectorXd(0);
    return rv;
}

double path_cost(const Scene &scene, const Vec3 &bs, const Vec3 &ue, const InteractionList &candidate,
                 const std::vector<Vec3> &points)
{
    if (candidate.size() == 0)
        return 0.0;
    const Eigen::VectorXd r = interaction_residuals(scene, bs, ue, candidate, points);
    const Eigen::VectorXd c = constraint_residuals(scene, candidate, points);
    return r.squaredNorm() + c.squaredNorm();
}

Eigen::MatrixXd forward_difference_jacobian(const ResidualFn &fn, const Eigen::VectorXd &x, const Eigen::VectorXd &f0)
{
    const int n = static_cast<int>(x.size());
    const int m = static_cast<int>(f0.size());
    Eigen::MatrixXd J(m, n);
    Eigen::VectorXd xh = x;
    for (int i = 0; i < n; ++i)
    {
        const double h = 1e-7 * (1.0 + std::abs(x[i]));
        xh[i] = x[i] + h;
        J.col(i) = (fn(xh) - f0) / h;
        xh[i] = x[i];
    }
    return J;
}

LmResult minimize_least_squares(const ResidualFn &fn, const Eigen::VectorXd &x0, const SolverConfig &cfg)
{
    // Success classification uses cost_threshold; iteration continues well
    // below it so converged points are sharp, not merely under the bar.
    const double stop_cost = cfg.cost_threshold * 1e-8;

    LmResult res;
    res.x = x0;
    Eigen::VectorXd f = fn(res.x);
    res.cost = f.squaredNorm();
    double lambda = 1e-3;

    for (int iter = 0; iter < cfg.max_iters; ++iter)
    {
        res.iterations = iter + 1;
        if (res.cost < stop_cost)
            break;

        const Eigen::MatrixXd J = forward_difference_jacobian(fn, res.x, f);
        const Eigen::VectorXd g = J.transpose() * f;
        const Eigen::MatrixXd A = J.transpose() * J;

        bool accepted = false;
        double step_norm = 0.0;
        while (!accepted && lambda < 1e12)
        {
            Eigen::MatrixXd M = A;
            M.diagonal() += lambda * A.diagonal().cwiseMax(1e-12);
            const Eigen::VectorXd delta = M.ldlt().solve(-g);
            if (delta.allFinite())
            {
                const Eigen::VectorXd x_try = res.x + delta;
                const Eigen::VectorXd f_try = fn(x_try);
                const double c_try = f_try.squaredNorm();
                if (c_try < res.cost)
                {
                    res.x = x_try;
                    f = f_try;
                    res.cost = c_try;
                    step_norm = delta.norm();
                    lambda = std::max(lambda / 3.0, 1e-14);
                    accepted = true;
                    break;
                }
            }
            lambda *= 10.0;
        }

        if (!accepted)
        {
            // Singular or stiff normal equations: plain gradient step with
            // backtracking.
            double alpha = 1.0 / std::max(1.0, g.norm());
            while (alpha > 1e-18)
            {
                const Eigen::VectorXd x_try = res.x - alpha * g;
                const Eigen::VectorXd f_try = fn(x_try);
                if (f_try.squaredNorm() < res.cost)
                {
                    step_norm = alpha * g.norm();
                    res.x = x_try;
                    f = f_try;
                    res.cost = f_try.squaredNorm();
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            lambda = 1e-3;
        }

        if (!accepted)
            break; // stalled: no descent direction left at this precision
        if (step_norm < cfg.step_tol * (1.0 + res.x.norm()))
            break;
    }
    return res;
}

Eigen::VectorXd solver_cost_gradient(const Scene &scene, const Vec3 &bs, const Vec3 &ue,
                                     const InteractionList &candidate, const Eigen::VectorXd &u, MptMode mode)
{
    const ResidualFn fn = [&](const Eigen::VectorXd &x) -> Eigen::VectorXd
    {
        const ResidualVector rv = assemble_residual(scene, bs, ue, candidate, x, mode);
        Eigen::VectorXd stacked(rv.interaction.size() + rv.constraint.size());
        stacked << rv.interaction, rv.constraint;
        return stacked;
    };
    const Eigen::VectorXd f0 = fn(u);
    const Eigen::MatrixXd J = forward_difference_jacobian(fn, u, f0);
    return 2.0 * J.transpose() * f0;
}

namespace
{

// Portable uniform double in [0,1): 53 random bits, identical across standard
// libraries so byte-identical reruns survive toolchain changes.
double uniform01(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace

std::vector<MptSolution> solve_candidate(const Scene &scene, const Vec3 &bs, const Vec3 &ue,
                                         const InteractionList &candidate, const SolverConfig &cfg, MptMode mode)
{
    std::vector<MptSolution> solutions;

    if (candidate.size() == 0)
    {
        MptSolution s;
        s.path.points = {bs, ue};
        s.path.candidate = candidate;
        s.path.cost = 0.0;
        s.cost = 0.0;
        s.unknowns = Eigen::VectorXd(0);
        solutions.push_back(std::move(s));
        return solutions;
    }

    MptMode eff_mode = mode;
    if (mode == MptMode::Parametric)
        for (const ElementRef &el : candidate.items)
            if (el.kind == Interaction::Reflection && !scene.facets[static_cast<std::size_t>(el.id)].planar())
            {
                eff_mode = MptMode::Cartesian;
                break;
            }

    const int dim = unknown_dimension(candidate, eff_mode);
    const ResidualFn fn = [&](const Eigen::VectorXd &x) -> Eigen::VectorXd
    {
        const ResidualVector rv = assemble_residual(scene, bs, ue, candidate, x, eff_mode);
        Eigen::VectorXd stacked(rv.interaction.size() + rv.constraint.size());
        stacked << rv.interaction, rv.constraint;
        return stacked;
    };

    // Initialization box for Cartesian draws.
    Vec3 lo(-1, -1, -1), hi(1, 1, 1);
    if (scene.aabb.valid())
    {
        lo = scene.aabb.lo;
        hi = scene.aabb.hi;
    }

    std::mt19937_64 rng(splitmix64(cfg.rng_seed));
    for (int restart = 0; restart < cfg.restarts; ++restart)
    {
        Eigen::VectorXd u0(dim);
        if (eff_mode == MptMode::Parametric)
        {
            for (int i = 0; i < dim; ++i)
                u0[i] = uniform01(rng);
        }
        else
        {
            for (int k = 0; k < candidate.size(); ++k)
                for (int a = 0; a < 3; ++a)
                    u0[3 * k + a] = lo[a] + uniform01(rng) * (hi[a] - lo[a]);
        }

        const LmResult lm = minimize_least_squares(fn, u0, cfg);
        if (!(lm.cost < cfg.cost_threshold) || !lm.x.allFinite())
            continue;

        const auto points = points_from_unknowns(scene, candidate, lm.x, eff_mode);
        bool duplicate = false;
        for (const MptSolution &s : solutions)
        {
            bool all_close = true;
            for (std::size_t i = 0; i < points.size(); ++i)
                all_close = all_close && (points[i] - s.path.points[i + 1]).norm() <= cfg.dedupe_tol;
            duplicate = duplicate || all_close;
        }
        if (duplicate)
            continue;

        MptSolution s;
        s.cost = lm.cost;
        s.unknowns = lm.x;
        s.path.candidate = candidate;
        s.path.points.reserve(points.size() + 2);
        s.path.points.push_back(bs);
        for (const Vec3 &p : points)
            s.path.points.push_back(p);
        s.path.points.push_back(ue);
        s.path.cost = path_cost(scene, bs, ue, candidate, points);
        solutions.push_back(std::move(s));
    }
    return solutions;
}

} // namespace mptrace
