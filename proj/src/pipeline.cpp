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

#include "mptrace/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mptrace
{

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// i-th output of the splitmix64 stream started at `seed`; candidate solves
// draw their restarts from this, so results never depend on the worker that
// picked the candidate up.
std::uint64_t candidate_seed(std::uint64_t seed, long ordinal)
{
    return splitmix64(seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(ordinal) + 1));
}

bool reflection_only_planar(const Scene &scene, const InteractionList &candidate)
{
    for (const ElementRef &e : candidate.items)
    {
        if (e.kind != Interaction::Reflection)
            return false;
        if (!scene.facets.at(static_cast<std::size_t>(e.id)).planar())
            return false;
    }
    return true;
}

struct WorkItem
{
    int ue_index = 0;
    long ordinal = 0;
    const InteractionList *candidate = nullptr;
};

struct ItemOutcome
{
    std::vector<RayPath> paths;
    bool image_unsolvable = false;
    bool image_not_applicable = false;
};

ItemOutcome solve_item(const Scene &scene, const RunConfig &cfg, const SolverConfig &base, const Vec3 &ue,
                       const WorkItem &item)
{
    ItemOutcome out;
    const InteractionList &cand = *item.candidate;
    SolverConfig solver_cfg = base;
    solver_cfg.rng_seed = candidate_seed(cfg.seed, item.ordinal);

    const bool planar_refl = reflection_only_planar(scene, cand);
    SolverKind kind = cfg.solver;
    if (kind == SolverKind::Hybrid)
        kind = planar_refl ? SolverKind::ImageMethod : SolverKind::MptParametric;

    switch (kind)
    {
    case SolverKind::ImageMethod:
    {
        if (!planar_refl)
        {
            out.image_not_applicable = true;
            return out;
        }
        ImageResult r = trace_image_path(scene, cfg.bs, ue, cand);
        // The backward pass intersects infinite lines, so a formally solved
        // chain can still break the mirror law (a leg traversed backwards).
        // The shared cost gate drops those exactly like an unconverged solve.
        if (r.status == ImageStatus::Solved && r.path.cost <= solver_cfg.cost_threshold)
            out.paths.push_back(std::move(r.path));
        else if (r.status == ImageStatus::Unsolvable)
            out.image_unsolvable = true;
        else if (r.status == ImageStatus::NotApplicable)
            out.image_not_applicable = true;
        return out;
    }
    case SolverKind::MptParametric:
    case SolverKind::MptCartesian:
    {
        const MptMode mode =
            kind == SolverKind::MptParametric ? MptMode::Parametric : MptMode::Cartesian;
        std::vector<MptSolution> sols = solve_candidate(scene, cfg.bs, ue, cand, solver_cfg, mode);
        out.paths.reserve(sols.size());
        for (MptSolution &s : sols)
            out.paths.push_back(std::move(s.path));
        return out;
    }
    case SolverKind::Hybrid:
        break; // resolved above
    }
    return out;
}

} // namespace

std::optional<SolverKind> solver_kind_from(const std::string &name)
{
    if (name == "mpt-parametric")
        return SolverKind::MptParametric;
    if (name == "mpt-cartesian")
        return SolverKind::MptCartesian;
    if (name == "image-method")
        return SolverKind::ImageMethod;
    if (name == "hybrid")
        return SolverKind::Hybrid;
    return std::nullopt;
}

std::string to_string(SolverKind kind)
{
    switch (kind)
    {
    case SolverKind::MptParametric:
        return "mpt-parametric";
    case SolverKind::MptCartesian:
        return "mpt-cartesian";
    case SolverKind::ImageMethod:
        return "image-method";
    case SolverKind::Hybrid:
        return "hybrid";
    }
    return "?";
}

void validate_config(const RunConfig &cfg)
{
    if (cfg.ues.empty())
        throw std::invalid_argument("at least one receiver position is required");
    if (cfg.max_interactions < 0)
        throw std::invalid_argument("max interactions must be non-negative");
    if (cfg.max_diffractions > cfg.max_interactions)
        throw std::invalid_argument("diffraction cap cannot exceed the interaction cap");
    if (!(cfg.frequency_hz > 0.0))
        throw std::invalid_argument("frequency must be positive");
    if (!(cfg.e0 > 0.0))
        throw std::invalid_argument("reference amplitude must be positive");
    if (!(cfg.cost_threshold > 0.0))
        throw std::invalid_argument("cost threshold must be positive");
    if (cfg.workers < 1)
        throw std::invalid_argument("worker count must be at least 1");
    for (const Vec3 &ue : cfg.ues)
        if ((ue - cfg.bs).norm() < 1e-9)
            throw std::invalid_argument("receiver coincides with the transmitter");
}

RunResult run_pipeline(const Scene &scene, const RunConfig &cfg)
{
    validate_config(cfg);

    RunResult result;
    RunReport &report = result.report;

    auto t0 = Clock::now();
    const BinaryMatrix vis = build_visibility(scene, cfg.visibility);
    report.timings.visibility_s = seconds_since(t0);

    const int diff_cap = cfg.max_diffractions < 0 ? cfg.max_interactions : cfg.max_diffractions;

    t0 = Clock::now();
    std::vector<std::vector<InteractionList>> per_ue_candidates(cfg.ues.size());
    for (std::size_t u = 0; u < cfg.ues.size(); ++u)
    {
        const PropagationGraph graph = build_adjacency(vis, scene, cfg.bs, cfg.ues[u], cfg.visibility);
        std::vector<InteractionList> cands = enumerate_candidates(graph, cfg.max_interactions, cfg.allow_revisits);
        auto &kept = per_ue_candidates[u];
        kept.reserve(cands.size());
        for (InteractionList &c : cands)
        {
            if (c.count(Interaction::Diffraction) > diff_cap)
            {
                ++report.candidates_filtered;
                continue;
            }
            kept.push_back(std::move(c));
        }
    }
    report.timings.enumerate_s = seconds_since(t0);

    std::vector<WorkItem> items;
    long ordinal = 0;
    for (std::size_t u = 0; u < per_ue_candidates.size(); ++u)
        for (const InteractionList &c : per_ue_candidates[u])
            items.push_back({static_cast<int>(u), ordinal++, &c});
    report.candidates_enumerated = static_cast<long>(items.size());

    SolverConfig base = make_solver_config(scene);
    if (cfg.restarts > 0)
        base.restarts = cfg.restarts;
    base.cost_threshold = cfg.cost_threshold;

    t0 = Clock::now();
    std::vector<ItemOutcome> outcomes(items.size());
    const int n_workers = std::min<long>(cfg.workers, std::max<long>(1, static_cast<long>(items.size())));
    if (n_workers <= 1)
    {
        for (std::size_t i = 0; i < items.size(); ++i)
            outcomes[i] = solve_item(scene, cfg, base, cfg.ues[static_cast<std::size_t>(items[i].ue_index)], items[i]);
    }
    else
    {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w)
        {
            pool.emplace_back([&]() {
                for (;;)
                {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= items.size())
                        return;
                    outcomes[i] =
                        solve_item(scene, cfg, base, cfg.ues[static_cast<std::size_t>(items[i].ue_index)], items[i]);
                }
            });
        }
        for (std::thread &t : pool)
            t.join();
    }
    report.timings.solve_s = seconds_since(t0);

    result.ues.resize(cfg.ues.size());
    for (std::size_t u = 0; u < cfg.ues.size(); ++u)
        result.ues[u].ue = cfg.ues[u];

    t0 = Clock::now();
    for (std::size_t i = 0; i < items.size(); ++i)
    {
        ItemOutcome &oc = outcomes[i];
        if (oc.image_unsolvable)
            ++report.image_unsolvable;
        if (oc.image_not_applicable)
            ++report.image_not_applicable;
        if (!oc.paths.empty())
            ++report.candidates_solved;
        for (RayPath &p : oc.paths)
        {
            ++report.paths_found;
            p = validate_path(scene, std::move(p));
            switch (p.status)
            {
            case PathStatus::Valid:
                ++report.paths_valid;
                break;
            case PathStatus::RejectedContainment:
                ++report.rejected_containment;
                break;
            case PathStatus::RejectedObstruction:
                ++report.rejected_obstruction;
                break;
            case PathStatus::RejectedDegenerate:
                ++report.rejected_degenerate;
                break;
            case PathStatus::Unvalidated:
                break;
            }
            PathOutcome po;
            po.ue_index = items[i].ue_index;
            po.ordinal = items[i].ordinal;
            po.path = std::move(p);
            result.ues[static_cast<std::size_t>(items[i].ue_index)].paths.push_back(std::move(po));
        }
    }
    report.timings.validate_s = seconds_since(t0);

    t0 = Clock::now();
    RadioConfig radio;
    radio.frequency_hz = cfg.frequency_hz;
    radio.e0 = cfg.e0;
    for (UeResult &ur : result.ues)
    {
        std::vector<RayPath> valid;
        std::vector<CVec3> fields;
        for (PathOutcome &po : ur.paths)
        {
            if (po.path.status != PathStatus::Valid)
                continue;
            try
            {
                CVec3 f = propagate_path(scene, radio, po.path, &report.transition);
                po.field = f;
                po.has_field = true;
                valid.push_back(po.path);
                fields.push_back(f);
            }
            catch (const FieldError &)
            {
                ++report.field_errors;
            }
        }
        ur.summary = total_field(radio, cfg.bs, ur.ue, valid, fields, cfg.max_interactions);
    }
    report.timings.fields_s = seconds_since(t0);

    if (!cfg.out_dir.empty())
        emit_outputs(result, cfg, scene);
    return result;
}

// --- output emitters -------------------------------------------------------

std::string format_double(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace
{

void append_vec3(std::string &out, const Vec3 &v)
{
    out += '[';
    out += format_double(v[0]);
    out += ',';
    out += format_double(v[1]);
    out += ',';
    out += format_double(v[2]);
    out += ']';
}

std::string class_label(const InteractionList &candidate)
{
    const std::string sig = candidate.signature();
    return sig.empty() ? std::string("LOS") : sig;
}

void write_file(const std::filesystem::path &path, const std::string &content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open output file: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        throw std::runtime_error("failed writing output file: " + path.string());
}

std::string render_paths_json(const RunResult &result, const RunConfig &cfg)
{
    std::string out;
    out += "{\n\"bs\":";
    append_vec3(out, cfg.bs);
    out += ",\n\"ues\":[";
    for (std::size_t u = 0; u < result.ues.size(); ++u)
    {
        if (u)
            out += ',';
        append_vec3(out, result.ues[u].ue);
    }
    out += "],\n\"solver\":\"";
    out += to_string(cfg.solver);
    out += "\",\n\"max_interactions\":" + std::to_string(cfg.max_interactions);
    out += ",\n\"seed\":" + std::to_string(cfg.seed);
    out += ",\n\"frequency_hz\":" + format_double(cfg.frequency_hz);
    out += ",\n\"paths\":[";
    bool first = true;
    for (const UeResult &ur : result.ues)
    {
        for (const PathOutcome &po : ur.paths)
        {
            out += first ? "\n" : ",\n";
            first = false;
            out += "{\"ue_index\":" + std::to_string(po.ue_index);
            out += ",\"ordinal\":" + std::to_string(po.ordinal);
            out += ",\"interaction_list\":\"" + class_label(po.path.candidate) + "\"";
            out += ",\"elements\":[";
            for (std::size_t i = 0; i < po.path.candidate.items.size(); ++i)
            {
                const ElementRef &e = po.path.candidate.items[i];
                if (i)
                    out += ',';
                out += "{\"kind\":\"";
                out += e.kind == Interaction::Reflection ? 'R' : 'D';
                out += "\",\"id\":" + std::to_string(e.id) + "}";
            }
            out += "],\"status\":\"";
            out += to_string(po.path.status);
            out += "\",\"cost\":" + format_double(po.path.cost);
            out += ",\"length\":" + format_double(po.path.total_length());
            out += ",\"points\":[";
            for (std::size_t i = 0; i < po.path.points.size(); ++i)
            {
                if (i)
                    out += ',';
                append_vec3(out, po.path.points[i]);
            }
            out += "]}";
        }
    }
    out += first ? "]\n}\n" : "\n]\n}\n";
    return out;
}

std::string render_fields_csv(const RunResult &result)
{
    std::string out = "ue_index,ordinal,interaction_list,ex_re,ex_im,ey_re,ey_im,ez_re,ez_im,db\n";
    for (const UeResult &ur : result.ues)
    {
        for (const PathOutcome &po : ur.paths)
        {
            if (!po.has_field)
                continue;
            out += std::to_string(po.ue_index);
            out += ',' + std::to_string(po.ordinal);
            out += ',' + class_label(po.path.candidate);
            for (int c = 0; c < 3; ++c)
            {
                out += ',' + format_double(po.field[c].real());
                out += ',' + format_double(po.field[c].imag());
            }
            const double mag = po.field.norm();
            const double db = mag > 0.0 ? 20.0 * std::log10(mag / ur.summary.e_los)
                                        : -std::numeric_limits<double>::infinity();
            out += ',' + format_double(db);
            out += '\n';
        }
    }
    return out;
}

std::string render_classes_csv(const RunResult &result)
{
    const bool multi = result.ues.size() > 1;
    std::string out = multi ? "ue_index,interaction_list,n_paths,E_over_ELOS_dB\n"
                            : "interaction_list,n_paths,E_over_ELOS_dB\n";
    for (std::size_t u = 0; u < result.ues.size(); ++u)
    {
        for (const ClassRow &row : result.ues[u].summary.classes)
        {
            if (multi)
                out += std::to_string(u) + ',';
            out += row.label;
            out += ',' + std::to_string(row.n_paths);
            out += ',' + format_double(row.db);
            out += '\n';
        }
    }
    return out;
}

std::string render_polylines_csv(const RunResult &result)
{
    std::string out = "ue_index,ordinal,vertex,x,y,z\n";
    for (const UeResult &ur : result.ues)
    {
        for (const PathOutcome &po : ur.paths)
        {
            if (po.path.status != PathStatus::Valid)
                continue;
            for (std::size_t i = 0; i < po.path.points.size(); ++i)
            {
                out += std::to_string(po.ue_index);
                out += ',' + std::to_string(po.ordinal);
                out += ',' + std::to_string(i);
                out += ',' + format_double(po.path.points[i][0]);
                out += ',' + format_double(po.path.points[i][1]);
                out += ',' + format_double(po.path.points[i][2]);
                out += '\n';
            }
        }
    }
    return out;
}

} // namespace

void emit_outputs(const RunResult &result, const RunConfig &cfg, const Scene &scene)
{
    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "paths.json", render_paths_json(result, cfg));
    write_file(dir / "fields.csv", render_fields_csv(result));
    write_file(dir / "classes.csv", render_classes_csv(result));
    write_file(dir / "polylines.csv", render_polylines_csv(result));
    if (cfg.dump_graph)
    {
        const BinaryMatrix vis = build_visibility(scene, cfg.visibility);
        for (std::size_t u = 0; u < result.ues.size(); ++u)
        {
            const PropagationGraph graph = build_adjacency(vis, scene, cfg.bs, result.ues[u].ue, cfg.visibility);
            std::ostringstream name;
            name << "graph_ue" << u << ".csv";
            std::ofstream out(dir / name.str(), std::ios::binary);
            if (!out)
                throw std::runtime_error("cannot open output file: " + (dir / name.str()).string());
            write_graph_csv(graph, out);
        }
    }
}

} // namespace mptrace
