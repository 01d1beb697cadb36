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

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

namespace
{

constexpr int kExitConfig = 2;
constexpr int kExitScene = 3;

bool parse_triplet(const std::string &text, mptrace::Vec3 &out)
{
    double x = 0, y = 0, z = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), " %lf , %lf , %lf %c", &x, &y, &z, &tail) != 3)
        return false;
    out = mptrace::Vec3(x, y, z);
    return true;
}

void print_report(const mptrace::RunResult &result)
{
    const mptrace::RunReport &r = result.report;
    std::printf("candidates: %ld enumerated, %ld filtered by diffraction cap, %ld solved\n",
                r.candidates_enumerated, r.candidates_filtered, r.candidates_solved);
    std::printf("paths: %ld found, %ld valid (rejected: %ld containment, %ld obstruction, %ld degenerate)\n",
                r.paths_found, r.paths_valid, r.rejected_containment, r.rejected_obstruction,
                r.rejected_degenerate);
    if (r.image_unsolvable || r.image_not_applicable)
        std::printf("image method: %ld unsolvable, %ld not applicable\n", r.image_unsolvable,
                    r.image_not_applicable);
    if (r.field_errors)
        std::printf("field evaluations failed: %ld\n", r.field_errors);
    if (r.transition.evaluations)
        std::printf("transition function: %ld evaluations, max |F-1| = %s, max ||F|-1| = %s\n",
                    r.transition.evaluations, mptrace::format_double(r.transition.max_deviation).c_str(),
                    mptrace::format_double(r.transition.max_magnitude_deviation).c_str());
    std::printf("timings [s]: visibility %.3f, enumerate %.3f, solve %.3f, validate %.3f, fields %.3f\n",
                r.timings.visibility_s, r.timings.enumerate_s, r.timings.solve_s, r.timings.validate_s,
                r.timings.fields_s);
    for (std::size_t u = 0; u < result.ues.size(); ++u)
    {
        const mptrace::UeResult &ur = result.ues[u];
        std::printf("ue %zu at (%g, %g, %g): total %s dB relative to free space\n", u, ur.ue[0], ur.ue[1],
                    ur.ue[2], mptrace::format_double(ur.summary.total_db).c_str());
        for (const mptrace::ClassRow &row : ur.summary.classes)
            if (row.n_paths > 0)
                std::printf("  %-6s %3d path%s  %s dB\n", row.label.c_str(), row.n_paths,
                            row.n_paths == 1 ? " " : "s", mptrace::format_double(row.db).c_str());
    }
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"mptrace: deterministic image-based ray tracing with diffraction-aware path search"};

    std::string scene_path;
    std::string bs_text = "0,0,0";
    std::vector<std::string> ue_texts;
    std::string solver_text = "hybrid";
    std::string visibility_text = "sampled";
    mptrace::RunConfig cfg;

    app.add_option("--scene", scene_path, "Scene JSON file")->required();
    app.add_option("--bs", bs_text, "Transmitter position x,y,z");
    app.add_option("--ue", ue_texts, "Receiver position x,y,z (repeatable)")->required();
    app.add_option("--max-interactions", cfg.max_interactions, "Maximum interactions per path");
    app.add_option("--max-diffractions", cfg.max_diffractions,
                   "Maximum diffractions per path (default: no extra cap)");
    app.add_option("--solver", solver_text, "hybrid, mpt-parametric, mpt-cartesian or image-method");
    app.add_option("--restarts", cfg.restarts, "Multistart count (default: scene dependent)");
    app.add_option("--threshold", cfg.cost_threshold, "Residual cost acceptance threshold");
    app.add_option("--seed", cfg.seed, "Deterministic run seed");
    app.add_option("--freq-hz", cfg.frequency_hz, "Carrier frequency in Hz");
    app.add_option("--e0", cfg.e0, "Transmitter reference amplitude at 1 m");
    app.add_option("--visibility", visibility_text, "sampled or full");
    app.add_flag("--allow-revisits", cfg.allow_revisits, "Allow revisiting elements (non-consecutively)");
    app.add_option("--workers", cfg.workers, "Worker threads for candidate solving");
    app.add_option("--out-dir", cfg.out_dir, "Directory for paths.json, fields.csv, classes.csv, polylines.csv");
    app.add_flag("--dump-graph", cfg.dump_graph, "Also write the propagation graph adjacency per receiver");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    cfg.scene_path = scene_path;
    if (!parse_triplet(bs_text, cfg.bs))
    {
        std::fprintf(stderr, "error: --bs expects x,y,z\n");
        return kExitConfig;
    }
    for (const std::string &t : ue_texts)
    {
        mptrace::Vec3 ue;
        if (!parse_triplet(t, ue))
        {
            std::fprintf(stderr, "error: --ue expects x,y,z\n");
            return kExitConfig;
        }
        cfg.ues.push_back(ue);
    }
    if (auto kind = mptrace::solver_kind_from(solver_text))
        cfg.solver = *kind;
    else
    {
        std::fprintf(stderr, "error: unknown solver '%s'\n", solver_text.c_str());
        return kExitConfig;
    }
    if (visibility_text == "sampled")
        cfg.visibility = mptrace::VisibilityMode::Sampled;
    else if (visibility_text == "full")
        cfg.visibility = mptrace::VisibilityMode::Full;
    else
    {
        std::fprintf(stderr, "error: unknown visibility mode '%s'\n", visibility_text.c_str());
        return kExitConfig;
    }

    mptrace::Scene scene;
    try
    {
        scene = mptrace::load_scene(scene_path);
    }
    catch (const mptrace::SceneError &e)
    {
        std::fprintf(stderr, "scene error: %s\n", e.what());
        return kExitScene;
    }

    try
    {
        mptrace::validate_config(cfg);
        const mptrace::RunResult result = mptrace::run_pipeline(scene, cfg);
        print_report(result);
    }
    catch (const std::invalid_argument &e)
    {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    }
    catch (const std::exception &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
