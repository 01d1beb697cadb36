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
#include "mptrace/reference_scenes.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace mptrace;
namespace fs = std::filesystem;

namespace
{

Scene quarter_wedge_scene()
{
    Scene scene;
    scene.facets.push_back(
        Facet::from_vertices(0, {Vec3(0, 0, 0), Vec3(-5, 0, 0), Vec3(-5, 0, 10), Vec3(0, 0, 10)}));
    scene.facets.push_back(
        Facet::from_vertices(1, {Vec3(0, 0, 0), Vec3(0, 0, 10), Vec3(0, -5, 10), Vec3(0, -5, 0)}));
    scene.edges.push_back(Edge::make_line(0, Vec3(0, 0, 0), Vec3(0, 0, 10), {0, 1}));
    scene.n_explicit_edges = 1;
    finalize_scene(scene);
    return scene;
}

RunConfig two_mirror_config()
{
    RunConfig cfg;
    cfg.bs = two_mirror_bs();
    cfg.ues = {two_mirror_ue()};
    cfg.max_interactions = 2;
    return cfg;
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const PathOutcome *find_valid(const UeResult &ur, const std::string &signature)
{
    for (const PathOutcome &po : ur.paths)
        if (po.path.status == PathStatus::Valid && po.path.candidate.signature() == signature)
            return &po;
    return nullptr;
}

} // namespace

TEST_SUITE("pipeline")
{

    TEST_CASE("inconsistent configurations are refused")
    {
        RunConfig ok = two_mirror_config();
        CHECK_NOTHROW(validate_config(ok));

        RunConfig c = ok;
        c.ues.clear();
        CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
        c = ok;
        c.max_interactions = -1;
        CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
        c = ok;
        c.max_diffractions = 3;
        CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
        c = ok;
        c.frequency_hz = 0.0;
        CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
        c = ok;
        c.workers = 0;
        CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
        c = ok;
        c.ues.push_back(c.bs);
        CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
    }

    TEST_CASE("solver names round-trip")
    {
        for (const char *name : {"mpt-parametric", "mpt-cartesian", "image-method", "hybrid"})
        {
            const auto kind = solver_kind_from(name);
            REQUIRE(kind.has_value());
            CHECK(to_string(*kind) == name);
        }
        CHECK_FALSE(solver_kind_from("newton").has_value());
    }

    TEST_CASE("free space gives exactly the direct path at 0 dB")
    {
        Scene scene;
        finalize_scene(scene);
        RunConfig cfg;
        cfg.bs = Vec3(0, 0, 0);
        cfg.ues = {Vec3(10, 0, 0)};
        cfg.max_interactions = 0;

        const RunResult r = run_pipeline(scene, cfg);
        CHECK(r.report.candidates_enumerated == 1);
        CHECK(r.report.candidates_solved == 1);
        CHECK(r.report.paths_found == 1);
        CHECK(r.report.paths_valid == 1);
        REQUIRE(r.ues.size() == 1);
        REQUIRE(r.ues[0].paths.size() == 1);
        CHECK(r.ues[0].paths[0].path.candidate.size() == 0);
        CHECK(r.ues[0].paths[0].has_field);
        CHECK(r.ues[0].summary.total_db == doctest::Approx(0.0).epsilon(1e-9));
        REQUIRE(r.ues[0].summary.classes.size() == 1);
        CHECK(r.ues[0].summary.classes[0].label == "LOS");
        CHECK(r.ues[0].summary.classes[0].n_paths == 1);
    }

    TEST_CASE("the double-mirror scene keeps one valid bounce pair")
    {
        // Sampled visibility prunes the direct link (the diagonal mirror cuts
        // it) and the single-bounce chain off the diagonal (the receiver sits
        // behind it), leaving the x = 5 bounce and the double bounce; the
        // former dies on obstruction, the latter survives.
        const Scene scene = make_two_mirror_scene();
        const RunConfig cfg = two_mirror_config();
        const RunResult r = run_pipeline(scene, cfg);

        CHECK(r.report.candidates_enumerated == 2);
        CHECK(r.report.candidates_solved == 2);
        CHECK(r.report.paths_found == 2);
        CHECK(r.report.paths_valid == 1);
        CHECK(r.report.rejected_obstruction == 1);
        CHECK(r.report.candidates_enumerated >= r.report.candidates_solved);
        CHECK(r.report.paths_found >= r.report.paths_valid);

        REQUIRE(r.ues.size() == 1);
        const PathOutcome *rr = find_valid(r.ues[0], "RR");
        REQUIRE(rr != nullptr);
        REQUIRE(rr->path.points.size() == 4);
        CHECK((rr->path.points[1] - Vec3(20.0 / 7.0, 20.0 / 7.0, 0)).norm() < 1e-9);
        CHECK((rr->path.points[2] - Vec3(5.0, 10.0 / 3.0, 0)).norm() < 1e-9);
        CHECK(rr->has_field);

        // Class table: only the double-bounce row is populated.
        for (const ClassRow &row : r.ues[0].summary.classes)
        {
            if (row.label == "RR")
            {
                CHECK(row.n_paths == 1);
                CHECK(std::isfinite(row.db));
            }
            else
            {
                CHECK(row.n_paths == 0);
                CHECK(std::isinf(row.db));
            }
        }
    }

    TEST_CASE("all solver kinds agree on the surviving geometry")
    {
        const Scene scene = make_two_mirror_scene();
        std::vector<Vec3> x1s, x2s;
        for (SolverKind kind : {SolverKind::Hybrid, SolverKind::ImageMethod, SolverKind::MptParametric,
                                SolverKind::MptCartesian})
        {
            RunConfig cfg = two_mirror_config();
            cfg.solver = kind;
            const RunResult r = run_pipeline(scene, cfg);
            CHECK(r.report.paths_valid == 1);
            const PathOutcome *rr = find_valid(r.ues[0], "RR");
            REQUIRE(rr != nullptr);
            x1s.push_back(rr->path.points[1]);
            x2s.push_back(rr->path.points[2]);
        }
        for (std::size_t i = 1; i < x1s.size(); ++i)
        {
            CHECK((x1s[i] - x1s[0]).norm() < 1e-6);
            CHECK((x2s[i] - x2s[0]).norm() < 1e-6);
        }
    }

    TEST_CASE("diffraction cap filters candidates before solving")
    {
        const Scene scene = quarter_wedge_scene();
        RunConfig cfg;
        cfg.bs = Vec3(-1, 1, 2);
        cfg.ues = {Vec3(1, 0.5, 8)};
        cfg.max_interactions = 1;

        const RunResult all = run_pipeline(scene, cfg);
        // Direct link, one facet bounce, one edge pass.
        CHECK(all.report.candidates_enumerated == 3);
        CHECK(all.report.candidates_filtered == 0);
        CHECK(all.report.paths_valid == 2); // LOS and the edge pass; the bounce lands off its facet
        CHECK(all.report.rejected_containment == 1);

        cfg.max_diffractions = 0;
        const RunResult capped = run_pipeline(scene, cfg);
        CHECK(capped.report.candidates_enumerated == 2);
        CHECK(capped.report.candidates_filtered == 1);
        CHECK(capped.report.paths_valid == 1);

        // The image method alone cannot handle the edge candidate.
        cfg.max_diffractions = -1;
        cfg.solver = SolverKind::ImageMethod;
        const RunResult img = run_pipeline(scene, cfg);
        CHECK(img.report.image_not_applicable == 1);
        CHECK(img.report.paths_valid == 1);
    }

    TEST_CASE("worker count never changes the outcome")
    {
        const Scene scene = quarter_wedge_scene();
        RunConfig cfg;
        cfg.bs = Vec3(-1, 1, 2);
        cfg.ues = {Vec3(1, 0.5, 8), Vec3(2, 2, 6)};
        cfg.max_interactions = 1;
        cfg.solver = SolverKind::MptParametric;

        RunConfig cfg8 = cfg;
        cfg8.workers = 8;
        const RunResult a = run_pipeline(scene, cfg);
        const RunResult b = run_pipeline(scene, cfg8);

        REQUIRE(a.ues.size() == b.ues.size());
        CHECK(a.report.paths_valid == b.report.paths_valid);
        for (std::size_t u = 0; u < a.ues.size(); ++u)
        {
            REQUIRE(a.ues[u].paths.size() == b.ues[u].paths.size());
            for (std::size_t i = 0; i < a.ues[u].paths.size(); ++i)
            {
                const PathOutcome &pa = a.ues[u].paths[i];
                const PathOutcome &pb = b.ues[u].paths[i];
                CHECK(pa.ordinal == pb.ordinal);
                CHECK(pa.path.status == pb.path.status);
                REQUIRE(pa.path.points.size() == pb.path.points.size());
                for (std::size_t p = 0; p < pa.path.points.size(); ++p)
                    CHECK(pa.path.points[p] == pb.path.points[p]); // bitwise
                CHECK(pa.field == pb.field);
            }
            CHECK(a.ues[u].summary.total == b.ues[u].summary.total);
        }
    }

    TEST_CASE("emitted files are byte-identical across reruns")
    {
        const Scene scene = make_two_mirror_scene();
        const fs::path base = fs::temp_directory_path() / "mptrace_pipeline_test";
        fs::remove_all(base);

        auto run_into = [&](const std::string &leaf, int workers) {
            RunConfig cfg = two_mirror_config();
            cfg.out_dir = (base / leaf).string();
            cfg.dump_graph = true;
            cfg.workers = workers;
            (void)run_pipeline(scene, cfg);
            return base / leaf;
        };
        const fs::path a = run_into("a", 1);
        const fs::path b = run_into("b", 1);
        const fs::path c = run_into("c", 8);

        const char *names[] = {"paths.json", "fields.csv", "classes.csv", "polylines.csv", "graph_ue0.csv"};
        for (const char *name : names)
        {
            CAPTURE(name);
            const std::string bytes = slurp(a / name);
            CHECK(bytes == slurp(b / name));
            CHECK(bytes == slurp(c / name));
            CHECK_FALSE(bytes.empty());
        }

        // Spot checks on the formats.
        const std::string fields = slurp(a / "fields.csv");
        CHECK(fields.rfind("ue_index,ordinal,interaction_list,ex_re,ex_im,ey_re,ey_im,ez_re,ez_im,db", 0) == 0);
        const std::string classes = slurp(a / "classes.csv");
        CHECK(classes.rfind("interaction_list,n_paths,E_over_ELOS_dB", 0) == 0);
        CHECK(classes.find("-inf") != std::string::npos);
        const std::string paths = slurp(a / "paths.json");
        CHECK(paths.find("\"RejectedObstruction\"") != std::string::npos);

        fs::remove_all(base);
    }

    TEST_CASE("float formatting is round-trip exact and stable")
    {
        CHECK(format_double(0.1) == "0.10000000000000001");
        CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
        CHECK(format_double(1.0) == "1");
        const double v = 20.0 / 7.0;
        CHECK(std::stod(format_double(v)) == v);
    }

} // TEST_SUITE("pipeline")
