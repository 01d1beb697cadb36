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

#include "mptrace/em.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>

using namespace mptrace;

namespace
{

// Wedge with the material in the quadrant (x < 0, y < 0): face 0 spans
// x in [-5, 0] on y = 0 (normal +y), face 1 spans y in [-5, 0] on x = 0
// (normal +x). The shared edge runs up the z axis; the air fills 270 degrees.
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

Scene ground_scene()
{
    Scene scene;
    scene.facets.push_back(
        Facet::from_vertices(0, {Vec3(-10, -10, 0), Vec3(10, -10, 0), Vec3(10, 10, 0), Vec3(-10, 10, 0)}));
    finalize_scene(scene);
    return scene;
}

double rel_err(const Complex &got, const Complex &want)
{
    return std::abs(got - want) / std::max(1e-30, std::abs(want));
}

} // namespace

TEST_SUITE("em")
{

    TEST_CASE("fresnel integrals match the quadrature table")
    {
        // Reference values from 40-digit quadrature of int_0^x cos/sin(pi t^2/2).
        const struct
        {
            double x, c, s;
        } table[] = {
            {0.1, 0.09999753262708506805, 0.0005235895476122105995},
            {0.5, 0.4923442258714463929, 0.06473243285999927761},
            {1.0, 0.7798934003768228295, 0.4382591473903547661},
            {2.0, 0.4882534060753407545, 0.3434156783636982422},
            {3.0, 0.6057207892976856296, 0.4963129989673750361},
            {3.2, 0.4663203469520374498, 0.5933494646186034954},
            {3.25, 0.4263386555980207706, 0.5642211995671412957},
            {3.3, 0.4056944037062584422, 0.5192860849820629086},
            {5.0, 0.5636311887040122311, 0.4991913819171168868},
            {10.0, 0.4998986942055157236, 0.4681699785848822404},
        };
        for (const auto &row : table)
        {
            CAPTURE(row.x);
            CHECK(std::abs(fresnel_c(row.x) - row.c) < 2e-8);
            CHECK(std::abs(fresnel_s(row.x) - row.s) < 2e-8);
        }
    }

    TEST_CASE("fresnel integrals are odd and vanish at zero")
    {
        CHECK(fresnel_c(0.0) == 0.0);
        CHECK(fresnel_s(0.0) == 0.0);
        for (double x : {0.3, 1.7, 4.2})
        {
            CHECK(fresnel_c(-x) == doctest::Approx(-fresnel_c(x)).epsilon(1e-15));
            CHECK(fresnel_s(-x) == doctest::Approx(-fresnel_s(x)).epsilon(1e-15));
        }
        // The series/asymptotic handover stays continuous.
        CHECK(std::abs(fresnel_c(3.25 - 1e-9) - fresnel_c(3.25 + 1e-9)) < 2e-8);
        CHECK(std::abs(fresnel_s(3.25 - 1e-9) - fresnel_s(3.25 + 1e-9)) < 2e-8);
    }

    TEST_CASE("transition function matches the quadrature table")
    {
        const struct
        {
            double x, re, im;
        } table[] = {
            {0.001, 0.03959495322623571093, 0.03767288695912908791},
            {0.01, 0.1242051857737636747, 0.1065789737918827829},
            {0.1, 0.3681035678004820388, 0.2344529622924730442},
            {0.3, 0.5717132383007475858, 0.2729915465634244646},
            {1.0, 0.8095254817474088444, 0.2321993900552646057},
            {3.0, 0.9472422587410705527, 0.132578261830626453},
            {5.52, 0.9798105289620109809, 0.08253226250938498081},
            {10.0, 0.9930411270116263372, 0.04835149556165434733},
            {16.6, 0.9973580165357663819, 0.029731501458947892},
            {30.0, 0.9991745568264292346, 0.01659839231701910386},
        };
        for (const auto &row : table)
        {
            CAPTURE(row.x);
            CHECK(rel_err(transition_function(row.x), Complex(row.re, row.im)) < 1e-7);
        }
    }

    TEST_CASE("transition function limits and domain")
    {
        CHECK(std::abs(transition_function(0.0)) == 0.0);
        CHECK(std::abs(transition_function(1000.0) - Complex(1.0, 0.0)) < 1e-3);
        CHECK_THROWS_AS((void)transition_function(-0.1), FieldError);
        TransitionStats stats;
        stats.record(transition_function(1000.0));
        CHECK(stats.evaluations == 1);
        CHECK(stats.max_deviation < 1e-3);
        stats.record(transition_function(0.5));
        CHECK(stats.evaluations == 2);
        CHECK(stats.max_deviation > 0.2);
    }

    TEST_CASE("transmitter field is a polarized spherical wave")
    {
        const RadioConfig cfg;
        const double k = wavenumber(cfg);
        CHECK(k == doctest::Approx(2.0 * std::numbers::pi * 1e9 / 299792458.0).epsilon(1e-15));

        // On the equator of the default vertical axis the field points -z.
        const double r = 5.0;
        const CVec3 e = tx_field(cfg, Vec3(0, 0, 0), Vec3(r, 0, 0));
        CHECK(std::abs(e[0]) < 1e-15);
        CHECK(std::abs(e[1]) < 1e-15);
        const Complex expected = -(cfg.e0 / r) * std::exp(Complex(0.0, -k * r));
        CHECK(std::abs(e[2] - expected) < 1e-12);

        // Generic direction: magnitude E0/r, transverse, in the meridian plane.
        const Vec3 p(3, -2, 4);
        const Vec3 s = p.normalized();
        const CVec3 g = tx_field(cfg, Vec3(0, 0, 0), p);
        CHECK(g.norm() == doctest::Approx(cfg.e0 / p.norm()).epsilon(1e-12));
        CHECK(std::abs(g.dot(s.cast<Complex>())) < 1e-12);
        // No component out of the plane spanned by the axis and the ray.
        const Vec3 out_of_plane = cfg.polarization_axis.cross(s).normalized();
        CHECK(std::abs(g.dot(out_of_plane.cast<Complex>())) < 1e-12);

        // On the axis the polar direction is undefined; the fallback still
        // returns a transverse wave of the right strength.
        const CVec3 pole = tx_field(cfg, Vec3(0, 0, 0), Vec3(0, 0, 2));
        CHECK(pole.norm() == doctest::Approx(cfg.e0 / 2.0).epsilon(1e-12));
        CHECK(std::abs(pole[2]) < 1e-12);
    }

    TEST_CASE("reflection dyadic flips the perpendicular component only")
    {
        const Vec3 n(0, 0, 1);
        const Vec3 d = Vec3(1, 0, -1).normalized();
        const Eigen::Matrix3cd m = reflection_dyadic(d, n);

        const Vec3 e_perp = d.cross(n).normalized();
        const Vec3 e_par_i = d.cross(e_perp);
        const Vec3 refl = d - 2.0 * d.dot(n) * n;
        const Vec3 e_par_r = refl.cross(e_perp);

        CHECK((m * e_perp.cast<Complex>() + e_perp.cast<Complex>()).norm() < 1e-14);
        CHECK((m * e_par_i.cast<Complex>() - e_par_r.cast<Complex>()).norm() < 1e-14);
        // The longitudinal component is annihilated, transverse norms kept.
        CHECK((m * d.cast<Complex>()).norm() < 1e-14);
        const CVec3 mix = m * (0.3 * e_perp + 0.8 * e_par_i).cast<Complex>();
        CHECK(mix.norm() == doctest::Approx(Vec3(0.3 * e_perp + 0.8 * e_par_i).norm()).epsilon(1e-13));
    }

    TEST_CASE("normal incidence reflection negates the transverse field")
    {
        const Vec3 n(0, 0, 1);
        const Eigen::Matrix3cd m = reflection_dyadic(Vec3(0, 0, -1), n);
        for (const Vec3 &v : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0.6, -0.8, 0)})
            CHECK((m * v.cast<Complex>() + v.cast<Complex>()).norm() < 1e-14);
    }

    TEST_CASE("grazing incidence has no transverse frame")
    {
        CHECK_THROWS_AS((void)reflection_dyadic(Vec3(1, 0, 0), Vec3(0, 0, 1)), FieldError);
    }

    TEST_CASE("transition-tempered coefficients reduce to the closed asymptotic form")
    {
        const double k = 20.0;
        for (double n : {1.5, 2.0, 1.2})
            for (double phi_p : {0.3, 0.9})
                for (double phi : {1.3, 2.2})
                    for (double sb : {1.0, 0.7})
                    {
                        CAPTURE(n);
                        CAPTURE(phi);
                        CAPTURE(phi_p);
                        const WedgeCoefficients gtd = utd_coefficients(k, n, phi, phi_p, sb, 2.0, nullptr, true);
                        const WedgeCoefficients closed = keller_coefficients(n, phi, phi_p, sb, k);
                        CHECK(rel_err(gtd.ds, closed.ds) < 1e-12);
                        CHECK(rel_err(gtd.dh, closed.dh) < 1e-12);
                    }
    }

    TEST_CASE("diffraction coefficients are reciprocal in the two angles")
    {
        const WedgeCoefficients a = utd_coefficients(30.0, 1.5, 2.1, 0.4, 0.9, 1.5);
        const WedgeCoefficients b = utd_coefficients(30.0, 1.5, 0.4, 2.1, 0.9, 1.5);
        CHECK(rel_err(a.ds, b.ds) < 1e-13);
        CHECK(rel_err(a.dh, b.dh) < 1e-13);
    }

    TEST_CASE("coefficients blow up only on shadow and reflection boundaries")
    {
        // phi = phi_p + pi: incident shadow boundary.
        CHECK_THROWS_AS((void)utd_coefficients(30.0, 1.5, 0.4 + std::numbers::pi, 0.4, 1.0, 1.5), FieldError);
        // phi + phi_p = pi: reflection boundary of the reference face.
        CHECK_THROWS_AS((void)utd_coefficients(30.0, 1.5, std::numbers::pi - 0.4, 0.4, 1.0, 1.5), FieldError);
        // Nearby interior angles evaluate fine.
        CHECK_NOTHROW((void)utd_coefficients(30.0, 1.5, 0.4 + std::numbers::pi - 0.05, 0.4, 1.0, 1.5));
        // Invalid distance parameter.
        CHECK_THROWS_AS((void)utd_coefficients(30.0, 1.5, 2.1, 0.4, 1.0, -1.0), FieldError);
    }

    TEST_CASE("each coefficient evaluation records four transition samples")
    {
        TransitionStats stats;
        (void)utd_coefficients(30.0, 1.5, 2.1, 0.4, 0.9, 1.5, &stats);
        CHECK(stats.evaluations == 4);
        CHECK(stats.max_deviation > 0.0);
    }

    TEST_CASE("diffraction dyadic maps onto the outgoing transverse frame")
    {
        const Scene scene = quarter_wedge_scene();
        const RadioConfig cfg;
        const Edge &edge = scene.edges[0];
        const Vec3 x_prev(-1, 1, 2), x(0, 0, 5), x_next(1, 0.5, 8);
        const double r_in = (x - x_prev).norm();
        const Eigen::Matrix3cd d = diffraction_dyadic(scene, cfg, edge, x_prev, x, x_next, r_in);

        const Vec3 s_out = (x_next - x).normalized();
        for (const Vec3 &v : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)})
            CHECK(std::abs((d * v.cast<Complex>()).dot(s_out.cast<Complex>())) < 1e-13);

        // Reversing the stored edge direction must not change the physics.
        Scene flipped = quarter_wedge_scene();
        flipped.edges[0] = Edge::make_line(0, Vec3(0, 0, 10), Vec3(0, 0, 0), {0, 1});
        const Eigen::Matrix3cd d2 =
            diffraction_dyadic(flipped, cfg, flipped.edges[0], x_prev, x, x_next, r_in);
        CHECK((d - d2).norm() < 1e-12);
    }

    TEST_CASE("field along the edge takes the soft coefficient")
    {
        // Normal incidence on the vertical edge: the edge-parallel (z)
        // component must come back scaled by exactly -D_s along the new
        // beta_0 direction, which is again +/- z.
        const Scene scene = quarter_wedge_scene();
        const RadioConfig cfg;
        const Edge &edge = scene.edges[0];
        const Vec3 x_prev(-1, 1, 5), x(0, 0, 5), x_next(1, 0.5, 5);
        const double r_in = (x - x_prev).norm();
        const Eigen::Matrix3cd d = diffraction_dyadic(scene, cfg, edge, x_prev, x, x_next, r_in);

        const CVec3 out = d * CVec3(Complex(0, 0), Complex(0, 0), Complex(1, 0));
        CHECK(std::abs(out[0]) < 1e-13);
        CHECK(std::abs(out[1]) < 1e-13);

        // Same scalar through the angle formulas: phi' = atan2(1,1), phi
        // measured from face 0 toward the air side.
        const double k = wavenumber(cfg);
        const double s = (x_next - x).norm();
        const double L = r_in * s / (r_in + s);
        const double phi_p = std::atan2(1.0, 1.0);
        const double phi = std::atan2(0.5, -1.0);
        const WedgeCoefficients wc = utd_coefficients(k, 1.5, phi, phi_p, 1.0, L);
        CHECK(rel_err(std::abs(out[2]), std::abs(wc.ds)) < 1e-12);
    }

    TEST_CASE("line-of-sight propagation is the transmitter field")
    {
        const Scene scene = ground_scene();
        const RadioConfig cfg;
        RayPath p;
        p.points = {Vec3(0, 0, 1), Vec3(4, 0, 3)};
        const CVec3 e = propagate_path(scene, cfg, p);
        const CVec3 want = tx_field(cfg, Vec3(0, 0, 1), Vec3(4, 0, 3));
        CHECK((e - want).norm() < 1e-14);
        CHECK(e.norm() == doctest::Approx(cfg.e0 / (Vec3(4, 0, 2)).norm()).epsilon(1e-12));
    }

    TEST_CASE("single ground bounce carries the image-distance spreading")
    {
        const Scene scene = ground_scene();
        const RadioConfig cfg;
        const double k = wavenumber(cfg);
        RayPath p;
        p.points = {Vec3(0, 0, 1), Vec3(2, 0, 0), Vec3(4, 0, 1)};
        p.candidate.items.push_back({Interaction::Reflection, 0});
        const CVec3 e = propagate_path(scene, cfg, p);

        // Hand-built expectation: the unfolded distance is 2*sqrt(5); the
        // incident polar unit vector is the in-plane parallel component, so
        // the bounce rotates it onto the reflected parallel direction.
        const double d_tot = 2.0 * std::sqrt(5.0);
        const Vec3 dir_r = Vec3(1, 0, -2).normalized() * (cfg.e0 / d_tot);
        const CVec3 want = std::exp(Complex(0.0, -k * d_tot)) * dir_r.cast<Complex>();
        CHECK((e - want).norm() < 1e-12);
        CHECK(e.norm() == doctest::Approx(cfg.e0 / d_tot).epsilon(1e-12));
    }

    TEST_CASE("diffraction propagation chains the dyadic with conical spreading")
    {
        const Scene scene = quarter_wedge_scene();
        const RadioConfig cfg;
        const double k = wavenumber(cfg);
        const Vec3 bs(-1, 1, 2), x(0, 0, 5), ue(1, 0.5, 8);
        RayPath p;
        p.points = {bs, x, ue};
        p.candidate.items.push_back({Interaction::Diffraction, 0});
        const CVec3 e = propagate_path(scene, cfg, p);

        const double r = (x - bs).norm();
        const double s = (ue - x).norm();
        const CVec3 at_edge = tx_field(cfg, bs, x);
        const Eigen::Matrix3cd d = diffraction_dyadic(scene, cfg, scene.edges[0], bs, x, ue, r);
        const CVec3 want =
            (d * at_edge) * std::sqrt(r / (s * (r + s))) * std::exp(Complex(0.0, -k * s));
        CHECK((e - want).norm() < 1e-14);
    }

    TEST_CASE("reflection then diffraction re-anchors the spreading reference")
    {
        // Bounce off the ground plane y = ... reuse the wedge scene plus a
        // floor far enough below the wedge to keep the bounce clear of it.
        Scene scene = quarter_wedge_scene();
        scene.facets.push_back(Facet::from_vertices(
            2, {Vec3(-20, -20, -4), Vec3(20, -20, -4), Vec3(20, 20, -4), Vec3(-20, 20, -4)}));
        finalize_scene(scene);
        const RadioConfig cfg;
        const double k = wavenumber(cfg);

        const Vec3 bs(-3, 2, 0), xr(-2, 1.75, -4), xd(0, 0, 5), ue(1, 0.5, 8);
        RayPath p;
        p.points = {bs, xr, xd, ue};
        p.candidate.items.push_back({Interaction::Reflection, 2});
        p.candidate.items.push_back({Interaction::Diffraction, 0});
        const CVec3 e = propagate_path(scene, cfg, p);

        const double r1 = (xr - bs).norm();
        const double s1 = (xd - xr).norm();
        const double s2 = (ue - xd).norm();
        CVec3 field = tx_field(cfg, bs, xr);
        field = reflection_dyadic((xr - bs).normalized(), scene.facets[2].plane_normal()) * field;
        field *= (r1 / (r1 + s1)) * std::exp(Complex(0.0, -k * s1));
        // The edge sees a source at the unfolded distance r1 + s1.
        field = diffraction_dyadic(scene, cfg, scene.edges[0], xr, xd, ue, r1 + s1) * field;
        field *= std::sqrt((r1 + s1) / (s2 * (r1 + s1 + s2))) * std::exp(Complex(0.0, -k * s2));
        CHECK((e - field).norm() < 1e-14);
    }

    TEST_CASE("per-class totals and labels follow the interaction table")
    {
        const RadioConfig cfg; // e0 = 1
        const Vec3 bs(0, 0, 0), ue(10, 0, 0);

        RayPath los;
        los.points = {bs, ue};
        RayPath refl;
        refl.points = {bs, Vec3(5, 0, 2), ue};
        refl.candidate.items.push_back({Interaction::Reflection, 0});

        // e_los = e0 / 10. The direct path carries exactly that, the bounce
        // half of it.
        const std::vector<RayPath> paths = {los, refl};
        const std::vector<CVec3> fields = {CVec3(Complex(0, 0), Complex(0, 0), Complex(0.1, 0)),
                                           CVec3(Complex(0, 0), Complex(0.05, 0), Complex(0, 0))};
        const FieldSummary sum = total_field(cfg, bs, ue, paths, fields, 2);

        CHECK(sum.e_los == doctest::Approx(0.1).epsilon(1e-15));
        REQUIRE(sum.classes.size() == 7);
        CHECK(sum.classes[0].label == "LOS");
        CHECK(sum.classes[1].label == "R");
        CHECK(sum.classes[2].label == "D");
        CHECK(sum.classes[3].label == "RR");
        CHECK(sum.classes[4].label == "RD");
        CHECK(sum.classes[5].label == "DR");
        CHECK(sum.classes[6].label == "DD");

        CHECK(sum.classes[0].n_paths == 1);
        CHECK(sum.classes[0].db == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(sum.classes[1].n_paths == 1);
        CHECK(sum.classes[1].db == doctest::Approx(20.0 * std::log10(0.5)).epsilon(1e-12));
        CHECK(sum.classes[2].n_paths == 0);
        CHECK(std::isinf(sum.classes[2].db));
        CHECK(sum.classes[2].db < 0.0);

        const double want_total = std::hypot(0.1, 0.05) / 0.1;
        CHECK(sum.total_db == doctest::Approx(20.0 * std::log10(want_total)).epsilon(1e-12));
    }

    TEST_CASE("total field rejects inconsistent inputs")
    {
        const RadioConfig cfg;
        RayPath los;
        los.points = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
        CHECK_THROWS_AS((void)total_field(cfg, Vec3(0, 0, 0), Vec3(1, 0, 0), {los}, {}, 1), FieldError);
        CHECK_THROWS_AS((void)total_field(cfg, Vec3(0, 0, 0), Vec3(0, 0, 0), {}, {}, 1), FieldError);
        RayPath deep;
        deep.points = {Vec3(0, 0, 0), Vec3(0.5, 1, 0), Vec3(1, 0, 0)};
        deep.candidate.items.push_back({Interaction::Reflection, 0});
        const std::vector<CVec3> f = {CVec3::Zero()};
        CHECK_THROWS_AS((void)total_field(cfg, Vec3(0, 0, 0), Vec3(1, 0, 0), {deep}, f, 0), FieldError);
    }

} // TEST_SUITE("em")
