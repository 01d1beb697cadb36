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

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace mptrace
{

using Complex = std::complex<double>;
using CVec3 = Eigen::Vector3cd;

struct FieldError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct RadioConfig
{
    double frequency_hz = 1e9;
    double e0 = 1.0;                 // 1 m reference amplitude of the transmitter
    Vec3 polarization_axis{0, 0, 1}; // polar axis defining the theta-hat reference
};

/// Free-space wavenumber k = 2*pi*f/c.
double wavenumber(const RadioConfig &cfg);

/**
 * Spherical-wave transmitter field at p: (E0/r) e^{-jkr} theta_hat, i.e. a
 * vertically polarized point source. theta_hat is the unit vector of
 * increasing polar angle measured from cfg.polarization_axis.
 */
CVec3 tx_field(const RadioConfig &cfg, const Vec3 &bs, const Vec3 &p);

/**
 * PEC specular reflection in the ray-fixed basis: the component along
 * e_perp = incident x normal flips sign (soft, -1), the in-plane component
 * keeps it (hard, +1) while rotating onto the reflected ray frame. Maps the
 * incident transverse field to the reflected one.
 */
Eigen::Matrix3cd reflection_dyadic(const Vec3 &incident_dir, const Vec3 &normal);

// --- Fresnel integrals and the transition function -----------------------

/// Fresnel cosine/sine integrals, C(x) = int_0^x cos(pi t^2 / 2) dt.
/// Maclaurin series below x = 3.25, rational (truncated asymptotic) auxiliary
/// functions above; max error ~5e-9.
double fresnel_c(double x);
double fresnel_s(double x);

/// Wedge transition function F(x) = 2j sqrt(x) e^{jx} int_{sqrt(x)}^inf e^{-j tau^2} d tau.
Complex transition_function(double x);

/// Accumulates how far transition-function evaluations stray from 1. The
/// complex deviation |F - 1| is dominated by the O(1/(2x)) phase term of the
/// large-argument expansion; the magnitude deviation ||F| - 1| decays as
/// O(1/x^2) and is the sharper witness that a run stays out of the
/// transition region.
struct TransitionStats
{
    double max_deviation = 0.0;           // max |F - 1|
    double max_magnitude_deviation = 0.0; // max ||F| - 1|
    long evaluations = 0;

    void record(const Complex &f)
    {
        max_deviation = std::max(max_deviation, std::abs(f - Complex(1.0, 0.0)));
        max_magnitude_deviation = std::max(max_magnitude_deviation, std::abs(std::abs(f) - 1.0));
        ++evaluations;
    }
};

/**
 * Wedge diffraction coefficients D_s, D_h (four-cotangent form with the
 * transition function). Angles phi/phi_p are measured from the reference face
 * in the plane normal to the edge; n_wedge = exterior angle / pi; L is the
 * spherical-wave distance parameter. With force_gtd the transition factors are
 * replaced by 1, giving the asymptotic Keller coefficient. Throws FieldError
 * on a shadow/reflection boundary (cotangent pole).
 */
struct WedgeCoefficients
{
    Complex ds{0.0, 0.0};
    Complex dh{0.0, 0.0};
};

WedgeCoefficients utd_coefficients(double k, double n_wedge, double phi, double phi_p, double sin_beta0, double L,
                                   TransitionStats *stats = nullptr, bool force_gtd = false);

/// Closed-form Keller coefficients (the F -> 1 limit), for cross-checking.
WedgeCoefficients keller_coefficients(double n_wedge, double phi, double phi_p, double sin_beta0, double k);

/**
 * Edge-fixed diffraction dyadic at point x on the edge, for the incident ray
 * arriving from x_prev (effective source distance r_in) and leaving toward
 * x_next: -D_s on the beta_0 components, -D_h on the phi components.
 */
Eigen::Matrix3cd diffraction_dyadic(const Scene &scene, const RadioConfig &cfg, const Edge &edge, const Vec3 &x_prev,
                                    const Vec3 &x, const Vec3 &x_next, double r_in, TransitionStats *stats = nullptr);

// --- Path propagation and totals ------------------------------------------

/**
 * Geometrical-optics / UTD field carried along a validated path to its end
 * point: transmitter spherical wave, PEC reflection dyadics with r/(r+s)
 * spreading on the unfolded distance, wedge dyadics with
 * sqrt(r/(s(r+s))) spreading (the edge re-anchors the spreading reference),
 * and e^{-jks} phase per segment.
 */
CVec3 propagate_path(const Scene &scene, const RadioConfig &cfg, const RayPath &path, TransitionStats *stats = nullptr);

struct ClassRow
{
    std::string label; // "LOS" or R/D signature
    int n_paths = 0;
    double db = 0.0;   // 20 log10(|E_class| / E_LOS); -inf when empty
};

struct FieldSummary
{
    CVec3 total{Complex(0, 0), Complex(0, 0), Complex(0, 0)};
    double e_los = 0.0;  // theoretical free-space magnitude at the BS-UE distance
    double total_db = 0.0;
    std::vector<ClassRow> classes; // LOS row, then all signatures by length and R<D order
};

/**
 * Coherent per-class and overall sums of the per-path fields, normalized by
 * the theoretical free-space magnitude at the BS-UE distance (whether or not
 * the direct path is blocked). Fields are summed in path order with
 * compensated accumulation so the result is bit-stable under re-partitioning.
 */
FieldSummary total_field(const RadioConfig &cfg, const Vec3 &bs, const Vec3 &ue, const std::vector<RayPath> &paths,
                         const std::vector<CVec3> &fields, int max_interactions);

} // namespace mptrace
