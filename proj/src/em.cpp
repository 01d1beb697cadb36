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

#include <algorithm>
#include <cmath>
#include <limits>

namespace mptrace
{

namespace
{

constexpr double kPi = 3.14159265358979323846;
constexpr double kSpeedOfLight = 299792458.0;
// Cotangent pole tolerance: |sin| below this means the ray sits on a shadow
// or reflection boundary where the coefficient is singular.
constexpr double kBoundaryTol = 1e-9;
constexpr double kDirTol = 1e-12;

const Complex kJ{0.0, 1.0};

// Compensated complex-vector accumulator; addition order is fixed by the
// caller so totals are bit-stable.
struct KahanVec3
{
    double sum[6] = {0, 0, 0, 0, 0, 0};
    double comp[6] = {0, 0, 0, 0, 0, 0};

    void add(const CVec3 &v)
    {
        const double parts[6] = {v[0].real(), v[0].imag(), v[1].real(),
                                 v[1].imag(), v[2].real(), v[2].imag()};
        for (int i = 0; i < 6; ++i)
        {
            const double y = parts[i] - comp[i];
            const double t = sum[i] + y;
            comp[i] = (t - sum[i]) - y;
            sum[i] = t;
        }
    }

    CVec3 value() const
    {
        CVec3 v;
        v[0] = Complex(sum[0], sum[1]);
        v[1] = Complex(sum[2], sum[3]);
        v[2] = Complex(sum[4], sum[5]);
        return v;
    }
};

// Fresnel integrals by Maclaurin series, accurate for small |x|.
void fresnel_series(double x, double &c, double &s)
{
    const double u = 0.5 * kPi * x * x;
    const double u2 = u * u;
    double term_c = 1.0; // u^{2m} / (2m)!
    double term_s = u;   // u^{2m+1} / (2m+1)!
    double sum_c = term_c; // term / (4m+1) with m = 0
    double sum_s = term_s / 3.0;
    for (int m = 1; m < 60; ++m)
    {
        term_c *= -u2 / ((2.0 * m - 1.0) * (2.0 * m));
        term_s *= -u2 / ((2.0 * m) * (2.0 * m + 1.0));
        sum_c += term_c / (4.0 * m + 1.0);
        sum_s += term_s / (4.0 * m + 3.0);
        if (std::abs(term_c) < 1e-18 && std::abs(term_s) < 1e-18)
            break;
    }
    c = x * sum_c;
    s = x * sum_s;
}

// Auxiliary functions f, g by their (divergent) asymptotic series, truncated
// at the smallest term; accurate for large x.
void fresnel_aux_asymptotic(double x, double &f, double &g)
{
    const double w = 1.0 / (kPi * x * x); // 1/(pi x^2)
    const double w2 = w * w;
    double term_f = 1.0; // (4m-1)!! / (pi x^2)^{2m}
    double term_g = w;   // (4m+1)!! / (pi x^2)^{2m+1}
    double sum_f = term_f;
    double sum_g = term_g;
    double sign = 1.0;
    for (int m = 1; m < 30; ++m)
    {
        const double next_f = term_f * (4.0 * m - 3.0) * (4.0 * m - 1.0) * w2;
        const double next_g = term_g * (4.0 * m - 1.0) * (4.0 * m + 1.0) * w2;
        if (next_f >= term_f || next_g >= term_g)
            break; // divergence onset
        term_f = next_f;
        term_g = next_g;
        sign = -sign;
        sum_f += sign * term_f;
        sum_g += sign * term_g;
        if (term_f < 1e-18 && term_g < 1e-18)
            break;
    }
    f = sum_f / (kPi * x);
    g = sum_g / (kPi * x);
}

constexpr double kFresnelSplit = 3.25;

// f, g such that C = 1/2 + f sin(phi) - g cos(phi), S = 1/2 - f cos(phi) - g sin(phi)
// with phi = pi x^2 / 2.
void fresnel_aux(double x, double &f, double &g)
{
    if (x > kFresnelSplit)
    {
        fresnel_aux_asymptotic(x, f, g);
        return;
    }
    double c = 0.0, s = 0.0;
    fresnel_series(x, c, s);
    const double phi = 0.5 * kPi * x * x;
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);
    f = (0.5 - s) * cp - (0.5 - c) * sp;
    g = (0.5 - c) * cp + (0.5 - s) * sp;
}

double cotangent(double a)
{
    return std::cos(a) / std::sin(a);
}

double wrap_2pi(double a)
{
    a = std::fmod(a, 2.0 * kPi);
    if (a < 0.0)
        a += 2.0 * kPi;
    return a;
}

} // namespace

double wavenumber(const RadioConfig &cfg)
{
    if (!(cfg.frequency_hz > 0.0))
        throw FieldError("frequency must be positive");
    return 2.0 * kPi * cfg.frequency_hz / kSpeedOfLight;
}

double fresnel_c(double x)
{
    const double ax = std::abs(x);
    double v = 0.0;
    if (ax <= kFresnelSplit)
    {
        double c = 0.0, s = 0.0;
        fresnel_series(ax, c, s);
        v = c;
    }
    else
    {
        double f = 0.0, g = 0.0;
        fresnel_aux_asymptotic(ax, f, g);
        const double phi = 0.5 * kPi * ax * ax;
        v = 0.5 + f * std::sin(phi) - g * std::cos(phi);
    }
    return x < 0.0 ? -v : v;
}

double fresnel_s(double x)
{
    const double ax = std::abs(x);
    double v = 0.0;
    if (ax <= kFresnelSplit)
    {
        double c = 0.0, s = 0.0;
        fresnel_series(ax, c, s);
        v = s;
    }
    else
    {
        double f = 0.0, g = 0.0;
        fresnel_aux_asymptotic(ax, f, g);
        const double phi = 0.5 * kPi * ax * ax;
        v = 0.5 - f * std::cos(phi) - g * std::sin(phi);
    }
    return x < 0.0 ? -v : v;
}

Complex transition_function(double x)
{
    if (x < 0.0)
        throw FieldError("transition function argument must be non-negative");
    if (x == 0.0)
        return Complex(0.0, 0.0);
    // F(x) = sqrt(2 pi x) (f(u) + j g(u)) with u = sqrt(2x/pi); the explicit
    // e^{jx} phase cancels against the Fresnel remainder's carrier.
    const double u = std::sqrt(2.0 * x / kPi);
    double f = 0.0, g = 0.0;
    fresnel_aux(u, f, g);
    return std::sqrt(2.0 * kPi * x) * Complex(f, g);
}

CVec3 tx_field(const RadioConfig &cfg, const Vec3 &bs, const Vec3 &p)
{
    const Vec3 rv = p - bs;
    const double r = rv.norm();
    if (r < kDirTol)
        throw FieldError("field point coincides with the transmitter");
    const Vec3 s_hat = rv / r;
    Vec3 axis = cfg.polarization_axis;
    const double an = axis.norm();
    if (an < kDirTol)
        throw FieldError("polarization axis must be non-zero");
    axis /= an;
    const double cos_t = s_hat.dot(axis);
    Vec3 theta_hat = cos_t * s_hat - axis;
    const double tn = theta_hat.norm();
    if (tn < 1e-9)
        theta_hat = any_orthonormal(s_hat); // polar direction: theta-hat degenerates
    else
        theta_hat /= tn;
    const Complex amp = (cfg.e0 / r) * std::polar(1.0, -wavenumber(cfg) * r);
    return amp * theta_hat.cast<Complex>();
}

Eigen::Matrix3cd reflection_dyadic(const Vec3 &incident_dir, const Vec3 &normal)
{
    Vec3 si = incident_dir;
    const double sn = si.norm();
    if (sn < kDirTol)
        throw FieldError("degenerate incident direction");
    si /= sn;
    Vec3 n = normal;
    const double nn = n.norm();
    if (nn < kDirTol)
        throw FieldError("degenerate surface normal");
    n /= nn;
    const double cos_inc = si.dot(n);
    if (std::abs(cos_inc) < kBoundaryTol)
        throw FieldError("grazing incidence on a reflecting facet");
    const Vec3 sr = si - 2.0 * cos_inc * n;
    Vec3 e_perp = si.cross(n);
    const double pn = e_perp.norm();
    if (pn < 1e-9)
        e_perp = any_orthonormal(n); // normal incidence: any transverse axis works
    else
        e_perp /= pn;
    const Vec3 e_par_i = si.cross(e_perp);
    const Vec3 e_par_r = sr.cross(e_perp);
    Eigen::Matrix3d m = -e_perp * e_perp.transpose() + e_par_r * e_par_i.transpose();
    return m.cast<Complex>();
}

WedgeCoefficients utd_coefficients(double k, double n_wedge, double phi, double phi_p, double sin_beta0, double L,
                                   TransitionStats *stats, bool force_gtd)
{
    if (!(k > 0.0) || !(n_wedge > 0.0) || !(sin_beta0 > kBoundaryTol))
        throw FieldError("invalid wedge parameters");
    if (!force_gtd && !(L > 0.0))
        throw FieldError("distance parameter must be positive");

    const Complex pref =
        -std::polar(1.0, -kPi / 4.0) / (2.0 * n_wedge * std::sqrt(2.0 * kPi * k) * sin_beta0);

    auto term_pair = [&](double beta) -> Complex {
        const double arg_p = (kPi + beta) / (2.0 * n_wedge);
        const double arg_m = (kPi - beta) / (2.0 * n_wedge);
        if (std::abs(std::sin(arg_p)) < kBoundaryTol || std::abs(std::sin(arg_m)) < kBoundaryTol)
            throw FieldError("ray lies on a shadow or reflection boundary");
        Complex fp{1.0, 0.0}, fm{1.0, 0.0};
        if (!force_gtd)
        {
            const double np = std::round((beta + kPi) / (2.0 * kPi * n_wedge));
            const double nm = std::round((beta - kPi) / (2.0 * kPi * n_wedge));
            const double cp = std::cos((2.0 * kPi * n_wedge * np - beta) / 2.0);
            const double cm = std::cos((2.0 * kPi * n_wedge * nm - beta) / 2.0);
            fp = transition_function(2.0 * k * L * cp * cp);
            fm = transition_function(2.0 * k * L * cm * cm);
            if (stats != nullptr)
            {
                stats->record(fp);
                stats->record(fm);
            }
        }
        return cotangent(arg_p) * fp + cotangent(arg_m) * fm;
    };

    const Complex tm = term_pair(phi - phi_p);
    const Complex tp = term_pair(phi + phi_p);
    WedgeCoefficients d;
    d.ds = pref * (tm - tp);
    d.dh = pref * (tm + tp);
    return d;
}

WedgeCoefficients keller_coefficients(double n_wedge, double phi, double phi_p, double sin_beta0, double k)
{
    if (!(k > 0.0) || !(n_wedge > 0.0) || !(sin_beta0 > kBoundaryTol))
        throw FieldError("invalid wedge parameters");
    const Complex pref =
        std::polar(1.0, -kPi / 4.0) * std::sin(kPi / n_wedge) / (n_wedge * std::sqrt(2.0 * kPi * k) * sin_beta0);
    const double cn = std::cos(kPi / n_wedge);
    const double dm = cn - std::cos((phi - phi_p) / n_wedge);
    const double dp = cn - std::cos((phi + phi_p) / n_wedge);
    if (std::abs(dm) < kBoundaryTol || std::abs(dp) < kBoundaryTol)
        throw FieldError("ray lies on a shadow or reflection boundary");
    WedgeCoefficients d;
    d.ds = pref * (1.0 / dm - 1.0 / dp);
    d.dh = pref * (1.0 / dm + 1.0 / dp);
    return d;
}

Eigen::Matrix3cd diffraction_dyadic(const Scene &scene, const RadioConfig &cfg, const Edge &edge, const Vec3 &x_prev,
                                    const Vec3 &x, const Vec3 &x_next, double r_in, TransitionStats *stats)
{
    const Vec3 in_vec = x - x_prev;
    const Vec3 out_vec = x_next - x;
    const double in_len = in_vec.norm();
    const double out_len = out_vec.norm();
    if (in_len < kDirTol || out_len < kDirTol)
        throw FieldError("degenerate segment at a diffracting edge");
    const Vec3 sp_hat = in_vec / in_len;
    const Vec3 s_hat = out_vec / out_len;
    const Vec3 e_hat = edge.direction_at(x);

    const Vec3 cross_sp = e_hat.cross(sp_hat);
    const Vec3 cross_s = e_hat.cross(s_hat);
    const double sin_b0_in = cross_sp.norm();
    const double sin_b0_out = cross_s.norm();
    if (sin_b0_in < kBoundaryTol || sin_b0_out < kBoundaryTol)
        throw FieldError("ray grazes along the diffracting edge");

    // Reference-face frame: t0 in the first parent facet pointing away from
    // the edge, m0 along its outward normal; the exterior wedge spans
    // [0, n_wedge * pi] from t0 toward m0.
    const Facet &face0 = scene.facets.at(static_cast<std::size_t>(edge.parents[0]));
    Vec3 m0 = face0.normal_at(x);
    m0 -= m0.dot(e_hat) * e_hat;
    const double mn = m0.norm();
    if (mn < 1e-9)
        throw FieldError("reference face normal is parallel to the edge");
    m0 /= mn;
    Vec3 t0 = e_hat.cross(m0);
    const Vec3 toward_face = face0.centroid() - x;
    if (t0.dot(toward_face) < 0.0)
        t0 = -t0;

    const double n_wedge = (2.0 * kPi - edge.interior_angle) / kPi;
    const double n_pi = n_wedge * kPi;

    auto face_angle = [&](const Vec3 &dir) -> double {
        Vec3 v = dir - dir.dot(e_hat) * e_hat;
        const double vn = v.norm();
        if (vn < kDirTol)
            throw FieldError("ray grazes along the diffracting edge");
        v /= vn;
        double a = wrap_2pi(std::atan2(v.dot(m0), v.dot(t0)));
        if (a > n_pi)
        {
            if (a - n_pi > 1e-6)
                throw FieldError("ray direction lies inside the wedge material");
            a = n_pi;
        }
        return a;
    };

    const double phi_p = face_angle(-sp_hat);
    const double phi = face_angle(s_hat);

    const double k = wavenumber(cfg);
    if (!(r_in > 0.0))
        throw FieldError("distance parameter must be positive");
    const double L = (r_in * out_len / (r_in + out_len)) * sin_b0_in * sin_b0_in;
    const WedgeCoefficients d = utd_coefficients(k, n_wedge, phi, phi_p, sin_b0_in, L, stats);

    const Vec3 phi_hat_p = -cross_sp / sin_b0_in;
    const Vec3 beta_hat_p = phi_hat_p.cross(sp_hat);
    const Vec3 phi_hat = cross_s / sin_b0_out;
    const Vec3 beta_hat = phi_hat.cross(s_hat);

    const Eigen::Matrix3d soft = beta_hat * beta_hat_p.transpose();
    const Eigen::Matrix3d hard = phi_hat * phi_hat_p.transpose();
    return -d.ds * soft.cast<Complex>() - d.dh * hard.cast<Complex>();
}

CVec3 propagate_path(const Scene &scene, const RadioConfig &cfg, const RayPath &path, TransitionStats *stats)
{
    const std::size_t n = path.candidate.size();
    if (path.points.size() != n + 2)
        throw FieldError("path point count does not match its interaction list");
    const double k = wavenumber(cfg);

    CVec3 e = tx_field(cfg, path.points.front(), path.points[1]);
    if (n == 0)
        return e;

    // r_acc is the spreading reference distance: it grows through reflections
    // (unfolded image distance) and re-anchors to the segment after an edge.
    double r_acc = (path.points[1] - path.points.front()).norm();
    for (std::size_t i = 0; i < n; ++i)
    {
        const Vec3 &prev = path.points[i];
        const Vec3 &here = path.points[i + 1];
        const Vec3 &next = path.points[i + 2];
        const double s = (next - here).norm();
        if (s < kDirTol)
            throw FieldError("degenerate path segment");
        double spread = 0.0;
        const Interaction kind = path.candidate.items[i].kind;
        if (kind == Interaction::Reflection)
        {
            const Facet &facet = scene.facets.at(static_cast<std::size_t>(path.candidate.items[i].id));
            const Eigen::Matrix3cd r = reflection_dyadic(here - prev, facet.normal_at(here));
            e = r * e;
            spread = r_acc / (r_acc + s);
            r_acc += s;
        }
        else
        {
            const Edge &edge = scene.edges.at(static_cast<std::size_t>(path.candidate.items[i].id));
            const Eigen::Matrix3cd d = diffraction_dyadic(scene, cfg, edge, prev, here, next, r_acc, stats);
            e = d * e;
            spread = std::sqrt(r_acc / (s * (r_acc + s)));
            r_acc = s;
        }
        e *= spread * std::polar(1.0, -k * s);
    }
    return e;
}

FieldSummary total_field(const RadioConfig &cfg, const Vec3 &bs, const Vec3 &ue, const std::vector<RayPath> &paths,
                         const std::vector<CVec3> &fields, int max_interactions)
{
    if (paths.size() != fields.size())
        throw FieldError("path and field lists differ in length");

    FieldSummary out;
    const double d = (ue - bs).norm();
    if (d < kDirTol)
        throw FieldError("transmitter and receiver coincide");
    out.e_los = cfg.e0 / d;

    // Signature rows ordered by interaction count, then R before D at each
    // position; binary counting with R = 0 produces exactly that order.
    std::vector<std::string> labels;
    labels.emplace_back("LOS");
    for (int len = 1; len <= max_interactions; ++len)
    {
        for (long code = 0; code < (1L << len); ++code)
        {
            std::string sig(static_cast<std::size_t>(len), 'R');
            for (int b = 0; b < len; ++b)
                if ((code >> (len - 1 - b)) & 1L)
                    sig[static_cast<std::size_t>(b)] = 'D';
            labels.push_back(sig);
        }
    }

    std::vector<KahanVec3> sums(labels.size());
    std::vector<int> counts(labels.size(), 0);
    KahanVec3 total;
    for (std::size_t i = 0; i < paths.size(); ++i)
    {
        std::string sig = paths[i].candidate.signature();
        if (sig.empty())
            sig = "LOS";
        const auto it = std::find(labels.begin(), labels.end(), sig);
        if (it == labels.end())
            throw FieldError("path has more interactions than the class table");
        const auto idx = static_cast<std::size_t>(it - labels.begin());
        sums[idx].add(fields[i]);
        ++counts[idx];
        total.add(fields[i]);
    }

    out.total = total.value();
    const double tm = out.total.norm();
    out.total_db =
        tm > 0.0 ? 20.0 * std::log10(tm / out.e_los) : -std::numeric_limits<double>::infinity();
    out.classes.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
    {
        ClassRow row;
        row.label = labels[i];
        row.n_paths = counts[i];
        if (counts[i] == 0)
            row.db = -std::numeric_limits<double>::infinity();
        else
        {
            const double m = sums[i].value().norm();
            row.db = m > 0.0 ? 20.0 * std::log10(m / out.e_los)
                             : -std::numeric_limits<double>::infinity();
        }
        out.classes.push_back(std::move(row));
    }
    return out;
}

} // namespace mptrace
