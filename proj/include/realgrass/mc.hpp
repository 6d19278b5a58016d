#pragma once
/**
 * @file mc.hpp
 * @brief Monte Carlo estimators and the statistical checks built on them:
 *        average scaling factors (real and complex), the G(2,4) integral,
 *        special Schubert volume ratios, the principal angle density,
 *        Vitale's identity and the singular value integration formula.
 */

#include <realgrass/errors.hpp>
#include <realgrass/geomlin.hpp>
#include <realgrass/quadrature.hpp>
#include <realgrass/specfun.hpp>
#include <realgrass/stats.hpp>
#include <realgrass/zonoid.hpp>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace realgrass::mc {

using geomlin::Frame;
using geomlin::Matrix;
using geomlin::Vector;
using specfun::pi;

// ---------------------------------------------------------------------------
// Average scaling factor alpha(k,m)
// ---------------------------------------------------------------------------

namespace impl {

/// |det| of a square matrix through LU; nullopt when the pivots are degenerate
/// (ratio of smallest to largest pivot below 1e-12).
template <typename Mat>
std::optional<double> abs_det_checked(const Mat& m, bool squared = false)
{
    const Eigen::PartialPivLU<Mat> lu(m);
    const auto& f = lu.matrixLU();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, log_abs = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double u = std::abs(f(i, i));
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        log_abs += std::log(u);
    }
    if (!(lo > 1e-12 * hi)) return std::nullopt;
    return std::exp(squared ? 2 * log_abs : log_abs);
}

} // namespace impl

/// E ||(u_1 (x) v_1) ^ ... ^ (u_N (x) v_N)|| with N = km and independent
/// uniform u_i in S^{k-1}, v_i in S^{m-1}.
inline Estimate alpha_mc(int k, int m, RngStream stream, std::uint64_t samples, ParallelConfig cfg = {})
{
    detail::require_domain(k >= 1 && m >= 1 && k * m <= 36, "alpha_mc: need k, m >= 1 and km <= 36");
    const int d = k * m;
    return estimate_mean(stream, samples, cfg, "alpha_mc", [=](Rng& rng) -> std::optional<double> {
        Matrix w(d, d);
        for (int c = 0; c < d; ++c) {
            const Vector u = geomlin::sample_unit_vector(rng, k);
            const Vector v = geomlin::sample_unit_vector(rng, m);
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < k; ++i) w(i + k * j, c) = u(i) * v(j);
        }
        return impl::abs_det_checked(w);
    });
}

/// alpha(k,m) = (km)! |C(k,m)| / (rho_k rho_m)^{km}, given |C(k,m)|.
inline double alpha_from_zonoid_volume(int k, int m, double vol_c)
{
    const int d = k * m;
    return std::exp(std::lgamma(d + 1.0) - d * (specfun::log_rho(k) + specfun::log_rho(m))) * vol_c;
}

using BigRational = boost::rational<boost::multiprecision::cpp_int>;

/// alpha_C(k,m) = N!/N^N with N = km.
inline BigRational alpha_complex_exact(int k, int m)
{
    using boost::multiprecision::cpp_int;
    detail::require_domain(k >= 1 && m >= 1 && k * m <= 20, "alpha_complex_exact: need km <= 20");
    const int n = k * m;
    cpp_int num = 1, den = 1;
    for (int i = 2; i <= n; ++i) num *= i;
    for (int i = 0; i < n; ++i) den *= n;
    return {num, den};
}

inline double to_double(const BigRational& r)
{
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

/// E ||wedge of u_i (x) v_i||^2 with complex unit vectors, = E|det|^2.
inline Estimate alpha_complex_mc(int k, int m, RngStream stream, std::uint64_t samples, ParallelConfig cfg = {})
{
    detail::require_domain(k >= 1 && m >= 1 && k * m <= 36, "alpha_complex_mc: need k, m >= 1 and km <= 36");
    const int d = k * m;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    auto unit = [](Rng& rng, int n) {
        CVector z(n);
        for (int i = 0; i < n; ++i) z(i) = {rng.normal(), rng.normal()};
        return CVector(z / z.norm());
    };
    return estimate_mean(stream, samples, cfg, "alpha_complex_mc", [=](Rng& rng) -> std::optional<double> {
        CMatrix w(d, d);
        for (int c = 0; c < d; ++c) {
            const CVector u = unit(rng, k);
            const CVector v = unit(rng, m);
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < k; ++i) w(i + k * j, c) = u(i) * v(j);
        }
        return impl::abs_det_checked(w, true);
    });
}

// ---------------------------------------------------------------------------
// The G(2,4) integral
// ---------------------------------------------------------------------------

/// a(t,s) as the 3x3 determinant with columns
/// (sin t_i sin s_i, cos t_i sin s_i, sin t_i cos s_i).
inline double edeg24_integrand(std::span<const double, 3> t, std::span<const double, 3> s)
{
    std::array<std::array<double, 3>, 3> c{};
    for (int i = 0; i < 3; ++i) {
        const double st = std::sin(t[i]), ct = std::cos(t[i]), ss = std::sin(s[i]), cs = std::cos(s[i]);
        c[i] = {st * ss, ct * ss, st * cs};
    }
    return c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1]) - c[1][0] * (c[0][1] * c[2][2] - c[0][2] * c[2][1]) +
           c[2][0] * (c[0][1] * c[1][2] - c[0][2] * c[1][1]);
}

/// ||w_1 ^ ... ^ w_4|| for w_i = u_i (x) v_i, u_i = (cos t_i, sin t_i), v_i = (cos s_i, sin s_i).
inline double rank_one_wedge_2x2(std::span<const double, 4> t, std::span<const double, 4> s)
{
    Matrix w(4, 4);
    for (int c = 0; c < 4; ++c) {
        const double u[2] = {std::cos(t[c]), std::sin(t[c])};
        const double v[2] = {std::cos(s[c]), std::sin(s[c])};
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 2; ++i) w(i + 2 * j, c) = u[i] * v[j];
    }
    return geomlin::wedge_norm(w);
}

/// edeg G(2,4) = 2^{-13} int_{[0,2pi]^6} |a| = (2pi)^6 / 2^13 * E|a| for uniform angles.
inline double edeg24_scale() { return std::pow(2 * pi, 6) / 8192.0; }

inline Estimate edeg24_integral_mc(RngStream stream, std::uint64_t samples, ParallelConfig cfg = {})
{
    auto e = estimate_mean(stream, samples, cfg, "edeg24_integral_mc", [](Rng& rng) -> std::optional<double> {
        std::array<double, 3> t{}, s{};
        for (int i = 0; i < 3; ++i) {
            t[static_cast<std::size_t>(i)] = 2 * pi * rng.uniform();
            s[static_cast<std::size_t>(i)] = 2 * pi * rng.uniform();
        }
        return std::abs(edeg24_integrand(t, s));
    });
    const auto scaled = e.scaled(edeg24_scale());
    e.value = scaled.value;
    e.std_error = scaled.std_error;
    return e;
}

namespace impl {

/// Tensor midpoint rule for 2^{-13} int |a| with p points per dimension.
inline double edeg24_midpoint(int p)
{
    const double h = 2 * pi / p;
    std::vector<std::array<double, 3>> cols;
    cols.reserve(static_cast<std::size_t>(p) * p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
            const double t = (i + 0.5) * h, s = (j + 0.5) * h;
            cols.push_back({std::sin(t) * std::sin(s), std::cos(t) * std::sin(s), std::sin(t) * std::cos(s)});
        }
    double total = 0.0;
    for (const auto& b : cols)
        for (const auto& c : cols) {
            const std::array<double, 3> x = {b[1] * c[2] - b[2] * c[1], b[2] * c[0] - b[0] * c[2], b[0] * c[1] - b[1] * c[0]};
            double partial = 0.0;
            for (const auto& a : cols) partial += std::abs(a[0] * x[0] + a[1] * x[1] + a[2] * x[2]);
            total += partial;
        }
    return total * std::pow(h, 6) / 8192.0;
}

} // namespace impl

/// Deterministic tensor midpoint rule; the error estimate compares with the
/// half-resolution grid when points_per_dim is even.
inline Estimate edeg24_integral_quadrature(int points_per_dim)
{
    detail::require_domain(points_per_dim >= 1 && points_per_dim <= 24, "edeg24_integral: points_per_dim must lie in [1, 24]");
    Estimate e;
    e.value = impl::edeg24_midpoint(points_per_dim);
    if (points_per_dim % 2 == 0 && points_per_dim >= 4)
        e.std_error = std::abs(e.value - impl::edeg24_midpoint(points_per_dim / 2));
    e.n_samples = static_cast<std::uint64_t>(std::pow(points_per_dim, 6));
    e.method = "edeg24_integral_midpoint";
    return e;
}

// ---------------------------------------------------------------------------
// Special Schubert variety: |Sigma(k,n)| / |G(k,n)|
// ---------------------------------------------------------------------------

inline double schubert_ratio_exact(int k, int n)
{
    detail::require_domain(k >= 1 && k < n, "schubert_ratio: need 1 <= k < n");
    return std::exp(std::lgamma(0.5 * (k + 1)) - std::lgamma(0.5 * k) + std::lgamma(0.5 * (n - k + 1)) -
                    std::lgamma(0.5 * (n - k)));
}

/// P[theta_1(A,B) <= eps, theta_2(A,B) >= delta] / (2 eps) for uniform A in G(k,n)
/// and a fixed (n-k)-plane B; the probability is that of the eps-tube around the
/// smooth part of Sigma.
inline Estimate schubert_ratio_mc(int k, int n, double eps, double delta, RngStream stream, std::uint64_t samples,
                                  ParallelConfig cfg = {})
{
    detail::require_domain(k >= 1 && k < n, "schubert_ratio_mc: need 1 <= k < n");
    detail::require_domain(eps > 0.0 && delta < pi / 2, "schubert_ratio_mc: need 0 < eps <= delta < pi/2");
    detail::require_domain(eps <= delta, "schubert_ratio_mc: eps must not exceed delta");
    const int kk = std::min(k, n - k);
    std::vector<int> axes;
    for (int i = kk; i < n; ++i) axes.push_back(i);
    const Frame fixed = Frame::coordinate(n, axes);
    auto e = estimate_mean(stream, samples, cfg, "schubert_ratio_mc", [&](Rng& rng) -> std::optional<double> {
        const Frame a = geomlin::sample_uniform_subspace(rng, n, kk);
        const auto pa = geomlin::principal_angles(a, fixed);
        const bool near = pa[0] <= eps && (pa.size() < 2 || pa[1] >= delta);
        return near ? 1.0 : 0.0;
    });
    const auto scaled = e.scaled(1.0 / (2 * eps));
    e.value = scaled.value;
    e.std_error = scaled.std_error;
    return e;
}

// ---------------------------------------------------------------------------
// Joint density of principal angles
// ---------------------------------------------------------------------------

inline void check_density_dims(int k, int l, int n)
{
    detail::require_domain(k >= 1 && k <= l && k + l <= n, "density: need 1 <= k <= l and k + l <= n");
}

inline double log_density_constant(int k, int l, int n)
{
    check_density_dims(k, l, n);
    using specfun::multivariate_gamma_log;
    return k * std::log(2.0) + 0.5 * k * k * std::log(pi) + multivariate_gamma_log(k, 0.5 * n) -
           multivariate_gamma_log(k, 0.5 * k) - multivariate_gamma_log(k, 0.5 * l) - multivariate_gamma_log(k, 0.5 * (n - l));
}

namespace impl {

inline double density_unchecked(int k, int l, int n, double c, std::span<const double> theta)
{
    double p = c;
    for (int i = 0; i < k; ++i) {
        const double t = theta[static_cast<std::size_t>(i)];
        p *= std::pow(std::cos(t), l - k) * std::pow(std::sin(t), n - l - k);
    }
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            const double ci = std::cos(theta[static_cast<std::size_t>(i)]);
            const double cj = std::cos(theta[static_cast<std::size_t>(j)]);
            p *= ci * ci - cj * cj;
        }
    return p;
}

} // namespace impl

/// Joint density of the ascending principal angles between a uniform k-plane and a fixed l-plane in R^n.
inline double density_pdf(int k, int l, int n, std::span<const double> theta)
{
    check_density_dims(k, l, n);
    detail::require_domain(static_cast<int>(theta.size()) == k, "density_pdf: theta must have k entries");
    for (std::size_t i = 0; i < theta.size(); ++i) {
        detail::require_domain(theta[i] >= 0.0 && theta[i] <= pi / 2, "density_pdf: angles must lie in [0, pi/2]");
        detail::require_domain(i == 0 || theta[i - 1] <= theta[i], "density_pdf: angles must be ascending");
    }
    return impl::density_unchecked(k, l, n, std::exp(log_density_constant(k, l, n)), theta);
}

namespace impl {

/// int over lo <= theta_d <= theta_{d+1} <= ... <= pi/2 by iterated Gauss-Legendre.
template <typename F>
double ordered_integral(const quadrature::GaussLegendreRule& rule, int depth, int k, double lo, std::vector<double>& theta,
                        const F& f)
{
    if (depth == k) return f(theta);
    return rule.integrate(
        [&](double t) {
            theta[static_cast<std::size_t>(depth)] = t;
            return ordered_integral(rule, depth + 1, k, t, theta, f);
        },
        lo, pi / 2);
}

} // namespace impl

/// Integral of density_pdf over the ordered region 0 <= theta_1 <= ... <= theta_k <= pi/2.
inline double density_normalization(int k, int l, int n, int quad_points = 48)
{
    check_density_dims(k, l, n);
    detail::require_domain(k <= 4, "density_normalization: k must be <= 4");
    const quadrature::GaussLegendreRule rule(quad_points);
    const double c = std::exp(log_density_constant(k, l, n));
    std::vector<double> theta(static_cast<std::size_t>(k));
    return impl::ordered_integral(rule, 0, k, 0.0, theta,
                                  [&](const std::vector<double>& th) { return impl::density_unchecked(k, l, n, c, th); });
}

/// span(e_1, ..., e_l) in R^n, the fixed plane of the density checks.
inline Frame coordinate_plane(int l, int n)
{
    std::vector<int> axes(static_cast<std::size_t>(l));
    for (int i = 0; i < l; ++i) axes[static_cast<std::size_t>(i)] = i;
    return Frame::coordinate(n, axes);
}

struct GofResult {
    double l1 = 0.0;
    int bins = 0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
};

/// Binned L1 distance between sampled principal angles and the exact density
/// (k = 1: bins cells on [0, pi/2]; k = 2: bins x bins cells on the ordered triangle).
inline GofResult density_gof(int k, int l, int n, RngStream stream, std::uint64_t samples, int bins = 30,
                             ParallelConfig cfg = {})
{
    check_density_dims(k, l, n);
    if (k > 2) throw UnsupportedMethod("density_gof: only k = 1, 2 are supported");
    detail::require_domain(bins >= 1 && bins <= 1000, "density_gof: bins must lie in [1, 1000]");
    const double width = pi / 2 / bins;
    const auto cells = static_cast<std::size_t>(k == 1 ? bins : bins * bins);
    auto bin_of = [&](double t) { return std::min(bins - 1, static_cast<int>(t / width)); };
    const Frame fixed = coordinate_plane(l, n);

    using Counts = std::vector<std::uint64_t>;
    const Counts counts = run_chunked(
        stream, samples, cfg, Counts(cells, 0),
        [&](Counts& acc, Rng& rng, std::uint64_t count) {
            for (std::uint64_t i = 0; i < count; ++i) {
                const auto pa = geomlin::principal_angles(geomlin::sample_uniform_subspace(rng, n, k), fixed);
                const int b0 = bin_of(pa[0]);
                const std::size_t idx = k == 1 ? static_cast<std::size_t>(b0)
                                               : static_cast<std::size_t>(b0 * bins + bin_of(pa[1]));
                ++acc[idx];
            }
        },
        [](Counts& into, const Counts& from) {
            for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
        });

    const quadrature::GaussLegendreRule rule(12);
    const double c = std::exp(log_density_constant(k, l, n));
    std::vector<double> th(static_cast<std::size_t>(k));
    auto pdf = [&](const std::vector<double>& t) { return impl::density_unchecked(k, l, n, c, t); };
    double l1 = 0.0;
    const double total = static_cast<double>(samples);
    if (k == 1) {
        for (int i = 0; i < bins; ++i) {
            const double mass = rule.integrate([&](double t) { th[0] = t; return pdf(th); }, i * width, (i + 1) * width);
            l1 += std::abs(counts[static_cast<std::size_t>(i)] / total - mass);
        }
    } else {
        for (int i = 0; i < bins; ++i)
            for (int j = 0; j < bins; ++j) {
                double mass = 0.0;
                if (j > i) {
                    mass = rule.integrate(
                        [&](double a) {
                            th[0] = a;
                            return rule.integrate([&](double b) { th[1] = b; return pdf(th); }, j * width, (j + 1) * width);
                        },
                        i * width, (i + 1) * width);
                } else if (j == i) {
                    mass = rule.integrate(
                        [&](double a) {
                            th[0] = a;
                            return rule.integrate([&](double b) { th[1] = b; return pdf(th); }, a, (i + 1) * width);
                        },
                        i * width, (i + 1) * width);
                }
                l1 += std::abs(counts[static_cast<std::size_t>(i * bins + j)] / total - mass);
            }
    }
    return {l1, bins, samples, stream.seed};
}

// ---------------------------------------------------------------------------
// Vitale's identity for the Gaussian ball
// ---------------------------------------------------------------------------

/// E|det G| for a d x d standard Gaussian matrix: d! |B^d / sqrt(2 pi)| = d! / (2^{d/2} Gamma(1 + d/2)).
inline double vitale_closed_form(int d)
{
    detail::require_domain(d >= 1, "vitale: d must be >= 1");
    return std::exp(std::lgamma(d + 1.0) - 0.5 * d * std::log(2.0) - std::lgamma(1.0 + 0.5 * d));
}

inline Estimate vitale_check(int d, RngStream stream, std::uint64_t samples, ParallelConfig cfg = {})
{
    detail::require_domain(d >= 1 && d <= 12, "vitale_check: d must lie in [1, 12]");
    return estimate_mean(stream, samples, cfg, "vitale_mc", [d](Rng& rng) -> std::optional<double> {
        return std::abs(geomlin::sample_gaussian_matrix(rng, d, d).determinant());
    });
}

// ---------------------------------------------------------------------------
// Integration over the Frobenius sphere via singular values (k = 2)
// ---------------------------------------------------------------------------

enum class TestFunction { one, sv_product_sq, sv_power_sum4, radial_2m };

inline TestFunction parse_test_function(const std::string& id)
{
    if (id == "one") return TestFunction::one;
    if (id == "sv_product_sq") return TestFunction::sv_product_sq;
    if (id == "sv_power_sum4") return TestFunction::sv_power_sum4;
    if (id == "radial_2m") return TestFunction::radial_2m;
    throw DomainError("integration_formula_check: unknown test function '" + id + "'");
}

struct IntegrationCheck {
    Estimate sphere_side;        ///< int over S^{2m-1} of f, by Gaussian projection
    quadrature::QuadResult sv_side; ///< singular value quadrature
};

/// Both sides of  int_{S^{2m-1}} f = |O(2)||S(2,m)|/4 int_0^{pi/4} g(c,s) (cs)^{m-2} (c^2 - s^2) dtheta.
inline IntegrationCheck integration_formula_check(int m, TestFunction fn, RngStream stream, std::uint64_t samples,
                                                  int quad_points = 32, const zonoid::RadialProfile2* profile = nullptr,
                                                  ParallelConfig cfg = {})
{
    detail::require_domain(m >= 2 && m <= 8, "integration_formula_check: need 2 <= m <= 8");
    if (fn == TestFunction::radial_2m && !profile)
        throw DomainError("integration_formula_check: radial_2m requires a radial profile");
    auto g = [&](double s1, double s2) {
        switch (fn) {
        case TestFunction::one: return 1.0;
        case TestFunction::sv_product_sq: return s1 * s1 * s2 * s2;
        case TestFunction::sv_power_sum4: return std::pow(s1, 4) + std::pow(s2, 4);
        case TestFunction::radial_2m: return std::pow(profile->at(s1, s2), 2 * m);
        }
        return 0.0;
    };
    IntegrationCheck out;
    out.sphere_side = estimate_mean(stream, samples, cfg, "sphere_projection_mc", [&](Rng& rng) -> std::optional<double> {
        const Matrix x = geomlin::sample_gaussian_matrix(rng, 2, m);
        const Vector sv = geomlin::singular_values(x) / x.norm();
        return g(sv(0), sv(1));
    }).scaled(specfun::vol_sphere(2 * m - 1));
    const double pref = std::exp(specfun::log_vol_orthogonal(2) + specfun::log_vol_stiefel(2, m)) / 4.0;
    auto integrand = [&](double t) {
        const double c = std::cos(t), s = std::sin(t);
        return g(c, s) * std::pow(c * s, m - 2) * (c * c - s * s);
    };
    out.sv_side = quadrature::composite_checked(quad_points, integrand, 0.0, pi / 4, 8);
    out.sv_side.value *= pref;
    out.sv_side.error *= pref;
    return out;
}

} // namespace realgrass::mc
