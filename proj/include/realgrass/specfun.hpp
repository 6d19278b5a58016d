#pragma once
/**
 * @file specfun.hpp
 * @brief Gamma-type functions, complete elliptic integrals and the volumes of
 *        spheres, projective spaces, orthogonal/unitary groups, Stiefel and
 *        Grassmann manifolds.
 *
 * Volumes follow the canonical Riemannian metrics for which O(n) -> G(k,n)
 * and U(n) -> G_C(k,n) are Riemannian submersions. Every volume comes in a
 * direct form and a `log_` form; the direct form throws OverflowError when the
 * value is not representable.
 */

#include <realgrass/errors.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

namespace realgrass::specfun {

/// Natural log of a positive quantity. Kept as a distinct type so that log-scale
/// results are never confused with direct values.
struct LogValue {
    double log_magnitude = 0.0;

    [[nodiscard]] double exp() const;
    friend LogValue operator*(LogValue a, LogValue b) { return {a.log_magnitude + b.log_magnitude}; }
    friend LogValue operator/(LogValue a, LogValue b) { return {a.log_magnitude - b.log_magnitude}; }
};

inline constexpr double pi = std::numbers::pi;

/// Largest x with exp(x) finite.
inline const double kMaxExpArg = std::log(std::numeric_limits<double>::max());

/// exp(x), refusing to return infinity.
inline double exp_checked(double log_value)
{
    if (!(log_value < kMaxExpArg))
        throw OverflowError("value exp(" + std::to_string(log_value) + ") is not representable; use the log form");
    return std::exp(log_value);
}

inline double LogValue::exp() const { return exp_checked(log_magnitude); }

inline double log_gamma(double x)
{
    detail::require_domain(x > 0.0 && std::isfinite(x), "log_gamma: argument must be positive");
    return std::lgamma(x);
}

/// ln Gamma_k(a) = k(k-1)/4 ln pi + sum_{i<k} ln Gamma(a - i/2).
inline double multivariate_gamma_log(int k, double a)
{
    detail::require_domain(k >= 1, "multivariate_gamma_log: k must be >= 1");
    detail::require_domain(a > 0.5 * (k - 1), "multivariate_gamma_log: need a > (k-1)/2");
    double s = 0.25 * k * (k - 1) * std::log(pi);
    for (int i = 0; i < k; ++i) s += std::lgamma(a - 0.5 * i);
    return s;
}

/// rho_k = E|X| for a standard Gaussian X in R^k.
inline double log_rho(int k)
{
    detail::require_domain(k >= 1, "rho: k must be >= 1");
    return 0.5 * std::log(2.0) + std::lgamma(0.5 * (k + 1)) - std::lgamma(0.5 * k);
}
inline double rho(int k) { return std::exp(log_rho(k)); }

// ---------------------------------------------------------------------------
// Complete elliptic integrals in the parameter convention
//   E(s) = int_0^{pi/2} sqrt(1 - s sin^2 t) dt,  K(s) = int_0^{pi/2} dt / sqrt(1 - s sin^2 t).
// Both via the arithmetic-geometric mean.
// ---------------------------------------------------------------------------

namespace impl {

struct AgmResult {
    double agm;
    double weighted_c2; // sum_n 2^{n-1} c_n^2
};

inline AgmResult agm_sequence(double s)
{
    double a = 1.0;
    double b = std::sqrt(1.0 - s);
    double c2 = s;
    double weight = 0.5;
    double acc = weight * c2;
    for (int it = 0; it < 64; ++it) {
        const double an = 0.5 * (a + b);
        const double cn = 0.5 * (a - b);
        b = std::sqrt(a * b);
        a = an;
        weight *= 2.0;
        acc += weight * cn * cn;
        if (std::abs(cn) <= 1e-16 * a) break;
    }
    return {a, acc};
}

} // namespace impl

inline double elliptic_K(double s)
{
    detail::require_domain(s >= 0.0 && s < 1.0, "elliptic_K: parameter must lie in [0,1)");
    return pi / (2.0 * impl::agm_sequence(s).agm);
}

inline double elliptic_E(double s)
{
    detail::require_domain(s >= 0.0 && s <= 1.0, "elliptic_E: parameter must lie in [0,1]");
    if (s == 1.0) return 1.0;
    const auto r = impl::agm_sequence(s);
    return pi / (2.0 * r.agm) * (1.0 - r.weighted_c2);
}

/// dE/ds. Uses (E - K)/(2s) away from 0 and the hypergeometric series near 0,
/// where the difference formula cancels.
inline double elliptic_E_derivative(double s)
{
    detail::require_domain(s >= 0.0 && s < 1.0, "elliptic_E_derivative: parameter must lie in [0,1)");
    if (s > 0.05) return (elliptic_E(s) - elliptic_K(s)) / (2.0 * s);
    // E(s) = pi/2 sum_n c_n^2 s^n / (1 - 2n), c_n = (2n)! / (4^n n!^2)
    double c = 1.0;
    double pw = 1.0;
    double sum = 0.0;
    for (int n = 1; n < 60; ++n) {
        c *= (2.0 * n - 1.0) / (2.0 * n);
        const double term = c * c * n * pw / (1.0 - 2.0 * n);
        sum += term;
        if (std::abs(term) < 1e-18) break;
        pw *= s;
    }
    return 0.5 * pi * sum;
}

// ---------------------------------------------------------------------------
// Volumes
// ---------------------------------------------------------------------------

/// |S^d|, the d-dimensional unit sphere in R^{d+1}.
inline double log_vol_sphere(int d)
{
    detail::require_domain(d >= 0, "vol_sphere: dimension must be >= 0");
    return std::log(2.0) + 0.5 * (d + 1) * std::log(pi) - std::lgamma(0.5 * (d + 1));
}
inline double vol_sphere(int d) { return exp_checked(log_vol_sphere(d)); }

inline double log_vol_rp(int d) { return log_vol_sphere(d) - std::log(2.0); }
inline double vol_rp(int d) { return exp_checked(log_vol_rp(d)); }

/// |CP^d| = pi^d / d!.
inline double log_vol_cp(int d)
{
    detail::require_domain(d >= 0, "vol_cp: dimension must be >= 0");
    return d * std::log(pi) - std::lgamma(d + 1.0);
}
inline double vol_cp(int d) { return exp_checked(log_vol_cp(d)); }

/// Unit ball in R^d.
inline double log_vol_unit_ball(int d)
{
    detail::require_domain(d >= 0, "vol_unit_ball: dimension must be >= 0");
    return 0.5 * d * std::log(pi) - std::lgamma(1.0 + 0.5 * d);
}

/// Stiefel manifold S(k,m) of m x k matrices with orthonormal columns.
inline double log_vol_stiefel(int k, int m)
{
    detail::require_domain(k >= 0 && m >= k, "vol_stiefel: need 0 <= k <= m");
    if (k == 0) return 0.0;
    return k * std::log(2.0) + 0.5 * k * m * std::log(pi) - multivariate_gamma_log(k, 0.5 * m);
}
inline double vol_stiefel(int k, int m) { return exp_checked(log_vol_stiefel(k, m)); }

inline double log_vol_orthogonal(int k) { return log_vol_stiefel(k, k); }
inline double vol_orthogonal(int k) { return exp_checked(log_vol_orthogonal(k)); }

inline double log_vol_unitary(int k)
{
    detail::require_domain(k >= 0, "vol_unitary: k must be >= 0");
    double s = k * std::log(2.0) + 0.5 * (static_cast<double>(k) * k + k) * std::log(pi);
    for (int i = 1; i < k; ++i) s -= std::lgamma(i + 1.0);
    return s;
}
inline double vol_unitary(int k) { return exp_checked(log_vol_unitary(k)); }

inline double log_vol_grassmann_real(int k, int n)
{
    detail::require_domain(k >= 0 && n >= k, "vol_grassmann_real: need 0 <= k <= n");
    return log_vol_orthogonal(n) - log_vol_orthogonal(k) - log_vol_orthogonal(n - k);
}
inline double vol_grassmann_real(int k, int n) { return exp_checked(log_vol_grassmann_real(k, n)); }

inline double log_vol_grassmann_complex(int k, int n)
{
    detail::require_domain(k >= 0 && n >= k, "vol_grassmann_complex: need 0 <= k <= n");
    return log_vol_unitary(n) - log_vol_unitary(k) - log_vol_unitary(n - k);
}
inline double vol_grassmann_complex(int k, int n) { return exp_checked(log_vol_grassmann_complex(k, n)); }

// ---------------------------------------------------------------------------
// Degree of the complex Grassmannian (Schubert's formula)
// ---------------------------------------------------------------------------

inline double log_deg_grassmann_complex(int k, int n)
{
    detail::require_domain(k >= 1 && n >= k, "deg_grassmann_complex: need 1 <= k <= n");
    const double big_n = static_cast<double>(k) * (n - k);
    double s = std::lgamma(big_n + 1.0);
    for (int i = 0; i < k; ++i) s += std::lgamma(i + 1.0);
    for (int j = n - k; j < n; ++j) s -= std::lgamma(j + 1.0);
    return s;
}

/// Exact big-integer value of 0!1!...(k-1)! (k(n-k))! / ((n-k)!...(n-1)!).
inline boost::multiprecision::cpp_int deg_grassmann_complex_big(int k, int n)
{
    using boost::multiprecision::cpp_int;
    detail::require_domain(k >= 1 && n >= k, "deg_grassmann_complex: need 1 <= k <= n");
    auto factorial = [](int m) {
        cpp_int f = 1;
        for (int i = 2; i <= m; ++i) f *= i;
        return f;
    };
    cpp_int num = factorial(k * (n - k));
    for (int i = 0; i < k; ++i) num *= factorial(i);
    cpp_int den = 1;
    for (int j = n - k; j < n; ++j) den *= factorial(j);
    return num / den;
}

/// Exact value as a 64-bit integer; OverflowError when it does not fit.
inline std::uint64_t deg_grassmann_complex(int k, int n)
{
    const auto big = deg_grassmann_complex_big(k, n);
    if (big > std::numeric_limits<std::uint64_t>::max())
        throw OverflowError("deg_grassmann_complex: exact value exceeds 64 bits; use the log form");
    return static_cast<std::uint64_t>(big);
}

} // namespace realgrass::specfun
