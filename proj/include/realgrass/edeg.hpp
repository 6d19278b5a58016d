#pragma once
/**
 * @file edeg.hpp
 * @brief Expected degree of real Grassmannians: the k = 2 radial quadrature,
 *        the zonoid/Vitale route for general k, bounds and asymptotics, and a
 *        Laplace-method evaluator with a quadrature cross-check.
 *
 * Everything is assembled on the log scale:
 *   edeg(k,n) = |G(k,n)| N! / 2^N |C(k, n-k)|,   N = k(n-k).
 */

#include <realgrass/errors.hpp>
#include <realgrass/specfun.hpp>
#include <realgrass/stats.hpp>
#include <realgrass/zonoid.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace realgrass::edeg {

using specfun::pi;

enum class EdegMethod { quadrature, zonoid_mc, transversal_mc, upper_bound, asymptotic };

inline std::string to_string(EdegMethod m)
{
    switch (m) {
    case EdegMethod::quadrature: return "quadrature";
    case EdegMethod::zonoid_mc: return "zonoid_mc";
    case EdegMethod::transversal_mc: return "transversal_mc";
    case EdegMethod::upper_bound: return "upper_bound";
    case EdegMethod::asymptotic: return "asymptotic";
    }
    return "unknown";
}

/// error_estimate is |panel-doubled - base| for quadrature, the standard error
/// for MC and 0 for bounds and asymptotics.
struct EdegResult {
    int k = 0;
    int n = 0;
    double log_value = 0.0;
    double rel_error = 0.0;
    EdegMethod method = EdegMethod::quadrature;
    std::uint64_t n_samples = 0;
    std::uint64_t degenerate_count = 0;

    /// Throws OverflowError when the value is not representable.
    [[nodiscard]] double value() const { return specfun::exp_checked(log_value); }
    [[nodiscard]] double error_estimate() const { return rel_error * value(); }
};

/// log (|G(k,n)| N! / 2^N), the factor in front of |C(k, n-k)|.
inline double log_volume_to_edeg(int k, int n)
{
    const int big_n = k * (n - k);
    return specfun::log_vol_grassmann_real(k, n) + std::lgamma(big_n + 1.0) - big_n * std::log(2.0);
}

/// edeg G(2, n+1) from the radial profile of D(2); n >= 3.
inline EdegResult edeg_lines_quadrature(int n, const zonoid::RadialProfile2& profile, zonoid::QuadratureOptions q = {})
{
    if (n < 3) throw DomainError("edeg_lines_quadrature: n must be >= 3 (Gamma(n-2) has a pole)");
    const auto vol = zonoid::vol_C_quadrature(n - 1, profile, q);
    EdegResult r;
    r.k = 2;
    r.n = n + 1;
    r.log_value = log_volume_to_edeg(2, n + 1) + vol.log_value;
    r.rel_error = vol.rel_error;
    r.method = EdegMethod::quadrature;
    return r;
}

/// log of (8 / (3 pi^{5/2} sqrt n)) (pi^2/4)^n.
inline double log_edeg_lines_asymptotic(int n)
{
    detail::require_domain(n >= 1, "edeg_lines_asymptotic: n must be >= 1");
    return std::log(8.0 / 3.0) - 2.5 * std::log(pi) - 0.5 * std::log(static_cast<double>(n)) +
           n * std::log(pi * pi / 4.0);
}
inline double edeg_lines_asymptotic(int n) { return specfun::exp_checked(log_edeg_lines_asymptotic(n)); }

/// log |G(k,n)|/|RP^N| (sqrt(pi/2) rho_k / sqrt k)^N.
inline double log_edeg_upper_bound(int k, int n)
{
    detail::require_domain(k >= 1 && k < n, "edeg_upper_bound: need 1 <= k < n");
    const int big_n = k * (n - k);
    return specfun::log_vol_grassmann_real(k, n) - specfun::log_vol_rp(big_n) +
           big_n * (0.5 * std::log(pi / 2.0) + specfun::log_rho(k) - 0.5 * std::log(static_cast<double>(k)));
}
inline double edeg_upper_bound(int k, int n) { return specfun::exp_checked(log_edeg_upper_bound(k, n)); }

inline EdegResult edeg_upper_bound_result(int k, int n)
{
    EdegResult r;
    r.k = k;
    r.n = n;
    r.log_value = log_edeg_upper_bound(k, n);
    r.method = EdegMethod::upper_bound;
    return r;
}

/// log_k(pi rho_k^2 / 2).
inline double epsilon_k(int k)
{
    detail::require_domain(k >= 2, "epsilon_k: k must be >= 2");
    return (std::log(pi / 2.0) + 2.0 * specfun::log_rho(k)) / std::log(static_cast<double>(k));
}

/// kn log(sqrt(pi) Gamma((k+1)/2) / Gamma(k/2)).
inline double log_edeg_leading(int k, int n)
{
    detail::require_domain(k >= 1 && n >= 1, "log_edeg_leading: need k, n >= 1");
    return static_cast<double>(k) * n * (0.5 * std::log(pi) + std::lgamma((k + 1) / 2.0) - std::lgamma(k / 2.0));
}

enum class GeneralMethod { zonoid_quadrature, zonoid_vitale };

struct GeneralOptions {
    GeneralMethod method = GeneralMethod::zonoid_quadrature;
    /// Required for zonoid_quadrature.
    const zonoid::RadialProfile2* profile = nullptr;
    zonoid::QuadratureOptions quadrature{};
    RngStream stream{};
    std::uint64_t samples = 100000;
    ParallelConfig parallel{};
};

/// edeg(k,n) through the zonoid volume. k is first replaced by min(k, n-k).
inline EdegResult edeg_general(int k, int n, const GeneralOptions& opt)
{
    detail::require_domain(k >= 1 && k < n, "edeg_general: need 1 <= k < n");
    const int kk = std::min(k, n - k);
    const int m = n - kk;
    EdegResult r;
    r.k = k;
    r.n = n;
    if (opt.method == GeneralMethod::zonoid_quadrature) {
        if (kk != 2) throw UnsupportedMethod("edeg_general: zonoid_quadrature needs k = 2 or k = n - 2");
        if (opt.profile == nullptr) throw UnsupportedMethod("edeg_general: zonoid_quadrature needs a radial profile");
        if (m < 2) throw UnsupportedMethod("edeg_general: zonoid_quadrature needs n >= 4");
        auto res = edeg_lines_quadrature(n - 1, *opt.profile, opt.quadrature);
        res.k = k;
        return res;
    }
    if (kk * m > 36) throw UnsupportedMethod("edeg_general: zonoid_vitale needs k(n-k) <= 36");
    const auto vol = zonoid::vol_C_vitale_mc(kk, m, opt.stream, opt.samples, opt.parallel);
    if (!(vol.value > 0.0)) throw NumericalError("edeg_general: zonoid volume estimate is not positive");
    r.log_value = log_volume_to_edeg(kk, n) + std::log(vol.value);
    r.rel_error = vol.std_error / vol.value;
    r.method = EdegMethod::zonoid_mc;
    r.n_samples = vol.n_samples;
    r.degenerate_count = vol.degenerate_count;
    return r;
}

/// Local data of I(lambda) = int e^{-lambda a} b near the minimiser of a:
/// a = a_at_min + a0 |t - t*|^mu + ..., b = b0 |t - t*|^{nu - 1} + ...
struct LaplaceProblem {
    double a_at_min = 0.0;
    double a0 = 1.0;
    double mu = 2.0;
    double b0 = 1.0;
    double nu = 1.0;
    bool min_at_right_endpoint = false;
};

/// Leading term without the e^{-lambda a_at_min} factor.
inline double laplace_leading_scaled(const LaplaceProblem& p, double lambda)
{
    detail::require_domain(lambda > 0.0, "laplace_leading: lambda must be positive");
    detail::require_domain(p.mu > 0.0 && p.nu >= 1.0 && p.a0 > 0.0 && p.b0 != 0.0,
                           "laplace_leading: need mu > 0, nu >= 1, a0 > 0, b0 != 0");
    const double r = p.nu / p.mu;
    return p.b0 * std::exp(-r * std::log(lambda) + std::lgamma(r) - r * std::log(p.a0)) / p.mu;
}

inline double laplace_leading(const LaplaceProblem& p, double lambda)
{
    return std::exp(-lambda * p.a_at_min) * laplace_leading_scaled(p, lambda);
}

struct LaplaceRow {
    double lambda = 0.0;
    /// Both integrals carry the common factor e^{lambda a_at_min}.
    double scaled_quadrature = 0.0;
    double scaled_leading = 0.0;
    double quadrature_error = 0.0;
    double rel_error = 0.0;
};

/// Compares the leading term with adaptive Gauss-Kronrod quadrature of I(lambda).
inline std::vector<LaplaceRow> laplace_validate(const std::function<double(double)>& a,
                                                const std::function<double(double)>& b, double t1, double t2,
                                                const LaplaceProblem& p, const std::vector<double>& lambdas)
{
    detail::require_domain(t1 < t2, "laplace_validate: need t1 < t2");
    std::vector<LaplaceRow> rows;
    rows.reserve(lambdas.size());
    for (double lambda : lambdas) {
        auto f = [&](double t) {
            const double e = std::exp(-lambda * (a(t) - p.a_at_min));
            return e == 0.0 ? 0.0 : e * b(t);
        };
        // Split so that the peak at the endpoint sits in a short first panel.
        const double width = std::min(t2 - t1, 10.0 * std::pow(lambda, -1.0 / p.mu));
        double err1 = 0.0;
        double err2 = 0.0;
        double v = 0.0;
        using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
        if (p.min_at_right_endpoint) {
            v = gk::integrate(f, t2 - width, t2, 15, 1e-13, &err1);
            if (width < t2 - t1) v += gk::integrate(f, t1, t2 - width, 15, 1e-13, &err2);
        } else {
            v = gk::integrate(f, t1, t1 + width, 15, 1e-13, &err1);
            if (width < t2 - t1) v += gk::integrate(f, t1 + width, t2, 15, 1e-13, &err2);
        }
        LaplaceRow row;
        row.lambda = lambda;
        row.scaled_quadrature = v;
        row.scaled_leading = laplace_leading_scaled(p, lambda);
        row.quadrature_error = (err1 + err2) * std::abs(v);
        row.rel_error = std::abs(row.scaled_leading / v - 1.0);
        rows.push_back(row);
    }
    return rows;
}

/// The integral behind edeg G(2, n+1): a = -log(r^2 cos sin), b = cos 2t / (cos sin)^2
/// on [0, pi/4], with lambda = n - 1.
inline LaplaceProblem edeg_lines_laplace_problem()
{
    LaplaceProblem p;
    p.a_at_min = 4.0 * std::log(2.0);
    p.a0 = 3.0;
    p.mu = 2.0;
    p.b0 = 8.0;
    p.nu = 2.0;
    p.min_at_right_endpoint = true;
    return p;
}

inline std::vector<LaplaceRow> edeg_lines_laplace_validate(const zonoid::RadialProfile2& profile,
                                                           const std::vector<double>& lambdas)
{
    auto a = [&profile](double t) {
        const double r = profile(t);
        return -std::log(r * r * std::cos(t) * std::sin(t));
    };
    auto b = [](double t) {
        const double cs = std::cos(t) * std::sin(t);
        return std::cos(2.0 * t) / (cs * cs);
    };
    return laplace_validate(a, b, 0.0, pi / 4, edeg_lines_laplace_problem(), lambdas);
}

} // namespace realgrass::edeg
