#pragma once
/**
 * @file zonoid.hpp
 * @brief The Segre zonoid C(k,m) (expectation zonoid of x y^T with Gaussian
 *        x, y) and its singular value zonoid D(k).
 *
 * Support function:  h_C(X) = g_k(sv(X)) / sqrt(2 pi),
 *                    g_k(sigma) = E (sum sigma_i^2 z_i^2)^{1/2}.
 * For k = 2, g_2 has the elliptic closed form
 *                    g_2(s1, s2) = sqrt(2/pi) s_max E(1 - s_min^2 / s_max^2).
 * The radial function r_2 of D(2) is tabulated from the boundary curve
 * gamma(t) = grad h(cos t, sin t), whose polar angle is monotone in t.
 */

#include <realgrass/errors.hpp>
#include <realgrass/geomlin.hpp>
#include <realgrass/quadrature.hpp>
#include <realgrass/specfun.hpp>
#include <realgrass/stats.hpp>

#include <boost/math/tools/minima.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace realgrass::zonoid {

using geomlin::Matrix;
using geomlin::Vector;
using specfun::pi;

struct ZonoidDescriptor {
    int k = 1;
    int m = 1;

    ZonoidDescriptor(int k_, int m_) : k(k_), m(m_)
    {
        detail::require_domain(k >= 1 && m >= k, "ZonoidDescriptor: need 1 <= k <= m");
    }
    [[nodiscard]] int dim() const { return k * m; }
};

inline double radius_R(int k) { return specfun::rho(k) / std::sqrt(2.0 * pi * k); }
inline double log_radius_R(int k) { return specfun::log_rho(k) - 0.5 * std::log(2.0 * pi * k); }

// ---------------------------------------------------------------------------
// g_k
// ---------------------------------------------------------------------------

/// Closed form of g_2; symmetric in its arguments and their signs.
inline double g2_closed(double s1, double s2)
{
    const double a = std::abs(s1);
    const double b = std::abs(s2);
    const double hi = std::max(a, b);
    if (hi == 0.0) return 0.0;
    const double ratio = std::min(a, b) / hi;
    return std::sqrt(2.0 / pi) * hi * specfun::elliptic_E(1.0 - ratio * ratio);
}

/// g_k by closed form; available for k in {1, 2}.
inline double g_closed(std::span<const double> sigma)
{
    switch (sigma.size()) {
    case 1: return specfun::rho(1) * std::abs(sigma[0]);
    case 2: return g2_closed(sigma[0], sigma[1]);
    default: throw UnsupportedMethod("g_k: closed form only exists for k = 1, 2");
    }
}

inline Estimate g_mc(std::span<const double> sigma, RngStream stream, std::uint64_t samples, ParallelConfig cfg = {})
{
    detail::require_domain(!sigma.empty(), "g_k: sigma must be non-empty");
    const std::vector<double> s(sigma.begin(), sigma.end());
    return estimate_mean(stream, samples, cfg, "g_k_mc", [&s](Rng& rng) -> std::optional<double> {
        double acc = 0.0;
        for (double si : s) {
            const double z = rng.normal();
            acc += si * si * z * z;
        }
        return std::sqrt(acc);
    });
}

/// Method selector for g_k: closed form, or Monte Carlo with the given budget.
struct GkMethod {
    enum class Kind { closed, mc } kind = Kind::closed;
    RngStream stream{};
    std::uint64_t samples = 0;

    static GkMethod closed() { return {}; }
    static GkMethod mc(RngStream s, std::uint64_t n) { return {Kind::mc, s, n}; }
};

inline Estimate g_k(std::span<const double> sigma, const GkMethod& method)
{
    if (method.kind == GkMethod::Kind::mc) return g_mc(sigma, method.stream, method.samples);
    Estimate e;
    e.value = g_closed(sigma);
    e.method = "closed";
    return e;
}

// ---------------------------------------------------------------------------
// Support function of D(2) and its gradient
// ---------------------------------------------------------------------------

/// h(s1, s2) = g_2(s1, s2) / sqrt(2 pi) = |s_max| E(1 - s_min^2/s_max^2) / pi.
inline double support_D2(double s1, double s2) { return g2_closed(s1, s2) / std::sqrt(2.0 * pi); }

enum class Differentiation { analytic, numeric };

/// grad h at (s1, s2) with s1, s2 > 0, using dE/ds = (E - K) / (2 s).
inline std::array<double, 2> support_D2_gradient_analytic(double s1, double s2)
{
    detail::require_domain(s1 > 0.0 && s2 > 0.0, "support_D2_gradient: point must lie in the open quadrant");
    const bool swapped = s2 > s1;
    const double hi = swapped ? s2 : s1;
    const double lo = swapped ? s1 : s2;
    const double ratio = lo / hi;
    const double s = 1.0 - ratio * ratio;
    const double e = specfun::elliptic_E(s);
    const double de = specfun::elliptic_E_derivative(s);
    const double d_hi = (e + 2.0 * ratio * ratio * de) / pi;
    const double d_lo = -2.0 * ratio * de / pi;
    return swapped ? std::array{d_lo, d_hi} : std::array{d_hi, d_lo};
}

inline std::array<double, 2> support_D2_gradient_numeric(double s1, double s2)
{
    const double step = 1e-6 * std::hypot(s1, s2);
    return {(support_D2(s1 + step, s2) - support_D2(s1 - step, s2)) / (2.0 * step),
            (support_D2(s1, s2 + step) - support_D2(s1, s2 - step)) / (2.0 * step)};
}

inline std::array<double, 2> support_D2_gradient(double s1, double s2, Differentiation how)
{
    return how == Differentiation::analytic ? support_D2_gradient_analytic(s1, s2)
                                            : support_D2_gradient_numeric(s1, s2);
}

/// h_{C(k,m)}(X) = g_k(sv(X)) / sqrt(2 pi); closed form, so k <= 2.
inline double support_C(const ZonoidDescriptor& desc, const Matrix& x)
{
    detail::require_domain(x.rows() == desc.k && x.cols() == desc.m, "support_C: matrix shape does not match (k, m)");
    const Vector sv = geomlin::singular_values(x);
    return g_closed(std::span<const double>(sv.data(), static_cast<std::size_t>(sv.size()))) / std::sqrt(2.0 * pi);
}

/// Same for any k, with g_k by Monte Carlo.
inline Estimate support_C(const ZonoidDescriptor& desc, const Matrix& x, RngStream stream, std::uint64_t samples)
{
    detail::require_domain(x.rows() == desc.k && x.cols() == desc.m, "support_C: matrix shape does not match (k, m)");
    const Vector sv = geomlin::singular_values(x);
    return g_mc(std::span<const double>(sv.data(), static_cast<std::size_t>(sv.size())), stream, samples)
        .scaled(1.0 / std::sqrt(2.0 * pi));
}

// ---------------------------------------------------------------------------
// Radial profile of D(2)
// ---------------------------------------------------------------------------

/// r_2(theta) on [0, pi/4] as a monotone cubic Hermite interpolant; callers
/// use r(theta) = r(pi/2 - theta) on [pi/4, pi/2].
class RadialProfile2 {
public:
    static constexpr int kVersion = 1;

    RadialProfile2() = default;

    /// Knots must be strictly increasing in theta, start at 0 and end at pi/4.
    explicit RadialProfile2(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots))
    {
        if (knots_.size() < 3) throw DomainError("RadialProfile2: need at least 3 knots");
        for (std::size_t i = 1; i < knots_.size(); ++i)
            if (!(knots_[i].first > knots_[i - 1].first))
                throw NumericalError("RadialProfile2: theta knots are not strictly increasing");
        if (std::abs(knots_.front().first) > 1e-12 || std::abs(knots_.back().first - pi / 4) > 1e-12)
            throw DomainError("RadialProfile2: knots must span [0, pi/4]");
        knots_.front().first = 0.0;
        knots_.back().first = pi / 4;
        build_slopes();
    }

    [[nodiscard]] const std::vector<std::pair<double, double>>& knots() const { return knots_; }

    /// r_2 at polar angle theta in [0, pi/2].
    [[nodiscard]] double operator()(double theta) const
    {
        detail::require_domain(theta >= -1e-12 && theta <= pi / 2 + 1e-12, "RadialProfile2: theta outside [0, pi/2]");
        theta = std::clamp(theta, 0.0, pi / 2);
        if (theta > pi / 4) theta = pi / 2 - theta;
        const auto it = std::upper_bound(knots_.begin(), knots_.end(), theta,
                                         [](double t, const auto& kn) { return t < kn.first; });
        std::size_t i = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
        i = std::min(i, knots_.size() - 2);
        const double x0 = knots_[i].first;
        const double x1 = knots_[i + 1].first;
        const double h = x1 - x0;
        const double u = (theta - x0) / h;
        const double u2 = u * u;
        const double u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * knots_[i].second + (u3 - 2 * u2 + u) * h * slopes_[i] +
               (-2 * u3 + 3 * u2) * knots_[i + 1].second + (u3 - u2) * h * slopes_[i + 1];
    }

    /// Radial function in direction sigma (any nonzero 2-vector).
    [[nodiscard]] double at(double s1, double s2) const { return (*this)(std::atan2(std::abs(s2), std::abs(s1))); }

    [[nodiscard]] nlohmann::json to_json() const
    {
        nlohmann::json j;
        j["version"] = kVersion;
        j["k"] = 2;
        auto& arr = j["knots"] = nlohmann::json::array();
        for (const auto& [t, r] : knots_) arr.push_back({t, r});
        return j;
    }

    static RadialProfile2 from_json(const nlohmann::json& j)
    {
        if (j.value("version", -1) != kVersion) throw DomainError("RadialProfile2: unsupported profile version");
        if (j.value("k", -1) != 2) throw DomainError("RadialProfile2: profile must have k = 2");
        std::vector<std::pair<double, double>> knots;
        for (const auto& kn : j.at("knots")) knots.emplace_back(kn.at(0).get<double>(), kn.at(1).get<double>());
        return RadialProfile2(std::move(knots));
    }

private:
    void build_slopes()
    {
        const std::size_t n = knots_.size();
        std::vector<double> h(n - 1);
        std::vector<double> delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = knots_[i + 1].first - knots_[i].first;
            delta[i] = (knots_[i + 1].second - knots_[i].second) / h[i];
        }
        slopes_.assign(n, 0.0);
        // Fritsch-Butland weighted harmonic mean at interior knots
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] <= 0.0) continue;
            const double w1 = 2 * h[i] + h[i - 1];
            const double w2 = h[i] + 2 * h[i - 1];
            slopes_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
        // one-sided three-point end slope at theta = 0, limited to keep monotonicity
        double d0 = ((2 * h[0] + h[1]) * delta[0] - h[0] * delta[1]) / (h[0] + h[1]);
        if (d0 * delta[0] <= 0.0) d0 = 0.0;
        else if (delta[0] * delta[1] <= 0.0 && std::abs(d0) > 3 * std::abs(delta[0])) d0 = 3 * delta[0];
        slopes_[0] = d0;
        // r is even about pi/4
        slopes_[n - 1] = 0.0;
    }

    std::vector<std::pair<double, double>> knots_;
    std::vector<double> slopes_;
};

struct ProfileOptions {
    double t_min = 1e-3;
};

/// Tabulates r_2 from gamma(t) = grad h(cos t, sin t) on t in [t_min, pi/4];
/// theta = 0 is closed with the axis limit gamma(0) = (1/pi, 0).
inline RadialProfile2 build_radial_profile_2(int grid_size, Differentiation how = Differentiation::analytic,
                                             ProfileOptions opts = {})
{
    detail::require_domain(grid_size >= 64, "build_radial_profile_2: grid_size must be >= 64");
    std::vector<std::pair<double, double>> knots;
    knots.reserve(static_cast<std::size_t>(grid_size) + 1);
    knots.emplace_back(0.0, 1.0 / pi);
    for (int j = 0; j < grid_size; ++j) {
        const double t = j + 1 == grid_size ? pi / 4 : opts.t_min + (pi / 4 - opts.t_min) * j / (grid_size - 1);
        const auto g = support_D2_gradient(std::cos(t), std::sin(t), how);
        double theta = std::atan2(g[1], g[0]);
        if (j + 1 == grid_size) {
            if (std::abs(theta - pi / 4) > 1e-6)
                throw NumericalError("build_radial_profile_2: gamma(pi/4) is off the diagonal");
            theta = pi / 4;
        }
        if (!(theta > knots.back().first)) {
            std::ostringstream msg;
            msg << "build_radial_profile_2: polar angle of gamma is not increasing at t = " << t << " (theta = " << theta
                << ", previous = " << knots.back().first << ")";
            throw NumericalError(msg.str());
        }
        knots.emplace_back(theta, std::hypot(g[0], g[1]));
    }
    return RadialProfile2(std::move(knots));
}

/// gamma(t) itself, exposed for diagnostics and tests.
inline std::array<double, 2> boundary_curve_2(double t, Differentiation how = Differentiation::analytic)
{
    return support_D2_gradient(std::cos(t), std::sin(t), how);
}

/// r_2 by convex duality, r(u) = min over tau with <u,tau> > 0 of h(tau)/<u,tau>,
/// minimized over the polar angle of tau with Brent's method.
inline double radial_D2_duality(double s1, double s2)
{
    const double theta = std::atan2(s2, s1);
    auto objective = [theta](double phi) {
        const double c = std::cos(phi - theta);
        return support_D2(std::cos(phi), std::sin(phi)) / c;
    };
    const double span = pi / 2 - 1e-6;
    const auto best =
        boost::math::tools::brent_find_minima(objective, theta - span, theta + span, std::numeric_limits<double>::digits / 2);
    return best.second;
}

// ---------------------------------------------------------------------------
// Radial function of D(k), any k
// ---------------------------------------------------------------------------

struct RadialEstimate {
    double value = 0.0;
    double std_error = 0.0;
    bool converged = true;
};

struct RadialSearchOptions {
    std::uint64_t bank_samples = 20000;
    int descent_steps = 50;
    RngStream stream{0x5ad1a1, 0};
};

/// Grid-plus-descent minimization of h_D(tau)/<u,tau> over the hemisphere, with
/// g_k evaluated on one fixed Gaussian bank (common random numbers).
inline RadialEstimate radial_D_search(std::span<const double> u_in, const RadialSearchOptions& opt = {})
{
    const auto k = static_cast<Eigen::Index>(u_in.size());
    detail::require_domain(k >= 1, "radial_D: sigma must be non-empty");
    Vector u(k);
    for (Eigen::Index i = 0; i < k; ++i) u(i) = u_in[static_cast<std::size_t>(i)];
    detail::require_domain(std::abs(u.norm() - 1.0) < 1e-9, "radial_D: sigma must be a unit vector");

    Rng rng(opt.stream);
    const auto bank_n = static_cast<Eigen::Index>(opt.bank_samples);
    Matrix z2(bank_n, k);
    for (Eigen::Index i = 0; i < bank_n; ++i)
        for (Eigen::Index j = 0; j < k; ++j) {
            const double z = rng.normal();
            z2(i, j) = z * z;
        }
    const double norm = 1.0 / std::sqrt(2.0 * pi);

    auto objective = [&](const Vector& tau) {
        const double dot = u.dot(tau);
        if (dot <= 1e-12) return std::numeric_limits<double>::infinity();
        const Vector tau2 = tau.cwiseProduct(tau);
        const double g = (z2 * tau2).cwiseSqrt().mean();
        return norm * g / dot;
    };
    auto gradient = [&](const Vector& tau) {
        const double dot = u.dot(tau);
        const Vector tau2 = tau.cwiseProduct(tau);
        const Vector root = (z2 * tau2).cwiseSqrt();
        const double g = root.mean();
        Vector dg = Vector::Zero(k);
        for (Eigen::Index i = 0; i < bank_n; ++i)
            if (root(i) > 0.0) dg += z2.row(i).transpose().cwiseProduct(tau) / root(i);
        dg /= static_cast<double>(bank_n);
        Vector grad = norm * (dg * dot - g * u) / (dot * dot);
        return Vector(grad - grad.dot(tau) * tau);
    };

    // coarse grid: the direction u itself plus 2^k * 100 random hemisphere directions
    Vector best = u;
    double best_val = objective(u);
    Rng grid_rng(opt.stream.substream(1));
    const int grid = (1 << std::min<Eigen::Index>(k, 16)) * 100;
    for (int g = 0; g < grid; ++g) {
        Vector tau = geomlin::sample_unit_vector(grid_rng, static_cast<int>(k));
        if (u.dot(tau) < 0.0) tau = -tau;
        const double v = objective(tau);
        if (v < best_val) {
            best_val = v;
            best = tau;
        }
    }

    double step = 0.25;
    double grad_norm = 0.0;
    for (int it = 0; it < opt.descent_steps; ++it) {
        const Vector g = gradient(best);
        grad_norm = g.norm();
        if (grad_norm < 1e-12) break;
        bool improved = false;
        for (int ls = 0; ls < 40; ++ls) {
            Vector trial = best - step * g / grad_norm;
            trial.normalize();
            const double v = objective(trial);
            if (v < best_val) {
                best = trial;
                best_val = v;
                improved = true;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
    }

    // spread of the per-sample objective at the optimum
    const Vector tau2 = best.cwiseProduct(best);
    const Vector vals = (z2 * tau2).cwiseSqrt() * (norm / u.dot(best));
    const double mean = vals.mean();
    const double var = (vals.array() - mean).square().sum() / static_cast<double>(bank_n - 1);
    RadialEstimate out;
    out.value = best_val;
    out.std_error = std::sqrt(var / static_cast<double>(bank_n));
    out.converged = grad_norm < 1e-3 || step < 1e-10;
    return out;
}

/// r_k(sigma) for unit sigma: k = 1 exact, k = 2 from the profile, k >= 3 by search.
inline RadialEstimate radial_D(int k, std::span<const double> sigma, const RadialProfile2* profile = nullptr,
                               const RadialSearchOptions& opt = {})
{
    detail::require_domain(k >= 1 && static_cast<int>(sigma.size()) == k, "radial_D: sigma must have k entries");
    double n2 = 0.0;
    for (double s : sigma) n2 += s * s;
    detail::require_domain(std::abs(std::sqrt(n2) - 1.0) < 1e-9, "radial_D: sigma must be a unit vector");
    if (k == 1) return {1.0 / pi, 0.0, true};
    if (k == 2) {
        if (!profile) throw DomainError("radial_D: k = 2 requires a RadialProfile2");
        return {profile->at(sigma[0], sigma[1]), 0.0, true};
    }
    auto r = radial_D_search(sigma, opt);
    if (!r.converged) throw NumericalError("radial_D: hemisphere minimization did not converge");
    return r;
}

// ---------------------------------------------------------------------------
// Volumes
// ---------------------------------------------------------------------------

/// p_k(sigma) = prod |sigma_i|.
inline double p_k(std::span<const double> sigma)
{
    double p = 1.0;
    for (double s : sigma) p *= std::abs(s);
    return p;
}

/// q_k(sigma) = p_k(sigma)^{-k} prod_{i<j} |sigma_i^2 - sigma_j^2|; pole at zero coordinates.
inline double q_k(std::span<const double> sigma)
{
    const double p = p_k(sigma);
    if (p == 0.0) throw DomainError("q_k: pole at a zero coordinate");
    double v = std::pow(p, -static_cast<double>(sigma.size()));
    for (std::size_t i = 0; i < sigma.size(); ++i)
        for (std::size_t j = i + 1; j < sigma.size(); ++j) v *= std::abs(sigma[i] * sigma[i] - sigma[j] * sigma[j]);
    return v;
}

/// |B(k,m)|: Frobenius ball of radius R_k in R^{k x m}.
inline double log_vol_ball(int k, int m)
{
    detail::require_domain(k >= 1 && m >= 1, "vol_ball: need k, m >= 1");
    return k * m * log_radius_R(k) + specfun::log_vol_unit_ball(k * m);
}
inline double vol_ball(int k, int m) { return specfun::exp_checked(log_vol_ball(k, m)); }

/// A volume computed on the log scale with a relative error estimate.
struct VolumeResult {
    double log_value = 0.0;
    double rel_error = 0.0;

    [[nodiscard]] double value() const { return specfun::exp_checked(log_value); }
    [[nodiscard]] double error() const { return rel_error * value(); }
};

struct QuadratureOptions {
    int points_per_panel = 32;
    int panels = 16;
};

/// log of I(m) = int_0^{pi/4} (r^2 cos sin)^m (cos^2 - sin^2)/(cos sin)^2 dtheta.
/// The integrand is scaled by 16^m (its value at pi/4 with r^2 = 1/8) before
/// integration so that large m does not underflow.
inline VolumeResult log_radial_integral_2(int m, const RadialProfile2& profile, QuadratureOptions q = {})
{
    detail::require_domain(m >= 2, "radial integral: m must be >= 2 (the q_2 pole is integrable only for m >= 2)");
    auto integrand = [&profile, m](double t) {
        const double c = std::cos(t);
        const double s = std::sin(t);
        const double r = profile(t);
        const double cs = c * s;
        return std::exp(m * std::log(16.0 * r * r * cs)) * (c * c - s * s) / (cs * cs);
    };
    const auto res = quadrature::composite_checked(q.points_per_panel, integrand, 0.0, pi / 4, q.panels);
    if (!(res.value > 0.0)) throw NumericalError("radial integral: non-positive quadrature value");
    return {std::log(res.value) - m * std::log(16.0), res.error / res.value};
}

/// log of |O(2)| |S(2,m)| / (2m * 2^2), the prefactor of the k = 2 volume formula.
inline double log_volume_prefactor_2(int m)
{
    return specfun::log_vol_orthogonal(2) + specfun::log_vol_stiefel(2, m) - std::log(8.0 * m);
}

/// |C(2,m)| by quadrature over the radial profile.
inline VolumeResult vol_C_quadrature(int m, const RadialProfile2& profile, QuadratureOptions q = {})
{
    auto integral = log_radial_integral_2(m, profile, q);
    integral.log_value += log_volume_prefactor_2(m);
    return integral;
}

/// |C(k,m)| = E|det M| / (km)! where M has km i.i.d. columns vec(x y^T).
inline Estimate vol_C_vitale_mc(int k, int m, RngStream stream, std::uint64_t samples, ParallelConfig cfg = {})
{
    detail::require_domain(k >= 1 && m >= 1, "vol_C_vitale_mc: need k, m >= 1");
    detail::require_domain(k * m <= 36, "vol_C_vitale_mc: km must be <= 36");
    const int d = k * m;
    const double log_dfact = std::lgamma(d + 1.0);
    auto e = estimate_mean(stream, samples, cfg, "zonoid_vitale", [=](Rng& rng) -> std::optional<double> {
        Matrix mat(d, d);
        Vector x(k);
        Vector y(m);
        for (int col = 0; col < d; ++col) {
            for (int i = 0; i < k; ++i) x(i) = rng.normal();
            for (int j = 0; j < m; ++j) y(j) = rng.normal();
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < k; ++i) mat(j * k + i, col) = x(i) * y(j);
        }
        const Eigen::PartialPivLU<Matrix> lu(mat);
        const Matrix& f = lu.matrixLU();
        double log_abs = 0.0;
        for (int i = 0; i < d; ++i) {
            const double u = std::abs(f(i, i));
            if (u == 0.0) return 0.0;
            log_abs += std::log(u);
        }
        return std::exp(log_abs - log_dfact);
    });
    return e;
}

} // namespace realgrass::zonoid
