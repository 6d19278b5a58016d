#include <realgrass/zonoid.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <array>
#include <cmath>

using namespace realgrass;
using namespace realgrass::zonoid;

namespace {

constexpr double kPi = std::numbers::pi;
const double kR2 = 1.0 / (2.0 * std::sqrt(2.0));

const RadialProfile2& profile()
{
    static const RadialProfile2 p = build_radial_profile_2(2048);
    return p;
}

Matrix padded(int k, int m, std::initializer_list<double> diag)
{
    Matrix x = Matrix::Zero(k, m);
    int i = 0;
    for (double d : diag) x(i, i) = d, ++i;
    return x;
}

/// g_2 straight from its defining expectation, E sqrt(s1^2 z1^2 + s2^2 z2^2),
/// written in polar coordinates: (1/2pi) int_0^{2pi} int_0^inf r^2 e^{-r^2/2} |.| dr dphi
/// = sqrt(pi/2) * (1/2pi) int_0^{2pi} sqrt(s1^2 cos^2 + s2^2 sin^2) dphi.
double g2_by_quadrature(double s1, double s2)
{
    auto f = [=](double phi) { return std::sqrt(s1 * s1 * std::cos(phi) * std::cos(phi) + s2 * s2 * std::sin(phi) * std::sin(phi)); };
    const double avg = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 2 * kPi, 10, 1e-14) / (2 * kPi);
    return std::sqrt(kPi / 2) * avg;
}

} // namespace

TEST(Gk, ClosedFormValues)
{
    const std::array<double, 2> ones = {1.0, 1.0};
    const std::array<double, 2> axis = {1.0, 0.0};
    EXPECT_NEAR(g_closed(ones), std::sqrt(kPi / 2), 1e-14);
    EXPECT_NEAR(g_closed(axis), std::sqrt(2 / kPi), 1e-14);
    for (auto [a, b] : {std::pair{0.3, 0.9}, std::pair{-2.0, 0.5}, std::pair{1.0, 1e-7}})
        EXPECT_NEAR(g2_closed(a, b), g2_by_quadrature(a, b), 1e-12);
    const std::array<double, 3> three = {1.0, 0.0, 0.0};
    EXPECT_THROW(g_closed(three), UnsupportedMethod);
    EXPECT_THROW(g_k(three, GkMethod::closed()), UnsupportedMethod);
}

TEST(Gk, NormAxiomsClosed)
{
    Rng rng({21, 0});
    for (int t = 0; t < 200; ++t) {
        const double a = rng.normal(), b = rng.normal(), c = rng.normal(), d = rng.normal(), lam = 3 * rng.normal();
        EXPECT_NEAR(g2_closed(lam * a, lam * b), std::abs(lam) * g2_closed(a, b), 1e-10 * (1 + std::abs(lam)));
        EXPECT_LE(g2_closed(a + c, b + d), g2_closed(a, b) + g2_closed(c, d) + 1e-12);
        EXPECT_EQ(g2_closed(a, b), g2_closed(b, a));
        EXPECT_EQ(g2_closed(a, b), g2_closed(-a, b));
    }
}

TEST(Gk, MonteCarloMatchesClosedAndBounds)
{
    const std::array<double, 2> s2 = {0.6, 0.8};
    const auto mc = g_k(s2, GkMethod::mc({22, 0}, 400000));
    EXPECT_LT(std::abs(mc.value - g2_closed(0.6, 0.8)), 4 * mc.std_error);

    const double inv3 = 1.0 / std::sqrt(3.0);
    for (const auto& s : {std::array{inv3, inv3, inv3}, std::array{1.0, 0.0, 0.0}, std::array{0.48, 0.6, 0.64}}) {
        const auto e = g_mc(s, {23, 0}, 200000);
        EXPECT_GE(e.value + 3 * e.std_error, specfun::rho(1) / std::sqrt(3.0));
        EXPECT_LE(e.value - 3 * e.std_error, specfun::rho(3) * inv3);
    }
}

TEST(Gk, TriangleInequalityWithinMcError)
{
    const std::array<double, 3> a = {0.2, 0.9, 0.4};
    const std::array<double, 3> b = {0.7, -0.1, 0.5};
    const std::array<double, 3> ab = {0.9, 0.8, 0.9};
    const RngStream st{24, 0};
    const auto ga = g_mc(a, st, 100000), gb = g_mc(b, st, 100000), gab = g_mc(ab, st, 100000);
    EXPECT_LE(gab.value, ga.value + gb.value + 3 * (ga.std_error + gb.std_error + gab.std_error));
}

TEST(Support, ExamplesAndInvariance)
{
    const ZonoidDescriptor d22(2, 2);
    const ZonoidDescriptor d23(2, 3);
    EXPECT_EQ(support_C(d23, Matrix::Zero(2, 3)), 0.0);
    EXPECT_NEAR(support_C(d23, padded(2, 3, {1.0, 0.0})), 1 / kPi, 1e-14);
    EXPECT_NEAR(support_C(d23, padded(2, 3, {1 / std::sqrt(2.0), 1 / std::sqrt(2.0)})), kR2, 1e-14);
    EXPECT_THROW(support_C(d22, Matrix::Zero(2, 3)), DomainError);
    EXPECT_THROW(ZonoidDescriptor(3, 2), DomainError);

    Rng rng({25, 0});
    for (int t = 0; t < 20; ++t) {
        const Matrix x = geomlin::sample_gaussian_matrix(rng, 2, 3);
        const Matrix g = geomlin::sample_orthogonal(rng, 2);
        const Matrix h = geomlin::sample_orthogonal(rng, 3);
        EXPECT_NEAR(support_C(d23, g * x * h.transpose()), support_C(d23, x), 1e-12);
    }
    const ZonoidDescriptor d33(3, 3);
    const auto e = support_C(d33, Matrix::Identity(3, 3) / std::sqrt(3.0), {26, 0}, 200000);
    EXPECT_LT(std::abs(e.value - radius_R(3)), 4 * e.std_error);
}

TEST(Radius, Values)
{
    EXPECT_NEAR(radius_R(2), kR2, 1e-15);
    EXPECT_NEAR(radius_R(1), 1 / kPi, 1e-15);
    for (int k = 1; k <= 50; ++k) EXPECT_LE(radius_R(k), 1 / std::sqrt(2 * kPi) + 1e-15);
}

TEST(SupportGradient, EulerRelationAndNumericAgreement)
{
    for (double t : {0.01, 0.2, 0.5, 0.78, 1.0, 1.4}) {
        const double s1 = 1.3 * std::cos(t), s2 = 1.3 * std::sin(t);
        const auto ga = support_D2_gradient_analytic(s1, s2);
        const auto gn = support_D2_gradient_numeric(s1, s2);
        EXPECT_NEAR(s1 * ga[0] + s2 * ga[1], support_D2(s1, s2), 1e-12) << t;
        EXPECT_NEAR(ga[0], gn[0], 1e-8) << t;
        EXPECT_NEAR(ga[1], gn[1], 1e-8) << t;
    }
    const auto mid = boundary_curve_2(kPi / 4);
    EXPECT_NEAR(mid[0], 0.25, 1e-8);
    EXPECT_NEAR(mid[1], 0.25, 1e-8);
    EXPECT_THROW(support_D2_gradient_analytic(1.0, 0.0), DomainError);
}

TEST(Profile, ValueAndCurvatureAtDiagonal)
{
    const auto& p = profile();
    EXPECT_NEAR(p(kPi / 4) * p(kPi / 4), 0.125, 1e-6);
    const double h = 1e-3;
    auto r2 = [&](double t) { return p(t) * p(t); };
    const double second = (r2(kPi / 4 + h) - 2 * r2(kPi / 4) + r2(kPi / 4 - h)) / (h * h);
    EXPECT_NEAR(second, -0.25, 1e-2);
    EXPECT_NEAR(p(0.0), 1 / kPi, 1e-15);
    EXPECT_THROW(build_radial_profile_2(63), DomainError);
}

TEST(Profile, NumericDifferentiationAgrees)
{
    const auto num = build_radial_profile_2(256, Differentiation::numeric);
    const auto ana = build_radial_profile_2(256, Differentiation::analytic);
    for (double t = 0.0; t <= kPi / 2; t += 0.01) EXPECT_NEAR(num(t), ana(t), 1e-7) << t;
}

TEST(Profile, SymmetryBoundsAndDualityCrossCheck)
{
    const auto& p = profile();
    Rng rng({27, 0});
    int strict = 0;
    for (int i = 0; i < 100;) {
        const double t = kPi / 2 * rng.uniform();
        if (std::abs(t - kPi / 4) < 0.02) continue;
        ++i;
        EXPECT_NEAR(p(t), p(kPi / 2 - t), 1e-8);
        if (p(t) < kR2 - 1e-6) ++strict;
    }
    EXPECT_EQ(strict, 100);
    for (double t : {kPi / 8, 0.05, 0.3, 0.7, 1.2}) EXPECT_NEAR(p(t), radial_D2_duality(std::cos(t), std::sin(t)), 1e-4) << t;
    EXPECT_NEAR(radial_D2_duality(std::cos(kPi / 8), std::sin(kPi / 8)), p(kPi / 8), 1e-7);
}

TEST(Profile, MaxRadialEqualsMaxSupport)
{
    const auto& p = profile();
    double max_r = 0.0, max_h = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double t = kPi / 2 * i / 20000.0;
        max_r = std::max(max_r, p(t));
        max_h = std::max(max_h, support_D2(std::cos(t), std::sin(t)));
    }
    EXPECT_NEAR(max_r, max_h, 1e-6);
    EXPECT_NEAR(max_r, kR2, 1e-6);
}

TEST(Profile, JsonRoundTripIsExact)
{
    const auto& p = profile();
    const std::string text = p.to_json().dump();
    const auto back = RadialProfile2::from_json(nlohmann::json::parse(text));
    ASSERT_EQ(back.knots().size(), p.knots().size());
    for (std::size_t i = 0; i < p.knots().size(); ++i) {
        EXPECT_EQ(back.knots()[i].first, p.knots()[i].first);
        EXPECT_EQ(back.knots()[i].second, p.knots()[i].second);
    }
    EXPECT_EQ(back(0.123), p(0.123));
    auto bad = p.to_json();
    bad["version"] = 99;
    EXPECT_THROW(RadialProfile2::from_json(bad), DomainError);
}

TEST(Radial, DispatchK1K2)
{
    const std::array<double, 1> one = {1.0};
    EXPECT_NEAR(radial_D(1, one).value, 1 / kPi, 1e-15);
    const std::array<double, 2> diag = {1 / std::sqrt(2.0), 1 / std::sqrt(2.0)};
    EXPECT_NEAR(radial_D(2, diag, &profile()).value, kR2, 1e-6);
    EXPECT_THROW(radial_D(2, diag), DomainError);
    const std::array<double, 2> not_unit = {1.0, 1.0};
    EXPECT_THROW(radial_D(2, not_unit, &profile()), DomainError);
}

TEST(Radial, SearchAgreesWithProfileAndRadius)
{
    RadialSearchOptions opt;
    opt.bank_samples = 40000;
    for (double t : {kPi / 8, kPi / 4, 0.2}) {
        const std::array<double, 2> u = {std::cos(t), std::sin(t)};
        const auto r = radial_D_search(u, opt);
        EXPECT_TRUE(r.converged);
        EXPECT_LT(std::abs(r.value - profile()(t)), 4 * r.std_error + 1e-6) << t;
    }
    const double inv3 = 1 / std::sqrt(3.0);
    const std::array<double, 3> u3 = {inv3, inv3, inv3};
    const auto r3 = radial_D(3, u3, nullptr, opt);
    EXPECT_LT(std::abs(r3.value - radius_R(3)), 3 * r3.std_error + 1e-6);
    const std::array<double, 3> v3 = {0.8, 0.6, 0.0};
    const auto s3 = radial_D(3, v3, nullptr, opt);
    EXPECT_GT(s3.value, 0.0);
    EXPECT_LT(s3.value, radius_R(3) + 3 * s3.std_error);
}

TEST(Volume, SmallCasesAgainstOracles)
{
    const auto v11 = vol_C_vitale_mc(1, 1, {31, 0}, 400000);
    EXPECT_LT(std::abs(v11.value - 2 / kPi), 3 * v11.std_error);
    // C(1,2) is the disc of radius 1/pi
    const auto v12 = vol_C_vitale_mc(1, 2, {32, 0}, 400000);
    EXPECT_LT(std::abs(v12.value - 1 / kPi), 3 * v12.std_error);
    // same law, assembled as E|x1 x2| E|det(y1, y2)| / 2! with independent factors
    StreamingStats alt;
    Rng rng({33, 0});
    for (int i = 0; i < 400000; ++i) {
        const double x1 = rng.normal(), x2 = rng.normal();
        const double a = rng.normal(), b = rng.normal(), c = rng.normal(), d = rng.normal();
        alt.push(std::abs(x1 * x2) * std::abs(a * d - b * c) / 2);
    }
    EXPECT_LT(z_distance(v12.value, v12.std_error, alt.mean, alt.stderr_of_mean()), 3.0);
    EXPECT_THROW(vol_C_vitale_mc(6, 7, {1, 0}, 10), DomainError);
    EXPECT_THROW(vol_C_vitale_mc(1, 1, {1, 0}, 0), DomainError);
}

TEST(Volume, QuadratureM2)
{
    const auto q = vol_C_quadrature(2, profile());
    // invert |G(2,4)| 4!/2^4 |C(2,2)| = 1.7262...
    EXPECT_NEAR(q.value() * 24.0 * 2 * kPi * kPi / 16.0, 1.7262, 2e-4);
    EXPECT_LT(q.rel_error, 1e-8);
    EXPECT_LE(q.value(), vol_ball(2, 2));
    const auto mc = vol_C_vitale_mc(2, 2, {34, 0}, 300000);
    EXPECT_LT(std::abs(mc.value - q.value()), 3 * mc.std_error);
    EXPECT_THROW(vol_C_quadrature(1, profile()), DomainError);
}

TEST(Volume, BallAndEstimSpotCheck)
{
    EXPECT_NEAR(vol_ball(2, 2), kPi * kPi * std::pow(kR2, 4) / 2, 1e-15);
    EXPECT_NEAR(vol_ball(2, 2), 0.0771063, 1e-7);
    for (int m : {4, 8, 16, 32, 64}) {
        const auto q = vol_C_quadrature(m, profile());
        const double gap = log_vol_ball(2, m) - q.log_value;
        EXPECT_GT(gap, 0.0) << m;
        EXPECT_LT(gap / std::log(m), 5.0) << m;
        EXPECT_LT(q.rel_error, 1e-8) << m;
    }
}

TEST(PolynomialWeights, PkQk)
{
    const std::array<double, 2> s = {3.0, -2.0};
    EXPECT_EQ(p_k(s), 6.0);
    EXPECT_NEAR(q_k(s) * p_k(s) * p_k(s), 5.0, 1e-14);
    const std::array<double, 2> pole = {1.0, 0.0};
    EXPECT_THROW(q_k(pole), DomainError);
}
