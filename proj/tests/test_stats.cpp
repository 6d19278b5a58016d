#include <realgrass/stats.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace realgrass;

namespace {

StreamingStats stats_of(const std::vector<double>& xs, std::size_t lo, std::size_t hi)
{
    StreamingStats s;
    for (std::size_t i = lo; i < hi; ++i) s.push(xs[i]);
    return s;
}

} // namespace

TEST(StreamingStats, MatchesTwoPass)
{
    std::mt19937_64 eng(3);
    std::lognormal_distribution<double> dist(0.0, 1.0);
    std::vector<double> xs(10007);
    for (auto& x : xs) x = 1e6 + dist(eng);
    const auto s = stats_of(xs, 0, xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    EXPECT_NEAR(s.mean, mean, 1e-9);
    EXPECT_NEAR(s.variance(), ss / (xs.size() - 1), 1e-8 * ss / xs.size());
}

TEST(StreamingStats, MergeIsAssociativeAndOrderFree)
{
    std::mt19937_64 eng(4);
    std::normal_distribution<double> dist(2.0, 3.0);
    std::vector<double> xs(5000);
    for (auto& x : xs) x = dist(eng);
    const auto whole = stats_of(xs, 0, xs.size());

    const std::vector<std::size_t> cuts = {0, 17, 1000, 1001, 3333, 5000};
    std::vector<StreamingStats> parts;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) parts.push_back(stats_of(xs, cuts[i], cuts[i + 1]));

    std::vector<std::size_t> order(parts.size());
    std::iota(order.begin(), order.end(), 0);
    do {
        StreamingStats acc;
        for (auto i : order) acc.merge(parts[i]);
        EXPECT_EQ(acc.count, whole.count);
        EXPECT_NEAR(acc.mean, whole.mean, 1e-10 * std::abs(whole.mean));
        EXPECT_NEAR(acc.m2, whole.m2, 1e-10 * whole.m2);
    } while (std::next_permutation(order.begin(), order.end()));

    // (a+b)+c == a+(b+c)
    StreamingStats left = parts[0];
    left.merge(parts[1]);
    left.merge(parts[2]);
    StreamingStats right = parts[1];
    right.merge(parts[2]);
    StreamingStats head = parts[0];
    head.merge(right);
    EXPECT_NEAR(left.mean, head.mean, 1e-12);
    EXPECT_NEAR(left.m2, head.m2, 1e-10 * left.m2);
}

TEST(ChunkedDriver, WorkerCountDoesNotChangeResult)
{
    auto draw = [](Rng& rng) -> std::optional<double> {
        const double x = rng.normal();
        if (x > 3.0) return std::nullopt;
        return x * x;
    };
    const RngStream stream{123, 0};
    const auto one = estimate_mean(stream, 100003, {1, 1000}, "t", draw);
    for (unsigned w : {2u, 3u, 8u}) {
        const auto many = estimate_mean(stream, 100003, {w, 1000}, "t", draw);
        EXPECT_EQ(one.value, many.value);
        EXPECT_EQ(one.std_error, many.std_error);
        EXPECT_EQ(one.degenerate_count, many.degenerate_count);
    }
    EXPECT_EQ(one.n_samples, 100003u);
    EXPECT_GT(one.degenerate_count, 0u);
    EXPECT_NEAR(one.value, 1.0, 0.05);
}

TEST(ChunkedDriver, RejectsEmptyBudgetAndPropagatesErrors)
{
    auto ok = [](Rng& rng) -> std::optional<double> { return rng.uniform(); };
    EXPECT_THROW(estimate_mean(RngStream{1, 0}, 0, {}, "t", ok), DomainError);
    auto bad = [](Rng&) -> std::optional<double> { throw NumericalError("boom"); };
    EXPECT_THROW(estimate_mean(RngStream{1, 0}, 10000, {4, 100}, "t", bad), NumericalError);
}

TEST(Estimate, IntervalAndScaling)
{
    Estimate e;
    e.value = 2.0;
    e.std_error = 0.5;
    EXPECT_NEAR(e.ci95_low(), 2.0 - 0.98, 1e-3);
    EXPECT_NEAR(e.ci95_high(), 2.0 + 0.98, 1e-3);
    const auto s = e.scaled(-2.0);
    EXPECT_EQ(s.value, -4.0);
    EXPECT_EQ(s.std_error, 1.0);
    EXPECT_NEAR(z_distance(1.0, 0.3, 1.5, 0.4), 1.0, 1e-15);
}
