#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace motley;
using testing_support::numeric_dataset;

TEST(Spatialdist, Examples) {
    const auto ds = numeric_dataset({{0.3, 0.4}, {0.0, 0.0}});
    auto q = testing_support::full_query(ds, {0.0, 0.0}, 1, 0.0);
    EXPECT_NEAR(spatialdist(ds.tuples[0], q), 0.5, 1e-15);
    EXPECT_DOUBLE_EQ(spatialdist(ds.tuples[1], q), 0.0);
    q.metric = Metric::Manhattan;
    EXPECT_NEAR(spatialdist(ds.tuples[0], q), 0.7, 1e-15);
}

TEST(Mindist, ScaledBox) {
    // Box (1,1,1)-(3,3,3) and points (2,2,2), (4,2,0) scaled by 1/4.
    const Mbr box{{0.25, 0.25, 0.25}, {0.75, 0.75, 0.75}};
    const std::vector<std::size_t> dims{0, 1, 2};
    const auto ds = numeric_dataset({{0, 0, 0}});
    EXPECT_DOUBLE_EQ(mindist(box.view(), testing_support::full_query(ds, {0.5, 0.5, 0.5}, 1, 0), dims), 0.0);
    EXPECT_NEAR(mindist(box.view(), testing_support::full_query(ds, {1.0, 0.5, 0.0}, 1, 0), dims),
                std::sqrt(2.0) * 0.25, 1e-15);
}

TEST(Mindist, SubsetInsideIsZero) {
    const Mbr box{{0.2, 0.2, 0.2}, {0.4, 0.4, 0.4}};
    const std::vector<std::size_t> dims{0, 1, 2};
    Query q;
    q.point = {{1, 0.3}};
    q.diversity = {1};
    EXPECT_DOUBLE_EQ(mindist(box.view(), q, dims), 0.0);
    q.point = {{3, 0.3}};
    EXPECT_THROW(mindist(box.view(), q, dims), ValidationError);
}

TEST(Mindist, LowerBound) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        Mbr box{{1, 1}, {0, 0}};
        std::vector<std::vector<double>> pts(5, std::vector<double>(2));
        for (auto& p : pts) {
            for (std::size_t a = 0; a < 2; ++a) {
                p[a] = u(rng);
                box.low[a] = std::min(box.low[a], p[a]);
                box.high[a] = std::max(box.high[a], p[a]);
            }
        }
        const auto ds = numeric_dataset(pts);
        auto q = testing_support::full_query(ds, {u(rng), u(rng)}, 1, 0);
        q.metric = trial % 2 ? Metric::Manhattan : Metric::Euclidean;
        const std::vector<std::size_t> dims{0, 1};
        const SpatialProjection proj(q, dims);
        for (const auto& t : ds.tuples) {
            EXPECT_LE(proj.mindist(box.view()), spatialdist(t, q));
            EXPECT_GE(proj.maxdist(box.view()), spatialdist(t, q));
        }
    }
}

TEST(Score, Examples) {
    const std::vector<double> one{0.5};
    for (auto agg : {Aggregate::Arithmetic, Aggregate::Geometric, Aggregate::Harmonic}) {
        EXPECT_NEAR(score(one, agg), 2.0, 1e-12);
    }
    const std::vector<double> two{0.2, 0.4};
    EXPECT_NEAR(score(two, Aggregate::Harmonic), 3.75, 1e-12);
}

TEST(Score, HomogeneityAndOrdering) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> d(1 + trial % 6);
        for (auto& x : d) x = u(rng);
        const double c = 1.0 + u(rng) * 3.0;
        auto scaled = d;
        for (auto& x : scaled) x *= c;
        for (auto agg : {Aggregate::Arithmetic, Aggregate::Geometric, Aggregate::Harmonic}) {
            EXPECT_NEAR(score(scaled, agg), score(d, agg) / c, 1e-9 * score(d, agg));
            EXPECT_NEAR(score(d, agg), testing_support::ref_score(d, agg), 1e-9 * score(d, agg));
            auto farther = d;
            farther[rng() % d.size()] += 0.1;
            EXPECT_LE(score(farther, agg), score(d, agg));
        }
        EXPECT_GE(score(d, Aggregate::Harmonic), score(d, Aggregate::Geometric) * (1 - 1e-12));
        EXPECT_GE(score(d, Aggregate::Geometric), score(d, Aggregate::Arithmetic) * (1 - 1e-12));
    }
}

TEST(Score, FloorsZeroDistance) {
    const std::vector<double> d{0.0, 0.5};
    EXPECT_TRUE(std::isfinite(score(d, Aggregate::Harmonic)));
    EXPECT_TRUE(std::isfinite(score(d, Aggregate::Geometric)));
}
