// SPDX-License-Identifier: Apache-2.0
//
// risdiff: generative placement of reconfigurable intelligent surfaces
// Copyright (C) 2026 The risdiff authors
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
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "risdiff/error.hpp"
#include "risdiff/geometry.hpp"
#include "support.hpp"

namespace risdiff {
namespace {

using testing::SampledLos;

TEST(BuildGrid, EvenSpacingIncludesBounds) {
    const Grid g = build_grid({0, 90, 0, 10, 0, 10}, {4, 1, 1});
    ASSERT_EQ(g.size(), 4u);
    EXPECT_DOUBLE_EQ(g.points[0].x, 0.0);
    EXPECT_DOUBLE_EQ(g.points[1].x, 30.0);
    EXPECT_DOUBLE_EQ(g.points[2].x, 60.0);
    EXPECT_DOUBLE_EQ(g.points[3].x, 90.0);
}

TEST(BuildGrid, SingleSampleIsMidpoint) {
    const Grid g = build_grid({0, 10, 0, 10, 0, 10}, {1, 1, 1});
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g.points[0], (Point3{5, 5, 5}));
}

TEST(BuildGrid, CountIsProduct) {
    EXPECT_EQ(build_grid({0, 1, 0, 1, 0, 1}, {4, 4, 2}).size(), 32u);
}

TEST(BuildGrid, RowMajorXOutermostZInnermost) {
    const Region r{0, 30, 0, 20, 2, 10};
    const Grid g = build_grid(r, {4, 3, 2});
    for (std::size_t ix = 0; ix < 4; ++ix) {
        for (std::size_t iy = 0; iy < 3; ++iy) {
            for (std::size_t iz = 0; iz < 2; ++iz) {
                const Point3& p = g.points[ix * 6 + iy * 2 + iz];
                EXPECT_EQ(g.index(ix, iy, iz), ix * 6 + iy * 2 + iz);
                EXPECT_DOUBLE_EQ(p.x, 10.0 * static_cast<double>(ix));
                EXPECT_DOUBLE_EQ(p.y, 10.0 * static_cast<double>(iy));
                EXPECT_DOUBLE_EQ(p.z, iz == 0 ? 2.0 : 10.0);
                EXPECT_TRUE(r.contains(p));
            }
        }
    }
}

TEST(BuildGrid, CellDiagonal) {
    const Grid g = build_grid({0, 30, 0, 40, 0, 10}, {2, 2, 1});
    EXPECT_DOUBLE_EQ(g.cell_diagonal(), 50.0);
}

TEST(BuildGrid, Deterministic) {
    const Region r{0, 100, 0, 100, 2, 10};
    EXPECT_EQ(build_grid(r, {4, 4, 3}).points, build_grid(r, {4, 4, 3}).points);
}

TEST(BuildGrid, RejectsBadInput) {
    EXPECT_THROW(build_grid({0, 0, 0, 1, 0, 1}, {1, 1, 1}), ConfigError);
    EXPECT_THROW(build_grid({1, 0, 0, 1, 0, 1}, {1, 1, 1}), ConfigError);
    EXPECT_THROW(build_grid({0, 1, 0, 1, 0, 1}, {0, 1, 1}), ConfigError);
    EXPECT_THROW(build_grid({0, NAN, 0, 1, 0, 1}, {1, 1, 1}), ConfigError);
}

TEST(Distance, Examples) {
    EXPECT_EQ(distance({0, 0, 0}, {0, 0, 0}), 0.0);
    EXPECT_DOUBLE_EQ(distance({0, 0, 0}, {3, 4, 0}), 5.0);
    EXPECT_NEAR(distance({1, 1, 1}, {2, 2, 2}), 1.7320508, 1e-7);
    EXPECT_EQ(distance({1, 2, 3}, {-4, 7, 0.5}), distance({-4, 7, 0.5}, {1, 2, 3}));
}

const Box3 kUnitSlab{{4, -1, -1}, {6, 1, 1}};

TEST(SegmentBlocked, ThroughInterior) {
    EXPECT_TRUE(segment_blocked({0, 0, 0}, {10, 0, 0}, kUnitSlab));
}

TEST(SegmentBlocked, PassesAbove) {
    EXPECT_FALSE(segment_blocked({0, 0, 5}, {10, 0, 5}, kUnitSlab));
}

TEST(SegmentBlocked, EndpointOnFaceDoesNotBlock) {
    const Box3 box{{10, -1, -1}, {12, 1, 1}};
    EXPECT_FALSE(segment_blocked({0, 0, 0}, {10, 0, 0}, box));
    // Face contact is exactly the tangent case the sampling oracle declines to call.
    EXPECT_EQ(testing::sampled_segment_los({0, 0, 0}, {10, 0, 0}, box), SampledLos::degenerate);
}

TEST(SegmentBlocked, EndpointInsideBlocks) {
    EXPECT_TRUE(segment_blocked({5, 0, 0}, {5, 0, 10}, kUnitSlab));
}

TEST(LosIndicator, Examples) {
    EXPECT_TRUE(los_indicator({0, 0, 0}, {10, 0, 0}, {}));
    const std::vector<Box3> one{kUnitSlab};
    EXPECT_FALSE(los_indicator({0, 0, 0}, {10, 0, 0}, one));
}

struct LosCase {
    Point3 p, q;
    std::vector<Box3> boxes;
};

LosCase random_case(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> xy(0.0, 100.0), z(0.0, 20.0), side(5.0, 30.0),
        height(2.0, 18.0);
    std::uniform_int_distribution<int> count(1, 5);
    LosCase c;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        const double cx = xy(rng), cy = xy(rng), sx = side(rng), sy = side(rng);
        c.boxes.push_back({{cx - sx / 2, cy - sy / 2, 0.0}, {cx + sx / 2, cy + sy / 2, height(rng)}});
    }
    c.p = {xy(rng), xy(rng), z(rng)};
    if (std::bernoulli_distribution(0.5)(rng)) {
        // Aim through a box center so blocked cases are common.
        const Box3& b = c.boxes.front();
        const Point3 mid = 0.5 * (b.min + b.max);
        c.q = mid + 2.0 * (mid - c.p);
    } else {
        c.q = {xy(rng), xy(rng), z(rng)};
    }
    return c;
}

TEST(LosIndicator, AgreesWithSamplingOracle) {
    std::mt19937_64 rng(20260416);
    int blocked = 0, clear = 0, skipped = 0;
    for (int i = 0; i < 1000; ++i) {
        const LosCase c = random_case(rng);
        const SampledLos ref = testing::sampled_los(c.p, c.q, c.boxes);
        if (ref == SampledLos::degenerate) {
            ++skipped;
            continue;
        }
        const bool los = los_indicator(c.p, c.q, c.boxes);
        EXPECT_EQ(los, ref == SampledLos::clear) << "case " << i;
        (los ? clear : blocked) += 1;
    }
    EXPECT_GT(blocked, 200);
    EXPECT_GT(clear, 200);
    EXPECT_LT(skipped, 10);
}

TEST(LosIndicator, Symmetric) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        const LosCase c = random_case(rng);
        EXPECT_EQ(los_indicator(c.p, c.q, c.boxes), los_indicator(c.q, c.p, c.boxes));
    }
}

TEST(LosIndicator, MonotoneInObstacles) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        LosCase c = random_case(rng);
        const bool before = los_indicator(c.p, c.q, c.boxes);
        c.boxes.push_back(random_case(rng).boxes.front());
        if (!before) {
            EXPECT_FALSE(los_indicator(c.p, c.q, c.boxes));
        }
    }
}

TEST(LosIndicator, AxisParallelSegments) {
    // Zero direction components exercise the parallel-slab branch.
    const Box3 box{{0, 0, 0}, {10, 10, 10}};
    EXPECT_TRUE(segment_blocked({5, -5, 5}, {5, 15, 5}, box));
    EXPECT_FALSE(segment_blocked({11, -5, 5}, {11, 15, 5}, box));
    EXPECT_FALSE(segment_blocked({5, 5, 12}, {5, 5, 20}, box));
    EXPECT_TRUE(segment_blocked({5, 5, 12}, {5, 5, 5}, box));
}

}  // namespace
}  // namespace risdiff
