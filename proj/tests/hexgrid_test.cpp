#include <gtest/gtest.h>

#include <cmath>

#include "hexplan/hexgrid.hpp"
#include "test_support.hpp"

using namespace hexplan;

TEST(HexGrid, NeighborsOfOriginFollowOffsetTable)
{
    const auto n = neighbors({0, 0});
    const std::array<HexCell, 6> expected{HexCell{1, 0}, HexCell{1, -1}, HexCell{0, -1},
                                          HexCell{-1, 0}, HexCell{-1, 1}, HexCell{0, 1}};
    EXPECT_EQ(n, expected);
}

TEST(HexGrid, NeighborsAreTranslationInvariant)
{
    const auto n = neighbors({7, 5});
    const std::array<HexCell, 6> expected{HexCell{8, 5}, HexCell{8, 4}, HexCell{7, 4},
                                          HexCell{6, 5}, HexCell{6, 6}, HexCell{7, 6}};
    EXPECT_EQ(n, expected);
}

TEST(HexGrid, NeighborSymmetryAndDirectionRoundTrip)
{
    for (const HexCell c : fixtures::patch(-4, 4)) {
        for (int d = 0; d < 6; ++d) {
            const Direction dir(d);
            const HexCell n = neighbors(c)[static_cast<std::size_t>(d)];
            EXPECT_EQ(neighbors(n)[static_cast<std::size_t>(dir.opposite().index())], c);
            EXPECT_EQ(direction_between(c, n), dir);
        }
        EXPECT_EQ(c.q + c.r + c.s(), 0);
    }
}

TEST(HexGrid, DirectionBetween)
{
    EXPECT_EQ(direction_between({0, 0}, {1, 0}).index(), 0);
    EXPECT_EQ(direction_between({1, 0}, {0, 0}).index(), 3);
    EXPECT_THROW(direction_between({0, 0}, {2, 0}), NotAdjacent);
    EXPECT_THROW(direction_between({0, 0}, {0, 0}), NotAdjacent);
}

TEST(HexGrid, DistanceExamples)
{
    EXPECT_EQ(hex_distance({0, 0}, {0, 0}), 0);
    EXPECT_EQ(hex_distance({0, 0}, {3, -1}), 3);
    EXPECT_EQ(hex_distance({2, -1}, {-1, 1}), 3);
    EXPECT_EQ(fixtures::bfs_distance({0, 0}, {3, -1}), 3);
    EXPECT_EQ(fixtures::bfs_distance({2, -1}, {-1, 1}), 3);
}

TEST(HexGrid, DistanceMatchesBreadthFirstSearchOnPatch)
{
    const auto cells = fixtures::patch(-4, 4);
    for (const HexCell a : cells)
        for (const HexCell b : cells) ASSERT_EQ(hex_distance(a, b), fixtures::bfs_distance(a, b)) << to_label(a) << " " << to_label(b);
}

TEST(HexGrid, DistanceBoundsScaledEuclidean)
{
    const GridSpec spec{1.7, 5.0};
    const auto cells = fixtures::patch(-4, 4);
    for (const HexCell a : cells)
        for (const HexCell b : cells) {
            const double e = norm(to_cartesian(a, spec) - to_cartesian(b, spec)) / spec.spacing();
            EXPECT_GE(hex_distance(a, b) + 1e-12, e);
        }
}

TEST(HexGrid, CartesianExamples)
{
    const GridSpec spec{1.0, 3.329};
    EXPECT_EQ(to_cartesian({0, 0}, spec), (Vec2{0.0, 0.0}));
    const Vec2 e = to_cartesian({1, 0}, spec);
    EXPECT_DOUBLE_EQ(e.x, 2.0);
    EXPECT_DOUBLE_EQ(e.y, 0.0);
    const Vec2 se = to_cartesian({0, 1}, spec);
    EXPECT_DOUBLE_EQ(se.x, 1.0);
    EXPECT_DOUBLE_EQ(se.y, -std::sqrt(3.0));
}

TEST(HexGrid, AdjacentCentersAreTwoApothemsApart)
{
    const GridSpec spec{0.37, 2.0};
    for (int d = 0; d < 6; ++d) {
        const Vec2 p = to_cartesian(neighbor({3, -2}, Direction(d)), spec) - to_cartesian({3, -2}, spec);
        EXPECT_NEAR(norm(p), 2 * 0.37, 1e-15);
        EXPECT_NEAR(std::atan2(p.y, p.x), wrap_angle(Direction(d).heading()), 1e-12);
    }
}

TEST(HexGrid, NearestCellInvertsCenters)
{
    const GridSpec spec{0.5, 2.0};
    for (const HexCell c : fixtures::patch(-5, 5)) EXPECT_EQ(nearest_cell(to_cartesian(c, spec), spec), c);
}

TEST(HexGrid, SharedEdgeIsCommonToBothHexagons)
{
    const GridSpec spec{1.0, 3.329};
    for (int d = 0; d < 6; ++d) {
        const Segment2 e = hex_edge({0, 0}, Direction(d), spec);
        const HexCell n = neighbor({0, 0}, Direction(d));
        EXPECT_NEAR(hex_inside_margin({0, 0}, e.a, spec), 0.0, 1e-12);
        EXPECT_NEAR(hex_inside_margin(n, e.a, spec), 0.0, 1e-12);
        EXPECT_NEAR(hex_inside_margin(n, (e.a + e.b) * 0.5, spec), 0.0, 1e-12);
        EXPECT_NEAR(norm(e.b - e.a), spec.circumradius(), 1e-12);
    }
    EXPECT_NEAR(hex_inside_margin({0, 0}, {0, 0}, spec), 1.0, 1e-15);
}

TEST(MapGrid, FreeCells)
{
    const MapGrid map({1.0, 3.329}, {0, 4, 0, 4}, {{2, 2}}, {0, 0}, {4, 4});
    EXPECT_FALSE(map.is_free({2, 2}));
    EXPECT_FALSE(map.is_free({5, 0}));
    EXPECT_FALSE(map.is_free({-1, 3}));
    EXPECT_TRUE(map.is_free({1, 3}));
    EXPECT_TRUE(is_free(map, {0, 0}));
}

TEST(MapGrid, RejectsInvalidMaps)
{
    EXPECT_THROW(MapGrid({1.0, 3.0}, {0, 4, 0, 4}, {{0, 0}}, {0, 0}, {4, 4}), InvalidMap);
    EXPECT_THROW(MapGrid({1.0, 3.0}, {0, 4, 0, 4}, {{4, 4}}, {0, 0}, {4, 4}), InvalidMap);
    EXPECT_THROW(MapGrid({1.0, 3.0}, {0, 4, 0, 4}, {}, {0, 0}, {5, 4}), InvalidMap);
    EXPECT_THROW(MapGrid({1.0, 3.0}, {0, 4, 0, 4}, {{9, 9}}, {0, 0}, {4, 4}), InvalidMap);
    EXPECT_THROW(MapGrid({0.0, 3.0}, {0, 4, 0, 4}, {}, {0, 0}, {4, 4}), InvalidMap);
    EXPECT_THROW(MapGrid({1.0, -3.0}, {0, 4, 0, 4}, {}, {0, 0}, {4, 4}), InvalidMap);
}
