#include <gtest/gtest.h>

#include <random>
#include <set>

#include "property_checks.hpp"
#include "pursuit/grid_world.hpp"

using namespace pursuit;

namespace {

PursuerState pursuer(AgentId id, Position pos, int range = 1)
{
    PursuerState p;
    p.id = id;
    p.pos = pos;
    p.range = range;
    return p;
}

EvaderState evader(AgentId id, Position pos, int d = 1)
{
    EvaderState e;
    e.id = id;
    e.pos = pos;
    e.difficulty = d;
    return e;
}

GridConfig grid(int w, int h, std::vector<Position> obstacles = {})
{
    GridConfig g;
    g.width = w;
    g.height = h;
    g.obstacles = std::move(obstacles);
    return g;
}

}  // namespace

TEST(Capture, FullySurroundedInterior)
{
    auto w = make_world(grid(5, 5),
                        {pursuer(0, {2, 1}), pursuer(1, {2, 3}), pursuer(2, {1, 2}), pursuer(3, {3, 2})},
                        {evader(10, {2, 2}, 4)});
    EXPECT_TRUE(is_captured(w.evaders[0], w));
}

TEST(Capture, CornerCountsWalls)
{
    auto w = make_world(grid(5, 5), {pursuer(0, {1, 0})}, {evader(10, {0, 0}, 3)});
    EXPECT_EQ(blocked_neighbor_count(w.evaders[0].pos, w, Occupancy(w)), 3);
    EXPECT_TRUE(is_captured(w.evaders[0], w));
}

TEST(Capture, OneBlockerIsNotEnoughForTwo)
{
    auto w = make_world(grid(5, 5), {pursuer(0, {2, 1})}, {evader(10, {2, 2}, 2)});
    EXPECT_FALSE(is_captured(w.evaders[0], w));
}

TEST(Capture, EvadersDoNotBlock)
{
    auto w = make_world(grid(5, 5), {pursuer(0, {2, 1})}, {evader(10, {2, 2}, 2), evader(11, {2, 3}, 4)});
    EXPECT_FALSE(is_captured(w.evaders[0], w));
}

TEST(Capture, ObstaclesBlock)
{
    auto w = make_world(grid(5, 5, {{1, 2}}), {pursuer(0, {3, 2})}, {evader(10, {2, 2}, 2)});
    EXPECT_TRUE(is_captured(w.evaders[0], w));
}

// Every content assignment of the in-bounds neighbours, for each difficulty
// and for interior, edge and corner cells, against a direct count.
TEST(Capture, ExhaustiveOracle)
{
    const auto r = checks::capture_oracle();
    EXPECT_EQ(r.violations, 0) << r.first_failure;
    EXPECT_EQ(r.checks, 4 * (256 + 64 + 16 + 64 + 16));
}

TEST(RangeInvaders, ChebyshevWithinRange)
{
    auto w = make_world(grid(20, 20),
                        {pursuer(0, {5, 5}, 2), pursuer(1, {7, 7}, 2), pursuer(2, {8, 5}, 2), pursuer(3, {5, 9}, 5)},
                        {evader(10, {5, 7}, 2)});
    // Chebyshev distances 2, 2, 3, 2.
    EXPECT_EQ(count_range_invaders(w.evaders[0], w), 3);
}

TEST(Step, PursuerClosesCornerOnLowDifficulty)
{
    auto w = make_world(grid(5, 5), {pursuer(0, {2, 0})}, {evader(10, {0, 0}, 1)});
    auto next = step(w, {{0, Action::Left}, {10, Action::Stay}});
    EXPECT_EQ(next.pursuers[0].pos, (Position{1, 0}));
    EXPECT_TRUE(next.evaders[0].captured);
    EXPECT_EQ(next.tick, 1);
}

TEST(Step, LowestIdWinsContestedCell)
{
    auto w = make_world(grid(5, 5), {pursuer(0, {1, 2}), pursuer(1, {3, 2})}, {});
    auto next = step(w, {{0, Action::Right}, {1, Action::Left}});
    EXPECT_EQ(next.pursuers[0].pos, (Position{2, 2}));
    EXPECT_EQ(next.pursuers[1].pos, (Position{3, 2}));
}

TEST(Step, HeadOnSwapCancelled)
{
    auto w = make_world(grid(5, 5), {pursuer(0, {1, 2}), pursuer(1, {2, 2})}, {});
    auto next = step(w, {{0, Action::Right}, {1, Action::Left}});
    EXPECT_EQ(next.pursuers[0].pos, (Position{1, 2}));
    EXPECT_EQ(next.pursuers[1].pos, (Position{2, 2}));
}

TEST(Step, FollowIntoVacatedCell)
{
    auto w = make_world(grid(5, 5), {pursuer(0, {0, 2}), pursuer(1, {1, 2})}, {});
    auto next = step(w, {{0, Action::Right}, {1, Action::Right}});
    EXPECT_EQ(next.pursuers[0].pos, (Position{1, 2}));
    EXPECT_EQ(next.pursuers[1].pos, (Position{2, 2}));
}

TEST(Step, BlockedChainCancels)
{
    auto w = make_world(grid(5, 5), {pursuer(0, {0, 2}), pursuer(1, {1, 2})}, {evader(10, {2, 2}, 4)});
    auto next = step(w, {{0, Action::Right}, {1, Action::Right}, {10, Action::Stay}});
    EXPECT_EQ(next.pursuers[0].pos, (Position{0, 2}));
    EXPECT_EQ(next.pursuers[1].pos, (Position{1, 2}));
}

TEST(Step, WallsAndObstaclesCancelMoves)
{
    auto w = make_world(grid(5, 5, {{1, 1}}), {pursuer(0, {0, 0}), pursuer(1, {1, 0})}, {});
    auto next = step(w, {{0, Action::Up}, {1, Action::Down}});
    EXPECT_EQ(next.pursuers[0].pos, (Position{0, 0}));
    EXPECT_EQ(next.pursuers[1].pos, (Position{1, 0}));
}

TEST(Step, PursuerStayNeedsConfig)
{
    auto w = make_world(grid(5, 5), {pursuer(0, {2, 2})}, {});
    EXPECT_THROW(step(w, {{0, Action::Stay}}), WorldError);
    auto g = grid(5, 5);
    g.pursuer_stay = true;
    auto w2 = make_world(g, {pursuer(0, {2, 2})}, {});
    EXPECT_NO_THROW(step(w2, {{0, Action::Stay}}));
}

TEST(Step, UnknownAgentRejected)
{
    auto w = make_world(grid(5, 5), {pursuer(0, {2, 2})}, {});
    EXPECT_THROW(step(w, {{7, Action::Up}}), WorldError);
}

TEST(MakeWorld, RejectsBadLayouts)
{
    EXPECT_THROW(make_world(grid(5, 5), {pursuer(0, {5, 0})}, {}), WorldError);
    EXPECT_THROW(make_world(grid(5, 5), {pursuer(0, {1, 1}), pursuer(1, {1, 1})}, {}), WorldError);
    EXPECT_THROW(make_world(grid(5, 5), {pursuer(0, {1, 1})}, {evader(0, {2, 2})}), WorldError);
    EXPECT_THROW(make_world(grid(5, 5, {{1, 1}}), {pursuer(0, {1, 1})}, {}), WorldError);
}

// Random joint actions: no two alive agents share a cell and the captured
// count never decreases.
TEST(Step, RandomRolloutInvariants)
{
    std::mt19937_64 rng(7);
    std::vector<PursuerState> ps;
    for (int i = 0; i < 8; ++i) ps.push_back(pursuer(i, {i, 0}));
    std::vector<EvaderState> es;
    for (int j = 0; j < 4; ++j) es.push_back(evader(100 + j, {2 * j, 5}, 1 + j % 3));
    auto w = make_world(grid(8, 8, {{4, 3}, {5, 3}}), ps, es);
    std::uniform_int_distribution<int> pick(0, 3);
    std::uniform_int_distribution<int> pick5(0, 4);
    int captured = 0;
    for (int t = 0; t < 300; ++t) {
        JointActions acts;
        for (const auto& p : w.pursuers) acts[p.id] = kMoveActions[pick(rng)];
        for (const auto& e : w.evaders)
            if (!e.captured) acts[e.id] = kAllActions[pick5(rng)];
        w = step(w, acts);
        std::set<Position> cells;
        for (const auto& p : w.pursuers) {
            ASSERT_TRUE(cells.insert(p.pos).second);
            ASSERT_FALSE(w.is_obstacle(p.pos));
        }
        for (const auto& e : w.evaders) {
            if (!e.captured) {
                ASSERT_TRUE(cells.insert(e.pos).second);
            }
        }
        const int now = static_cast<int>(w.evaders.size()) - w.alive_evaders();
        ASSERT_GE(now, captured);
        captured = now;
    }
}

TEST(Snapshot, ListsAgents)
{
    auto w = make_world(grid(5, 5), {pursuer(0, {2, 2})}, {evader(10, {0, 0}, 2)});
    const auto s = snapshot_json(w);
    EXPECT_NE(s.find("\"tick\""), std::string::npos);
    EXPECT_NE(s.find("\"pursuers\""), std::string::npos);
    EXPECT_NE(s.find("\"evaders\""), std::string::npos);
}
