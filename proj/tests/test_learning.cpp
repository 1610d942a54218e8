#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "property_checks.hpp"
#include "pursuit/learning.hpp"

using namespace pursuit;

namespace {

GridConfig grid(int w, int h, std::vector<Position> obstacles = {})
{
    GridConfig g;
    g.width = w;
    g.height = h;
    g.obstacles = std::move(obstacles);
    return g;
}

// One far-away pursuer with range 1 keeps every priority at 1 / d.
WorldState lone_world(std::vector<EvaderState> evaders, int size = 20)
{
    PursuerState far;
    far.id = 0;
    far.pos = {size - 1, size - 1};
    return make_world(grid(size, size), {far}, std::move(evaders));
}

EvaderState evader(AgentId id, Position pos, int d = 2, double re = 2.0)
{
    EvaderState e;
    e.id = id;
    e.pos = pos;
    e.difficulty = d;
    e.reward_mag = re;
    return e;
}

Coalition group_of(std::vector<AgentId> ids)
{
    Coalition c;
    c.evader_ids = std::move(ids);
    return c;
}

}  // namespace

TEST(RewardField, PeakAndDistanceTwo)
{
    auto w = lone_world({evader(10, {5, 5})});
    const auto g = group_of({10});
    EXPECT_DOUBLE_EQ(group_reward({5, 5}, g, w), 1.0);
    EXPECT_NEAR(group_reward({5, 7}, g, w), std::exp(-2.0), 1e-15);
}

TEST(RewardField, OverlappingPeaks)
{
    auto w = lone_world({evader(10, {4, 5}), evader(11, {6, 5})});
    EXPECT_NEAR(group_reward({5, 5}, group_of({10, 11}), w), 2.0 * std::exp(-0.5), 1e-15);
}

TEST(RewardField, VarianceWidensBump)
{
    auto w = lone_world({evader(10, {5, 5})});
    EXPECT_NEAR(group_reward({5, 9}, group_of({10}), w, 4.0), std::exp(-2.0), 1e-15);
}

TEST(RewardField, EmptyGroupThrows)
{
    auto w = lone_world({evader(10, {5, 5})});
    w.evaders[0].captured = true;
    EXPECT_THROW(group_reward({0, 0}, group_of({10}), w), std::invalid_argument);
}

TEST(RewardField, FrozenPriorityOverridesLiveValue)
{
    auto w = lone_world({evader(10, {5, 5})});
    const PriorityOverrides frozen{{10, 3.0}};
    EXPECT_DOUBLE_EQ(group_reward({5, 5}, group_of({10}), w, 1.0, &frozen), 6.0);
}

TEST(RewardField, PermutationAndRadialMonotonicity)
{
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> u(0, 18);
    for (int trial = 0; trial < 200; ++trial) {
        std::set<Position> used{{19, 19}};
        std::vector<EvaderState> es;
        for (int j = 0; j < 4; ++j) {
            Position p;
            do {
                p = {u(rng), u(rng)};
            } while (!used.insert(p).second);
            es.push_back(evader(10 + j, p, 1 + j % 4, 1.0 + j));
        }
        auto w = lone_world(es);
        const Position q{u(rng), u(rng)};
        const double a = group_reward(q, group_of({10, 11, 12, 13}), w);
        const double b = group_reward(q, group_of({13, 11, 10, 12}), w);
        EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, a));
    }
    // A single evader walking away along a row.
    double prev = std::numeric_limits<double>::infinity();
    for (int x = 2; x < 12; ++x) {
        auto w = lone_world({evader(10, {x, 3})});
        const double r = group_reward({2, 3}, group_of({10}), w);
        EXPECT_LT(r, prev);
        prev = r;
    }
}

TEST(RewardField, MaterializedValues)
{
    RewardField f(1, 4, 3, {{{1, 2}, 2.0}});
    const auto v = f.values();
    ASSERT_EQ(v.rows(), 4);
    ASSERT_EQ(v.cols(), 3);
    EXPECT_DOUBLE_EQ(v(1, 2), 2.0);
    EXPECT_DOUBLE_EQ(v(0, 0), f({0, 0}));
}

TEST(QUpdate, Examples)
{
    QTable t(0, 3, 3, QParams{1.0, 0.9, 0.0});
    q_update(t, {{0, 0}, Action::Right, 2.5, {1, 0}});
    EXPECT_DOUBLE_EQ(t.at({0, 0}, Action::Right), 2.5);

    QTable frozen(0, 3, 3, QParams{0.0, 0.9, 0.0});
    frozen.at({0, 0}, Action::Up) = 0.7;
    q_update(frozen, {{0, 0}, Action::Up, 5.0, {0, 0}});
    EXPECT_DOUBLE_EQ(frozen.at({0, 0}, Action::Up), 0.7);

    QTable half(0, 3, 3, QParams{0.5, 0.9, 0.0});
    half.at({1, 0}, Action::Left) = 2.0;
    q_update(half, {{0, 0}, Action::Right, 1.0, {1, 0}});
    EXPECT_NEAR(half.at({0, 0}, Action::Right), 1.4, 1e-15);

    EXPECT_THROW(q_update(half, {{0, 0}, Action::Stay, 1.0, {0, 0}}), std::invalid_argument);
}

TEST(QTable, RejectsBadParameters)
{
    EXPECT_THROW(QTable(0, 2, 2, QParams{0.3, 1.0, 0.1}), std::invalid_argument);
    EXPECT_THROW(QTable(0, 2, 2, QParams{0.3, 0.9, 1.5}), std::invalid_argument);
}

TEST(QTable, FrameOffsetShiftsLookup)
{
    QTable t(0, 5, 5);
    t.set_frame({2, 2});
    t.at({0, 0}, Action::Down) = 3.0;
    t.set_frame({0, 0});
    EXPECT_DOUBLE_EQ(t.at({2, 2}, Action::Down), 3.0);
    EXPECT_FALSE(t.contains({5, 0}));
}

TEST(SelectAction, GreedyAndTieBreak)
{
    QTable t(0, 3, 3, QParams{0.3, 0.9, 0.0});
    Rng rng(1);
    EXPECT_EQ(select_action(t, {1, 1}, rng), Action::Up);
    t.at({1, 1}, Action::Left) = 0.5;
    t.at({1, 1}, Action::Right) = 0.7;
    EXPECT_EQ(select_action(t, {1, 1}, rng), Action::Right);
    t.at({1, 1}, Action::Down) = 0.7;
    EXPECT_EQ(select_action(t, {1, 1}, rng), Action::Down);
    const std::array<Action, 2> legal{Action::Left, Action::Up};
    EXPECT_EQ(select_action(t, {1, 1}, rng, legal), Action::Left);
}

TEST(SelectAction, ArgmaxInvariantUnderPositiveScaling)
{
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_real_distribution<double> k(0.001, 1000.0);
    Rng rng(0);
    for (int trial = 0; trial < 1000; ++trial) {
        QTable t(0, 1, 1, QParams{0.3, 0.9, 0.0});
        for (Action a : kMoveActions) t.at({0, 0}, a) = u(gen);
        const Action before = select_action(t, {0, 0}, rng);
        const double c = k(gen);
        for (Action a : kMoveActions) t.at({0, 0}, a) *= c;
        EXPECT_EQ(select_action(t, {0, 0}, rng), before);
    }
}

TEST(SelectAction, UniformWhenFullyExploring)
{
    QTable t(0, 3, 3, QParams{0.3, 0.9, 1.0});
    t.at({1, 1}, Action::Right) = 10.0;
    Rng rng(123);
    constexpr int draws = 10000;
    for (const std::vector<Action>& legal :
         {std::vector<Action>(kMoveActions.begin(), kMoveActions.end()), std::vector<Action>{Action::Down, Action::Right}}) {
        std::map<Action, int> counts;
        for (int i = 0; i < draws; ++i) ++counts[select_action(t, {1, 1}, rng, legal)];
        const double p = 1.0 / static_cast<double>(legal.size());
        const double sigma = std::sqrt(draws * p * (1.0 - p));
        ASSERT_EQ(counts.size(), legal.size());
        for (Action a : legal) EXPECT_NEAR(counts[a], draws * p, 3.0 * sigma) << to_string(a);
    }
}

TEST(GridModel, LegalityAndBlockedSuccessor)
{
    auto w = make_world(grid(3, 3, {{1, 0}}), {}, {});
    GridModel m(w, [](Position) { return 0.0; });
    EXPECT_EQ(m.legal_actions({0, 0}), (std::vector<Action>{Action::Down}));
    m.block({0, 1});
    EXPECT_TRUE(m.legal({0, 0}, Action::Down));
    EXPECT_EQ(m.successor({0, 0}, Action::Down), (Position{0, 0}));
}

TEST(QLearning, MatchesValueIterationOracle)
{
    const auto m = checks::q_learning_vs_value_iteration(2024);
    EXPECT_GE(m.ratio(), 0.95) << m.matched << "/" << m.compared;
    EXPECT_GT(m.compared, 30);
    EXPECT_LE(m.seconds, 10.0);
}

TEST(QLearning, GreedyFixedTablesGiveFixedTrajectories)
{
    const RewardField field(0, 7, 7, {{{5, 1}, 1.0}});
    const GridModel model(7, 7, [&field](Position p) { return field(p); });
    QTable seed_table(0, 7, 7, QParams{0.0, 0.9, 0.0});
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 7; ++x)
            for (Action a : kMoveActions) seed_table.at({x, y}, a) = u(gen);

    auto walk = [&](std::uint64_t rng_seed) {
        QTable t = seed_table;
        Rng rng(rng_seed);
        PursuerState p;
        p.pos = {0, 6};
        std::vector<Position> path;
        for (int i = 0; i < 40; ++i) {
            const auto d = pursuer_policy_step(p, &field, &t, model, rng);
            p.pos = model.successor(p.pos, d.action);
            finish_transition(t, d.pending, p.pos, model);
            path.push_back(p.pos);
        }
        return path;
    };
    EXPECT_EQ(walk(1), walk(999));
}

TEST(PursuerPolicy, StaysOnStaticPeak)
{
    const Position peak{3, 3};
    const RewardField field(0, 7, 7, {{peak, 1.0}});
    const GridModel model(7, 7, [&field](Position p) { return field(p); });
    QTable t(0, 7, 7, QParams{0.3, 0.9, 0.3});
    Rng rng(5);
    train_q(t, model, 20000, 30, rng);
    t.params().epsilon = 0.0;
    PursuerState p;
    p.pos = peak;
    for (int i = 0; i < 100; ++i) {
        const auto d = pursuer_policy_step(p, &field, &t, model, rng);
        p.pos = model.successor(p.pos, d.action);
        finish_transition(t, d.pending, p.pos, model);
        ASSERT_LE(std::abs(p.pos.x - peak.x) + std::abs(p.pos.y - peak.y), 1) << "step " << i;
    }
}

TEST(PursuerPolicy, UnassignedWandersUniformly)
{
    const GridModel model(5, 5, [](Position) { return 0.0; });
    PursuerState p;
    p.pos = {0, 2};
    Rng rng(77);
    std::map<Action, int> counts;
    for (int i = 0; i < 3000; ++i) ++counts[pursuer_policy_step(p, nullptr, nullptr, model, rng).action];
    EXPECT_EQ(counts.count(Action::Left), 0u);
    for (Action a : {Action::Up, Action::Down, Action::Right}) EXPECT_NEAR(counts[a], 1000, 3 * std::sqrt(3000 * (1.0 / 3) * (2.0 / 3)));
}

TEST(PursuerPolicy, HomesInWhenFieldIsOutOfReach)
{
    const RewardField field(0, 100, 100, {{{90, 90}, 1.0}});
    const GridModel model(100, 100, [&field](Position p) { return field(p); });
    PursuerState p;
    p.pos = {5, 5};
    Rng rng(1);
    QTable t(0, 100, 100, QParams{0.3, 0.9, 0.0});
    EXPECT_EQ(pursuer_policy_step(p, &field, &t, model, rng).action, Action::Down);

    PolicyParams plain;
    plain.home_when_flat = false;
    QTable t2(0, 100, 100, QParams{0.3, 0.9, 0.0});
    EXPECT_EQ(pursuer_policy_step(p, &field, &t2, model, rng, plain).action, Action::Up);
}

TEST(EvaderPolicy, Examples)
{
    PursuerState left;
    left.pos = {1, 2};
    EvaderState e = evader(10, {2, 2});
    auto w = make_world(grid(5, 5), {left}, {e});
    EXPECT_EQ(evader_policy_step(w.evaders[0], w, Occupancy(w)), Action::Right);

    PursuerState a;
    a.pos = {1, 2};
    PursuerState b;
    b.id = 1;
    b.pos = {3, 2};
    auto corridor = make_world(grid(5, 5, {{2, 3}}), {a, b}, {e});
    EXPECT_EQ(evader_policy_step(corridor.evaders[0], corridor, Occupancy(corridor)), Action::Up);

    PursuerState c;
    c.pos = {1, 0};
    PursuerState d;
    d.id = 1;
    d.pos = {0, 1};
    auto boxed = make_world(grid(5, 5), {c, d}, {evader(10, {0, 0})});
    EXPECT_EQ(evader_policy_step(boxed.evaders[0], boxed, Occupancy(boxed)), Action::Stay);
}

TEST(DiscountedReturn, Examples)
{
    EXPECT_DOUBLE_EQ(discounted_return(std::vector<double>{1.0}, 0.3), 1.0);
    EXPECT_DOUBLE_EQ(discounted_return(std::vector<double>{1.0, 1.0}, 0.5), 1.5);
    EXPECT_NEAR(discounted_return(std::vector<double>{2.0, 0.0, 4.0}, 0.9), 5.24, 1e-12);
}
