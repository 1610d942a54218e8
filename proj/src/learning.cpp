#include "pursuit/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pursuit {

RewardField::RewardField(int group_id, int width, int height, std::vector<RewardTerm> terms,
                         double variance)
    : group_id_(group_id), width_(width), height_(height), terms_(std::move(terms))
{
    if (!(variance > 0.0)) throw std::invalid_argument("reward variance must be > 0");
    inv_two_var_ = 1.0 / (2.0 * variance);
}

double RewardField::operator()(Position p) const
{
    double r = 0.0;
    for (const auto& t : terms_) {
        const double dx = p.x - t.pos.x;
        const double dy = p.y - t.pos.y;
        r += t.weight * std::exp(-(dx * dx + dy * dy) * inv_two_var_);
    }
    return r;
}

Eigen::ArrayXXd RewardField::values() const
{
    Eigen::ArrayXXd out(width_, height_);
    for (int x = 0; x < width_; ++x)
        for (int y = 0; y < height_; ++y) out(x, y) = (*this)(x, y);
    return out;
}

namespace {

std::vector<RewardTerm> group_terms(const Coalition& group, const WorldState& world,
                                    const PriorityOverrides* frozen)
{
    std::vector<RewardTerm> terms;
    for (AgentId id : group.evader_ids) {
        const auto* e = world.evader(id);
        if (!e || e->captured) continue;
        double pr = priority(*e, world);
        if (frozen) {
            if (auto it = frozen->find(id); it != frozen->end()) pr = it->second;
        }
        terms.push_back({e->pos, e->reward_mag * pr});
    }
    if (terms.empty()) throw std::invalid_argument("reward field of a group without alive evaders");
    return terms;
}

}  // namespace

double group_reward(Position q, const Coalition& group, const WorldState& world, double variance,
                    const PriorityOverrides* frozen)
{
    return RewardField(group.group_id, world.config.width, world.config.height,
                       group_terms(group, world, frozen), variance)(q);
}

RewardField make_reward_field(const Coalition& group, const WorldState& world, double variance,
                              const PriorityOverrides* frozen)
{
    return RewardField(group.group_id, world.config.width, world.config.height,
                       group_terms(group, world, frozen), variance);
}

QTable::QTable(AgentId owner, int width, int height, QParams params)
    : owner_(owner), width_(width), height_(height), params_(params),
      q_(Values::Zero(static_cast<Eigen::Index>(width) * height, 4))
{
    if (params.discount < 0.0 || params.discount >= 1.0)
        throw std::invalid_argument("discount must lie in [0, 1)");
    if (params.epsilon < 0.0 || params.epsilon > 1.0)
        throw std::invalid_argument("epsilon must lie in [0, 1]");
}

bool QTable::contains(Position s) const
{
    const int x = s.x + offset_.x;
    const int y = s.y + offset_.y;
    return x >= 0 && y >= 0 && x < width_ && y < height_;
}

void q_update(QTable& table, const TransitionRecord& tr)
{
    if (tr.a == Action::Stay) throw std::invalid_argument("Q tables hold move actions only");
    const auto& p = table.params();
    const double target = tr.r + p.discount * table.max_value(tr.s_next);
    double& q = table.at(tr.s, tr.a);
    q = (1.0 - p.alpha) * q + p.alpha * target;
}

Action greedy_action(const QTable& table, Position s, std::span<const Action> legal)
{
    std::span<const Action> actions = legal.empty() ? std::span<const Action>(kMoveActions) : legal;
    Action best = actions.front();
    double best_q = -std::numeric_limits<double>::infinity();
    // kMoveActions order is the tie-break order, so only strict improvements win.
    for (Action a : kMoveActions) {
        if (std::find(actions.begin(), actions.end(), a) == actions.end()) continue;
        const double q = table.at(s, a);
        if (q > best_q) {
            best_q = q;
            best = a;
        }
    }
    return best;
}

Action select_action(const QTable& table, Position s, Rng& rng, std::span<const Action> legal)
{
    std::span<const Action> actions = legal.empty() ? std::span<const Action>(kMoveActions) : legal;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < table.params().epsilon) {
        std::uniform_int_distribution<std::size_t> pick(0, actions.size() - 1);
        return actions[pick(rng)];
    }
    return greedy_action(table, s, actions);
}

GridModel::GridModel(int width, int height, RewardFn reward)
    : width_(width), height_(height), reward_(std::move(reward))
{
}

GridModel::GridModel(const WorldState& world, RewardFn reward)
    : width_(world.config.width), height_(world.config.height), reward_(std::move(reward))
{
    if (!world.config.obstacles.empty()) {
        obstacles_.assign(static_cast<std::size_t>(width_) * height_, 0);
        for (const auto& o : world.config.obstacles) obstacles_[index(o)] = 1;
    }
}

void GridModel::block(Position p)
{
    if (blocked_.empty()) blocked_.assign(static_cast<std::size_t>(width_) * height_, 0);
    blocked_[index(p)] = 1;
}

bool GridModel::legal(Position s, Action a) const
{
    const Position t = apply(s, a);
    return in_bounds(t) && !obstacle(t);
}

std::vector<Action> GridModel::legal_actions(Position s) const
{
    std::vector<Action> out;
    for (Action a : kMoveActions)
        if (legal(s, a)) out.push_back(a);
    return out;
}

Position GridModel::successor(Position s, Action a) const
{
    const Position t = apply(s, a);
    return passable(t) ? t : s;
}

void train_q(QTable& table, const GridModel& model, int episodes, int steps, Rng& rng)
{
    std::vector<Position> starts;
    for (int y = 0; y < model.height(); ++y)
        for (int x = 0; x < model.width(); ++x)
            if (model.passable({x, y})) starts.push_back({x, y});
    if (starts.empty()) return;
    std::uniform_int_distribution<std::size_t> pick(0, starts.size() - 1);

    for (int ep = 0; ep < episodes; ++ep) {
        Position s = starts[pick(rng)];
        for (int t = 0; t < steps; ++t) {
            const auto legal = model.legal_actions(s);
            if (legal.empty()) break;
            const Action a = select_action(table, s, rng, legal);
            const Position next = model.successor(s, a);
            q_update(table, {s, a, model.reward(next), next});
            s = next;
        }
    }
}

void plan_q(QTable& table, const GridModel& model, Position s, int rollouts, int horizon, Rng& rng)
{
    const auto legal = model.legal_actions(s);
    for (Action a : legal) {
        const Position next = model.successor(s, a);
        q_update(table, {s, a, model.reward(next), next});
    }
    for (int r = 0; r < rollouts; ++r) {
        Position cur = s;
        for (int t = 0; t < horizon; ++t) {
            const auto acts = model.legal_actions(cur);
            if (acts.empty()) break;
            const Action a = select_action(table, cur, rng, acts);
            const Position next = model.successor(cur, a);
            if (!table.contains(next)) break;
            q_update(table, {cur, a, model.reward(next), next});
            cur = next;
        }
    }
}

namespace {

bool flat_around(const GridModel& model, Position s, const std::vector<Action>& legal)
{
    if (model.reward(s) != 0.0) return false;
    for (Action a : legal)
        if (model.reward(model.successor(s, a)) != 0.0) return false;
    return true;
}

Action homing_action(const RewardField& field, Position s, const std::vector<Action>& legal)
{
    auto gap = [&](Position q) {
        int best = std::numeric_limits<int>::max();
        for (const auto& t : field.terms())
            best = std::min(best, std::abs(q.x - t.pos.x) + std::abs(q.y - t.pos.y));
        return best;
    };
    Action best = legal.front();
    int best_gap = gap(apply(s, best));
    for (Action a : legal) {
        const int g = gap(apply(s, a));
        if (g < best_gap) {
            best = a;
            best_gap = g;
        }
    }
    return best;
}

}  // namespace

PolicyDecision pursuer_policy_step(const PursuerState& p, const RewardField* field, QTable* table,
                                   const GridModel& model, Rng& rng, const PolicyParams& params)
{
    PolicyDecision d;
    auto legal = model.legal_actions(p.pos);
    if (legal.empty()) legal.assign(kMoveActions.begin(), kMoveActions.end());
    if (!field || field->empty() || !table) {
        std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
        d.action = legal[pick(rng)];
        d.pending = {p.pos, d.action, 0.0, apply(p.pos, d.action)};
        return d;
    }
    plan_q(*table, model, p.pos, params.rollouts, params.horizon, rng);
    if (params.home_when_flat && flat_around(model, p.pos, legal)) {
        d.action = homing_action(*field, p.pos, legal);
    } else {
        d.action = select_action(*table, p.pos, rng, legal);
    }
    const Position next = model.successor(p.pos, d.action);
    d.pending = {p.pos, d.action, model.reward(next), next};
    return d;
}

void finish_transition(QTable& table, TransitionRecord pending, Position actual_next,
                       const GridModel& model)
{
    pending.s_next = actual_next;
    pending.r = model.reward(actual_next);
    if (table.contains(pending.s) && table.contains(actual_next)) q_update(table, pending);
}

double nearest_pursuer_distance(Position p, const WorldState& world)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : world.pursuers) best = std::min(best, euclidean(p, q.pos));
    return best;
}

Action evader_policy_step(const EvaderState& e, const WorldState& world, const Occupancy& occ)
{
    Action best = Action::Stay;
    double best_d = -1.0;
    for (Action a : kAllActions) {
        const Position t = apply(e.pos, a);
        if (a != Action::Stay &&
            (!world.config.in_bounds(t) || world.is_obstacle(t) || occ.occupied(t)))
            continue;
        const double d = nearest_pursuer_distance(t, world);
        if (d > best_d) {
            best_d = d;
            best = a;
        }
    }
    return best;
}

double discounted_return(std::span<const double> rewards, double discount)
{
    double total = 0.0;
    double w = 1.0;
    for (double r : rewards) {
        total += w * r;
        w *= discount;
    }
    return total;
}

}  // namespace pursuit
