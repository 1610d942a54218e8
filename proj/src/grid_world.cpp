#include "pursuit/grid_world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

namespace pursuit {

Position apply(Position p, Action a)
{
    switch (a) {
    case Action::Up: return {p.x, p.y - 1};
    case Action::Down: return {p.x, p.y + 1};
    case Action::Left: return {p.x - 1, p.y};
    case Action::Right: return {p.x + 1, p.y};
    case Action::Stay: return p;
    }
    return p;
}

std::string to_string(Action a)
{
    switch (a) {
    case Action::Up: return "UP";
    case Action::Down: return "DOWN";
    case Action::Left: return "LEFT";
    case Action::Right: return "RIGHT";
    case Action::Stay: return "STAY";
    }
    return "?";
}

double euclidean(Position a, Position b)
{
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

double distance(Position a, Position b, RangeMetric metric)
{
    const int dx = std::abs(a.x - b.x);
    const int dy = std::abs(a.y - b.y);
    switch (metric) {
    case RangeMetric::Chebyshev: return std::max(dx, dy);
    case RangeMetric::Manhattan: return dx + dy;
    case RangeMetric::Euclidean: return euclidean(a, b);
    }
    return 0.0;
}

const PursuerState* WorldState::pursuer(AgentId id) const
{
    for (const auto& p : pursuers)
        if (p.id == id) return &p;
    return nullptr;
}

PursuerState* WorldState::pursuer(AgentId id)
{
    return const_cast<PursuerState*>(std::as_const(*this).pursuer(id));
}

const EvaderState* WorldState::evader(AgentId id) const
{
    for (const auto& e : evaders)
        if (e.id == id) return &e;
    return nullptr;
}

EvaderState* WorldState::evader(AgentId id)
{
    return const_cast<EvaderState*>(std::as_const(*this).evader(id));
}

int WorldState::alive_evaders() const
{
    return static_cast<int>(
        std::count_if(evaders.begin(), evaders.end(), [](const auto& e) { return !e.captured; }));
}

void WorldState::rebuild_obstacles()
{
    obstacle_mask_.assign(static_cast<std::size_t>(config.width) * config.height, 0);
    for (const auto& o : config.obstacles) {
        if (!config.in_bounds(o)) throw WorldError("obstacle outside grid");
        obstacle_mask_[static_cast<std::size_t>(o.y) * config.width + o.x] = 1;
    }
}

bool operator==(const WorldState& a, const WorldState& b)
{
    auto same_pursuer = [](const PursuerState& l, const PursuerState& r) {
        return l.id == r.id && l.pos == r.pos && l.c_s == r.c_s && l.c_t == r.c_t &&
               l.c_b == r.c_b && l.range == r.range;
    };
    auto same_evader = [](const EvaderState& l, const EvaderState& r) {
        return l.id == r.id && l.pos == r.pos && l.difficulty == r.difficulty &&
               l.reward_mag == r.reward_mag && l.captured == r.captured;
    };
    return a.tick == b.tick && a.config.width == b.config.width &&
           a.config.height == b.config.height && a.obstacle_mask_ == b.obstacle_mask_ &&
           std::equal(a.pursuers.begin(), a.pursuers.end(), b.pursuers.begin(), b.pursuers.end(),
                      same_pursuer) &&
           std::equal(a.evaders.begin(), a.evaders.end(), b.evaders.begin(), b.evaders.end(),
                      same_evader);
}

WorldState make_world(GridConfig config, std::vector<PursuerState> pursuers,
                      std::vector<EvaderState> evaders)
{
    if (config.width < 2 || config.height < 2) throw WorldError("grid must be at least 2x2");

    WorldState world;
    world.config = std::move(config);
    world.pursuers = std::move(pursuers);
    world.evaders = std::move(evaders);
    world.rebuild_obstacles();

    std::set<AgentId> ids;
    std::set<Position> cells;
    auto place = [&](AgentId id, Position pos, bool occupies) {
        if (!ids.insert(id).second) throw WorldError("duplicate agent id " + std::to_string(id));
        if (!world.config.in_bounds(pos))
            throw WorldError("agent " + std::to_string(id) + " outside grid");
        if (world.is_obstacle(pos))
            throw WorldError("agent " + std::to_string(id) + " placed on obstacle");
        if (occupies && !cells.insert(pos).second)
            throw WorldError("agent " + std::to_string(id) + " overlaps another agent");
    };
    for (const auto& p : world.pursuers) {
        if (p.c_s < 0 || p.c_t < 0 || p.c_b < 0 || p.c_s > p.c_t || p.c_b > p.c_t)
            throw WorldError("inconsistent task counters for pursuer " + std::to_string(p.id));
        if (p.range < 1) throw WorldError("pursuit range must be >= 1");
        place(p.id, p.pos, true);
    }
    for (const auto& e : world.evaders) {
        if (e.difficulty < 1) throw WorldError("evader difficulty must be >= 1");
        place(e.id, e.pos, !e.captured);
    }
    return world;
}

Occupancy::Occupancy(const WorldState& world)
    : width_(world.config.width),
      cells_(static_cast<std::size_t>(world.config.width) * world.config.height, kEmpty),
      kind_(cells_.size(), 0)
{
    for (const auto& p : world.pursuers) {
        cells_[index(p.pos)] = p.id;
        kind_[index(p.pos)] = 1;
    }
    for (const auto& e : world.evaders) {
        if (e.captured) continue;
        cells_[index(e.pos)] = e.id;
        kind_[index(e.pos)] = 2;
    }
}

std::vector<Position> neighbors(Position pos, const WorldState& world)
{
    std::vector<Position> out;
    out.reserve(4);
    for (Action a : kMoveActions) {
        const Position n = apply(pos, a);
        if (world.config.in_bounds(n)) out.push_back(n);
    }
    return out;
}

int blocked_neighbor_count(Position pos, const WorldState& world, const Occupancy& occ)
{
    int blocked = 0;
    for (Action a : kMoveActions) {
        const Position n = apply(pos, a);
        // Walls block escape exactly like obstacles.
        if (!world.config.in_bounds(n) || world.is_obstacle(n) || occ.pursuer_at(n)) ++blocked;
    }
    return blocked;
}

bool is_captured(const EvaderState& evader, const WorldState& world, const Occupancy& occ)
{
    return evader.difficulty <= blocked_neighbor_count(evader.pos, world, occ);
}

bool is_captured(const EvaderState& evader, const WorldState& world)
{
    return is_captured(evader, world, Occupancy(world));
}

int count_range_invaders(const EvaderState& evader, const WorldState& world)
{
    int n = 0;
    for (const auto& p : world.pursuers)
        if (distance(p.pos, evader.pos, world.config.range_metric) <= p.range) ++n;
    return n;
}

namespace {

struct Mover {
    AgentId id;
    Position from;
    Position to;
    bool is_pursuer;
    PursuerState* pursuer = nullptr;
    EvaderState* evader = nullptr;

    bool moving() const { return from != to; }
};

}  // namespace

WorldState step(const WorldState& world, const JointActions& actions)
{
    WorldState next = world;
    std::vector<Mover> movers;
    movers.reserve(next.pursuers.size() + next.evaders.size());
    for (auto& p : next.pursuers) movers.push_back({p.id, p.pos, p.pos, true, &p, nullptr});
    for (auto& e : next.evaders)
        if (!e.captured) movers.push_back({e.id, e.pos, e.pos, false, nullptr, &e});
    std::sort(movers.begin(), movers.end(),
              [](const Mover& a, const Mover& b) { return a.id < b.id; });

    auto find = [&](AgentId id) -> Mover* {
        auto it = std::lower_bound(movers.begin(), movers.end(), id,
                                   [](const Mover& m, AgentId v) { return m.id < v; });
        return it != movers.end() && it->id == id ? &*it : nullptr;
    };

    for (const auto& [id, action] : actions) {
        Mover* m = find(id);
        if (!m) throw WorldError("action for unknown or captured agent " + std::to_string(id));
        if (m->is_pursuer && action == Action::Stay && !next.config.pursuer_stay)
            throw WorldError("STAY is not enabled for pursuers");
        const Position target = apply(m->from, action);
        if (next.config.in_bounds(target) && !next.is_obstacle(target)) m->to = target;
    }

    const int width = next.config.width;
    auto cell = [width](Position p) { return static_cast<std::size_t>(p.y) * width + p.x; };
    std::vector<int> occupant(static_cast<std::size_t>(width) * next.config.height, -1);
    for (std::size_t i = 0; i < movers.size(); ++i) occupant[cell(movers[i].from)] = static_cast<int>(i);

    // Same-target conflicts: movers are sorted by id, so the first claimant wins.
    std::vector<int> claimant(occupant.size(), -1);
    for (std::size_t i = 0; i < movers.size(); ++i) {
        Mover& m = movers[i];
        if (!m.moving()) continue;
        int& c = claimant[cell(m.to)];
        if (c < 0)
            c = static_cast<int>(i);
        else
            m.to = m.from;
    }

    // Head-on swaps are not allowed.
    for (auto& m : movers) {
        if (!m.moving()) continue;
        const int j = occupant[cell(m.to)];
        if (j >= 0 && movers[j].moving() && movers[j].to == m.from) {
            movers[j].to = movers[j].from;
            m.to = m.from;
        }
    }

    // Cancel moves into cells whose occupant stays, until nothing changes.
    for (bool changed = true; changed;) {
        changed = false;
        for (auto& m : movers) {
            if (!m.moving()) continue;
            const int j = occupant[cell(m.to)];
            if (j >= 0 && !movers[j].moving()) {
                m.to = m.from;
                changed = true;
            }
        }
    }

    for (const auto& m : movers) {
        if (m.pursuer) m.pursuer->pos = m.to;
        if (m.evader) m.evader->pos = m.to;
    }

    const Occupancy occ(next);
    std::vector<EvaderState*> caught;
    for (auto& e : next.evaders)
        if (!e.captured && is_captured(e, next, occ)) caught.push_back(&e);
    for (auto* e : caught) e->captured = true;

    ++next.tick;
    return next;
}

std::string snapshot_json(const WorldState& world)
{
    nlohmann::json j;
    j["tick"] = world.tick;
    auto& ps = j["pursuers"] = nlohmann::json::array();
    for (const auto& p : world.pursuers)
        ps.push_back({{"id", p.id}, {"x", p.pos.x}, {"y", p.pos.y}, {"c_s", p.c_s},
                      {"c_t", p.c_t}, {"c_b", p.c_b}});
    auto& es = j["evaders"] = nlohmann::json::array();
    for (const auto& e : world.evaders)
        es.push_back({{"id", e.id}, {"x", e.pos.x}, {"y", e.pos.y}, {"captured", e.captured}});
    return j.dump();
}

}  // namespace pursuit
