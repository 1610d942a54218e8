#include "pursuit/coalition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "pursuit/rng.hpp"

namespace pursuit {

bool Coalition::has_pursuer(AgentId id) const
{
    return std::find(pursuer_ids.begin(), pursuer_ids.end(), id) != pursuer_ids.end();
}

bool Coalition::has_evader(AgentId id) const
{
    return std::find(evader_ids.begin(), evader_ids.end(), id) != evader_ids.end();
}

std::string to_string(CoalitionEventKind k)
{
    switch (k) {
    case CoalitionEventKind::Formed: return "formed";
    case CoalitionEventKind::Captured: return "captured";
    case CoalitionEventKind::Expired: return "expired";
    case CoalitionEventKind::Completed: return "completed";
    case CoalitionEventKind::Reorganized: return "reorganized";
    }
    return "?";
}

const Coalition* OrganizerState::coalition_of_pursuer(AgentId id) const
{
    for (const auto& c : coalitions)
        if (c.has_pursuer(id)) return &c;
    return nullptr;
}

const Coalition* OrganizerState::coalition_of_evader(AgentId id) const
{
    for (const auto& c : coalitions)
        if (c.has_evader(id)) return &c;
    return nullptr;
}

AgentId select_organizer(const WorldState& world)
{
    if (world.pursuers.empty()) throw std::invalid_argument("no pursuers to pick an organizer from");
    const PursuerState* best = nullptr;
    double best_score = -1.0;
    for (const auto& p : world.pursuers) {
        const double score = confidence(p) + credit(p);
        if (score > best_score || (score == best_score && p.id < best->id)) {
            best = &p;
            best_score = score;
        }
    }
    return best->id;
}

int staffing_demand(const WorldState& world, const std::vector<AgentId>& evader_ids)
{
    if (evader_ids.empty()) throw std::invalid_argument("staffing demand of an empty group");
    int total = 0;
    for (AgentId id : evader_ids) {
        const auto* e = world.evader(id);
        if (!e) throw std::invalid_argument("unknown evader " + std::to_string(id));
        total += e->difficulty;
    }
    return total;
}

std::vector<EvaluatedEvader> evaluate_evaders(const WorldState& world)
{
    std::vector<EvaluatedEvader> out;
    for (const auto& e : world.evaders)
        if (!e.captured) out.push_back({e.id, e.pos, e.reward_mag, priority(e, world)});
    return out;
}

std::vector<Coalition> staff_groups(WorldState& world, const ClusterAssignment& assignment,
                                    const FormationParams& params,
                                    const std::vector<AgentId>& free_pursuers, int first_group_id)
{
    if (assignment.labels.empty()) throw std::invalid_argument("empty cluster assignment");

    struct Group {
        std::vector<AgentId> evaders;
        double priority = 0.0;
        int index = 0;
    };
    std::vector<Group> groups;
    for (auto& members : assignment.groups()) {
        Group g;
        g.index = static_cast<int>(groups.size());
        for (AgentId id : members) g.priority += priority(*world.evader(id), world);
        g.evaders = std::move(members);
        groups.push_back(std::move(g));
    }
    std::stable_sort(groups.begin(), groups.end(),
                     [](const Group& a, const Group& b) { return a.priority > b.priority; });

    std::vector<AgentId> pool = free_pursuers;
    std::sort(pool.begin(), pool.end());

    std::vector<Coalition> out;
    for (const auto& g : groups) {
        const int demand = staffing_demand(world, g.evaders);

        std::vector<std::pair<double, AgentId>> scored;
        scored.reserve(pool.size());
        for (AgentId pid : pool) {
            const auto& p = *world.pursuer(pid);
            double score = params.aggregation == ScoreAggregation::Max ? -1e300 : 0.0;
            for (AgentId eid : g.evaders) {
                const double mu = membership(*world.evader(eid), p, world, params.membership);
                score = params.aggregation == ScoreAggregation::Max ? std::max(score, mu) : score + mu;
            }
            if (params.aggregation == ScoreAggregation::Mean) score /= static_cast<double>(g.evaders.size());
            scored.emplace_back(score, pid);
        }
        std::stable_sort(scored.begin(), scored.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });

        Coalition c;
        c.group_id = first_group_id + static_cast<int>(out.size());
        c.evader_ids = g.evaders;
        c.life_remaining = params.life;
        c.life_total = params.life;
        c.formed_tick = world.tick;
        const int take = std::min<int>(demand, static_cast<int>(scored.size()));
        c.understaffed = take < demand;
        for (int i = 0; i < take; ++i) c.pursuer_ids.push_back(scored[i].second);
        std::sort(c.pursuer_ids.begin(), c.pursuer_ids.end());

        for (AgentId pid : c.pursuer_ids) {
            if (params.learn_counters) world.pursuer(pid)->c_t += static_cast<int>(c.evader_ids.size());
            pool.erase(std::find(pool.begin(), pool.end(), pid));
        }
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

void record_formed(OrganizerState& state, const std::vector<Coalition>& formed, long tick)
{
    for (const auto& c : formed)
        state.events.push_back(
            {tick, CoalitionEventKind::Formed, c.group_id, c.evader_ids, c.pursuer_ids});
}

}  // namespace

OrganizerState form_coalitions(WorldState& world, const ClusterAssignment& assignment,
                               const FormationParams& params)
{
    OrganizerState state;
    state.organizer_id = select_organizer(world);
    state.evader_list = evaluate_evaders(world);
    std::vector<AgentId> all;
    for (const auto& p : world.pursuers) all.push_back(p.id);
    state.coalitions = staff_groups(world, assignment, params, all, 0);
    state.next_group_id = static_cast<int>(state.coalitions.size());
    record_formed(state, state.coalitions, world.tick);
    return state;
}

bool tick_coalitions(OrganizerState& state, WorldState& world, bool learn_counters)
{
    bool reorganize_needed = false;
    for (auto& c : state.coalitions) {
        if (c.dissolved()) {
            reorganize_needed = true;
            continue;
        }
        for (AgentId eid : c.evader_ids) {
            const auto* e = world.evader(eid);
            if (!e->captured ||
                std::find(c.captured_ids.begin(), c.captured_ids.end(), eid) != c.captured_ids.end())
                continue;
            c.captured_ids.push_back(eid);
            if (learn_counters)
                for (AgentId pid : c.pursuer_ids) world.pursuer(pid)->c_s += 1;
            state.events.push_back({world.tick, CoalitionEventKind::Captured, c.group_id, {eid},
                                    c.pursuer_ids});
        }
        if (c.captured_ids.size() == c.evader_ids.size()) {
            c.completed = true;
            state.events.push_back({world.tick, CoalitionEventKind::Completed, c.group_id,
                                    c.evader_ids, c.pursuer_ids});
            reorganize_needed = true;
            continue;
        }
        c.life_remaining = std::max(0, c.life_remaining - 1);
        if (c.life_remaining == 0) {
            c.expired = true;
            const int uncaught = static_cast<int>(c.evader_ids.size() - c.captured_ids.size());
            if (learn_counters)
                for (AgentId pid : c.pursuer_ids) world.pursuer(pid)->c_b += uncaught;
            state.events.push_back({world.tick, CoalitionEventKind::Expired, c.group_id,
                                    c.evader_ids, c.pursuer_ids});
            reorganize_needed = true;
        }
    }
    return reorganize_needed;
}

namespace {

void regroup_free(OrganizerState& state, WorldState& world, const ReorganizeParams& params)
{
    std::vector<AgentId> free_evaders;
    for (const auto& e : world.evaders)
        if (!e.captured && !state.coalition_of_evader(e.id)) free_evaders.push_back(e.id);
    std::vector<AgentId> free_pursuers;
    for (const auto& p : world.pursuers)
        if (!state.coalition_of_pursuer(p.id)) free_pursuers.push_back(p.id);

    state.organizer_id = select_organizer(world);
    state.evader_list = evaluate_evaders(world);
    if (free_evaders.empty()) return;

    const auto matrix = membership_matrix(world, params.formation.membership, free_evaders);
    ClusterParams cp = params.cluster;
    cp.seed = derive_seed(params.cluster.seed, {static_cast<std::uint64_t>(state.flexibility_count)});
    cp.k = std::min<int>(cp.k, static_cast<int>(matrix.rows()));

    ClusterAssignment assignment;
    if (params.method == ClusterMethod::Sofm) {
        SofmConfig sc = params.cluster.sofm;
        sc.seed = cp.seed;
        if (params.sofm_nodes_from_evaders) {
            sc.output_nodes = static_cast<int>(matrix.rows());
            sc.radius_initial = std::max(sc.radius_final, sc.output_nodes / 2.0);
        }
        const bool warm = params.sofm_warm_start && state.sofm &&
                          state.sofm->units() == sc.output_nodes && state.sofm->dim() == matrix.cols();
        SofmNetwork<double> net;
        if (warm) {
            net = *state.sofm;
            net.config = sc;
        } else {
            net = init_sofm<double>(matrix.cols(), sc);
        }
        train_sofm(net, matrix.values);
        assignment = assign(net, matrix);
        state.sofm = std::move(net);
    } else {
        assignment = cluster(matrix, params.method, cp);
    }

    auto formed = staff_groups(world, assignment, params.formation, free_pursuers, state.next_group_id);
    state.next_group_id += static_cast<int>(formed.size());
    record_formed(state, formed, world.tick);
    for (auto& c : formed) state.coalitions.push_back(std::move(c));
}

}  // namespace

OrganizerState organize(WorldState& world, const ReorganizeParams& params)
{
    OrganizerState state;
    regroup_free(state, world, params);
    return state;
}

void reorganize(OrganizerState& state, WorldState& world, const ReorganizeParams& params)
{
    std::erase_if(state.coalitions, [](const Coalition& c) { return c.dissolved(); });
    ++state.flexibility_count;
    state.events.push_back({world.tick, CoalitionEventKind::Reorganized, -1, {}, {}});
    regroup_free(state, world, params);
}

}  // namespace pursuit
