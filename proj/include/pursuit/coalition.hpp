#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pursuit/clustering.hpp"
#include "pursuit/grid_world.hpp"
#include "pursuit/membership.hpp"

namespace pursuit {

struct Coalition {
    int group_id = 0;
    std::vector<AgentId> evader_ids;
    std::vector<AgentId> pursuer_ids;
    int life_remaining = 0;
    int life_total = 0;
    bool understaffed = false;
    long formed_tick = 0;
    std::vector<AgentId> captured_ids;  ///< captures already rewarded
    bool completed = false;             ///< every evader captured
    bool expired = false;               ///< life ran out first

    bool dissolved() const { return completed || expired; }
    bool has_pursuer(AgentId id) const;
    bool has_evader(AgentId id) const;
    int age() const { return life_total - life_remaining; }
};

struct EvaluatedEvader {
    AgentId id = 0;
    Position pos;
    double reward = 0.0;
    double priority = 0.0;
};

enum class CoalitionEventKind { Formed, Captured, Expired, Completed, Reorganized };

std::string to_string(CoalitionEventKind k);

struct CoalitionEvent {
    long tick = 0;
    CoalitionEventKind kind = CoalitionEventKind::Formed;
    int group_id = -1;
    std::vector<AgentId> evaders;
    std::vector<AgentId> pursuers;
};

struct OrganizerState {
    AgentId organizer_id = 0;
    std::vector<EvaluatedEvader> evader_list;
    std::vector<Coalition> coalitions;
    int flexibility_count = 0;
    int next_group_id = 0;
    std::vector<CoalitionEvent> events;
    std::optional<SofmNetwork<double>> sofm;  ///< kept for warm starts

    const Coalition* coalition_of_pursuer(AgentId id) const;
    const Coalition* coalition_of_evader(AgentId id) const;
};

/// Multi-evader group score of a pursuer.
enum class ScoreAggregation { Max, Mean };

struct FormationParams {
    MembershipOptions membership;
    int life = 30;
    ScoreAggregation aggregation = ScoreAggregation::Max;
    bool learn_counters = true;
};

struct ReorganizeParams {
    ClusterMethod method = ClusterMethod::Singleton;
    ClusterParams cluster;
    bool sofm_warm_start = true;
    /// Size the SOFM output line to the number of evaders being grouped.
    bool sofm_nodes_from_evaders = true;
    FormationParams formation;
};

/// Pursuer with the highest confidence + credit; lowest id on ties.
AgentId select_organizer(const WorldState& world);

/// Pursuers needed by a group: the sum of member difficulties.
int staffing_demand(const WorldState& world, const std::vector<AgentId>& evader_ids);

/// Organizer's evaluated evader list (alive evaders with reward and priority).
std::vector<EvaluatedEvader> evaluate_evaders(const WorldState& world);

/// Greedy staffing of the assignment's groups from `free_pursuers`. Groups
/// are processed by descending summed priority; each takes its demand of the
/// best-scoring free pursuers. Increments task counters of assigned pursuers
/// by the group size when counters are learned.
std::vector<Coalition> staff_groups(WorldState& world, const ClusterAssignment& assignment,
                                    const FormationParams& params,
                                    const std::vector<AgentId>& free_pursuers, int first_group_id);

OrganizerState form_coalitions(WorldState& world, const ClusterAssignment& assignment,
                               const FormationParams& params);

/// Rewards captures, decrements life and punishes expired coalitions.
/// Returns true when any coalition completed or expired.
bool tick_coalitions(OrganizerState& state, WorldState& world, bool learn_counters = true);

/// Initial organization: clusters all alive evaders and staffs every group
/// from the full pursuer pool. Does not count as a reorganization.
OrganizerState organize(WorldState& world, const ReorganizeParams& params);

/// Drops dissolved coalitions and regroups the evaders and pursuers they
/// released. Coalitions still alive keep their members.
void reorganize(OrganizerState& state, WorldState& world, const ReorganizeParams& params);

}  // namespace pursuit
