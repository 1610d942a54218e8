#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pursuit {

using AgentId = int;

struct Position {
    int x = 0;
    int y = 0;

    friend bool operator==(const Position&, const Position&) = default;
    friend auto operator<=>(const Position&, const Position&) = default;
};

/// Movement actions. UP decreases y (row index), DOWN increases it.
enum class Action : std::uint8_t { Up, Down, Left, Right, Stay };

/// Move actions in tie-break order.
inline constexpr std::array<Action, 4> kMoveActions{Action::Up, Action::Down, Action::Left,
                                                    Action::Right};
/// All actions in tie-break order, STAY last.
inline constexpr std::array<Action, 5> kAllActions{Action::Up, Action::Down, Action::Left,
                                                   Action::Right, Action::Stay};

Position apply(Position p, Action a);
std::string to_string(Action a);

enum class RangeMetric : std::uint8_t { Chebyshev, Euclidean, Manhattan };

double distance(Position a, Position b, RangeMetric metric);
double euclidean(Position a, Position b);

struct GridConfig {
    int width = 100;
    int height = 100;
    std::vector<Position> obstacles;
    RangeMetric range_metric = RangeMetric::Chebyshev;
    bool pursuer_stay = false;  ///< STAY is always legal for evaders.

    bool in_bounds(Position p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
};

struct PursuerState {
    AgentId id = 0;
    Position pos;
    int c_s = 0;  ///< successfully completed tasks
    int c_t = 0;  ///< tasks participated in
    int c_b = 0;  ///< abandoned evaders
    int range = 1;
};

struct EvaderState {
    AgentId id = 0;
    Position pos;
    int difficulty = 1;
    double reward_mag = 1.0;
    bool captured = false;
};

class WorldError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Aggregate world value. Construct through make_world() to get validation
/// and the obstacle lookup; copying is cheap enough to treat it as a value.
struct WorldState {
    GridConfig config;
    std::vector<PursuerState> pursuers;
    std::vector<EvaderState> evaders;
    long tick = 0;

    bool is_obstacle(Position p) const {
        return obstacle_mask_[static_cast<std::size_t>(p.y) * config.width + p.x] != 0;
    }
    const PursuerState* pursuer(AgentId id) const;
    PursuerState* pursuer(AgentId id);
    const EvaderState* evader(AgentId id) const;
    EvaderState* evader(AgentId id);
    int alive_evaders() const;

    /// Rebuilds the obstacle lookup after `config.obstacles` changed.
    void rebuild_obstacles();

    friend bool operator==(const WorldState&, const WorldState&);

private:
    std::vector<std::uint8_t> obstacle_mask_;
};

/// Validates the configuration and agent layout and returns a world at tick 0.
/// Throws WorldError on out-of-bounds positions, overlaps, duplicate ids, or
/// counter invariants that do not hold.
WorldState make_world(GridConfig config, std::vector<PursuerState> pursuers,
                      std::vector<EvaderState> evaders);

/// Dense cell -> agent lookup for alive agents.
class Occupancy {
public:
    static constexpr int kEmpty = -1;

    explicit Occupancy(const WorldState& world);

    bool occupied(Position p) const { return at(p) != kEmpty; }
    AgentId at(Position p) const { return cells_[index(p)]; }
    bool pursuer_at(Position p) const { return kind_[index(p)] == 1; }
    bool evader_at(Position p) const { return kind_[index(p)] == 2; }

private:
    std::size_t index(Position p) const { return static_cast<std::size_t>(p.y) * width_ + p.x; }

    int width_;
    std::vector<AgentId> cells_;
    std::vector<std::uint8_t> kind_;
};

/// 4-adjacent in-bounds cells in the order UP, DOWN, LEFT, RIGHT.
std::vector<Position> neighbors(Position pos, const WorldState& world);

/// Blocked-neighbour count: pursuers, obstacles, and out-of-bounds sides.
int blocked_neighbor_count(Position pos, const WorldState& world, const Occupancy& occ);

bool is_captured(const EvaderState& evader, const WorldState& world);
bool is_captured(const EvaderState& evader, const WorldState& world, const Occupancy& occ);

int count_range_invaders(const EvaderState& evader, const WorldState& world);

using JointActions = std::map<AgentId, Action>;

/// Advances the world one tick with simultaneous movement. Agents missing
/// from `actions` stay in place. Throws WorldError for unknown or captured
/// agent ids, or a pursuer STAY when the config forbids it.
WorldState step(const WorldState& world, const JointActions& actions);

/// One JSON object describing every agent at the current tick.
std::string snapshot_json(const WorldState& world);

}  // namespace pursuit
