#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pursuit/coalition.hpp"
#include "pursuit/grid_world.hpp"
#include "pursuit/rng.hpp"

namespace pursuit {

// ---------------------------------------------------------------------------
// Group reward field

/// One Gaussian bump of the field: weight = reward magnitude * priority.
struct RewardTerm {
    Position pos;
    double weight = 0.0;
};

/// Immediate payoff of a coalition over the grid: a sum of Gaussian bumps
/// centred on the group's alive evaders. `variance` scales the bump width;
/// 1 gives exp(-(dx^2 + dy^2) / 2).
class RewardField {
public:
    RewardField() = default;
    RewardField(int group_id, int width, int height, std::vector<RewardTerm> terms,
                double variance = 1.0);

    double operator()(Position p) const;
    double operator()(int x, int y) const { return (*this)(Position{x, y}); }

    /// Materialized field, indexed values(x, y).
    Eigen::ArrayXXd values() const;

    int group_id() const { return group_id_; }
    int width() const { return width_; }
    int height() const { return height_; }
    const std::vector<RewardTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

private:
    int group_id_ = -1;
    int width_ = 0;
    int height_ = 0;
    std::vector<RewardTerm> terms_;
    double inv_two_var_ = 0.5;
};

/// Priority overrides keyed by evader id (frozen-at-formation mode).
using PriorityOverrides = std::map<AgentId, double>;

/// Sums Re_i * pr_i * exp(-((x - x_i)^2 + (y - y_i)^2) / (2 variance)) over
/// the group's alive evaders, with pr_i taken from the live world unless
/// overridden. Throws std::invalid_argument when no group evader is alive.
double group_reward(Position q, const Coalition& group, const WorldState& world,
                    double variance = 1.0, const PriorityOverrides* frozen = nullptr);

RewardField make_reward_field(const Coalition& group, const WorldState& world,
                              double variance = 1.0, const PriorityOverrides* frozen = nullptr);

// ---------------------------------------------------------------------------
// Tabular Q-learning

struct QParams {
    double alpha = 0.3;
    double discount = 0.9;
    double epsilon = 0.3;
};

/// Q(s, a) over grid cells and the four move actions. Unvisited entries are 0.
/// An optional frame offset shifts positions before lookup, which lets the
/// same table index states relative to a moving reference point.
class QTable {
public:
    using Values = Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor>;

    QTable() = default;
    QTable(AgentId owner, int width, int height, QParams params = {});

    AgentId owner() const { return owner_; }
    int width() const { return width_; }
    int height() const { return height_; }
    QParams& params() { return params_; }
    const QParams& params() const { return params_; }

    double& at(Position s, Action a) { return q_(index(s), action_index(a)); }
    double at(Position s, Action a) const { return q_(index(s), action_index(a)); }
    double max_value(Position s) const { return q_.row(index(s)).maxCoeff(); }
    bool contains(Position s) const;

    void set_frame(Position offset) { offset_ = offset; }
    Position frame() const { return offset_; }
    void reset() { q_.setZero(); }
    const Values& values() const { return q_; }

    static int action_index(Action a) { return static_cast<int>(a); }

private:
    Eigen::Index index(Position s) const
    {
        return static_cast<Eigen::Index>(s.y + offset_.y) * width_ + (s.x + offset_.x);
    }

    AgentId owner_ = -1;
    int width_ = 0;
    int height_ = 0;
    Position offset_{0, 0};
    QParams params_;
    Values q_;
};

struct TransitionRecord {
    Position s;
    Action a = Action::Up;
    double r = 0.0;
    Position s_next;
};

/// Q(s,a) <- (1 - alpha) Q(s,a) + alpha (r + discount * max_a' Q(s', a')).
void q_update(QTable& table, const TransitionRecord& tr);

/// Epsilon-greedy over `legal` (all four moves when empty). Greedy ties go
/// to the first action in UP, DOWN, LEFT, RIGHT order.
Action select_action(const QTable& table, Position s, Rng& rng, std::span<const Action> legal = {});

Action greedy_action(const QTable& table, Position s, std::span<const Action> legal = {});

/// Deterministic grid dynamics used for learning. Moves out of bounds or
/// into static obstacles are illegal; legal moves into a `blocked` cell leave
/// the agent where it is.
class GridModel {
public:
    using RewardFn = std::function<double(Position)>;

    GridModel(int width, int height, RewardFn reward);
    GridModel(const WorldState& world, RewardFn reward);

    /// Cells that are legal targets but cannot be entered (occupied cells).
    void set_blocked(std::vector<std::uint8_t> mask) { blocked_ = std::move(mask); }
    void block(Position p);

    int width() const { return width_; }
    int height() const { return height_; }
    bool in_bounds(Position p) const { return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_; }
    bool passable(Position p) const { return in_bounds(p) && !obstacle(p) && !blocked(p); }
    bool legal(Position s, Action a) const;
    std::vector<Action> legal_actions(Position s) const;
    Position successor(Position s, Action a) const;
    double reward(Position s) const { return reward_(s); }

private:
    std::size_t index(Position p) const { return static_cast<std::size_t>(p.y) * width_ + p.x; }
    bool obstacle(Position p) const { return !obstacles_.empty() && obstacles_[index(p)] != 0; }
    bool blocked(Position p) const { return !blocked_.empty() && blocked_[index(p)] != 0; }

    int width_;
    int height_;
    std::vector<std::uint8_t> obstacles_;
    std::vector<std::uint8_t> blocked_;
    RewardFn reward_;
};

/// Episodic Q-learning on a static model: each episode starts from a seeded
/// random passable cell and runs `steps` epsilon-greedy transitions, with the
/// reward of a transition read at its successor cell.
void train_q(QTable& table, const GridModel& model, int episodes, int steps, Rng& rng);

/// Model-based updates around `s`: one backup of every legal action at `s`,
/// then `rollouts` epsilon-greedy trajectories of `horizon` steps.
void plan_q(QTable& table, const GridModel& model, Position s, int rollouts, int horizon, Rng& rng);

struct PolicyParams {
    int rollouts = 1;
    int horizon = 8;
    /// Step toward the nearest field centre when the field is zero at the
    /// pursuer and all its successors (beyond the Gaussian's numeric reach).
    bool home_when_flat = true;
};

struct PolicyDecision {
    Action action = Action::Up;
    TransitionRecord pending;  ///< s_next and r are fixed after the world step
};

/// Chooses a pursuer move. Assigned pursuers plan on their coalition's field
/// and act epsilon-greedily; unassigned ones (no field) take a uniform random
/// legal move.
PolicyDecision pursuer_policy_step(const PursuerState& p, const RewardField* field, QTable* table,
                                   const GridModel& model, Rng& rng, const PolicyParams& params = {});

/// Completes a pending transition with the observed successor and learns from it.
void finish_transition(QTable& table, TransitionRecord pending, Position actual_next,
                       const GridModel& model);

/// Escape heuristic: move to the free cell (or stay) that maximizes the
/// distance to the nearest pursuer; ties by UP, DOWN, LEFT, RIGHT, STAY.
Action evader_policy_step(const EvaderState& e, const WorldState& world, const Occupancy& occ);

/// Finite discounted sum of rewards.
double discounted_return(std::span<const double> rewards, double discount);

/// Distance from `p` to the nearest pursuer (infinity without pursuers).
double nearest_pursuer_distance(Position p, const WorldState& world);

}  // namespace pursuit
