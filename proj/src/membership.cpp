#include "pursuit/membership.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace pursuit {

double confidence(const PursuerState& p)
{
    if (p.c_t <= 0) return 0.1;
    const double ratio = static_cast<double>(p.c_s) / p.c_t;
    return std::clamp(ratio, 0.1, 1.0);
}

double credit(const PursuerState& p)
{
    const int denom = p.c_t + p.c_s;
    if (denom <= 0) return 1.0;
    const double raw = 1.0 - static_cast<double>(p.c_b) / denom;
    // The raw ratio can drop below the declared [0.1, 1] codomain.
    return std::clamp(raw, 0.1, 1.0);
}

double membership(const EvaderState& e, const PursuerState& p, const WorldState& world,
                  const MembershipOptions& options)
{
    const auto& c = options.coefs;
    const double d = euclidean(e.pos, p.pos);
    double dist_term = d;
    if (options.distance_term == DistanceTerm::Inverted) {
        const double diag = std::hypot(world.config.width, world.config.height);
        dist_term = std::clamp(1.0 - d / diag, 0.0, 1.0);
    }
    return (c.dist * dist_term + c.conf * confidence(p) + c.cred * credit(p)) / c.sum();
}

double priority(const EvaderState& e, const WorldState& world)
{
    return (1.0 + count_range_invaders(e, world)) / e.difficulty;
}

MembershipMatrix membership_matrix(const WorldState& world, const MembershipOptions& options,
                                   const std::vector<AgentId>& evader_ids)
{
    if (!(options.coefs.sum() > 0.0)) throw std::invalid_argument("coefficients must sum to > 0");
    if (world.pursuers.empty()) throw std::invalid_argument("membership matrix needs a pursuer");

    std::vector<const EvaderState*> rows;
    if (evader_ids.empty()) {
        for (const auto& e : world.evaders)
            if (!e.captured) rows.push_back(&e);
    } else {
        for (AgentId id : evader_ids) {
            const auto* e = world.evader(id);
            if (!e || e->captured)
                throw std::invalid_argument("evader " + std::to_string(id) + " is not alive");
            rows.push_back(e);
        }
    }
    if (rows.empty()) throw std::invalid_argument("no alive evaders");

    MembershipMatrix m;
    m.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(world.pursuers.size()));
    for (const auto* e : rows) m.evader_ids.push_back(e->id);
    for (const auto& p : world.pursuers) m.pursuer_ids.push_back(p.id);
    for (Eigen::Index r = 0; r < m.values.rows(); ++r)
        for (Eigen::Index c = 0; c < m.values.cols(); ++c)
            m.values(r, c) = membership(*rows[r], world.pursuers[c], world, options);
    return m;
}

void write_csv(std::ostream& os, const MembershipMatrix& m)
{
    os << "evader_id";
    for (AgentId id : m.pursuer_ids) os << ",p" << id;
    os << '\n' << std::setprecision(10);
    for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
        os << m.evader_ids[r];
        for (Eigen::Index c = 0; c < m.values.cols(); ++c) os << ',' << m.values(r, c);
        os << '\n';
    }
}

}  // namespace pursuit
