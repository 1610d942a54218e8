#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "pursuit/grid_world.hpp"

namespace pursuit {

/// Weights of the distance, confidence and credit terms of the membership
/// function. Only the ratios matter.
struct Coefficients {
    double dist = 1.0;
    double conf = 1.0;
    double cred = 1.0;

    double sum() const { return dist + conf + cred; }
};

/// How the distance term enters the membership function.
enum class DistanceTerm {
    Inverted,  ///< 1 - d / diagonal, so nearer pursuers score higher
    Raw,       ///< raw Euclidean distance; codomain is no longer [0, 1]
};

struct MembershipOptions {
    Coefficients coefs;
    DistanceTerm distance_term = DistanceTerm::Inverted;
};

/// Evader-major matrix of membership degrees. Row e is the vector fed to the
/// clustering stage for evader `evader_ids[e]`.
struct MembershipMatrix {
    Eigen::MatrixXd values;
    std::vector<AgentId> evader_ids;
    std::vector<AgentId> pursuer_ids;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

double confidence(const PursuerState& p);
double credit(const PursuerState& p);

double membership(const EvaderState& e, const PursuerState& p, const WorldState& world,
                  const MembershipOptions& options = {});

/// (1 + pursuers whose range the evader invades) / difficulty.
double priority(const EvaderState& e, const WorldState& world);

/// Membership rows for the given evaders (all alive evaders when empty),
/// columns in pursuer order. Throws std::invalid_argument when no alive
/// evader or no pursuer is available.
MembershipMatrix membership_matrix(const WorldState& world, const MembershipOptions& options = {},
                                   const std::vector<AgentId>& evader_ids = {});

/// Header row of pursuer ids, then one row per evader.
void write_csv(std::ostream& os, const MembershipMatrix& m);

}  // namespace pursuit
