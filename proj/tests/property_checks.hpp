#pragma once

// Randomized checks shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pursuit/clustering.hpp"
#include "pursuit/grid_world.hpp"
#include "pursuit/learning.hpp"
#include "pursuit/membership.hpp"

namespace pursuit::checks {

struct PropertyReport {
    int checks = 0;
    int violations = 0;
    std::string first_failure;

    void record(bool ok, const std::string& what)
    {
        ++checks;
        if (ok) return;
        if (violations++ == 0) first_failure = what;
    }
};

/// Membership bounds, distance monotonicity and coefficient-scaling
/// invariance over `trials` random worlds (three checks per trial).
inline PropertyReport membership_properties(int trials, std::uint64_t seed)
{
    PropertyReport r;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim(2, 120);
    std::uniform_int_distribution<int> count(0, 40);
    std::uniform_real_distribution<double> coef(0.0, 5.0);
    std::uniform_real_distribution<double> scale(0.01, 100.0);

    for (int t = 0; t < trials; ++t) {
        GridConfig g;
        g.width = dim(rng);
        g.height = dim(rng);
        std::uniform_int_distribution<int> ux(0, g.width - 1);
        std::uniform_int_distribution<int> uy(0, g.height - 1);

        PursuerState p;
        p.id = 0;
        p.c_t = count(rng);
        p.c_s = std::uniform_int_distribution<int>(0, p.c_t)(rng);
        p.c_b = std::uniform_int_distribution<int>(0, p.c_t)(rng);
        p.pos = {ux(rng), uy(rng)};
        EvaderState e;
        e.id = 1;
        e.difficulty = 2;
        do {
            e.pos = {ux(rng), uy(rng)};
        } while (e.pos == p.pos);
        const auto world = make_world(g, {p}, {e});

        MembershipOptions opt;
        opt.coefs = {coef(rng), coef(rng), coef(rng)};
        if (opt.coefs.sum() <= 0.0) opt.coefs.dist = 1.0;

        const double mu = membership(e, p, world, opt);
        r.record(mu >= 0.0 && mu <= 1.0, "mu out of [0,1]: " + std::to_string(mu));

        // Move the pursuer to a second cell; the farther one must not score higher.
        PursuerState q = p;
        q.pos = {ux(rng), uy(rng)};
        if (q.pos == e.pos) q.pos = p.pos;
        auto world_q = make_world(g, {q}, {e});
        const double mu_q = membership(e, q, world_q, opt);
        const double dp = euclidean(p.pos, e.pos);
        const double dq = euclidean(q.pos, e.pos);
        const bool mono = dq > dp ? mu_q <= mu + 1e-12 : (dq < dp ? mu_q >= mu - 1e-12 : std::abs(mu_q - mu) < 1e-12);
        r.record(mono, "distance monotonicity violated");

        MembershipOptions scaled = opt;
        const double k = scale(rng);
        scaled.coefs = {opt.coefs.dist * k, opt.coefs.conf * k, opt.coefs.cred * k};
        const double mu_s = membership(e, p, world, scaled);
        r.record(std::abs(mu_s - mu) <= 1e-12, "scaling invariance violated");
    }
    return r;
}

/// Every mix of empty, pursuer, obstacle and other-evader neighbours around
/// an interior, edge and corner cell of a 5x5 grid, for d = 1..4. The
/// expected verdict counts walls, pursuers and obstacles directly.
inline PropertyReport capture_oracle()
{
    enum Content { Empty, Pursuer, Obstacle, OtherEvader };
    const std::vector<Position> cells{{2, 2}, {2, 0}, {0, 0}, {4, 2}, {4, 4}};
    const int offsets[4][2] = {{0, -1}, {0, 1}, {-1, 0}, {1, 0}};
    PropertyReport r;
    for (Position at : cells) {
        std::vector<Position> nbrs;
        int walls = 0;
        for (const auto& o : offsets) {
            const Position q{at.x + o[0], at.y + o[1]};
            if (q.x < 0 || q.y < 0 || q.x >= 5 || q.y >= 5)
                ++walls;
            else
                nbrs.push_back(q);
        }
        int combos = 1;
        for (std::size_t i = 0; i < nbrs.size(); ++i) combos *= 4;
        for (int code = 0; code < combos; ++code) {
            GridConfig g;
            g.width = 5;
            g.height = 5;
            std::vector<PursuerState> ps;
            std::vector<EvaderState> es;
            int blocked = walls;
            int c = code;
            for (std::size_t i = 0; i < nbrs.size(); ++i, c /= 4) {
                switch (c % 4) {
                case Pursuer: {
                    PursuerState p;
                    p.id = static_cast<AgentId>(ps.size());
                    p.pos = nbrs[i];
                    ps.push_back(p);
                    ++blocked;
                    break;
                }
                case Obstacle:
                    g.obstacles.push_back(nbrs[i]);
                    ++blocked;
                    break;
                case OtherEvader: {
                    EvaderState e;
                    e.id = static_cast<AgentId>(20 + i);
                    e.pos = nbrs[i];
                    e.difficulty = 4;
                    es.push_back(e);
                    break;
                }
                default: break;
                }
            }
            for (int d = 1; d <= 4; ++d) {
                auto evs = es;
                EvaderState target;
                target.id = 99;
                target.pos = at;
                target.difficulty = d;
                evs.push_back(target);
                const auto w = make_world(g, ps, evs);
                r.record(is_captured(w.evaders.back(), w) == (blocked >= d),
                         "cell " + std::to_string(at.x) + "," + std::to_string(at.y) + " code " +
                             std::to_string(code) + " d " + std::to_string(d));
            }
        }
    }
    return r;
}

struct Blobs {
    Eigen::MatrixXd samples;
    std::vector<int> truth;
};

/// Two Gaussian blobs in `dim` dimensions whose centre distance is at least
/// `separation` times the per-axis spread.
inline Blobs planted_blobs(std::uint64_t seed, int per_blob = 15, int dim = 8, double spread = 0.02,
                           double separation = 10.0)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, spread);
    Eigen::VectorXd a(dim);
    Eigen::VectorXd b(dim);
    do {
        for (int j = 0; j < dim; ++j) {
            a(j) = u(rng);
            b(j) = u(rng);
        }
    } while ((a - b).norm() < separation * spread * std::sqrt(static_cast<double>(dim)));
    Blobs out;
    out.samples.resize(2 * per_blob, dim);
    for (int i = 0; i < 2 * per_blob; ++i) {
        const Eigen::VectorXd& c = i % 2 == 0 ? a : b;
        for (int j = 0; j < dim; ++j) out.samples(i, j) = c(j) + noise(rng);
        out.truth.push_back(i % 2);
    }
    return out;
}

/// Exactly two groups, each drawn from a single blob.
inline bool recovers(const std::vector<int>& labels, const std::vector<int>& truth)
{
    return same_partition(labels, truth);
}

struct ClusteringReport {
    int sofm_recovered = 0;
    int kmeans_recovered = 0;
    int dbscan_recovered = 0;
    int sofm_error_decreased = 0;
    int seeds = 0;
};

inline ClusteringReport clustering_sanity(int seeds)
{
    ClusteringReport r;
    r.seeds = seeds;
    for (int s = 0; s < seeds; ++s) {
        const auto seed = static_cast<std::uint64_t>(1000 + s);
        const auto blobs = planted_blobs(seed);
        auto cfg = SofmConfig::for_nodes(2, seed);
        auto net = init_sofm<double>(blobs.samples.cols(), cfg);
        const double before = quantization_error(net, blobs.samples);
        train_sofm(net, blobs.samples);
        const double after = quantization_error(net, blobs.samples);
        if (after <= before) ++r.sofm_error_decreased;
        if (recovers(sofm_labels(net, blobs.samples), blobs.truth)) ++r.sofm_recovered;
        if (recovers(kmeans_labels(blobs.samples, 2, seed), blobs.truth)) ++r.kmeans_recovered;
        if (recovers(dbscan_labels(blobs.samples, 0.15, 3), blobs.truth)) ++r.dbscan_recovered;
    }
    return r;
}

struct PolicyMatch {
    int compared = 0;
    int matched = 0;
    double seconds = 0.0;

    double ratio() const { return compared > 0 ? static_cast<double>(matched) / compared : 0.0; }
};

/// Q-learning on a 7x7 grid with a single static Gaussian peak, compared
/// against value iteration on the same deterministic model. Only states with
/// a unique optimal action are counted.
inline PolicyMatch q_learning_vs_value_iteration(std::uint64_t seed, int episodes = 20000, int steps = 30)
{
    const auto start = std::chrono::steady_clock::now();
    constexpr int n = 7;
    const Position peak{2, 4};
    const RewardField field(0, n, n, {{peak, 1.0}});
    const GridModel model(n, n, [&field](Position p) { return field(p); });
    const double discount = 0.9;

    // Independent value iteration over the same dynamics.
    std::vector<double> v(n * n, 0.0);
    auto succ = [&](Position s, Action a) {
        const Position t = apply(s, a);
        return (t.x < 0 || t.y < 0 || t.x >= n || t.y >= n) ? Position{-1, -1} : t;
    };
    auto value = [&](Position s, Action a, const std::vector<double>& vv) {
        const Position t = succ(s, a);
        const double dx = t.x - peak.x;
        const double dy = t.y - peak.y;
        return std::exp(-0.5 * (dx * dx + dy * dy)) + discount * vv[static_cast<std::size_t>(t.y * n + t.x)];
    };
    for (int sweep = 0; sweep < 1000; ++sweep) {
        std::vector<double> next(v.size(), 0.0);
        double delta = 0.0;
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                double best = -1e300;
                for (Action a : kMoveActions)
                    if (succ({x, y}, a).x >= 0) best = std::max(best, value({x, y}, a, v));
                next[static_cast<std::size_t>(y * n + x)] = best;
                delta = std::max(delta, std::abs(best - v[static_cast<std::size_t>(y * n + x)]));
            }
        v.swap(next);
        if (delta < 1e-12) break;
    }

    QTable table(0, n, n, QParams{0.3, discount, 0.3});
    Rng rng(seed);
    train_q(table, model, episodes, steps, rng);

    PolicyMatch m;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const Position s{x, y};
            std::vector<std::pair<double, Action>> q;
            for (Action a : kMoveActions)
                if (succ(s, a).x >= 0) q.emplace_back(value(s, a, v), a);
            std::sort(q.begin(), q.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
            if (q.size() > 1 && q[0].first - q[1].first < 1e-9) continue;
            ++m.compared;
            const auto legal = model.legal_actions(s);
            if (greedy_action(table, s, legal) == q[0].second) ++m.matched;
        }
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return m;
}

}  // namespace pursuit::checks
