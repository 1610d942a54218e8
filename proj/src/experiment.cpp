#include "pursuit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "pursuit/rng.hpp"

namespace pursuit {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kPlacementStream = 1;
constexpr std::uint64_t kPolicyStream = 2;
constexpr std::uint64_t kClusterStream = 3;

}  // namespace

void StreamTraceSink::write(const std::string& json_line) { os_ << json_line << '\n'; }

double RunMetrics::cumulative_reward() const
{
    return std::accumulate(reward_trajectory.begin(), reward_trajectory.end(), 0.0);
}

ReorganizeParams reorganize_params(const ExperimentConfig& cfg, std::uint64_t run_seed)
{
    ReorganizeParams rp;
    rp.formation.life = cfg.life;
    rp.formation.aggregation = cfg.aggregation;
    rp.formation.membership.coefs = cfg.coefs;
    rp.formation.membership.distance_term = cfg.distance_term;
    rp.formation.learn_counters = true;

    switch (cfg.case_id) {
    case Case::Agr:
        // Distance-only membership and no capability bookkeeping.
        rp.formation.membership.coefs = {cfg.coefs.dist > 0 ? cfg.coefs.dist : 1.0, 0.0, 0.0};
        rp.formation.learn_counters = false;
        rp.method = ClusterMethod::Singleton;
        break;
    case Case::Agrmf: rp.method = ClusterMethod::Singleton; break;
    case Case::SofmAgrmf: rp.method = ClusterMethod::Sofm; break;
    case Case::KmeansAgrmf: rp.method = ClusterMethod::KMeans; break;
    case Case::DbscanAgrmf: rp.method = ClusterMethod::Dbscan; break;
    }

    const auto& cc = cfg.clustering;
    rp.cluster.seed = derive_seed(run_seed, {kClusterStream});
    rp.cluster.k = cc.kmeans_k;
    rp.cluster.eps = cc.dbscan_eps;
    rp.cluster.min_pts = cc.dbscan_min_pts;
    rp.cluster.sofm.output_nodes = std::max(1, cfg.n_evaders);
    rp.cluster.sofm.epochs = cc.sofm_epochs;
    rp.cluster.sofm.lr_initial = cc.sofm_lr_initial;
    rp.cluster.sofm.lr_final = cc.sofm_lr_final;
    rp.cluster.sofm.radius_final = cc.sofm_radius_final;
    rp.cluster.sofm.radius_initial = std::max(cc.sofm_radius_final, rp.cluster.sofm.output_nodes / 2.0);
    rp.sofm_warm_start = cc.sofm_warm_start;
    rp.sofm_nodes_from_evaders = true;
    return rp;
}

WorldState initial_world(const ExperimentConfig& cfg, std::uint64_t seed)
{
    cfg.validate();
    const int w = cfg.grid.width;
    const int h = cfg.grid.height;
    std::vector<std::uint8_t> taken(static_cast<std::size_t>(w) * h, 0);
    for (const auto& o : cfg.grid.obstacles) taken[static_cast<std::size_t>(o.y) * w + o.x] = 1;
    for (const auto& p : cfg.pursuer_positions) taken[static_cast<std::size_t>(p.y) * w + p.x] = 1;
    for (const auto& p : cfg.evader_positions) taken[static_cast<std::size_t>(p.y) * w + p.x] = 1;

    auto place = [&](Rng& rng) {
        std::uniform_int_distribution<int> ux(0, w - 1);
        std::uniform_int_distribution<int> uy(0, h - 1);
        for (;;) {
            const Position p{ux(rng), uy(rng)};
            auto& cell = taken[static_cast<std::size_t>(p.y) * w + p.x];
            if (!cell) {
                cell = 1;
                return p;
            }
        }
    };

    std::vector<PursuerState> pursuers;
    for (int i = 0; i < cfg.n_pursuers; ++i) {
        auto rng = make_rng(seed, {kPlacementStream, static_cast<std::uint64_t>(i)});
        PursuerState p;
        p.id = i;
        p.pos = cfg.pursuer_positions.empty() ? place(rng) : cfg.pursuer_positions[static_cast<std::size_t>(i)];
        p.range = cfg.pursuit_range;
        pursuers.push_back(p);
    }
    std::vector<EvaderState> evaders;
    for (int j = 0; j < cfg.n_evaders; ++j) {
        const AgentId id = cfg.n_pursuers + j;
        auto rng = make_rng(seed, {kPlacementStream, static_cast<std::uint64_t>(id)});
        EvaderState e;
        e.id = id;
        e.pos = cfg.evader_positions.empty() ? place(rng) : cfg.evader_positions[static_cast<std::size_t>(j)];
        const int drawn = std::uniform_int_distribution<int>(cfg.difficulty_min, cfg.difficulty_max)(rng);
        e.difficulty = cfg.evader_difficulties.empty() ? drawn : cfg.evader_difficulties[static_cast<std::size_t>(j)];
        e.reward_mag = cfg.reward_override.value_or(static_cast<double>(e.difficulty));
        evaders.push_back(e);
    }
    return make_world(cfg.grid, std::move(pursuers), std::move(evaders));
}

namespace {

struct PursuerLearner {
    int group_id = -1;  ///< coalition the table was learned for
    QTable table;
};

Position centroid(const Coalition& c, const WorldState& world)
{
    double sx = 0;
    double sy = 0;
    int n = 0;
    for (AgentId id : c.evader_ids) {
        const auto* e = world.evader(id);
        if (e->captured) continue;
        sx += e->pos.x;
        sy += e->pos.y;
        ++n;
    }
    if (n == 0) return {0, 0};
    return {static_cast<int>(std::lround(sx / n)), static_cast<int>(std::lround(sy / n))};
}

nlohmann::json events_json(const std::vector<CoalitionEvent>& events, std::size_t from)
{
    auto out = nlohmann::json::array();
    for (std::size_t i = from; i < events.size(); ++i) {
        const auto& e = events[i];
        out.push_back({{"tick", e.tick},
                       {"event", to_string(e.kind)},
                       {"group", e.group_id},
                       {"evaders", e.evaders},
                       {"pursuers", e.pursuers}});
    }
    return out;
}

}  // namespace

RunMetrics run_single(const ExperimentConfig& cfg, std::uint64_t seed, TraceSink* trace)
{
    WorldState world = initial_world(cfg, seed);
    const auto& lc = cfg.learning;
    const int w = cfg.grid.width;
    const int h = cfg.grid.height;

    RunMetrics m;
    m.seed = seed;
    m.per_evader_capture_ticks.assign(world.evaders.size(), -1);

    std::vector<Rng> pursuer_rng;
    for (const auto& p : world.pursuers)
        pursuer_rng.push_back(make_rng(seed, {kPolicyStream, static_cast<std::uint64_t>(p.id)}));
    std::vector<Rng> evader_rng;
    std::vector<QTable> evader_q;
    for (const auto& e : world.evaders) {
        evader_rng.push_back(make_rng(seed, {kPolicyStream, static_cast<std::uint64_t>(e.id)}));
        if (lc.evader_policy == EvaderPolicy::QLearning)
            evader_q.emplace_back(e.id, w, h, QParams{lc.alpha, lc.discount, lc.epsilon_final});
    }

    if (world.alive_evaders() == 0) {
        m.capture_ticks = 0;
        m.all_captured = true;
        if (trace) trace->write(snapshot_json(world));
        return m;
    }

    const ReorganizeParams rp = reorganize_params(cfg, seed);
    OrganizerState state = organize(world, rp);
    std::size_t events_written = 0;

    const bool relative = lc.state_mode == QStateMode::RelativeToCentroid;
    const int qw = relative ? 2 * w - 1 : w;
    const int qh = relative ? 2 * h - 1 : h;
    std::vector<PursuerLearner> learners(world.pursuers.size());
    std::map<int, PriorityOverrides> frozen;

    auto emit_trace = [&] {
        if (!trace) return;
        auto j = nlohmann::json::parse(snapshot_json(world));
        j["events"] = events_json(state.events, events_written);
        events_written = state.events.size();
        trace->write(j.dump());
    };
    emit_trace();

    while (world.alive_evaders() > 0 && world.tick < cfg.max_ticks) {
        const Occupancy occ(world);

        // Cells held by any agent at the start of the tick, treated as walls when planning.
        std::vector<std::uint8_t> agent_cells(static_cast<std::size_t>(w) * h, 0);
        for (const auto& e : world.evaders)
            if (!e.captured) agent_cells[static_cast<std::size_t>(e.pos.y) * w + e.pos.x] = 1;
        for (const auto& p : world.pursuers) agent_cells[static_cast<std::size_t>(p.pos.y) * w + p.pos.x] = 1;

        // Reward fields and learning models of the active coalitions.
        std::map<int, RewardField> fields;
        std::map<int, GridModel> models;
        for (const auto& c : state.coalitions) {
            if (c.dissolved()) continue;
            const PriorityOverrides* fz = nullptr;
            if (lc.freeze_priority) {
                auto [it, inserted] = frozen.try_emplace(c.group_id);
                if (inserted)
                    for (AgentId id : c.evader_ids) it->second[id] = priority(*world.evader(id), world);
                fz = &it->second;
            }
            auto [fit, ok] = fields.emplace(c.group_id, make_reward_field(c, world, lc.reward_variance, fz));
            const RewardField* fp = &fit->second;
            GridModel model(world, [fp](Position p) { return (*fp)(p); });
            model.set_blocked(agent_cells);
            models.emplace(c.group_id, std::move(model));
        }
        GridModel idle_model(world, [](Position) { return 0.0; });
        idle_model.set_blocked(agent_cells);

        JointActions actions;
        std::vector<std::optional<PolicyDecision>> decisions(world.pursuers.size());
        for (std::size_t i = 0; i < world.pursuers.size(); ++i) {
            const auto& p = world.pursuers[i];
            const Coalition* c = state.coalition_of_pursuer(p.id);
            if (!c || c->dissolved()) {
                decisions[i] = pursuer_policy_step(p, nullptr, nullptr, idle_model, pursuer_rng[i]);
                actions[p.id] = decisions[i]->action;
                continue;
            }
            auto& learner = learners[i];
            if (learner.group_id != c->group_id) {
                learner.group_id = c->group_id;
                learner.table = QTable(p.id, qw, qh, QParams{lc.alpha, lc.discount, lc.epsilon_initial});
            }
            const double progress = std::min(1.0, static_cast<double>(c->age()) / std::max(1, c->life_total));
            learner.table.params().epsilon = lc.epsilon_initial + (lc.epsilon_final - lc.epsilon_initial) * progress;
            if (relative) {
                const Position ctr = centroid(*c, world);
                learner.table.set_frame({w - 1 - ctr.x, h - 1 - ctr.y});
            }
            PolicyParams pp{lc.rollouts, lc.horizon, lc.home_when_flat};
            decisions[i] = pursuer_policy_step(p, &fields.at(c->group_id), &learner.table,
                                               models.at(c->group_id), pursuer_rng[i], pp);
            actions[p.id] = decisions[i]->action;
        }

        for (std::size_t j = 0; j < world.evaders.size(); ++j) {
            const auto& e = world.evaders[j];
            if (e.captured) continue;
            if (lc.evader_policy == EvaderPolicy::Escape) {
                actions[e.id] = evader_policy_step(e, world, occ);
                continue;
            }
            // Non-default mode: Q-learning escape with nearest-pursuer distance as reward.
            GridModel emodel(world, [&world](Position q) { return nearest_pursuer_distance(q, world); });
            std::vector<std::uint8_t> busy(static_cast<std::size_t>(w) * h, 0);
            for (const auto& p : world.pursuers) busy[static_cast<std::size_t>(p.pos.y) * w + p.pos.x] = 1;
            emodel.set_blocked(std::move(busy));
            plan_q(evader_q[j], emodel, e.pos, lc.rollouts, lc.horizon, evader_rng[j]);
            auto legal = emodel.legal_actions(e.pos);
            actions[e.id] = legal.empty() ? Action::Stay : select_action(evader_q[j], e.pos, evader_rng[j], legal);
        }

        const std::vector<bool> was_captured = [&] {
            std::vector<bool> v;
            for (const auto& e : world.evaders) v.push_back(e.captured);
            return v;
        }();

        world = step(world, actions);

        // Learning from the realized transitions, and this tick's group reward.
        double tick_reward = 0.0;
        for (std::size_t i = 0; i < world.pursuers.size(); ++i) {
            const auto& p = world.pursuers[i];
            const Coalition* c = state.coalition_of_pursuer(p.id);
            if (!c || c->dissolved() || !decisions[i]) continue;
            const auto& model = models.at(c->group_id);
            finish_transition(learners[i].table, decisions[i]->pending, p.pos, model);
            tick_reward += model.reward(p.pos);
        }
        for (std::size_t j = 0; j < world.evaders.size(); ++j) {
            const auto& e = world.evaders[j];
            if (!e.captured || was_captured[j]) continue;
            m.per_evader_capture_ticks[j] = world.tick;
            if (const Coalition* c = state.coalition_of_evader(e.id))
                tick_reward += e.reward_mag * static_cast<double>(c->pursuer_ids.size());
        }
        m.reward_trajectory.push_back(tick_reward);

        const bool reorganize_needed = tick_coalitions(state, world, rp.formation.learn_counters);
        if (reorganize_needed && world.alive_evaders() > 0) {
            reorganize(state, world, rp);
        } else if (reorganize_needed) {
            std::erase_if(state.coalitions, [](const Coalition& c) { return c.dissolved(); });
        }
        emit_trace();
    }

    m.all_captured = world.alive_evaders() == 0;
    m.capture_ticks = m.all_captured ? world.tick : cfg.max_ticks;
    m.flexibility = state.flexibility_count;
    return m;
}

Stats describe(const std::vector<double>& xs)
{
    Stats s;
    if (xs.empty()) return s;
    const double n = static_cast<double>(xs.size());
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    s.min = *std::min_element(xs.begin(), xs.end());
    s.max = *std::max_element(xs.begin(), xs.end());
    return s;
}

int default_workers()
{
    if (const char* env = std::getenv("PURSUIT_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

BatchSummary summarize(Case case_id, std::vector<RunMetrics> runs)
{
    std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.seed < b.seed; });
    BatchSummary b;
    b.case_id = case_id;
    std::vector<double> cap;
    std::vector<double> flex;
    std::size_t longest = 0;
    for (const auto& r : runs) {
        cap.push_back(static_cast<double>(r.capture_ticks));
        flex.push_back(r.flexibility);
        longest = std::max(longest, r.reward_trajectory.size());
    }
    b.capture = describe(cap);
    b.flexibility = describe(flex);
    b.mean_reward.assign(longest, 0.0);
    for (const auto& r : runs)
        for (std::size_t t = 0; t < r.reward_trajectory.size(); ++t) b.mean_reward[t] += r.reward_trajectory[t];
    if (!runs.empty())
        for (auto& v : b.mean_reward) v /= static_cast<double>(runs.size());
    b.runs = std::move(runs);
    return b;
}

BatchSummary run_batch(const ExperimentConfig& cfg, int workers)
{
    cfg.validate();
    if (workers <= 0) workers = default_workers();
    const int n = cfg.repetitions;
    std::vector<RunMetrics> results(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::string error_seed;

    auto work = [&] {
        for (int i = next++; i < n; i = next++) {
            const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(i);
            try {
                results[i] = run_single(cfg, seed);
            } catch (const std::exception& e) {
                std::lock_guard lock(err_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                    error_seed = "seed " + std::to_string(seed) + ": " + e.what();
                }
            }
        }
    };
    const int threads = std::min(workers, n);
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    if (first_error) throw std::runtime_error(to_string(cfg.case_id) + " run failed at " + error_seed);
    return summarize(cfg.case_id, std::move(results));
}

double improvement_pct(double ours, double baseline)
{
    return baseline != 0.0 ? 100.0 * (baseline - ours) / baseline : 0.0;
}

const BatchSummary& Comparison::at(Case c) const
{
    for (const auto& b : cases)
        if (b.case_id == c) return b;
    throw std::out_of_range("case " + to_string(c) + " not in comparison");
}

PairedDifference Comparison::paired(Case a, Case b) const
{
    const auto& ra = at(a).runs;
    const auto& rb = at(b).runs;
    if (ra.size() != rb.size()) throw std::logic_error("paired comparison needs equal run counts");
    std::vector<double> diffs;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        if (ra[i].seed != rb[i].seed) throw std::logic_error("paired comparison needs shared seeds");
        diffs.push_back(static_cast<double>(ra[i].capture_ticks - rb[i].capture_ticks));
    }
    const Stats s = describe(diffs);
    PairedDifference d{a, b};
    d.mean_diff = s.mean;
    d.std_error = diffs.empty() ? 0.0 : s.stddev / std::sqrt(static_cast<double>(diffs.size()));
    d.improvement_pct = improvement_pct(at(a).capture.mean, at(b).capture.mean);
    return d;
}

namespace {

bool case_specific(const std::string& key)
{
    return key == "case" || key.rfind("clustering.", 0) == 0;
}

}  // namespace

Comparison compare_cases(const std::vector<ExperimentConfig>& configs, int workers)
{
    if (configs.empty()) throw ConfigError("nothing to compare");
    for (const auto& c : configs) c.validate();
    for (std::size_t i = 1; i < configs.size(); ++i)
        for (const auto& key : config_keys())
            if (!case_specific(key) &&
                get_config_value(configs[i], key) != get_config_value(configs[0], key))
                throw ConfigError("compared configs differ in scenario parameter " + key);

    Comparison cmp;
    for (const auto& c : configs) cmp.cases.push_back(run_batch(c, workers));
    return cmp;
}

}  // namespace pursuit
