#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pursuit/clustering.hpp"
#include "pursuit/coalition.hpp"
#include "pursuit/grid_world.hpp"
#include "pursuit/learning.hpp"
#include "pursuit/membership.hpp"

namespace pursuit {

enum class Case : std::uint8_t { Agr, Agrmf, SofmAgrmf, KmeansAgrmf, DbscanAgrmf };

inline constexpr std::array<Case, 5> kAllCases{Case::Agr, Case::Agrmf, Case::SofmAgrmf,
                                               Case::KmeansAgrmf, Case::DbscanAgrmf};

std::string to_string(Case c);
Case parse_case(const std::string& s);

enum class QStateMode : std::uint8_t { Position, RelativeToCentroid };
enum class EvaderPolicy : std::uint8_t { Escape, QLearning };

struct ClusteringConfig {
    int sofm_epochs = 200;
    double sofm_lr_initial = 0.5;
    double sofm_lr_final = 0.01;
    double sofm_radius_final = 0.5;
    bool sofm_warm_start = true;
    int kmeans_k = 3;
    double dbscan_eps = 0.1;
    int dbscan_min_pts = 2;
};

struct LearningConfig {
    double alpha = 0.3;
    double discount = 0.9;
    double epsilon_initial = 0.3;
    double epsilon_final = 0.05;
    double reward_variance = 1.0;
    bool freeze_priority = false;
    int rollouts = 1;
    int horizon = 8;
    bool home_when_flat = true;
    QStateMode state_mode = QStateMode::RelativeToCentroid;
    EvaderPolicy evader_policy = EvaderPolicy::Escape;
};

struct ExperimentConfig {
    Case case_id = Case::SofmAgrmf;
    GridConfig grid;
    int n_pursuers = 33;
    int n_evaders = 9;
    int difficulty_min = 2;
    int difficulty_max = 4;
    int pursuit_range = 10;
    std::optional<double> reward_override;  ///< Re_i; defaults to the difficulty
    /// Fixed scenario layout. Empty lists fall back to seeded random draws.
    std::vector<Position> pursuer_positions;
    std::vector<Position> evader_positions;
    std::vector<int> evader_difficulties;
    int repetitions = 100;
    std::uint64_t base_seed = 1;
    int life = 30;
    long max_ticks = 10000;
    Coefficients coefs;
    DistanceTerm distance_term = DistanceTerm::Inverted;
    ScoreAggregation aggregation = ScoreAggregation::Max;
    ClusteringConfig clustering;
    LearningConfig learning;

    /// Throws std::invalid_argument describing the first violated constraint.
    void validate() const;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dotted keys accepted by set_config_value, e.g. "grid.width".
const std::vector<std::string>& config_keys();
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const ExperimentConfig& cfg, const std::string& key);

/// Applies a YAML document of nested maps on top of `cfg`.
void apply_config_text(ExperimentConfig& cfg, const std::string& yaml);
void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

/// Clustering method and membership weights a case runs with.
ReorganizeParams reorganize_params(const ExperimentConfig& cfg, std::uint64_t run_seed);

struct RunMetrics {
    std::uint64_t seed = 0;
    long capture_ticks = 0;  ///< tick of the last capture, or max_ticks
    bool all_captured = false;
    int flexibility = 0;
    std::vector<double> reward_trajectory;  ///< summed group reward per tick
    std::vector<long> per_evader_capture_ticks;  ///< -1 when never captured

    double cumulative_reward() const;
};

/// Receives one JSON line per tick during a traced run.
class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void write(const std::string& json_line) = 0;
};

class StreamTraceSink : public TraceSink {
public:
    explicit StreamTraceSink(std::ostream& os) : os_(os) {}
    void write(const std::string& json_line) override;

private:
    std::ostream& os_;
};

/// Places agents on free cells from per-agent seeded streams. Pursuer ids
/// run 0..n-1 and evader ids continue after them.
WorldState initial_world(const ExperimentConfig& cfg, std::uint64_t seed);

RunMetrics run_single(const ExperimentConfig& cfg, std::uint64_t seed, TraceSink* trace = nullptr);

struct Stats {
    double mean = 0.0;
    double stddev = 0.0;  ///< sample standard deviation
    double min = 0.0;
    double max = 0.0;
};

Stats describe(const std::vector<double>& xs);

struct BatchSummary {
    Case case_id = Case::SofmAgrmf;
    std::vector<RunMetrics> runs;  ///< sorted by seed
    Stats capture;
    Stats flexibility;
    std::vector<double> mean_reward;  ///< per tick, finished runs contribute 0

    int run_count() const { return static_cast<int>(runs.size()); }
};

/// Worker count from PURSUIT_WORKERS, else the hardware concurrency.
int default_workers();

BatchSummary summarize(Case case_id, std::vector<RunMetrics> runs);
BatchSummary run_batch(const ExperimentConfig& cfg, int workers = 0);

struct PairedDifference {
    Case a;
    Case b;
    double mean_diff = 0.0;  ///< mean of (a - b) capture ticks
    double std_error = 0.0;
    double improvement_pct = 0.0;  ///< how much faster a is than b, in %
};

struct Comparison {
    std::vector<BatchSummary> cases;

    const BatchSummary& at(Case c) const;
    PairedDifference paired(Case a, Case b) const;
};

/// Percentage reduction of `ours` relative to `baseline`.
double improvement_pct(double ours, double baseline);

/// Runs every config on the same seeds. Throws ConfigError when configs
/// differ in anything but the case and case-specific parameters.
Comparison compare_cases(const std::vector<ExperimentConfig>& configs, int workers = 0);

inline constexpr int kOutputSchemaVersion = 1;

void write_summary_csv(std::ostream& os, const std::vector<BatchSummary>& batches);
void write_runs_csv(std::ostream& os, const BatchSummary& batch);
void write_trajectory_csv(std::ostream& os, const BatchSummary& batch);
void write_paired_csv(std::ostream& os, const Comparison& cmp);

/// Writes summary.csv, runs_<CASE>.csv, trajectory_<CASE>.csv, a paired
/// per-seed table when there is more than one case, and manifest.json.
/// Returns the files written; throws std::runtime_error naming the path on
/// I/O failure.
std::vector<std::filesystem::path> emit_outputs(const std::vector<BatchSummary>& batches,
                                                const std::filesystem::path& dir);

}  // namespace pursuit
