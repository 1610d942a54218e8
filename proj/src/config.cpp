#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "pursuit/experiment.hpp"

namespace pursuit {

std::string to_string(Case c)
{
    switch (c) {
    case Case::Agr: return "AGR";
    case Case::Agrmf: return "AGRMF";
    case Case::SofmAgrmf: return "SOFM_AGRMF";
    case Case::KmeansAgrmf: return "KMEANS_AGRMF";
    case Case::DbscanAgrmf: return "DBSCAN_AGRMF";
    }
    return "?";
}

Case parse_case(const std::string& s)
{
    for (Case c : kAllCases)
        if (to_string(c) == s) return c;
    throw ConfigError("unknown case '" + s + "'");
}

void ExperimentConfig::validate() const
{
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(what);
    };
    require(grid.width >= 2 && grid.height >= 2, "grid must be at least 2x2");
    for (const auto& o : grid.obstacles) require(grid.in_bounds(o), "obstacle outside grid");
    require(n_pursuers >= 1, "need at least one pursuer");
    require(n_evaders >= 0, "evader count must be >= 0");
    require(difficulty_min >= 1 && difficulty_min <= difficulty_max, "difficulty range must satisfy 1 <= min <= max");
    require(difficulty_max <= 4, "difficulty above 4 is uncapturable on a 4-neighbour grid");
    require(pursuit_range >= 1, "pursuit range must be >= 1");
    require(repetitions >= 1, "repetitions must be >= 1");
    require(life >= 1, "coalition life must be >= 1");
    require(max_ticks > 0, "max_ticks must be > 0");
    require(coefs.dist >= 0 && coefs.conf >= 0 && coefs.cred >= 0 && coefs.sum() > 0,
            "coefficients must be non-negative with a positive sum");
    require(!reward_override || *reward_override > 0, "reward override must be > 0");
    require(clustering.sofm_epochs >= 0, "SOFM epochs must be >= 0");
    require(clustering.sofm_lr_final > 0 && clustering.sofm_lr_initial >= clustering.sofm_lr_final,
            "SOFM learning rates must satisfy initial >= final > 0");
    require(clustering.sofm_radius_final >= 0, "SOFM final radius must be >= 0");
    require(clustering.kmeans_k >= 1, "kmeans k must be >= 1");
    require(clustering.dbscan_eps > 0 && clustering.dbscan_min_pts >= 1, "invalid DBSCAN parameters");
    require(learning.alpha >= 0 && learning.alpha <= 1, "alpha must lie in [0, 1]");
    require(learning.discount >= 0 && learning.discount < 1, "discount must lie in [0, 1)");
    require(learning.epsilon_initial >= 0 && learning.epsilon_initial <= 1 && learning.epsilon_final >= 0 &&
                learning.epsilon_final <= 1,
            "epsilon must lie in [0, 1]");
    require(learning.reward_variance > 0, "reward variance must be > 0");
    require(learning.rollouts >= 0 && learning.horizon >= 0, "planning sizes must be >= 0");

    require(pursuer_positions.empty() || static_cast<int>(pursuer_positions.size()) == n_pursuers,
            "pursuer_positions must list one cell per pursuer");
    require(evader_positions.empty() || static_cast<int>(evader_positions.size()) == n_evaders,
            "evader_positions must list one cell per evader");
    require(evader_difficulties.empty() || static_cast<int>(evader_difficulties.size()) == n_evaders,
            "difficulties must list one value per evader");
    for (const auto& p : pursuer_positions) require(grid.in_bounds(p), "pursuer position outside grid");
    for (const auto& p : evader_positions) require(grid.in_bounds(p), "evader position outside grid");
    for (int d : evader_difficulties) require(d >= 1 && d <= 4, "difficulties must lie in [1, 4]");

    const long free_cells = static_cast<long>(grid.width) * grid.height - static_cast<long>(grid.obstacles.size());
    require(n_pursuers + n_evaders <= free_cells, "more agents than free cells");
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& v)
{
    T out{};
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError("bad value '" + v + "' for " + key);
    return out;
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("bad boolean '" + v + "' for " + key);
}

std::string fmt_double(double d)
{
    std::ostringstream os;
    os.precision(17);
    os << d;
    return os.str();
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

// "x:y;x:y" <-> cell list
std::vector<Position> parse_cells(const std::string& key, const std::string& v)
{
    std::vector<Position> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("cell '" + item + "' is not x:y in " + key);
        out.push_back({parse_number<int>(key, item.substr(0, colon)), parse_number<int>(key, item.substr(colon + 1))});
    }
    return out;
}

std::string fmt_cells(const std::vector<Position>& obs)
{
    std::string out;
    for (const auto& p : obs) {
        if (!out.empty()) out += ';';
        out += std::to_string(p.x) + ':' + std::to_string(p.y);
    }
    return out;
}

std::vector<int> parse_ints(const std::string& key, const std::string& v)
{
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ';'))
        if (!item.empty()) out.push_back(parse_number<int>(key, item));
    return out;
}

std::string fmt_ints(const std::vector<int>& xs)
{
    std::string out;
    for (int x : xs) {
        if (!out.empty()) out += ';';
        out += std::to_string(x);
    }
    return out;
}

struct Field {
    std::string key;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define PURSUIT_INT_FIELD(KEY, MEMBER)                                                          \
    Field{KEY, [](ExperimentConfig& c, const std::string& v) { c.MEMBER = parse_number<decltype(c.MEMBER)>(KEY, v); }, \
          [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); }}
#define PURSUIT_DOUBLE_FIELD(KEY, MEMBER)                                                       \
    Field{KEY, [](ExperimentConfig& c, const std::string& v) { c.MEMBER = parse_number<double>(KEY, v); }, \
          [](const ExperimentConfig& c) { return fmt_double(c.MEMBER); }}
#define PURSUIT_BOOL_FIELD(KEY, MEMBER)                                                         \
    Field{KEY, [](ExperimentConfig& c, const std::string& v) { c.MEMBER = parse_bool(KEY, v); }, \
          [](const ExperimentConfig& c) { return fmt_bool(c.MEMBER); }}

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = {
        Field{"case", [](ExperimentConfig& c, const std::string& v) { c.case_id = parse_case(v); },
              [](const ExperimentConfig& c) { return to_string(c.case_id); }},
        PURSUIT_INT_FIELD("grid.width", grid.width),
        PURSUIT_INT_FIELD("grid.height", grid.height),
        Field{"grid.obstacles",
              [](ExperimentConfig& c, const std::string& v) { c.grid.obstacles = parse_cells("grid.obstacles", v); },
              [](const ExperimentConfig& c) { return fmt_cells(c.grid.obstacles); }},
        Field{"grid.range_metric",
              [](ExperimentConfig& c, const std::string& v) {
                  if (v == "chebyshev") c.grid.range_metric = RangeMetric::Chebyshev;
                  else if (v == "euclidean") c.grid.range_metric = RangeMetric::Euclidean;
                  else if (v == "manhattan") c.grid.range_metric = RangeMetric::Manhattan;
                  else throw ConfigError("bad range metric '" + v + "'");
              },
              [](const ExperimentConfig& c) -> std::string {
                  switch (c.grid.range_metric) {
                  case RangeMetric::Chebyshev: return "chebyshev";
                  case RangeMetric::Euclidean: return "euclidean";
                  case RangeMetric::Manhattan: return "manhattan";
                  }
                  return "?";
              }},
        PURSUIT_BOOL_FIELD("grid.pursuer_stay", grid.pursuer_stay),
        PURSUIT_INT_FIELD("agents.pursuers", n_pursuers),
        PURSUIT_INT_FIELD("agents.evaders", n_evaders),
        PURSUIT_INT_FIELD("agents.difficulty_min", difficulty_min),
        PURSUIT_INT_FIELD("agents.difficulty_max", difficulty_max),
        PURSUIT_INT_FIELD("agents.pursuit_range", pursuit_range),
        Field{"agents.reward_override",
              [](ExperimentConfig& c, const std::string& v) {
                  if (v.empty() || v == "none") c.reward_override.reset();
                  else c.reward_override = parse_number<double>("agents.reward_override", v);
              },
              [](const ExperimentConfig& c) { return c.reward_override ? fmt_double(*c.reward_override) : "none"; }},
        Field{"agents.pursuer_positions",
              [](ExperimentConfig& c, const std::string& v) { c.pursuer_positions = parse_cells("agents.pursuer_positions", v); },
              [](const ExperimentConfig& c) { return fmt_cells(c.pursuer_positions); }},
        Field{"agents.evader_positions",
              [](ExperimentConfig& c, const std::string& v) { c.evader_positions = parse_cells("agents.evader_positions", v); },
              [](const ExperimentConfig& c) { return fmt_cells(c.evader_positions); }},
        Field{"agents.difficulties",
              [](ExperimentConfig& c, const std::string& v) { c.evader_difficulties = parse_ints("agents.difficulties", v); },
              [](const ExperimentConfig& c) { return fmt_ints(c.evader_difficulties); }},
        PURSUIT_INT_FIELD("run.repetitions", repetitions),
        PURSUIT_INT_FIELD("run.base_seed", base_seed),
        PURSUIT_INT_FIELD("run.max_ticks", max_ticks),
        PURSUIT_INT_FIELD("run.life", life),
        PURSUIT_DOUBLE_FIELD("membership.coef_dist", coefs.dist),
        PURSUIT_DOUBLE_FIELD("membership.coef_conf", coefs.conf),
        PURSUIT_DOUBLE_FIELD("membership.coef_cred", coefs.cred),
        Field{"membership.distance_term",
              [](ExperimentConfig& c, const std::string& v) {
                  if (v == "inverted") c.distance_term = DistanceTerm::Inverted;
                  else if (v == "raw") c.distance_term = DistanceTerm::Raw;
                  else throw ConfigError("bad distance term '" + v + "'");
              },
              [](const ExperimentConfig& c) -> std::string {
                  return c.distance_term == DistanceTerm::Inverted ? "inverted" : "raw";
              }},
        Field{"membership.aggregation",
              [](ExperimentConfig& c, const std::string& v) {
                  if (v == "max") c.aggregation = ScoreAggregation::Max;
                  else if (v == "mean") c.aggregation = ScoreAggregation::Mean;
                  else throw ConfigError("bad aggregation '" + v + "'");
              },
              [](const ExperimentConfig& c) -> std::string {
                  return c.aggregation == ScoreAggregation::Max ? "max" : "mean";
              }},
        PURSUIT_INT_FIELD("clustering.sofm_epochs", clustering.sofm_epochs),
        PURSUIT_DOUBLE_FIELD("clustering.sofm_lr_initial", clustering.sofm_lr_initial),
        PURSUIT_DOUBLE_FIELD("clustering.sofm_lr_final", clustering.sofm_lr_final),
        PURSUIT_DOUBLE_FIELD("clustering.sofm_radius_final", clustering.sofm_radius_final),
        PURSUIT_BOOL_FIELD("clustering.sofm_warm_start", clustering.sofm_warm_start),
        PURSUIT_INT_FIELD("clustering.kmeans_k", clustering.kmeans_k),
        PURSUIT_DOUBLE_FIELD("clustering.dbscan_eps", clustering.dbscan_eps),
        PURSUIT_INT_FIELD("clustering.dbscan_min_pts", clustering.dbscan_min_pts),
        PURSUIT_DOUBLE_FIELD("learning.alpha", learning.alpha),
        PURSUIT_DOUBLE_FIELD("learning.discount", learning.discount),
        PURSUIT_DOUBLE_FIELD("learning.epsilon_initial", learning.epsilon_initial),
        PURSUIT_DOUBLE_FIELD("learning.epsilon_final", learning.epsilon_final),
        PURSUIT_DOUBLE_FIELD("learning.reward_variance", learning.reward_variance),
        PURSUIT_BOOL_FIELD("learning.freeze_priority", learning.freeze_priority),
        PURSUIT_INT_FIELD("learning.rollouts", learning.rollouts),
        PURSUIT_INT_FIELD("learning.horizon", learning.horizon),
        PURSUIT_BOOL_FIELD("learning.home_when_flat", learning.home_when_flat),
        Field{"learning.state_mode",
              [](ExperimentConfig& c, const std::string& v) {
                  if (v == "position") c.learning.state_mode = QStateMode::Position;
                  else if (v == "relative") c.learning.state_mode = QStateMode::RelativeToCentroid;
                  else throw ConfigError("bad state mode '" + v + "'");
              },
              [](const ExperimentConfig& c) -> std::string {
                  return c.learning.state_mode == QStateMode::Position ? "position" : "relative";
              }},
        Field{"learning.evader_policy",
              [](ExperimentConfig& c, const std::string& v) {
                  if (v == "escape") c.learning.evader_policy = EvaderPolicy::Escape;
                  else if (v == "qlearning") c.learning.evader_policy = EvaderPolicy::QLearning;
                  else throw ConfigError("bad evader policy '" + v + "'");
              },
              [](const ExperimentConfig& c) -> std::string {
                  return c.learning.evader_policy == EvaderPolicy::Escape ? "escape" : "qlearning";
              }},
    };
    return table;
}

#undef PURSUIT_INT_FIELD
#undef PURSUIT_DOUBLE_FIELD
#undef PURSUIT_BOOL_FIELD

const Field& field(const std::string& key)
{
    for (const auto& f : fields())
        if (f.key == key) return f;
    throw ConfigError("unknown config key '" + key + "'");
}

void flatten(const YAML::Node& node, const std::string& prefix, ExperimentConfig& cfg)
{
    if (node.IsMap()) {
        for (const auto& kv : node) {
            const auto name = kv.first.as<std::string>();
            flatten(kv.second, prefix.empty() ? name : prefix + "." + name, cfg);
        }
        return;
    }
    if (node.IsSequence()) {
        // [[x, y], ...] or [a, b, ...], rewritten to the flat "x:y;x:y" / "a;b" form.
        std::string flat;
        for (const auto& item : node) {
            if (!flat.empty()) flat += ';';
            if (item.IsSequence()) {
                if (item.size() != 2) throw ConfigError(prefix + " entries must be [x, y]");
                flat += item[0].Scalar() + ':' + item[1].Scalar();
            } else if (item.IsScalar()) {
                flat += item.Scalar();
            } else {
                throw ConfigError(prefix + " has an unsupported entry");
            }
        }
        set_config_value(cfg, prefix, flat);
        return;
    }
    if (!node.IsScalar()) throw ConfigError("config key '" + prefix + "' needs a scalar value");
    set_config_value(cfg, prefix, node.Scalar());
}

}  // namespace

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& f : fields()) out.push_back(f.key);
        return out;
    }();
    return keys;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value)
{
    field(key).set(cfg, value);
}

std::string get_config_value(const ExperimentConfig& cfg, const std::string& key)
{
    return field(key).get(cfg);
}

void apply_config_text(ExperimentConfig& cfg, const std::string& yaml)
{
    YAML::Node root;
    try {
        root = YAML::Load(yaml);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (root.IsNull()) return;
    if (!root.IsMap()) throw ConfigError("config root must be a map");
    try {
        flatten(root, "", cfg);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
}

void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str());
}

}  // namespace pursuit
