// Command-line front end: run one case, compare several, or export a replay.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "pursuit/experiment.hpp"

namespace {

using namespace pursuit;

std::string flag_name(const std::string& key)
{
    std::string name = "--" + key;
    std::replace(name.begin(), name.end(), '.', '-');
    std::replace(name.begin(), name.end(), '_', '-');
    return name;
}

struct CommonOptions {
    std::string config_path;
    std::map<std::string, std::string> overrides;
    std::vector<std::string> sets;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_case)
{
    cmd->add_option("-c,--config", opts.config_path, "YAML config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", opts.sets, "Override as key=value (repeatable)");
    cmd->add_option("-j,--workers", opts.workers, "Worker threads (default: PURSUIT_WORKERS or cores)");
    for (const auto& key : config_keys()) {
        if (key == "case" && !with_case) continue;
        auto* opt = cmd->add_option_function<std::string>(
            flag_name(key), [&opts, key](const std::string& v) { opts.overrides[key] = v; },
            "config key " + key);
        opt->group("Config");
    }
}

ExperimentConfig build_config(const CommonOptions& opts)
{
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) apply_config_file(cfg, opts.config_path);
    for (const auto& [k, v] : opts.overrides) set_config_value(cfg, k, v);
    for (const auto& s : opts.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

void print_summary(const std::vector<BatchSummary>& batches)
{
    write_summary_csv(std::cout, batches);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Grid pursuit-evasion experiments with clustered coalition formation"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    std::string run_out = "results";
    auto* run = app.add_subcommand("run", "Run a batch of one case");
    add_common(run, run_opts, true);
    run->add_option("-o,--out", run_out, "Output directory");

    CommonOptions cmp_opts;
    std::string cmp_out = "results";
    std::string cases_arg = "AGR,AGRMF,SOFM_AGRMF,KMEANS_AGRMF,DBSCAN_AGRMF";
    auto* compare = app.add_subcommand("compare", "Run several cases on shared seeds");
    add_common(compare, cmp_opts, false);
    compare->add_option("--cases", cases_arg, "Comma-separated case list");
    compare->add_option("-o,--out", cmp_out, "Output directory");

    CommonOptions rep_opts;
    std::string rep_out = "trace.jsonl";
    std::uint64_t rep_seed = 0;
    bool rep_seed_set = false;
    auto* replay = app.add_subcommand("replay-export", "Write a per-tick JSON-lines trace of one run");
    add_common(replay, rep_opts, true);
    replay->add_option("--seed", rep_seed, "Run seed (default: base seed)")->each([&](const std::string&) {
        rep_seed_set = true;
    });
    replay->add_option("-o,--out", rep_out, "Trace file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) {
            const auto cfg = build_config(run_opts);
            auto batch = run_batch(cfg, run_opts.workers);
            emit_outputs({batch}, run_out);
            print_summary({batch});
        } else if (*compare) {
            const auto base = build_config(cmp_opts);
            std::vector<ExperimentConfig> cfgs;
            std::stringstream ss(cases_arg);
            std::string name;
            while (std::getline(ss, name, ',')) {
                auto c = base;
                c.case_id = parse_case(name);
                cfgs.push_back(c);
            }
            auto cmp = compare_cases(cfgs, cmp_opts.workers);
            emit_outputs(cmp.cases, cmp_out);
            print_summary(cmp.cases);
            for (std::size_t i = 0; i + 1 < cmp.cases.size(); ++i) {
                const auto d = cmp.paired(cmp.cases[i].case_id, cmp.cases[i + 1].case_id);
                std::cout << to_string(d.a) << " vs " << to_string(d.b) << ": improvement "
                          << std::fixed << std::setprecision(2) << d.improvement_pct
                          << "%, paired diff " << d.mean_diff << " +/- " << d.std_error << '\n';
            }
        } else if (*replay) {
            const auto cfg = build_config(rep_opts);
            std::ofstream out(rep_out);
            if (!out) throw std::runtime_error("cannot open " + rep_out);
            StreamTraceSink sink(out);
            const auto m = run_single(cfg, rep_seed_set ? rep_seed : cfg.base_seed, &sink);
            std::cout << "capture_ticks=" << m.capture_ticks << " flexibility=" << m.flexibility << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
