#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pursuit/experiment.hpp"

namespace pursuit {

namespace {

struct Fixed {
    double v;
};

std::ostream& operator<<(std::ostream& os, Fixed f)
{
    return os << std::fixed << std::setprecision(6) << f.v << std::defaultfloat;
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    body(out);
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void write_summary_csv(std::ostream& os, const std::vector<BatchSummary>& batches)
{
    os << "case,runs,mean_capture,std_capture,mean_flexibility,std_flexibility\n";
    for (const auto& b : batches)
        os << to_string(b.case_id) << ',' << b.run_count() << ',' << Fixed{b.capture.mean} << ','
           << Fixed{b.capture.stddev} << ',' << Fixed{b.flexibility.mean} << ','
           << Fixed{b.flexibility.stddev} << '\n';
}

void write_runs_csv(std::ostream& os, const BatchSummary& batch)
{
    os << "seed,capture_ticks,flexibility\n";
    for (const auto& r : batch.runs) os << r.seed << ',' << r.capture_ticks << ',' << r.flexibility << '\n';
}

void write_trajectory_csv(std::ostream& os, const BatchSummary& batch)
{
    os << "tick,mean_reward\n";
    for (std::size_t t = 0; t < batch.mean_reward.size(); ++t)
        os << t + 1 << ',' << Fixed{batch.mean_reward[t]} << '\n';
}

void write_paired_csv(std::ostream& os, const Comparison& cmp)
{
    os << "seed";
    for (const auto& b : cmp.cases) os << ',' << to_string(b.case_id);
    os << '\n';
    if (cmp.cases.empty()) return;
    for (std::size_t i = 0; i < cmp.cases.front().runs.size(); ++i) {
        os << cmp.cases.front().runs[i].seed;
        for (const auto& b : cmp.cases) os << ',' << b.runs.at(i).capture_ticks;
        os << '\n';
    }
}

std::vector<std::filesystem::path> emit_outputs(const std::vector<BatchSummary>& batches,
                                                const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::function<void(std::ostream&)>& body) {
        const auto path = dir / name;
        write_file(path, body);
        written.push_back(path);
    };

    emit("summary.csv", [&](std::ostream& os) { write_summary_csv(os, batches); });
    for (const auto& b : batches) {
        const auto tag = to_string(b.case_id);
        emit("runs_" + tag + ".csv", [&](std::ostream& os) { write_runs_csv(os, b); });
        emit("trajectory_" + tag + ".csv", [&](std::ostream& os) { write_trajectory_csv(os, b); });
    }
    if (batches.size() > 1) {
        Comparison cmp{batches};
        emit("paired.csv", [&](std::ostream& os) { write_paired_csv(os, cmp); });
    }

    nlohmann::json manifest;
    manifest["schema_version"] = kOutputSchemaVersion;
    manifest["files"] = nlohmann::json::array();
    for (const auto& p : written) manifest["files"].push_back(p.filename().string());
    emit("manifest.json", [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
    return written;
}

}  // namespace pursuit
