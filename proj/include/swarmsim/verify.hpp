#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "swarmsim/metrics.hpp"
#include "swarmsim/trace.hpp"

namespace swarm {

struct VerifyReport {
    long long ticks = 0;
    MetricsSummary recomputed;
    std::optional<MetricsSummary> recorded;  // the trace's summary line, if present
    std::vector<std::string> mismatches;     // recomputed vs recorded, field by field
    std::vector<std::string> violations;     // invariant breaches seen in the records

    bool ok() const { return recorded && mismatches.empty() && violations.empty(); }
};

// Recomputes the metrics summary from tick records alone. Deliberately does
// not reuse MetricsAccumulator so the two can be checked against each other.
class TraceReplayMetrics {
public:
    explicit TraceReplayMetrics(const TraceHeader& header);
    void add(const TickRecord& record);
    MetricsSummary finish() const;

private:
    TraceHeader header_;
    MetricsSummary m_;
    std::vector<double> spawn_time_;
    std::vector<std::vector<bool>> touching_;
    double phi_sum_ = 0.0;
    long long phi_ticks_ = 0;
    std::optional<double> first_spawn_;
    std::optional<double> last_delivery_;
};

std::vector<std::string> compare_summaries(const MetricsSummary& expected, const MetricsSummary& actual);

// Reads a JSONL trace, recomputes metrics, compares them with the summary
// line and checks per-record invariants. Throws ParseError on malformed files.
VerifyReport verify_trace(const std::filesystem::path& path);

}  // namespace swarm
