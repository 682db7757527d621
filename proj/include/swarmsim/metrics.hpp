#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "swarmsim/json_io.hpp"
#include "swarmsim/world.hpp"

namespace swarm {

struct PackageLatency {
    PackageId id{};
    double latency = 0.0;  // delivery_time - spawn_time

    friend bool operator==(const PackageLatency&, const PackageLatency&) = default;
};

struct MetricsSummary {
    std::optional<double> min_interagent_distance;  // airborne pairs
    std::optional<double> min_human_clearance;      // airborne agent to human cylinder surface
    long long collision_count = 0;  // onsets of airborne pairs closer than 2 * r_collision
    long long packages_spawned = 0;
    long long packages_delivered = 0;
    std::vector<PackageLatency> latencies;
    std::optional<double> mean_order_parameter;  // over ticks in swarm mode
    long long comm_loss_landings = 0;
    std::optional<double> makespan;  // last delivery - first spawn
    long long docks = 0;
    long long launches = 0;
    long long ticks = 0;

    friend bool operator==(const MetricsSummary&, const MetricsSummary&) = default;
};

json summary_to_json(const MetricsSummary& m);
MetricsSummary summary_from_json(const json& j);

// |sum of horizontal unit velocities| / N over FreeFlight agents; nullopt when
// no agent is in FreeFlight.
std::optional<double> order_parameter(const WorldState& world);

// Running metrics, fed once per tick with the post-step world.
class MetricsAccumulator {
public:
    explicit MetricsAccumulator(double r_collision);

    void observe(const WorldState& world);
    MetricsSummary summary() const;

private:
    double r_collision_;
    MetricsSummary m_;
    double order_sum_ = 0.0;
    long long order_ticks_ = 0;
    std::optional<double> first_spawn_;
    std::optional<double> last_delivery_;
    std::set<std::pair<std::uint32_t, std::uint32_t>> colliding_;
};

}  // namespace swarm
