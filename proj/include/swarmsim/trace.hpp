#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <vector>

#include "swarmsim/json_io.hpp"
#include "swarmsim/scenario.hpp"
#include "swarmsim/world.hpp"

namespace swarm {

struct AgentRecord {
    AgentId id{};
    Vec3 position;
    Vec3 velocity;
    FlightMode mode = FlightMode::wander;
    Phase phase = Phase::OnGround;
    std::optional<PackageId> phase_package;
    double remaining = 0.0;
    double battery = 1.0;
    std::optional<PackageId> carried_package;
    FailureReason failure = FailureReason::none;
};

struct PackageRecord {
    PackageId id{};
    Vec3 spawn_position;
    PackageStatus status = PackageStatus::waiting;
    std::optional<AgentId> agent;
};

struct HumanRecord {
    ObstacleId id{};
    Vec3 position;
};

struct TickRecord {
    long long tick = 0;
    double time = 0.0;
    FlightMode mode = FlightMode::wander;
    std::vector<AgentRecord> agents;
    std::vector<PackageRecord> packages;
    std::vector<HumanRecord> humans;
    std::vector<Event> events;
};

TickRecord make_record(const WorldState& world);
json record_to_json(const TickRecord& r);
TickRecord record_from_json(const json& j);

// Static facts a trace reader needs to recompute metrics.
struct TraceHeader {
    std::string scenario;
    std::uint64_t seed = 0;
    double dt = 0.02;
    Arena arena;
    double r_collision = 0.15;
    double v_max = 1.0;
    double h_pickup = 0.3;
    Vec3 destination;
    std::vector<std::pair<ObstacleId, double>> human_radii;
};

TraceHeader make_header(const ScenarioConfig& config);
json header_to_json(const TraceHeader& h);
TraceHeader header_from_json(const json& j);

// JSONL: one header line, one line per tick, one summary line at close.
class TraceWriter {
public:
    TraceWriter(const std::filesystem::path& path, const TraceHeader& header);

    void write(const TickRecord& record);
    void write_summary(const json& summary);
    void flush();

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

}  // namespace swarm
