#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "swarmsim/comms.hpp"
#include "swarmsim/json_io.hpp"
#include "swarmsim/mission.hpp"
#include "swarmsim/power.hpp"
#include "swarmsim/steering.hpp"
#include "swarmsim/world.hpp"

namespace swarm {

struct StartLayout {
    Vec3 origin{2.0, 2.0, 0.0};
    double spacing = 1.0;
    int columns = 0;  // 0: ceil(sqrt(agent_count))
};

struct StationConfig {
    Vec3 position{10.0, 1.5, 0.0};
    int slots = 2;
    double slot_spacing = 0.8;  // slots laid out along +x
    double charge_rate = 0.01;  // fraction per second
    double dock_radius = 0.15;
    int spares = 0;             // extra agents that start docked and fully charged
};

enum class FaultKind { battery, fail };

// Scripted fault injections (not operator commands).
struct Fault {
    double time = 0.0;
    FaultKind kind = FaultKind::battery;
    AgentId agent{};
    double value = 0.0;  // battery level for FaultKind::battery
};

struct ScenarioConfig {
    std::string name = "scenario";
    Arena arena;
    double dt = 0.02;
    double duration = 60.0;
    std::uint64_t seed = 0;
    bool strict = true;

    int agent_count = 16;
    StartLayout layout;
    std::vector<Vec3> start_positions;  // explicit positions override the grid layout
    FlightMode initial_mode = FlightMode::wander;
    bool start_airborne = false;
    bool random_headings = false;

    SteeringWeights weights;
    MissionParams mission;
    OnboardParams onboard;
    ChannelConfig channel;
    PowerParams power;
    std::optional<StationConfig> station;

    std::vector<Obstacle> obstacles;
    Vec3 destination{18.0, 18.0, 0.0};
    std::vector<OperatorCommand> commands;  // sorted by issue_time
    std::vector<Fault> faults;

    double r_collision = 0.15;  // m, airframe half-width plus margin

    // Flying roster followed by docked spares.
    std::vector<Vec3> resolved_start_positions() const;
    std::vector<Vec3> slot_positions() const;
    int total_agents() const { return agent_count + (station ? station->spares : 0); }

    // Throws ValidationError naming the offending field.
    void validate() const;
};

ScenarioConfig parse_scenario(const json& j);
// Throws ParseError for unreadable/malformed files, ValidationError for bad values.
ScenarioConfig load_scenario(const std::filesystem::path& path);

// Scheduled command entries: {"time": t, "cmd": ...}.
OperatorCommand scheduled_command_from_json(const json& j);
json scheduled_command_to_json(const OperatorCommand& cmd);

// Reads a JSONL command log (one scheduled entry per line).
std::vector<OperatorCommand> load_command_log(const std::filesystem::path& path);

// Merges extra commands into the schedule, stable by time.
void merge_commands(ScenarioConfig& config, const std::vector<OperatorCommand>& extra);

}  // namespace swarm
