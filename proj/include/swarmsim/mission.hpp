#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "swarmsim/errors.hpp"
#include "swarmsim/steering.hpp"
#include "swarmsim/world.hpp"

namespace swarm {

struct MissionParams {
    double hover_duration = 2.0;    // s
    double h_pickup = 0.3;          // m, also the transport height
    double h_cruise = 1.5;          // m
    double v_land = 0.3;            // m/s
    double arrival_radius = 0.10;   // m, horizontal
    double arrival_height_tolerance = 0.05;  // m
    double hover_tolerance = 0.15;  // m; hover timer restarts beyond this
    double landed_height = 0.02;    // m
    // Docking descends only once within this horizontal distance of the slot.
    double station_approach_radius = 1.0;

    void validate() const;
};

// Thresholds that decide whether an agent can be offered a package.
struct AssignmentPolicy {
    double low_battery = 0.15;
    double comm_timeout = 3.0;  // s
};

// ---------------------------------------------------------------------------
// Operator commands

struct StartCmd {};
struct LandCmd {};
struct SetModeCmd {
    FlightMode mode;
};
struct SpawnPackageCmd {
    double x;
    double y;
};
struct MoveHumanCmd {
    ObstacleId human;
    double x;
    double y;
};
struct InjectCommLossCmd {
    AgentId agent;
    double duration;
};
struct PauseCmd {};
struct ResumeCmd {};
struct SetRateCmd {
    double rate;
};

using CommandPayload = std::variant<StartCmd, LandCmd, SetModeCmd, SpawnPackageCmd, MoveHumanCmd,
                                    InjectCommLossCmd, PauseCmd, ResumeCmd, SetRateCmd>;

struct OperatorCommand {
    CommandPayload payload;
    double issue_time = 0.0;
};

std::string_view command_name(const CommandPayload& payload);

// A command that cannot be applied. `reason` is the wire-level code
// ("parse", "bounds", "unknown_command", "unknown_id", "invalid").
class CommandRejected : public ValidationError {
public:
    CommandRejected(std::string reason, const std::string& what)
        : ValidationError(what), reason_(std::move(reason)) {}

    const std::string& reason() const { return reason_; }

private:
    std::string reason_;
};

// Throws CommandRejected when coordinates fall outside the arena footprint or
// ids do not exist.
void validate_command(const CommandPayload& payload, const WorldState& world);

// ---------------------------------------------------------------------------
// Allocation and the per-agent phase machine

// Eligible agent closest to the package's spawn point; ties go to the lower id.
std::optional<AgentId> assign_nearest(const Package& package, const WorldState& world,
                                      const AssignmentPolicy& policy = {});

// Offers every waiting package, in spawn order, to assign_nearest.
void assign_waiting_packages(WorldState& world, const AssignmentPolicy& policy);

// Where the coordinator steers an agent in its current phase.
struct PhaseGoal {
    Vec3 target;
    AltitudeCommand altitude;
};

PhaseGoal phase_goal(const AgentState& agent, const WorldState& world, const MissionParams& params);

// Advances one agent's phase machine after its pose has been integrated.
// Mutates the agent and its package and appends events to world.event_log.
void step_agent(WorldState& world, AgentId id, const MissionParams& params, double dt);

void apply_command(const OperatorCommand& cmd, WorldState& world, const MissionParams& params);

// Puts the agent into a safety landing (or Failed) and releases its package.
void begin_safety_landing(WorldState& world, AgentId id, FailureReason reason);
void fail_agent(WorldState& world, AgentId id, FailureReason reason);

// Returns an undelivered package held by `failed` to its spawn point, waiting.
void reassign_on_failure(WorldState& world, AgentId failed);

// True when the phase machine documents a direct transition from -> to.
bool is_documented_transition(Phase from, Phase to);

}  // namespace swarm
