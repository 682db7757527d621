#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "swarmsim/vec3.hpp"

namespace swarm {

enum class AgentId : std::uint32_t {};
enum class PackageId : std::uint32_t {};
enum class ObstacleId : std::uint32_t {};

template <typename Id>
constexpr std::uint32_t to_index(Id id) {
    return static_cast<std::uint32_t>(id);
}

enum class FlightMode { wander, swarm };

enum class Phase {
    OnGround,
    TakingOff,
    FreeFlight,
    ToPackage,
    HoverPickup,
    Transport,
    HoverDeliver,
    ClimbBack,
    ToStation,
    Docked,
    ReturnToStart,
    Landing,
    Landed,
    Failed,
};

inline constexpr Phase all_phases[] = {
    Phase::OnGround,   Phase::TakingOff,    Phase::FreeFlight, Phase::ToPackage,
    Phase::HoverPickup, Phase::Transport,   Phase::HoverDeliver, Phase::ClimbBack,
    Phase::ToStation,  Phase::Docked,       Phase::ReturnToStart, Phase::Landing,
    Phase::Landed,     Phase::Failed,
};

struct MissionPhase {
    Phase kind = Phase::OnGround;
    std::optional<PackageId> package;  // ToPackage .. HoverDeliver
    double remaining = 0.0;            // hover timers only

    friend bool operator==(const MissionPhase&, const MissionPhase&) = default;
};

// Why an agent left service on its own; none for agents that were commanded.
enum class FailureReason { none, comm_loss, low_battery, critical_battery, depleted, injected };

enum class PackageStatus { waiting, assigned, in_transit, delivered };

enum class ObstacleKind { static_obstacle, human };

std::string_view to_string(FlightMode m);
std::string_view to_string(Phase p);
std::string_view to_string(PackageStatus s);
std::string_view to_string(FailureReason r);
std::string_view to_string(ObstacleKind k);
std::optional<FlightMode> flight_mode_from_string(std::string_view s);
std::optional<Phase> phase_from_string(std::string_view s);
std::optional<PackageStatus> package_status_from_string(std::string_view s);

struct Arena {
    Vec3 min_corner{0.0, 0.0, 0.0};
    Vec3 max_corner{20.0, 20.0, 5.0};
    double fence_margin = 1.0;

    bool contains(const Vec3& p) const;
    bool contains_footprint(double x, double y) const;
    // Throws ValidationError naming the broken constraint.
    void validate() const;
};

struct HumanPath {
    std::vector<Vec3> waypoints;  // z ignored
    double speed = 1.0;           // m/s
    bool loop = true;             // closed polyline when true

    double length() const;
    // Position after walking `distance` metres from the first waypoint.
    Vec3 position_at(double distance) const;
};

struct Obstacle {
    ObstacleId id{};
    ObstacleKind kind = ObstacleKind::static_obstacle;
    Vec3 center;  // z ignored: vertical cylinder
    double radius = 0.35;
    std::optional<HumanPath> path;
    // Live override from the operator console: walk here at path speed, then stand.
    std::optional<Vec3> override_target;
};

struct AgentState {
    AgentId id{};
    Vec3 position;
    Vec3 velocity;
    FlightMode mode = FlightMode::wander;
    MissionPhase phase;
    double battery = 1.0;
    Vec3 start_position;
    double last_rx_time = 0.0;
    double wander_angle = 0.0;
    std::optional<PackageId> carried_package;

    // Onboard state: last delivered set-point and the autonomous landing latch.
    Vec3 held_setpoint;
    bool onboard_landing = false;

    FailureReason failure = FailureReason::none;
    bool land_pending = false;           // land command received mid-delivery
    Vec3 hold_point;                     // xy anchor for TakingOff / ClimbBack
    std::optional<std::size_t> station_slot;
};

struct Package {
    PackageId id{};
    Vec3 spawn_position;
    Vec3 destination;
    PackageStatus status = PackageStatus::waiting;
    std::optional<AgentId> assigned_agent;
    double spawn_time = 0.0;
    std::optional<double> delivery_time;
};

struct ChargeSlot {
    Vec3 position;
    bool occupied = false;
    std::optional<AgentId> agent;
    double charge_fraction = 0.0;
};

struct ChargeStation {
    Vec3 position;
    std::vector<ChargeSlot> slots;
    double charge_rate = 0.01;  // fraction per second
    double dock_radius = 0.15;
};

enum class EventKind {
    command,
    spawn,
    assign,
    pickup_start,
    hover_reset,
    pickup_done,
    deliver_done,
    takeoff_done,
    resume,
    return_to_start,
    comm_lost,
    landing,
    landed,
    failed,
    reassign,
    low_battery,
    to_station,
    dock,
    launch,
    mode_change,
};

std::string_view to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(std::string_view s);

struct Event {
    EventKind kind;
    std::optional<AgentId> agent;
    std::optional<PackageId> package;
    std::string detail;

    friend bool operator==(const Event&, const Event&) = default;
};

struct WorldState {
    double time = 0.0;
    long long tick = 0;
    double dt = 0.02;
    Arena arena;
    std::vector<AgentState> agents;  // agents[i].id == AgentId{i}
    std::vector<Package> packages;   // packages[k].id == PackageId{k}
    std::vector<Obstacle> obstacles;
    std::optional<ChargeStation> station;
    std::uint64_t seed = 0;
    FlightMode mode = FlightMode::wander;
    Vec3 destination{18.0, 18.0, 0.0};
    std::vector<Event> event_log;  // events emitted during the current tick

    AgentState& agent(AgentId id);
    const AgentState& agent(AgentId id) const;
    Package& package(PackageId id);
    const Package& package(PackageId id) const;
    Obstacle& obstacle(ObstacleId id);

    void emit(EventKind kind, std::optional<AgentId> agent = std::nullopt,
              std::optional<PackageId> package = std::nullopt, std::string detail = {});
};

// On the ground (never took off, landed, docked, or a failed airframe at rest)
// agents are invisible to steering and allocation.
bool is_airborne(const AgentState& a);

bool is_mission_phase(Phase p);

// Ids of all other airborne agents within `radius` (inclusive), sorted by id.
std::vector<AgentId> neighbors_within(AgentId agent, double radius, const WorldState& world);

// Boundary repulsion: zero on the margin-shrunk interior, otherwise the sum
// over violated faces of inward normals scaled by the penetration ramp.
Vec3 fence_vector(const Vec3& position, const Arena& arena);

struct Clearance {
    double distance;      // horizontal distance to the cylinder surface; negative inside
    Vec3 away_direction;  // horizontal unit vector from the axis to the point
};

Clearance obstacle_clearance(const Vec3& position, const Obstacle& obstacle);

// Uniform-grid index over airborne agents, rebuilt once per tick. Queries
// return exactly the ids neighbors_within would.
class NeighborGrid {
public:
    NeighborGrid(const WorldState& world, double cell_size);

    std::vector<AgentId> query(AgentId agent, double radius) const;

private:
    struct Entry {
        std::int64_t cell_x;
        std::int64_t cell_y;
        std::int64_t cell_z;
        std::uint32_t agent;
    };

    std::int64_t cell_of(double v) const;

    const WorldState* world_;
    double cell_size_;
    std::vector<Entry> entries_;  // sorted by (cell, agent)
};

}  // namespace swarm
