#include "swarmsim/mission.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

namespace swarm {

namespace {

constexpr double kTimerEps = 1e-9;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const Package& phase_package(const WorldState& world, const AgentState& a) {
    if (!a.phase.package)
        throw ConsistencyError("agent " + std::to_string(to_index(a.id)) + " in " +
                               std::string(to_string(a.phase.kind)) + " without a package");
    const auto idx = to_index(*a.phase.package);
    if (idx >= world.packages.size())
        throw ConsistencyError("agent " + std::to_string(to_index(a.id)) +
                               " references missing package " + std::to_string(idx));
    return world.packages[idx];
}

Package& phase_package(WorldState& world, const AgentState& a) {
    return const_cast<Package&>(phase_package(std::as_const(world), a));
}

Vec3 at_height(const Vec3& p, double z) { return {p.x, p.y, z}; }

void release_station_slot(WorldState& world, AgentState& a) {
    if (!a.station_slot || !world.station) return;
    auto& slot = world.station->slots.at(*a.station_slot);
    if (slot.agent == a.id) {
        slot.occupied = false;
        slot.agent.reset();
    }
    a.station_slot.reset();
}

void set_phase(AgentState& a, Phase kind, std::optional<PackageId> pkg = std::nullopt,
               double remaining = 0.0) {
    a.phase = MissionPhase{kind, pkg, remaining};
}

}  // namespace

void MissionParams::validate() const {
    if (!(hover_duration >= 0.0)) throw ValidationError("mission.hover_duration: must be >= 0");
    if (!(h_pickup > 0.0)) throw ValidationError("mission.h_pickup: must be > 0");
    if (!(h_cruise > h_pickup)) throw ValidationError("mission.h_cruise: must exceed h_pickup");
    if (!(v_land > 0.0)) throw ValidationError("mission.v_land: must be > 0");
    if (!(arrival_radius > 0.0)) throw ValidationError("mission.arrival_radius: must be > 0");
    if (!(hover_tolerance > arrival_radius))
        throw ValidationError("mission.hover_tolerance: must exceed arrival_radius");
    if (!(arrival_height_tolerance > 0.0))
        throw ValidationError("mission.arrival_height_tolerance: must be > 0");
    if (!(landed_height > 0.0)) throw ValidationError("mission.landed_height: must be > 0");
}

std::string_view command_name(const CommandPayload& payload) {
    return std::visit(overloaded{
                          [](const StartCmd&) { return std::string_view{"start"}; },
                          [](const LandCmd&) { return std::string_view{"land"}; },
                          [](const SetModeCmd&) { return std::string_view{"set_mode"}; },
                          [](const SpawnPackageCmd&) { return std::string_view{"spawn_package"}; },
                          [](const MoveHumanCmd&) { return std::string_view{"move_human"}; },
                          [](const InjectCommLossCmd&) { return std::string_view{"inject_comm_loss"}; },
                          [](const PauseCmd&) { return std::string_view{"pause"}; },
                          [](const ResumeCmd&) { return std::string_view{"resume"}; },
                          [](const SetRateCmd&) { return std::string_view{"set_rate"}; },
                      },
                      payload);
}

void validate_command(const CommandPayload& payload, const WorldState& world) {
    std::visit(overloaded{
                   [&](const SpawnPackageCmd& c) {
                       if (!world.arena.contains_footprint(c.x, c.y))
                           throw CommandRejected("bounds", "spawn_package outside arena footprint");
                   },
                   [&](const MoveHumanCmd& c) {
                       const auto it = std::find_if(
                           world.obstacles.begin(), world.obstacles.end(),
                           [&](const Obstacle& o) { return o.id == c.human; });
                       if (it == world.obstacles.end() || it->kind != ObstacleKind::human)
                           throw CommandRejected("unknown_id", "move_human: no such human");
                       if (!world.arena.contains_footprint(c.x, c.y))
                           throw CommandRejected("bounds", "move_human target outside arena footprint");
                   },
                   [&](const InjectCommLossCmd& c) {
                       if (to_index(c.agent) >= world.agents.size())
                           throw CommandRejected("unknown_id", "inject_comm_loss: no such agent");
                       if (!(c.duration > 0.0) || !std::isfinite(c.duration))
                           throw CommandRejected("invalid", "inject_comm_loss: duration must be > 0");
                   },
                   [&](const SetRateCmd& c) {
                       if (!(c.rate >= 0.25 && c.rate <= 8.0))
                           throw CommandRejected("bounds", "set_rate: rate must be in [0.25, 8]");
                   },
                   [](const auto&) {},
               },
               payload);
}

// ---------------------------------------------------------------------------
// Allocation

std::optional<AgentId> assign_nearest(const Package& package, const WorldState& world,
                                      const AssignmentPolicy& policy) {
    std::optional<AgentId> best;
    double best_distance = std::numeric_limits<double>::infinity();
    for (const auto& a : world.agents) {
        if (a.phase.kind != Phase::FreeFlight) continue;
        if (a.battery < policy.low_battery) continue;
        if (a.onboard_landing || world.time - a.last_rx_time > policy.comm_timeout) continue;
        const double d = distance(a.position, package.spawn_position);
        if (d < best_distance) {  // strict: ties keep the lower id
            best_distance = d;
            best = a.id;
        }
    }
    return best;
}

void assign_waiting_packages(WorldState& world, const AssignmentPolicy& policy) {
    for (auto& pkg : world.packages) {
        if (pkg.status != PackageStatus::waiting) continue;
        const auto chosen = assign_nearest(pkg, world, policy);
        if (!chosen) continue;
        AgentState& a = world.agent(*chosen);
        pkg.status = PackageStatus::assigned;
        pkg.assigned_agent = a.id;
        set_phase(a, Phase::ToPackage, pkg.id);
        world.emit(EventKind::assign, a.id, pkg.id);
    }
}

// ---------------------------------------------------------------------------
// Phase goals

PhaseGoal phase_goal(const AgentState& a, const WorldState& world, const MissionParams& params) {
    const auto hold = [](double z) { return AltitudeCommand{z, false, 0.0}; };
    switch (a.phase.kind) {
        case Phase::TakingOff:
        case Phase::ClimbBack:
            return {at_height(a.hold_point, params.h_cruise), hold(params.h_cruise)};
        case Phase::FreeFlight:
            return {a.position, hold(params.h_cruise)};
        case Phase::ToPackage:
        case Phase::HoverPickup: {
            const Package& p = phase_package(world, a);
            return {at_height(p.spawn_position, params.h_pickup), hold(params.h_pickup)};
        }
        case Phase::Transport:
        case Phase::HoverDeliver: {
            const Package& p = phase_package(world, a);
            return {at_height(p.destination, params.h_pickup), hold(params.h_pickup)};
        }
        case Phase::ToStation: {
            if (!world.station || !a.station_slot)
                throw ConsistencyError("agent " + std::to_string(to_index(a.id)) +
                                       " heading to a station slot that does not exist");
            const Vec3 slot = world.station->slots.at(*a.station_slot).position;
            const double z = horizontal_distance(a.position, slot) > params.station_approach_radius
                                 ? params.h_cruise
                                 : slot.z;
            return {at_height(slot, z), hold(z)};
        }
        case Phase::ReturnToStart:
            return {at_height(a.start_position, params.h_cruise), hold(params.h_cruise)};
        case Phase::Landing:
            return {at_height(a.hold_point, 0.0), AltitudeCommand{0.0, true, params.v_land}};
        case Phase::OnGround:
        case Phase::Docked:
        case Phase::Landed:
        case Phase::Failed:
            break;
    }
    return {a.position, hold(a.position.z)};
}

// ---------------------------------------------------------------------------
// Failure handling

void reassign_on_failure(WorldState& world, AgentId failed) {
    AgentState& a = world.agent(failed);
    std::optional<PackageId> held = a.phase.package ? a.phase.package : a.carried_package;
    a.carried_package.reset();
    a.phase.package.reset();
    a.land_pending = false;
    if (!held) return;
    Package& pkg = world.package(*held);
    if (pkg.status == PackageStatus::delivered || pkg.assigned_agent != failed) return;
    // Packages are virtual: an undelivered one reappears at its spawn point.
    pkg.status = PackageStatus::waiting;
    pkg.assigned_agent.reset();
    world.emit(EventKind::reassign, failed, pkg.id);
}

void begin_safety_landing(WorldState& world, AgentId id, FailureReason reason) {
    AgentState& a = world.agent(id);
    switch (a.phase.kind) {
        case Phase::OnGround:
        case Phase::Docked:
        case Phase::Landed:
        case Phase::Failed:
            return;
        case Phase::Landing:
            if (a.failure == FailureReason::none) a.failure = reason;
            return;
        default:
            break;
    }
    reassign_on_failure(world, id);
    release_station_slot(world, a);
    a.hold_point = a.position;
    a.failure = reason;
    set_phase(a, Phase::Landing);
    world.emit(EventKind::landing, id, std::nullopt, std::string(to_string(reason)));
}

void fail_agent(WorldState& world, AgentId id, FailureReason reason) {
    AgentState& a = world.agent(id);
    if (a.phase.kind == Phase::Failed) return;
    reassign_on_failure(world, id);
    release_station_slot(world, a);
    a.failure = reason;
    a.hold_point = a.position;
    set_phase(a, Phase::Failed);
    if (!is_airborne(a)) a.velocity = {};
    world.emit(EventKind::failed, id, std::nullopt, std::string(to_string(reason)));
}

// ---------------------------------------------------------------------------
// Phase machine

void step_agent(WorldState& world, AgentId id, const MissionParams& params, double dt) {
    AgentState& a = world.agent(id);
    const auto arrived = [&](const Vec3& target, double height) {
        return horizontal_distance(a.position, target) <= params.arrival_radius &&
               std::abs(a.position.z - height) <= params.arrival_height_tolerance;
    };
    const auto at_cruise = [&] {
        return std::abs(a.position.z - params.h_cruise) <= params.arrival_height_tolerance;
    };
    // Shared by both hover phases: returns true on expiry.
    const auto run_hover_timer = [&](const Vec3& hover_point) {
        if (horizontal_distance(a.position, hover_point) > params.hover_tolerance) {
            a.phase.remaining = params.hover_duration;
            world.emit(EventKind::hover_reset, a.id, a.phase.package);
            return false;
        }
        if (a.phase.remaining <= kTimerEps) return true;
        a.phase.remaining = std::max(0.0, a.phase.remaining - dt);
        return false;
    };

    switch (a.phase.kind) {
        case Phase::TakingOff:
            if (at_cruise()) {
                set_phase(a, Phase::FreeFlight);
                a.mode = world.mode;
                world.emit(EventKind::takeoff_done, a.id);
            }
            break;

        case Phase::ToPackage: {
            const Package& pkg = phase_package(world, a);
            if (arrived(pkg.spawn_position, params.h_pickup)) {
                set_phase(a, Phase::HoverPickup, pkg.id, params.hover_duration);
                world.emit(EventKind::pickup_start, a.id, pkg.id);
            }
            break;
        }

        case Phase::HoverPickup: {
            Package& pkg = phase_package(world, a);
            if (run_hover_timer(pkg.spawn_position)) {
                pkg.status = PackageStatus::in_transit;
                a.carried_package = pkg.id;
                set_phase(a, Phase::Transport, pkg.id);
                world.emit(EventKind::pickup_done, a.id, pkg.id);
            }
            break;
        }

        case Phase::Transport: {
            const Package& pkg = phase_package(world, a);
            if (arrived(pkg.destination, params.h_pickup))
                set_phase(a, Phase::HoverDeliver, pkg.id, params.hover_duration);
            break;
        }

        case Phase::HoverDeliver: {
            Package& pkg = phase_package(world, a);
            if (run_hover_timer(pkg.destination)) {
                pkg.status = PackageStatus::delivered;
                pkg.delivery_time = world.time;
                a.carried_package.reset();
                world.emit(EventKind::deliver_done, a.id, pkg.id);
                if (a.land_pending) {
                    a.land_pending = false;
                    set_phase(a, Phase::ReturnToStart);
                    world.emit(EventKind::return_to_start, a.id);
                } else {
                    a.hold_point = a.position;
                    set_phase(a, Phase::ClimbBack);
                }
            }
            break;
        }

        case Phase::ClimbBack:
            if (at_cruise()) {
                // Resume in the mode currently selected by the operator.
                a.mode = world.mode;
                set_phase(a, Phase::FreeFlight);
                world.emit(EventKind::resume, a.id);
            }
            break;

        case Phase::ReturnToStart:
            if (horizontal_distance(a.position, a.start_position) <= params.arrival_radius) {
                a.hold_point = a.start_position;
                set_phase(a, Phase::Landing);
                world.emit(EventKind::landing, a.id, std::nullopt, "commanded");
            }
            break;

        case Phase::Landing:
            if (a.position.z <= params.landed_height) {
                set_phase(a, Phase::Landed);
                a.velocity = {};
                a.held_setpoint = {};
                world.emit(EventKind::landed, a.id);
            }
            break;

        case Phase::Failed:
            if (a.position.z > 0.0 && a.position.z <= params.landed_height) {
                a.position.z = 0.0;
                a.velocity = {};
            }
            break;

        case Phase::OnGround:
        case Phase::FreeFlight:
        case Phase::ToStation:  // docking is handled by the power module
        case Phase::Docked:
        case Phase::Landed:
            break;
    }
}

// ---------------------------------------------------------------------------
// Operator commands

void apply_command(const OperatorCommand& cmd, WorldState& world, const MissionParams& params) {
    (void)params;
    validate_command(cmd.payload, world);
    world.emit(EventKind::command, std::nullopt, std::nullopt, std::string(command_name(cmd.payload)));

    std::visit(
        overloaded{
            [&](const StartCmd&) {
                for (auto& a : world.agents) {
                    const bool can_start =
                        a.phase.kind == Phase::OnGround ||
                        (a.phase.kind == Phase::Landed && a.failure == FailureReason::none);
                    if (!can_start) continue;
                    a.hold_point = a.position;
                    a.mode = world.mode;
                    set_phase(a, Phase::TakingOff);
                }
            },
            [&](const LandCmd&) {
                for (auto& a : world.agents) {
                    switch (a.phase.kind) {
                        case Phase::HoverPickup:
                        case Phase::Transport:
                        case Phase::HoverDeliver:
                            a.land_pending = true;
                            break;
                        case Phase::ToPackage:
                            reassign_on_failure(world, a.id);
                            [[fallthrough]];
                        case Phase::TakingOff:
                        case Phase::FreeFlight:
                        case Phase::ClimbBack:
                        case Phase::ToStation:
                            release_station_slot(world, a);
                            set_phase(a, Phase::ReturnToStart);
                            world.emit(EventKind::return_to_start, a.id);
                            break;
                        default:
                            break;
                    }
                }
            },
            [&](const SetModeCmd& c) {
                world.mode = c.mode;
                for (auto& a : world.agents) a.mode = c.mode;
                world.emit(EventKind::mode_change, std::nullopt, std::nullopt,
                           std::string(to_string(c.mode)));
            },
            [&](const SpawnPackageCmd& c) {
                Package pkg;
                pkg.id = PackageId{static_cast<std::uint32_t>(world.packages.size())};
                pkg.spawn_position = {c.x, c.y, 0.0};
                pkg.destination = {world.destination.x, world.destination.y, 0.0};
                pkg.spawn_time = world.time;
                world.packages.push_back(pkg);
                world.emit(EventKind::spawn, std::nullopt, pkg.id);
            },
            [&](const MoveHumanCmd& c) { world.obstacle(c.human).override_target = Vec3{c.x, c.y, 0.0}; },
            // Channel and pacing commands are handled by the engine and gateway.
            [](const InjectCommLossCmd&) {},
            [](const PauseCmd&) {},
            [](const ResumeCmd&) {},
            [](const SetRateCmd&) {},
        },
        cmd.payload);
}

// ---------------------------------------------------------------------------

bool is_documented_transition(Phase from, Phase to) {
    using P = Phase;
    static const std::set<std::pair<P, P>> edges = {
        // A parked airframe can still be taken out of service by a fault.
        {P::OnGround, P::TakingOff},       {P::OnGround, P::Failed},
        {P::TakingOff, P::FreeFlight},     {P::TakingOff, P::ReturnToStart},
        {P::TakingOff, P::Landing},        {P::TakingOff, P::Failed},
        {P::FreeFlight, P::ToPackage},     {P::FreeFlight, P::ToStation},
        {P::FreeFlight, P::ReturnToStart}, {P::FreeFlight, P::Landing},
        {P::FreeFlight, P::Failed},
        {P::ToPackage, P::HoverPickup},    {P::ToPackage, P::ReturnToStart},
        {P::ToPackage, P::Landing},        {P::ToPackage, P::Failed},
        {P::HoverPickup, P::Transport},    {P::HoverPickup, P::Landing},
        {P::HoverPickup, P::Failed},
        {P::Transport, P::HoverDeliver},   {P::Transport, P::Landing},
        {P::Transport, P::Failed},
        {P::HoverDeliver, P::ClimbBack},   {P::HoverDeliver, P::ReturnToStart},
        {P::HoverDeliver, P::Landing},     {P::HoverDeliver, P::Failed},
        {P::ClimbBack, P::FreeFlight},     {P::ClimbBack, P::ReturnToStart},
        {P::ClimbBack, P::Landing},        {P::ClimbBack, P::Failed},
        {P::ToStation, P::Docked},         {P::ToStation, P::ReturnToStart},
        {P::ToStation, P::Landing},        {P::ToStation, P::Failed},
        {P::Docked, P::TakingOff},         {P::Docked, P::Failed},
        {P::ReturnToStart, P::Landing},    {P::ReturnToStart, P::Failed},
        {P::Landing, P::Landed},           {P::Landing, P::Failed},
        {P::Landed, P::TakingOff},         {P::Landed, P::Failed},
    };
    return edges.contains({from, to});
}

}  // namespace swarm
