#include "swarmsim/power.hpp"

#include <algorithm>

namespace swarm {

void PowerParams::validate() const {
    if (!(rate_flying >= 0.0 && rate_hovering >= 0.0))
        throw ValidationError("power: discharge rates must be >= 0");
    if (!(critical_threshold >= 0.0 && critical_threshold < low_threshold && low_threshold < 1.0))
        throw ValidationError("power: thresholds must satisfy 0 <= critical < low < 1");
    if (!(launch_threshold > low_threshold && launch_threshold <= 1.0))
        throw ValidationError("power.launch_threshold: must be in (low_threshold, 1]");
}

PowerRegime regime_of(const AgentState& a) {
    if (!is_airborne(a)) return PowerRegime::grounded;
    if (a.phase.kind == Phase::HoverPickup || a.phase.kind == Phase::HoverDeliver)
        return PowerRegime::hovering;
    return PowerRegime::flying;
}

double discharge(double battery, double dt, PowerRegime regime, const PowerParams& params) {
    double rate = 0.0;
    switch (regime) {
        case PowerRegime::flying: rate = params.rate_flying; break;
        case PowerRegime::hovering: rate = params.rate_hovering; break;
        case PowerRegime::grounded: rate = 0.0; break;
    }
    return std::clamp(battery - rate * dt, 0.0, 1.0);
}

double charge(double battery, double dt, double charge_rate) {
    return std::clamp(battery + charge_rate * dt, 0.0, 1.0);
}

namespace {

std::optional<std::size_t> free_slot(const ChargeStation& station) {
    for (std::size_t i = 0; i < station.slots.size(); ++i) {
        if (!station.slots[i].occupied) return i;
    }
    return std::nullopt;
}

void launch_replacement(WorldState& world, const PowerParams& params, AgentId docked_now) {
    AgentState* best = nullptr;
    for (auto& a : world.agents) {
        if (a.phase.kind != Phase::Docked || a.id == docked_now) continue;
        if (a.battery < params.launch_threshold) continue;
        if (!best || a.battery > best->battery) best = &a;
    }
    if (!best) return;

    auto& slot = world.station->slots.at(*best->station_slot);
    slot.occupied = false;
    slot.agent.reset();
    best->station_slot.reset();
    best->hold_point = best->position;
    best->mode = world.mode;
    best->failure = FailureReason::none;
    best->phase = MissionPhase{Phase::TakingOff, std::nullopt, 0.0};
    world.emit(EventKind::launch, best->id);
}

}  // namespace

void rotation_step(WorldState& world, const PowerParams& params, double dt) {
    if (!world.station) return;
    ChargeStation& station = *world.station;

    for (auto& a : world.agents) {
        if (a.phase.kind == Phase::Docked) {
            a.battery = charge(a.battery, dt, station.charge_rate);
            if (a.station_slot) station.slots.at(*a.station_slot).charge_fraction = a.battery;
        }
    }

    for (auto& a : world.agents) {
        if (a.phase.kind != Phase::ToStation || !a.station_slot) continue;
        auto& slot = station.slots.at(*a.station_slot);
        if (distance(a.position, slot.position) > station.dock_radius) continue;
        a.position = slot.position;
        a.velocity = {};
        a.held_setpoint = {};
        a.phase = MissionPhase{Phase::Docked, std::nullopt, 0.0};
        slot.charge_fraction = a.battery;
        world.emit(EventKind::dock, a.id);
        launch_replacement(world, params, a.id);
    }
}

void power_step(WorldState& world, const PowerParams& params, double dt) {
    for (auto& a : world.agents) {
        if (a.phase.kind == Phase::Docked) continue;
        a.battery = discharge(a.battery, dt, regime_of(a), params);
        if (!is_airborne(a)) continue;

        const Phase p = a.phase.kind;
        if (a.battery <= 0.0) {
            fail_agent(world, a.id, FailureReason::depleted);
        } else if (a.battery < params.critical_threshold && p != Phase::Landing &&
                   p != Phase::Failed) {
            begin_safety_landing(world, a.id, FailureReason::critical_battery);
        } else if (p == Phase::FreeFlight && a.battery < params.low_threshold) {
            world.emit(EventKind::low_battery, a.id);
            const auto slot = (params.rotation && world.station) ? free_slot(*world.station)
                                                                  : std::nullopt;
            if (slot) {
                auto& s = world.station->slots[*slot];
                s.occupied = true;
                s.agent = a.id;
                s.charge_fraction = a.battery;
                a.station_slot = *slot;
                a.phase = MissionPhase{Phase::ToStation, std::nullopt, 0.0};
                world.emit(EventKind::to_station, a.id);
            } else {
                begin_safety_landing(world, a.id, FailureReason::low_battery);
            }
        }
    }
    rotation_step(world, params, dt);
}

}  // namespace swarm
