#pragma once

#include "swarmsim/mission.hpp"
#include "swarmsim/world.hpp"

namespace swarm {

struct PowerParams {
    double rate_flying = 1.0 / 420.0;    // fraction per second
    double rate_hovering = 1.0 / 480.0;  // fraction per second
    double low_threshold = 0.15;
    double critical_threshold = 0.05;
    double launch_threshold = 0.95;
    bool rotation = false;

    void validate() const;
};

enum class PowerRegime { flying, hovering, grounded };

PowerRegime regime_of(const AgentState& agent);

double discharge(double battery, double dt, PowerRegime regime, const PowerParams& params = {});

// Linear charge, clamped to 1.
double charge(double battery, double dt, double charge_rate);

// Discharge, low/critical battery handling, docking, launching and charging
// for one tick. Appends dock/launch/low_battery events to world.event_log.
void power_step(WorldState& world, const PowerParams& params, double dt);

// Docking and launching only (the station half of power_step).
void rotation_step(WorldState& world, const PowerParams& params, double dt);

}  // namespace swarm
