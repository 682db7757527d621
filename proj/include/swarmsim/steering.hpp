#pragma once

#include <span>

#include "swarmsim/rng.hpp"
#include "swarmsim/world.hpp"

namespace swarm {

/// Rule weights and perception radii. Separation must dominate cohesion and
/// alignment so that no flocking pull can overcome a near-field repulsion.
struct SteeringWeights {
    double w_separation = 2.0;
    double w_cohesion = 0.5;
    double w_alignment = 0.5;
    double w_wander = 0.4;
    double w_fence = 1.5;
    double w_pursuit = 1.5;
    double r_perception = 2.0;   // m
    double r_separation = 0.6;   // m
    double v_max = 1.0;          // m/s
    // Obstacles are inflated by this keep-out buffer before the separation
    // range test, so walking humans are seen early enough to out-run the
    // velocity-tracking lag.
    double obstacle_buffer = 0.6;  // m
    double wander_jitter = 0.3;    // rad per tick
    double separation_floor = 0.05;  // m
    double k_z = 1.0;              // 1/s, altitude channel gain

    void validate() const;
};

struct Repulsor {
    Vec3 position;
    double distance;
};

Vec3 cohesion(const AgentState& self, std::span<const Vec3> neighbor_positions);
Vec3 alignment(const AgentState& self, std::span<const Vec3> neighbor_velocities);
Vec3 separation(const AgentState& self, std::span<const Repulsor> repulsors,
                double distance_floor = 0.05);

struct WanderStep {
    Vec3 direction;
    double angle;
};

// Heading random walk with an explicit perturbation.
WanderStep wander_with_draw(double wander_angle, double draw);
// Draws the perturbation uniformly from [-jitter, +jitter] out of `rng`.
WanderStep wander(const AgentState& self, CounterRng& rng, double jitter);

Vec3 pursuit(const AgentState& self, const Vec3& target, double arrival_radius = 0.10);

struct RuleOutputs {
    Vec3 separation;
    Vec3 cohesion;
    Vec3 alignment;
    Vec3 wander;
    Vec3 fence;
    Vec3 pursuit;
};

// What the vertical channel should do this tick.
struct AltitudeCommand {
    double target_height = 0.0;
    bool descend = false;  // constant-rate descent instead of holding target_height
    double descent_rate = 0.3;
};

enum class RuleSet { none, free_wander, free_swarm, transit };

RuleSet active_rules(FlightMode mode, Phase phase);

// Weighted sum of the active rules, horizontal part clamped to v_max, then the
// altitude channel blended in and the whole set-point clamped to v_max.
Vec3 compose(const AgentState& self, const RuleOutputs& rules, const SteeringWeights& weights,
             FlightMode mode, Phase phase, const AltitudeCommand& altitude);

}  // namespace swarm
