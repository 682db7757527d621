#include "swarmsim/steering.hpp"

#include <algorithm>
#include <cmath>

#include "swarmsim/errors.hpp"

namespace swarm {

void SteeringWeights::validate() const {
    for (double w : {w_separation, w_cohesion, w_alignment, w_wander, w_fence, w_pursuit}) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw ValidationError("weights: every rule weight must be finite and >= 0");
    }
    if (w_separation < std::max(w_cohesion, w_alignment))
        throw ValidationError("weights.w_separation: must be >= max(w_cohesion, w_alignment)");
    if (!(r_separation > 0.0 && r_separation < r_perception))
        throw ValidationError("weights.r_separation: must satisfy 0 < r_separation < r_perception");
    if (!(v_max > 0.0)) throw ValidationError("weights.v_max: must be > 0");
    if (!(obstacle_buffer >= 0.0)) throw ValidationError("weights.obstacle_buffer: must be >= 0");
    if (!(wander_jitter >= 0.0)) throw ValidationError("weights.wander_jitter: must be >= 0");
    if (!(separation_floor > 0.0)) throw ValidationError("weights.separation_floor: must be > 0");
    if (!(k_z > 0.0)) throw ValidationError("weights.k_z: must be > 0");
}

Vec3 cohesion(const AgentState& self, std::span<const Vec3> neighbor_positions) {
    if (neighbor_positions.empty()) return {};
    Vec3 centroid{};
    for (const auto& p : neighbor_positions) centroid += p;
    centroid *= 1.0 / static_cast<double>(neighbor_positions.size());
    const Vec3 offset = centroid - self.position;
    if (offset.norm() <= 1e-9) return {};
    return normalized_or_zero(offset);
}

Vec3 alignment(const AgentState&, std::span<const Vec3> neighbor_velocities) {
    if (neighbor_velocities.empty()) return {};
    Vec3 mean{};
    for (const auto& v : neighbor_velocities) mean += v;
    mean *= 1.0 / static_cast<double>(neighbor_velocities.size());
    if (mean.norm() < 1e-9) return {};
    return normalized_or_zero(mean);
}

Vec3 separation(const AgentState& self, std::span<const Repulsor> repulsors,
                double distance_floor) {
    Vec3 sum{};
    for (const auto& r : repulsors) {
        const Vec3 dir = normalized_or_zero(self.position - r.position);
        const double d = std::max(r.distance, distance_floor);
        sum += dir * (1.0 / (d * d));
    }
    return clamp_norm(sum, 1.0);
}

WanderStep wander_with_draw(double wander_angle, double draw) {
    const double angle = wander_angle + draw;
    return {Vec3{std::cos(angle), std::sin(angle), 0.0}, angle};
}

WanderStep wander(const AgentState& self, CounterRng& rng, double jitter) {
    return wander_with_draw(self.wander_angle, rng.uniform(-jitter, jitter));
}

Vec3 pursuit(const AgentState& self, const Vec3& target, double arrival_radius) {
    const Vec3 offset = target - self.position;
    const double d = offset.norm();
    if (d == 0.0) return {};
    if (d <= arrival_radius) return offset * (1.0 / arrival_radius);
    return offset * (1.0 / d);
}

RuleSet active_rules(FlightMode mode, Phase phase) {
    switch (phase) {
        case Phase::FreeFlight:
            return mode == FlightMode::swarm ? RuleSet::free_swarm : RuleSet::free_wander;
        case Phase::TakingOff:
        case Phase::ToPackage:
        case Phase::HoverPickup:
        case Phase::Transport:
        case Phase::HoverDeliver:
        case Phase::ClimbBack:
        case Phase::ToStation:
        case Phase::ReturnToStart:
        case Phase::Landing:
            return RuleSet::transit;
        case Phase::OnGround:
        case Phase::Docked:
        case Phase::Landed:
        case Phase::Failed:
            return RuleSet::none;
    }
    return RuleSet::none;
}

Vec3 compose(const AgentState& self, const RuleOutputs& rules, const SteeringWeights& w,
             FlightMode mode, Phase phase, const AltitudeCommand& altitude) {
    const RuleSet set = active_rules(mode, phase);
    if (set == RuleSet::none) return {};

    Vec3 sum = rules.separation.horizontal() * w.w_separation;
    sum += rules.fence.horizontal() * w.w_fence;
    switch (set) {
        case RuleSet::free_swarm:
            sum += rules.cohesion.horizontal() * w.w_cohesion;
            sum += rules.alignment.horizontal() * w.w_alignment;
            [[fallthrough]];
        case RuleSet::free_wander:
            sum += rules.wander.horizontal() * w.w_wander;
            break;
        case RuleSet::transit:
            sum += rules.pursuit.horizontal() * w.w_pursuit;
            break;
        case RuleSet::none:
            break;
    }
    const Vec3 horizontal = clamp_norm(sum, w.v_max);

    // Separation keeps its vertical share so vertically stacked agents still
    // push apart; every other rule is planar.
    double vz = altitude.descend ? -altitude.descent_rate
                                 : w.k_z * (altitude.target_height - self.position.z);
    vz += w.w_separation * rules.separation.z;

    return clamp_norm(Vec3{horizontal.x, horizontal.y, vz}, w.v_max);
}

}  // namespace swarm
