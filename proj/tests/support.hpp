#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "swarmsim/world.hpp"

namespace testing {

// Small seeded generator for property tests (SplitMix64).
class Gen {
public:
    explicit Gen(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
    bool coin(double p = 0.5) { return uniform() < p; }
    swarm::Vec3 point(double lo, double hi, double zlo, double zhi) {
        return {uniform(lo, hi), uniform(lo, hi), uniform(zlo, zhi)};
    }

private:
    std::uint64_t state_;
};

inline swarm::AgentState flying_agent(std::uint32_t id, swarm::Vec3 position, swarm::Vec3 velocity = {}) {
    swarm::AgentState a;
    a.id = swarm::AgentId{id};
    a.position = position;
    a.start_position = {position.x, position.y, 0.0};
    a.velocity = velocity;
    a.phase.kind = swarm::Phase::FreeFlight;
    return a;
}

inline swarm::WorldState world_with(const std::vector<swarm::Vec3>& positions) {
    swarm::WorldState w;
    for (std::size_t i = 0; i < positions.size(); ++i)
        w.agents.push_back(flying_agent(static_cast<std::uint32_t>(i), positions[i]));
    return w;
}

}  // namespace testing
