#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "swarmsim/world.hpp"

namespace swarm {

struct Blackout {
    AgentId agent;
    double start;     // s
    double duration;  // s

    bool active(double now) const;
};

struct ChannelConfig {
    int latency_ticks = 0;
    double drop_probability = 0.0;
    std::vector<Blackout> blackouts;

    void validate(std::size_t agent_count) const;
};

struct OnboardParams {
    double tau = 0.25;              // s, velocity tracking time constant
    double watchdog_timeout = 3.0;  // s
};

struct Setpoint {
    AgentId agent;
    Vec3 velocity;
    double target_height = 0.0;
};

struct ChannelMessage {
    Setpoint setpoint;
    double send_time = 0.0;
    double deliver_time = 0.0;
    long long deliver_tick = 0;
    std::uint64_t sequence = 0;
    bool dropped = false;
};

// Downlink from the coordinator to the agents. Messages are delivered in
// (deliver_tick, send order); drop decisions draw from the counter RNG keyed
// by (seed, "channel", tick, agent), independent of send order.
class Channel {
public:
    Channel(ChannelConfig config, std::uint64_t seed, double dt);

    ChannelMessage send_setpoint(const Setpoint& sp, long long tick, double now);
    // Pops every non-dropped message due at or before `tick`.
    std::vector<ChannelMessage> deliver_due(long long tick);

    void add_blackout(const Blackout& b) { config_.blackouts.push_back(b); }
    const ChannelConfig& config() const { return config_; }
    std::uint64_t dropped_count() const { return dropped_; }

private:
    struct Later {
        bool operator()(const ChannelMessage& a, const ChannelMessage& b) const {
            if (a.deliver_tick != b.deliver_tick) return a.deliver_tick > b.deliver_tick;
            return a.sequence > b.sequence;
        }
    };

    ChannelConfig config_;
    std::uint64_t seed_;
    double dt_;
    std::uint64_t next_sequence_ = 0;
    std::uint64_t dropped_ = 0;
    std::priority_queue<ChannelMessage, std::vector<ChannelMessage>, Later> queue_;
};

enum class WatchdogStatus { ok, comm_lost };

// Strictly greater than the timeout (with a 1e-9 s allowance for tick-time
// rounding), so a packet exactly `timeout` ago still counts as alive.
WatchdogStatus watchdog(const AgentState& agent, double now, double timeout = 3.0);

// First-order velocity tracking toward the held set-point.
Vec3 agent_track(const Vec3& velocity, const Vec3& setpoint, double dt, double tau = 0.25);

}  // namespace swarm
