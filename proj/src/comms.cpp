#include "swarmsim/comms.hpp"

#include <algorithm>
#include <cmath>

#include "swarmsim/errors.hpp"
#include "swarmsim/rng.hpp"

namespace swarm {

namespace {
constexpr double kTimeEps = 1e-9;
}

bool Blackout::active(double now) const {
    return now + kTimeEps >= start && now + kTimeEps < start + duration;
}

void ChannelConfig::validate(std::size_t agent_count) const {
    if (latency_ticks < 0) throw ValidationError("channel.latency_ticks: must be >= 0");
    if (!(drop_probability >= 0.0 && drop_probability <= 1.0))
        throw ValidationError("channel.drop_probability: must be in [0, 1]");
    for (std::size_t i = 0; i < blackouts.size(); ++i) {
        const auto& b = blackouts[i];
        const std::string where = "channel.blackouts[" + std::to_string(i) + "]";
        if (to_index(b.agent) >= agent_count)
            throw ValidationError(where + ".agent: unknown agent id");
        if (!(b.duration > 0.0) || !(b.start >= 0.0))
            throw ValidationError(where + ": start must be >= 0 and duration > 0");
    }
}

Channel::Channel(ChannelConfig config, std::uint64_t seed, double dt)
    : config_(std::move(config)), seed_(seed), dt_(dt) {}

ChannelMessage Channel::send_setpoint(const Setpoint& sp, long long tick, double now) {
    ChannelMessage msg;
    msg.setpoint = sp;
    msg.send_time = now;
    msg.deliver_tick = tick + config_.latency_ticks;
    msg.deliver_time = static_cast<double>(msg.deliver_tick) * dt_;
    msg.sequence = next_sequence_++;

    CounterRng rng(seed_, "channel", static_cast<std::uint64_t>(tick), to_index(sp.agent));
    const bool random_drop = rng.uniform() < config_.drop_probability;
    const bool blacked_out =
        std::any_of(config_.blackouts.begin(), config_.blackouts.end(),
                    [&](const Blackout& b) { return b.agent == sp.agent && b.active(now); });
    msg.dropped = random_drop || blacked_out;

    if (msg.dropped)
        ++dropped_;
    else
        queue_.push(msg);
    return msg;
}

std::vector<ChannelMessage> Channel::deliver_due(long long tick) {
    std::vector<ChannelMessage> out;
    while (!queue_.empty() && queue_.top().deliver_tick <= tick) {
        out.push_back(queue_.top());
        queue_.pop();
    }
    return out;
}

WatchdogStatus watchdog(const AgentState& agent, double now, double timeout) {
    return now - agent.last_rx_time > timeout + kTimeEps ? WatchdogStatus::comm_lost
                                                         : WatchdogStatus::ok;
}

Vec3 agent_track(const Vec3& velocity, const Vec3& setpoint, double dt, double tau) {
    const double gain = std::min(1.0, dt / tau);
    return velocity + (setpoint - velocity) * gain;
}

}  // namespace swarm
