#pragma once

#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "swarmsim/comms.hpp"
#include "swarmsim/metrics.hpp"
#include "swarmsim/scenario.hpp"
#include "swarmsim/trace.hpp"
#include "swarmsim/world.hpp"

namespace swarm {

WorldState make_initial_world(const ScenarioConfig& config);

// Checks the world after a tick against the physical and mission invariants.
// `previous` holds each agent's phase at the start of the tick. Returns one
// message per violation, each naming the tick and agent.
std::vector<std::string> check_invariants(const WorldState& world, const std::vector<Phase>& previous,
                                          const ScenarioConfig& config);

class Simulation {
public:
    explicit Simulation(ScenarioConfig config);

    // Queues a command for the next tick boundary, after any scheduled
    // commands due at that tick. Throws CommandRejected if it cannot apply.
    void enqueue(const CommandPayload& payload);
    // Validation only, against the current world.
    void validate(const CommandPayload& payload) const;

    // Advances one tick. In strict mode throws InvariantViolation.
    void step();
    bool done() const;

    const WorldState& world() const { return world_; }
    const ScenarioConfig& config() const { return config_; }
    const Channel& channel() const { return channel_; }
    MetricsSummary metrics() const { return metrics_.summary(); }
    // Commands applied during the last tick, stamped with that tick's time.
    const std::vector<OperatorCommand>& applied_commands() const { return applied_; }
    // Violations logged in permissive mode.
    const std::vector<std::string>& violations() const { return violations_; }

private:
    void apply(const OperatorCommand& cmd);
    void apply_due_commands(double now);
    void apply_due_faults(double now);
    void move_humans(double now);
    void coordinate(double now);
    void onboard(double now);

    ScenarioConfig config_;
    WorldState world_;
    Channel channel_;
    MetricsAccumulator metrics_;
    std::size_t next_command_ = 0;
    std::size_t next_fault_ = 0;
    std::deque<CommandPayload> live_;
    std::vector<OperatorCommand> applied_;
    std::vector<std::string> violations_;
};

struct RunOptions {
    std::optional<std::filesystem::path> trace_path;
    std::optional<std::filesystem::path> summary_path;
};

struct RunResult {
    MetricsSummary summary;
    long long ticks = 0;
    bool halted = false;          // strict-mode violation stopped the run
    std::string halt_reason;
    std::vector<std::string> violations;  // permissive mode
};

// Runs config.duration / dt ticks (or until a strict-mode violation), writing
// the trace and summary when paths are given.
RunResult run(const ScenarioConfig& config, const RunOptions& options = {});

}  // namespace swarm
