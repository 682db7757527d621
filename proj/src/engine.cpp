#include "swarmsim/engine.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <system_error>
#include <variant>

#include "swarmsim/errors.hpp"
#include "swarmsim/mission.hpp"
#include "swarmsim/power.hpp"
#include "swarmsim/rng.hpp"
#include "swarmsim/steering.hpp"

namespace swarm {

WorldState make_initial_world(const ScenarioConfig& c) {
    WorldState w;
    w.dt = c.dt;
    w.arena = c.arena;
    w.seed = c.seed;
    w.mode = c.initial_mode;
    w.destination = c.destination;
    w.obstacles = c.obstacles;

    const auto starts = c.resolved_start_positions();
    for (std::size_t i = 0; i < starts.size(); ++i) {
        AgentState a;
        a.id = AgentId{static_cast<std::uint32_t>(i)};
        a.position = starts[i];
        a.start_position = starts[i];
        a.hold_point = starts[i];
        a.mode = c.initial_mode;
        if (c.random_headings) {
            CounterRng rng(c.seed, "init", 0, i);
            a.wander_angle = rng.uniform(-std::numbers::pi, std::numbers::pi);
        }
        if (c.start_airborne) {
            a.position.z = c.mission.h_cruise;
            a.phase.kind = Phase::FreeFlight;
            a.velocity = {c.weights.v_max * std::cos(a.wander_angle),
                          c.weights.v_max * std::sin(a.wander_angle), 0.0};
            a.held_setpoint = a.velocity;
        }
        w.agents.push_back(a);
    }

    if (c.station) {
        ChargeStation station;
        station.position = c.station->position;
        station.charge_rate = c.station->charge_rate;
        station.dock_radius = c.station->dock_radius;
        for (const auto& p : c.slot_positions()) station.slots.push_back(ChargeSlot{p, false, std::nullopt, 0.0});
        for (int s = 0; s < c.station->spares; ++s) {
            AgentState a;
            a.id = AgentId{static_cast<std::uint32_t>(w.agents.size())};
            a.position = station.slots[s].position;
            a.start_position = a.position;
            a.hold_point = a.position;
            a.mode = c.initial_mode;
            a.phase.kind = Phase::Docked;
            a.station_slot = static_cast<std::size_t>(s);
            station.slots[s].occupied = true;
            station.slots[s].agent = a.id;
            station.slots[s].charge_fraction = a.battery;
            w.agents.push_back(a);
        }
        w.station = station;
    }
    return w;
}

std::vector<std::string> check_invariants(const WorldState& w, const std::vector<Phase>& previous,
                                          const ScenarioConfig& c) {
    std::vector<std::string> out;
    const auto report = [&](const AgentState* a, const std::string& what) {
        std::ostringstream msg;
        msg << "tick " << w.tick;
        if (a) msg << ", agent " << to_index(a->id);
        msg << ": " << what;
        out.push_back(msg.str());
    };

    std::vector<int> holders(w.packages.size(), 0);
    for (const auto& a : w.agents) {
        if (!a.position.finite() || !a.velocity.finite() || !std::isfinite(a.battery)) {
            report(&a, "non-finite state");
            continue;
        }
        if (a.velocity.norm() > c.weights.v_max + 1e-9) report(&a, "speed above v_max");
        if (a.battery < 0.0 || a.battery > 1.0) report(&a, "battery outside [0, 1]");
        if (!w.arena.contains(a.position)) report(&a, "position outside arena");

        const Phase before = previous.at(to_index(a.id));
        if (before != a.phase.kind && !is_documented_transition(before, a.phase.kind)) {
            report(&a, "undocumented transition " + std::string(to_string(before)) + " -> " +
                           std::string(to_string(a.phase.kind)));
        }
        const bool hovering = a.phase.kind == Phase::HoverPickup || a.phase.kind == Phase::HoverDeliver;
        if (hovering && (a.phase.remaining < 0.0 || a.phase.remaining > c.mission.hover_duration))
            report(&a, "hover timer out of range");
        if (a.phase.kind == Phase::Transport && !a.carried_package)
            report(&a, "Transport without a carried package");

        std::optional<PackageId> held = a.phase.package ? a.phase.package : a.carried_package;
        if (held) {
            if (to_index(*held) >= holders.size()) report(&a, "holds an unknown package");
            else ++holders[to_index(*held)];
        }
    }
    for (std::size_t k = 0; k < holders.size(); ++k) {
        if (holders[k] > 1) report(nullptr, "package " + std::to_string(k) + " held by several agents");
    }
    return out;
}

Simulation::Simulation(ScenarioConfig config)
    : config_(std::move(config)),
      world_((config_.validate(), make_initial_world(config_))),
      channel_(config_.channel, config_.seed, config_.dt),
      metrics_(config_.r_collision) {}

void Simulation::validate(const CommandPayload& payload) const { validate_command(payload, world_); }

void Simulation::enqueue(const CommandPayload& payload) {
    validate(payload);
    live_.push_back(payload);
}

bool Simulation::done() const {
    const auto total = static_cast<long long>(std::llround(config_.duration / config_.dt));
    return world_.tick >= total;
}

void Simulation::apply(const OperatorCommand& cmd) {
    if (const auto* loss = std::get_if<InjectCommLossCmd>(&cmd.payload)) {
        validate_command(cmd.payload, world_);
        world_.emit(EventKind::command, loss->agent, std::nullopt, std::string(command_name(cmd.payload)));
        channel_.add_blackout(Blackout{loss->agent, cmd.issue_time, loss->duration});
    } else {
        apply_command(cmd, world_, config_.mission);
    }
    applied_.push_back(cmd);
}

void Simulation::apply_due_commands(double now) {
    while (next_command_ < config_.commands.size() &&
           config_.commands[next_command_].issue_time <= now + 1e-9) {
        OperatorCommand cmd = config_.commands[next_command_++];
        cmd.issue_time = now;
        apply(cmd);
    }
    while (!live_.empty()) {
        OperatorCommand cmd{live_.front(), now};
        live_.pop_front();
        apply(cmd);
    }
}

void Simulation::apply_due_faults(double now) {
    while (next_fault_ < config_.faults.size() && config_.faults[next_fault_].time <= now + 1e-9) {
        const Fault& f = config_.faults[next_fault_++];
        AgentState& a = world_.agent(f.agent);
        switch (f.kind) {
            case FaultKind::battery:
                a.battery = std::clamp(f.value, 0.0, 1.0);
                break;
            case FaultKind::fail:
                fail_agent(world_, f.agent, FailureReason::injected);
                break;
        }
    }
}

void Simulation::move_humans(double now) {
    const double dt = config_.dt;
    for (auto& o : world_.obstacles) {
        if (o.kind != ObstacleKind::human) continue;
        const double speed = o.path ? o.path->speed : 1.0;
        if (o.override_target) {
            const Vec3 target{o.override_target->x, o.override_target->y, 0.0};
            const Vec3 delta = target - Vec3{o.center.x, o.center.y, 0.0};
            const double d = delta.horizontal_norm();
            const double stride = speed * dt;
            if (d <= stride) {
                o.center = target;
            } else {
                o.center += delta * (stride / d);
            }
        } else if (o.path) {
            o.center = o.path->position_at(o.path->speed * now);
        }
    }
}

void Simulation::coordinate(double now) {
    assign_waiting_packages(world_, AssignmentPolicy{config_.power.low_threshold, config_.onboard.watchdog_timeout});

    const SteeringWeights& sw = config_.weights;
    const NeighborGrid grid(world_, sw.r_perception);
    std::vector<Vec3> positions, velocities;
    std::vector<Repulsor> repulsors;

    for (auto& a : world_.agents) {
        const RuleSet rules = active_rules(a.mode, a.phase.kind);
        RuleOutputs out;
        PhaseGoal goal{a.position, AltitudeCommand{a.position.z, false, 0.0}};

        if (rules != RuleSet::none) {
            positions.clear();
            velocities.clear();
            repulsors.clear();
            for (AgentId n : grid.query(a.id, sw.r_perception)) {
                const AgentState& other = world_.agent(n);
                positions.push_back(other.position);
                velocities.push_back(other.velocity);
                const double d = distance(a.position, other.position);
                if (d <= sw.r_separation) repulsors.push_back({other.position, d});
            }
            for (const auto& o : world_.obstacles) {
                const Clearance cl = obstacle_clearance(a.position, o);
                const double d = cl.distance - sw.obstacle_buffer;
                if (d <= sw.r_separation) {
                    // Placed so that the unit vector from it to the agent points away from the axis.
                    repulsors.push_back({a.position - cl.away_direction, std::max(d, 0.0)});
                }
            }
            out.separation = separation(a, repulsors, sw.separation_floor);
            out.fence = fence_vector(a.position, world_.arena);

            if (rules == RuleSet::free_wander || rules == RuleSet::free_swarm) {
                CounterRng rng(world_.seed, "wander", static_cast<std::uint64_t>(world_.tick), to_index(a.id));
                const WanderStep ws = wander(a, rng, sw.wander_jitter);
                a.wander_angle = ws.angle;
                out.wander = ws.direction;
                if (rules == RuleSet::free_swarm) {
                    out.cohesion = cohesion(a, positions);
                    out.alignment = alignment(a, velocities);
                }
            }
            goal = phase_goal(a, world_, config_.mission);
            if (rules == RuleSet::transit) out.pursuit = pursuit(a, goal.target, config_.mission.arrival_radius);
        }

        const Vec3 v = compose(a, out, sw, a.mode, a.phase.kind, goal.altitude);
        channel_.send_setpoint(Setpoint{a.id, v, goal.altitude.target_height}, world_.tick, now);
    }
}

void Simulation::onboard(double now) {
    for (const auto& msg : channel_.deliver_due(world_.tick)) {
        AgentState& a = world_.agent(msg.setpoint.agent);
        a.held_setpoint = msg.setpoint.velocity;
        a.last_rx_time = now;
    }

    const double dt = config_.dt;
    for (auto& a : world_.agents) {
        if (!is_airborne(a)) {
            a.velocity = {};
            continue;
        }
        if (!a.onboard_landing && watchdog(a, now, config_.onboard.watchdog_timeout) == WatchdogStatus::comm_lost) {
            a.onboard_landing = true;
            world_.emit(EventKind::comm_lost, a.id);
            begin_safety_landing(world_, a.id, FailureReason::comm_loss);
        }
        Vec3 setpoint = a.held_setpoint;
        if (a.onboard_landing || a.phase.kind == Phase::Failed) setpoint = {0.0, 0.0, -config_.mission.v_land};
        a.velocity = agent_track(a.velocity, setpoint, dt, config_.onboard.tau);
        a.position += a.velocity * dt;
        if (a.position.z < 0.0) a.position.z = 0.0;
    }
}

void Simulation::step() {
    std::vector<Phase> previous;
    previous.reserve(world_.agents.size());
    for (const auto& a : world_.agents) previous.push_back(a.phase.kind);

    ++world_.tick;
    const double now = static_cast<double>(world_.tick) * config_.dt;
    world_.time = now;
    world_.event_log.clear();
    applied_.clear();

    apply_due_commands(now);
    apply_due_faults(now);
    move_humans(now);
    coordinate(now);
    onboard(now);
    for (std::size_t i = 0; i < world_.agents.size(); ++i)
        step_agent(world_, AgentId{static_cast<std::uint32_t>(i)}, config_.mission, config_.dt);
    power_step(world_, config_.power, config_.dt);

    metrics_.observe(world_);
    const auto problems = check_invariants(world_, previous, config_);
    if (!problems.empty()) {
        if (config_.strict) throw InvariantViolation(world_.tick, problems.front());
        violations_.insert(violations_.end(), problems.begin(), problems.end());
    }
}

RunResult run(const ScenarioConfig& config, const RunOptions& options) {
    Simulation sim(config);
    std::optional<TraceWriter> trace;
    if (options.trace_path) trace.emplace(*options.trace_path, make_header(config));

    RunResult result;
    while (!sim.done()) {
        try {
            sim.step();
        } catch (const InvariantViolation& e) {
            result.halted = true;
            result.halt_reason = e.what();
            if (trace) trace->write(make_record(sim.world()));
            break;
        }
        if (trace) trace->write(make_record(sim.world()));
    }
    result.summary = sim.metrics();
    result.ticks = sim.world().tick;
    result.violations = sim.violations();

    const json summary = summary_to_json(result.summary);
    if (trace) {
        trace->write_summary(summary);
        trace->flush();
    }
    if (options.summary_path) {
        std::ofstream out(*options.summary_path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::system_error(errno, std::generic_category(),
                                    "cannot write summary " + options.summary_path->string());
        out << summary.dump(2) << '\n';
    }
    return result;
}

}  // namespace swarm
