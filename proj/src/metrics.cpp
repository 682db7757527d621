#include "swarmsim/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "swarmsim/errors.hpp"

namespace swarm {

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional_number(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}

void keep_min(std::optional<double>& slot, double v) {
    if (!slot || v < *slot) slot = v;
}

}  // namespace

json summary_to_json(const MetricsSummary& m) {
    json latencies = json::array();
    for (const auto& l : m.latencies)
        latencies.push_back({{"package", to_index(l.id)}, {"latency", l.latency}});
    return {{"min_interagent_distance", optional_number(m.min_interagent_distance)},
            {"min_human_clearance", optional_number(m.min_human_clearance)},
            {"collision_count", m.collision_count},
            {"packages_spawned", m.packages_spawned},
            {"packages_delivered", m.packages_delivered},
            {"latencies", std::move(latencies)},
            {"mean_order_parameter", optional_number(m.mean_order_parameter)},
            {"comm_loss_landings", m.comm_loss_landings},
            {"makespan", optional_number(m.makespan)},
            {"docks", m.docks},
            {"launches", m.launches},
            {"ticks", m.ticks}};
}

MetricsSummary summary_from_json(const json& j) {
    try {
        MetricsSummary m;
        m.min_interagent_distance = read_optional_number(j, "min_interagent_distance");
        m.min_human_clearance = read_optional_number(j, "min_human_clearance");
        m.collision_count = j.at("collision_count").get<long long>();
        m.packages_spawned = j.at("packages_spawned").get<long long>();
        m.packages_delivered = j.at("packages_delivered").get<long long>();
        for (const auto& l : j.at("latencies"))
            m.latencies.push_back({PackageId{l.at("package").get<std::uint32_t>()},
                                   l.at("latency").get<double>()});
        m.mean_order_parameter = read_optional_number(j, "mean_order_parameter");
        m.comm_loss_landings = j.at("comm_loss_landings").get<long long>();
        m.makespan = read_optional_number(j, "makespan");
        m.docks = j.at("docks").get<long long>();
        m.launches = j.at("launches").get<long long>();
        m.ticks = j.at("ticks").get<long long>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("summary: ") + e.what());
    }
}

std::optional<double> order_parameter(const WorldState& world) {
    double sx = 0.0, sy = 0.0;
    int n = 0;
    for (const auto& a : world.agents) {
        if (a.phase.kind != Phase::FreeFlight) continue;
        ++n;
        const double speed = a.velocity.horizontal_norm();
        if (speed < 1e-9) continue;
        sx += a.velocity.x / speed;
        sy += a.velocity.y / speed;
    }
    if (n == 0) return std::nullopt;
    return std::sqrt(sx * sx + sy * sy) / n;
}

MetricsAccumulator::MetricsAccumulator(double r_collision) : r_collision_(r_collision) {}

void MetricsAccumulator::observe(const WorldState& world) {
    ++m_.ticks;
    const auto& agents = world.agents;

    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (!is_airborne(agents[i])) continue;
        for (std::size_t k = i + 1; k < agents.size(); ++k) {
            if (!is_airborne(agents[k])) continue;
            const double d = distance(agents[i].position, agents[k].position);
            keep_min(m_.min_interagent_distance, d);
            const auto key = std::make_pair(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k));
            if (d < 2.0 * r_collision_) {
                if (colliding_.insert(key).second) ++m_.collision_count;
            } else {
                colliding_.erase(key);
            }
        }
    }
    // Pairs that stopped being airborne are no longer in contact.
    std::erase_if(colliding_, [&](const auto& key) {
        return !is_airborne(agents[key.first]) || !is_airborne(agents[key.second]);
    });

    for (const auto& o : world.obstacles) {
        if (o.kind != ObstacleKind::human) continue;
        for (const auto& a : agents) {
            if (!is_airborne(a)) continue;
            keep_min(m_.min_human_clearance, obstacle_clearance(a.position, o).distance);
        }
    }

    if (world.mode == FlightMode::swarm) {
        if (const auto phi = order_parameter(world)) {
            order_sum_ += *phi;
            ++order_ticks_;
        }
    }

    for (const auto& e : world.event_log) {
        switch (e.kind) {
            case EventKind::spawn:
                ++m_.packages_spawned;
                if (!first_spawn_) first_spawn_ = world.time;
                break;
            case EventKind::deliver_done: {
                ++m_.packages_delivered;
                const Package& p = world.package(*e.package);
                m_.latencies.push_back({p.id, world.time - p.spawn_time});
                last_delivery_ = world.time;
                break;
            }
            case EventKind::landing:
                if (e.detail == to_string(FailureReason::comm_loss)) ++m_.comm_loss_landings;
                break;
            case EventKind::dock: ++m_.docks; break;
            case EventKind::launch: ++m_.launches; break;
            default: break;
        }
    }
}

MetricsSummary MetricsAccumulator::summary() const {
    MetricsSummary out = m_;
    if (order_ticks_ > 0) out.mean_order_parameter = order_sum_ / static_cast<double>(order_ticks_);
    if (first_spawn_ && last_delivery_) out.makespan = *last_delivery_ - *first_spawn_;
    return out;
}

}  // namespace swarm
