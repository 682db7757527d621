#include "swarmsim/verify.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "swarmsim/errors.hpp"
#include "swarmsim/mission.hpp"

namespace swarm {

namespace {

bool airborne(const AgentRecord& a) {
    if (a.phase == Phase::OnGround || a.phase == Phase::Landed || a.phase == Phase::Docked) return false;
    if (a.phase == Phase::Failed) return a.position.z > 0.0;
    return true;
}

std::string show(const std::optional<double>& v) {
    if (!v) return "null";
    std::ostringstream s;
    s.precision(17);
    s << *v;
    return s.str();
}

}  // namespace

TraceReplayMetrics::TraceReplayMetrics(const TraceHeader& header) : header_(header) {}

void TraceReplayMetrics::add(const TickRecord& r) {
    ++m_.ticks;
    const std::size_t n = r.agents.size();
    if (touching_.size() != n) touching_.assign(n, std::vector<bool>(n, false));

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i + 1; k < n; ++k) {
            if (!airborne(r.agents[i]) || !airborne(r.agents[k])) {
                touching_[i][k] = false;
                continue;
            }
            const Vec3 d = r.agents[i].position - r.agents[k].position;
            const double dist = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
            if (!m_.min_interagent_distance || dist < *m_.min_interagent_distance)
                m_.min_interagent_distance = dist;
            const bool close = dist < 2.0 * header_.r_collision;
            if (close && !touching_[i][k]) ++m_.collision_count;
            touching_[i][k] = close;
        }
    }

    for (const auto& h : r.humans) {
        double radius = 0.0;
        for (const auto& [id, rad] : header_.human_radii) {
            if (id == h.id) radius = rad;
        }
        for (const auto& a : r.agents) {
            if (!airborne(a)) continue;
            const double dx = a.position.x - h.position.x;
            const double dy = a.position.y - h.position.y;
            const double c = std::sqrt(dx * dx + dy * dy) - radius;
            if (!m_.min_human_clearance || c < *m_.min_human_clearance) m_.min_human_clearance = c;
        }
    }

    if (r.mode == FlightMode::swarm) {
        double sx = 0.0, sy = 0.0;
        int count = 0;
        for (const auto& a : r.agents) {
            if (a.phase != Phase::FreeFlight) continue;
            ++count;
            const double s = std::sqrt(a.velocity.x * a.velocity.x + a.velocity.y * a.velocity.y);
            if (s < 1e-9) continue;
            sx += a.velocity.x / s;
            sy += a.velocity.y / s;
        }
        if (count > 0) {
            phi_sum_ += std::sqrt(sx * sx + sy * sy) / count;
            ++phi_ticks_;
        }
    }

    for (const auto& e : r.events) {
        if (e.kind == EventKind::spawn) {
            ++m_.packages_spawned;
            const std::size_t id = to_index(e.package.value());
            if (spawn_time_.size() <= id) spawn_time_.resize(id + 1, 0.0);
            spawn_time_[id] = r.time;
            if (!first_spawn_) first_spawn_ = r.time;
        } else if (e.kind == EventKind::deliver_done) {
            ++m_.packages_delivered;
            const PackageId id = e.package.value();
            m_.latencies.push_back({id, r.time - spawn_time_.at(to_index(id))});
            last_delivery_ = r.time;
        } else if (e.kind == EventKind::landing && e.detail == "comm_loss") {
            ++m_.comm_loss_landings;
        } else if (e.kind == EventKind::dock) {
            ++m_.docks;
        } else if (e.kind == EventKind::launch) {
            ++m_.launches;
        }
    }
}

MetricsSummary TraceReplayMetrics::finish() const {
    MetricsSummary out = m_;
    if (phi_ticks_ > 0) out.mean_order_parameter = phi_sum_ / static_cast<double>(phi_ticks_);
    if (first_spawn_ && last_delivery_) out.makespan = *last_delivery_ - *first_spawn_;
    return out;
}

std::vector<std::string> compare_summaries(const MetricsSummary& e, const MetricsSummary& a) {
    std::vector<std::string> out;
    const auto opt = [&](const char* name, const std::optional<double>& x, const std::optional<double>& y) {
        if (x != y) out.push_back(std::string(name) + ": " + show(x) + " != " + show(y));
    };
    const auto num = [&](const char* name, long long x, long long y) {
        if (x != y) out.push_back(std::string(name) + ": " + std::to_string(x) + " != " + std::to_string(y));
    };
    opt("min_interagent_distance", e.min_interagent_distance, a.min_interagent_distance);
    opt("min_human_clearance", e.min_human_clearance, a.min_human_clearance);
    num("collision_count", e.collision_count, a.collision_count);
    num("packages_spawned", e.packages_spawned, a.packages_spawned);
    num("packages_delivered", e.packages_delivered, a.packages_delivered);
    if (e.latencies != a.latencies) out.push_back("latencies differ");
    opt("mean_order_parameter", e.mean_order_parameter, a.mean_order_parameter);
    num("comm_loss_landings", e.comm_loss_landings, a.comm_loss_landings);
    opt("makespan", e.makespan, a.makespan);
    num("docks", e.docks, a.docks);
    num("launches", e.launches, a.launches);
    num("ticks", e.ticks, a.ticks);
    return out;
}

VerifyReport verify_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open trace " + path.string());

    const auto parse_line = [&](const std::string& line, long long number) {
        try {
            return json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    };

    std::string line;
    long long line_no = 1;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty trace");
    const TraceHeader header = header_from_json(parse_line(line, line_no));

    VerifyReport report;
    TraceReplayMetrics replay(header);
    std::vector<AgentRecord> previous;
    std::size_t package_count = 0;
    long long last_tick = 0;

    const auto violation = [&](long long tick, std::optional<AgentId> agent, const std::string& what) {
        std::ostringstream msg;
        msg << "tick " << tick;
        if (agent) msg << ", agent " << to_index(*agent);
        msg << ": " << what;
        report.violations.push_back(msg.str());
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json j = parse_line(line, line_no);
        const std::string type = j.value("type", "");
        if (type == "summary") {
            report.recorded = summary_from_json(j);
            continue;
        }
        if (type != "tick") throw ParseError(path.string() + ":" + std::to_string(line_no) + ": unknown line type");
        if (report.recorded) violation(last_tick, std::nullopt, "tick record after the summary line");

        const TickRecord r = record_from_json(j);
        if (r.tick != last_tick + 1) violation(r.tick, std::nullopt, "tick is not consecutive");
        if (r.time != static_cast<double>(r.tick) * header.dt) violation(r.tick, std::nullopt, "time != tick * dt");
        if (!previous.empty() && r.agents.size() != previous.size())
            violation(r.tick, std::nullopt, "agent roster changed");
        if (r.packages.size() < package_count) violation(r.tick, std::nullopt, "package disappeared");

        std::vector<int> holders(r.packages.size(), 0);
        for (std::size_t i = 0; i < r.agents.size(); ++i) {
            const AgentRecord& a = r.agents[i];
            if (to_index(a.id) != i) violation(r.tick, a.id, "agent ids out of order");
            if (!a.position.finite() || !a.velocity.finite()) violation(r.tick, a.id, "non-finite state");
            if (a.velocity.norm() > header.v_max + 1e-9) violation(r.tick, a.id, "speed above v_max");
            if (!header.arena.contains(a.position)) violation(r.tick, a.id, "position outside arena");
            if (a.battery < 0.0 || a.battery > 1.0) violation(r.tick, a.id, "battery outside [0, 1]");
            if (a.phase == Phase::Transport && !a.carried_package)
                violation(r.tick, a.id, "Transport without a carried package");
            if (i < previous.size() && previous[i].phase != a.phase &&
                !is_documented_transition(previous[i].phase, a.phase)) {
                violation(r.tick, a.id, "undocumented transition " + std::string(to_string(previous[i].phase)) +
                                            " -> " + std::string(to_string(a.phase)));
            }
            const auto held = a.phase_package ? a.phase_package : a.carried_package;
            if (held && to_index(*held) < holders.size()) ++holders[to_index(*held)];
        }
        for (std::size_t k = 0; k < holders.size(); ++k) {
            if (holders[k] > 1) violation(r.tick, std::nullopt, "package " + std::to_string(k) + " held twice");
        }

        replay.add(r);
        previous = r.agents;
        package_count = r.packages.size();
        last_tick = r.tick;
        ++report.ticks;
    }

    report.recomputed = replay.finish();
    if (report.recorded) report.mismatches = compare_summaries(*report.recorded, report.recomputed);
    else report.mismatches.push_back("trace has no summary line");
    return report;
}

}  // namespace swarm
