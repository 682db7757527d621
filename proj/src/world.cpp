#include "swarmsim/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>

#include "swarmsim/errors.hpp"

namespace swarm {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::pair<Enum, std::string_view>, N>& table,
                           std::string_view s) {
    for (const auto& [value, name] : table) {
        if (name == s) return value;
    }
    return std::nullopt;
}

template <typename Enum, std::size_t N>
std::string_view name_of(const std::array<std::pair<Enum, std::string_view>, N>& table,
                         Enum e) {
    for (const auto& [value, name] : table) {
        if (value == e) return name;
    }
    return "?";
}

constexpr std::array<std::pair<FlightMode, std::string_view>, 2> kModes{{
    {FlightMode::wander, "wander"},
    {FlightMode::swarm, "swarm"},
}};

constexpr std::array<std::pair<Phase, std::string_view>, 14> kPhases{{
    {Phase::OnGround, "OnGround"},
    {Phase::TakingOff, "TakingOff"},
    {Phase::FreeFlight, "FreeFlight"},
    {Phase::ToPackage, "ToPackage"},
    {Phase::HoverPickup, "HoverPickup"},
    {Phase::Transport, "Transport"},
    {Phase::HoverDeliver, "HoverDeliver"},
    {Phase::ClimbBack, "ClimbBack"},
    {Phase::ToStation, "ToStation"},
    {Phase::Docked, "Docked"},
    {Phase::ReturnToStart, "ReturnToStart"},
    {Phase::Landing, "Landing"},
    {Phase::Landed, "Landed"},
    {Phase::Failed, "Failed"},
}};

constexpr std::array<std::pair<PackageStatus, std::string_view>, 4> kStatuses{{
    {PackageStatus::waiting, "waiting"},
    {PackageStatus::assigned, "assigned"},
    {PackageStatus::in_transit, "in_transit"},
    {PackageStatus::delivered, "delivered"},
}};

constexpr std::array<std::pair<FailureReason, std::string_view>, 6> kFailures{{
    {FailureReason::none, "none"},
    {FailureReason::comm_loss, "comm_loss"},
    {FailureReason::low_battery, "low_battery"},
    {FailureReason::critical_battery, "critical_battery"},
    {FailureReason::depleted, "depleted"},
    {FailureReason::injected, "injected"},
}};

constexpr std::array<std::pair<EventKind, std::string_view>, 20> kEvents{{
    {EventKind::command, "command"},
    {EventKind::spawn, "spawn"},
    {EventKind::assign, "assign"},
    {EventKind::pickup_start, "pickup_start"},
    {EventKind::hover_reset, "hover_reset"},
    {EventKind::pickup_done, "pickup_done"},
    {EventKind::deliver_done, "deliver_done"},
    {EventKind::takeoff_done, "takeoff_done"},
    {EventKind::resume, "resume"},
    {EventKind::return_to_start, "return_to_start"},
    {EventKind::comm_lost, "comm_lost"},
    {EventKind::landing, "landing"},
    {EventKind::landed, "landed"},
    {EventKind::failed, "failed"},
    {EventKind::reassign, "reassign"},
    {EventKind::low_battery, "low_battery"},
    {EventKind::to_station, "to_station"},
    {EventKind::dock, "dock"},
    {EventKind::launch, "launch"},
    {EventKind::mode_change, "mode_change"},
}};

}  // namespace

std::string_view to_string(FlightMode m) { return name_of(kModes, m); }
std::string_view to_string(Phase p) { return name_of(kPhases, p); }
std::string_view to_string(PackageStatus s) { return name_of(kStatuses, s); }
std::string_view to_string(FailureReason r) { return name_of(kFailures, r); }
std::string_view to_string(EventKind k) { return name_of(kEvents, k); }

std::string_view to_string(ObstacleKind k) {
    return k == ObstacleKind::human ? "human" : "static";
}

std::optional<FlightMode> flight_mode_from_string(std::string_view s) { return lookup(kModes, s); }
std::optional<Phase> phase_from_string(std::string_view s) { return lookup(kPhases, s); }
std::optional<PackageStatus> package_status_from_string(std::string_view s) {
    return lookup(kStatuses, s);
}
std::optional<EventKind> event_kind_from_string(std::string_view s) { return lookup(kEvents, s); }

// ---------------------------------------------------------------------------
// Arena

bool Arena::contains(const Vec3& p) const {
    return p.x >= min_corner.x && p.x <= max_corner.x && p.y >= min_corner.y &&
           p.y <= max_corner.y && p.z >= min_corner.z && p.z <= max_corner.z;
}

bool Arena::contains_footprint(double x, double y) const {
    return std::isfinite(x) && std::isfinite(y) && x >= min_corner.x && x <= max_corner.x &&
           y >= min_corner.y && y <= max_corner.y;
}

void Arena::validate() const {
    if (!min_corner.finite() || !max_corner.finite())
        throw ValidationError("arena: corners must be finite");
    if (!(max_corner.x > min_corner.x && max_corner.y > min_corner.y &&
          max_corner.z > min_corner.z))
        throw ValidationError("arena: max corner must exceed min corner on every axis");
    const double half_extent =
        0.5 * std::min(max_corner.x - min_corner.x, max_corner.y - min_corner.y);
    if (!(fence_margin > 0.0 && fence_margin < half_extent))
        throw ValidationError("arena.fence_margin: must be > 0 and < half the smallest horizontal extent");
}

// ---------------------------------------------------------------------------
// HumanPath

double HumanPath::length() const {
    if (waypoints.size() < 2) return 0.0;
    double total = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i)
        total += horizontal_distance(waypoints[i - 1], waypoints[i]);
    if (loop) total += horizontal_distance(waypoints.back(), waypoints.front());
    return total;
}

Vec3 HumanPath::position_at(double distance) const {
    if (waypoints.empty()) return {};
    const Vec3 first{waypoints.front().x, waypoints.front().y, 0.0};
    const double total = length();
    if (total <= 0.0) return first;

    double s = distance;
    if (loop) {
        s = std::fmod(distance, total);
        if (s < 0.0) s += total;
    } else if (s >= total) {
        return {waypoints.back().x, waypoints.back().y, 0.0};
    }

    const std::size_t n = waypoints.size();
    const std::size_t segments = loop ? n : n - 1;
    for (std::size_t i = 0; i < segments; ++i) {
        const Vec3& a = waypoints[i];
        const Vec3& b = waypoints[(i + 1) % n];
        const double len = horizontal_distance(a, b);
        if (s <= len && len > 0.0) {
            const double f = s / len;
            return {a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f, 0.0};
        }
        s -= len;
    }
    return {waypoints.back().x, waypoints.back().y, 0.0};
}

// ---------------------------------------------------------------------------
// WorldState

AgentState& WorldState::agent(AgentId id) {
    const auto i = to_index(id);
    if (i >= agents.size()) throw LookupError("unknown agent id " + std::to_string(i));
    return agents[i];
}

const AgentState& WorldState::agent(AgentId id) const {
    const auto i = to_index(id);
    if (i >= agents.size()) throw LookupError("unknown agent id " + std::to_string(i));
    return agents[i];
}

Package& WorldState::package(PackageId id) {
    const auto i = to_index(id);
    if (i >= packages.size()) throw LookupError("unknown package id " + std::to_string(i));
    return packages[i];
}

const Package& WorldState::package(PackageId id) const {
    const auto i = to_index(id);
    if (i >= packages.size()) throw LookupError("unknown package id " + std::to_string(i));
    return packages[i];
}

Obstacle& WorldState::obstacle(ObstacleId id) {
    for (auto& o : obstacles) {
        if (o.id == id) return o;
    }
    throw LookupError("unknown obstacle id " + std::to_string(to_index(id)));
}

void WorldState::emit(EventKind kind, std::optional<AgentId> agent_id,
                      std::optional<PackageId> package_id, std::string detail) {
    event_log.push_back(Event{kind, agent_id, package_id, std::move(detail)});
}

bool is_airborne(const AgentState& a) {
    switch (a.phase.kind) {
        case Phase::OnGround:
        case Phase::Landed:
        case Phase::Docked:
            return false;
        case Phase::Failed:
            return a.position.z > 0.0;
        default:
            return true;
    }
}

bool is_mission_phase(Phase p) {
    switch (p) {
        case Phase::ToPackage:
        case Phase::HoverPickup:
        case Phase::Transport:
        case Phase::HoverDeliver:
            return true;
        default:
            return false;
    }
}

// ---------------------------------------------------------------------------
// Spatial queries

std::vector<AgentId> neighbors_within(AgentId agent_id, double radius, const WorldState& world) {
    const AgentState& self = world.agent(agent_id);
    std::vector<AgentId> out;
    for (const auto& other : world.agents) {
        if (other.id == agent_id || !is_airborne(other)) continue;
        if (distance(self.position, other.position) <= radius) out.push_back(other.id);
    }
    return out;  // agents are stored in id order
}

Vec3 fence_vector(const Vec3& p, const Arena& arena) {
    const double m = arena.fence_margin;
    // Faces in fixed order: x-, x+, y-, y+, z-, z+.
    const std::array<std::pair<double, Vec3>, 6> faces{{
        {p.x - arena.min_corner.x, Vec3{1.0, 0.0, 0.0}},
        {arena.max_corner.x - p.x, Vec3{-1.0, 0.0, 0.0}},
        {p.y - arena.min_corner.y, Vec3{0.0, 1.0, 0.0}},
        {arena.max_corner.y - p.y, Vec3{0.0, -1.0, 0.0}},
        {p.z - arena.min_corner.z, Vec3{0.0, 0.0, 1.0}},
        {arena.max_corner.z - p.z, Vec3{0.0, 0.0, -1.0}},
    }};
    Vec3 out{};
    for (const auto& [dist, normal] : faces) {
        if (dist >= m) continue;
        const double strength = std::min(1.0, (m - dist) / m);
        out += normal * strength;
    }
    return out;
}

Clearance obstacle_clearance(const Vec3& position, const Obstacle& obstacle) {
    const double dx = position.x - obstacle.center.x;
    const double dy = position.y - obstacle.center.y;
    const double r = std::sqrt(dx * dx + dy * dy);
    if (r == 0.0) return {-obstacle.radius, Vec3{1.0, 0.0, 0.0}};
    return {r - obstacle.radius, Vec3{dx / r, dy / r, 0.0}};
}

// ---------------------------------------------------------------------------
// NeighborGrid

NeighborGrid::NeighborGrid(const WorldState& world, double cell_size)
    : world_(&world), cell_size_(cell_size) {
    entries_.reserve(world.agents.size());
    for (const auto& a : world.agents) {
        if (!is_airborne(a)) continue;
        entries_.push_back({cell_of(a.position.x), cell_of(a.position.y),
                            cell_of(a.position.z), to_index(a.id)});
    }
    std::sort(entries_.begin(), entries_.end(), [](const Entry& l, const Entry& r) {
        return std::tie(l.cell_x, l.cell_y, l.cell_z, l.agent) <
               std::tie(r.cell_x, r.cell_y, r.cell_z, r.agent);
    });
}

std::int64_t NeighborGrid::cell_of(double v) const {
    return static_cast<std::int64_t>(std::floor(v / cell_size_));
}

std::vector<AgentId> NeighborGrid::query(AgentId agent_id, double radius) const {
    const AgentState& self = world_->agent(agent_id);
    const Vec3& p = self.position;
    const std::int64_t x0 = cell_of(p.x - radius), x1 = cell_of(p.x + radius);
    const std::int64_t y0 = cell_of(p.y - radius), y1 = cell_of(p.y + radius);
    const std::int64_t z0 = cell_of(p.z - radius), z1 = cell_of(p.z + radius);

    std::vector<AgentId> out;
    for (std::int64_t cx = x0; cx <= x1; ++cx) {
        for (std::int64_t cy = y0; cy <= y1; ++cy) {
            // Cells along z for fixed (cx, cy) are contiguous in sort order.
            auto lo = std::lower_bound(entries_.begin(), entries_.end(), Entry{cx, cy, z0, 0},
                                       [](const Entry& l, const Entry& r) {
                                           return std::tie(l.cell_x, l.cell_y, l.cell_z, l.agent) <
                                                  std::tie(r.cell_x, r.cell_y, r.cell_z, r.agent);
                                       });
            for (auto it = lo; it != entries_.end() && it->cell_x == cx && it->cell_y == cy &&
                               it->cell_z <= z1;
                 ++it) {
                if (it->agent == to_index(agent_id)) continue;
                const AgentState& other = world_->agents[it->agent];
                if (distance(p, other.position) <= radius) out.push_back(other.id);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace swarm
