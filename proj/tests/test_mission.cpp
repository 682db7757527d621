#include <algorithm>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "swarmsim/mission.hpp"
#include "swarmsim/power.hpp"

using namespace swarm;
using doctest::Approx;

namespace {

const MissionParams params;

Package waiting_package(std::uint32_t id, Vec3 spawn, Vec3 destination = {18, 18, 0}) {
    Package p;
    p.id = PackageId{id};
    p.spawn_position = spawn;
    p.destination = destination;
    return p;
}

// One agent in `phase`, holding package 0 when the phase needs one.
WorldState world_in_phase(Phase phase) {
    WorldState w = testing::world_with({{5, 5, 1.5}, {8, 8, 1.5}});
    w.packages.push_back(waiting_package(0, {6, 6, 0}));
    AgentState& a = w.agents[0];
    a.phase.kind = phase;
    a.hold_point = a.position;
    switch (phase) {
        case Phase::ToPackage:
        case Phase::HoverPickup:
            a.phase.package = PackageId{0};
            a.phase.remaining = phase == Phase::HoverPickup ? params.hover_duration : 0.0;
            w.packages[0].status = PackageStatus::assigned;
            w.packages[0].assigned_agent = a.id;
            break;
        case Phase::Transport:
        case Phase::HoverDeliver:
            a.phase.package = PackageId{0};
            a.phase.remaining = phase == Phase::HoverDeliver ? params.hover_duration : 0.0;
            a.carried_package = PackageId{0};
            w.packages[0].status = PackageStatus::in_transit;
            w.packages[0].assigned_agent = a.id;
            break;
        case Phase::OnGround:
        case Phase::Landed:
        case Phase::Docked:
            a.position.z = 0.0;
            break;
        default:
            break;
    }
    return w;
}

std::vector<EventKind> kinds(const WorldState& w) {
    std::vector<EventKind> out;
    for (const auto& e : w.event_log) out.push_back(e.kind);
    return out;
}

}  // namespace

TEST_SUITE("mission") {

TEST_CASE("assign_nearest picks the closest eligible agent") {
    WorldState w = testing::world_with({{2.1, 0, 0}, {1.4, 0, 0}, {3.0, 0, 0}});
    const Package p = waiting_package(0, {0, 0, 0});
    CHECK(assign_nearest(p, w) == AgentId{1});
    CHECK(assign_nearest(p, w) == AgentId{*oracle::nearest(w, p.spawn_position, 0.15, 3.0)});
}

TEST_CASE("assign_nearest ties go to the lower id") {
    WorldState w = testing::world_with({{5, 5, 1}, {1, 0, 1}, {-1, 0, 1}});
    CHECK(assign_nearest(waiting_package(0, {0, 0, 1}), w) == AgentId{1});
}

TEST_CASE("assign_nearest with every agent busy returns none") {
    WorldState w = testing::world_with({{1, 0, 1}, {2, 0, 1}});
    for (auto& a : w.agents) a.phase.kind = Phase::Transport;
    CHECK_FALSE(assign_nearest(waiting_package(0, {0, 0, 0}), w).has_value());
}

TEST_CASE("assign_nearest skips low-battery, comm-lost and landing agents") {
    WorldState w = testing::world_with({{1, 0, 1}, {2, 0, 1}, {3, 0, 1}, {4, 0, 1}});
    w.time = 10.0;
    for (auto& a : w.agents) a.last_rx_time = 10.0;
    w.agents[0].battery = 0.1;
    w.agents[1].last_rx_time = 6.0;
    w.agents[2].onboard_landing = true;
    CHECK(assign_nearest(waiting_package(0, {0, 0, 0}), w) == AgentId{3});
}

TEST_CASE("packages are offered in spawn order") {
    WorldState w = testing::world_with({{1, 1, 1.5}});
    w.packages.push_back(waiting_package(0, {9, 9, 0}));
    w.packages.push_back(waiting_package(1, {1, 2, 0}));
    assign_waiting_packages(w, {});
    CHECK(w.packages[0].assigned_agent == AgentId{0});
    CHECK(w.packages[1].status == PackageStatus::waiting);
}

TEST_CASE("hover timer counts down one tick") {
    WorldState w = world_in_phase(Phase::HoverPickup);
    w.agents[0].position = {6, 6, 0.3};
    step_agent(w, AgentId{0}, params, 0.02);
    CHECK(w.agents[0].phase.kind == Phase::HoverPickup);
    CHECK(w.agents[0].phase.remaining == Approx(1.98));
}

TEST_CASE("expired pickup hover starts transport") {
    WorldState w = world_in_phase(Phase::HoverPickup);
    w.agents[0].position = {6, 6, 0.3};
    w.agents[0].phase.remaining = 0.0;
    step_agent(w, AgentId{0}, params, 0.02);
    CHECK(w.agents[0].phase.kind == Phase::Transport);
    CHECK(w.agents[0].carried_package == PackageId{0});
    CHECK(w.packages[0].status == PackageStatus::in_transit);
    CHECK(kinds(w) == std::vector{EventKind::pickup_done});
}

TEST_CASE("a displaced hover restarts its timer") {
    WorldState w = world_in_phase(Phase::HoverPickup);
    w.agents[0].phase.remaining = 0.5;
    w.agents[0].position = {6.3, 6, 0.3};
    step_agent(w, AgentId{0}, params, 0.02);
    CHECK(w.agents[0].phase.remaining == params.hover_duration);
    CHECK(kinds(w) == std::vector{EventKind::hover_reset});
}

TEST_CASE("arrival needs both horizontal and vertical tolerance") {
    WorldState w = world_in_phase(Phase::ToPackage);
    w.agents[0].position = {6.05, 6, 0.5};
    step_agent(w, AgentId{0}, params, 0.02);
    CHECK(w.agents[0].phase.kind == Phase::ToPackage);
    w.agents[0].position.z = 0.33;
    step_agent(w, AgentId{0}, params, 0.02);
    CHECK(w.agents[0].phase.kind == Phase::HoverPickup);
}

TEST_CASE("delivery completes, agent climbs back and resumes in the current mode") {
    WorldState w = world_in_phase(Phase::HoverDeliver);
    w.time = 40.0;
    w.agents[0].position = {18, 18, 0.3};
    w.agents[0].phase.remaining = 0.0;
    step_agent(w, AgentId{0}, params, 0.02);
    CHECK(w.agents[0].phase.kind == Phase::ClimbBack);
    CHECK(w.packages[0].status == PackageStatus::delivered);
    CHECK(w.packages[0].delivery_time == 40.0);
    CHECK_FALSE(w.agents[0].carried_package.has_value());

    apply_command({SetModeCmd{FlightMode::swarm}, 40.0}, w, params);
    w.agents[0].position.z = 1.5;
    step_agent(w, AgentId{0}, params, 0.02);
    CHECK(w.agents[0].phase.kind == Phase::FreeFlight);
    CHECK(w.agents[0].mode == FlightMode::swarm);
}

TEST_CASE("landing ends on the floor") {
    WorldState w = world_in_phase(Phase::Landing);
    w.agents[0].position.z = 0.015;
    step_agent(w, AgentId{0}, params, 0.02);
    CHECK(w.agents[0].phase.kind == Phase::Landed);
}

TEST_CASE("spawn_package appends a waiting package at floor level") {
    WorldState w = testing::world_with({{1, 1, 1.5}});
    apply_command({SpawnPackageCmd{3, 4}, 1.0}, w, params);
    REQUIRE(w.packages.size() == 1);
    CHECK(w.packages[0].spawn_position == Vec3{3, 4, 0});
    CHECK(w.packages[0].status == PackageStatus::waiting);
    CHECK(w.packages[0].destination == Vec3{18, 18, 0});
}

TEST_CASE("spawn outside the arena and unknown ids are rejected") {
    WorldState w = testing::world_with({{1, 1, 1.5}});
    try {
        apply_command({SpawnPackageCmd{99, 0}, 1.0}, w, params);
        FAIL("expected rejection");
    } catch (const CommandRejected& e) {
        CHECK(e.reason() == "bounds");
    }
    try {
        apply_command({MoveHumanCmd{ObstacleId{4}, 1, 1}, 1.0}, w, params);
        FAIL("expected rejection");
    } catch (const CommandRejected& e) {
        CHECK(e.reason() == "unknown_id");
    }
    CHECK(w.packages.empty());
}

TEST_CASE("land sends every free agent home in the same tick") {
    WorldState w = testing::world_with({{1, 1, 1.5}, {3, 3, 1.5}, {5, 5, 1.5}});
    apply_command({LandCmd{}, 1.0}, w, params);
    for (const auto& a : w.agents) CHECK(a.phase.kind == Phase::ReturnToStart);
}

TEST_CASE("land during transport finishes the delivery first") {
    WorldState w = world_in_phase(Phase::Transport);
    apply_command({LandCmd{}, 1.0}, w, params);
    CHECK(w.agents[0].phase.kind == Phase::Transport);
    CHECK(w.agents[0].land_pending);
    w.agents[0].position = {18, 18, 0.3};
    step_agent(w, AgentId{0}, params, 0.02);
    CHECK(w.agents[0].phase.kind == Phase::HoverDeliver);
    w.agents[0].phase.remaining = 0.0;
    step_agent(w, AgentId{0}, params, 0.02);
    CHECK(w.packages[0].status == PackageStatus::delivered);
    CHECK(w.agents[0].phase.kind == Phase::ReturnToStart);
}

TEST_CASE("start takes off grounded agents only") {
    WorldState w = world_in_phase(Phase::OnGround);
    w.agents[1].phase.kind = Phase::Landed;
    w.agents[1].failure = FailureReason::comm_loss;
    apply_command({StartCmd{}, 0.0}, w, params);
    CHECK(w.agents[0].phase.kind == Phase::TakingOff);
    CHECK(w.agents[1].phase.kind == Phase::Landed);
}

TEST_CASE("failure in ToPackage returns the package and another agent takes it") {
    WorldState w = world_in_phase(Phase::ToPackage);
    begin_safety_landing(w, AgentId{0}, FailureReason::comm_loss);
    CHECK(w.agents[0].phase.kind == Phase::Landing);
    CHECK(w.packages[0].status == PackageStatus::waiting);
    CHECK_FALSE(w.packages[0].assigned_agent.has_value());
    assign_waiting_packages(w, {});
    CHECK(w.packages[0].assigned_agent == AgentId{1});
}

TEST_CASE("failure in transport puts the package back at its spawn point") {
    WorldState w = world_in_phase(Phase::Transport);
    fail_agent(w, AgentId{0}, FailureReason::injected);
    CHECK(w.agents[0].phase.kind == Phase::Failed);
    CHECK(w.packages[0].status == PackageStatus::waiting);
    CHECK(w.packages[0].spawn_position == Vec3{6, 6, 0});
    CHECK_FALSE(w.agents[0].carried_package.has_value());
}

TEST_CASE("failure without a package changes only the agent") {
    WorldState w = world_in_phase(Phase::FreeFlight);
    const auto before = w.packages[0].status;
    begin_safety_landing(w, AgentId{0}, FailureReason::low_battery);
    CHECK(w.agents[0].phase.kind == Phase::Landing);
    CHECK(w.packages[0].status == before);
}

TEST_CASE("phase transition graph: every (phase, stimulus) pair stays on documented edges") {
    using Stimulus = void (*)(WorldState&);
    const std::pair<const char*, Stimulus> stimuli[] = {
        {"step idle", [](WorldState& w) { step_agent(w, AgentId{0}, params, 0.02); }},
        {"step at package", [](WorldState& w) {
             w.agents[0].position = {6, 6, 0.3};
             w.agents[0].phase.remaining = 0.0;
             step_agent(w, AgentId{0}, params, 0.02);
         }},
        {"step at destination", [](WorldState& w) {
             w.agents[0].position = {18, 18, 0.3};
             w.agents[0].phase.remaining = 0.0;
             step_agent(w, AgentId{0}, params, 0.02);
         }},
        {"step at cruise", [](WorldState& w) {
             w.agents[0].position.z = params.h_cruise;
             step_agent(w, AgentId{0}, params, 0.02);
         }},
        {"step on the floor", [](WorldState& w) {
             w.agents[0].position.z = 0.0;
             step_agent(w, AgentId{0}, params, 0.02);
         }},
        {"step at start", [](WorldState& w) {
             w.agents[0].position = {w.agents[0].start_position.x, w.agents[0].start_position.y, 1.5};
             step_agent(w, AgentId{0}, params, 0.02);
         }},
        {"start", [](WorldState& w) { apply_command({StartCmd{}, 0.0}, w, params); }},
        {"land", [](WorldState& w) { apply_command({LandCmd{}, 0.0}, w, params); }},
        {"set_mode", [](WorldState& w) { apply_command({SetModeCmd{FlightMode::swarm}, 0.0}, w, params); }},
        {"assign", [](WorldState& w) { assign_waiting_packages(w, {}); }},
        {"comm loss", [](WorldState& w) { begin_safety_landing(w, AgentId{0}, FailureReason::comm_loss); }},
        {"fail", [](WorldState& w) { fail_agent(w, AgentId{0}, FailureReason::injected); }},
        {"low battery", [](WorldState& w) {
             w.agents[0].battery = 0.14;
             PowerParams p;
             p.rotation = true;
             power_step(w, p, 0.02);
         }},
        {"critical battery", [](WorldState& w) {
             w.agents[0].battery = 0.04;
             power_step(w, {}, 0.02);
         }},
        {"depleted", [](WorldState& w) {
             w.agents[0].battery = 0.0;
             power_step(w, {}, 0.02);
         }},
    };

    int checked = 0;
    for (Phase phase : all_phases) {
        for (const auto& [name, stimulus] : stimuli) {
            WorldState w = world_in_phase(phase);
            ChargeStation station;
            station.position = {5, 5, 0};
            station.slots.push_back(ChargeSlot{{5, 5, 0}, false, std::nullopt, 0.0});
            w.station = station;
            if (phase == Phase::ToStation) {
                w.station->slots[0].occupied = true;
                w.station->slots[0].agent = AgentId{0};
                w.agents[0].station_slot = 0;
            }
            if (phase == Phase::Docked) {
                w.agents[0].position = {5, 5, 0};
                w.agents[0].station_slot = 0;
                w.station->slots[0].occupied = true;
                w.station->slots[0].agent = AgentId{0};
            }
            stimulus(w);
            const Phase after = w.agents[0].phase.kind;
            INFO("phase " << to_string(phase) << ", stimulus " << std::string(name) << " -> " << to_string(after));
            CHECK((after == phase || is_documented_transition(phase, after)));
            ++checked;
        }
    }
    CHECK(checked == 14 * 15);
}

TEST_CASE("undocumented transitions are rejected") {
    CHECK_FALSE(is_documented_transition(Phase::OnGround, Phase::FreeFlight));
    CHECK_FALSE(is_documented_transition(Phase::Landed, Phase::FreeFlight));
    CHECK_FALSE(is_documented_transition(Phase::Transport, Phase::FreeFlight));
    CHECK_FALSE(is_documented_transition(Phase::Failed, Phase::Landing));
    CHECK_FALSE(is_documented_transition(Phase::Failed, Phase::TakingOff));
    CHECK_FALSE(is_documented_transition(Phase::Docked, Phase::FreeFlight));
    CHECK(is_documented_transition(Phase::Transport, Phase::HoverDeliver));
}

}  // TEST_SUITE
