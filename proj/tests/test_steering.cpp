#include <cstring>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "swarmsim/rng.hpp"
#include "swarmsim/steering.hpp"

using namespace swarm;
using doctest::Approx;

namespace {

bool bitwise_equal(const Vec3& a, const Vec3& b) { return std::memcmp(&a, &b, sizeof(Vec3)) == 0; }

Vec3 rotate_z(const Vec3& v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

void check_close(const Vec3& a, const Vec3& b, double tol = 1e-9) {
    CHECK(std::abs(a.x - b.x) <= tol);
    CHECK(std::abs(a.y - b.y) <= tol);
    CHECK(std::abs(a.z - b.z) <= tol);
}

}  // namespace

TEST_SUITE("steering") {

TEST_CASE("cohesion") {
    const AgentState self = testing::flying_agent(0, {0, 0, 1});
    SUBCASE("centroid on self") {
        const Vec3 n[] = {{1, 0, 1}, {-1, 0, 1}};
        CHECK(cohesion(self, n) == Vec3{});
    }
    SUBCASE("single neighbour") {
        const Vec3 n[] = {{2, 0, 1}};
        CHECK(cohesion(self, n) == Vec3{1, 0, 0});
    }
    SUBCASE("two neighbours, diagonal centroid") {
        const Vec3 n[] = {{1, 0, 1}, {1, 2, 1}};
        const Vec3 c = cohesion(self, n);
        CHECK(c.x == Approx(0.70710678));
        CHECK(c.y == Approx(0.70710678));
        CHECK(c.z == 0.0);
    }
    SUBCASE("no neighbours") { CHECK(cohesion(self, {}) == Vec3{}); }
}

TEST_CASE("alignment") {
    const AgentState self = testing::flying_agent(0, {0, 0, 1});
    SUBCASE("unanimous") {
        const Vec3 v[] = {{1, 0, 0}, {1, 0, 0}, {1, 0, 0}};
        CHECK(alignment(self, v) == Vec3{1, 0, 0});
    }
    SUBCASE("cancellation") {
        const Vec3 v[] = {{1, 0, 0}, {-1, 0, 0}};
        CHECK(alignment(self, v) == Vec3{});
    }
    SUBCASE("mean of orthogonal headings") {
        const Vec3 v[] = {{1, 0, 0}, {0, 1, 0}};
        const Vec3 a = alignment(self, v);
        CHECK(a.x == Approx(0.70710678));
        CHECK(a.y == Approx(0.70710678));
    }
}

TEST_CASE("separation") {
    const AgentState self = testing::flying_agent(0, {0, 0, 1});
    SUBCASE("one close neighbour saturates") {
        const Repulsor r[] = {{{0.3, 0, 1}, 0.3}};
        const Vec3 s = separation(self, r);
        CHECK(s.x == Approx(-1.0));
        CHECK(s.y == 0.0);
        CHECK(s.z == 0.0);
    }
    SUBCASE("no repulsors") { CHECK(separation(self, {}) == Vec3{}); }
    SUBCASE("symmetric pair cancels") {
        const Repulsor r[] = {{{0.4, 0, 1}, 0.4}, {{-0.4, 0, 1}, 0.4}};
        CHECK(separation(self, r) == Vec3{});
    }
    SUBCASE("below the floor the distance is clamped") {
        const Repulsor r[] = {{{0.0, 2, 1}, 0.0}};
        CHECK(separation(self, r) == Vec3{0, -1, 0});
    }
}

TEST_CASE("wander") {
    SUBCASE("zero draw keeps the heading") {
        const auto s = wander_with_draw(0.0, 0.0);
        CHECK(s.direction == Vec3{1, 0, 0});
        CHECK(s.angle == 0.0);
    }
    SUBCASE("axis case") {
        const auto s = wander_with_draw(std::numbers::pi / 2, 0.0);
        CHECK(s.direction.x == Approx(0.0));
        CHECK(s.direction.y == Approx(1.0));
        CHECK(s.angle == std::numbers::pi / 2);
    }
    SUBCASE("seeded draws replay identically and stay within the jitter") {
        AgentState a = testing::flying_agent(3, {1, 1, 1});
        std::vector<double> first, second;
        for (int pass = 0; pass < 2; ++pass) {
            a.wander_angle = 0.0;
            auto& out = pass == 0 ? first : second;
            for (std::uint64_t tick = 1; tick <= 200; ++tick) {
                CounterRng rng(42, "wander", tick, 3);
                const double before = a.wander_angle;
                const auto s = wander(a, rng, 0.3);
                CHECK(std::abs(s.angle - before) <= 0.3);
                CHECK(s.direction.z == 0.0);
                a.wander_angle = s.angle;
                out.push_back(s.angle);
            }
        }
        CHECK(first == second);
    }
}

TEST_CASE("pursuit") {
    const AgentState self = testing::flying_agent(0, {0, 0, 1});
    CHECK(pursuit(self, {3, 0, 1}) == Vec3{1, 0, 0});
    CHECK(pursuit(self, {0, 0, 1}) == Vec3{});
    const Vec3 p = pursuit(self, {0.05, 0, 1});
    CHECK(p.x == Approx(0.5));
    CHECK(p.y == 0.0);
}

TEST_CASE("active rule sets by mode and phase") {
    CHECK(active_rules(FlightMode::wander, Phase::FreeFlight) == RuleSet::free_wander);
    CHECK(active_rules(FlightMode::swarm, Phase::FreeFlight) == RuleSet::free_swarm);
    for (Phase p : {Phase::ToPackage, Phase::Transport, Phase::ReturnToStart, Phase::ToStation}) {
        CHECK(active_rules(FlightMode::swarm, p) == RuleSet::transit);
        CHECK(active_rules(FlightMode::wander, p) == RuleSet::transit);
    }
    for (Phase p : {Phase::OnGround, Phase::Docked, Phase::Landed, Phase::Failed})
        CHECK(active_rules(FlightMode::swarm, p) == RuleSet::none);
}

TEST_CASE("compose") {
    const SteeringWeights w;
    AgentState self = testing::flying_agent(0, {5, 5, 1.5});
    const AltitudeCommand hold{1.5, false, 0.0};

    SUBCASE("all rules zero hovers") {
        CHECK(compose(self, {}, w, FlightMode::swarm, Phase::FreeFlight, hold) == Vec3{});
    }
    SUBCASE("separation outweighs wander; horizontal clamp to v_max") {
        RuleOutputs r;
        r.separation = {-1, 0, 0};
        r.wander = {1, 0, 0};
        const Vec3 v = compose(self, r, w, FlightMode::wander, Phase::FreeFlight, hold);
        CHECK(v.x == Approx(-1.0));
        CHECK(v.y == 0.0);
        CHECK(v.z == 0.0);
    }
    SUBCASE("altitude channel shares the v_max budget") {
        RuleOutputs r;
        r.wander = {1, 0, 0};
        self.position.z = 0.5;
        const Vec3 v = compose(self, r, w, FlightMode::wander, Phase::FreeFlight, hold);
        CHECK(v.norm() == Approx(1.0));
        CHECK(v.z > 0.0);
    }
    SUBCASE("descent uses the constant rate") {
        const Vec3 v = compose(self, {}, w, FlightMode::wander, Phase::Landing, {0.0, true, 0.3});
        CHECK(v == Vec3{0, 0, -0.3});
    }
    SUBCASE("grounded phases produce nothing") {
        RuleOutputs r;
        r.wander = {1, 0, 0};
        CHECK(compose(self, r, w, FlightMode::wander, Phase::Docked, hold) == Vec3{});
    }
}

TEST_CASE("mode gating: wander output is bitwise independent of cohesion and alignment") {
    const SteeringWeights w;
    testing::Gen gen(7);
    for (int i = 0; i < 500; ++i) {
        AgentState self = testing::flying_agent(0, gen.point(1, 19, 0.5, 3));
        RuleOutputs base;
        base.separation = gen.point(-1, 1, -0.2, 0.2);
        base.wander = gen.point(-1, 1, 0, 0);
        base.fence = gen.point(-1, 1, 0, 0);
        base.cohesion = gen.point(-1, 1, -1, 1);
        base.alignment = gen.point(-1, 1, -1, 1);
        RuleOutputs perturbed = base;
        perturbed.cohesion = gen.point(-1, 1, -1, 1);
        perturbed.alignment = gen.point(-1, 1, -1, 1);
        const AltitudeCommand alt{gen.uniform(0, 3), false, 0.0};
        const Vec3 a = compose(self, base, w, FlightMode::wander, Phase::FreeFlight, alt);
        const Vec3 b = compose(self, perturbed, w, FlightMode::wander, Phase::FreeFlight, alt);
        CHECK(bitwise_equal(a, b));
        // Sanity: in swarm mode the same perturbation is visible.
        if (i == 0) {
            const Vec3 c = compose(self, base, w, FlightMode::swarm, Phase::FreeFlight, alt);
            const Vec3 d = compose(self, perturbed, w, FlightMode::swarm, Phase::FreeFlight, alt);
            CHECK_FALSE(bitwise_equal(c, d));
        }
    }
}

TEST_CASE("compose never exceeds v_max") {
    const SteeringWeights w;
    testing::Gen gen(17);
    const Phase phases[] = {Phase::FreeFlight, Phase::ToPackage, Phase::Transport, Phase::Landing};
    for (int i = 0; i < 2000; ++i) {
        AgentState self = testing::flying_agent(0, gen.point(0, 20, 0, 5));
        RuleOutputs r{gen.point(-1, 1, -1, 1), gen.point(-1, 1, -1, 1), gen.point(-1, 1, -1, 1),
                      gen.point(-1, 1, 0, 0),  gen.point(-1, 1, -1, 1), gen.point(-1, 1, -1, 1)};
        const AltitudeCommand alt{gen.uniform(0, 5), gen.coin(0.2), 0.3};
        const Phase p = phases[gen.integer(0, 3)];
        const auto mode = gen.coin() ? FlightMode::swarm : FlightMode::wander;
        CHECK(compose(self, r, w, mode, p, alt).norm() <= w.v_max + 1e-12);
    }
}

TEST_CASE("rule kernels are equivariant under rotation about z") {
    testing::Gen gen(31);
    for (int i = 0; i < 300; ++i) {
        const double angle = gen.uniform(-std::numbers::pi, std::numbers::pi);
        AgentState self = testing::flying_agent(0, gen.point(-3, 3, 0.5, 2));
        AgentState rself = self;
        rself.position = rotate_z(self.position, angle);

        std::vector<Vec3> pos, vel, rpos, rvel;
        std::vector<Repulsor> reps, rreps;
        for (int k = 0; k < gen.integer(1, 6); ++k) {
            const Vec3 p = gen.point(-3, 3, 0.5, 2), v = gen.point(-1, 1, -0.2, 0.2);
            pos.push_back(p);
            vel.push_back(v);
            rpos.push_back(rotate_z(p, angle));
            rvel.push_back(rotate_z(v, angle));
            const double d = distance(self.position, p);
            reps.push_back({p, d});
            rreps.push_back({rotate_z(p, angle), d});
        }
        check_close(rotate_z(cohesion(self, pos), angle), cohesion(rself, rpos));
        check_close(rotate_z(alignment(self, vel), angle), alignment(rself, rvel));
        check_close(rotate_z(separation(self, reps), angle), separation(rself, rreps));
        const Vec3 target = gen.point(-3, 3, 0.5, 2);
        check_close(rotate_z(pursuit(self, target), angle), pursuit(rself, rotate_z(target, angle)));
    }
}

TEST_CASE("separation dominance against any cohesion pull") {
    const SteeringWeights w;
    testing::Gen gen(23);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 self_pos = gen.point(5, 15, 1, 2);
        const double heading = gen.uniform(-std::numbers::pi, std::numbers::pi);
        const double d = gen.uniform(0.01, w.r_separation / 2);
        const Vec3 other = self_pos + Vec3{d * std::cos(heading), d * std::sin(heading), 0.0};
        AgentState self = testing::flying_agent(0, self_pos);

        RuleOutputs r;
        const Repulsor rep[] = {{other, d}};
        r.separation = separation(self, rep);
        const Vec3 toward = normalized_or_zero(other - self_pos);
        r.cohesion = toward;  // full unit pull toward the neighbour
        r.alignment = toward;
        const Vec3 v = compose(self, r, w, FlightMode::swarm, Phase::FreeFlight, {self_pos.z, false, 0.0});
        CHECK(v.dot(toward) < 0.0);
    }
}

TEST_CASE("separation matches the reference implementation") {
    testing::Gen gen(8);
    for (int i = 0; i < 500; ++i) {
        AgentState self = testing::flying_agent(0, gen.point(0, 4, 0, 2));
        std::vector<Repulsor> reps;
        std::vector<oracle::Push> pushes;
        for (int k = 0; k < gen.integer(0, 7); ++k) {
            const Vec3 p = gen.point(0, 4, 0, 2);
            const double d = gen.coin(0.1) ? 0.0 : distance(self.position, p);
            reps.push_back({p, d});
            pushes.push_back({p, d});
        }
        CHECK(bitwise_equal(separation(self, reps), oracle::separation(self.position, pushes)));
    }
}

TEST_CASE("weights validation") {
    SteeringWeights w;
    CHECK_NOTHROW(w.validate());
    w.w_cohesion = 3.0;
    CHECK_THROWS(w.validate());
    w = {};
    w.r_separation = 2.5;
    CHECK_THROWS(w.validate());
}

}  // TEST_SUITE
