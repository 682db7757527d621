#pragma once

#include <cstdint>
#include <string_view>

namespace swarm {

// Counter-based generator: every draw is a pure function of
// (seed, domain label, tick, entity id, draw index). No hidden state is shared
// between streams, so the order in which agents are processed cannot change
// any draw.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::string_view domain, std::uint64_t tick,
               std::uint64_t entity);

    std::uint64_t next_u64();
    // Uniform in [0, 1) with 53 random bits.
    double uniform();
    // Uniform in [lo, hi).
    double uniform(double lo, double hi);

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t hash_label(std::string_view label);
std::uint64_t mix64(std::uint64_t x);

}  // namespace swarm
