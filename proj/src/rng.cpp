#include "swarmsim/rng.hpp"

namespace swarm {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a, 64 bit.
std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

CounterRng::CounterRng(std::uint64_t seed, std::string_view domain, std::uint64_t tick,
                       std::uint64_t entity) {
    std::uint64_t k = mix64(seed);
    k = mix64(k ^ hash_label(domain));
    k = mix64(k ^ tick);
    k = mix64(k ^ (entity * 0xd1b54a32d192ed03ULL));
    key_ = k;
}

std::uint64_t CounterRng::next_u64() {
    return mix64(key_ ^ mix64(counter_++));
}

double CounterRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

}  // namespace swarm
