#pragma once

#include <stdexcept>
#include <string>

namespace swarm {

// Malformed input text (scenario file, trace line, wire frame).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Well-formed input that breaks a documented constraint.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reference to an agent/package/human id that does not exist.
class LookupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Internal state contradicts itself (e.g. a phase pointing at a missing package).
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Raised by the engine in strict mode; carries the tick for diagnostics.
class InvariantViolation : public std::runtime_error {
public:
    InvariantViolation(long long tick, const std::string& what)
        : std::runtime_error("tick " + std::to_string(tick) + ": " + what), tick_(tick) {}

    long long tick() const { return tick_; }

private:
    long long tick_;
};

}  // namespace swarm
