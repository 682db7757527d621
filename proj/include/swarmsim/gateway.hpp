#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "swarmsim/engine.hpp"
#include "swarmsim/json_io.hpp"

namespace swarm {

struct GatewayOptions {
    std::string address = "0.0.0.0";
    std::uint16_t port = 8080;  // 0 picks a free port
    double snapshot_hz = 50.0 / 3.0;
    double rate = 1.0;  // wall-clock pacing multiplier
    bool start_paused = false;
    std::optional<std::filesystem::path> command_log;
    // Console assets served at /. A built-in page is used when absent.
    std::optional<std::filesystem::path> static_dir;
    // Clients with more unsent frames than this are disconnected.
    std::size_t max_queued_frames = 64;
};

// Frames shared by the live service and anything that wants to compare
// against it (tests, replays).
json make_snapshot(const Simulation& sim, bool paused);
json make_hello(const ScenarioConfig& config);

// Live service: engine stepping on its own thread, WebSocket clients on /ws,
// static files on /.
class Gateway {
public:
    Gateway(ScenarioConfig config, GatewayOptions options);
    ~Gateway();
    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    // Binds and starts the I/O and engine threads; returns the bound port.
    std::uint16_t start();
    // Blocks until stop() is called or SIGINT/SIGTERM arrives.
    void wait();
    void stop();

    // Latest snapshot frame (serialized), as last broadcast or keepalive.
    std::string latest_snapshot() const;

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

}  // namespace swarm
