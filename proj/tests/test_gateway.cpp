// Drives a live gateway over real sockets: WebSocket commands and snapshots
// on /ws, static files on /, and command-log replay.

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>

#include "doctest.h"
#include "swarmsim/gateway.hpp"

using namespace swarm;
namespace fs = std::filesystem;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using clock_type = std::chrono::steady_clock;

namespace {

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "swarmsim_gateway_tests";
    fs::create_directories(dir);
    return dir;
}

ScenarioConfig live_scenario() {
    return parse_scenario(json::parse(R"({
        "name": "gateway_test", "duration": 600, "agents": 6, "seed": 5,
        "start_layout": {"origin": [3, 3], "spacing": 1.2},
        "obstacles": [
            {"id": 0, "kind": "human", "radius": 0.35,
             "path": {"waypoints": [[12, 12], [16, 12]], "speed": 1.0, "loop": true}}
        ]
    })"));
}

class Client {
public:
    explicit Client(std::uint16_t port) : ws_(ioc_) {
        tcp::resolver resolver(ioc_);
        net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
        ws_.handshake("127.0.0.1", "/ws");
        ws_.text(true);
    }

    void send(const std::string& text) { ws_.write(net::buffer(text)); }
    void send(const json& j) { send(j.dump()); }

    json read() {
        beast::flat_buffer buffer;
        ws_.read(buffer);
        return json::parse(beast::buffers_to_string(buffer.data()));
    }

    // Reads frames until `pred` holds or `limit` passes; returns the match.
    std::optional<json> read_until(const std::function<bool(const json&)>& pred,
                                   std::chrono::milliseconds limit = std::chrono::milliseconds(3000)) {
        const auto deadline = clock_type::now() + limit;
        while (clock_type::now() < deadline) {
            json j = read();
            if (pred(j)) return j;
        }
        return std::nullopt;
    }

    json reply_to(const json& cmd_id) {
        const auto r = read_until([&](const json& j) {
            const auto t = j.value("type", "");
            return (t == "ack" || t == "reject") && j["cmd_id"] == cmd_id;
        });
        REQUIRE(r);
        return *r;
    }

    void close() { ws_.close(websocket::close_code::normal); }

private:
    net::io_context ioc_;
    websocket::stream<tcp::socket> ws_;
};

struct HttpReply {
    unsigned status;
    std::string body;
    std::string content_type;
};

HttpReply http_get(std::uint16_t port, const std::string& target) {
    net::io_context ioc;
    tcp::socket socket(ioc);
    tcp::resolver resolver(ioc);
    net::connect(socket, resolver.resolve("127.0.0.1", std::to_string(port)));
    http::request<http::empty_body> req{http::verb::get, target, 11};
    req.set(http::field::host, "127.0.0.1");
    http::write(socket, req);
    beast::flat_buffer buffer;
    http::response<http::string_body> res;
    http::read(socket, buffer, res);
    beast::error_code ec;
    socket.shutdown(tcp::socket::shutdown_both, ec);
    return {res.result_int(), res.body(), std::string(res[http::field::content_type])};
}

bool has_package_at(const json& snapshot, double x, double y) {
    for (const auto& p : snapshot["packages"])
        if (p["x"] == x && p["y"] == y) return true;
    return false;
}

}  // namespace

TEST_CASE("gateway: commands, snapshots, static files and log replay") {
    const fs::path dir = scratch_dir();
    const fs::path log = dir / "commands.jsonl";
    const fs::path assets = dir / "static";
    fs::remove(log);
    fs::create_directories(assets);
    std::ofstream(assets / "index.html") << "<!doctype html><title>console</title>swarm-console-marker\n";

    GatewayOptions options;
    options.address = "127.0.0.1";
    options.port = 0;
    options.command_log = log;
    options.static_dir = assets;
    const ScenarioConfig config = live_scenario();
    Gateway gateway(config, options);
    const std::uint16_t port = gateway.start();
    REQUIRE(port != 0);

    Client client(port);
    const json hello = client.read();
    CHECK(hello["type"] == "hello");
    CHECK(hello.contains("arena"));

    SUBCASE("the session flow") {
        const auto first = client.read_until([](const json& j) { return j["type"] == "snapshot"; });
        REQUIRE(first);
        CHECK((*first)["agents"].size() == 6);
        CHECK((*first)["humans"].size() == 1);

        client.send(json{{"type", "command"}, {"cmd_id", 1}, {"cmd", "start"}});
        CHECK(client.reply_to(1)["type"] == "ack");

        const auto sent = clock_type::now();
        client.send(json{{"type", "command"}, {"cmd_id", 2}, {"cmd", "spawn_package"}, {"x", 3}, {"y", 4}});
        CHECK(client.reply_to(2)["type"] == "ack");
        const auto seen = client.read_until(
            [](const json& j) { return j["type"] == "snapshot" && has_package_at(j, 3, 4); });
        REQUIRE(seen);
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(clock_type::now() - sent);
        CHECK(elapsed.count() < 500);

        client.send(json{{"type", "command"}, {"cmd_id", "mode-1"}, {"cmd", "set_mode"}, {"mode", "swarm"}});
        CHECK(client.reply_to("mode-1")["type"] == "ack");
        CHECK(client.read_until([](const json& j) { return j["type"] == "snapshot" && j["mode"] == "swarm"; }));

        client.send(json{{"type", "command"}, {"cmd_id", 3}, {"cmd", "spawn_package"}, {"x", 99}, {"y", 0}});
        const json bounds = client.reply_to(3);
        CHECK(bounds["type"] == "reject");
        CHECK(bounds["reason"] == "bounds");

        client.send(std::string("{not json"));
        const auto parse = client.read_until([](const json& j) { return j["type"] == "reject"; });
        REQUIRE(parse);
        CHECK((*parse)["reason"] == "parse");
        CHECK((*parse)["cmd_id"].is_null());

        client.send(json{{"cmd", "fly_to_the_moon"}});
        const auto unknown = client.read_until([](const json& j) { return j["type"] == "reject"; });
        REQUIRE(unknown);
        CHECK((*unknown)["reason"] == "unknown_command");
        CHECK((*unknown)["cmd_id"].is_number_integer());  // assigned by the server

        client.send(json{{"cmd_id", 4}, {"cmd", "move_human"}, {"id", 7}, {"x", 5}, {"y", 5}});
        CHECK(client.reply_to(4)["reason"] == "unknown_id");
        client.send(json{{"cmd_id", 5}, {"cmd", "move_human"}, {"id", 0}, {"x", 5}, {"y", 5}});
        CHECK(client.reply_to(5)["type"] == "ack");
        client.send(json{{"cmd_id", 6}, {"cmd", "set_rate"}, {"rate", 20}});
        CHECK(client.reply_to(6)["reason"] == "bounds");
        client.send(json{{"cmd_id", 7}, {"cmd", "set_mode"}, {"mode", "chaos"}});
        CHECK(client.reply_to(7)["reason"] == "invalid");
        client.send(json{{"cmd_id", 8}, {"cmd", "inject_comm_loss"}, {"agent", 2}, {"duration", 1.5}});
        CHECK(client.reply_to(8)["type"] == "ack");

        // Pause, then wait for the keepalive that carries the paused state.
        client.send(json{{"cmd_id", 9}, {"cmd", "pause"}});
        CHECK(client.reply_to(9)["type"] == "ack");
        const auto paused = client.read_until([](const json& j) { return j["type"] == "snapshot" && j["paused"] == true; });
        REQUIRE(paused);
        const auto again = client.read_until([](const json& j) { return j["type"] == "snapshot"; });
        REQUIRE(again);
        CHECK((*again)["tick"] == (*paused)["tick"]);

        client.close();
        gateway.stop();

        // Replaying the command log headless reproduces the paused frame exactly.
        ScenarioConfig replay = config;
        merge_commands(replay, load_command_log(log));
        Simulation sim(replay);
        const long long tick = (*paused)["tick"].get<long long>();
        while (sim.world().tick < tick) sim.step();
        CHECK(make_snapshot(sim, true) == *paused);
    }

    SUBCASE("static files") {
        const HttpReply index = http_get(port, "/");
        CHECK(index.status == 200);
        CHECK(index.body.find("swarm-console-marker") != std::string::npos);
        CHECK(index.content_type.find("text/html") != std::string::npos);
        CHECK(http_get(port, "/missing.js").status == 404);
        CHECK(http_get(port, "/../../etc/passwd").status != 200);
        client.close();
        gateway.stop();
    }
}

TEST_CASE("gateway: a second client gets hello and the latest snapshot") {
    GatewayOptions options;
    options.address = "127.0.0.1";
    options.port = 0;
    options.start_paused = true;
    Gateway gateway(live_scenario(), options);
    const auto port = gateway.start();
    Client a(port);
    Client b(port);
    CHECK(a.read()["type"] == "hello");
    CHECK(b.read()["type"] == "hello");
    const auto snap = b.read_until([](const json& j) { return j["type"] == "snapshot"; });
    REQUIRE(snap);
    CHECK((*snap)["paused"] == true);
    CHECK((*snap)["tick"] == 0);
    CHECK(json::parse(gateway.latest_snapshot())["tick"] == 0);
    a.close();
    b.close();
    gateway.stop();
}
