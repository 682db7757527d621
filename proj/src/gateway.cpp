#include "swarmsim/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <csignal>
#include <deque>
#include <fstream>
#include <iostream>
#include <mutex>
#include <system_error>
#include <thread>
#include <variant>
#include <vector>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "swarmsim/errors.hpp"
#include "swarmsim/scenario.hpp"

namespace swarm {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

json make_snapshot(const Simulation& sim, bool paused) {
    const WorldState& w = sim.world();
    json agents = json::array();
    for (const auto& a : w.agents) {
        agents.push_back({{"id", to_index(a.id)},
                          {"x", a.position.x},
                          {"y", a.position.y},
                          {"z", a.position.z},
                          {"vx", a.velocity.x},
                          {"vy", a.velocity.y},
                          {"vz", a.velocity.z},
                          {"mode", to_string(a.mode)},
                          {"phase", to_string(a.phase.kind)},
                          {"battery", a.battery},
                          {"carried_package", a.carried_package ? json(to_index(*a.carried_package)) : json(nullptr)}});
    }
    json packages = json::array();
    for (const auto& p : w.packages) {
        packages.push_back({{"id", to_index(p.id)},
                            {"x", p.spawn_position.x},
                            {"y", p.spawn_position.y},
                            {"status", to_string(p.status)}});
    }
    json humans = json::array();
    for (const auto& o : w.obstacles) {
        if (o.kind == ObstacleKind::human)
            humans.push_back({{"id", to_index(o.id)}, {"x", o.center.x}, {"y", o.center.y}});
    }
    const MetricsSummary m = sim.metrics();
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"type", "snapshot"},
            {"tick", w.tick},
            {"time", w.time},
            {"mode", to_string(w.mode)},
            {"paused", paused},
            {"agents", std::move(agents)},
            {"packages", std::move(packages)},
            {"humans", std::move(humans)},
            {"metrics",
             {{"min_interagent_distance", opt(m.min_interagent_distance)},
              {"min_human_clearance", opt(m.min_human_clearance)},
              {"delivered", m.packages_delivered}}}};
}

json make_hello(const ScenarioConfig& c) {
    json obstacles = json::array();
    for (const auto& o : c.obstacles) {
        obstacles.push_back({{"id", to_index(o.id)},
                             {"kind", to_string(o.kind)},
                             {"x", o.center.x},
                             {"y", o.center.y},
                             {"radius", o.radius}});
    }
    json station = nullptr;
    if (c.station) {
        json slots = json::array();
        for (const auto& p : c.slot_positions()) slots.push_back({{"x", p.x}, {"y", p.y}});
        station = {{"x", c.station->position.x}, {"y", c.station->position.y}, {"slots", std::move(slots)}};
    }
    return {{"type", "hello"},
            {"scenario", c.name},
            {"dt", c.dt},
            {"arena",
             {{"min", vec3_to_json(c.arena.min_corner)}, {"max", vec3_to_json(c.arena.max_corner)}}},
            {"destination", {{"x", c.destination.x}, {"y", c.destination.y}}},
            {"r_separation", c.weights.r_separation},
            {"obstacles", std::move(obstacles)},
            {"station", std::move(station)}};
}

namespace {

using Frame = std::shared_ptr<const std::string>;

const char* placeholder_page =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>swarmsim</title></head>"
    "<body><h1>swarmsim gateway</h1><p>No console assets installed. "
    "Connect a WebSocket client to <code>/ws</code>.</p></body></html>";

std::string mime_type(const std::filesystem::path& p) {
    const std::string ext = p.extension().string();
    if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    if (ext == ".ico") return "image/x-icon";
    if (ext == ".map") return "application/json";
    return "application/octet-stream";
}

class WsSession;

struct Inbound {
    std::weak_ptr<WsSession> from;
    std::string text;
};

}  // namespace

struct Gateway::Impl {
    Impl(ScenarioConfig config, GatewayOptions options)
        : options(std::move(options)), sim(std::move(config)), hello(make_hello(sim.config()).dump()) {}

    GatewayOptions options;
    Simulation sim;
    std::string hello;

    net::io_context ioc{1};
    std::optional<tcp::acceptor> acceptor;
    std::optional<net::signal_set> signals;
    std::thread io_thread;
    std::thread engine_thread;
    std::atomic<bool> running{false};

    std::mutex inbound_mutex;
    std::condition_variable inbound_cv;
    std::deque<Inbound> inbound;

    std::mutex sessions_mutex;
    std::vector<std::weak_ptr<WsSession>> sessions;

    mutable std::mutex snapshot_mutex;
    std::string latest;

    std::ofstream command_log;
    long long next_cmd_id = 1;
    bool paused = false;
    bool halted = false;
    double rate = 1.0;

    void accept();
    void register_session(const std::shared_ptr<WsSession>& s);
    void broadcast(const Frame& frame);
    void push_inbound(Inbound in) {
        {
            std::lock_guard lock(inbound_mutex);
            inbound.push_back(std::move(in));
        }
        inbound_cv.notify_one();
    }
    void engine_loop();
    void drain_commands();
    void handle_frame(const Inbound& in);
    void publish(bool send);
    void request_stop();
};

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket&& socket, Gateway::Impl& gw) : ws_(std::move(socket)), gw_(gw) {}

    void run(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.text(true);
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            self->gw_.register_session(self);
            self->send(std::make_shared<const std::string>(self->gw_.hello));
            std::string latest;
            {
                std::lock_guard lock(self->gw_.snapshot_mutex);
                latest = self->gw_.latest;
            }
            if (!latest.empty()) self->send(std::make_shared<const std::string>(std::move(latest)));
            self->read();
        });
    }

    // Thread-safe.
    void send(Frame frame) {
        net::post(ws_.get_executor(), [self = shared_from_this(), frame = std::move(frame)] {
            if (self->closed_) return;
            if (self->queue_.size() >= self->gw_.options.max_queued_frames) {
                self->drop();
                return;
            }
            self->queue_.push_back(frame);
            if (self->queue_.size() == 1) self->write_next();
        });
    }

    bool closed() const { return closed_; }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->closed_ = true;
                return;
            }
            self->gw_.push_inbound(Inbound{self, beast::buffers_to_string(self->buffer_.data())});
            self->buffer_.consume(self->buffer_.size());
            self->read();
        });
    }

    void write_next() {
        ws_.async_write(net::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->closed_ = true;
                return;
            }
            self->queue_.pop_front();
            if (!self->queue_.empty()) self->write_next();
        });
    }

    void drop() {
        closed_ = true;
        queue_.clear();
        beast::error_code ignored;
        beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ignored);
        beast::get_lowest_layer(ws_).close();
    }

    websocket::stream<beast::tcp_stream> ws_;
    Gateway::Impl& gw_;
    beast::flat_buffer buffer_;
    std::deque<Frame> queue_;
    std::atomic<bool> closed_{false};
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket&& socket, Gateway::Impl& gw) : stream_(std::move(socket)), gw_(gw) {}

    void run() {
        net::dispatch(stream_.get_executor(), [self = shared_from_this()] { self->read(); });
    }

private:
    void read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return;
            self->handle();
        });
    }

    void handle() {
        if (websocket::is_upgrade(req_)) {
            if (req_.target() == "/ws") {
                stream_.expires_never();
                std::make_shared<WsSession>(stream_.release_socket(), gw_)->run(std::move(req_));
                return;
            }
            respond(http::status::not_found, "text/plain", "not found\n");
            return;
        }
        if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
            respond(http::status::method_not_allowed, "text/plain", "method not allowed\n");
            return;
        }
        serve_static(std::string(req_.target()));
    }

    void serve_static(std::string target) {
        if (const auto q = target.find('?'); q != std::string::npos) target.resize(q);
        if (target.empty() || target.back() == '/') target += "index.html";
        if (target.find("..") != std::string::npos || target.front() != '/') {
            respond(http::status::bad_request, "text/plain", "bad path\n");
            return;
        }
        if (gw_.options.static_dir) {
            const auto path = *gw_.options.static_dir / target.substr(1);
            std::ifstream in(path, std::ios::binary);
            if (in) {
                std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
                respond(http::status::ok, mime_type(path), std::move(body));
                return;
            }
        }
        if (target == "/index.html") {
            respond(http::status::ok, "text/html; charset=utf-8", placeholder_page);
            return;
        }
        respond(http::status::not_found, "text/plain", "not found\n");
    }

    void respond(http::status status, std::string type, std::string body) {
        auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
        res->set(http::field::server, "swarmsim");
        res->set(http::field::content_type, type);
        res->keep_alive(req_.keep_alive());
        if (req_.method() != http::verb::head) res->body() = std::move(body);
        res->prepare_payload();
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
            if (ec) return;
            if (!res->keep_alive()) {
                beast::error_code ignored;
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                return;
            }
            self->read();
        });
    }

    beast::tcp_stream stream_;
    Gateway::Impl& gw_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
};

}  // namespace

void Gateway::Impl::accept() {
    acceptor->async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
        if (ec) {
            if (ec == net::error::operation_aborted) return;
        } else {
            std::make_shared<HttpSession>(std::move(socket), *this)->run();
        }
        if (acceptor && acceptor->is_open()) accept();
    });
}

void Gateway::Impl::register_session(const std::shared_ptr<WsSession>& s) {
    std::lock_guard lock(sessions_mutex);
    std::erase_if(sessions, [](const auto& w) {
        const auto p = w.lock();
        return !p || p->closed();
    });
    sessions.push_back(s);
}

void Gateway::Impl::broadcast(const Frame& frame) {
    std::vector<std::shared_ptr<WsSession>> live;
    {
        std::lock_guard lock(sessions_mutex);
        std::erase_if(sessions, [&](const auto& w) {
            auto p = w.lock();
            if (!p || p->closed()) return true;
            live.push_back(std::move(p));
            return false;
        });
    }
    for (const auto& s : live) s->send(frame);
}

void Gateway::Impl::publish(bool send) {
    auto text = make_snapshot(sim, paused).dump();
    auto frame = std::make_shared<const std::string>(text);
    {
        std::lock_guard lock(snapshot_mutex);
        latest = std::move(text);
    }
    if (send) broadcast(frame);
}

void Gateway::Impl::handle_frame(const Inbound& in) {
    const auto session = in.from.lock();
    const auto reply = [&](json j) {
        if (session) session->send(std::make_shared<const std::string>(j.dump()));
    };

    json frame;
    json cmd_id;
    try {
        frame = json::parse(in.text);
    } catch (const json::parse_error&) {
        reply({{"type", "reject"}, {"cmd_id", nullptr}, {"reason", "parse"}});
        return;
    }
    if (frame.is_object() && frame.contains("cmd_id") &&
        (frame["cmd_id"].is_number_integer() || frame["cmd_id"].is_string())) {
        cmd_id = frame["cmd_id"];
    } else {
        cmd_id = next_cmd_id++;
    }
    if (!frame.is_object() || frame.value("type", "command") != "command") {
        reply({{"type", "reject"}, {"cmd_id", cmd_id}, {"reason", "parse"}});
        return;
    }

    try {
        const CommandPayload payload = command_from_json(frame);
        sim.enqueue(payload);
        if (std::holds_alternative<PauseCmd>(payload)) paused = true;
        if (std::holds_alternative<ResumeCmd>(payload)) paused = false;
        if (const auto* r = std::get_if<SetRateCmd>(&payload)) rate = r->rate;
        reply({{"type", "ack"}, {"cmd_id", cmd_id}});
    } catch (const CommandRejected& e) {
        reply({{"type", "reject"}, {"cmd_id", cmd_id}, {"reason", e.reason()}});
    }
}

void Gateway::Impl::drain_commands() {
    std::deque<Inbound> batch;
    {
        std::lock_guard lock(inbound_mutex);
        batch.swap(inbound);
    }
    for (const auto& in : batch) handle_frame(in);
}

void Gateway::Impl::engine_loop() {
    using clock = std::chrono::steady_clock;
    const double tick_hz = 1.0 / sim.config().dt;
    const long long decimation =
        std::max<long long>(1, std::llround(tick_hz / std::max(options.snapshot_hz, 1e-6)));

    auto next_tick = clock::now();
    auto next_keepalive = clock::now();
    publish(true);

    while (running) {
        drain_commands();

        if (paused || halted) {
            const auto now = clock::now();
            if (now >= next_keepalive) {
                publish(true);
                next_keepalive = now + std::chrono::seconds(1);
            }
            std::unique_lock lock(inbound_mutex);
            inbound_cv.wait_for(lock, std::chrono::milliseconds(50),
                                [&] { return !inbound.empty() || !running; });
            next_tick = clock::now();
            continue;
        }

        try {
            sim.step();
        } catch (const InvariantViolation& e) {
            std::cerr << "serve: " << e.what() << " (stepping halted)\n";
            halted = true;
        }
        for (const auto& cmd : sim.applied_commands()) {
            if (command_log.is_open()) command_log << scheduled_command_to_json(cmd).dump() << '\n';
        }
        if (command_log.is_open() && !sim.applied_commands().empty()) command_log.flush();
        publish(sim.world().tick % decimation == 0);
        next_keepalive = clock::now() + std::chrono::seconds(1);

        const auto period = std::chrono::duration<double>(sim.config().dt / rate);
        next_tick += std::chrono::duration_cast<clock::duration>(period);
        const auto now = clock::now();
        if (next_tick < now - std::chrono::milliseconds(500)) next_tick = now;  // fell behind; do not burst
        std::unique_lock lock(inbound_mutex);
        inbound_cv.wait_until(lock, next_tick, [&] { return !running; });
    }
}

void Gateway::Impl::request_stop() {
    running = false;
    inbound_cv.notify_all();
    net::post(ioc, [this] {
        beast::error_code ignored;
        if (acceptor) acceptor->close(ignored);
        if (signals) signals->cancel(ignored);
        ioc.stop();
    });
}

Gateway::Gateway(ScenarioConfig config, GatewayOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(options))) {
    if (!(impl_->options.rate >= 0.25 && impl_->options.rate <= 8.0))
        throw ValidationError("rate: must be in [0.25, 8]");
    if (!(impl_->options.snapshot_hz > 0.0)) throw ValidationError("snapshot-rate: must be > 0");
    impl_->rate = impl_->options.rate;
    impl_->paused = impl_->options.start_paused;
}

Gateway::~Gateway() {
    stop();
}

std::uint16_t Gateway::start() {
    Impl& g = *impl_;
    if (g.options.command_log) {
        g.command_log.open(*g.options.command_log, std::ios::binary | std::ios::trunc);
        if (!g.command_log)
            throw std::system_error(errno, std::generic_category(),
                                    "cannot write command log " + g.options.command_log->string());
    }
    const tcp::endpoint endpoint(net::ip::make_address(g.options.address), g.options.port);
    g.acceptor.emplace(g.ioc);
    g.acceptor->open(endpoint.protocol());
    g.acceptor->set_option(net::socket_base::reuse_address(true));
    g.acceptor->bind(endpoint);
    g.acceptor->listen(net::socket_base::max_listen_connections);
    const auto port = g.acceptor->local_endpoint().port();

    g.signals.emplace(g.ioc, SIGINT, SIGTERM);
    g.signals->async_wait([&g](beast::error_code ec, int) {
        if (!ec) g.request_stop();
    });

    g.running = true;
    g.accept();
    g.io_thread = std::thread([&g] { g.ioc.run(); });
    g.engine_thread = std::thread([&g] { g.engine_loop(); });
    return port;
}

void Gateway::wait() {
    if (impl_->io_thread.joinable()) impl_->io_thread.join();
    if (impl_->engine_thread.joinable()) impl_->engine_thread.join();
}

void Gateway::stop() {
    if (!impl_) return;
    if (impl_->io_thread.joinable() || impl_->engine_thread.joinable()) {
        impl_->request_stop();
        wait();
    }
    if (impl_->command_log.is_open()) impl_->command_log.flush();
}

std::string Gateway::latest_snapshot() const {
    std::lock_guard lock(impl_->snapshot_mutex);
    return impl_->latest;
}

}  // namespace swarm
