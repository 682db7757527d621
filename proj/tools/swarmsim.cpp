// swarmsim: headless scenario runner, trace verifier and live gateway.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "swarmsim/engine.hpp"
#include "swarmsim/errors.hpp"
#include "swarmsim/gateway.hpp"
#include "swarmsim/scenario.hpp"
#include "swarmsim/verify.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_invalid = 2;
constexpr int exit_violation = 3;

struct SimulateArgs {
    std::string scenario;
    std::uint64_t seed = 0;
    std::optional<double> duration;
    std::string trace;
    std::string summary;
    std::string commands;
    bool strict = false;
    bool permissive = false;
};

struct ServeArgs {
    std::string scenario;
    std::uint16_t port = 8080;
    std::string address = "0.0.0.0";
    double snapshot_hz = 50.0 / 3.0;
    double rate = 1.0;
    std::string command_log;
    std::string static_dir;
    std::optional<std::uint64_t> seed;
    bool paused = false;
};

int simulate(const SimulateArgs& args) {
    swarm::ScenarioConfig config = swarm::load_scenario(args.scenario);
    config.seed = args.seed;
    if (args.duration) config.duration = *args.duration;
    if (args.strict) config.strict = true;
    if (args.permissive) config.strict = false;
    if (!args.commands.empty()) swarm::merge_commands(config, swarm::load_command_log(args.commands));
    config.validate();

    swarm::RunOptions options;
    if (!args.trace.empty()) options.trace_path = args.trace;
    if (!args.summary.empty()) options.summary_path = args.summary;
    const swarm::RunResult result = swarm::run(config, options);

    for (const auto& v : result.violations) std::cerr << "warning: " << v << '\n';
    if (args.summary.empty()) std::cout << swarm::summary_to_json(result.summary).dump(2) << '\n';
    if (result.halted) {
        std::cerr << "error: invariant violation at " << result.halt_reason << '\n';
        return exit_violation;
    }
    return exit_ok;
}

int verify(const std::string& trace) {
    const swarm::VerifyReport report = swarm::verify_trace(trace);
    for (const auto& v : report.violations) std::cerr << "violation: " << v << '\n';
    for (const auto& m : report.mismatches) std::cerr << "mismatch: " << m << '\n';
    if (!report.ok()) {
        std::cerr << "verify: FAILED (" << report.ticks << " ticks)\n";
        return exit_violation;
    }
    std::cout << "verify: ok (" << report.ticks << " ticks, summary reproduced)\n";
    return exit_ok;
}

int serve(const ServeArgs& args) {
    swarm::ScenarioConfig config = swarm::load_scenario(args.scenario);
    if (args.seed) config.seed = *args.seed;
    swarm::GatewayOptions options;
    options.address = args.address;
    options.port = args.port;
    options.snapshot_hz = args.snapshot_hz;
    options.rate = args.rate;
    options.start_paused = args.paused;
    if (!args.command_log.empty()) options.command_log = args.command_log;
    if (!args.static_dir.empty()) {
        options.static_dir = args.static_dir;
    } else if (std::filesystem::is_directory("console/dist")) {
        options.static_dir = "console/dist";
    }

    swarm::Gateway gateway(std::move(config), options);
    const auto port = gateway.start();
    std::cerr << "serving on http://" << args.address << ":" << port << "/ (WebSocket at /ws)\n";
    gateway.wait();
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Indoor UAV swarm package-transport simulator"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Run a scenario headless");
    simulate_cmd->add_option("--scenario", sim.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    simulate_cmd->add_option("--seed", sim.seed, "RNG seed")->required();
    simulate_cmd->add_option("--duration", sim.duration, "Simulated seconds (overrides the scenario)");
    simulate_cmd->add_option("--trace", sim.trace, "Write the JSONL trace here");
    simulate_cmd->add_option("--summary", sim.summary, "Write the metrics summary here");
    simulate_cmd->add_option("--commands", sim.commands, "Replay a gateway command log as extra schedule");
    auto* strict = simulate_cmd->add_flag("--strict", sim.strict, "Halt on invariant violation");
    simulate_cmd->add_flag("--permissive", sim.permissive, "Log invariant violations and continue")->excludes(strict);

    std::string trace;
    auto* verify_cmd = app.add_subcommand("verify", "Recompute metrics from a trace and check invariants");
    verify_cmd->add_option("--trace", trace, "JSONL trace")->required()->check(CLI::ExistingFile);

    ServeArgs srv;
    auto* serve_cmd = app.add_subcommand("serve", "Run the live gateway");
    serve_cmd->add_option("--scenario", srv.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    serve_cmd->add_option("--port", srv.port, "TCP port")->capture_default_str();
    serve_cmd->add_option("--address", srv.address, "Bind address")->capture_default_str();
    serve_cmd->add_option("--snapshot-rate", srv.snapshot_hz, "Snapshot frames per second")->capture_default_str();
    serve_cmd->add_option("--rate", srv.rate, "Initial pacing multiplier (0.25 to 8)")->capture_default_str();
    serve_cmd->add_option("--command-log", srv.command_log, "Append applied commands here (JSONL)");
    serve_cmd->add_option("--static", srv.static_dir, "Console assets directory");
    serve_cmd->add_option("--seed", srv.seed, "RNG seed (overrides the scenario)");
    serve_cmd->add_flag("--paused", srv.paused, "Start with stepping paused");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }

    try {
        if (*simulate_cmd) return simulate(sim);
        if (*verify_cmd) return verify(trace);
        if (*serve_cmd) return serve(srv);
    } catch (const swarm::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_invalid;
    } catch (const swarm::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_invalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_failure;
}
