#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "holemem_cli/commands.hpp"

namespace cli = holemem::cli;

int main(int argc, char** argv) {
    CLI::App app{"holemem: spectral-hole spin-wave memory simulator"};
    app.require_subcommand(1);
    app.footer("\n" + cli::describe_keys());

    std::string config_path;
    std::optional<std::int64_t> seed;
    std::string out_dir = ".";
    unsigned threads = 1;
    bool gnuplot = false;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "config file (section.key = value)");
    app.add_option("--seed", seed, "overrides run.seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    app.add_option("--set", overrides, "override a config key, KEY=VALUE (repeatable)");
    app.add_flag("--gnuplot-script", gnuplot, "also write a gnuplot script for the data");

    auto* simulate = app.add_subcommand("simulate", "input, slow light and storage traces");
    std::optional<double> raman_area;
    simulate->add_option("--raman-area", raman_area, "both Raman areas, in units of pi");
    app.add_subcommand("sweep-od", "storage efficiency versus optical depth");
    app.add_subcommand("sweep-ts", "storage efficiency versus storage time");
    auto* fit = app.add_subcommand("fit", "fit a hole trace or a decay curve");
    std::optional<std::string> kind;
    std::optional<std::string> trace;
    fit->add_option("--kind", kind, "hole or decay")->check(CLI::IsMember({"hole", "decay"}));
    fit->add_option("trace", trace, "data file (default: fit.trace_path)");
    app.add_subcommand("photon-stats", "Monte-Carlo photon counting, SNR and mu1");
    app.add_subcommand("oracle-check", "compare propagation against the transfer-function oracle");
    app.add_subcommand("config", "print the effective configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        cli::Context ctx;
        if (!config_path.empty()) ctx.config = cli::Config::load(config_path);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw cli::ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
            ctx.config.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seed) ctx.config.set("run.seed", std::to_string(*seed));
        cli::interpret(ctx.config);
        ctx.out_dir = out_dir;
        ctx.threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
        ctx.gnuplot = gnuplot;
        ctx.log = &std::cout;

        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "simulate") cli::cmd_simulate(ctx, raman_area);
        else if (name == "sweep-od") cli::cmd_sweep_od(ctx);
        else if (name == "sweep-ts") cli::cmd_sweep_ts(ctx);
        else if (name == "fit") cli::cmd_fit(ctx, kind, trace ? std::optional<std::filesystem::path>(*trace) : std::nullopt);
        else if (name == "photon-stats") cli::cmd_photon_stats(ctx);
        else if (name == "oracle-check") cli::cmd_oracle_check(ctx);
        else if (name == "config") std::cout << ctx.config.dump();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::exit_code(e);
    }
    return 0;
}
