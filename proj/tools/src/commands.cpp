#include "holemem_cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <system_error>

#include "holemem/analysis.hpp"
#include "holemem/csv.hpp"
#include "holemem/hole_profile.hpp"
#include "holemem/oracle.hpp"
#include "holemem/photon_stats.hpp"
#include "holemem/protocol.hpp"
#include "holemem/units.hpp"

namespace holemem::cli {

namespace fs = std::filesystem;
using csv::format_number;

void write_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

int exit_code(const std::exception& e) noexcept {
    if (dynamic_cast<const ValidationError*>(&e)) return 2;
    if (dynamic_cast<const NumericalError*>(&e)) return 3;
    return 1;
}

namespace {

std::ostream& log_of(const Context& ctx) {
    static std::ostringstream sink;
    return ctx.log ? *ctx.log : sink;
}

std::string trace_csv(const ComplexEnvelope& env) {
    std::string out = "t_us,re_e,im_e,intensity\n";
    const auto& g = env.grid();
    for (std::size_t i = 0; i < g.count(); ++i) {
        const complex v = env[i];
        out += format_number(g.time(i)) + ',' + format_number(v.real()) + ',' +
               format_number(v.imag()) + ',' + format_number(std::norm(v)) + '\n';
    }
    return out;
}

std::string snapshot_csv(const FieldSnapshots& snap, const TimeGrid& grid) {
    std::string out = "t_us,z_norm,re_e,im_e\n";
    const double nz = static_cast<double>(snap.n_nodes - 1);
    for (std::size_t n = 0; n < snap.n_t; ++n)
        for (std::size_t j = 0; j < snap.n_nodes; ++j) {
            const complex v = snap.at(n, j);
            out += format_number(grid.time(n)) + ',' + format_number(static_cast<double>(j) / nz) +
                   ',' + format_number(v.real()) + ',' + format_number(v.imag()) + '\n';
        }
    return out;
}

class Writer {
public:
    explicit Writer(const Context& ctx) : ctx_(ctx) {}
    void file(const std::string& name, std::string_view content) {
        const fs::path p = ctx_.out_dir / name;
        write_atomic(p, content);
        written_.push_back(p);
    }
    void gnuplot(const std::string& name, std::string_view script) {
        if (ctx_.gnuplot) file(name, script);
    }
    Written done() { return std::move(written_); }

private:
    const Context& ctx_;
    Written written_;
};

}  // namespace

Written cmd_simulate(const Context& ctx, std::optional<double> raman_area_pi) {
    auto settings = interpret(ctx.config);
    SequenceSpec spec = settings.sequence;
    if (raman_area_pi) {
        spec.raman1.area_rad = *raman_area_pi * units::pi;
        spec.raman2.area_rad = *raman_area_pi * units::pi;
    }
    auto& log = log_of(ctx);

    StorageResult stored = [&] {
        if (!settings.optimize_timing) return run_sequence(spec, ctx.threads);
        auto [best, result] = optimize_raman_timing(spec, settings.search, ctx.threads);
        spec = best;
        return result;
    }();
    const SlowLightResult slow = run_slow_light(spec, ctx.threads);

    Writer w(ctx);
    w.file("trace_input.csv", trace_csv(stored.input));
    w.file("trace_slow.csv", trace_csv(slow.output));
    w.file("trace.csv", trace_csv(stored.output));

    std::string summary = "quantity,value\n";
    auto row = [&](std::string_view name, double v) {
        summary += std::string(name) + ',' + format_number(v) + '\n';
    };
    row("eta_s", stored.eta_s);
    if (stored.eta_s_decayed) row("eta_s_decayed", *stored.eta_s_decayed);
    row("leaked", stored.leaked);
    row("between", stored.between);
    row("spin_after_raman1", stored.spin_after_raman1);
    row("energy_balance", stored.energy_balance);
    row("delay_us", slow.delay_us);
    row("slow_light_transmission", slow.transmission);
    row("raman1_start_us", spec.raman1.start_us);
    row("storage_time_us", spec.storage_time());
    row("window_lo_us", spec.window_lo_us);
    row("window_hi_us", spec.window_hi_us);
    w.file("summary.csv", summary);

    if (settings.snapshots) {
        PropagationOptions opts;
        opts.mode = spec.mode;
        opts.threads = ctx.threads;
        opts.snapshots = true;
        const auto prop = propagate(stored.input, stored.raman, spec.profile, spec.grids(), opts);
        w.file("snapshots.csv", snapshot_csv(*prop.snapshots, stored.input.grid()));
    }
    w.gnuplot("simulate.gp",
              "set datafile separator ','\n"
              "set key autotitle columnhead\n"
              "set xlabel 't (us)'\nset ylabel '|E|^2'\n"
              "plot 'trace_input.csv' using 1:4 with lines title 'input', \\\n"
              "     'trace_slow.csv' using 1:4 with lines title 'slow light', \\\n"
              "     'trace.csv' using 1:4 with lines title 'stored'\n");

    log << "eta_s = " << format_number(stored.eta_s) << "\n";
    if (stored.eta_s_decayed) log << "eta_s_decayed = " << format_number(*stored.eta_s_decayed) << "\n";
    log << "delay_us = " << format_number(slow.delay_us) << "\n";
    return w.done();
}

Written cmd_sweep_od(const Context& ctx) {
    const auto settings = interpret(ctx.config);
    const auto table = sweep_od(settings.sequence, settings.od_values, ctx.threads, settings.search);
    std::string out = "od,eta_s\n";
    for (const auto& p : table) out += format_number(p.d) + ',' + format_number(p.eta_s) + '\n';
    Writer w(ctx);
    w.file("sweep_od.csv", out);
    w.gnuplot("sweep_od.gp",
              "set datafile separator ','\nset xlabel 'optical depth'\nset ylabel 'eta_s'\n"
              "plot 'sweep_od.csv' using 1:2 every ::1 with linespoints notitle\n");
    auto& log = log_of(ctx);
    for (const auto& p : table)
        log << "d = " << format_number(p.d) << "  eta_s = " << format_number(p.eta_s)
            << "  raman1_start_us = " << format_number(p.raman1_start_us) << "\n";
    return w.done();
}

Written cmd_sweep_ts(const Context& ctx) {
    const auto settings = interpret(ctx.config);
    const auto table = sweep_storage_time(settings.sequence, settings.ts_values_us, ctx.threads);
    std::string out = "ts_us,eta_s\n";
    for (const auto& p : table) out += format_number(p.ts_us) + ',' + format_number(p.eta_s) + '\n';
    Writer w(ctx);
    w.file("sweep_ts.csv", out);
    w.gnuplot("sweep_ts.gp",
              "set datafile separator ','\nset xlabel 'T_s (us)'\nset ylabel 'eta_s'\n"
              "plot 'sweep_ts.csv' using 1:2 every ::1 with linespoints notitle\n");
    const double gamma = settings.sequence.spin_linewidth_khz.value_or(0.0);
    if (gamma > 0.0)
        log_of(ctx) << "half-efficiency storage time = " << format_number(half_efficiency_time(gamma))
                    << " us\n";
    return w.done();
}

Written cmd_fit(const Context& ctx, std::optional<std::string> kind,
                std::optional<fs::path> trace) {
    const auto settings = interpret(ctx.config);
    const std::string k = kind.value_or(settings.fit_kind);
    const fs::path path = trace.value_or(fs::path(settings.fit_trace_path));
    if (path.empty()) throw ConfigError("fit: no input file (set fit.trace_path or pass one)");
    auto& log = log_of(ctx);
    std::string out = "parameter,value,sigma\n";
    auto row = [&](std::string_view name, double v, double s) {
        out += std::string(name) + ',' + format_number(v) + ',' + format_number(s) + '\n';
        log << name << " = " << format_number(v) << " +- " << format_number(s) << "\n";
    };
    auto sigma = [](const FitReport& r, std::size_t i) { return std::sqrt(std::max(0.0, r.variance(i))); };
    if (k == "hole") {
        const auto data = read_absorption_trace(path);
        const auto fit = fit_hole(data, settings.sequence.profile);
        row("delta0_khz", fit.profile.delta0_khz, sigma(fit.report, 0));
        row("n", fit.profile.n, sigma(fit.report, 1));
        row("od", fit.profile.d, sigma(fit.report, 2));
        row("residual_norm", fit.report.residual_norm, 0.0);
    } else if (k == "decay") {
        const auto data = read_decay_curve(path.string());
        const auto fit = fit_decay(data);
        row("gamma_khz", fit.gamma_khz, sigma(fit.report, 0));
        row("eta0", fit.eta0, sigma(fit.report, 1));
        row("residual_norm", fit.report.residual_norm, 0.0);
    } else {
        throw ConfigError("fit: unknown kind '" + k + "' (hole or decay)");
    }
    Writer w(ctx);
    w.file("fit.csv", out);
    return w.done();
}

Written cmd_photon_stats(const Context& ctx) {
    const auto settings = interpret(ctx.config);
    const auto& p = settings.photon;
    bool any_signal = false;
    for (double mu : p.mu_values) any_signal = any_signal || mu > 0.0;
    if (!any_signal) throw ConfigError("photon-stats: no signal points (need some mu_in > 0)");

    MonteCarloSpec base;
    base.trials = p.trials_per_preparation * p.preparations;
    base.window = {p.window_start_us, p.window_start_us + p.window_us};
    base.bin_edges_us = uniform_bin_edges(p.hist_start_us, p.hist_end_us, p.hist_bin_us);
    base.shape = gaussian_shape(p.window_start_us + 0.5 * p.window_us, p.pulse_fwhm_us);
    base.noise_mean = p.noise_per_window;
    base.threads = ctx.threads;

    Writer w(ctx);
    std::vector<SnrReport> reports;
    std::string snr = "mu_in,signal_mean,signal_sigma,noise_mean,noise_sigma,snr,snr_sigma,mu1,mu1_sigma\n";
    for (std::size_t i = 0; i < p.mu_values.size(); ++i) {
        // each point gets its own noise reference so the points are independent
        MonteCarloSpec n = base;
        n.signal_mean = 0.0;
        n.mu_in = 0.0;
        n.seed = derive_seed(settings.seed, 2 * i);
        const auto noise = monte_carlo_counts(n);
        MonteCarloSpec s = base;
        s.mu_in = p.mu_values[i];
        s.signal_mean = p.mu_values[i] * p.signal_per_mu;
        s.seed = derive_seed(settings.seed, 2 * i + 1);
        const auto hist = monte_carlo_counts(s);
        w.file("histogram_" + std::to_string(i) + ".csv", format_histogram(hist));
        w.file("histogram_noise_" + std::to_string(i) + ".csv", format_histogram(noise));
        const auto r = compute_snr(hist, noise, base.window);
        reports.push_back(r);
        snr += format_number(r.mu_in) + ',' + format_number(r.signal_mean) + ',' +
               format_number(r.signal_sigma) + ',' + format_number(r.noise_mean) + ',' +
               format_number(r.noise_sigma) + ',' + (r.infinite ? "inf" : format_number(r.snr)) +
               ',' + (r.infinite ? "inf" : format_number(r.snr_sigma)) + ',' +
               format_number(r.mu1) + ',' + format_number(r.mu1_sigma) + '\n';
    }
    w.file("snr.csv", snr);
    const auto fit = fit_mu1(reports);
    w.file("mu1.txt", "mu1 = " + format_number(fit.mu1) + "\nmu1_sigma = " +
                          format_number(fit.mu1_sigma) + "\nmu1_ci95 = " +
                          format_number(fit.mu1_ci95) + "\npoints = " + std::to_string(fit.points) +
                          "\n");
    w.gnuplot("photon_stats.gp",
              "set datafile separator ','\nset xlabel 'mu_in'\nset ylabel 'SNR'\n"
              "plot 'snr.csv' using 1:6:7 every ::1 with yerrorbars notitle, x / " +
                  format_number(fit.mu1) + " title 'fit'\n");
    log_of(ctx) << "mu1 = " << format_number(fit.mu1) << " +- " << format_number(fit.mu1_sigma)
                << "\n";
    return w.done();
}

Written cmd_oracle_check(const Context& ctx) {
    const auto settings = interpret(ctx.config);
    const auto& spec = settings.sequence;
    const TimeGrid grid = spec.time_grid();
    const auto input =
        make_gaussian_pulse(spec.input.fwhm_us, spec.input.center_us, spec.input.peak, grid);
    auto& log = log_of(ctx);

    std::string out = "n_z,n_detuning,relative_rms,max_deviation,delay_propagated_us,delay_oracle_us\n";
    PropagationOptions opts;
    opts.threads = ctx.threads;
    for (int level = 0; level < settings.oracle_levels; ++level) {
        const std::size_t nz = spec.n_z << level;
        const std::size_t nd = spec.n_detuning << level;
        const PropagationGrids grids{DetuningGrid::from_span_mhz(spec.detuning_span_mhz, nd), nz};
        const auto r = compare_oracle(input, spec.profile, grids, opts);
        out += std::to_string(nz) + ',' + std::to_string(nd) + ',' + format_number(r.relative_rms) +
               ',' + format_number(r.max_deviation) + ',' + format_number(r.delay_propagated) + ',' +
               format_number(r.delay_oracle) + '\n';
        log << "n_z = " << nz << "  n_detuning = " << nd
            << "  relative_rms = " << format_number(r.relative_rms) << "\n";
    }
    Writer w(ctx);
    w.file("oracle.csv", out);

    std::string cw = "detuning_khz,transmission,expected,relative_error\n";
    for (double dk : settings.cw_detunings_khz) {
        CwProbe probe;
        probe.detuning_khz = dk;
        probe.dt_us = spec.dt_us;
        const double t = cw_transmission(spec.profile, probe, spec.grids(), opts);
        const double expected = std::exp(-spec.profile.d * g(dk, spec.profile));
        cw += format_number(dk) + ',' + format_number(t) + ',' + format_number(expected) + ',' +
              format_number(t / expected - 1.0) + '\n';
    }
    if (!settings.cw_detunings_khz.empty()) w.file("beer_lambert.csv", cw);
    return w.done();
}

}  // namespace holemem::cli
