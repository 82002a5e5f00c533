#include "holemem/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "holemem/analysis.hpp"
#include "holemem/errors.hpp"
#include "holemem/oracle.hpp"

namespace holemem {

void SequenceSpec::set_storage_time(double ts_us) {
    const double span = retrieval_span();
    raman2.start_us = raman1.start_us + ts_us;
    window_lo_us = raman2.end_us();
    window_hi_us = window_lo_us + span;
}

void SequenceSpec::set_raman1_start(double start_us) {
    const double shift = start_us - raman1.start_us;
    raman1.start_us += shift;
    raman2.start_us += shift;
    window_lo_us += shift;
    window_hi_us += shift;
}

void SequenceSpec::set_retrieval_span(double span_us) {
    window_lo_us = raman2.end_us();
    window_hi_us = window_lo_us + span_us;
}

PropagationGrids SequenceSpec::grids() const {
    return {DetuningGrid::from_span_mhz(detuning_span_mhz, n_detuning), n_z};
}

void SequenceSpec::validate() const {
    profile.validate();
    if (!(input.fwhm_us > 0.0)) throw ValidationError("sequence: input fwhm must be positive");
    if (raman1.start_us < input.center_us)
        throw ValidationError("sequence: raman1 must start after the input peak has entered");
    if (raman2.start_us < raman1.end_us())
        throw ValidationError("sequence: raman2 must start after raman1 ends");
    if (window_lo_us < raman2.end_us() - 1e-9)
        throw ValidationError("sequence: retrieval window must open after raman2 ends");
    if (!(window_hi_us > window_lo_us))
        throw ValidationError("sequence: retrieval window is empty");
    if (window_lo_us < t_start_us) throw ValidationError("sequence: window outside the time grid");
    if (n_z < 1 || n_detuning < 3) throw ValidationError("sequence: grid sizes too small");
}

SequenceSpec default_sequence() {
    SequenceSpec s;
    s.set_storage_time(8.0);
    s.set_retrieval_span(12.0);
    return s;
}

namespace {

ComplexEnvelope raman_envelope(const SequenceSpec& spec, const TimeGrid& grid) {
    const auto r1 = make_square_pulse(spec.raman1.duration_us, spec.raman1.start_us,
                                      spec.raman1.area_rad, spec.raman1.rise_us, grid);
    const auto r2 = make_square_pulse(spec.raman2.duration_us, spec.raman2.start_us,
                                      spec.raman2.area_rad, spec.raman2.rise_us, grid);
    return r1 + r2;
}

double energy_between(const ComplexEnvelope& env, double lo, double hi) {
    const auto& g = env.grid();
    lo = std::clamp(lo, g.t_start(), g.t_end());
    hi = std::clamp(hi, g.t_start(), g.t_end());
    if (hi <= lo) return 0.0;
    return window_energy(env, lo, hi);
}

}  // namespace

StorageResult run_sequence(const SequenceSpec& spec, unsigned threads) {
    spec.validate();
    const TimeGrid grid = spec.time_grid();
    auto input = make_gaussian_pulse(spec.input.fwhm_us, spec.input.center_us, spec.input.peak, grid);
    auto raman = raman_envelope(spec, grid);
    PropagationOptions opts;
    opts.mode = spec.mode;
    opts.threads = threads;
    auto prop = propagate(input, raman, spec.profile, spec.grids(), opts);

    StorageResult r{.input = input, .raman = raman, .output = prop.output};
    r.input_energy = pulse_energy(input);
    const double e_in = r.input_energy;
    if (!(e_in > 0.0)) throw ValidationError("sequence: input pulse carries no energy");
    r.eta_s = window_energy(prop.output, spec.window_lo_us, spec.window_hi_us) / e_in;
    r.leaked = energy_between(prop.output, grid.t_start(), spec.raman1.start_us) / e_in;
    r.between = energy_between(prop.output, spec.raman1.end_us(), spec.raman2.start_us) / e_in;
    const std::size_t i1 = std::min(grid.index_at_or_after(spec.raman1.end_us()), grid.count() - 1);
    r.spin_after_raman1 = prop.spin_excitation[i1] / e_in;
    const std::size_t last = grid.count() - 1;
    r.residual_excitation = (prop.optical_excitation[last] + prop.spin_excitation[last]) / e_in;
    r.energy_balance = pulse_energy(prop.output) / e_in + r.residual_excitation;
    if (spec.spin_linewidth_khz)
        r.eta_s_decayed =
            r.eta_s * spin_dephasing_factor(spec.storage_time(), *spec.spin_linewidth_khz);
    return r;
}

SlowLightResult run_slow_light(const SequenceSpec& spec, unsigned threads) {
    spec.profile.validate();
    const TimeGrid grid = spec.time_grid();
    auto input = make_gaussian_pulse(spec.input.fwhm_us, spec.input.center_us, spec.input.peak, grid);
    PropagationOptions opts;
    opts.mode = spec.mode;
    opts.threads = threads;
    auto prop = propagate(input, ComplexEnvelope(grid), spec.profile, spec.grids(), opts);

    SlowLightResult r{prop.output};
    r.delay_us = peak_time(prop.output) - peak_time(input);
    const double e_in = pulse_energy(input);
    r.transmission = e_in > 0.0 ? pulse_energy(prop.output) / e_in : 0.0;
    const auto it = std::max_element(prop.optical_excitation.begin(), prop.optical_excitation.end());
    r.max_stored_time_us =
        grid.time(static_cast<std::size_t>(it - prop.optical_excitation.begin()));
    return r;
}

std::pair<SequenceSpec, StorageResult> optimize_raman_timing(const SequenceSpec& spec,
                                                             const TimingSearch& search,
                                                             unsigned threads) {
    const double width = search.width_in_fwhm * spec.input.fwhm_us;
    const double center = spec.input.center_us + 0.5 * group_delay(spec.profile);
    double a = std::max(spec.input.center_us, center - 0.5 * width);
    double b = a + width;

    auto evaluate = [&](double start) {
        SequenceSpec s = spec;
        s.set_raman1_start(start);
        auto r = run_sequence(s, threads);
        return std::make_pair(std::move(s), std::move(r));
    };

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    auto p1 = evaluate(x1);
    auto p2 = evaluate(x2);
    for (int it = 0; it < search.iterations; ++it) {
        if (p1.second.eta_s >= p2.second.eta_s) {
            b = x2;
            x2 = x1;
            p2 = std::move(p1);
            x1 = b - inv_phi * (b - a);
            p1 = evaluate(x1);
        } else {
            a = x1;
            x1 = x2;
            p1 = std::move(p2);
            x2 = a + inv_phi * (b - a);
            p2 = evaluate(x2);
        }
    }
    return p1.second.eta_s >= p2.second.eta_s ? std::move(p1) : std::move(p2);
}

namespace {

// Runs job(i) for i in [0, count) on up to `threads` workers. The first
// exception (lowest index) is rethrown after all workers finish.
template <typename Job>
void parallel_for(std::size_t count, unsigned threads, Job job) {
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

std::vector<OdPoint> sweep_od(const SequenceSpec& base, const std::vector<double>& od_values,
                              unsigned threads, const TimingSearch& search) {
    if (od_values.empty()) throw ValidationError("sweep_od: empty optical-depth list");
    for (std::size_t i = 0; i < od_values.size(); ++i) {
        if (!(od_values[i] >= 0.0)) throw ValidationError("sweep_od: optical depths must be >= 0");
        if (i > 0 && !(od_values[i] > od_values[i - 1]))
            throw ValidationError("sweep_od: optical depths must be sorted ascending");
    }
    std::vector<OdPoint> table(od_values.size());
    const unsigned inner = std::max<unsigned>(1, threads / static_cast<unsigned>(od_values.size()));
    parallel_for(od_values.size(), threads, [&](std::size_t i) {
        SequenceSpec s = base;
        s.profile.d = od_values[i];
        auto [best, result] = optimize_raman_timing(s, search, inner);
        table[i] = {od_values[i], result.eta_s, best.raman1.start_us};
    });
    return table;
}

std::vector<StoragePoint> sweep_storage_time(const SequenceSpec& base,
                                             const std::vector<double>& ts_values,
                                             unsigned threads) {
    if (ts_values.empty()) throw ValidationError("sweep_storage_time: empty storage-time list");
    const double min_sep = base.raman1.duration_us;
    for (double ts : ts_values)
        if (!(ts >= min_sep))
            throw ValidationError("sweep_storage_time: storage times must be >= the Raman duration");
    const double ts_min = *std::min_element(ts_values.begin(), ts_values.end());
    SequenceSpec s = base;
    s.set_storage_time(ts_min);
    const auto r = run_sequence(s, threads);
    const double gamma = base.spin_linewidth_khz.value_or(0.0);
    std::vector<StoragePoint> table;
    table.reserve(ts_values.size());
    for (double ts : ts_values) table.push_back({ts, r.eta_s * spin_dephasing_factor(ts, gamma)});
    return table;
}

}  // namespace holemem
