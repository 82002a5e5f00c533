#pragma once

#include <optional>
#include <vector>

#include "holemem/atomic_dynamics.hpp"
#include "holemem/envelope.hpp"
#include "holemem/hole_profile.hpp"
#include "holemem/propagation.hpp"
#include "holemem/units.hpp"

namespace holemem {

struct InputPulse {
    double fwhm_us = 3.0;
    double center_us = 7.0;
    double peak = 1e-3;  ///< peak Rabi amplitude (rad/us); irrelevant in perturbative mode
};

struct RamanPulse {
    double start_us = 9.25;
    double duration_us = 0.5;
    double area_rad = 0.85 * units::pi;
    double rise_us = 0.05;

    double end_us() const noexcept { return start_us + duration_us; }
};

/// Write / store / read sequence: a Gaussian input slowed in the hole, a
/// Raman pulse mapping the optical excitation onto the spin level, and a
/// second one T_s later mapping it back.
struct SequenceSpec {
    InputPulse input;
    RamanPulse raman1;
    RamanPulse raman2{17.25};
    HoleProfile profile;

    double t_start_us = 0.0;
    double dt_us = 0.01;
    std::size_t n_z = 100;
    std::size_t n_detuning = 1200;
    double detuning_span_mhz = 6.0;
    Mode mode = Mode::perturbative;

    /// Efficiency is the output energy inside [window_lo, window_hi] over the
    /// input energy. The time grid ends at window_hi.
    double window_lo_us = 17.75;
    double window_hi_us = 29.75;

    /// Inhomogeneous spin linewidth (FWHM) for the decay-weighted efficiency.
    std::optional<double> spin_linewidth_khz;

    double storage_time() const noexcept { return raman2.start_us - raman1.start_us; }

    /// Moves raman2 to raman1.start + ts and shifts the retrieval window with it.
    void set_storage_time(double ts_us);
    /// Moves raman1 (and raman2, window) keeping the storage time.
    void set_raman1_start(double start_us);
    /// Window [raman2 end, raman2 end + span].
    void set_retrieval_span(double span_us);
    double retrieval_span() const noexcept { return window_hi_us - window_lo_us; }

    TimeGrid time_grid() const { return TimeGrid(t_start_us, window_hi_us, dt_us); }
    PropagationGrids grids() const;

    /// Throws ValidationError: raman1 must start at or after the input peak,
    /// raman2 must start after raman1 ends, the window must open after raman2 ends.
    void validate() const;
};

/// Storage sequence with the defaults used throughout: 3 us input, hole
/// (230 kHz, n = 3, d = 8.7), 0.5 us Raman pulses of area 0.85 pi, T_s = 8 us.
SequenceSpec default_sequence();

struct StorageResult {
    ComplexEnvelope input;
    ComplexEnvelope raman;
    ComplexEnvelope output;
    double input_energy = 0.0;
    double eta_s = 0.0;                  ///< retrieved / input energy in the window
    std::optional<double> eta_s_decayed{};///< eta_s * D(T_s) when a spin linewidth is set
    double leaked = 0.0;                 ///< output before raman1 starts
    double between = 0.0;                ///< output between raman1 end and raman2 start
    double spin_after_raman1 = 0.0;      ///< spin excitation at raman1 end, fraction of input
    double residual_excitation = 0.0;    ///< excitation left in the medium at the end
    /// (total output + residual excitation) / input; 1 in the continuum limit
    double energy_balance = 0.0;
};

StorageResult run_sequence(const SequenceSpec& spec, unsigned threads = 1);

struct SlowLightResult {
    ComplexEnvelope output;
    double delay_us = 0.0;         ///< peak-intensity delay
    double transmission = 0.0;     ///< output / input energy
    double max_stored_time_us = 0.0;  ///< time of maximal excitation inside the medium
};

/// Same sequence with both Raman pulses off.
SlowLightResult run_slow_light(const SequenceSpec& spec, unsigned threads = 1);

struct OdPoint {
    double d = 0.0;
    double eta_s = 0.0;
    double raman1_start_us = 0.0;
};

struct TimingSearch {
    int iterations = 10;
    /// Search interval width in units of the input FWHM.
    double width_in_fwhm = 1.0;
};

/// Golden-section search of raman1.start maximizing eta_s, over one input
/// width centered on input center + group_delay / 2 (never before the input
/// peak). Returns the spec at the optimum and its result.
std::pair<SequenceSpec, StorageResult> optimize_raman_timing(const SequenceSpec& spec,
                                                             const TimingSearch& search = {},
                                                             unsigned threads = 1);

/// For each optical depth, re-optimizes the Raman timing and records eta_s.
/// Independent depths run on up to `threads` workers; the table follows the
/// input order.
std::vector<OdPoint> sweep_od(const SequenceSpec& base, const std::vector<double>& od_values,
                              unsigned threads = 1, const TimingSearch& search = {});

struct StoragePoint {
    double ts_us = 0.0;
    double eta_s = 0.0;  ///< decay-weighted efficiency
};

/// eta_s at the shortest storage time times D(T_s) for each T_s. Propagation
/// carries no spin decoherence, so one run serves the whole table.
std::vector<StoragePoint> sweep_storage_time(const SequenceSpec& base,
                                             const std::vector<double>& ts_values,
                                             unsigned threads = 1);

}  // namespace holemem
