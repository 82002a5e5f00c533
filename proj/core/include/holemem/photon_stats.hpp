#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace holemem {

/// Detection window [lo, hi] in us.
struct DetectionWindow {
    double lo_us = 0.0;
    double hi_us = 4.0;
    double width() const noexcept { return hi_us - lo_us; }
};

/// Photon-arrival histogram accumulated over `trials` storage attempts.
struct CountHistogram {
    std::vector<double> bin_edges_us;  ///< bins + 1 edges
    std::vector<std::uint64_t> counts;
    std::uint64_t trials = 0;
    double mu_in = 0.0;

    std::size_t bins() const noexcept { return counts.size(); }
    std::uint64_t total() const noexcept;
    /// Counts in bins whose centre lies inside the window.
    std::uint64_t counts_in(const DetectionWindow& window) const;
    void validate() const;
};

/// Uniform binning of [t_start, t_end].
std::vector<double> uniform_bin_edges(double t_start_us, double t_end_us, double bin_width_us);

/// Temporal profile of the retrieved pulse, linear between samples.
struct TemporalShape {
    std::vector<double> times_us;
    std::vector<double> intensity;
};

TemporalShape gaussian_shape(double center_us, double fwhm_us, std::size_t samples = 401);

struct MonteCarloSpec {
    double signal_mean = 0.0;   ///< mean detected signal photons per trial inside `window`
    double noise_mean = 0.0;    ///< mean noise counts per trial inside `window`
    std::uint64_t trials = 1000;
    DetectionWindow window;
    std::vector<double> bin_edges_us = uniform_bin_edges(-4.0, 12.0, 0.1);
    TemporalShape shape = gaussian_shape(2.0, 3.0);
    double mu_in = 0.0;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

/// Poisson-distributed detections per trial. Signal counts follow `shape`
/// (scaled so the in-window mean is signal_mean), noise is white over the
/// histogram span with rate noise_mean / window width. Trials are generated
/// in fixed-size blocks with per-block derived seeds, so the histogram is
/// identical for any thread count.
CountHistogram monte_carlo_counts(const MonteCarloSpec& spec);

/// Independent seed for sub-stream `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

struct SnrReport {
    double snr = 0.0;
    double snr_sigma = 0.0;
    bool infinite = false;       ///< no noise counts in the window
    double signal_mean = 0.0;    ///< noise-subtracted signal photons per trial
    double signal_sigma = 0.0;
    double noise_mean = 0.0;     ///< noise photons per trial
    double noise_sigma = 0.0;
    double window_us = 0.0;
    double mu_in = 0.0;
    double mu1 = 0.0;            ///< mu_in / snr
    double mu1_sigma = 0.0;
};

/// Noise-subtracted SNR in `window` with Poisson error propagation. The noise
/// histogram must have mu_in = 0 and the same binning.
SnrReport compute_snr(const CountHistogram& signal_hist, const CountHistogram& noise_hist,
                      const DetectionWindow& window);

struct Mu1Fit {
    double mu1 = 0.0;
    double mu1_sigma = 0.0;
    double slope = 0.0;        ///< d SNR / d mu_in
    double slope_sigma = 0.0;
    double mu1_ci95 = 0.0;     ///< half-width of the 95% interval on mu1
    std::size_t points = 0;
};

/// Weighted least-squares line SNR = mu_in / mu1 through the origin, using
/// every report with mu_in > 0 and a finite SNR. Weights are 1/snr_sigma^2
/// when all sigmas are positive, uniform otherwise.
Mu1Fit fit_mu1(std::span<const SnrReport> reports);

/// CSV `bin_start_us,counts` with `# trials=` / `# mu_in=` header comments.
std::string format_histogram(const CountHistogram& hist);
CountHistogram parse_histogram(const std::string& text);

}  // namespace holemem
