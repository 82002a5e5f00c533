#include "holemem/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "holemem/csv.hpp"
#include "holemem/errors.hpp"
#include "holemem/units.hpp"

namespace holemem {

std::uint64_t CountHistogram::total() const noexcept {
    std::uint64_t acc = 0;
    for (auto c : counts) acc += c;
    return acc;
}

std::uint64_t CountHistogram::counts_in(const DetectionWindow& window) const {
    std::uint64_t acc = 0;
    for (std::size_t b = 0; b < counts.size(); ++b) {
        const double c = 0.5 * (bin_edges_us[b] + bin_edges_us[b + 1]);
        if (c >= window.lo_us && c <= window.hi_us) acc += counts[b];
    }
    return acc;
}

void CountHistogram::validate() const {
    if (bin_edges_us.size() != counts.size() + 1)
        throw ValidationError("histogram: need bins + 1 edges");
    if (counts.empty()) throw ValidationError("histogram: no bins");
    for (std::size_t i = 1; i < bin_edges_us.size(); ++i)
        if (!(bin_edges_us[i] > bin_edges_us[i - 1]))
            throw ValidationError("histogram: bin edges must increase");
    if (trials == 0) throw ValidationError("histogram: trials must be positive");
    if (!(mu_in >= 0.0)) throw ValidationError("histogram: mu_in must be >= 0");
}

std::vector<double> uniform_bin_edges(double t_start_us, double t_end_us, double bin_width_us) {
    if (!(bin_width_us > 0.0) || !(t_end_us > t_start_us))
        throw ValidationError("histogram: invalid binning");
    const auto n = static_cast<std::size_t>(std::llround((t_end_us - t_start_us) / bin_width_us));
    if (n == 0) throw ValidationError("histogram: invalid binning");
    std::vector<double> edges(n + 1);
    for (std::size_t i = 0; i <= n; ++i) edges[i] = t_start_us + static_cast<double>(i) * bin_width_us;
    return edges;
}

TemporalShape gaussian_shape(double center_us, double fwhm_us, std::size_t samples) {
    if (!(fwhm_us > 0.0) || samples < 2) throw ValidationError("gaussian shape: invalid parameters");
    TemporalShape s;
    const double half = 3.0 * fwhm_us;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = center_us - half + 2.0 * half * static_cast<double>(i) /
                                                static_cast<double>(samples - 1);
        const double x = t - center_us;
        s.times_us.push_back(t);
        s.intensity.push_back(std::exp(-4.0 * units::ln2 * x * x / (fwhm_us * fwhm_us)));
    }
    return s;
}

namespace {

// Integral of the piecewise-linear shape over [a, b].
double shape_mass(const TemporalShape& s, double a, double b) {
    const auto& t = s.times_us;
    const auto& y = s.intensity;
    auto value = [&](double x) {
        if (x <= t.front() || x >= t.back()) return 0.0;
        const auto it = std::upper_bound(t.begin(), t.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - t.begin());
        const double f = (x - t[i - 1]) / (t[i] - t[i - 1]);
        return y[i - 1] + f * (y[i] - y[i - 1]);
    };
    a = std::max(a, t.front());
    b = std::min(b, t.back());
    if (b <= a) return 0.0;
    std::vector<double> nodes{a};
    for (double x : t)
        if (x > a && x < b) nodes.push_back(x);
    nodes.push_back(b);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        acc += 0.5 * (value(nodes[i]) + value(nodes[i + 1])) * (nodes[i + 1] - nodes[i]);
    return acc;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t block_trials = 4096;

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ (stream + 0x632be59bd9b4e019ULL));
}

CountHistogram monte_carlo_counts(const MonteCarloSpec& spec) {
    if (!(spec.signal_mean >= 0.0) || !(spec.noise_mean >= 0.0))
        throw ValidationError("monte carlo: means must be >= 0");
    if (spec.trials == 0) throw ValidationError("monte carlo: trials must be positive");
    if (!(spec.window.width() > 0.0)) throw ValidationError("monte carlo: empty window");

    CountHistogram hist;
    hist.bin_edges_us = spec.bin_edges_us;
    hist.counts.assign(spec.bin_edges_us.size() - 1, 0);
    hist.trials = spec.trials;
    hist.mu_in = spec.mu_in;
    hist.validate();
    const std::size_t nb = hist.bins();

    // per-trial means per bin
    std::vector<double> sig(nb, 0.0);
    if (spec.signal_mean > 0.0) {
        if (spec.shape.times_us.size() < 2 || spec.shape.times_us.size() != spec.shape.intensity.size())
            throw ValidationError("monte carlo: invalid signal shape");
        double in_window = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            sig[b] = shape_mass(spec.shape, hist.bin_edges_us[b], hist.bin_edges_us[b + 1]);
            const double c = 0.5 * (hist.bin_edges_us[b] + hist.bin_edges_us[b + 1]);
            if (c >= spec.window.lo_us && c <= spec.window.hi_us) in_window += sig[b];
        }
        if (!(in_window > 0.0))
            throw ValidationError("monte carlo: signal shape has no weight in the window");
        for (auto& s : sig) s *= spec.signal_mean / in_window;
    }
    const double noise_rate = spec.noise_mean / spec.window.width();
    double sig_total = 0.0;
    for (double s : sig) sig_total += s;
    const double noise_total = noise_rate * (hist.bin_edges_us.back() - hist.bin_edges_us.front());

    std::vector<double> noise_w(nb);
    for (std::size_t b = 0; b < nb; ++b) noise_w[b] = hist.bin_edges_us[b + 1] - hist.bin_edges_us[b];

    const std::uint64_t blocks = (spec.trials + block_trials - 1) / block_trials;
    std::vector<std::vector<std::uint64_t>> partial(blocks, std::vector<std::uint64_t>(nb, 0));

    auto run_block = [&](std::uint64_t blk) {
        std::mt19937_64 rng(derive_seed(spec.seed, blk));
        std::poisson_distribution<std::uint64_t> n_sig(sig_total > 0.0 ? sig_total : 1.0);
        std::poisson_distribution<std::uint64_t> n_noise(noise_total > 0.0 ? noise_total : 1.0);
        std::discrete_distribution<std::size_t> sig_bin(sig.begin(), sig.end());
        std::discrete_distribution<std::size_t> noise_bin(noise_w.begin(), noise_w.end());
        auto& counts = partial[blk];
        const std::uint64_t first = blk * block_trials;
        const std::uint64_t last = std::min(spec.trials, first + block_trials);
        for (std::uint64_t trial = first; trial < last; ++trial) {
            if (sig_total > 0.0)
                for (std::uint64_t k = n_sig(rng); k > 0; --k) ++counts[sig_bin(rng)];
            if (noise_total > 0.0)
                for (std::uint64_t k = n_noise(rng); k > 0; --k) ++counts[noise_bin(rng)];
        }
    };

    const unsigned workers =
        std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(blocks)));
    if (workers == 1) {
        for (std::uint64_t blk = 0; blk < blocks; ++blk) run_block(blk);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::uint64_t blk = w; blk < blocks; blk += workers) run_block(blk);
            });
    }
    for (const auto& p : partial)
        for (std::size_t b = 0; b < nb; ++b) hist.counts[b] += p[b];
    return hist;
}

SnrReport compute_snr(const CountHistogram& signal_hist, const CountHistogram& noise_hist,
                      const DetectionWindow& window) {
    signal_hist.validate();
    noise_hist.validate();
    if (noise_hist.mu_in != 0.0) throw ValidationError("compute_snr: noise histogram needs mu_in = 0");
    if (signal_hist.bin_edges_us != noise_hist.bin_edges_us)
        throw ValidationError("compute_snr: histograms use different binning");

    const double ts = static_cast<double>(signal_hist.trials);
    const double tn = static_cast<double>(noise_hist.trials);
    const double s_counts = static_cast<double>(signal_hist.counts_in(window));
    const double n_counts = static_cast<double>(noise_hist.counts_in(window));

    SnrReport rep;
    rep.window_us = window.width();
    rep.mu_in = signal_hist.mu_in;
    rep.noise_mean = n_counts / tn;
    rep.noise_sigma = std::sqrt(n_counts) / tn;
    const double raw = s_counts / ts;
    const double raw_sigma = std::sqrt(s_counts) / ts;
    rep.signal_mean = raw - rep.noise_mean;
    rep.signal_sigma = std::hypot(raw_sigma, rep.noise_sigma);
    if (n_counts == 0.0) {
        rep.infinite = true;
        rep.snr = std::numeric_limits<double>::infinity();
        rep.snr_sigma = std::numeric_limits<double>::infinity();
        rep.mu1 = 0.0;
        rep.mu1_sigma = 0.0;
        return rep;
    }
    // snr = raw / noise - 1
    rep.snr = rep.signal_mean / rep.noise_mean;
    const double d_raw = 1.0 / rep.noise_mean;
    const double d_noise = raw / (rep.noise_mean * rep.noise_mean);
    rep.snr_sigma = std::hypot(d_raw * raw_sigma, d_noise * rep.noise_sigma);
    if (rep.snr > 0.0) {
        rep.mu1 = rep.mu_in / rep.snr;
        rep.mu1_sigma = rep.mu1 * rep.snr_sigma / rep.snr;
    }
    return rep;
}

Mu1Fit fit_mu1(std::span<const SnrReport> reports) {
    std::vector<const SnrReport*> used;
    for (const auto& r : reports)
        if (r.mu_in > 0.0 && std::isfinite(r.snr)) used.push_back(&r);
    if (used.empty()) throw ValidationError("fit_mu1: no signal points (need mu_in > 0)");
    bool weighted = true;
    for (const auto* r : used) weighted = weighted && r->snr_sigma > 0.0 && std::isfinite(r->snr_sigma);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto* r : used) {
        const double w = weighted ? 1.0 / (r->snr_sigma * r->snr_sigma) : 1.0;
        sxx += w * r->mu_in * r->mu_in;
        sxy += w * r->mu_in * r->snr;
        syy += w * r->snr * r->snr;
    }
    if (!(sxy > 0.0)) throw NumericalError("fit_mu1: singular fit (non-positive SNR slope)");

    Mu1Fit fit;
    fit.points = used.size();
    fit.slope = sxy / sxx;
    if (weighted) {
        fit.slope_sigma = 1.0 / std::sqrt(sxx);
    } else if (used.size() > 1) {
        const double rss = std::max(0.0, syy - fit.slope * sxy);
        fit.slope_sigma = std::sqrt(rss / static_cast<double>(used.size() - 1) / sxx);
    }
    fit.mu1 = 1.0 / fit.slope;
    fit.mu1_sigma = fit.slope_sigma / (fit.slope * fit.slope);
    fit.mu1_ci95 = 1.959963984540054 * fit.mu1_sigma;
    return fit;
}

std::string format_histogram(const CountHistogram& hist) {
    std::ostringstream out;
    out << "# trials=" << hist.trials << '\n';
    out << "# mu_in=" << csv::format_number(hist.mu_in) << '\n';
    out << "# bin_end_us=" << csv::format_number(hist.bin_edges_us.back()) << '\n';
    out << "bin_start_us,counts\n";
    for (std::size_t b = 0; b < hist.bins(); ++b)
        out << csv::format_number(hist.bin_edges_us[b]) << ',' << hist.counts[b] << '\n';
    return out.str();
}

CountHistogram parse_histogram(const std::string& text) {
    const auto table = csv::parse(text, {"bin_start_us", "counts"});
    CountHistogram h;
    std::optional<double> end;
    for (const auto& c : table.comments) {
        const auto eq = c.find('=');
        if (eq == std::string::npos) continue;
        const auto key = c.substr(0, eq);
        const auto value = c.substr(eq + 1);
        try {
            if (key == "trials") h.trials = std::stoull(value);
            else if (key == "mu_in") h.mu_in = std::stod(value);
            else if (key == "bin_end_us") end = std::stod(value);
        } catch (const std::exception&) {
            throw ValidationError("histogram: bad header comment '" + c + "'");
        }
    }
    for (const auto& row : table.rows) {
        if (row[1] < 0.0 || row[1] != std::floor(row[1]))
            throw ValidationError("histogram: counts must be non-negative integers");
        h.bin_edges_us.push_back(row[0]);
        h.counts.push_back(static_cast<std::uint64_t>(row[1]));
    }
    if (h.counts.empty()) throw ValidationError("histogram: no rows");
    if (!end) {
        if (h.bin_edges_us.size() < 2) throw ValidationError("histogram: cannot infer last bin edge");
        end = h.bin_edges_us.back() + (h.bin_edges_us.back() - h.bin_edges_us[h.bin_edges_us.size() - 2]);
    }
    h.bin_edges_us.push_back(*end);
    h.validate();
    return h;
}

}  // namespace holemem
