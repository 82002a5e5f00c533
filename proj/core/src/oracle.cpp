#include "holemem/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "holemem/errors.hpp"
#include "holemem/units.hpp"

namespace holemem {

namespace {

using boost::math::quadrature::gauss_kronrod;

// Hyperlorentzian without the feature cutoff, x in rad/us.
double core_shape(double x, double half_width, double n) {
    const double u = std::abs(x / half_width);
    if (u == 0.0) return 0.0;
    const double p = std::pow(u, n);
    return p / (1.0 + p);
}

double integrate(const auto& f, std::vector<double> breaks) {
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        acc += gauss_kronrod<double, 31>::integrate(f, breaks[i], breaks[i + 1], 15, 1e-12);
    return acc;
}

}  // namespace

double hilbert_g(double omega, const HoleProfile& profile) {
    // odd in omega since g is even
    if (omega < 0.0) return -hilbert_g(-omega, profile);
    const double a = units::mhz_to_angular(0.5 * profile.feature_width_mhz);
    const double hw = 0.5 * units::khz_to_angular(profile.delta0_khz);
    const double n = profile.n;
    if (omega == a) return INFINITY;
    // Subtract g at the point of the feature closest to omega; the remainder
    // is regular at the pole and the subtracted part integrates to a log.
    const double anchor = std::min(omega, a);
    const double g0 = core_shape(anchor, hw, n);
    std::vector<double> breaks{-a, 0.0, a};
    if (omega < a) {
        breaks.push_back(omega);
        breaks.push_back(-omega);
    }
    auto f = [&](double x) {
        if (x == omega) return 0.0;
        return (core_shape(x, hw, n) - g0) / (omega - x);
    };
    const double pv = integrate(f, breaks);
    return (pv + g0 * std::log(std::abs((a + omega) / (a - omega)))) / units::pi;
}

std::vector<complex> linear_transfer_oracle(const HoleProfile& profile,
                                            std::span<const double> omega_axis) {
    profile.validate();
    std::vector<complex> out(omega_axis.size());
    for (std::size_t m = 0; m < omega_axis.size(); ++m) {
        const double w = omega_axis[m];
        const double gw = g_angular(w, profile);
        const double hg = hilbert_g(w, profile);
        out[m] = std::exp(-0.5 * profile.d * complex(gw, hg));
    }
    return out;
}

double group_delay(const HoleProfile& profile, double omega) {
    const double h = 1e-3 * units::khz_to_angular(profile.delta0_khz);
    const double slope = (hilbert_g(omega + h, profile) - hilbert_g(omega - h, profile)) / (2.0 * h);
    return -0.5 * profile.d * slope;
}

std::vector<double> default_omega_axis(const TimeGrid& grid, int padding) {
    if (padding < 1) throw ValidationError("omega axis: padding must be >= 1");
    const std::size_t n = grid.count() * static_cast<std::size_t>(padding);
    const double dw = units::two_pi / (static_cast<double>(n) * grid.dt());
    std::vector<double> axis(n);
    const double first = -static_cast<double>(n / 2) * dw;
    for (std::size_t m = 0; m < n; ++m) axis[m] = first + static_cast<double>(m) * dw;
    return axis;
}

ComplexEnvelope predict_output(const ComplexEnvelope& input, const HoleProfile& profile,
                               std::span<const double> omega_axis) {
    if (omega_axis.size() < 2) throw ValidationError("oracle: omega axis needs >= 2 points");
    const double dw = omega_axis[1] - omega_axis[0];
    for (std::size_t m = 1; m < omega_axis.size(); ++m)
        if (std::abs(omega_axis[m] - omega_axis[m - 1] - dw) > 1e-9 * std::abs(dw))
            throw ValidationError("oracle: omega axis must be uniform");
    const auto& grid = input.grid();
    const std::size_t nt = grid.count();
    const double dt = grid.dt();

    // X(w) = sum_n x_n exp(i w t_n) dt, evaluated with a rotating phasor
    std::vector<complex> spectrum(omega_axis.size());
    for (std::size_t m = 0; m < omega_axis.size(); ++m) {
        const double w = omega_axis[m];
        const complex step = std::polar(1.0, w * dt);
        complex phase = std::polar(1.0, w * grid.t_start());
        complex acc{};
        for (std::size_t i = 0; i < nt; ++i) {
            acc += input[i] * phase;
            if ((i & 63) == 63) phase = std::polar(1.0, w * grid.time(i + 1));
            else phase *= step;
        }
        spectrum[m] = acc * dt;
    }

    double e_time = 0.0;
    for (std::size_t i = 0; i < nt; ++i) e_time += std::norm(input[i]) * dt;
    double e_freq = 0.0;
    for (const auto& x : spectrum) e_freq += std::norm(x);
    e_freq *= std::abs(dw) / units::two_pi;
    if (e_time > 0.0 && e_freq < (1.0 - 1e-6) * e_time)
        throw ValidationError("oracle: omega axis holds only " + std::to_string(e_freq / e_time) +
                              " of the input energy (need 1 - 1e-6)");

    const auto transfer = linear_transfer_oracle(profile, omega_axis);
    for (std::size_t m = 0; m < spectrum.size(); ++m) spectrum[m] *= transfer[m];

    std::vector<complex> out(nt);
    const double norm = std::abs(dw) / units::two_pi;
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = grid.time(i);
        const complex step = std::polar(1.0, -dw * t);
        complex phase = std::polar(1.0, -omega_axis[0] * t);
        complex acc{};
        for (std::size_t m = 0; m < spectrum.size(); ++m) {
            acc += spectrum[m] * phase;
            if ((m & 63) == 63) phase = std::polar(1.0, -omega_axis[m + 1 < spectrum.size() ? m + 1 : m] * t);
            else phase *= step;
        }
        out[i] = acc * norm;
    }
    return ComplexEnvelope(grid, std::move(out));
}

double peak_time(const ComplexEnvelope& env) {
    const auto s = env.samples();
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (std::norm(s[i]) > std::norm(s[best])) best = i;
    const double t = env.grid().time(best);
    if (best == 0 || best + 1 >= s.size()) return t;
    const double ym = std::norm(s[best - 1]);
    const double y0 = std::norm(s[best]);
    const double yp = std::norm(s[best + 1]);
    const double denom = ym - 2.0 * y0 + yp;
    if (denom >= 0.0) return t;
    return t + 0.5 * (ym - yp) / denom * env.grid().dt();
}

OracleDiscrepancy compare_oracle(const ComplexEnvelope& input, const HoleProfile& profile,
                                 const PropagationGrids& grids, const PropagationOptions& options) {
    const ComplexEnvelope no_raman(input.grid());
    PropagationOptions opts = options;
    opts.mode = Mode::perturbative;
    const auto prop = propagate(input, no_raman, profile, grids, opts);
    const auto predicted = predict_output(input, profile, default_omega_axis(input.grid()));

    OracleDiscrepancy rep;
    double num = 0.0, den = 0.0, max_dev = 0.0, max_ref = 0.0;
    for (std::size_t i = 0; i < input.size(); ++i) {
        const double dev = std::abs(prop.output[i] - predicted[i]);
        num += dev * dev;
        den += std::norm(predicted[i]);
        max_dev = std::max(max_dev, dev);
        max_ref = std::max(max_ref, std::abs(predicted[i]));
    }
    rep.relative_rms = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    rep.max_deviation = max_ref > 0.0 ? max_dev / max_ref : max_dev;
    const double t_in = peak_time(input);
    rep.delay_propagated = peak_time(prop.output) - t_in;
    rep.delay_oracle = peak_time(predicted) - t_in;
    return rep;
}

double cw_transmission(const HoleProfile& profile, const CwProbe& probe,
                       const PropagationGrids& grids, const PropagationOptions& options) {
    if (!(probe.ramp_us >= 0.0) || !(probe.average_us > 0.0) ||
        !(probe.duration_us > probe.ramp_us + probe.average_us))
        throw ValidationError("cw probe: duration must exceed ramp + averaging span");
    const TimeGrid grid(0.0, probe.duration_us, probe.dt_us);
    const double w = units::khz_to_angular(probe.detuning_khz);
    std::vector<complex> samples(grid.count());
    for (std::size_t i = 0; i < grid.count(); ++i) {
        const double t = grid.time(i);
        const double ramp =
            t >= probe.ramp_us ? 1.0 : 0.5 * (1.0 - std::cos(units::pi * t / probe.ramp_us));
        samples[i] = probe.amplitude * ramp * std::polar(1.0, -w * t);
    }
    const ComplexEnvelope input(grid, std::move(samples));
    const ComplexEnvelope raman(grid);
    const auto out = propagate(input, raman, profile, grids, options).output;
    const double from = probe.duration_us - probe.average_us;
    return window_energy(out, from, probe.duration_us) / window_energy(input, from, probe.duration_us);
}

}  // namespace holemem
