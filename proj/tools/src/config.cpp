#include "holemem_cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "holemem/csv.hpp"
#include "holemem/photon_stats.hpp"
#include "holemem/physical_params.hpp"
#include "holemem/units.hpp"

namespace holemem::cli {

namespace {

using K = ValueKind;

const std::vector<KeySpec> keys = {
    {"run.seed", "-", K::integer, "1", "seed for every random stream"},

    {"input.fwhm_us", "us", K::real, "3", "input pulse intensity FWHM"},
    {"input.center_us", "us", K::real, "7", "input pulse peak time"},
    {"input.peak_rad_per_us", "rad/us", K::real, "0.001", "input peak Rabi amplitude"},

    {"raman.start_us", "us", K::real, "9.25", "start of the write pulse"},
    {"raman.duration_us", "us", K::real, "0.5", "Raman pulse duration, ramps included"},
    {"raman.rise_us", "us", K::real, "0.05", "raised-cosine ramp width"},
    {"raman.area1_pi", "pi rad", K::real, "0.85", "write pulse area"},
    {"raman.area2_pi", "pi rad", K::real, "0.85", "read pulse area"},
    {"raman.optimize_timing", "-", K::boolean, "false", "search the write-pulse start for simulate"},
    {"raman.search_iterations", "-", K::integer, "10", "golden-section iterations"},
    {"raman.search_width_fwhm", "input FWHM", K::real, "1", "search interval width"},

    {"storage.ts_us", "us", K::real, "8", "delay between the Raman pulses"},
    {"storage.retrieval_span_us", "us", K::real, "12", "retrieval window length after the read pulse"},
    {"storage.spin_linewidth_khz", "kHz", K::real, "25.6", "inhomogeneous spin FWHM for the decay factor"},

    {"hole.delta0_khz", "kHz", K::real, "230", "hole width"},
    {"hole.n", "-", K::real, "3", "hyperlorentzian exponent"},
    {"hole.od", "-", K::real, "8.7", "optical depth on the reference transition"},
    {"hole.strength_ratio", "-", K::real, "1", "oscillator-strength ratio storage/reference"},
    {"hole.feature_width_mhz", "MHz", K::real, "2.1", "width of the absorbing feature"},

    {"crystal.length_mm", "mm", K::real, "5", "crystal length"},

    {"grid.t_start_us", "us", K::real, "0", "first time sample"},
    {"grid.dt_us", "us", K::real, "0.01", "time step"},
    {"grid.n_z", "-", K::integer, "100", "number of z slices"},
    {"grid.n_detuning", "-", K::integer, "1200", "number of detuning bins"},
    {"grid.detuning_span_mhz", "MHz", K::real, "6", "total detuning span"},
    {"grid.mode", "-", K::choice, "perturbative", "atomic equations", {"perturbative", "full"}},

    {"sweep.od_values", "-", K::real_list, "2, 4, 6, 8, 10, 12", "optical depths for sweep-od"},
    {"sweep.ts_values_us", "us", K::real_list, "2, 5, 10, 15, 20, 25, 30, 40",
     "storage times for sweep-ts"},

    {"fit.kind", "-", K::choice, "hole", "model fitted by the fit command", {"hole", "decay"}},
    {"fit.trace_path", "path", K::text, "", "input data for the fit command"},

    {"photon.mu_values", "photons", K::real_list, "0.25, 0.5, 1, 2", "mean input photon numbers"},
    {"photon.trials_per_preparation", "-", K::integer, "1000", "trials per memory preparation"},
    {"photon.preparations", "-", K::integer, "100", "memory preparations per mu"},
    {"photon.signal_per_mu", "photons", K::real, "0.297", "detected signal per unit mu in the window"},
    {"photon.use_chain", "-", K::boolean, "false",
     "derive signal_per_mu as chain_eta_s * path_transmission * detector_efficiency"},
    {"photon.chain_eta_s", "-", K::real, "0.39", "memory efficiency in the detection chain"},
    {"photon.path_transmission", "-", K::real, "0.15", "optical path transmission"},
    {"photon.detector_efficiency", "-", K::real, "1", "detector efficiency"},
    {"photon.noise_per_window", "photons", K::real, "0.009", "noise counts per trial in the window"},
    {"photon.window_start_us", "us", K::real, "0", "detection window start"},
    {"photon.window_us", "us", K::real, "4", "detection window length"},
    {"photon.pulse_fwhm_us", "us", K::real, "3", "retrieved pulse FWHM, centred in the window"},
    {"photon.hist_start_us", "us", K::real, "-4", "histogram start"},
    {"photon.hist_end_us", "us", K::real, "12", "histogram end"},
    {"photon.hist_bin_us", "us", K::real, "0.1", "histogram bin width"},

    {"oracle.refine_levels", "-", K::integer, "2", "grid levels, each doubling n_z and n_detuning"},
    {"oracle.cw_detunings_khz", "kHz", K::real_list, "0, 60, 115, 160", "cw probe detunings"},

    {"output.snapshots", "-", K::boolean, "false", "write the (t, z) field map from simulate"},
};

const KeySpec& lookup(std::string_view key) {
    for (const auto& k : keys)
        if (k.key == key) return k;
    throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::optional<double> to_real(std::string_view s) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::vector<double> split_reals(std::string_view text, std::string_view key) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = text.find(',', pos);
        const auto item = trim(text.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
        const auto v = to_real(item);
        if (!v) throw ConfigError(std::string(key) + ": '" + std::string(item) + "' is not a number");
        out.push_back(*v);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string canonical(const KeySpec& spec, std::string_view value) {
    const std::string name(spec.key);
    value = trim(value);
    switch (spec.kind) {
        case K::real: {
            const auto v = to_real(value);
            if (!v) throw ConfigError(name + ": expected a number, got '" + std::string(value) + "'");
            return csv::format_number(*v);
        }
        case K::integer: {
            std::int64_t v = 0;
            const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc() || p != value.data() + value.size())
                throw ConfigError(name + ": expected an integer, got '" + std::string(value) + "'");
            return std::to_string(v);
        }
        case K::boolean:
            if (value == "true" || value == "false") return std::string(value);
            throw ConfigError(name + ": expected true or false, got '" + std::string(value) + "'");
        case K::text:
            return std::string(value);
        case K::real_list: {
            std::string out;
            for (double v : split_reals(value, spec.key)) {
                if (!out.empty()) out += ", ";
                out += csv::format_number(v);
            }
            return out;
        }
        case K::choice:
            for (auto c : spec.choices)
                if (c == value) return std::string(value);
            throw ConfigError(name + ": '" + std::string(value) + "' is not a valid choice");
    }
    return std::string(value);
}

}  // namespace

std::span<const KeySpec> schema() { return keys; }

Config::Config() {
    for (const auto& k : keys) values_.emplace(std::string(k.key), canonical(k, k.default_value));
}

void Config::set(std::string_view key, std::string_view value) {
    const auto& spec = lookup(key);
    values_.insert_or_assign(std::string(key), canonical(spec, value));
}

Config Config::parse(std::string_view text, std::string_view source) {
    Config cfg;
    std::map<std::string, std::size_t, std::less<>> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto line = trim(text.substr(pos, nl == std::string_view::npos ? nl : nl - pos));
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        if (const auto it = seen.find(key); it != seen.end())
            throw ConfigError(where + "duplicate key '" + std::string(key) + "' (first on line " +
                              std::to_string(it->second) + ")");
        try {
            cfg.set(key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
        seen.emplace(std::string(key), line_no);
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

std::string Config::dump() const {
    std::string out;
    std::string_view section;
    for (const auto& k : keys) {
        const auto sec = k.key.substr(0, k.key.find('.'));
        if (sec != section) {
            if (!section.empty()) out += '\n';
            section = sec;
        }
        const auto& v = values_.at(std::string(k.key));
        out += std::string(k.key) + (v.empty() ? " =" : " = " + v) + '\n';
    }
    return out;
}

const std::string& Config::raw(std::string_view key, ValueKind kind) const {
    const auto& spec = lookup(key);
    if (spec.kind != kind && !(kind == K::text && spec.kind == K::choice))
        throw std::logic_error("config key '" + std::string(key) + "' read with the wrong type");
    return values_.find(key)->second;
}

double Config::real(std::string_view key) const { return *to_real(raw(key, K::real)); }

std::int64_t Config::integer(std::string_view key) const { return std::stoll(raw(key, K::integer)); }

bool Config::flag(std::string_view key) const { return raw(key, K::boolean) == "true"; }

const std::string& Config::text(std::string_view key) const { return raw(key, K::text); }

std::vector<double> Config::reals(std::string_view key) const {
    return split_reals(raw(key, K::real_list), key);
}

std::string describe_keys() {
    std::ostringstream out;
    out << "Config keys (section.key = value):\n";
    for (const auto& k : keys) {
        out << "  " << k.key;
        for (std::size_t i = k.key.size(); i < 32; ++i) out << ' ';
        out << '[' << k.unit << "] " << k.help;
        if (!k.choices.empty()) {
            out << " (";
            for (std::size_t i = 0; i < k.choices.size(); ++i) out << (i ? "|" : "") << k.choices[i];
            out << ')';
        }
        out << "; default: " << (k.default_value.empty() ? "(empty)" : k.default_value) << '\n';
    }
    return out.str();
}

namespace {

std::uint64_t positive_count(const Config& c, std::string_view key) {
    const auto v = c.integer(key);
    if (v < 1) throw ConfigError(std::string(key) + " must be >= 1");
    return static_cast<std::uint64_t>(v);
}

}  // namespace

RunSettings interpret(const Config& c) {
    RunSettings r;
    try {
        r.seed = static_cast<std::uint64_t>(c.integer("run.seed"));

        SequenceSpec& s = r.sequence;
        s.input = {c.real("input.fwhm_us"), c.real("input.center_us"), c.real("input.peak_rad_per_us")};
        const double start = c.real("raman.start_us");
        const double duration = c.real("raman.duration_us");
        const double rise = c.real("raman.rise_us");
        if (!(rise >= 0.0) || !(duration > 2.0 * rise))
            throw ConfigError("raman.duration_us must exceed 2 * raman.rise_us >= 0");
        s.raman1 = {start, duration, c.real("raman.area1_pi") * units::pi, rise};
        s.raman2 = {start, duration, c.real("raman.area2_pi") * units::pi, rise};
        s.set_storage_time(c.real("storage.ts_us"));
        s.set_retrieval_span(c.real("storage.retrieval_span_us"));
        const double gamma = c.real("storage.spin_linewidth_khz");
        if (!(gamma >= 0.0)) throw ConfigError("storage.spin_linewidth_khz must be >= 0");
        s.spin_linewidth_khz = gamma;

        s.profile.delta0_khz = c.real("hole.delta0_khz");
        s.profile.n = c.real("hole.n");
        s.profile.d = extrapolate_od(c.real("hole.od"), c.real("hole.strength_ratio"));
        s.profile.feature_width_mhz = c.real("hole.feature_width_mhz");

        PhysicalParams phys{c.real("crystal.length_mm"), s.profile.d, s.profile.feature_width_mhz};
        phys.validate();

        s.t_start_us = c.real("grid.t_start_us");
        s.dt_us = c.real("grid.dt_us");
        s.n_z = positive_count(c, "grid.n_z");
        s.n_detuning = positive_count(c, "grid.n_detuning");
        s.detuning_span_mhz = c.real("grid.detuning_span_mhz");
        if (!(s.detuning_span_mhz > 0.0)) throw ConfigError("grid.detuning_span_mhz must be > 0");
        s.mode = c.text("grid.mode") == "full" ? Mode::full : Mode::perturbative;
        s.validate();
        (void)s.time_grid();

        r.optimize_timing = c.flag("raman.optimize_timing");
        r.search.iterations = static_cast<int>(positive_count(c, "raman.search_iterations"));
        r.search.width_in_fwhm = c.real("raman.search_width_fwhm");
        if (!(r.search.width_in_fwhm > 0.0)) throw ConfigError("raman.search_width_fwhm must be > 0");

        r.od_values = c.reals("sweep.od_values");
        r.ts_values_us = c.reals("sweep.ts_values_us");
        r.fit_kind = c.text("fit.kind");
        r.fit_trace_path = c.text("fit.trace_path");

        auto& p = r.photon;
        p.mu_values = c.reals("photon.mu_values");
        for (double mu : p.mu_values)
            if (!(mu >= 0.0)) throw ConfigError("photon.mu_values must be >= 0");
        p.trials_per_preparation = positive_count(c, "photon.trials_per_preparation");
        p.preparations = positive_count(c, "photon.preparations");
        p.signal_per_mu = c.flag("photon.use_chain")
                              ? c.real("photon.chain_eta_s") * c.real("photon.path_transmission") *
                                    c.real("photon.detector_efficiency")
                              : c.real("photon.signal_per_mu");
        if (!(p.signal_per_mu >= 0.0)) throw ConfigError("photon signal per mu must be >= 0");
        p.noise_per_window = c.real("photon.noise_per_window");
        if (!(p.noise_per_window >= 0.0)) throw ConfigError("photon.noise_per_window must be >= 0");
        p.window_start_us = c.real("photon.window_start_us");
        p.window_us = c.real("photon.window_us");
        if (!(p.window_us > 0.0)) throw ConfigError("photon.window_us must be > 0");
        p.pulse_fwhm_us = c.real("photon.pulse_fwhm_us");
        if (!(p.pulse_fwhm_us > 0.0)) throw ConfigError("photon.pulse_fwhm_us must be > 0");
        p.hist_start_us = c.real("photon.hist_start_us");
        p.hist_end_us = c.real("photon.hist_end_us");
        p.hist_bin_us = c.real("photon.hist_bin_us");
        (void)uniform_bin_edges(p.hist_start_us, p.hist_end_us, p.hist_bin_us);
        if (p.window_start_us < p.hist_start_us || p.window_start_us + p.window_us > p.hist_end_us)
            throw ConfigError("photon detection window must lie inside the histogram");

        r.oracle_levels = static_cast<int>(positive_count(c, "oracle.refine_levels"));
        r.cw_detunings_khz = c.reals("oracle.cw_detunings_khz");
        r.snapshots = c.flag("output.snapshots");
    } catch (const ConfigError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    return r;
}

}  // namespace holemem::cli
