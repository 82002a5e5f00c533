#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "holemem/errors.hpp"
#include "holemem/protocol.hpp"

namespace holemem::cli {

/// Bad config text, unknown key or out-of-range value (exit code 2).
class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

enum class ValueKind { real, integer, boolean, text, real_list, choice };

struct KeySpec {
    std::string_view key;  ///< `section.name_unit`
    std::string_view unit;
    ValueKind kind;
    std::string_view default_value;
    std::string_view help;
    std::vector<std::string_view> choices = {};
};

/// Every recognised key, in dump order.
std::span<const KeySpec> schema();

/// Flat `section.key = value` document. Values are stored in canonical text
/// form, so dump() after load() is a fixed point.
class Config {
public:
    Config();  ///< all defaults

    static Config parse(std::string_view text, std::string_view source = "<config>");
    static Config load(const std::filesystem::path& path);

    void set(std::string_view key, std::string_view value);
    std::string dump() const;

    double real(std::string_view key) const;
    std::int64_t integer(std::string_view key) const;
    bool flag(std::string_view key) const;
    const std::string& text(std::string_view key) const;
    std::vector<double> reals(std::string_view key) const;

    friend bool operator==(const Config&, const Config&) = default;

private:
    const std::string& raw(std::string_view key, ValueKind kind) const;
    std::map<std::string, std::string, std::less<>> values_;
};

/// Key table for --help: key, unit, default, description.
std::string describe_keys();

struct PhotonSettings {
    std::vector<double> mu_values;
    std::uint64_t trials_per_preparation = 1000;
    std::uint64_t preparations = 1;
    double signal_per_mu = 0.0;      ///< detected photons in the window per unit mu_in
    double noise_per_window = 0.0;
    double window_start_us = 0.0;
    double window_us = 4.0;
    double pulse_fwhm_us = 3.0;
    double hist_start_us = -4.0;
    double hist_end_us = 12.0;
    double hist_bin_us = 0.1;
};

/// Physical interpretation of a Config, validated by the owning modules.
struct RunSettings {
    SequenceSpec sequence;
    bool optimize_timing = false;
    TimingSearch search;
    std::vector<double> od_values;
    std::vector<double> ts_values_us;
    std::string fit_kind;
    std::string fit_trace_path;
    PhotonSettings photon;
    int oracle_levels = 2;
    std::vector<double> cw_detunings_khz;
    bool snapshots = false;
    std::uint64_t seed = 1;
};

/// Throws ConfigError if any value fails its module's invariants.
RunSettings interpret(const Config& config);

}  // namespace holemem::cli
