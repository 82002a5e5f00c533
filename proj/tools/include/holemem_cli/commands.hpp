#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "holemem_cli/config.hpp"

namespace holemem::cli {

struct Context {
    Config config;
    std::filesystem::path out_dir = ".";
    unsigned threads = 1;
    bool gnuplot = false;  ///< also write a gnuplot script next to the data
    std::ostream* log = nullptr;
};

using Written = std::vector<std::filesystem::path>;

/// Input, slow-light reference and storage run: trace_input.csv,
/// trace_slow.csv, trace.csv and summary.csv.
Written cmd_simulate(const Context& ctx, std::optional<double> raman_area_pi = std::nullopt);
/// sweep_od.csv (`od,eta_s`), Raman timing re-optimized per point.
Written cmd_sweep_od(const Context& ctx);
/// sweep_ts.csv (`ts_us,eta_s`).
Written cmd_sweep_ts(const Context& ctx);
/// Fits a hole trace or decay curve; fit.csv plus a summary on the log stream.
Written cmd_fit(const Context& ctx, std::optional<std::string> kind = std::nullopt,
                std::optional<std::filesystem::path> trace = std::nullopt);
/// Histograms, snr.csv and mu1.txt.
Written cmd_photon_stats(const Context& ctx);
/// oracle.csv (time domain vs transfer function per grid level) and
/// beer_lambert.csv (cw transmission).
Written cmd_oracle_check(const Context& ctx);

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// 0 ok, 2 configuration / validation, 3 numerical failure, 1 otherwise.
int exit_code(const std::exception& e) noexcept;

}  // namespace holemem::cli
