#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace holemem::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> comments;  ///< leading `# ...` lines, without the '#'
};

/// Parses numeric CSV. The first non-comment line must equal `expected_header`
/// (comma-separated names). Throws ValidationError naming the line number.
Table parse(std::string_view text, const std::vector<std::string>& expected_header);

Table read(const std::filesystem::path& path, const std::vector<std::string>& expected_header);

/// Shortest round-trippable decimal representation of `v`.
std::string format_number(double v);

}  // namespace holemem::csv
