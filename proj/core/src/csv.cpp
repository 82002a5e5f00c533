#include "holemem/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "holemem/errors.hpp"

namespace holemem::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

}  // namespace

Table parse(std::string_view text, const std::vector<std::string>& expected_header) {
    Table table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (!have_header) table.comments.emplace_back(trim(line.substr(1)));
            continue;
        }
        const auto fields = split(line);
        if (!have_header) {
            bool ok = fields.size() == expected_header.size();
            for (std::size_t i = 0; ok && i < fields.size(); ++i) ok = fields[i] == expected_header[i];
            if (!ok) {
                std::string want;
                for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
                throw ValidationError("line " + std::to_string(line_no) + ": expected header '" +
                                      want + "', got '" + std::string(line) + "'");
            }
            for (auto f : fields) table.header.emplace_back(f);
            have_header = true;
            continue;
        }
        if (fields.size() != expected_header.size())
            throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(expected_header.size()) + " fields, got " +
                                  std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (auto f : fields) {
            double v = 0.0;
            const auto* end = f.data() + f.size();
            auto [ptr, ec] = std::from_chars(f.data(), end, v);
            if (ec != std::errc() || ptr != end)
                throw ValidationError("line " + std::to_string(line_no) + ": cannot parse '" +
                                      std::string(f) + "' as a number");
            row.push_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    if (!have_header) throw ValidationError("line 1: missing CSV header");
    return table;
}

Table read(const std::filesystem::path& path, const std::vector<std::string>& expected_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse(ss.str(), expected_header);
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

}  // namespace holemem::csv
