#pragma once

// CSV artifact: header `k,mean_gap,std_gap,mean_dist_sq,bound`, one row per k,
// reals with 17 significant digits, LF line endings.

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fwdgrad/harness/aggregate.hpp"

namespace fwdgrad::harness {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kCsvHeader = "k,mean_gap,std_gap,mean_dist_sq,bound";

/// Shortest-form-independent rendering: general format, 17 significant digits.
inline std::string format_real(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    if (ec != std::errc()) {
        throw IoError("cannot format real value");
    }
    return std::string(buf.data(), ptr);
}

inline std::string to_csv(const AggregateTrace& trace) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const AggregateRow& r : trace.rows) {
        out += std::to_string(r.k);
        for (double v : {r.mean_gap, r.std_gap, r.mean_dist_sq, r.bound}) {
            out += ',';
            out += format_real(v);
        }
        out += '\n';
    }
    return out;
}

inline void write_csv(const AggregateTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    const std::string text = to_csv(trace);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

namespace detail {

inline double parse_real(std::string_view field, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw IoError("line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
    }
    return v;
}

}  // namespace detail

inline AggregateTrace parse_csv(std::string_view text) {
    AggregateTrace trace;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        const std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line_no == 1) {
            if (line != kCsvHeader) {
                throw IoError("unexpected CSV header '" + std::string(line) + "'");
            }
            continue;
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        if (fields.size() != 5) {
            throw IoError("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                          std::to_string(fields.size()));
        }
        AggregateRow row;
        const auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), row.k);
        if (ec != std::errc() || ptr != fields[0].data() + fields[0].size()) {
            throw IoError("line " + std::to_string(line_no) + ": bad index '" + std::string(fields[0]) + "'");
        }
        row.mean_gap = detail::parse_real(fields[1], line_no);
        row.std_gap = detail::parse_real(fields[2], line_no);
        row.mean_dist_sq = detail::parse_real(fields[3], line_no);
        row.bound = detail::parse_real(fields[4], line_no);
        trace.rows.push_back(row);
    }
    if (line_no == 0) {
        throw IoError("empty CSV document");
    }
    return trace;
}

inline AggregateTrace read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_csv(text.str());
}

}  // namespace fwdgrad::harness
