#pragma once

#include "memd/error.hpp"
#include "memd/hilbert.hpp"
#include "memd/signal.hpp"
#include "memd/text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace memd
{

struct CsvOptions
{
    /// Largest allowed |delta - median delta| / median delta between time stamps.
    double uniformity_tolerance = 1e-6;
};

namespace detail
{

inline std::string cell_error(std::size_t row, std::size_t column, const std::string& what)
{
    return "row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + what;
}

inline std::vector<std::string_view> split_cells(std::string_view line)
{
    std::vector<std::string_view> cells;
    while (true) {
        const auto comma = line.find(',');
        cells.push_back(line.substr(0, comma));
        if (comma == std::string_view::npos)
            break;
        line.remove_prefix(comma + 1);
    }
    return cells;
}

/// 1/dt rounded to 12 significant digits, so that 0.1 s spacing read from
/// text gives exactly 10 samples/s.
inline double rate_from_interval(double dt)
{
    const double raw = 1.0 / dt;
    const double scale = std::pow(10.0, 11 - static_cast<int>(std::floor(std::log10(raw))));
    return std::round(raw * scale) / scale;
}

/// %.17g: reads back to the same double.
inline std::string format_17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// Parses `time,<id1>,<id2>,...` text. Rows and columns in errors count
/// from 1, the header being row 1.
inline MultichannelRecord parse_csv_record(std::string_view text, const CsvOptions& options = {})
{
    std::vector<std::string> ids;
    std::vector<double> times;
    std::vector<std::vector<double>> channels;
    std::size_t row = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++row;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty() && text.empty())
            break;
        const auto cells = detail::split_cells(line);
        if (row == 1) {
            if (cells.size() < 2 || detail::trim(cells[0]) != "time")
                throw Error(ErrorCode::ParseError, "row 1: header must be time,<channel ids>");
            for (std::size_t c = 1; c < cells.size(); ++c) {
                const auto id = detail::trim(cells[c]);
                if (id.empty())
                    throw Error(ErrorCode::ParseError, detail::cell_error(1, c + 1, "empty channel id"));
                ids.emplace_back(id);
            }
            channels.resize(ids.size());
            continue;
        }
        if (cells.size() != ids.size() + 1)
            throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + ": expected " +
                                                   std::to_string(ids.size() + 1) + " cells, got " +
                                                   std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto cell = detail::trim(cells[c]);
            double v = 0.0;
            const auto* end = cell.data() + cell.size();
            const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
            if (cell.empty())
                throw Error(ErrorCode::ParseError, detail::cell_error(row, c + 1, "empty cell"));
            if (ec != std::errc() || ptr != end)
                throw Error(ErrorCode::ParseError,
                            detail::cell_error(row, c + 1, "'" + std::string(cell) + "' is not a number"));
            if (!std::isfinite(v))
                throw Error(ErrorCode::NonFinite, detail::cell_error(row, c + 1, "non-finite value"));
            if (c == 0)
                times.push_back(v);
            else
                channels[c - 1].push_back(v);
        }
    }
    if (ids.empty())
        throw Error(ErrorCode::ParseError, "missing header row");
    if (times.size() < kMinSamples)
        throw Error(ErrorCode::TooShort, "need at least 4 data rows, got " + std::to_string(times.size()));

    std::vector<double> deltas(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i)
        deltas[i - 1] = times[i] - times[i - 1];
    auto sorted = deltas;
    const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    double median = *mid;
    if (sorted.size() % 2 == 0)
        median = 0.5 * (median + *std::max_element(sorted.begin(), mid));
    if (!(median > 0.0))
        throw Error(ErrorCode::NonUniformSampling, "time stamps must increase");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (std::abs(deltas[i] - median) > options.uniformity_tolerance * median)
            throw Error(ErrorCode::NonUniformSampling, "row " + std::to_string(i + 3) + ": time step " +
                                                           detail::format_17(deltas[i]) + " s differs from " +
                                                           detail::format_17(median) + " s");
    }
    return build_record(channels, detail::rate_from_interval(median), ids, times.front());
}

inline MultichannelRecord read_csv_record(const std::string& path, const CsvOptions& options = {})
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv_record(ss.str(), options);
}

/// Ingest-format text with 17 significant digits.
inline std::string format_csv_record(const MultichannelRecord& record)
{
    std::string out = "time";
    for (const auto& id : record.ids())
        out += "," + id;
    out += '\n';
    for (std::size_t t = 0; t < record.length(); ++t) {
        out += detail::format_17(record.channel(0).time_at(t));
        for (std::size_t n = 0; n < record.channel_count(); ++n) {
            out += ',';
            out += detail::format_17(record.channel(n)[t]);
        }
        out += '\n';
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::WriteError, "cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out)
        throw Error(ErrorCode::WriteError, "failed writing '" + path + "'");
}

inline void write_csv_record(const MultichannelRecord& record, const std::string& path)
{
    write_text_file(path, format_csv_record(record));
}

/// Plot data for one IMF: time, per-channel values, joint frequency and
/// joint amplitude. Undefined joint frequencies are written as nan.
inline std::string format_imf_csv(const ImfSet& set, std::size_t imf_index, const ImfTraces& traces)
{
    const auto& chans = set.imf_channels(imf_index);
    std::string out = "time";
    for (const auto& id : set.channel_ids())
        out += "," + id;
    out += ",joint_frequency,joint_amplitude\n";
    for (std::size_t t = 0; t < set.length(); ++t) {
        out += detail::format_17(chans.front().time_at(t));
        for (const auto& c : chans) {
            out += ',';
            out += detail::format_17(c[t]);
        }
        const double f = traces.joint.joint_frequency[t];
        out += ',';
        out += std::isnan(f) ? std::string("nan") : detail::format_17(f);
        out += ',';
        out += detail::format_17(traces.joint.joint_amplitude[t]);
        out += '\n';
    }
    return out;
}

} // namespace memd
