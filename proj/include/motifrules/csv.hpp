#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "motifrules/error.hpp"
#include "motifrules/series.hpp"

namespace motifrules {

// Selects a CSV column by header name or zero-based index.
using ColumnRef = std::variant<std::string, std::size_t>;

// Maximum relative deviation of any timestamp delta from the median delta.
inline constexpr double kSamplingJitter = 0.01;

namespace csv_detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(pos)));
            break;
        }
        cells.push_back(trim(line.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return cells;
}

inline std::optional<double> parse_real(std::string_view cell) {
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    if (cell.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

inline std::size_t resolve(const ColumnRef& ref, const std::vector<std::string>& header,
                           std::string_view what) {
    if (const auto* idx = std::get_if<std::size_t>(&ref)) return *idx;
    const auto& name = std::get<std::string>(ref);
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        throw InputError(std::string(what) + " column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
}

} // namespace csv_detail

// Reads one column of a comma-separated file as a series. A first row whose
// cells are not all numeric is treated as a header. Without a timestamp column
// the period is 1 and the start time 0; otherwise the period is the median
// timestamp delta and every delta must stay within 1% of it.
//
// The series name is the selected column's header label, or the file stem
// when the file has no header.
[[nodiscard]] inline TimeSeries load_csv(const std::filesystem::path& path,
                                         const ColumnRef& column,
                                         const std::optional<ColumnRef>& timestamp_column = {}) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path.string());

    std::vector<std::string> header;
    std::vector<double> values;
    std::vector<double> stamps;
    std::optional<std::size_t> col;
    std::optional<std::size_t> ts_col;
    bool first = true;
    std::string line;
    std::size_t row = 0;

    while (std::getline(in, line)) {
        ++row;
        const auto trimmed = csv_detail::trim(line);
        if (trimmed.empty()) continue;
        const auto cells = csv_detail::split(trimmed);

        if (first) {
            first = false;
            const bool numeric = std::all_of(cells.begin(), cells.end(), [](std::string_view c) {
                return csv_detail::parse_real(c).has_value();
            });
            if (!numeric) {
                for (auto c : cells) header.emplace_back(c);
                col = csv_detail::resolve(column, header, "value");
                if (timestamp_column) ts_col = csv_detail::resolve(*timestamp_column, header, "timestamp");
                continue;
            }
            if (std::holds_alternative<std::string>(column) ||
                (timestamp_column && std::holds_alternative<std::string>(*timestamp_column)))
                throw InputError(path.string() + ": column selected by name but file has no header");
            col = std::get<std::size_t>(column);
            if (timestamp_column) ts_col = std::get<std::size_t>(*timestamp_column);
        }

        const auto cell_at = [&](std::size_t c) -> double {
            if (c >= cells.size())
                throw InputError(path.string() + ": row " + std::to_string(row) + " has no column " +
                                 std::to_string(c));
            const auto v = csv_detail::parse_real(cells[c]);
            if (!v)
                throw InputError(path.string() + ": row " + std::to_string(row) +
                                 ": non-numeric or missing value '" + std::string(cells[c]) + "'");
            return *v;
        };
        values.push_back(cell_at(*col));
        if (ts_col) stamps.push_back(cell_at(*ts_col));
    }

    if (values.empty()) throw InputError(path.string() + ": no data rows");

    std::string name = path.stem().string();
    if (!header.empty() && col && *col < header.size() && !header[*col].empty()) name = header[*col];

    if (!ts_col) return TimeSeries(std::move(values), 0.0, 1.0, std::move(name));

    double period = 1.0;
    if (stamps.size() >= 2) {
        std::vector<double> deltas(stamps.size() - 1);
        for (std::size_t i = 0; i + 1 < stamps.size(); ++i) {
            deltas[i] = stamps[i + 1] - stamps[i];
            if (!(deltas[i] > 0.0))
                throw InputError(path.string() + ": timestamps not strictly increasing at data row " +
                                 std::to_string(i + 2));
        }
        auto sorted = deltas;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        period = sorted[sorted.size() / 2];
        if (sorted.size() % 2 == 0) {
            const double lower = *std::max_element(sorted.begin(), sorted.begin() + sorted.size() / 2);
            period = 0.5 * (period + lower);
        }
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            if (std::abs(deltas[i] - period) > kSamplingJitter * period)
                throw InputError(path.string() + ": uneven sampling at data row " +
                                 std::to_string(i + 2) + " (delta " + std::to_string(deltas[i]) +
                                 ", median " + std::to_string(period) + ")");
        }
    }
    return TimeSeries(std::move(values), stamps.front(), period, std::move(name));
}

} // namespace motifrules
