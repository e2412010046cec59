#pragma once
// Two-column CSV persistence for fields and contours. Format: a literal
// "theta,value" header, then one "%.12g,%.12g" row per grid point. Writes go
// through a temp file and rename so readers never see a partial file.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "imfuse/contour.hpp"
#include "imfuse/errors.hpp"
#include "imfuse/grid.hpp"

namespace imfuse {

namespace detail {

inline std::string format_g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// strtod rather than stod: underflow to a subnormal (deep contour tails) is a
// value, not an error.
inline double parse_double_field(const std::string& text, const std::string& file, std::size_t line) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || !std::isfinite(v))
        throw parse_error(file + ":" + std::to_string(line) + ": not a number: '" + text + "'");
    std::size_t pos = static_cast<std::size_t>(end - begin);
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\r')) ++pos;
    if (pos != text.size())
        throw parse_error(file + ":" + std::to_string(line) + ": trailing junk in '" + text + "'");
    return v;
}

struct CsvColumns {
    std::vector<double> thetas;
    std::vector<double> values;
};

inline CsvColumns read_theta_value_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error(path + ": cannot open for reading");
    std::string line;
    if (!std::getline(in, line)) throw parse_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "theta,value")
        throw parse_error(path + ":1: expected header 'theta,value', got '" + line + "'");
    CsvColumns cols;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw parse_error(path + ":" + std::to_string(lineno) + ": expected 'theta,value' row");
        cols.thetas.push_back(parse_double_field(line.substr(0, comma), path, lineno));
        cols.values.push_back(parse_double_field(line.substr(comma + 1), path, lineno));
    }
    if (cols.thetas.size() < 2)
        throw parse_error(path + ": need at least 2 data rows, got " +
                          std::to_string(cols.thetas.size()));
    for (std::size_t i = 0; i + 1 < cols.thetas.size(); ++i)
        if (!(cols.thetas[i] < cols.thetas[i + 1]))
            throw parse_error(path + ": theta column must be strictly increasing (rows " +
                              std::to_string(i + 2) + " and " + std::to_string(i + 3) + ")");
    for (std::size_t i = 0; i < cols.values.size(); ++i)
        if (!(cols.values[i] >= 0.0 && cols.values[i] <= 1.0))
            throw parse_error(path + ":" + std::to_string(i + 2) + ": value " +
                              format_g12(cols.values[i]) + " outside [0,1]");
    return cols;
}

inline void write_theta_value_csv(const std::string& path, const ParameterGrid& grid,
                                  const std::vector<double>& values) {
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw parse_error(tmp.string() + ": cannot open for writing");
        out << "theta,value\n";
        for (std::size_t i = 0; i < grid.size(); ++i)
            out << format_g12(grid[i]) << ',' << format_g12(values[i]) << '\n';
        if (!out) throw parse_error(tmp.string() + ": write failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw parse_error(path + ": rename failed: " + ec.message());
    }
}

}  // namespace detail

inline ScoreField read_field_csv(const std::string& path) {
    auto cols = detail::read_theta_value_csv(path);
    return ScoreField(ParameterGrid(std::move(cols.thetas)), std::move(cols.values));
}

// Same format; additionally demands a unit max on load (Contour invariant).
inline Contour read_contour_csv(const std::string& path) {
    auto cols = detail::read_theta_value_csv(path);
    try {
        return Contour(ParameterGrid(std::move(cols.thetas)), std::move(cols.values));
    } catch (const std::invalid_argument& e) {
        throw parse_error(path + ": " + e.what());
    }
}

inline void write_field_csv(const std::string& path, const ScoreField& field) {
    detail::write_theta_value_csv(path, field.grid(), field.values());
}

inline void write_contour_csv(const std::string& path, const Contour& contour) {
    detail::write_theta_value_csv(path, contour.grid(), contour.values());
}

}  // namespace imfuse
