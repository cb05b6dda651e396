#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gbest/data.hpp"
#include "gbest/error.hpp"

namespace gbest {

// Column mapping for time-to-event CSV files. The status column must hold
// 1 (event) or 0 (censored).
struct CsvSchema {
    std::string time_column;
    std::string status_column;
    std::vector<std::string> covariate_columns;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ' || cell.back() == '\t')) cell.pop_back();
        std::size_t b = 0;
        while (b < cell.size() && (cell[b] == ' ' || cell[b] == '\t')) ++b;
        out.push_back(cell.substr(b));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw Error("CSV: unparseable numeric value '" + cell + "' at line " + std::to_string(line_no) +
                    ", column '" + column + "'");
    return v;
}

}  // namespace detail

// Load a UTF-8, comma-separated file with a header row into a Dataset.
// Row order is preserved; all weights are 1. Missing values, negative times
// and status values outside {0,1} are rejected with the offending line and
// column named in the message.
inline Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw Error("CSV: cannot open file '" + path + "'");
    if (schema.covariate_columns.empty()) throw Error("CSV: schema needs at least one covariate column");

    std::string line;
    if (!std::getline(in, line)) throw Error("CSV: file '" + path + "' is empty");
    const auto header = detail::split_csv_line(line);

    auto column_index = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw Error("CSV: unknown column name '" + name + "' in '" + path + "'");
    };

    const std::size_t time_idx = column_index(schema.time_column);
    const std::size_t status_idx = column_index(schema.status_column);
    std::vector<std::size_t> cov_idx;
    cov_idx.reserve(schema.covariate_columns.size());
    for (const auto& c : schema.covariate_columns) cov_idx.push_back(column_index(c));

    std::vector<TimeToEventRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        const auto cells = detail::split_csv_line(line);
        auto cell_at = [&](std::size_t idx, const std::string& column) -> const std::string& {
            if (idx >= cells.size() || cells[idx].empty())
                throw Error("CSV: missing value at line " + std::to_string(line_no) + ", column '" + column + "'");
            return cells[idx];
        };
        TimeToEventRecord rec;
        rec.time = detail::parse_cell(cell_at(time_idx, schema.time_column), line_no, schema.time_column);
        if (rec.time < 0.0)
            throw Error("CSV: negative time at line " + std::to_string(line_no) + ", column '" +
                        schema.time_column + "'");
        const double status =
            detail::parse_cell(cell_at(status_idx, schema.status_column), line_no, schema.status_column);
        if (status != 0.0 && status != 1.0)
            throw Error("CSV: status must be 0 or 1 at line " + std::to_string(line_no) + ", column '" +
                        schema.status_column + "'");
        rec.event = status == 1.0;
        rec.covariates.reserve(cov_idx.size());
        for (std::size_t j = 0; j < cov_idx.size(); ++j)
            rec.covariates.push_back(detail::parse_cell(cell_at(cov_idx[j], schema.covariate_columns[j]), line_no,
                                                        schema.covariate_columns[j]));
        records.push_back(std::move(rec));
    }
    return Dataset(std::move(records), schema.covariate_columns);
}

// Write a dataset in the same format load_csv reads: time,status,<features...>.
inline void write_csv(std::ostream& out, const Dataset& d) {
    out << "time,status";
    for (const auto& f : d.feature_names()) out << ',' << f;
    out << '\n';
    char buf[64];
    for (const auto& r : d.records()) {
        std::snprintf(buf, sizeof(buf), "%.17g", r.time);
        out << buf << ',' << (r.event ? 1 : 0);
        for (double x : r.covariates) {
            std::snprintf(buf, sizeof(buf), "%.17g", x);
            out << ',' << buf;
        }
        out << '\n';
    }
}

inline void write_csv(const std::string& path, const Dataset& d) {
    std::ofstream out(path);
    if (!out) throw Error("CSV: cannot write file '" + path + "'");
    write_csv(out, d);
}

}  // namespace gbest
