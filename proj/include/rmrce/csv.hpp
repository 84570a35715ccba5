#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rmrce/dataset.hpp"
#include "rmrce/errors.hpp"

namespace rmrce {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_cell(const std::string& cell, size_t row, const std::string& col) {
    const char* b = cell.data();
    const char* e = b + cell.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
    if (b == e)
        throw invalid_input("missing value at row " + std::to_string(row) + ", column " + col);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || ptr != e)
        throw invalid_input("non-numeric value '" + std::string(b, e) + "' at row " +
                            std::to_string(row) + ", column " + col);
    if (!std::isfinite(v))
        throw invalid_input("non-finite value at row " + std::to_string(row) + ", column " + col);
    return v;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

// Loads a dataset from CSV: first row is the header, one column is the
// response (default: the first column), the remaining numeric columns form x.
// Missing or non-numeric cells are rejected with a row/column address.
inline Dataset load_csv(const std::string& path, const std::string& response_column = "") {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw invalid_input("'" + path + "' is empty");
    const auto header = detail::split_csv_line(line);
    require(header.size() >= 2, "CSV needs a response column and at least one feature");

    size_t response_idx = 0;
    if (!response_column.empty()) {
        bool found = false;
        for (size_t j = 0; j < header.size(); ++j)
            if (header[j] == response_column) {
                response_idx = j;
                found = true;
                break;
            }
        require(found, "response column '" + response_column + "' not found in header");
    }

    std::vector<std::string> names;
    for (size_t j = 0; j < header.size(); ++j)
        if (j != response_idx) names.push_back(header[j]);

    std::vector<double> ys;
    std::vector<std::vector<double>> rows;
    size_t row_no = 1; // header is row 1
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw invalid_input("row " + std::to_string(row_no) + " has " +
                                std::to_string(cells.size()) + " fields, expected " +
                                std::to_string(header.size()));
        std::vector<double> feat;
        feat.reserve(header.size() - 1);
        for (size_t j = 0; j < cells.size(); ++j) {
            const double v = detail::parse_cell(cells[j], row_no, header[j]);
            if (j == response_idx)
                ys.push_back(v);
            else
                feat.push_back(v);
        }
        rows.push_back(std::move(feat));
    }
    require(rows.size() >= 2, "dataset needs n >= 2 observations");

    Dataset data;
    data.y = Eigen::Map<Vector>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    data.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < names.size(); ++j)
            data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    data.feature_names = std::move(names);
    validate_dataset(data);
    return data;
}

// Writes y as the first column followed by the features; round-trips exactly
// through load_csv.
inline void save_csv(const std::string& path, const Dataset& data,
                     const std::string& response_name = "y") {
    std::ofstream out(path);
    if (!out) throw invalid_input("cannot write '" + path + "'");
    out << response_name;
    for (const auto& name : data.feature_names) out << ',' << name;
    out << '\n';
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        out << detail::format_double(data.y[i]);
        for (Eigen::Index j = 0; j < data.d(); ++j)
            out << ',' << detail::format_double(data.x(i, j));
        out << '\n';
    }
}

} // namespace rmrce
