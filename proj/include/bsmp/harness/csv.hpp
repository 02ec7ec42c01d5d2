#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsmp::csv {

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw std::out_of_range("csv: no column named " + name);
    }
};

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell.push_back(ch);
        }
    }
    out.push_back(cell);
    return out;
}

inline void write(std::ostream& os, const Table& t) {
    for (std::size_t i = 0; i < t.header.size(); ++i)
        os << (i ? "," : "") << t.header[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
}

inline Table read(std::istream& is) {
    Table t;
    std::string line;
    if (std::getline(is, line)) t.header = split_line(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        t.rows.push_back(split_line(line));
    }
    return t;
}

inline void write_file(const std::string& path, const Table& t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("csv: cannot open for writing: " + path);
    write(os, t);
    if (!os) throw std::runtime_error("csv: write failed: " + path);
}

inline Table read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("csv: cannot open for reading: " + path);
    return read(is);
}

inline double to_double(const std::string& cell) {
    if (cell.empty()) throw std::invalid_argument("csv: empty numeric cell");
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size())
        throw std::invalid_argument("csv: not a number: " + cell);
    return v;
}

}  // namespace bsmp::csv
