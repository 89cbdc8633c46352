#include "cldrf/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace cldrf {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& s, long row) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) {
        throw CsvError("row " + std::to_string(row) + ": not a number: '" + s + "'",
                       row);
    }
    return v;
}

long parse_int(const std::string& s, long row) {
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw CsvError("row " + std::to_string(row) + ": not an integer: '" + s + "'",
                       row);
    }
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CsvError("cannot open for reading: " + path.string(), 0);
    }
    return in;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
    auto out = open_out(path);
    out << "y,t";
    for (Eigen::Index j = 0; j < data.p(); ++j) out << ",x" << (j + 1);
    out << "\n";
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        out << format_double(data.y[i]) << ',' << format_double(data.t[i]);
        for (Eigen::Index j = 0; j < data.p(); ++j) {
            out << ',' << format_double(data.X(i, j));
        }
        out << "\n";
    }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw CsvError("empty file: " + path.string(), 1);
    }
    const auto header = split_line(strip_cr(line));
    if (header.size() < 2 || header[0] != "y" || header[1] != "t") {
        throw CsvError("header must start with 'y,t': " + path.string(), 1);
    }
    const auto p = static_cast<Eigen::Index>(header.size() - 2);

    std::vector<double> ys, ts, xs;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (static_cast<Eigen::Index>(fields.size()) != p + 2) {
            throw CsvError("row " + std::to_string(row) + ": expected " +
                               std::to_string(p + 2) + " fields, found " +
                               std::to_string(fields.size()),
                           row);
        }
        ys.push_back(parse_double(fields[0], row));
        ts.push_back(parse_double(fields[1], row));
        for (Eigen::Index j = 0; j < p; ++j) {
            xs.push_back(parse_double(fields[static_cast<std::size_t>(j + 2)], row));
        }
    }
    if (ys.empty()) {
        throw CsvError("no data rows in " + path.string(), row);
    }

    Dataset data;
    const auto n = static_cast<Eigen::Index>(ys.size());
    data.y = Eigen::Map<Vector>(ys.data(), n);
    data.t = Eigen::Map<Vector>(ts.data(), n);
    data.X.resize(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            data.X(i, j) = xs[static_cast<std::size_t>(i * p + j)];
        }
    }
    data.validate();
    return data;
}

void write_labels_csv(const std::filesystem::path& path,
                      const std::vector<int>& labels, const std::string& column) {
    auto out = open_out(path);
    out << "unit," << column << "\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << (i + 1) << ',' << labels[i] << "\n";
    }
}

std::vector<int> read_labels_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw CsvError("empty file: " + path.string(), 1);
    }
    std::vector<int> labels;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.empty()) {
            throw CsvError("row " + std::to_string(row) + ": empty row", row);
        }
        labels.push_back(static_cast<int>(parse_int(fields.back(), row)));
    }
    if (labels.empty()) {
        throw CsvError("no label rows in " + path.string(), row);
    }
    return labels;
}

void write_curves_csv(const std::filesystem::path& path,
                      const std::vector<AdrfCurve>& curves) {
    auto out = open_out(path);
    out << "cluster,t,mu,in_support\n";
    for (const auto& curve : curves) {
        for (std::size_t k = 0; k < curve.grid.size(); ++k) {
            out << curve.cluster << ',' << format_double(curve.grid[k]) << ','
                << format_double(curve.mu[k]) << ','
                << (curve.in_support(curve.grid[k]) ? 1 : 0) << "\n";
        }
    }
}

}  // namespace cldrf
