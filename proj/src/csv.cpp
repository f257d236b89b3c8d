#include "qfr/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace qfr {
namespace csv {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    for (auto& tok : out) {
        const auto b = tok.find_first_not_of(" \t");
        const auto e = tok.find_last_not_of(" \t");
        tok = (b == std::string::npos) ? std::string() : tok.substr(b, e - b + 1);
    }
    return out;
}

bool parse_double(const std::string& token, double& out) {
    if (token.empty()) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(token.c_str(), &end);
    return errno == 0 && end == token.c_str() + token.size() && std::isfinite(out);
}

} // namespace csv

namespace {

std::size_t find_column(const std::vector<std::string>& header, const std::string& name,
                        const std::string& path) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        throw SchemaError("column '" + name + "' not found in " + path);
    return static_cast<std::size_t>(it - header.begin());
}

} // namespace

Dataset load_dataset(const std::string& path, const std::vector<std::string>& x_columns,
                     const std::string& y_column, bool log_transform,
                     const std::string& label_column) {
    if (x_columns.empty()) throw SchemaError("at least one input column is required");
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw SchemaError("'" + path + "' is empty");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
        line.erase(0, 3); // UTF-8 BOM
    const auto header = csv::split_line(line);

    std::vector<std::size_t> x_idx;
    x_idx.reserve(x_columns.size());
    for (const auto& name : x_columns) x_idx.push_back(find_column(header, name, path));
    const std::size_t y_idx = find_column(header, y_column, path);
    const bool want_labels = !label_column.empty();
    const std::size_t l_idx = want_labels ? find_column(header, label_column, path) : 0;

    const std::size_t d = x_columns.size();
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<std::string> labels;
    std::size_t row = 1; // header is row 1

    auto cell = [&](const std::vector<std::string>& fields, std::size_t idx) -> double {
        if (idx >= fields.size())
            throw ParseError("row " + std::to_string(row) + " of '" + path + "' is too short");
        double v;
        if (!csv::parse_double(fields[idx], v))
            throw ParseError("non-numeric cell '" + fields[idx] + "' at row " +
                             std::to_string(row) + ", column '" + header[idx] + "'");
        return v;
    };

    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto fields = csv::split_line(line);
        for (std::size_t j = 0; j < d; ++j) {
            double v = cell(fields, x_idx[j]);
            if (log_transform) {
                if (v <= 0.0)
                    throw DomainError("log transform requires positive values; row " +
                                      std::to_string(row) + ", column '" + x_columns[j] + "'");
                v = std::log(v);
            }
            xs.push_back(v);
        }
        double y = cell(fields, y_idx);
        if (log_transform) {
            if (y <= 0.0)
                throw DomainError("log transform requires positive values; row " +
                                  std::to_string(row) + ", column '" + y_column + "'");
            y = std::log(y);
        }
        ys.push_back(y);
        if (want_labels) {
            if (l_idx >= fields.size())
                throw ParseError("row " + std::to_string(row) + " of '" + path + "' is too short");
            labels.push_back(fields[l_idx]);
        }
    }
    if (ys.empty()) throw SchemaError("'" + path + "' has no data rows");

    Matrix inputs(ys.size(), d);
    std::copy(xs.begin(), xs.end(), inputs.data().begin());
    return Dataset(std::move(inputs), std::move(ys), std::move(labels));
}

void write_dataset(const std::string& path, const Dataset& dataset,
                   const std::vector<std::string>& x_columns, const std::string& y_column) {
    if (x_columns.size() != dataset.d())
        throw DimensionError("x_columns size does not match dataset dimension");
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write '" + path + "'");
    if (dataset.has_labels()) out << "label,";
    for (const auto& name : x_columns) out << name << ',';
    out << y_column << '\n';
    char buf[40];
    for (std::size_t i = 0; i < dataset.n(); ++i) {
        if (dataset.has_labels()) out << dataset.labels()[i] << ',';
        for (std::size_t j = 0; j < dataset.d(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", dataset.x(i, j));
            out << buf << ',';
        }
        std::snprintf(buf, sizeof buf, "%.17g", dataset.y(i));
        out << buf << '\n';
    }
}

} // namespace qfr
