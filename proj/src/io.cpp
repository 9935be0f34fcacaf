#include "selfpen/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

namespace selfpen {

std::string format_double(double v) {
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

std::string format_shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_csv(const Dataset& d, std::ostream& out) {
    for (std::size_t j = 0; j < d.p(); ++j) out << 'x' << (j + 1) << ',';
    out << "y\n";
    const auto& X = d.X();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) out << format_double(X(i, j)) << ',';
        out << format_double(d.y()[i]) << '\n';
    }
    require(static_cast<bool>(out), ErrorCode::kIo, "failed while writing CSV");
}

void write_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    require(out.is_open(), ErrorCode::kIo, "cannot open '" + path + "' for writing");
    write_csv(d, out);
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view field, std::size_t line_no) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    require(ec == std::errc() && ptr == field.data() + field.size() && !field.empty(), ErrorCode::kParse,
            "line " + std::to_string(line_no) + ": '" + std::string(field) + "' is not a number");
    return v;
}

}  // namespace

Dataset read_csv(std::istream& in) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParse, "CSV is empty");
    const auto header = split(line);
    require(header.size() >= 2, ErrorCode::kParse, "CSV header needs at least one feature column and y");
    const std::size_t p = header.size() - 1;
    for (std::size_t j = 0; j < p; ++j) {
        require(trim(header[j]) == "x" + std::to_string(j + 1), ErrorCode::kParse,
                "CSV header column " + std::to_string(j + 1) + " should be x" + std::to_string(j + 1));
    }
    require(trim(header[p]) == "y", ErrorCode::kParse, "last CSV header column should be y");

    std::vector<double> xs;
    std::vector<double> ys;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        require(fields.size() == p + 1, ErrorCode::kParse,
                "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) + " fields, expected " +
                    std::to_string(p + 1));
        for (std::size_t j = 0; j < p; ++j) xs.push_back(parse_number(fields[j], line_no));
        ys.push_back(parse_number(fields[p], line_no));
    }
    const auto n = static_cast<Eigen::Index>(ys.size());
    RowMatrix X = Eigen::Map<const RowMatrix>(xs.data(), n, static_cast<Eigen::Index>(p));
    Vector y = Eigen::Map<const Vector>(ys.data(), n);
    return Dataset(std::move(X), std::move(y));
}

Dataset read_csv(const std::string& path) {
    std::ifstream in(path);
    require(in.is_open(), ErrorCode::kIo, "cannot open '" + path + "'");
    return read_csv(in);
}

}  // namespace selfpen
