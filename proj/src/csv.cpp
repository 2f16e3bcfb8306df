#include "dde/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dde/errors.hpp"

namespace dde::csv {

std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Writer::Writer(const std::filesystem::path& path, std::string_view header) : path_(path) {
    file_ = std::fopen(path.c_str(), "wb");
    if (!file_) throw IoError("cannot open '" + path.string() + "' for writing");
    std::fwrite(header.data(), 1, header.size(), file_);
    std::fputc('\n', file_);
}

Writer::~Writer() {
    if (file_) std::fclose(file_);
}

void Writer::row(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line.push_back(',');
        line += fields[i];
    }
    line.push_back('\n');
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size())
        throw IoError("write failed for '" + path_.string() + "'");
}

void Writer::close() {
    if (file_ && std::fclose(file_) != 0) {
        file_ = nullptr;
        throw IoError("close failed for '" + path_.string() + "'");
    }
    file_ = nullptr;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

Table read_strict(const std::filesystem::path& path, const std::vector<std::string>& expected_prefix,
                  bool allow_extra) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header");
    t.header = split(line);
    if (t.header.size() < expected_prefix.size() || (!allow_extra && t.header.size() != expected_prefix.size()))
        throw FormatError(path.string() + ": header has " + std::to_string(t.header.size()) + " fields");
    for (std::size_t i = 0; i < expected_prefix.size(); ++i)
        if (t.header[i] != expected_prefix[i])
            throw FormatError(path.string() + ": header field " + std::to_string(i) + " is '" + t.header[i] +
                              "', expected '" + expected_prefix[i] + "'");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        auto fields = split(line);
        if (fields.size() != t.header.size())
            throw FormatError(path.string() + ": line " + std::to_string(lineno) + " has " +
                              std::to_string(fields.size()) + " fields, header has " +
                              std::to_string(t.header.size()));
        t.rows.push_back(std::move(fields));
    }
    return t;
}

double to_double(const std::string& field, std::string_view what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used == field.size()) return v;
    } catch (const std::exception&) {
    }
    throw FormatError(std::string(what) + ": not a number: '" + field + "'");
}

long long to_int(const std::string& field, std::string_view what) {
    long long v = 0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw FormatError(std::string(what) + ": not an integer: '" + field + "'");
    return v;
}

}  // namespace dde::csv
