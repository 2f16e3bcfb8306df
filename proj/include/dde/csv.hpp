#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dde::csv {

// Shortest form with 17 significant digits: round-trips every double exactly.
std::string format(double v);

// Line-oriented writer. Throws IoError naming the path when the file cannot be
// opened or a write fails.
class Writer {
public:
    Writer(const std::filesystem::path& path, std::string_view header);
    ~Writer();
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;

    void row(const std::vector<std::string>& fields);
    void close();

private:
    std::filesystem::path path_;
    std::FILE* file_ = nullptr;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Strict reader: the header must match expected_prefix field-for-field (extra
// trailing header fields are allowed only when allow_extra is set) and every row
// must have exactly as many fields as the header. Throws FormatError.
Table read_strict(const std::filesystem::path& path, const std::vector<std::string>& expected_prefix,
                  bool allow_extra = false);

double to_double(const std::string& field, std::string_view what);
long long to_int(const std::string& field, std::string_view what);

}  // namespace dde::csv
