#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace radgame::csv {

// RFC 4180 subset: comma separator, double-quote quoting with "" escapes,
// CRLF or LF line endings, quoted fields may span lines.
std::vector<std::vector<std::string>> parse(std::string_view text);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index or -1.
    int column(std::string_view name) const;
};

// First record is the header. Short rows are padded with empty fields.
Table read_table(const std::filesystem::path& path);
Table parse_table(std::string_view text);

std::string escape(std::string_view field);
std::string format_row(const std::vector<std::string>& fields);
std::string format_table(const Table& table);

}  // namespace radgame::csv
