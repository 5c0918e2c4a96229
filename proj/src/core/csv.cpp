#include "radgame/core/csv.hpp"

#include "radgame/core/error.hpp"
#include "radgame/core/serialization.hpp"

namespace radgame::csv {

std::vector<std::vector<std::string>> parse(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        // Blank lines produce a single empty field; skip them.
        if (!(record.size() == 1 && record.front().empty())) records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
            case '"':
                if (field_started) {
                    throw Error(ErrorCode::parse_error, "stray quote inside unquoted CSV field");
                }
                quoted = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                break;
            default:
                field.push_back(ch);
                field_started = true;
        }
    }
    if (quoted) throw Error(ErrorCode::parse_error, "unterminated quoted CSV field");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

int Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

Table parse_table(std::string_view text) {
    auto records = parse(text);
    Table table;
    if (records.empty()) return table;
    table.header = std::move(records.front());
    for (std::size_t i = 1; i < records.size(); ++i) {
        auto& r = records[i];
        if (r.size() < table.header.size()) r.resize(table.header.size());
        table.rows.push_back(std::move(r));
    }
    return table;
}

Table read_table(const std::filesystem::path& path) { return parse_table(read_text_file(path)); }

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::string format_row(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line.push_back(',');
        line += escape(fields[i]);
    }
    line.push_back('\n');
    return line;
}

std::string format_table(const Table& table) {
    std::string out = format_row(table.header);
    for (const auto& r : table.rows) out += format_row(r);
    return out;
}

}  // namespace radgame::csv
