#include <charconv>
#include <cstdio>

#include "radgame/analytics/analytics.hpp"
#include "radgame/core/csv.hpp"
#include "radgame/core/error.hpp"

namespace radgame {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& column) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::parse_error, "column " + column + ": not a number", s);
    }
}

std::size_t parse_size(const std::string& s, const std::string& column) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw Error(ErrorCode::parse_error, "column " + column + ": not a count", s);
    }
    return v;
}

// Maps each expected column to its index; throws if any is missing.
std::vector<int> columns(const csv::Table& t, const std::vector<std::string>& names) {
    std::vector<int> idx;
    for (const auto& n : names) {
        const int c = t.column(n);
        if (c < 0) throw Error(ErrorCode::schema_violation, "missing column '" + n + "'");
        idx.push_back(c);
    }
    return idx;
}

const std::vector<std::string> kOutcomeColumns = {"participant_id", "module",    "group",
                                                  "pre_score",      "post_score", "total_learning_time_seconds"};
const std::vector<std::string> kStatColumns = {"test", "statistic", "p_value", "method", "sidedness", "n_x", "n_y"};
const std::vector<std::string> kCurveColumns = {"bin", "first_case", "last_case", "n", "mean_seconds", "sem"};

template <typename T>
std::vector<T> parse_json_array(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::parse_error, "invalid JSON", e.what());
    }
    if (!j.is_array()) throw Error(ErrorCode::schema_violation, "expected a JSON array");
    return j.get<std::vector<T>>();
}

}  // namespace

ExportFormat parse_export_format(std::string_view text) {
    if (text == "csv") return ExportFormat::csv;
    if (text == "json") return ExportFormat::json;
    throw Error(ErrorCode::invalid_argument, "format must be csv or json");
}

std::string format_outcomes(const std::vector<OutcomeRow>& rows, ExportFormat format) {
    if (format == ExportFormat::json) return json(rows).dump(2) + "\n";
    csv::Table t;
    t.header = kOutcomeColumns;
    for (const auto& r : rows) {
        t.rows.push_back({r.participant_id, std::string(to_string(r.module)), std::string(to_string(r.group)),
                          num(r.pre_score), num(r.post_score), num(r.total_learning_time_seconds)});
    }
    return csv::format_table(t);
}

std::vector<OutcomeRow> parse_outcomes(std::string_view text, ExportFormat format) {
    if (format == ExportFormat::json) return parse_json_array<OutcomeRow>(text);
    const auto t = csv::parse_table(text);
    const auto c = columns(t, kOutcomeColumns);
    std::vector<OutcomeRow> rows;
    for (const auto& f : t.rows) {
        OutcomeRow r;
        r.participant_id = f[c[0]];
        r.module = parse_module(f[c[1]]);
        r.group = parse_group(f[c[2]]);
        r.pre_score = parse_double(f[c[3]], kOutcomeColumns[3]);
        r.post_score = parse_double(f[c[4]], kOutcomeColumns[4]);
        r.total_learning_time_seconds = parse_double(f[c[5]], kOutcomeColumns[5]);
        validate_outcome(r);
        rows.push_back(r);
    }
    return rows;
}

std::string format_stats(const std::vector<StatResult>& stats, ExportFormat format) {
    if (format == ExportFormat::json) return json(stats).dump(2) + "\n";
    csv::Table t;
    t.header = kStatColumns;
    for (const auto& s : stats) {
        t.rows.push_back({s.test, num(s.statistic), num(s.p_value), std::string(to_string(s.method)),
                          std::string(to_string(s.sidedness)), std::to_string(s.n_x), std::to_string(s.n_y)});
    }
    return csv::format_table(t);
}

std::vector<StatResult> parse_stats(std::string_view text, ExportFormat format) {
    if (format == ExportFormat::json) return parse_json_array<StatResult>(text);
    const auto t = csv::parse_table(text);
    const auto c = columns(t, kStatColumns);
    std::vector<StatResult> out;
    for (const auto& f : t.rows) {
        StatResult s;
        s.test = f[c[0]];
        s.statistic = parse_double(f[c[1]], kStatColumns[1]);
        s.p_value = parse_double(f[c[2]], kStatColumns[2]);
        s.method = parse_test_method(f[c[3]]);
        s.sidedness = parse_sidedness(f[c[4]]);
        s.n_x = parse_size(f[c[5]], kStatColumns[5]);
        s.n_y = parse_size(f[c[6]], kStatColumns[6]);
        out.push_back(s);
    }
    return out;
}

std::string format_curve(const std::vector<CurveBin>& curve, ExportFormat format) {
    if (format == ExportFormat::json) return json(curve).dump(2) + "\n";
    csv::Table t;
    t.header = kCurveColumns;
    for (const auto& b : curve) {
        t.rows.push_back({std::to_string(b.bin), std::to_string(b.first_case), std::to_string(b.last_case),
                          std::to_string(b.n), num(b.mean_seconds), b.sem ? num(*b.sem) : std::string()});
    }
    return csv::format_table(t);
}

std::vector<CurveBin> parse_curve(std::string_view text, ExportFormat format) {
    if (format == ExportFormat::json) return parse_json_array<CurveBin>(text);
    const auto t = csv::parse_table(text);
    const auto c = columns(t, kCurveColumns);
    std::vector<CurveBin> out;
    for (const auto& f : t.rows) {
        CurveBin b;
        b.bin = parse_size(f[c[0]], kCurveColumns[0]);
        b.first_case = parse_size(f[c[1]], kCurveColumns[1]);
        b.last_case = parse_size(f[c[2]], kCurveColumns[2]);
        b.n = parse_size(f[c[3]], kCurveColumns[3]);
        b.mean_seconds = parse_double(f[c[4]], kCurveColumns[4]);
        if (!f[c[5]].empty()) b.sem = parse_double(f[c[5]], kCurveColumns[5]);
        out.push_back(b);
    }
    return out;
}

ExportFormat format_for_path(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv") return ExportFormat::csv;
    if (ext == ".json") return ExportFormat::json;
    throw Error(ErrorCode::invalid_argument, "cannot infer export format from '" + path.string() + "'");
}

void export_outcomes(const std::filesystem::path& path, const std::vector<OutcomeRow>& rows) {
    write_text_file(path, format_outcomes(rows, format_for_path(path)));
}
std::vector<OutcomeRow> import_outcomes(const std::filesystem::path& path) {
    return parse_outcomes(read_text_file(path), format_for_path(path));
}
void export_stats(const std::filesystem::path& path, const std::vector<StatResult>& stats) {
    write_text_file(path, format_stats(stats, format_for_path(path)));
}
std::vector<StatResult> import_stats(const std::filesystem::path& path) {
    return parse_stats(read_text_file(path), format_for_path(path));
}
void export_curve(const std::filesystem::path& path, const std::vector<CurveBin>& curve) {
    write_text_file(path, format_curve(curve, format_for_path(path)));
}
std::vector<CurveBin> import_curve(const std::filesystem::path& path) {
    return parse_curve(read_text_file(path), format_for_path(path));
}

}  // namespace radgame
