#include "radgame/core/serialization.hpp"

#include <fstream>
#include <sstream>

#include "radgame/core/error.hpp"

namespace radgame {

void to_json(json& j, const BoundingBox& b) {
    j = json{{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}};
}

void from_json(const json& j, BoundingBox& b) {
    b.x_min = require_field<double>(j, "x_min");
    b.y_min = require_field<double>(j, "y_min");
    b.x_max = require_field<double>(j, "x_max");
    b.y_max = require_field<double>(j, "y_max");
}

void to_json(json& j, const FindingClass& c) {
    j = json{{"id", c.id},
             {"display_name", c.display_name},
             {"mode", to_string(c.mode)},
             {"aliases", c.aliases}};
}

void from_json(const json& j, FindingClass& c) {
    c.id = require_field<std::string>(j, "id");
    c.display_name = j.value("display_name", c.id);
    c.mode = parse_finding_mode(require_field<std::string>(j, "mode"));
    c.aliases = j.value("aliases", std::vector<std::string>{});
}

void to_json(json& j, const FindingAnnotation& a) {
    j = json{{"class_id", a.class_id}, {"boxes", a.boxes}};
}

void from_json(const json& j, FindingAnnotation& a) {
    a.class_id = require_field<std::string>(j, "class_id");
    a.boxes = j.value("boxes", std::vector<BoundingBox>{});
    a.present = j.value("present", true);
}

void to_json(json& j, const LocalizeCase& c) {
    j = json{{"case_id", c.case_id},
             {"image_ref", c.image_ref},
             {"image_width_px", c.image_width_px},
             {"image_height_px", c.image_height_px},
             {"annotations", c.annotations}};
}

void from_json(const json& j, LocalizeCase& c) {
    c.case_id = require_field<std::string>(j, "case_id");
    c.image_ref = require_field<std::string>(j, "image_ref");
    c.image_width_px = require_field<int>(j, "image_width_px");
    c.image_height_px = require_field<int>(j, "image_height_px");
    c.annotations = j.value("annotations", std::vector<FindingAnnotation>{});
}

void to_json(json& j, const ReportCase& c) {
    j = json{{"case_id", c.case_id},
             {"image_refs", c.image_refs},
             {"age_years", c.age_years},
             {"indication", c.indication},
             {"reference_findings", c.reference_findings}};
    // Canonical files hold playable cases; only an unscreened case says so.
    if (!c.priors_excluded) j["priors_excluded"] = false;
}

void from_json(const json& j, ReportCase& c) {
    c.case_id = require_field<std::string>(j, "case_id");
    c.image_refs = require_field<std::vector<std::string>>(j, "image_refs");
    c.age_years = require_field<int>(j, "age_years");
    c.indication = j.value("indication", std::string{});
    c.reference_findings = require_field<std::string>(j, "reference_findings");
    c.priors_excluded = j.value("priors_excluded", true);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::io_error, "short write to " + path.string());
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
    std::vector<json> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            rows.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::parse_error,
                        path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows) {
    std::string text;
    for (const auto& row : rows) {
        text += row.dump();
        text += '\n';
    }
    write_text_file(path, text);
}

namespace {

template <typename Case>
std::vector<Case> read_cases(const std::filesystem::path& path) {
    std::vector<Case> out;
    std::size_t index = 0;
    for (const auto& row : read_jsonl(path)) {
        ++index;
        Case c;
        try {
            c = row.get<Case>();
        } catch (const Error& e) {
            throw Error(e.code(), path.string() + " record " + std::to_string(index) + ": " + e.what(),
                        e.detail());
        }
        if (auto v = validate_case(c)) {
            throw Error(ErrorCode::schema_violation,
                        path.string() + " record " + std::to_string(index) + ": " + *v);
        }
        out.push_back(std::move(c));
    }
    return out;
}

template <typename Case>
void write_cases(const std::filesystem::path& path, const std::vector<Case>& cases) {
    std::vector<json> rows;
    rows.reserve(cases.size());
    for (const auto& c : cases) rows.emplace_back(c);
    write_jsonl(path, rows);
}

}  // namespace

std::vector<LocalizeCase> read_localize_cases(const std::filesystem::path& path) {
    return read_cases<LocalizeCase>(path);
}

std::vector<ReportCase> read_report_cases(const std::filesystem::path& path) {
    return read_cases<ReportCase>(path);
}

void write_localize_cases(const std::filesystem::path& path, const std::vector<LocalizeCase>& cases) {
    write_cases(path, cases);
}

void write_report_cases(const std::filesystem::path& path, const std::vector<ReportCase>& cases) {
    write_cases(path, cases);
}

}  // namespace radgame
