#include "radgame/ingest/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "radgame/core/csv.hpp"
#include "radgame/core/error.hpp"

namespace radgame {

namespace {

std::optional<std::string> text_field(const json& row, std::initializer_list<const char*> keys) {
    for (const char* key : keys) {
        if (!row.contains(key) || row[key].is_null()) continue;
        const auto& v = row[key];
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        if (v.is_number()) return v.dump();
    }
    return std::nullopt;
}

std::optional<double> number_field(const json& row, const json& holder, const char* key) {
    (void)row;
    if (!holder.contains(key) || holder[key].is_null()) return std::nullopt;
    const auto& v = holder[key];
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s.find_first_not_of(" \t") == std::string::npos) return std::nullopt;
        double out = 0.0;
        const char* begin = s.data() + s.find_first_not_of(" \t");
        auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw Error(ErrorCode::schema_violation, std::string("field '") + key + "' is not a number", key);
        }
        return out;
    }
    throw Error(ErrorCode::schema_violation, std::string("field '") + key + "' is not a number", key);
}

std::optional<int> int_field(const json& row, std::initializer_list<const char*> keys) {
    for (const char* key : keys) {
        if (auto v = number_field(row, row, key)) {
            if (*v != std::floor(*v)) {
                throw Error(ErrorCode::schema_violation, std::string("field '") + key + "' must be an integer", key);
            }
            return static_cast<int>(*v);
        }
    }
    return std::nullopt;
}

std::vector<std::string> split_refs(const std::string& joined) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= joined.size()) {
        auto end = joined.find_first_of(";|", start);
        if (end == std::string::npos) end = joined.size();
        auto part = joined.substr(start, end - start);
        const auto first = part.find_first_not_of(" \t");
        if (first != std::string::npos) out.push_back(part.substr(first, part.find_last_not_of(" \t") - first + 1));
        start = end + 1;
    }
    return out;
}

struct RawBox {
    double x_min, y_min, x_max, y_max;
};

std::optional<RawBox> box_fields(const json& row) {
    const json& holder = row.contains("box") && row["box"].is_object() ? row["box"] : row;
    if (row.contains("box") && row["box"].is_array()) {
        const auto& a = row["box"];
        if (a.size() != 4) throw Error(ErrorCode::schema_violation, "box array must have 4 entries", "box");
        return RawBox{a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>()};
    }
    auto x0 = number_field(row, holder, "x_min");
    auto y0 = number_field(row, holder, "y_min");
    auto x1 = number_field(row, holder, "x_max");
    auto y1 = number_field(row, holder, "y_max");
    if (!x0 && !y0 && !x1 && !y1) return std::nullopt;
    if (!x0 || !y0 || !x1 || !y1) {
        throw Error(ErrorCode::schema_violation, "box needs all of x_min, y_min, x_max, y_max", "box");
    }
    return RawBox{*x0, *y0, *x1, *y1};
}

}  // namespace

BoxUnits parse_box_units(std::string_view text) {
    if (text == "pixel" || text == "pixels") return BoxUnits::pixel;
    if (text == "normalized") return BoxUnits::normalized;
    throw Error(ErrorCode::invalid_argument, "units must be pixel or normalized, got '" + std::string(text) + "'");
}

std::vector<json> read_source_rows(const std::filesystem::path& path) {
    if (path.extension() == ".csv") {
        const auto table = csv::read_table(path);
        std::vector<json> rows;
        rows.reserve(table.rows.size());
        for (const auto& r : table.rows) {
            json row = json::object();
            for (std::size_t i = 0; i < table.header.size(); ++i) {
                if (!r[i].empty()) row[table.header[i]] = r[i];
            }
            rows.push_back(std::move(row));
        }
        return rows;
    }
    return read_jsonl(path);
}

namespace {

json issues_json(const std::vector<RowIssue>& issues) {
    json out = json::array();
    for (const auto& i : issues) out.push_back({{"row", i.row}, {"case_id", i.case_id}, {"detail", i.detail}});
    return out;
}

}  // namespace

json LocalizeIngestReport::to_json() const {
    return json{{"rows_read", rows_read},
                {"rows_accepted", rows_accepted},
                {"unmapped_labels", issues_json(unmapped_labels)},
                {"clamped_boxes", issues_json(clamped_boxes)},
                {"rejected_rows", issues_json(rejected_rows)},
                {"warnings", issues_json(warnings)}};
}

json ReportIngestReport::to_json() const {
    return json{{"rows_read", rows_read}, {"excluded", issues_json(excluded)}, {"rejected", issues_json(rejected)}};
}

LocalizeIngestResult load_localize_dataset(const std::vector<json>& rows, const TaxonomyConfig& taxonomy,
                                           BoxUnits units) {
    LocalizeIngestResult result;
    auto& report = result.report;
    std::map<std::string, std::size_t> case_index;

    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t row_no = r + 1;
        ++report.rows_read;
        std::string case_id;
        try {
            case_id = text_field(row, {"case_id", "image_id"}).value_or("");
            const auto image_ref = text_field(row, {"image_ref", "image_path", "image"}).value_or("");
            const auto width = int_field(row, {"image_width_px", "width"});
            const auto height = int_field(row, {"image_height_px", "height"});
            if (case_id.empty() || image_ref.empty() || !width || !height || *width <= 0 || *height <= 0) {
                report.rejected_rows.push_back({row_no, case_id, "missing case_id, image_ref or image dimensions"});
                continue;
            }

            auto [pos, inserted] = case_index.emplace(case_id, result.cases.size());
            if (inserted) {
                result.cases.push_back(LocalizeCase{case_id, image_ref, *width, *height, {}});
            }
            auto& c = result.cases[pos->second];
            if (c.image_ref != image_ref || c.image_width_px != *width || c.image_height_px != *height) {
                report.rejected_rows.push_back({row_no, case_id, "image metadata differs from earlier rows of the case"});
                continue;
            }

            const auto label = text_field(row, {"label", "finding"}).value_or("");
            const auto norm = normalize_label(label);
            if (norm.empty() || norm == "normal") {
                ++report.rows_accepted;
                continue;
            }
            const FindingClass* cls = taxonomy.resolve(label);
            if (!cls) {
                report.unmapped_labels.push_back({row_no, case_id, label});
                continue;
            }

            const auto raw = box_fields(row);
            FindingAnnotation* annotation = nullptr;
            for (auto& a : c.annotations) {
                if (a.class_id == cls->id) annotation = &a;
            }

            if (cls->mode == FindingMode::select) {
                if (raw) report.warnings.push_back({row_no, case_id, "box ignored on Select finding " + cls->id});
                if (!annotation) c.annotations.push_back(FindingAnnotation{cls->id, {}, true});
                ++report.rows_accepted;
                continue;
            }

            if (!raw) {
                report.rejected_rows.push_back({row_no, case_id, "Draw finding " + cls->id + " without a box"});
                continue;
            }
            bool clamped = false;
            BoundingBox box;
            if (units == BoxUnits::pixel) {
                box = normalize_pixel_box(raw->x_min, raw->y_min, raw->x_max, raw->y_max, *width, *height, &clamped);
            } else {
                auto clamp01 = [&](double v) {
                    const double cv = std::clamp(v, 0.0, 1.0);
                    if (cv != v) clamped = true;
                    return cv;
                };
                box = {clamp01(raw->x_min), clamp01(raw->y_min), clamp01(raw->x_max), clamp01(raw->y_max)};
            }
            if (auto violation = validate_box(box)) {
                report.rejected_rows.push_back({row_no, case_id, "box rejected: " + *violation});
                continue;
            }
            if (clamped) report.clamped_boxes.push_back({row_no, case_id, "box clamped to image bounds"});
            if (annotation) {
                annotation->boxes.push_back(box);
            } else {
                c.annotations.push_back(FindingAnnotation{cls->id, {box}, true});
            }
            ++report.rows_accepted;
        } catch (const Error& e) {
            report.rejected_rows.push_back({row_no, case_id, e.what()});
        }
    }
    return result;
}

PriorDetector::PriorDetector() : PriorDetector(default_phrases()) {}

PriorDetector::PriorDetector(std::vector<std::string> phrases) {
    for (auto& p : phrases) {
        auto n = normalize_label(p);
        if (!n.empty()) phrases_.push_back(std::move(n));
    }
}

const std::vector<std::string>& PriorDetector::default_phrases() {
    static const std::vector<std::string> phrases{"prior",      "previous study", "compared to",   "comparison",
                                                  "interval change", "again seen",  "unchanged from"};
    return phrases;
}

std::optional<std::string> PriorDetector::match(std::string_view text) const {
    const auto haystack = normalize_label(text);
    for (const auto& p : phrases_) {
        if (haystack.find(p) != std::string::npos) return p;
    }
    return std::nullopt;
}

ReportIngestResult load_report_dataset(const std::vector<json>& rows, const PriorDetector& detector) {
    ReportIngestResult result;
    auto& report = result.report;
    std::map<std::string, bool> seen;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t row_no = r + 1;
        ++report.rows_read;
        std::string case_id;
        try {
            case_id = text_field(row, {"case_id", "study_id"}).value_or("");
            if (case_id.empty()) {
                report.rejected.push_back({row_no, case_id, "missing case_id"});
                continue;
            }
            if (seen.count(case_id)) {
                report.rejected.push_back({row_no, case_id, "duplicate case_id"});
                continue;
            }
            const auto findings = text_field(row, {"reference_findings", "findings"}).value_or("");
            if (normalize_label(findings).empty()) {
                report.rejected.push_back({row_no, case_id, "missing findings text"});
                continue;
            }
            std::vector<std::string> images;
            if (row.contains("image_refs") && row["image_refs"].is_array()) {
                images = row["image_refs"].get<std::vector<std::string>>();
            } else if (auto joined = text_field(row, {"image_refs", "image_ref", "images"})) {
                images = split_refs(*joined);
            }
            if (images.empty()) {
                report.rejected.push_back({row_no, case_id, "missing image_refs"});
                continue;
            }
            const auto age = int_field(row, {"age_years", "age"});
            if (!age || *age < 0) {
                report.rejected.push_back({row_no, case_id, "missing or negative age"});
                continue;
            }
            seen[case_id] = true;
            if (auto phrase = detector.match(findings)) {
                report.excluded.push_back({row_no, case_id, *phrase});
                continue;
            }
            result.cases.push_back(ReportCase{case_id, std::move(images), *age,
                                              text_field(row, {"indication"}).value_or(""), findings, true});
        } catch (const Error& e) {
            report.rejected.push_back({row_no, case_id, e.what()});
        }
    }
    return result;
}

}  // namespace radgame
