#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "radgame/core/domain.hpp"
#include "radgame/core/serialization.hpp"
#include "radgame/ingest/taxonomy.hpp"

namespace radgame {

enum class BoxUnits { pixel, normalized };

BoxUnits parse_box_units(std::string_view text);

// Source rows are read from CSV (by extension .csv) or line-delimited JSON.
// CSV cells arrive as strings; typed accessors accept either form.
std::vector<json> read_source_rows(const std::filesystem::path& path);

struct RowIssue {
    std::size_t row = 0;  // 1-based data row
    std::string case_id;
    std::string detail;

    friend bool operator==(const RowIssue&, const RowIssue&) = default;
};

struct LocalizeIngestReport {
    std::size_t rows_read = 0;
    std::size_t rows_accepted = 0;
    std::vector<RowIssue> unmapped_labels;  // detail = raw label
    std::vector<RowIssue> clamped_boxes;
    std::vector<RowIssue> rejected_rows;    // detail = reason
    std::vector<RowIssue> warnings;

    json to_json() const;
};

struct LocalizeIngestResult {
    std::vector<LocalizeCase> cases;
    LocalizeIngestReport report;
};

// Row fields: case_id, image_ref, image_width_px, image_height_px, label, and
// for Draw findings x_min, y_min, x_max, y_max (flat, or nested under "box").
// An empty label or "normal" registers the image with no findings.
LocalizeIngestResult load_localize_dataset(const std::vector<json>& rows, const TaxonomyConfig& taxonomy,
                                           BoxUnits units);

// Case-insensitive substring detector for findings text that refers to a
// prior study.
class PriorDetector {
public:
    PriorDetector();  // default phrase list
    explicit PriorDetector(std::vector<std::string> phrases);

    static const std::vector<std::string>& default_phrases();

    // The first listed phrase found in `text`, if any.
    std::optional<std::string> match(std::string_view text) const;
    const std::vector<std::string>& phrases() const { return phrases_; }

private:
    std::vector<std::string> phrases_;  // lowercase
};

struct ReportIngestReport {
    std::size_t rows_read = 0;
    std::vector<RowIssue> excluded;  // detail = matched phrase
    std::vector<RowIssue> rejected;  // detail = reason

    json to_json() const;
};

struct ReportIngestResult {
    std::vector<ReportCase> cases;
    ReportIngestReport report;
};

// Row fields: case_id (or study_id), image_refs (array, or ';'-separated
// string), age_years (or age), indication, reference_findings (or findings).
ReportIngestResult load_report_dataset(const std::vector<json>& rows, const PriorDetector& detector = {});

struct CuratedSet {
    std::string set_id;
    Purpose purpose = Purpose::pretest;
    Module module = Module::localize;
    std::vector<std::string> case_ids;

    friend bool operator==(const CuratedSet&, const CuratedSet&) = default;
};

void to_json(json& j, const CuratedSet& s);
void from_json(const json& j, CuratedSet& s);

struct StratumItem {
    std::string case_id;
    int difficulty = 0;
};

// Stratified sample over difficulty values: every observed difficulty gets an
// equal share of n, shares a stratum cannot fill flow to the others, and the
// remainder goes round-robin from the largest strata. The result order is a
// seeded shuffle of the selection. Throws Error(invalid_argument) if n exceeds
// the pool.
std::vector<std::string> stratified_sample(std::vector<StratumItem> pool, std::size_t n, std::uint64_t seed);

CuratedSet curate_test_set(const std::vector<LocalizeCase>& cases, std::size_t n, std::uint64_t seed,
                           Purpose purpose = Purpose::pretest);
CuratedSet curate_test_set(const std::vector<ReportCase>& cases, std::size_t n, std::uint64_t seed,
                           Purpose purpose = Purpose::pretest);

// Report difficulty proxy: count of sentences in the reference findings that
// read as positive statements (no leading negation or "normal"/"clear" cue).
int report_difficulty(const ReportCase& c);

struct PhaseSizes {
    std::size_t pretest = 0;
    std::size_t learning = 0;
    std::size_t posttest = 0;

    friend bool operator==(const PhaseSizes&, const PhaseSizes&) = default;
};

PhaseSizes default_phase_sizes(Module module);  // 25/375/25 and 10/150/10

struct StudySets {
    CuratedSet pretest;
    CuratedSet learning;
    CuratedSet posttest;  // same case_ids as pretest
};

// The test set is curated first; learning cases are curated from the rest.
// posttest must equal pretest in size.
StudySets curate_study_sets(const std::vector<LocalizeCase>& cases, PhaseSizes sizes, std::uint64_t seed);
StudySets curate_study_sets(const std::vector<ReportCase>& cases, PhaseSizes sizes, std::uint64_t seed);

struct CaseDistribution {
    std::map<int, std::size_t> difficulty_histogram;
    std::map<std::string, std::size_t> draw_counts;    // class_id -> cases
    std::map<std::string, std::size_t> select_counts;

    json to_json() const;
};

CaseDistribution case_distribution(const std::vector<LocalizeCase>& cases, const TaxonomyConfig& taxonomy);
CaseDistribution case_distribution(const std::vector<ReportCase>& cases);

}  // namespace radgame
