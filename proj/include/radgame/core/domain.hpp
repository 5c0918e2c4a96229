#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "radgame/core/geometry.hpp"

namespace radgame {

// Draw findings need a box; Select findings only a presence checkbox.
enum class FindingMode { draw, select };

enum class Module { localize, report };

enum class Group { gamified, traditional };

enum class Phase { pretest, learning, posttest, done };

enum class Purpose { pretest, learning, posttest };

std::string_view to_string(FindingMode mode);
std::string_view to_string(Module module);
std::string_view to_string(Group group);
std::string_view to_string(Phase phase);
std::string_view to_string(Purpose purpose);

// Parsers accept the lowercase token and the capitalized display form
// ("draw"/"Draw", "pretest"/"PreTest"). Unknown text throws Error(invalid_argument).
FindingMode parse_finding_mode(std::string_view text);
Module parse_module(std::string_view text);
Group parse_group(std::string_view text);
Phase parse_phase(std::string_view text);
Purpose parse_purpose(std::string_view text);

Group opposite(Group group);

struct FindingClass {
    std::string id;
    std::string display_name;
    FindingMode mode = FindingMode::draw;
    std::vector<std::string> aliases;

    friend bool operator==(const FindingClass&, const FindingClass&) = default;
};

struct FindingAnnotation {
    std::string class_id;
    std::vector<BoundingBox> boxes;  // non-empty iff the class is Draw
    bool present = true;

    friend bool operator==(const FindingAnnotation&, const FindingAnnotation&) = default;
};

struct LocalizeCase {
    std::string case_id;
    std::string image_ref;
    int image_width_px = 0;
    int image_height_px = 0;
    std::vector<FindingAnnotation> annotations;

    // Number of distinct ground-truth finding classes.
    int difficulty_key() const { return static_cast<int>(annotations.size()); }
    const FindingAnnotation* find(std::string_view class_id) const;

    friend bool operator==(const LocalizeCase&, const LocalizeCase&) = default;
};

struct ReportCase {
    std::string case_id;
    std::vector<std::string> image_refs;
    int age_years = 0;
    std::string indication;
    std::string reference_findings;
    bool priors_excluded = false;

    friend bool operator==(const ReportCase&, const ReportCase&) = default;
};

// Structural checks that do not need a taxonomy. Return the first violation.
std::optional<std::string> validate_case(const LocalizeCase& c);
std::optional<std::string> validate_case(const ReportCase& c);

}  // namespace radgame
