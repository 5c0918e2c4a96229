#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "radgame/core/domain.hpp"
#include "radgame/core/serialization.hpp"

namespace radgame {

struct Improvement {
    double absolute_delta = 0.0;
    std::optional<double> percent;  // absent when pre == 0
};

// 100 * (post - pre) / pre
Improvement relative_improvement(double pre, double post);

enum class TestMethod { exact, normal_approx };
enum class Sidedness { one, two };

std::string_view to_string(TestMethod m);
std::string_view to_string(Sidedness s);
TestMethod parse_test_method(std::string_view text);
Sidedness parse_sidedness(std::string_view text);

struct StatResult {
    std::string test;  // "mann_whitney_u" or "wilcoxon_signed_rank"
    double statistic = 0.0;
    double p_value = 1.0;
    TestMethod method = TestMethod::exact;
    Sidedness sidedness = Sidedness::two;
    std::size_t n_x = 0;
    std::size_t n_y = 0;

    friend bool operator==(const StatResult&, const StatResult&) = default;
};

void to_json(json& j, const StatResult& r);
void from_json(const json& j, StatResult& r);

inline constexpr std::size_t kMannWhitneyExactLimit = 14;  // m + n
inline constexpr std::size_t kWilcoxonExactLimit = 20;     // nonzero pairs

// U = #(x_i > y_j) + 0.5 * #(x_i == y_j). One-sided alternative: x tends to
// exceed y, p = P(U >= u). Exact null distribution over all C(m+n, m)
// labelings of the pooled mid-ranks when m + n <= exact_limit, otherwise a
// normal approximation with tie and continuity corrections.
// Throws Error(empty_sample).
StatResult mann_whitney_u(const std::vector<double>& x, const std::vector<double>& y,
                          Sidedness sidedness = Sidedness::two, std::size_t exact_limit = kMannWhitneyExactLimit);

// d = post - pre, zeros dropped, W = sum of mid-ranks of |d| over d > 0.
// One-sided alternative: post > pre, p = P(W >= w). Exact over all 2^n sign
// vectors when n <= exact_limit. Throws Error(length_mismatch),
// Error(empty_sample) or Error(degenerate) when every difference is zero.
StatResult wilcoxon_signed_rank(const std::vector<double>& pre, const std::vector<double>& post,
                                Sidedness sidedness = Sidedness::one, std::size_t exact_limit = kWilcoxonExactLimit);

struct CurveBin {
    std::size_t bin = 0;
    std::size_t first_case = 0;  // 0-based sequence index, inclusive
    std::size_t last_case = 0;
    std::size_t n = 0;
    double mean_seconds = 0.0;
    std::optional<double> sem;  // needs n >= 2

    friend bool operator==(const CurveBin&, const CurveBin&) = default;
};

void to_json(json& j, const CurveBin& b);
void from_json(const json& j, CurveBin& b);

// sessions[s][k]: seconds spent on the k-th learning case of session s.
// Observations from every session with a case in the bin are pooled.
std::vector<CurveBin> time_curve(const std::vector<std::vector<double>>& sessions, std::size_t bin_size);

struct OutcomeRow {
    std::string participant_id;
    Module module = Module::localize;
    Group group = Group::gamified;
    double pre_score = 0.0;   // mean case accuracy in [0,1], or mean CRIMSON in [0,100]
    double post_score = 0.0;
    double total_learning_time_seconds = 0.0;

    friend bool operator==(const OutcomeRow&, const OutcomeRow&) = default;
};

void to_json(json& j, const OutcomeRow& r);
void from_json(const json& j, OutcomeRow& r);
void validate_outcome(const OutcomeRow& r);

struct GroupSummary {
    Module module = Module::localize;
    Group group = Group::gamified;
    std::size_t n = 0;
    double mean_pre = 0.0;
    double mean_post = 0.0;
    std::optional<double> sem_pre;
    std::optional<double> sem_post;
    Improvement improvement;               // of the group means
    std::optional<StatResult> pre_vs_post;  // one-sided Wilcoxon
};

struct ModuleSummary {
    Module module = Module::localize;
    std::vector<GroupSummary> groups;        // gamified, traditional
    std::optional<StatResult> between_groups;  // two-sided MWU on post - pre
};

void to_json(json& j, const Improvement& i);
void to_json(json& j, const GroupSummary& g);
void to_json(json& j, const ModuleSummary& m);

// Statistics that cannot be computed (too few rows, all-zero differences)
// are left absent.
std::vector<ModuleSummary> summarize(const std::vector<OutcomeRow>& rows);

std::optional<double> sample_sem(const std::vector<double>& values);

enum class ExportFormat { csv, json };
ExportFormat parse_export_format(std::string_view text);

// Fixed column order; doubles printed with round-trip precision.
std::string format_outcomes(const std::vector<OutcomeRow>& rows, ExportFormat format);
std::vector<OutcomeRow> parse_outcomes(std::string_view text, ExportFormat format);
std::string format_stats(const std::vector<StatResult>& stats, ExportFormat format);
std::vector<StatResult> parse_stats(std::string_view text, ExportFormat format);
std::string format_curve(const std::vector<CurveBin>& curve, ExportFormat format);
std::vector<CurveBin> parse_curve(std::string_view text, ExportFormat format);

// Format chosen from the extension (.csv or .json).
ExportFormat format_for_path(const std::filesystem::path& path);
void export_outcomes(const std::filesystem::path& path, const std::vector<OutcomeRow>& rows);
std::vector<OutcomeRow> import_outcomes(const std::filesystem::path& path);
void export_stats(const std::filesystem::path& path, const std::vector<StatResult>& stats);
std::vector<StatResult> import_stats(const std::filesystem::path& path);
void export_curve(const std::filesystem::path& path, const std::vector<CurveBin>& curve);
std::vector<CurveBin> import_curve(const std::filesystem::path& path);

}  // namespace radgame
