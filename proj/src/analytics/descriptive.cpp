#include <cmath>

#include "radgame/analytics/analytics.hpp"
#include "radgame/core/error.hpp"

namespace radgame {

Improvement relative_improvement(double pre, double post) {
    if (!std::isfinite(pre) || !std::isfinite(post)) {
        throw Error(ErrorCode::invalid_argument, "relative_improvement needs finite scores");
    }
    Improvement out;
    out.absolute_delta = post - pre;
    if (pre != 0.0) out.percent = 100.0 * (post - pre) / pre;
    return out;
}

std::string_view to_string(TestMethod m) { return m == TestMethod::exact ? "exact" : "normal_approx"; }
std::string_view to_string(Sidedness s) { return s == Sidedness::one ? "one" : "two"; }

TestMethod parse_test_method(std::string_view text) {
    if (text == "exact") return TestMethod::exact;
    if (text == "normal_approx") return TestMethod::normal_approx;
    throw Error(ErrorCode::invalid_argument, "unknown test method '" + std::string(text) + "'");
}

Sidedness parse_sidedness(std::string_view text) {
    if (text == "one") return Sidedness::one;
    if (text == "two") return Sidedness::two;
    throw Error(ErrorCode::invalid_argument, "sidedness must be 'one' or 'two'");
}

void to_json(json& j, const StatResult& r) {
    j = json{{"test", r.test},
             {"statistic", r.statistic},
             {"p_value", r.p_value},
             {"method", to_string(r.method)},
             {"sidedness", to_string(r.sidedness)},
             {"n_x", r.n_x},
             {"n_y", r.n_y}};
}

void from_json(const json& j, StatResult& r) {
    r.test = require_field<std::string>(j, "test");
    r.statistic = require_field<double>(j, "statistic");
    r.p_value = require_field<double>(j, "p_value");
    r.method = parse_test_method(require_field<std::string>(j, "method"));
    r.sidedness = parse_sidedness(require_field<std::string>(j, "sidedness"));
    r.n_x = require_field<std::size_t>(j, "n_x");
    r.n_y = require_field<std::size_t>(j, "n_y");
}

std::optional<double> sample_sem(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) return std::nullopt;
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return sd / std::sqrt(static_cast<double>(n));
}

void to_json(json& j, const CurveBin& b) {
    j = json{{"bin", b.bin},   {"first_case", b.first_case},     {"last_case", b.last_case},
             {"n", b.n},       {"mean_seconds", b.mean_seconds}, {"sem", b.sem ? json(*b.sem) : json(nullptr)}};
}

void from_json(const json& j, CurveBin& b) {
    b.bin = require_field<std::size_t>(j, "bin");
    b.first_case = require_field<std::size_t>(j, "first_case");
    b.last_case = require_field<std::size_t>(j, "last_case");
    b.n = require_field<std::size_t>(j, "n");
    b.mean_seconds = require_field<double>(j, "mean_seconds");
    b.sem.reset();
    if (j.contains("sem") && !j["sem"].is_null()) b.sem = j["sem"].get<double>();
}

std::vector<CurveBin> time_curve(const std::vector<std::vector<double>>& sessions, std::size_t bin_size) {
    if (bin_size < 1) throw Error(ErrorCode::invalid_argument, "bin_size must be >= 1");
    std::size_t longest = 0;
    for (const auto& s : sessions) longest = std::max(longest, s.size());
    std::vector<CurveBin> curve;
    for (std::size_t start = 0; start < longest; start += bin_size) {
        std::vector<double> values;
        for (const auto& s : sessions) {
            for (std::size_t k = start; k < std::min(s.size(), start + bin_size); ++k) values.push_back(s[k]);
        }
        CurveBin b;
        b.bin = curve.size();
        b.first_case = start;
        b.last_case = start + bin_size - 1;
        b.n = values.size();
        double sum = 0;
        for (double v : values) sum += v;
        b.mean_seconds = sum / static_cast<double>(values.size());
        b.sem = sample_sem(values);
        curve.push_back(b);
    }
    return curve;
}

}  // namespace radgame
