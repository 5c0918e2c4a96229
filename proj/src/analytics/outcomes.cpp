#include <cmath>
#include <map>

#include "radgame/analytics/analytics.hpp"
#include "radgame/core/error.hpp"

namespace radgame {

void to_json(json& j, const OutcomeRow& r) {
    j = json{{"participant_id", r.participant_id},
             {"module", to_string(r.module)},
             {"group", to_string(r.group)},
             {"pre_score", r.pre_score},
             {"post_score", r.post_score},
             {"total_learning_time_seconds", r.total_learning_time_seconds}};
}

void from_json(const json& j, OutcomeRow& r) {
    r.participant_id = require_field<std::string>(j, "participant_id");
    r.module = parse_module(require_field<std::string>(j, "module"));
    r.group = parse_group(require_field<std::string>(j, "group"));
    r.pre_score = require_field<double>(j, "pre_score");
    r.post_score = require_field<double>(j, "post_score");
    r.total_learning_time_seconds = require_field<double>(j, "total_learning_time_seconds");
    validate_outcome(r);
}

void validate_outcome(const OutcomeRow& r) {
    const double hi = r.module == Module::localize ? 1.0 : 100.0;
    for (double v : {r.pre_score, r.post_score}) {
        if (!std::isfinite(v) || v < 0.0 || v > hi) {
            throw Error(ErrorCode::invalid_argument,
                        "score out of range for " + std::string(to_string(r.module)) + ": " + std::to_string(v),
                        r.participant_id);
        }
    }
    if (!std::isfinite(r.total_learning_time_seconds) || r.total_learning_time_seconds < 0) {
        throw Error(ErrorCode::invalid_argument, "learning time must be >= 0", r.participant_id);
    }
}

void to_json(json& j, const Improvement& i) {
    j = json{{"absolute_delta", i.absolute_delta}, {"percent", i.percent ? json(*i.percent) : json(nullptr)}};
}

void to_json(json& j, const GroupSummary& g) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    j = json{{"module", to_string(g.module)}, {"group", to_string(g.group)}, {"n", g.n},
             {"mean_pre", g.mean_pre},        {"mean_post", g.mean_post},    {"sem_pre", opt(g.sem_pre)},
             {"sem_post", opt(g.sem_post)},   {"improvement", g.improvement}};
    j["pre_vs_post"] = g.pre_vs_post ? json(*g.pre_vs_post) : json(nullptr);
}

void to_json(json& j, const ModuleSummary& m) {
    j = json{{"module", to_string(m.module)}, {"groups", m.groups}};
    j["between_groups"] = m.between_groups ? json(*m.between_groups) : json(nullptr);
}

namespace {

double mean(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

std::vector<ModuleSummary> summarize(const std::vector<OutcomeRow>& rows) {
    std::vector<ModuleSummary> out;
    for (Module module : {Module::localize, Module::report}) {
        ModuleSummary ms;
        ms.module = module;
        std::map<Group, std::vector<double>> deltas;
        for (Group group : {Group::gamified, Group::traditional}) {
            std::vector<double> pre, post;
            for (const auto& r : rows) {
                if (r.module != module || r.group != group) continue;
                pre.push_back(r.pre_score);
                post.push_back(r.post_score);
                deltas[group].push_back(r.post_score - r.pre_score);
            }
            if (pre.empty()) continue;
            GroupSummary g;
            g.module = module;
            g.group = group;
            g.n = pre.size();
            g.mean_pre = mean(pre);
            g.mean_post = mean(post);
            g.sem_pre = sample_sem(pre);
            g.sem_post = sample_sem(post);
            g.improvement = relative_improvement(g.mean_pre, g.mean_post);
            try {
                g.pre_vs_post = wilcoxon_signed_rank(pre, post, Sidedness::one);
            } catch (const Error&) {
            }
            ms.groups.push_back(g);
        }
        if (ms.groups.empty()) continue;
        if (!deltas[Group::gamified].empty() && !deltas[Group::traditional].empty()) {
            ms.between_groups = mann_whitney_u(deltas[Group::gamified], deltas[Group::traditional], Sidedness::two);
        }
        out.push_back(ms);
    }
    return out;
}

}  // namespace radgame
