#include <algorithm>
#include <cctype>
#include <set>

#include "radgame/core/error.hpp"
#include "radgame/core/random.hpp"
#include "radgame/ingest/ingest.hpp"

namespace radgame {

void to_json(json& j, const CuratedSet& s) {
    j = json{{"set_id", s.set_id},
             {"purpose", to_string(s.purpose)},
             {"module", to_string(s.module)},
             {"case_ids", s.case_ids}};
}

void from_json(const json& j, CuratedSet& s) {
    s.set_id = require_field<std::string>(j, "set_id");
    s.purpose = parse_purpose(require_field<std::string>(j, "purpose"));
    s.module = parse_module(require_field<std::string>(j, "module"));
    s.case_ids = require_field<std::vector<std::string>>(j, "case_ids");
}

std::vector<std::string> stratified_sample(std::vector<StratumItem> pool, std::size_t n, std::uint64_t seed) {
    if (n > pool.size()) {
        throw Error(ErrorCode::invalid_argument, "requested " + std::to_string(n) + " cases but only " +
                                                     std::to_string(pool.size()) + " are available");
    }
    // Canonical order first so the result depends on the pool's contents only.
    std::sort(pool.begin(), pool.end(), [](const StratumItem& a, const StratumItem& b) {
        return a.difficulty != b.difficulty ? a.difficulty < b.difficulty : a.case_id < b.case_id;
    });
    for (std::size_t i = 1; i < pool.size(); ++i) {
        if (pool[i].case_id == pool[i - 1].case_id && pool[i].difficulty == pool[i - 1].difficulty) {
            throw Error(ErrorCode::duplicate_id, "duplicate case_id '" + pool[i].case_id + "' in pool");
        }
    }

    struct Stratum {
        int difficulty;
        std::vector<std::string> ids;
        std::size_t take = 0;
    };
    std::vector<Stratum> strata;
    for (const auto& item : pool) {
        if (strata.empty() || strata.back().difficulty != item.difficulty) strata.push_back({item.difficulty, {}});
        strata.back().ids.push_back(item.case_id);
    }

    std::size_t remaining = n;
    while (remaining > 0) {
        std::vector<Stratum*> open;
        for (auto& s : strata) {
            if (s.take < s.ids.size()) open.push_back(&s);
        }
        const std::size_t share = remaining / open.size();
        if (share == 0) {
            std::stable_sort(open.begin(), open.end(),
                             [](const Stratum* a, const Stratum* b) { return a->ids.size() > b->ids.size(); });
            for (auto* s : open) {
                if (remaining == 0) break;
                ++s->take;
                --remaining;
            }
            break;
        }
        for (auto* s : open) {
            const std::size_t give = std::min(share, s->ids.size() - s->take);
            s->take += give;
            remaining -= give;
        }
    }

    Rng rng(seed);
    std::vector<std::string> chosen;
    chosen.reserve(n);
    for (auto& s : strata) {
        rng.shuffle(s.ids);
        chosen.insert(chosen.end(), s.ids.begin(), s.ids.begin() + static_cast<std::ptrdiff_t>(s.take));
    }
    rng.shuffle(chosen);
    return chosen;
}

int report_difficulty(const ReportCase& c) {
    static const char* const negations[] = {"no ", "without", "normal", "unremarkable", "clear", "negative"};
    int count = 0;
    std::string sentence;
    auto flush = [&] {
        const auto first = sentence.find_first_not_of(" \t\r\n");
        if (first != std::string::npos) {
            std::string s = sentence.substr(first);
            std::transform(s.begin(), s.end(), s.begin(),
                           [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
            bool negative = false;
            for (const char* cue : negations) {
                if (s.rfind(cue, 0) == 0 || s.find(std::string(" ") + cue) != std::string::npos) negative = true;
            }
            if (!negative) ++count;
        }
        sentence.clear();
    };
    for (char ch : c.reference_findings) {
        if (ch == '.' || ch == '\n' || ch == ';') {
            flush();
        } else {
            sentence.push_back(ch);
        }
    }
    flush();
    return count;
}

namespace {

std::string set_id_for(Module module, Purpose purpose, std::uint64_t seed) {
    return std::string(to_string(module)) + "-" + std::string(to_string(purpose)) + "-" + std::to_string(seed);
}

template <typename Case, typename Difficulty>
CuratedSet curate(const std::vector<Case>& cases, Module module, std::size_t n, std::uint64_t seed,
                  Purpose purpose, Difficulty difficulty) {
    std::vector<StratumItem> pool;
    pool.reserve(cases.size());
    for (const auto& c : cases) pool.push_back({c.case_id, difficulty(c)});
    return CuratedSet{set_id_for(module, purpose, seed), purpose, module, stratified_sample(std::move(pool), n, seed)};
}

template <typename Case, typename Difficulty>
StudySets curate_sets(const std::vector<Case>& cases, Module module, PhaseSizes sizes, std::uint64_t seed,
                      Difficulty difficulty) {
    if (sizes.pretest != sizes.posttest) {
        throw Error(ErrorCode::config_error, "pretest and posttest sizes must match (identical cases)");
    }
    StudySets sets;
    sets.pretest = curate(cases, module, sizes.pretest, seed, Purpose::pretest, difficulty);
    const std::set<std::string> used(sets.pretest.case_ids.begin(), sets.pretest.case_ids.end());
    std::vector<Case> rest;
    for (const auto& c : cases) {
        if (!used.count(c.case_id)) rest.push_back(c);
    }
    sets.learning = curate(rest, module, sizes.learning, seed + 1, Purpose::learning, difficulty);
    sets.posttest = sets.pretest;
    sets.posttest.purpose = Purpose::posttest;
    sets.posttest.set_id = set_id_for(module, Purpose::posttest, seed);
    return sets;
}

}  // namespace

CuratedSet curate_test_set(const std::vector<LocalizeCase>& cases, std::size_t n, std::uint64_t seed,
                           Purpose purpose) {
    return curate(cases, Module::localize, n, seed, purpose, [](const LocalizeCase& c) { return c.difficulty_key(); });
}

CuratedSet curate_test_set(const std::vector<ReportCase>& cases, std::size_t n, std::uint64_t seed,
                           Purpose purpose) {
    return curate(cases, Module::report, n, seed, purpose, report_difficulty);
}

PhaseSizes default_phase_sizes(Module module) {
    return module == Module::localize ? PhaseSizes{25, 375, 25} : PhaseSizes{10, 150, 10};
}

StudySets curate_study_sets(const std::vector<LocalizeCase>& cases, PhaseSizes sizes, std::uint64_t seed) {
    return curate_sets(cases, Module::localize, sizes, seed, [](const LocalizeCase& c) { return c.difficulty_key(); });
}

StudySets curate_study_sets(const std::vector<ReportCase>& cases, PhaseSizes sizes, std::uint64_t seed) {
    return curate_sets(cases, Module::report, sizes, seed, report_difficulty);
}

json CaseDistribution::to_json() const {
    json hist = json::object();
    for (const auto& [k, v] : difficulty_histogram) hist[std::to_string(k)] = v;
    return json{{"difficulty_histogram", hist}, {"draw_counts", draw_counts}, {"select_counts", select_counts}};
}

CaseDistribution case_distribution(const std::vector<LocalizeCase>& cases, const TaxonomyConfig& taxonomy) {
    CaseDistribution d;
    for (const auto& c : cases) {
        ++d.difficulty_histogram[c.difficulty_key()];
        for (const auto& a : c.annotations) {
            const auto& cls = taxonomy.at(a.class_id);
            ++(cls.mode == FindingMode::draw ? d.draw_counts : d.select_counts)[cls.id];
        }
    }
    return d;
}

CaseDistribution case_distribution(const std::vector<ReportCase>& cases) {
    CaseDistribution d;
    for (const auto& c : cases) ++d.difficulty_histogram[report_difficulty(c)];
    return d;
}

}  // namespace radgame
