#include <numeric>
#include <set>

#include "radgame/core/error.hpp"
#include "radgame/core/random.hpp"
#include "radgame/study/study.hpp"

namespace radgame {

void to_json(json& j, const ParticipantAssignment& a) {
    j = json{{"participant_id", a.participant_id},
             {"localize_group", to_string(a.localize_group)},
             {"report_group", to_string(a.report_group)}};
}

void from_json(const json& j, ParticipantAssignment& a) {
    a.participant_id = require_field<std::string>(j, "participant_id");
    a.localize_group = parse_group(require_field<std::string>(j, "localize_group"));
    a.report_group = parse_group(require_field<std::string>(j, "report_group"));
    if (a.localize_group == a.report_group) {
        throw Error(ErrorCode::schema_violation, "assignment breaks the crossover", a.participant_id);
    }
}

std::vector<ParticipantAssignment> assign_groups(const std::vector<std::string>& participant_ids, std::uint64_t seed) {
    if (participant_ids.empty()) throw Error(ErrorCode::invalid_argument, "no participants to assign");
    std::set<std::string> seen;
    for (const auto& id : participant_ids) {
        if (id.empty()) throw Error(ErrorCode::invalid_argument, "participant id must not be empty");
        if (!seen.insert(id).second) throw Error(ErrorCode::duplicate_id, "duplicate participant id '" + id + "'");
    }
    const std::size_t n = participant_ids.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<ParticipantAssignment> out(n);
    const std::size_t gamified = (n + 1) / 2;
    for (std::size_t k = 0; k < n; ++k) {
        auto& a = out[order[k]];
        a.participant_id = participant_ids[order[k]];
        a.localize_group = k < gamified ? Group::gamified : Group::traditional;
        a.report_group = opposite(a.localize_group);
    }
    return out;
}

}  // namespace radgame
