#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "radgame/core/domain.hpp"
#include "radgame/core/serialization.hpp"

namespace radgame {

// A configured finding set. Raw dataset labels resolve to classes through the
// alias table; matching ignores case and surrounding whitespace, and a class's
// id and display name count as aliases of itself.
class TaxonomyConfig {
public:
    TaxonomyConfig() = default;
    // Throws Error(duplicate_id) on repeated ids, Error(alias_collision) when a
    // normalized alias resolves to two classes.
    TaxonomyConfig(std::string taxonomy_id, std::vector<FindingClass> classes, bool is_default = false);

    static TaxonomyConfig from_json(const json& j);
    static TaxonomyConfig load(const std::filesystem::path& path);
    // Built-in copies of assets/taxonomy/*.json.
    static TaxonomyConfig default_taxonomy();
    static TaxonomyConfig interstitial_taxonomy();

    json to_json() const;

    const std::string& id() const { return taxonomy_id_; }
    bool is_default() const { return is_default_; }
    const std::vector<FindingClass>& classes() const { return classes_; }

    const FindingClass* find(std::string_view class_id) const;
    const FindingClass& at(std::string_view class_id) const;  // throws Error(unknown_class)
    const FindingClass* resolve(std::string_view raw_label) const;

    std::vector<const FindingClass*> by_mode(FindingMode mode) const;

private:
    std::string taxonomy_id_;
    std::vector<FindingClass> classes_;
    bool is_default_ = false;
    std::map<std::string, std::size_t, std::less<>> alias_index_;
    std::map<std::string, std::size_t, std::less<>> id_index_;
};

std::string normalize_label(std::string_view label);

}  // namespace radgame
