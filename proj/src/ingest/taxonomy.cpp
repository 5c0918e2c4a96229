#include "radgame/ingest/taxonomy.hpp"

#include <algorithm>
#include <cctype>

#include "radgame/core/assets.hpp"
#include "radgame/core/error.hpp"

namespace radgame {

std::string normalize_label(std::string_view label) {
    std::string out;
    out.reserve(label.size());
    bool pending_space = false;
    for (unsigned char ch : label) {
        if (std::isspace(ch)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(ch)));
    }
    return out;
}

TaxonomyConfig::TaxonomyConfig(std::string taxonomy_id, std::vector<FindingClass> classes, bool is_default)
    : taxonomy_id_(std::move(taxonomy_id)), classes_(std::move(classes)), is_default_(is_default) {
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        const auto& c = classes_[i];
        if (c.id.empty()) throw Error(ErrorCode::config_error, "finding class with empty id");
        if (!id_index_.emplace(c.id, i).second) {
            throw Error(ErrorCode::duplicate_id, "duplicate finding class id '" + c.id + "'", c.id);
        }
        std::vector<std::string> keys{normalize_label(c.id), normalize_label(c.display_name)};
        for (const auto& a : c.aliases) keys.push_back(normalize_label(a));
        for (const auto& key : keys) {
            if (key.empty()) continue;
            auto [it, inserted] = alias_index_.emplace(key, i);
            if (!inserted && it->second != i) {
                throw Error(ErrorCode::alias_collision,
                            "alias '" + key + "' maps to both '" + classes_[it->second].id + "' and '" + c.id + "'",
                            key);
            }
        }
    }
}

TaxonomyConfig TaxonomyConfig::from_json(const json& j) {
    auto id = require_field<std::string>(j, "taxonomy_id");
    auto classes = require_field<std::vector<FindingClass>>(j, "classes");
    return TaxonomyConfig(std::move(id), std::move(classes), j.value("default", false));
}

TaxonomyConfig TaxonomyConfig::load(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
    }
    return from_json(j);
}

TaxonomyConfig TaxonomyConfig::default_taxonomy() {
    return from_json(json::parse(assets::default_taxonomy_json()));
}

TaxonomyConfig TaxonomyConfig::interstitial_taxonomy() {
    return from_json(json::parse(assets::interstitial_taxonomy_json()));
}

json TaxonomyConfig::to_json() const {
    return json{{"taxonomy_id", taxonomy_id_}, {"default", is_default_}, {"classes", classes_}};
}

const FindingClass* TaxonomyConfig::find(std::string_view class_id) const {
    auto it = id_index_.find(class_id);
    return it == id_index_.end() ? nullptr : &classes_[it->second];
}

const FindingClass& TaxonomyConfig::at(std::string_view class_id) const {
    if (const auto* c = find(class_id)) return *c;
    throw Error(ErrorCode::unknown_class,
                "class '" + std::string(class_id) + "' is not in taxonomy '" + taxonomy_id_ + "'",
                std::string(class_id));
}

const FindingClass* TaxonomyConfig::resolve(std::string_view raw_label) const {
    auto it = alias_index_.find(normalize_label(raw_label));
    return it == alias_index_.end() ? nullptr : &classes_[it->second];
}

std::vector<const FindingClass*> TaxonomyConfig::by_mode(FindingMode mode) const {
    std::vector<const FindingClass*> out;
    for (const auto& c : classes_) {
        if (c.mode == mode) out.push_back(&c);
    }
    return out;
}

}  // namespace radgame
