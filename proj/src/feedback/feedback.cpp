#include <future>

#include "radgame/core/assets.hpp"
#include "radgame/core/error.hpp"
#include "radgame/feedback/feedback.hpp"
#include "radgame/report/prompts.hpp"

namespace radgame {

std::string_view to_string(FeedbackKind kind) {
    switch (kind) {
        case FeedbackKind::draw_missed: return "draw_missed";
        case FeedbackKind::draw_wrong_location: return "draw_wrong_location";
        case FeedbackKind::select_missed: return "select_missed";
    }
    return "select_missed";
}

std::string_view to_string(FeedbackSource source) { return source == FeedbackSource::model ? "model" : "fixture"; }

FeedbackKind parse_feedback_kind(std::string_view text) {
    for (auto k : {FeedbackKind::draw_missed, FeedbackKind::draw_wrong_location, FeedbackKind::select_missed}) {
        if (to_string(k) == text) return k;
    }
    throw Error(ErrorCode::invalid_argument, "unknown feedback kind '" + std::string(text) + "'");
}

FeedbackSource parse_feedback_source(std::string_view text) {
    if (text == "model") return FeedbackSource::model;
    if (text == "fixture") return FeedbackSource::fixture;
    throw Error(ErrorCode::invalid_argument, "unknown feedback source '" + std::string(text) + "'");
}

void to_json(json& j, const FeedbackItem& f) {
    j = json{{"item_id", f.item_id},
             {"case_id", f.case_id},
             {"class_id", f.class_id},
             {"display_name", f.display_name},
             {"kind", to_string(f.kind)},
             {"overlay_rendered", f.overlay_rendered},
             {"ground_truth_boxes", f.ground_truth_boxes},
             {"explanation_text", f.explanation_text},
             {"source", to_string(f.source)}};
    j["overlay_image_ref"] = f.overlay_image_ref ? json(*f.overlay_image_ref) : json(nullptr);
}

void from_json(const json& j, FeedbackItem& f) {
    f.item_id = require_field<std::string>(j, "item_id");
    f.case_id = require_field<std::string>(j, "case_id");
    f.class_id = require_field<std::string>(j, "class_id");
    f.display_name = j.value("display_name", f.class_id);
    f.kind = parse_feedback_kind(require_field<std::string>(j, "kind"));
    f.overlay_rendered = j.value("overlay_rendered", false);
    f.ground_truth_boxes = j.value("ground_truth_boxes", std::vector<BoundingBox>{});
    f.explanation_text = require_field<std::string>(j, "explanation_text");
    f.source = parse_feedback_source(require_field<std::string>(j, "source"));
    f.overlay_image_ref.reset();
    if (j.contains("overlay_image_ref") && !j["overlay_image_ref"].is_null()) {
        f.overlay_image_ref = j["overlay_image_ref"].get<std::string>();
    }
}

std::string fallback_description(const FindingClass& cls) {
    static const json table = json::parse(assets::explainer_fallbacks_json());
    const auto& classes = table.at("classes");
    if (classes.contains(cls.id)) return classes[cls.id].get<std::string>();
    return render_template(table.at("generic").get<std::string>(), {{"class", cls.display_name}});
}

std::string build_draw_explainer_prompt(const FindingClass& cls) {
    return render_template(assets::explainer_draw_prompt_template(), {{"class", cls.display_name}});
}

std::string build_select_explainer_prompt(const FindingClass& cls) {
    return render_template(assets::explainer_select_prompt_template(), {{"class", cls.display_name}});
}

std::string overlay_file_name(const std::string& case_id, const std::string& class_id) {
    return case_id + "." + class_id + ".overlay.png";
}

namespace {

std::string strip_trailing_newline(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

}  // namespace

FeedbackItem make_draw_feedback(const LocalizeCase& c, const FindingClass& cls, Gateway* gateway,
                                const FeedbackOptions& options, FeedbackKind kind) {
    if (cls.mode != FindingMode::draw) {
        throw Error(ErrorCode::invalid_argument, "'" + cls.id + "' is not a Draw finding");
    }
    const FindingAnnotation* gt = c.find(cls.id);
    if (!gt) throw Error(ErrorCode::invalid_argument, "'" + cls.id + "' is not in the ground truth of " + c.case_id);

    FeedbackItem item;
    item.item_id = c.case_id + "." + cls.id;
    item.case_id = c.case_id;
    item.class_id = cls.id;
    item.display_name = cls.display_name;
    item.kind = kind;
    item.ground_truth_boxes = gt->boxes;

    std::vector<BoundingBox> boxes;
    if (options.overlay_all_classes) {
        for (const auto& a : c.annotations) boxes.insert(boxes.end(), a.boxes.begin(), a.boxes.end());
    } else {
        boxes = gt->boxes;
    }

    const std::filesystem::path image_path = options.image_root / c.image_ref;
    const std::filesystem::path overlay_dir = options.overlay_root.empty() ? image_path.parent_path() : options.overlay_root;
    const auto overlay_path = overlay_dir / overlay_file_name(c.case_id, cls.id);
    const std::filesystem::path overlay_ref =
        options.overlay_root.empty() ? std::filesystem::path(c.image_ref).parent_path() / overlay_file_name(c.case_id, cls.id)
                                     : overlay_path;
    item.overlay_image_ref = overlay_ref.generic_string();

    std::string png;
    try {
        png = encode_png(render_overlay(load_image(image_path), boxes, options.style));
        write_text_file(overlay_path, png);
        item.overlay_rendered = true;
    } catch (const Error&) {
        item.overlay_rendered = false;
        item.overlay_image_ref = c.image_ref;
    }

    item.source = FeedbackSource::fixture;
    item.explanation_text = fallback_description(cls);
    if (gateway && item.overlay_rendered) {
        GatewayRequest req;
        req.role = ModelRole::explainer;
        req.prompt = build_draw_explainer_prompt(cls);
        req.images.push_back({"image/png", base64_encode(png)});
        req.purpose = "explain_draw";
        req.subject = cls.id;
        try {
            item.explanation_text = strip_trailing_newline(gateway->complete(req).text);
            item.source = FeedbackSource::model;
        } catch (const Error&) {
            // Fallback text already in place.
        }
    }
    return item;
}

FeedbackItem make_select_feedback(const std::string& case_id, const FindingClass& cls, Gateway* gateway) {
    if (cls.mode != FindingMode::select) {
        throw Error(ErrorCode::invalid_argument, "'" + cls.id + "' is not a Select finding");
    }
    FeedbackItem item;
    item.item_id = case_id + "." + cls.id;
    item.case_id = case_id;
    item.class_id = cls.id;
    item.display_name = cls.display_name;
    item.kind = FeedbackKind::select_missed;
    item.source = FeedbackSource::fixture;
    item.explanation_text = fallback_description(cls);
    if (gateway) {
        GatewayRequest req;
        req.role = ModelRole::explainer;
        req.prompt = build_select_explainer_prompt(cls);
        req.purpose = "explain_select";
        req.subject = cls.id;
        try {
            item.explanation_text = strip_trailing_newline(gateway->complete(req).text);
            item.source = FeedbackSource::model;
        } catch (const Error&) {
        }
    }
    return item;
}

std::vector<FeedbackItem> generate_feedback(const LocalizeCase& c, const LocalizeCaseResult& result,
                                            const TaxonomyConfig& taxonomy, Gateway* gateway,
                                            const FeedbackOptions& options) {
    std::vector<std::future<FeedbackItem>> pending;
    for (const auto& r : result.classes) {
        const auto& cls = taxonomy.at(r.class_id);
        if (r.outcome == ClassOutcome::missed && cls.mode == FindingMode::select) {
            pending.push_back(std::async(std::launch::async, [&, cls_ptr = &cls] {
                return make_select_feedback(c.case_id, *cls_ptr, gateway);
            }));
        } else if ((r.outcome == ClassOutcome::missed || r.outcome == ClassOutcome::wrong_location) &&
                   cls.mode == FindingMode::draw) {
            const auto kind =
                r.outcome == ClassOutcome::missed ? FeedbackKind::draw_missed : FeedbackKind::draw_wrong_location;
            pending.push_back(std::async(std::launch::async, [&, cls_ptr = &cls, kind] {
                return make_draw_feedback(c, *cls_ptr, gateway, options, kind);
            }));
        }
    }
    std::vector<FeedbackItem> items;
    items.reserve(pending.size());
    for (auto& f : pending) items.push_back(f.get());
    return items;
}

}  // namespace radgame
