#include "smartsearch/language.hpp"

#include <algorithm>
#include <regex>

#include "smartsearch/text.hpp"

namespace smartsearch {
namespace {

void note(std::vector<std::string>* notes, std::string message) {
    if (notes != nullptr) notes->push_back(std::move(message));
}

std::string placeholder(std::size_t i) { return "{{FID" + std::to_string(i) + "}}"; }

bool valid_code(const std::string& code) {
    return code.size() == 2 && std::all_of(code.begin(), code.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

} // namespace

LanguageTag detect_language(std::string_view text, const DetectionProvider& detector, std::vector<std::string>* notes) {
    if (trim(text).empty()) {
        note(notes, "language detection skipped for empty text; assuming en");
        return {"en", 0.0};
    }
    LanguageTag tag;
    try {
        tag = detector.detect(text);
    } catch (const std::exception& e) {
        note(notes, std::string("language detection failed (") + e.what() + "); assuming en");
        return {"en", 0.0};
    }
    tag.code = to_lower_ascii(tag.code);
    if (!valid_code(tag.code)) {
        note(notes, "detector returned invalid code '" + tag.code + "'; assuming en");
        return {"en", 0.0};
    }
    if (tag.confidence < kDetectionThreshold) {
        note(notes, "detected " + tag.code + " below confidence threshold; assuming en");
        return {"en", tag.confidence};
    }
    return tag;
}

TranslatedQuery to_english(std::string_view text, const LanguageTag& lang, const TranslationProvider& translator,
                           std::vector<std::string>* notes) {
    TranslatedQuery out;
    out.original = std::string(text);
    out.original_lang = lang;
    if (lang.is_english()) {
        out.bypassed = true;
        out.english = out.original;
        return out;
    }
    try {
        out.english = translator.translate(text, lang.code, "en");
    } catch (const std::exception& e) {
        out.english = out.original;
        out.degraded = true;
        note(notes, std::string("query translation failed (") + e.what() + "); using original text");
    }
    return out;
}

std::string mask_citations(std::string_view text, std::vector<std::string>& markers) {
    static const std::regex marker(R"(\[file_id:\s*\d+\])");
    markers.clear();
    std::string out;
    const std::string input(text);
    auto it = std::sregex_iterator(input.begin(), input.end(), marker);
    std::size_t last = 0;
    for (; it != std::sregex_iterator(); ++it) {
        out.append(input, last, static_cast<std::size_t>(it->position()) - last);
        out += placeholder(markers.size());
        markers.push_back(it->str());
        last = static_cast<std::size_t>(it->position() + it->length());
    }
    out.append(input, last, std::string::npos);
    return out;
}

std::string unmask_citations(std::string_view text, const std::vector<std::string>& markers) {
    std::string out(text);
    std::vector<std::string> lost;
    for (std::size_t i = 0; i < markers.size(); ++i) {
        const auto ph = placeholder(i);
        if (out.find(ph) == std::string::npos) {
            lost.push_back(markers[i]);
        } else {
            out = replace_all(std::move(out), ph, markers[i]);
        }
    }
    if (!lost.empty()) out += "\n" + join(lost, " ");
    return out;
}

BackTranslation from_english(std::string_view response, const LanguageTag& target, const TranslationProvider& translator,
                             std::vector<std::string>* notes) {
    if (target.is_english()) return {std::string(response), false};
    std::vector<std::string> markers;
    const auto masked = mask_citations(response, markers);
    try {
        return {unmask_citations(translator.translate(masked, "en", target.code), markers), false};
    } catch (const std::exception& e) {
        note(notes, std::string("response translation failed (") + e.what() + "); returning English text");
        return {std::string(response), true};
    }
}

} // namespace smartsearch
