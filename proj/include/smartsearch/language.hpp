#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "smartsearch/providers.hpp"
#include "smartsearch/types.hpp"

namespace smartsearch {

// Nothing in this module throws on provider failure: every failure falls back
// to passing text through unchanged and records a note.

inline constexpr double kDetectionThreshold = 0.5;

/// Provider's top language; below kDetectionThreshold, or on failure, the
/// result is "en" (keeping the observed confidence, 0 on failure).
LanguageTag detect_language(std::string_view text, const DetectionProvider& detector,
                            std::vector<std::string>* notes = nullptr);

struct TranslatedQuery {
    std::string original;
    LanguageTag original_lang;
    std::string english;
    bool bypassed = false; // true iff original_lang is English
    bool degraded = false; // translation failed; english == original
};

TranslatedQuery to_english(std::string_view text, const LanguageTag& lang, const TranslationProvider& translator,
                           std::vector<std::string>* notes = nullptr);

struct BackTranslation {
    std::string text;
    bool degraded = false;
};

/// Translates a response into `target`. `[file_id: N]` markers are swapped for
/// opaque placeholders before translation and restored afterwards; a marker
/// the provider destroyed is appended at the end, so every cited ID survives.
BackTranslation from_english(std::string_view response, const LanguageTag& target, const TranslationProvider& translator,
                             std::vector<std::string>* notes = nullptr);

std::string mask_citations(std::string_view text, std::vector<std::string>& markers);
std::string unmask_citations(std::string_view text, const std::vector<std::string>& markers);

} // namespace smartsearch
