#include <algorithm>
#include <cmath>
#include <regex>
#include <set>
#include <span>
#include <unordered_set>
#include <utility>

#include "smartsearch/errors.hpp"
#include "smartsearch/providers.hpp"
#include "smartsearch/text.hpp"

namespace smartsearch {
namespace {

using Pair = std::pair<std::string_view, std::string_view>;

// English -> Korean for the benchmark topics and file types.
constexpr Pair kTerms[] = {
    {"image", "이미지"},
    {"audio", "오디오"},
    {"video", "비디오"},
    {"document", "문서"},
    {"wildlife", "야생동물"},
    {"landscapes", "풍경"},
    {"celebrities", "유명인"},
    {"political events", "정치 행사"},
    {"sports", "스포츠"},
    {"architecture", "건축"},
    {"cuisine", "요리"},
    {"space exploration", "우주 탐사"},
    {"climate change", "기후 변화"},
    {"traditional festivals", "전통 축제"},
};

// Free-text phrases, applied longest first after the whole-template rules.
constexpr Pair kEnToKo[] = {
    {"No matching files were found.", "일치하는 파일을 찾을 수 없습니다."},
    {"The search service could not generate a response.", "검색 서비스가 응답을 생성하지 못했습니다."},
    {"Recommended", "추천"},
    {"recommend", "추천해 주세요"},
    {"retrieve", "검색해 주세요"},
    {"files", "파일"},
    {"file", "파일"},
    {"about", "관련"},
    {"or", "또는"},
};

constexpr Pair kKoToEn[] = {
    {"일치하는 파일을 찾을 수 없습니다.", "No matching files were found."},
    {"검색 서비스가 응답을 생성하지 못했습니다.", "The search service could not generate a response."},
    {"추천해 주세요", "recommend"},
    {"추천해줘", "recommend"},
    {"추천", "Recommended"},
    {"검색해 주세요", "retrieve"},
    {"검색해줘", "retrieve"},
    {"파일을", "files"},
    {"파일", "file"},
    {"관련", "about"},
    {"또는", "or"},
    {"주세요", "please"},
};

std::optional<std::string> korean_to_term(std::string_view korean) {
    for (const auto& [en, ko] : kTerms) {
        if (ko == korean) return std::string(en);
    }
    return std::nullopt;
}

std::string term_or_self_ko(const std::string& english) {
    return mock_korean_term(english).value_or(english);
}

std::string term_or_self_en(const std::string& korean) {
    return korean_to_term(korean).value_or(korean);
}

bool ascii_word_byte(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

struct PhraseTable {
    std::vector<std::pair<std::string, std::string>> entries;
};

PhraseTable sorted_table(std::initializer_list<std::span<const Pair>> sources, bool flip) {
    PhraseTable table;
    for (const auto& src : sources) {
        for (const auto& [a, b] : src) {
            if (flip) {
                table.entries.emplace_back(std::string(b), std::string(a));
            } else {
                table.entries.emplace_back(std::string(a), std::string(b));
            }
        }
    }
    std::stable_sort(table.entries.begin(), table.entries.end(),
                     [](const auto& l, const auto& r) { return l.first.size() > r.first.size(); });
    return table;
}

const PhraseTable& en_to_ko_table() {
    static const PhraseTable table = sorted_table({std::span<const Pair>(kEnToKo), std::span<const Pair>(kTerms)}, false);
    return table;
}

const PhraseTable& ko_to_en_table() {
    static const PhraseTable table = sorted_table({std::span<const Pair>(kKoToEn), std::span<const Pair>(kTerms)}, true);
    return table;
}

// Case-insensitive whole-word phrase substitution for English input.
std::string substitute_english(std::string_view text) {
    const auto& table = en_to_ko_table();
    const std::string lowered = to_lower_ascii(text);
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const bool at_boundary = pos == 0 || !ascii_word_byte(text[pos - 1]);
        bool matched = false;
        if (at_boundary) {
            for (const auto& [from, to] : table.entries) {
                const std::string from_lower = to_lower_ascii(from);
                if (lowered.compare(pos, from_lower.size(), from_lower) != 0) continue;
                const std::size_t end = pos + from_lower.size();
                if (end < text.size() && ascii_word_byte(text[end]) && ascii_word_byte(from_lower.back())) continue;
                out += to;
                pos = end;
                matched = true;
                break;
            }
        }
        if (!matched) out.push_back(text[pos++]);
    }
    return out;
}

// Korean attaches particles to words, so matches are plain substrings.
std::string substitute_korean(std::string_view text) {
    const auto& table = ko_to_en_table();
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        bool matched = false;
        for (const auto& [from, to] : table.entries) {
            if (text.compare(pos, from.size(), from) == 0) {
                out += to;
                pos += from.size();
                matched = true;
                break;
            }
        }
        if (!matched) out.push_back(text[pos++]);
    }
    return out;
}

const std::unordered_set<std::string>& english_function_words() {
    static const std::unordered_set<std::string> words = {
        "the", "a", "an", "of", "about", "some", "me", "give", "or", "and", "in", "on", "for", "to",
        "with", "is", "are", "was", "were", "be", "this", "that", "it", "any", "all", "files", "file",
        "recommend", "retrieve", "show", "find", "please", "what", "which", "from", "by", "at", "no",
        "not", "could", "can", "recommended", "matching", "found"};
    return words;
}

// Keyword tables the mock LLM uses when acting as the engine selector.
struct EngineWords {
    FileType type;
    std::vector<std::string_view> english;
    std::string_view korean;
};

const std::vector<EngineWords>& engine_words() {
    static const std::vector<EngineWords> words = {
        {FileType::image, {"image", "images", "photo", "photos", "picture", "pictures"}, "이미지"},
        {FileType::audio, {"audio", "audios", "sound", "sounds", "recording", "recordings"}, "오디오"},
        {FileType::video, {"video", "videos", "clip", "clips", "footage"}, "비디오"},
        {FileType::document, {"document", "documents", "text", "texts", "report", "reports"}, "문서"},
    };
    return words;
}

std::string line_value(const std::string& prompt, std::string_view key) {
    std::size_t start = 0;
    while (start <= prompt.size()) {
        auto end = prompt.find('\n', start);
        if (end == std::string::npos) end = prompt.size();
        std::string_view line(prompt.data() + start, end - start);
        if (line.substr(0, key.size()) == key) return trim(line.substr(key.size()));
        start = end + 1;
    }
    return {};
}

std::string mock_describe(const std::string& prompt) {
    const auto type = line_value(prompt, "file_type:");
    const auto topic = line_value(prompt, "topic:");
    const auto title = line_value(prompt, "title:");
    return "A " + type + " file about " + topic + " titled \"" + title + "\".";
}

std::string mock_route(const std::string& prompt) {
    const auto query = line_value(prompt, "query:");
    const auto tokens = tokenize(query);
    const std::set<std::string> token_set(tokens.begin(), tokens.end());
    std::vector<std::string> picked;
    for (const auto& entry : engine_words()) {
        bool hit = query.find(entry.korean) != std::string::npos;
        for (const auto word : entry.english) hit = hit || token_set.count(std::string(word)) > 0;
        if (hit) picked.emplace_back(to_string(entry.type));
    }
    if (picked.empty()) {
        for (const auto type : kAllFileTypes) picked.emplace_back(to_string(type));
    }
    std::string out = "[";
    for (std::size_t i = 0; i < picked.size(); ++i) {
        if (i) out += ", ";
        out += "\"" + picked[i] + "\"";
    }
    return out + "]";
}

std::string mock_synthesize(const std::string& prompt, bool drop_half) {
    static const std::regex header(R"(^\[file_id: (\d+)\] type: \w+ \| title: (.*)$)");
    std::vector<std::pair<std::string, std::string>> files;
    std::set<std::string> seen;
    std::size_t start = 0;
    while (start < prompt.size()) {
        auto end = prompt.find('\n', start);
        if (end == std::string::npos) end = prompt.size();
        const std::string line = prompt.substr(start, end - start);
        std::smatch m;
        if (std::regex_match(line, m, header) && seen.insert(m[1].str()).second) {
            files.emplace_back(m[1].str(), m[2].str());
        }
        start = end + 1;
    }
    if (files.empty()) return "No matching files were found.";
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (drop_half && i % 2 == 1) continue;
        lines.push_back("Recommended: " + files[i].second + " [file_id: " + files[i].first + "].");
    }
    return join(lines, "\n");
}

} // namespace

std::optional<std::string> mock_korean_term(std::string_view english) {
    const std::string lowered = to_lower_ascii(english);
    for (const auto& [en, ko] : kTerms) {
        if (en == lowered) return std::string(ko);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

std::string MockLlm::complete(const std::string& prompt) const {
    switch (mode_) {
    case LlmMockMode::fail: throw ProviderError(ProviderError::Kind::unavailable, "mock llm configured to fail");
    case LlmMockMode::echo: return prompt;
    case LlmMockMode::citing_oracle:
    case LlmMockMode::drop_half: break;
    }
    if (prompt.starts_with(kTaskDescribe)) return mock_describe(prompt);
    if (prompt.starts_with(kTaskRoute)) return mock_route(prompt);
    return mock_synthesize(prompt, mode_ == LlmMockMode::drop_half);
}

std::string MockLlm::describe() const { return "mock-llm(" + std::string(to_string(mode_)) + ")"; }

MockEmbedder::MockEmbedder(std::size_t dims, std::uint64_t seed) : dims_(dims), seed_(seed) {
    MockBehavior{LlmMockMode::citing_oracle, dims, seed}.validate();
}

std::size_t MockEmbedder::bucket_of(std::string_view term) const {
    return static_cast<std::size_t>(fnv1a64(term, seed_) % dims_);
}

EmbeddingVector MockEmbedder::embed(std::string_view text) const {
    if (text.empty()) throw ProviderError(ProviderError::Kind::invalid_input, "empty input");
    EmbeddingVector vec;
    vec.values.assign(dims_, 0.0);
    for (const auto& term : tokenize(text)) vec.values[bucket_of(term)] += 1.0;
    double norm_sq = 0.0;
    for (const double v : vec.values) norm_sq += v * v;
    if (norm_sq > 0.0) {
        const double norm = std::sqrt(norm_sq);
        for (double& v : vec.values) v /= norm;
    }
    return vec;
}

std::string MockEmbedder::describe() const {
    return "mock-embed(dims=" + std::to_string(dims_) + ",seed=" + std::to_string(seed_) + ")";
}

LanguageTag MockDetector::detect(std::string_view text) const {
    if (contains_hangul(text)) {
        std::size_t hangul = 0;
        std::size_t latin = 0;
        for (const auto& token : tokenize(text)) {
            if (contains_hangul(token)) {
                ++hangul;
            } else if (std::any_of(token.begin(), token.end(), [](char c) { return c >= 'a' && c <= 'z'; })) {
                ++latin;
            }
        }
        const double share = hangul + latin == 0 ? 1.0 : static_cast<double>(hangul) / static_cast<double>(hangul + latin);
        return {"ko", std::min(1.0, 0.9 + 0.1 * share)};
    }
    const auto tokens = tokenize(text);
    std::size_t words = 0;
    std::size_t function_words = 0;
    for (const auto& token : tokens) {
        if (!std::any_of(token.begin(), token.end(), [](char c) { return c >= 'a' && c <= 'z'; })) continue;
        ++words;
        if (english_function_words().count(token)) ++function_words;
    }
    if (words == 0) return {"en", 0.0};
    if (function_words == 0) return {"en", 0.6};
    return {"en", 0.9 + 0.1 * static_cast<double>(function_words) / static_cast<double>(words)};
}

std::string MockTranslator::to_korean(std::string_view english) {
    static const std::regex type1(R"(^Recommend some (\S+) files about (.+)$)");
    static const std::regex type2(R"(^Retrieve some (\S+) or (\S+) files about (.+)$)");
    static const std::regex type3(R"(^Give me some files about (.+)$)");
    const std::string text(english);
    std::smatch m;
    if (std::regex_match(text, m, type1)) {
        return term_or_self_ko(m[2]) + " 관련 " + term_or_self_ko(m[1]) + " 파일을 추천해 주세요";
    }
    if (std::regex_match(text, m, type2)) {
        return term_or_self_ko(m[3]) + " 관련 " + term_or_self_ko(m[1]) + " 또는 " + term_or_self_ko(m[2]) +
               " 파일을 검색해 주세요";
    }
    if (std::regex_match(text, m, type3)) return term_or_self_ko(m[1]) + " 관련 파일을 주세요";
    return substitute_english(english);
}

std::string MockTranslator::to_english(std::string_view korean) {
    static const std::regex type1(R"(^(.+) 관련 (\S+) 파일을 추천해 주세요$)");
    static const std::regex type2(R"(^(.+) 관련 (\S+) 또는 (\S+) 파일을 검색해 주세요$)");
    static const std::regex type3(R"(^(.+) 관련 파일을 주세요$)");
    const std::string text(korean);
    std::smatch m;
    if (std::regex_match(text, m, type2)) {
        return "Retrieve some " + term_or_self_en(m[2]) + " or " + term_or_self_en(m[3]) + " files about " +
               term_or_self_en(m[1]);
    }
    if (std::regex_match(text, m, type1)) {
        return "Recommend some " + term_or_self_en(m[2]) + " files about " + term_or_self_en(m[1]);
    }
    if (std::regex_match(text, m, type3)) return "Give me some files about " + term_or_self_en(m[1]);
    return substitute_korean(korean);
}

std::string MockTranslator::translate(std::string_view text, std::string_view source, std::string_view target) const {
    if (source == target) return std::string(text);
    if (source == "en" && target == "ko") return to_korean(text);
    if (source == "ko" && target == "en") return to_english(text);
    throw ProviderError(ProviderError::Kind::invalid_input,
                        "mock translator supports en<->ko only, got " + std::string(source) + "->" + std::string(target));
}

std::vector<double> MockReranker::score(std::string_view query, const std::vector<std::string>& texts) const {
    const auto q = tokenize(query);
    const std::set<std::string> query_terms(q.begin(), q.end());
    std::vector<double> scores;
    scores.reserve(texts.size());
    for (const auto& text : texts) {
        if (query_terms.empty()) {
            scores.push_back(0.0);
            continue;
        }
        const auto t = tokenize(text);
        const std::set<std::string> text_terms(t.begin(), t.end());
        std::size_t shared = 0;
        for (const auto& term : query_terms) shared += text_terms.count(term);
        scores.push_back(static_cast<double>(shared) / static_cast<double>(query_terms.size()));
    }
    return scores;
}

} // namespace smartsearch
