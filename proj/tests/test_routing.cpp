#include <gtest/gtest.h>

#include <set>

#include "smartsearch/errors.hpp"
#include "smartsearch/routing.hpp"
#include "test_util.hpp"

using namespace smartsearch;
using Types = std::vector<FileType>;

namespace {

class ScriptedLlm : public LlmProvider {
public:
    explicit ScriptedLlm(std::string reply, bool fail = false) : reply_(std::move(reply)), fail_(fail) {}
    std::string complete(const std::string&) const override {
        if (fail_) throw ProviderError(ProviderError::Kind::status, "503");
        return reply_;
    }
    std::string describe() const override { return "scripted"; }

private:
    std::string reply_;
    bool fail_;
};

CorpusStore four_types() {
    CorpusStore store;
    int id = 1;
    for (const auto type : kAllFileTypes) {
        for (const std::string topic : {"wildlife", "sports"}) {
            store.add(testutil::make_file(std::to_string(id++), type, topic,
                                          std::string(to_string(type)) + " about " + topic + " lion goal"));
        }
    }
    return store;
}

} // namespace

TEST(Route, BenchmarkTemplatesWithMockSelector) {
    const MockLlm llm;
    const auto one = classify_query("Recommend some image files about wildlife", &llm);
    EXPECT_EQ(one.engines, (Types{FileType::image}));
    EXPECT_EQ(one.method, RouteMethod::llm_selector);
    EXPECT_EQ(classify_query("Retrieve some audio or video files about celebrities", &llm).engines,
              (Types{FileType::audio, FileType::video}));
    EXPECT_EQ(classify_query("Give me some files about landscapes", &llm).engines,
              (Types{kAllFileTypes.begin(), kAllFileTypes.end()}));
}

TEST(Route, RuleRouter) {
    EXPECT_EQ(rule_route("Retrieve some VIDEO or document files").engines, (Types{FileType::video, FileType::document}));
    EXPECT_EQ(rule_route("anything at all").engines.size(), 4u);
    EXPECT_EQ(rule_route("x").method, RouteMethod::rule_fallback);
}

TEST(Route, SelectorFailureFallsBack) {
    const ScriptedLlm failing("", true);
    const auto d = classify_query("Recommend some audio files about sports", &failing);
    EXPECT_EQ(d.method, RouteMethod::rule_fallback);
    EXPECT_EQ(d.engines, (Types{FileType::audio}));
    const ScriptedLlm garbage("I think images?");
    EXPECT_EQ(classify_query("Recommend some audio files", &garbage).method, RouteMethod::rule_fallback);
    EXPECT_EQ(classify_query("Recommend some audio files", nullptr).method, RouteMethod::rule_fallback);
}

TEST(Route, SelectorReplyParsing) {
    EXPECT_EQ(parse_selector_reply(R"(Sure: ["video", "image", "video"])"), (Types{FileType::image, FileType::video}));
    EXPECT_FALSE(parse_selector_reply("[]").has_value());
    EXPECT_FALSE(parse_selector_reply(R"(["spreadsheet"])").has_value());
    EXPECT_FALSE(parse_selector_reply("none").has_value());
}

TEST(RouteAndQuery, OneResultPerEngineTypedCorrectly) {
    const auto corpus = four_types();
    const MockEmbedder embedder;
    const auto set = build_typed_indices(corpus, {}, embedder);
    RouteDecision all;
    all.engines.assign(kAllFileTypes.begin(), kAllFileTypes.end());
    const auto results = route_and_query("lion wildlife", all, set, {}, embedder);
    ASSERT_EQ(results.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(results[i].file_type, kAllFileTypes[i]);
        EXPECT_FALSE(results[i].nodes.empty());
        for (const auto& n : results[i].nodes) EXPECT_EQ(corpus.find(n.file_id)->file_type, kAllFileTypes[i]);
    }
    RouteDecision image;
    image.engines = {FileType::image};
    EXPECT_EQ(route_and_query("lion", image, set, {}, embedder).size(), 1u);
}

TEST(RouteAndQuery, MissingIndexIsNoted) {
    CorpusStore corpus;
    corpus.add(testutil::make_file("1", FileType::image, "wildlife", "lion"));
    const MockEmbedder embedder;
    const auto set = build_typed_indices(corpus, {}, embedder);
    RouteDecision audio;
    audio.engines = {FileType::audio};
    std::vector<std::string> notes;
    const auto results = route_and_query("lion", audio, set, {}, embedder, &notes);
    ASSERT_EQ(results.size(), 1u);
    EXPECT_TRUE(results[0].missing_index);
    EXPECT_TRUE(results[0].nodes.empty());
    ASSERT_EQ(notes.size(), 1u);
    EXPECT_NE(notes[0].find("audio"), std::string::npos);
}

TEST(Summarize, MergesByScoreThenId) {
    auto n = [](std::string id, double s) {
        ScoredNode x;
        x.chunk_id = id;
        x.file_id = id;
        x.hybrid_score = s;
        return x;
    };
    EngineResult a;
    a.nodes = {n("a", 0.9), n("b", 0.2)};
    EngineResult b;
    b.nodes = {n("c", 0.7)};
    auto merged = summarize_results({a, b}, 10);
    ASSERT_EQ(merged.size(), 3u);
    EXPECT_EQ(merged[0].chunk_id, "a");
    EXPECT_EQ(merged[1].chunk_id, "c");
    EXPECT_EQ(merged[2].chunk_id, "b");

    EngineResult c;
    c.nodes = {n("z", 0.5)};
    EngineResult d;
    d.nodes = {n("y", 0.5)};
    merged = summarize_results({c, d}, 1);
    ASSERT_EQ(merged.size(), 1u);
    EXPECT_EQ(merged[0].chunk_id, "y");
    EXPECT_EQ(summarize_results({a}, 10), a.nodes);
}
