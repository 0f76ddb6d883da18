#include <gtest/gtest.h>

#include <fstream>

#include "smartsearch/errors.hpp"
#include "smartsearch/synthesis.hpp"
#include "test_util.hpp"

using namespace smartsearch;
using Ids = std::vector<std::string>;

namespace {

struct Fixture {
    CorpusStore corpus;
    TypedIndexSet indices;

    Fixture() {
        corpus.add(testutil::make_file("1466458735", FileType::video, "wildlife", "lion clip", "Lion Clip"));
        corpus.add(testutil::make_file("5138120512", FileType::image, "wildlife", "lion photo", "Lion Photo"));
        corpus.add(testutil::make_file("7000000001", FileType::audio, "wildlife", "lion roar", "Roar"));
        corpus.add(testutil::make_file("7000000002", FileType::document, "wildlife", "lion report", "Report"));
        indices = build_typed_indices(corpus, {}, MockEmbedder());
    }

    std::vector<ScoredNode> nodes(const Ids& file_ids) const {
        std::vector<ScoredNode> out;
        for (const auto& id : file_ids) {
            ScoredNode n;
            n.file_id = id;
            n.chunk_id = id + "#0";
            out.push_back(n);
        }
        return out;
    }
};

class DownLlm : public LlmProvider {
public:
    std::string complete(const std::string&) const override { throw ProviderError(ProviderError::Kind::status, "429"); }
    std::string describe() const override { return "down"; }
};

class CountingLlm : public LlmProvider {
public:
    mutable int calls = 0;
    std::string complete(const std::string&) const override {
        ++calls;
        return "";
    }
    std::string describe() const override { return "counting"; }
};

} // namespace

TEST(Synthesize, CitingOracleCitesInNodeOrder) {
    const Fixture f;
    const auto r = synthesize("lions", f.nodes({"1466458735", "5138120512"}), MockLlm(),
                              SynthesisPrompt::default_prompt(), f.corpus, f.indices);
    EXPECT_EQ(r.cited_file_ids, (Ids{"1466458735", "5138120512"}));
    EXPECT_NE(r.text.find("Recommended: Lion Clip [file_id: 1466458735]."), std::string::npos);
    EXPECT_TRUE(r.degradation_flags.empty());
    EXPECT_TRUE(r.timings.count("synthesize"));
}

TEST(Synthesize, DropHalfCitesOddRanks) {
    const Fixture f;
    const auto r = synthesize("lions", f.nodes({"1466458735", "5138120512", "7000000001", "7000000002"}),
                              MockLlm(LlmMockMode::drop_half), SynthesisPrompt::default_prompt(), f.corpus, f.indices);
    EXPECT_EQ(r.cited_file_ids, (Ids{"1466458735", "7000000001"}));
}

TEST(Synthesize, EmptyNodesSkipLlm) {
    const Fixture f;
    CountingLlm llm;
    const auto r = synthesize("lions", {}, llm, SynthesisPrompt::default_prompt(), f.corpus, f.indices);
    EXPECT_EQ(r.text, kNoMatchText);
    EXPECT_TRUE(r.cited_file_ids.empty());
    EXPECT_EQ(llm.calls, 0);
}

TEST(Synthesize, ProviderFailureFlags) {
    const Fixture f;
    const auto r = synthesize("lions", f.nodes({"1466458735"}), DownLlm(), SynthesisPrompt::default_prompt(), f.corpus,
                              f.indices);
    EXPECT_EQ(r.text, kSynthesisFailedText);
    EXPECT_TRUE(r.cited_file_ids.empty());
    EXPECT_TRUE(r.degradation_flags.count("synthesis_failed"));
}

TEST(Prompt, RendersChunksAndTypeHints) {
    const Fixture f;
    const auto prompt = render_prompt("lions", f.nodes({"5138120512", "7000000001"}), SynthesisPrompt::default_prompt(),
                                      f.corpus, f.indices);
    EXPECT_TRUE(prompt.starts_with(kTaskSynthesize));
    const auto first = prompt.find("[file_id: 5138120512] type: image | title: Lion Photo\nlion photo");
    const auto second = prompt.find("[file_id: 7000000001] type: audio | title: Roar\nlion roar");
    ASSERT_NE(first, std::string::npos);
    ASSERT_NE(second, std::string::npos);
    EXPECT_LT(first, second);
    const auto hints = format_instructions_for(SynthesisPrompt::default_prompt(), {FileType::image, FileType::audio});
    EXPECT_NE(hints.find("image"), std::string::npos);
    EXPECT_NE(hints.find("audio"), std::string::npos);
    EXPECT_EQ(hints.find("video"), std::string::npos);
    EXPECT_NE(prompt.find(hints), std::string::npos);
}

TEST(Prompt, SlotsAreValidated) {
    SynthesisPrompt p = SynthesisPrompt::default_prompt();
    EXPECT_NO_THROW(p.validate());
    p.template_text = "{query} {chunks}";
    EXPECT_THROW(p.validate(), ConfigError);
    p.template_text = "{query} {chunks} {chunks} {format_instructions}";
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Prompt, LoadFromFile) {
    testutil::TempDir dir;
    const auto path = dir.path() / "prompt.txt";
    std::ofstream(path) << "TASK: synthesize_answer\nQ={query}\n{chunks}\n{format_instructions}\n";
    const auto p = SynthesisPrompt::load(path);
    EXPECT_NE(p.template_text.find("Q={query}"), std::string::npos);
    std::ofstream(path) << "{query}";
    EXPECT_THROW(SynthesisPrompt::load(path), ConfigError);
}

TEST(ExtractIds, MarkersInOrder) {
    const Fixture f;
    EXPECT_EQ(extract_file_ids("photo [file_id: 5138120512] and clip [file_id: 1466458735]", f.corpus),
              (Ids{"5138120512", "1466458735"}));
}

TEST(ExtractIds, NothingToFind) {
    const Fixture f;
    EXPECT_TRUE(extract_file_ids("no matching files found", f.corpus).empty());
}

TEST(ExtractIds, BareRunsFilteredAndDeduplicated) {
    const Fixture f;
    EXPECT_EQ(extract_file_ids("call 555 about file 5138120512, again 5138120512", f.corpus), (Ids{"5138120512"}));
    EXPECT_TRUE(extract_file_ids("51381205123", f.corpus).empty());
}

TEST(ExtractIds, MixedMarkersAndBareRunsKeepTextOrder) {
    const Fixture f;
    const std::string text = "first 7000000002 then [file_id: 5138120512] and 7000000002";
    const auto once = extract_file_ids(text, f.corpus);
    EXPECT_EQ(once, (Ids{"7000000002", "5138120512"}));
    EXPECT_EQ(extract_file_ids(text, f.corpus), once);
}
