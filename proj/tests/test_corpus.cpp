#include <gtest/gtest.h>

#include <sstream>

#include "smartsearch/corpus.hpp"
#include "smartsearch/errors.hpp"
#include "smartsearch/eval.hpp"
#include "test_util.hpp"

using namespace smartsearch;

namespace {

std::string record(const std::string& id, const std::string& type = "image", const std::string& topic = "wildlife",
                   const std::string& extra = "") {
    return R"({"file_id":")" + id + R"(","file_type":")" + type + R"(","topic":")" + topic +
           R"(","title":"t","text_repr":"some text")" + extra + "}\n";
}

class FailingLlm : public LlmProvider {
public:
    std::string complete(const std::string&) const override { throw ProviderError(ProviderError::Kind::timeout, "down"); }
    std::string describe() const override { return "failing"; }
};

} // namespace

TEST(Corpus, ThreeLines) {
    std::istringstream in(record("1") + record("2") + "\n" + record("3"));
    const auto store = parse_corpus(in);
    EXPECT_EQ(store.size(), 3u);
    EXPECT_EQ(store.order(), (std::vector<std::string>{"1", "2", "3"}));
}

TEST(Corpus, DuplicateId) {
    std::istringstream in(record("42") + record("42"));
    try {
        parse_corpus(in);
        FAIL() << "expected DuplicateFileId";
    } catch (const DuplicateFileId& e) {
        EXPECT_EQ(e.id(), "42");
    }
}

TEST(Corpus, MalformedLineNumberIsOneBased) {
    std::istringstream in(record("1") + "{not json}\n");
    try {
        parse_corpus(in);
        FAIL() << "expected MalformedRecord";
    } catch (const MalformedRecord& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Corpus, RejectsBadFields) {
    std::istringstream bad_id(record("12a"));
    EXPECT_THROW(parse_corpus(bad_id), MalformedRecord);
    std::istringstream bad_type(record("1", "spreadsheet"));
    EXPECT_THROW(parse_corpus(bad_type), UnknownFileType);
}

TEST(Corpus, StrictAndLaxUnknownKeys) {
    const auto text = record("7", "audio", "sports", R"(,"rating":5)");
    std::istringstream strict_in(text);
    EXPECT_THROW(parse_corpus(strict_in), MalformedRecord);
    std::istringstream lax_in(text);
    CorpusLoadOptions lax;
    lax.strict = false;
    const auto store = parse_corpus(lax_in, lax);
    EXPECT_EQ(store.find("7")->extra.at("rating"), "5");
}

TEST(Corpus, ClosedTopicSet) {
    CorpusLoadOptions opts;
    opts.topics = {"wildlife"};
    std::istringstream in(record("1") + record("2", "image", "cuisine"));
    EXPECT_THROW(parse_corpus(in, opts), UnknownTopic);
}

TEST(Corpus, SaveLoadRoundTrip) {
    testutil::TempDir dir;
    CorpusStore store;
    auto f = testutil::make_file("0012", FileType::video, "sports", "match highlights", "Final");
    f.metadata_physical["format"] = "mp4";
    f.metadata_ai["transcript"] = "goal";
    store.add(f);
    store.add(testutil::make_file("5", FileType::document, "cuisine", "recipe"));
    save_corpus(dir.path() / "c.jsonl", store);
    EXPECT_EQ(load_corpus(dir.path() / "c.jsonl"), store);
}

TEST(Corpus, GeneratedCounts) {
    const auto store = generate_corpus(default_topics(), 3, 7);
    EXPECT_EQ(store.size(), 120u);
    for (const auto type : kAllFileTypes) EXPECT_EQ(store.per_type_counts().at(type), 30u);
    for (const auto& [id, file] : store.files()) {
        EXPECT_EQ(id.size(), 10u);
        EXPECT_NE(id[0], '0');
    }
    EXPECT_EQ(generate_corpus(default_topics(), 1, 7).size(), 40u);
    EXPECT_EQ(generate_corpus(default_topics(), 3, 7), store);
    EXPECT_FALSE(generate_corpus(default_topics(), 3, 8) == store);
}

TEST(Corpus, EnrichFillsEmptyText) {
    auto file = testutil::make_file("1", FileType::image, "wildlife", "", "Lion at dawn");
    const auto enriched = enrich_text_repr(file, MockLlm());
    EXPECT_EQ(enriched.text_repr, "A image file about wildlife titled \"Lion at dawn\".");
    EXPECT_EQ(enriched.metadata_ai.at("generated_description"), enriched.text_repr);
    EXPECT_TRUE(file.text_repr.empty());
}

TEST(Corpus, EnrichKeepsExistingText) {
    const auto file = testutil::make_file("2", FileType::document, "climate change", "solar farms report");
    EXPECT_EQ(enrich_text_repr(file, MockLlm()), file);
}

TEST(Corpus, EnrichFailureLeavesInput) {
    const auto file = testutil::make_file("3", FileType::audio, "sports", "");
    const auto copy = file;
    EXPECT_THROW(enrich_text_repr(file, FailingLlm()), ProviderError);
    EXPECT_EQ(file, copy);
}

TEST(Corpus, EnrichCorpusOnlyTouchesEmpty) {
    CorpusStore store;
    store.add(testutil::make_file("1", FileType::image, "wildlife", ""));
    store.add(testutil::make_file("2", FileType::image, "wildlife", "kept"));
    const auto out = enrich_corpus(store, MockLlm(), 2);
    EXPECT_FALSE(out.find("1")->text_repr.empty());
    EXPECT_EQ(out.find("2")->text_repr, "kept");
    EXPECT_EQ(out.order(), store.order());
}
