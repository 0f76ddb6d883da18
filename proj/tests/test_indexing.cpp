#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "smartsearch/errors.hpp"
#include "smartsearch/eval.hpp"
#include "smartsearch/indexing.hpp"
#include "smartsearch/text.hpp"
#include "test_util.hpp"

using namespace smartsearch;

namespace {

Chunk chunk(std::string id, std::string text) {
    Chunk c;
    c.file_id = id;
    c.chunk_id = make_chunk_id(id, 0);
    c.text = std::move(text);
    c.token_count = tokenize(c.text).size();
    return c;
}

Bm25Index cat_dog(Bm25Params params = {}) {
    return Bm25Index::build({chunk("1", "cat cat dog"), chunk("2", "dog bird")}, params);
}

EmbeddingVector vec(std::vector<double> v) { return EmbeddingVector{std::move(v)}; }

} // namespace

TEST(Chunking, FitsInOne) {
    const auto chunks = chunk_text("9", "a b c d e f g h i j", {10, 0});
    ASSERT_EQ(chunks.size(), 1u);
    EXPECT_EQ(chunks[0].chunk_id, "9#0");
    EXPECT_EQ(chunks[0].token_count, 10u);
}

TEST(Chunking, SlidingWindowWithOverlap) {
    const auto chunks = chunk_text("9", "t0 t1 t2 t3 t4 t5 t6 t7 t8 t9", {4, 1});
    ASSERT_EQ(chunks.size(), 3u);
    EXPECT_EQ(chunks[0].text, "t0 t1 t2 t3");
    EXPECT_EQ(chunks[1].text, "t3 t4 t5 t6");
    EXPECT_EQ(chunks[2].text, "t6 t7 t8 t9");
    EXPECT_EQ(chunks[2].chunk_id, "9#2");
}

TEST(Chunking, TextIsVerbatimSpan) {
    const auto chunks = chunk_text("1", "Hello,  World! Foo-bar baz.", {2, 0});
    ASSERT_EQ(chunks.size(), 3u);
    EXPECT_EQ(chunks[0].text, "Hello,  World");
    EXPECT_EQ(chunks[1].text, "Foo-bar");
    EXPECT_EQ(chunks[2].text, "baz");
}

TEST(Chunking, InvalidParams) {
    EXPECT_THROW(chunk_text("1", "a b", {4, 4}), InvalidChunkParams);
    EXPECT_THROW(chunk_text("1", "a b", {0, 0}), InvalidChunkParams);
}

TEST(Chunking, NoTokensNoChunks) { EXPECT_TRUE(chunk_text("1", " ,; ", {4, 1}).empty()); }

TEST(Chunking, WindowsReproduceTokens) {
    std::mt19937_64 rng(3);
    std::string text;
    for (int i = 0; i < 97; ++i) text += "w" + std::to_string(rng() % 13) + (i % 5 == 0 ? ", " : " ");
    const auto all = tokenize(text);
    const auto chunks = chunk_text("1", text, {16, 5});
    std::size_t start = 0;
    for (const auto& c : chunks) {
        const auto got = tokenize(c.text);
        const std::vector<std::string> want(all.begin() + start,
                                            all.begin() + std::min(all.size(), start + 16));
        EXPECT_EQ(got, want);
        start += 11;
    }
    EXPECT_GE(start - 11 + 16, all.size());
}

TEST(Bm25, AbsentTermScoresZero) {
    const auto idx = cat_dog();
    EXPECT_GT(idx.score("cat", "1#0"), 0.0);
    EXPECT_EQ(idx.score("cat", "2#0"), 0.0);
    const auto hits = idx.search("cat", 10);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].chunk_id, "1#0");
}

TEST(Bm25, ShorterDocWinsForEqualTf) {
    const auto idx = cat_dog();
    // k1 1.2, b 0.75, avgdl 2.5, idf ln(1.2), frozen from a hand computation.
    EXPECT_NEAR(idx.score("dog", "1#0"), 0.16853253149021016, 1e-12);
    EXPECT_NEAR(idx.score("dog", "2#0"), 0.19856803215183175, 1e-12);
    const auto hits = idx.search("dog", 1);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].chunk_id, "2#0");
}

TEST(Bm25, RepeatedQueryTermCountsOnce) {
    const auto idx = cat_dog();
    EXPECT_DOUBLE_EQ(idx.score("cat cat", "1#0"), idx.score("cat", "1#0"));
    EXPECT_NEAR(idx.score("cat", "1#0"), 0.902321773509988, 1e-12);
}

TEST(Bm25, K1ZeroIsPureIdf) {
    const auto idx = cat_dog({0.0, 0.75});
    EXPECT_DOUBLE_EQ(idx.score("dog", "1#0"), idx.idf("dog"));
    EXPECT_DOUBLE_EQ(idx.score("dog", "2#0"), idx.idf("dog"));
    EXPECT_DOUBLE_EQ(idx.score("cat", "1#0"), idx.idf("cat"));
}

TEST(Bm25, SearchBounds) {
    const auto idx = cat_dog();
    EXPECT_TRUE(idx.search("zebra", 5).empty());
    EXPECT_EQ(idx.search("dog bird cat", 100).size(), 2u);
    EXPECT_THROW(Bm25Index::build({}), EmptyIndexInput);
}

TEST(Vector, SelfAndOrthogonal) {
    VectorIndex idx(3);
    idx.add("a#0", vec({1, 0, 0}));
    idx.add("b#0", vec({0, 1, 0}));
    idx.add("c#0", vec({0.6, 0.8, 0}));
    const auto hits = idx.search(vec({0, 1, 0}), 3);
    ASSERT_EQ(hits.size(), 3u);
    EXPECT_EQ(hits[0].chunk_id, "b#0");
    EXPECT_NEAR(*hits[0].vector_score, 1.0, 1e-6);
    EXPECT_EQ(hits[2].chunk_id, "a#0");
    EXPECT_EQ(*hits[2].vector_score, 0.0);
}

TEST(Vector, DimensionMismatch) {
    VectorIndex idx(3);
    EXPECT_THROW(idx.add("a#0", vec({1, 0})), DimensionMismatch);
    idx.add("a#0", vec({1, 0, 0}));
    EXPECT_THROW(idx.search(vec({1, 0}), 1), DimensionMismatch);
    EXPECT_THROW(idx.add("b#0", vec({NAN, 0, 0})), Error);
}

TEST(Vector, FiveEntryBruteForce) {
    std::vector<std::pair<std::string, std::vector<double>>> entries = {
        {"e#0", {0.1, 0.9, 0.3}}, {"a#0", {1, 1, 0}}, {"d#0", {-1, 0, 0.5}}, {"b#0", {2, 2, 0}}, {"c#0", {0, 0, 1}}};
    VectorIndex idx(3);
    for (const auto& [id, v] : entries) idx.add(id, vec(v));
    const std::vector<double> q = {0.7, 0.7, 0.1};
    std::vector<std::pair<double, std::string>> expected;
    for (const auto& [id, v] : entries) {
        double dot = 0, na = 0, nb = 0;
        for (int i = 0; i < 3; ++i) {
            dot += q[i] * v[i];
            na += q[i] * q[i];
            nb += v[i] * v[i];
        }
        expected.emplace_back(dot / (std::sqrt(na) * std::sqrt(nb)), id);
    }
    std::sort(expected.begin(), expected.end(),
              [](const auto& x, const auto& y) { return x.first != y.first ? x.first > y.first : x.second < y.second; });
    const auto hits = idx.search(vec(q), 5);
    ASSERT_EQ(hits.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(hits[i].chunk_id, expected[i].second);
        EXPECT_NEAR(*hits[i].vector_score, expected[i].first, 1e-12);
    }
    // a and b are parallel: equal score, so a (lower id) must come first.
    EXPECT_EQ(hits[0].chunk_id, "a#0");
    EXPECT_EQ(hits[1].chunk_id, "b#0");
}

TEST(TypedIndices, SingleType) {
    CorpusStore store;
    store.add(testutil::make_file("1", FileType::image, "wildlife", "lion photo"));
    store.add(testutil::make_file("2", FileType::image, "sports", "goal photo"));
    const auto set = build_typed_indices(store, {}, MockEmbedder());
    EXPECT_EQ(set.per_type.size(), 1u);
    EXPECT_NE(set.find(FileType::image), nullptr);
    EXPECT_EQ(set.find(FileType::audio), nullptr);
    EXPECT_EQ(set.merged.bm25.doc_count(), 2u);
}

TEST(TypedIndices, EmptyCorpus) {
    EXPECT_THROW(build_typed_indices(CorpusStore(), {}, MockEmbedder()), EmptyIndexInput);
}

TEST(TypedIndices, ChunkCountsMatchChunker) {
    const auto store = generate_corpus(default_topics(), 3, 7);
    IndexBuildParams params;
    params.chunking = {12, 3};
    const auto set = build_typed_indices(store, params, MockEmbedder());
    ASSERT_EQ(set.per_type.size(), 4u);
    std::map<FileType, std::size_t> expected;
    std::size_t total = 0;
    for (const auto& [id, f] : store.files()) {
        const auto tokens = tokenize(f.text_repr).size();
        std::size_t n = 0;
        if (tokens > 0) n = tokens <= 12 ? 1 : 1 + (tokens - 12 + 8) / 9;
        expected[f.file_type] += n;
        total += n;
    }
    for (const auto& [type, pair] : set.per_type) {
        EXPECT_EQ(pair.bm25.doc_count(), expected[type]) << to_string(type);
        EXPECT_EQ(pair.vectors.size(), expected[type]);
    }
    EXPECT_EQ(set.merged.bm25.doc_count(), total);
    EXPECT_EQ(set.chunk_lookup.size(), total);
}

TEST(Persistence, RoundTripIsBitExact) {
    testutil::TempDir dir;
    const auto store = generate_corpus(default_topics(), 1, 11);
    const auto set = build_typed_indices(store, {}, MockEmbedder(64, 5));
    save_index_set(set, dir.path());
    const auto loaded = load_index_set(dir.path());
    EXPECT_EQ(loaded.embedder, set.embedder);
    EXPECT_EQ(loaded.dims, 64u);
    ASSERT_EQ(loaded.per_type.size(), set.per_type.size());
    const MockEmbedder embedder(64, 5);
    for (const std::string q : {"wildlife image", "Give me some files about cuisine", "sports audio"}) {
        const auto qv = embedder.embed(q);
        for (const auto& [type, pair] : set.per_type) {
            const auto& other = loaded.per_type.at(type);
            EXPECT_EQ(pair.bm25.search(q, 50), other.bm25.search(q, 50));
            EXPECT_EQ(pair.vectors.search(qv, 50), other.vectors.search(qv, 50));
        }
        EXPECT_EQ(set.merged.bm25.search(q, 50), loaded.merged.bm25.search(q, 50));
        EXPECT_EQ(set.merged.vectors.search(qv, 50), loaded.merged.vectors.search(qv, 50));
    }
    for (const auto& [id, c] : set.chunk_lookup) EXPECT_EQ(*loaded.chunk(id), c);
}

TEST(Persistence, RejectsUnknownVersion) {
    testutil::TempDir dir;
    CorpusStore store;
    store.add(testutil::make_file("1", FileType::image, "wildlife", "lion"));
    save_index_set(build_typed_indices(store, {}, MockEmbedder()), dir.path());
    std::ofstream(dir.path() / "manifest.json") << R"({"version": 99})";
    EXPECT_THROW(load_index_set(dir.path()), IndexFormatError);
    EXPECT_THROW(load_index_set(dir.path() / "missing"), IndexFormatError);
}
