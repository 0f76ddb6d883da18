#include "smartsearch/indexing.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "smartsearch/errors.hpp"
#include "smartsearch/parallel.hpp"
#include "smartsearch/text.hpp"

namespace smartsearch {
namespace {

using json = nlohmann::json;

bool ranks_before(const ScoredNode& a, double score_a, const ScoredNode& b, double score_b) {
    if (score_a != score_b) return score_a > score_b;
    return a.chunk_id < b.chunk_id;
}

std::string file_id_of(std::string_view chunk_id) {
    const auto hash = chunk_id.rfind('#');
    return std::string(hash == std::string_view::npos ? chunk_id : chunk_id.substr(0, hash));
}

std::vector<std::string> distinct_terms(std::string_view query) {
    std::vector<std::string> terms;
    std::unordered_set<std::string> seen;
    for (auto& term : tokenize(query)) {
        if (seen.insert(term).second) terms.push_back(std::move(term));
    }
    return terms;
}

} // namespace

void ChunkParams::validate() const {
    if (chunk_size == 0 || overlap >= chunk_size) {
        throw InvalidChunkParams("chunk_size must exceed overlap (got chunk_size=" + std::to_string(chunk_size) +
                                 ", overlap=" + std::to_string(overlap) + ")");
    }
}

std::string make_chunk_id(std::string_view file_id, std::size_t ordinal) {
    return std::string(file_id) + "#" + std::to_string(ordinal);
}

std::vector<Chunk> chunk_text(std::string_view file_id, std::string_view text, const ChunkParams& params) {
    params.validate();
    const auto spans = tokenize_spans(text);
    std::vector<Chunk> chunks;
    const std::size_t stride = params.chunk_size - params.overlap;
    for (std::size_t start = 0; start < spans.size(); start += stride) {
        const std::size_t end = std::min(start + params.chunk_size, spans.size());
        Chunk chunk;
        chunk.file_id = std::string(file_id);
        chunk.ordinal = chunks.size();
        chunk.chunk_id = make_chunk_id(file_id, chunk.ordinal);
        chunk.text = std::string(text.substr(spans[start].begin, spans[end - 1].end - spans[start].begin));
        chunk.token_count = end - start;
        chunks.push_back(std::move(chunk));
        if (end == spans.size()) break;
    }
    return chunks;
}

// ---------------------------------------------------------------------------
// BM25

Bm25Index Bm25Index::build(const std::vector<Chunk>& chunks, Bm25Params params) {
    if (chunks.empty()) throw EmptyIndexInput();
    Bm25Index index;
    index.params_ = params;
    for (const auto& chunk : chunks) {
        const auto doc = static_cast<std::uint32_t>(index.doc_ids_.size());
        const auto tokens = tokenize(chunk.text);
        std::vector<std::string> order;
        std::unordered_map<std::string, std::uint32_t> tf;
        for (const auto& t : tokens) {
            if (tf[t]++ == 0) order.push_back(t);
        }
        for (const auto& t : order) index.postings_[t].push_back({doc, tf[t]});
        index.doc_ids_.push_back(chunk.chunk_id);
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    }
    index.finalize();
    return index;
}

Bm25Index Bm25Index::from_parts(std::vector<std::string> doc_ids, std::vector<std::uint32_t> doc_lengths,
                                std::unordered_map<std::string, std::vector<Posting>> postings, Bm25Params params) {
    if (doc_ids.empty()) throw EmptyIndexInput();
    if (doc_ids.size() != doc_lengths.size()) throw IndexFormatError("postings: doc_ids and doc_lengths differ in size");
    for (const auto& [term, list] : postings) {
        for (const auto& p : list) {
            if (p.doc >= doc_ids.size() || p.tf == 0) throw IndexFormatError("postings: bad entry for term '" + term + "'");
        }
    }
    Bm25Index index;
    index.params_ = params;
    index.doc_ids_ = std::move(doc_ids);
    index.doc_lengths_ = std::move(doc_lengths);
    index.postings_ = std::move(postings);
    index.finalize();
    return index;
}

void Bm25Index::finalize() {
    doc_index_.clear();
    for (std::uint32_t i = 0; i < doc_ids_.size(); ++i) doc_index_.emplace(doc_ids_[i], i);
    if (doc_index_.size() != doc_ids_.size()) throw IndexFormatError("duplicate chunk_id in BM25 index");
    const std::uint64_t total = std::accumulate(doc_lengths_.begin(), doc_lengths_.end(), std::uint64_t{0});
    avg_doc_length_ = static_cast<double>(total) / static_cast<double>(doc_ids_.size());
}

double Bm25Index::idf(std::string_view term) const {
    const auto it = postings_.find(std::string(term));
    const double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
    const double n = static_cast<double>(doc_ids_.size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::vector<double> Bm25Index::score_all(std::string_view query, std::vector<bool>& matched) const {
    std::vector<double> scores(doc_ids_.size(), 0.0);
    matched.assign(doc_ids_.size(), false);
    const double k1 = params_.k1;
    const double b = params_.b;
    for (const auto& term : distinct_terms(query)) {
        const auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double term_idf = idf(term);
        for (const auto& p : it->second) {
            const double tf = p.tf;
            const double dl = doc_lengths_[p.doc];
            scores[p.doc] += term_idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avg_doc_length_));
            matched[p.doc] = true;
        }
    }
    return scores;
}

std::vector<ScoredNode> Bm25Index::search(std::string_view query, std::size_t k) const {
    std::vector<bool> matched;
    const auto scores = score_all(query, matched);
    std::vector<ScoredNode> nodes;
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        if (!matched[i]) continue;
        ScoredNode node;
        node.chunk_id = doc_ids_[i];
        node.file_id = file_id_of(node.chunk_id);
        node.bm25_score = scores[i];
        nodes.push_back(std::move(node));
    }
    const auto cmp = [](const ScoredNode& a, const ScoredNode& b) { return ranks_before(a, *a.bm25_score, b, *b.bm25_score); };
    const std::size_t keep = std::min(k, nodes.size());
    std::partial_sort(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(keep), nodes.end(), cmp);
    nodes.resize(keep);
    return nodes;
}

double Bm25Index::score(std::string_view query, std::string_view chunk_id) const {
    const auto it = doc_index_.find(std::string(chunk_id));
    if (it == doc_index_.end()) return 0.0;
    std::vector<bool> matched;
    return score_all(query, matched)[it->second];
}

std::optional<std::uint32_t> Bm25Index::doc_length(std::string_view chunk_id) const {
    const auto it = doc_index_.find(std::string(chunk_id));
    if (it == doc_index_.end()) return std::nullopt;
    return doc_lengths_[it->second];
}

// ---------------------------------------------------------------------------
// Vectors

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dims() != b.dims()) throw DimensionMismatch(a.dims(), b.dims());
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

void VectorIndex::add(std::string chunk_id, EmbeddingVector vector) {
    if (dims_ == 0) dims_ = vector.dims();
    if (vector.dims() != dims_) throw DimensionMismatch(dims_, vector.dims());
    if (!std::all_of(vector.values.begin(), vector.values.end(), [](double v) { return std::isfinite(v); })) {
        throw Error("embedding for " + chunk_id + " has non-finite values");
    }
    entries_.push_back({std::move(chunk_id), std::move(vector)});
}

std::vector<ScoredNode> VectorIndex::search(const EmbeddingVector& query, std::size_t k) const {
    if (query.dims() != dims_) throw DimensionMismatch(dims_, query.dims());
    std::vector<ScoredNode> nodes;
    nodes.reserve(entries_.size());
    for (const auto& entry : entries_) {
        ScoredNode node;
        node.chunk_id = entry.chunk_id;
        node.file_id = file_id_of(entry.chunk_id);
        node.vector_score = cosine_similarity(query, entry.vector);
        nodes.push_back(std::move(node));
    }
    const auto cmp = [](const ScoredNode& a, const ScoredNode& b) {
        return ranks_before(a, *a.vector_score, b, *b.vector_score);
    };
    const std::size_t keep = std::min(k, nodes.size());
    std::partial_sort(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(keep), nodes.end(), cmp);
    nodes.resize(keep);
    return nodes;
}

// ---------------------------------------------------------------------------
// Typed index set

const IndexPair* TypedIndexSet::find(FileType type) const {
    const auto it = per_type.find(type);
    return it == per_type.end() ? nullptr : &it->second;
}

const Chunk* TypedIndexSet::chunk(std::string_view chunk_id) const {
    const auto it = chunk_lookup.find(std::string(chunk_id));
    return it == chunk_lookup.end() ? nullptr : &it->second;
}

namespace {

struct TypedChunks {
    std::map<FileType, std::vector<Chunk>> per_type;
    std::map<FileType, std::vector<EmbeddingVector>> vectors;
};

void assemble(TypedIndexSet& set, TypedChunks data) {
    std::vector<Chunk> all_chunks;
    set.merged = IndexPair{};
    set.merged.vectors = VectorIndex(set.dims);
    for (const auto type : kAllFileTypes) {
        const auto it = data.per_type.find(type);
        if (it == data.per_type.end() || it->second.empty()) continue;
        auto& chunks = it->second;
        auto& vectors = data.vectors.at(type);
        IndexPair pair;
        pair.bm25 = Bm25Index::build(chunks, set.params.bm25);
        pair.vectors = VectorIndex(set.dims);
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            pair.vectors.add(chunks[i].chunk_id, vectors[i]);
            set.merged.vectors.add(chunks[i].chunk_id, vectors[i]);
            set.chunk_types[chunks[i].chunk_id] = type;
            set.chunk_lookup[chunks[i].chunk_id] = chunks[i];
            all_chunks.push_back(chunks[i]);
        }
        set.per_type.emplace(type, std::move(pair));
    }
    if (all_chunks.empty()) throw EmptyIndexInput();
    set.merged.bm25 = Bm25Index::build(all_chunks, set.params.bm25);
}

} // namespace

TypedIndexSet build_typed_indices(const CorpusStore& corpus, const IndexBuildParams& params,
                                  const EmbeddingProvider& embedder) {
    params.chunking.validate();
    if (corpus.empty()) throw EmptyIndexInput();

    std::vector<Chunk> chunks;
    std::vector<FileType> types;
    for (const auto& id : corpus.order()) {
        const auto& file = *corpus.find(id);
        for (auto& chunk : chunk_text(file.file_id, file.text_repr, params.chunking)) {
            chunks.push_back(std::move(chunk));
            types.push_back(file.file_type);
        }
    }
    if (chunks.empty()) throw EmptyIndexInput();

    std::vector<EmbeddingVector> vectors(chunks.size());
    parallel_for(chunks.size(), params.parallelism, [&](std::size_t i) { vectors[i] = embedder.embed(chunks[i].text); });

    TypedIndexSet set;
    set.params = params;
    set.embedder = embedder.describe();
    set.dims = vectors.front().dims();
    TypedChunks data;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        data.per_type[types[i]].push_back(std::move(chunks[i]));
        data.vectors[types[i]].push_back(std::move(vectors[i]));
    }
    assemble(set, std::move(data));
    return set;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr char kVectorMagic[8] = {'S', 'S', 'V', 'E', 'C', 0, 0, 1};

void write_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw IndexFormatError("vectors file truncated");
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IndexFormatError("missing index file " + path.string());
    return in;
}

json read_json(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IndexFormatError(path.filename().string() + ": " + e.what());
    }
}

// Vectors are stored as raw little-endian doubles, so scores survive a
// save/load round trip bit for bit.
void write_vectors(const VectorIndex& index, const std::filesystem::path& path) {
    auto out = open_out(path);
    out.write(kVectorMagic, sizeof kVectorMagic);
    write_u64(out, index.dims());
    write_u64(out, index.size());
    for (const auto& entry : index.entries()) {
        write_u64(out, entry.chunk_id.size());
        out.write(entry.chunk_id.data(), static_cast<std::streamsize>(entry.chunk_id.size()));
        out.write(reinterpret_cast<const char*>(entry.vector.values.data()),
                  static_cast<std::streamsize>(entry.vector.values.size() * sizeof(double)));
    }
}

std::vector<std::pair<std::string, EmbeddingVector>> read_vectors(const std::filesystem::path& path, std::size_t dims) {
    auto in = open_in(path);
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kVectorMagic, sizeof magic) != 0) {
        throw IndexFormatError(path.filename().string() + ": bad magic or unsupported vectors version");
    }
    if (read_u64(in) != dims) throw IndexFormatError(path.filename().string() + ": dims disagree with manifest");
    const auto count = read_u64(in);
    std::vector<std::pair<std::string, EmbeddingVector>> out;
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto len = read_u64(in);
        if (len > (1u << 20)) throw IndexFormatError("vectors file corrupt");
        std::string id(len, '\0');
        EmbeddingVector vec;
        vec.values.resize(dims);
        if (!in.read(id.data(), static_cast<std::streamsize>(len)) ||
            !in.read(reinterpret_cast<char*>(vec.values.data()), static_cast<std::streamsize>(dims * sizeof(double)))) {
            throw IndexFormatError("vectors file truncated");
        }
        out.emplace_back(std::move(id), std::move(vec));
    }
    return out;
}

} // namespace

void save_index_set(const TypedIndexSet& set, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json manifest = {
        {"format", "smartsearch-index"},
        {"version", kIndexFormatVersion},
        {"chunk_size", set.params.chunking.chunk_size},
        {"overlap", set.params.chunking.overlap},
        {"k1", set.params.bm25.k1},
        {"b", set.params.bm25.b},
        {"dims", set.dims},
        {"embedder", set.embedder},
        {"types", json::object()},
    };
    for (const auto& [type, pair] : set.per_type) {
        const std::string name(to_string(type));
        {
            auto out = open_out(dir / (name + ".chunks.jsonl"));
            for (const auto& chunk_id : pair.bm25.doc_ids()) {
                const auto& c = set.chunk_lookup.at(chunk_id);
                out << json{{"chunk_id", c.chunk_id},
                            {"file_id", c.file_id},
                            {"ordinal", c.ordinal},
                            {"text", c.text},
                            {"token_count", c.token_count}}
                           .dump()
                    << '\n';
            }
        }
        json postings = json::object();
        for (const auto& [term, list] : pair.bm25.postings()) {
            json entries = json::array();
            for (const auto& p : list) entries.push_back({p.doc, p.tf});
            postings[term] = std::move(entries);
        }
        auto out = open_out(dir / (name + ".postings.json"));
        out << json{{"doc_ids", pair.bm25.doc_ids()}, {"doc_lengths", pair.bm25.doc_lengths()}, {"postings", postings}}.dump();
        write_vectors(pair.vectors, dir / (name + ".vectors.bin"));
        manifest["types"][name] = {{"chunks", pair.bm25.doc_count()}, {"terms", pair.bm25.postings().size()}};
    }
    open_out(dir / "manifest.json") << manifest.dump(2) << '\n';
}

TypedIndexSet load_index_set(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir / "manifest.json")) throw IndexFormatError("no manifest.json in " + dir.string());
    const json manifest = read_json(dir / "manifest.json");
    TypedIndexSet set;
    TypedChunks data;
    std::map<FileType, Bm25Index> bm25;
    try {
        if (manifest.at("format") != "smartsearch-index") throw IndexFormatError("not a smartsearch index");
        const int version = manifest.at("version").get<int>();
        if (version != kIndexFormatVersion) throw IndexFormatError("unsupported index version " + std::to_string(version));
        set.params.chunking.chunk_size = manifest.at("chunk_size").get<std::size_t>();
        set.params.chunking.overlap = manifest.at("overlap").get<std::size_t>();
        set.params.bm25.k1 = manifest.at("k1").get<double>();
        set.params.bm25.b = manifest.at("b").get<double>();
        set.dims = manifest.at("dims").get<std::size_t>();
        set.embedder = manifest.at("embedder").get<std::string>();
        for (const auto& [name, info] : manifest.at("types").items()) {
            const FileType type = parse_file_type(name);
            std::vector<Chunk> chunks;
            {
                auto in = open_in(dir / (name + ".chunks.jsonl"));
                std::string line;
                while (std::getline(in, line)) {
                    if (line.empty()) continue;
                    const json j = json::parse(line);
                    chunks.push_back(Chunk{j.at("chunk_id").get<std::string>(), j.at("file_id").get<std::string>(),
                                           j.at("ordinal").get<std::size_t>(), j.at("text").get<std::string>(),
                                           j.at("token_count").get<std::size_t>()});
                }
            }
            const json postings = read_json(dir / (name + ".postings.json"));
            std::unordered_map<std::string, std::vector<Bm25Index::Posting>> lists;
            for (const auto& [term, entries] : postings.at("postings").items()) {
                auto& list = lists[term];
                for (const auto& e : entries) list.push_back({e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>()});
            }
            auto index = Bm25Index::from_parts(postings.at("doc_ids").get<std::vector<std::string>>(),
                                               postings.at("doc_lengths").get<std::vector<std::uint32_t>>(),
                                               std::move(lists), set.params.bm25);
            if (index.doc_count() != chunks.size() || info.at("chunks").get<std::size_t>() != chunks.size()) {
                throw IndexFormatError(name + ": chunk count disagrees with postings");
            }
            auto vectors = read_vectors(dir / (name + ".vectors.bin"), set.dims);
            if (vectors.size() != chunks.size()) throw IndexFormatError(name + ": vector count disagrees with chunks");
            for (std::size_t i = 0; i < chunks.size(); ++i) {
                if (vectors[i].first != chunks[i].chunk_id || index.doc_ids()[i] != chunks[i].chunk_id) {
                    throw IndexFormatError(name + ": chunk order differs between files");
                }
                data.vectors[type].push_back(std::move(vectors[i].second));
            }
            data.per_type[type] = std::move(chunks);
            bm25.emplace(type, std::move(index));
        }
    } catch (const json::exception& e) {
        throw IndexFormatError(std::string("malformed index: ") + e.what());
    } catch (const UnknownFileType& e) {
        throw IndexFormatError(e.what());
    }
    assemble(set, std::move(data));
    // Keep the persisted postings rather than the rebuilt ones.
    for (auto& [type, index] : bm25) set.per_type.at(type).bm25 = std::move(index);
    return set;
}

} // namespace smartsearch
