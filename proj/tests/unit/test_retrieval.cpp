#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "socialbot/retrieval/filter.hpp"
#include "socialbot/retrieval/inverted_index.hpp"
#include "socialbot/retrieval/paired.hpp"
#include "socialbot/util/text.hpp"

using namespace socialbot;
using retrieval::InvertedIndex;

namespace {

std::vector<std::string> random_docs(std::size_t n, std::uint64_t seed) {
    const std::vector<std::string> words = {"music", "song", "beijing", "wall", "food", "rice", "happy", "sad",
                                            "rain",  "sun",  "cat",     "dog",  "book", "film", "game", "tea"};
    std::mt19937_64 rng(seed);
    std::vector<std::string> docs;
    for (std::size_t i = 0; i < n; ++i) {
        std::string d;
        const std::size_t len = 1 + rng() % 8;
        for (std::size_t j = 0; j < len; ++j) d += (j ? " " : "") + words[rng() % words.size()];
        docs.push_back(d);
    }
    return docs;
}

retrieval::PairedRecord record(const std::string& qc, const std::string& response,
                               std::map<std::string, std::string> e_r = {}) {
    const auto& schema = fixtures::shipped()->empathy->schema();
    retrieval::PairedRecord r;
    r.qc = qc;
    r.response = response;
    r.id = retrieval::PairedRecord::content_id(qc, response);
    r.e_q = schema.make({});
    r.e_r = schema.make(std::move(e_r));
    return r;
}

const retrieval::FilterRules& rules() { return *fixtures::shipped()->filters; }

}  // namespace

TEST(InvertedIndex, SingleRecordPostings) {
    const auto idx = InvertedIndex::build({"hello world"});
    EXPECT_EQ(idx.doc_count(), 1u);
    EXPECT_EQ(idx.df("hello"), 1u);
    EXPECT_EQ(idx.df("world"), 1u);
    EXPECT_EQ(idx.df("missing"), 0u);
    EXPECT_DOUBLE_EQ(idx.avg_doc_length(), 2.0);
}

TEST(InvertedIndex, StatisticsMatchBruteForce) {
    const auto docs = random_docs(1000, 2);
    const auto idx = InvertedIndex::build(docs);
    double total = 0.0;
    std::map<std::string, std::set<std::uint32_t>> df;
    for (std::uint32_t d = 0; d < docs.size(); ++d) {
        const auto toks = oracle::split_spaces(docs[d]);
        total += static_cast<double>(toks.size());
        EXPECT_EQ(idx.doc_length(d), toks.size());
        for (const auto& t : toks) df[t].insert(d);
    }
    EXPECT_DOUBLE_EQ(idx.avg_doc_length(), total / static_cast<double>(docs.size()));
    EXPECT_EQ(idx.vocabulary().size(), df.size());
    for (const auto& [tok, ds] : df) {
        EXPECT_EQ(idx.df(tok), ds.size());
        const auto* p = idx.postings(tok);
        ASSERT_NE(p, nullptr);
        for (std::size_t i = 1; i < p->size(); ++i) EXPECT_LT((*p)[i - 1].doc, (*p)[i].doc);
    }
}

TEST(InvertedIndex, RebuildIsByteIdenticalAndRoundTrips) {
    const auto docs = random_docs(200, 4);
    const auto a = InvertedIndex::build(docs);
    const auto b = InvertedIndex::build(docs);
    EXPECT_EQ(a.serialize(), b.serialize());
    std::size_t off = 0;
    const auto bytes = a.serialize();
    const auto back = InvertedIndex::deserialize(bytes, off);
    EXPECT_EQ(off, bytes.size());
    EXPECT_EQ(back, a);
}

TEST(KeywordSearch, NoIndexedTokensGivesNothing) {
    const auto idx = InvertedIndex::build({"hello world", "good night"});
    EXPECT_TRUE(idx.keyword_search("zebra quantum", 10).empty());
    EXPECT_TRUE(idx.keyword_search("", 10).empty());
}

TEST(KeywordSearch, SingleDocMatchesOracle) {
    const auto idx = InvertedIndex::build({"the great wall is long"});
    const auto hits = idx.keyword_search("the great wall is long", 5);
    ASSERT_EQ(hits.size(), 1u);
    const auto want = oracle::bm25_search({oracle::split_spaces("the great wall is long")},
                                          oracle::split_spaces("the great wall is long"));
    EXPECT_NEAR(hits[0].score, want[0].score, 1e-9);
}

TEST(KeywordSearch, RankingEqualsOracleAndRespectsLimit) {
    const auto docs = random_docs(1000, 8);
    std::vector<std::vector<std::string>> toks;
    for (const auto& d : docs) toks.push_back(oracle::split_spaces(d));
    const auto idx = InvertedIndex::build(docs);
    for (const std::string q : {"music song", "rain rain sun", "tea", "cat dog book film"}) {
        const auto got = idx.keyword_search(q, 50);
        const auto want = oracle::bm25_search(toks, oracle::split_spaces(q));
        ASSERT_EQ(got.size(), std::min<std::size_t>(50, want.size()));
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].doc, want[i].doc);
            EXPECT_NEAR(got[i].score, want[i].score, 1e-9);
        }
    }
}

TEST(KeywordSearch, TfidfDefinition) {
    const auto idx = InvertedIndex::build({"a a b", "b c", "c"});
    const double want = 2.0 * std::log(1.0 + 3.0 / 1.0) + 1.0 * std::log(1.0 + 3.0 / 2.0);
    EXPECT_NEAR(idx.tfidf({"a", "b"}, 0), want, 1e-12);
}

TEST(Filter, PhonePatternDropsAsPii) {
    const auto v = rules().check_text("call me at 555-0123 tonight");
    EXPECT_FALSE(v.keep);
    EXPECT_EQ(v.reason, retrieval::DropReason::Pii);
    // every shipped pattern agrees with std::regex on the sample
    bool any = false;
    for (const auto& [src, re] : rules().pii()) any = any || std::regex_search("call me at 555-0123 tonight", std::regex(src));
    EXPECT_TRUE(any);
}

TEST(Filter, EmailDropsAsPii) {
    EXPECT_EQ(rules().check_text("mail bob@example.com").reason, retrieval::DropReason::Pii);
}

TEST(Filter, CleanPairKept) {
    retrieval::RawPair p{"how are you", "I am great, thanks!"};
    EXPECT_TRUE(retrieval::filter_pair(p, rules(), fixtures::shipped()->bot).keep);
}

TEST(Filter, ControlBytesAreMessyCode) {
    retrieval::RawPair p{"hi", std::string("bro\x02ken")};
    const auto v = retrieval::filter_pair(p, rules(), fixtures::shipped()->bot);
    EXPECT_FALSE(v.keep);
    EXPECT_EQ(v.reason, retrieval::DropReason::MessyCode);
}

TEST(Filter, BlocklistAndPersonaConflict) {
    const auto& bot = fixtures::shipped()->bot;
    EXPECT_EQ(retrieval::filter_pair({"hi", "shut up"}, rules(), bot).reason, retrieval::DropReason::Inappropriate);
    EXPECT_EQ(retrieval::filter_pair({"who are you", "I am a man who likes cars"}, rules(), bot).reason,
              retrieval::DropReason::PersonaConflict);
    EXPECT_TRUE(retrieval::filter_pair({"who are you", "I am a girl who likes music"}, rules(), bot).keep);
}

TEST(Filter, Idempotent) {
    const auto& bot = fixtures::shipped()->bot;
    std::vector<retrieval::RawPair> raw = {{"a", "fine"}, {"b", "555-0123"}, {"c", "nice day"}, {"d", "teh cat"}};
    std::vector<retrieval::RawPair> kept;
    for (const auto& p : raw) {
        if (retrieval::filter_pair(p, rules(), bot).keep) kept.push_back(p);
    }
    for (const auto& p : kept) EXPECT_TRUE(retrieval::filter_pair(p, rules(), bot).keep);
    EXPECT_EQ(kept.size(), 2u);
}

TEST(PersonaConflict, OnlyKnownDifferingValuesConflict) {
    const auto& schema = fixtures::shipped()->empathy->schema();
    const auto& bot = fixtures::shipped()->bot;
    EXPECT_FALSE(retrieval::persona_conflict(schema.make({}), bot));
    EXPECT_FALSE(retrieval::persona_conflict(schema.make({{"gender", "female"}}), bot));
    EXPECT_TRUE(retrieval::persona_conflict(schema.make({{"gender", "male"}}), bot));
}

TEST(PairedIndex, SemanticSearchFindsIdenticalQuery) {
    auto enc = ml::DualEncoder::untrained(1024, 16, true, 2);
    const auto idx = retrieval::PairedIndex::build(
        {record("do you like music", "yes"), record("where is beijing", "in china"), record("good night", "sleep well")}, &enc);
    const auto hits = idx.semantic_search(enc, "where is beijing", 3);
    ASSERT_FALSE(hits.empty());
    EXPECT_EQ(hits[0].doc, 1u);
    EXPECT_NEAR(hits[0].score, 1.0, 1e-12);
    for (std::size_t i = 1; i < hits.size(); ++i) EXPECT_GE(hits[i - 1].score, hits[i].score);
    const auto empty = retrieval::PairedIndex::build({}, &enc);
    EXPECT_TRUE(empty.semantic_search(enc, "anything", 3).empty());
}

TEST(PairedIndex, SemanticOrderMatchesBruteForceCosine) {
    auto enc = ml::DualEncoder::untrained(512, 8, true, 6);
    const auto docs = random_docs(300, 10);
    std::vector<retrieval::PairedRecord> recs;
    for (std::size_t i = 0; i < docs.size(); ++i) recs.push_back(record(docs[i], "r" + std::to_string(i)));
    const auto idx = retrieval::PairedIndex::build(recs, &enc);
    const std::string q = "music rain tea";
    const auto hits = idx.semantic_search(enc, q, docs.size());
    std::vector<std::pair<double, std::uint32_t>> want;
    for (std::uint32_t i = 0; i < docs.size(); ++i) want.push_back({-enc.similarity(q, idx.records()[i].qc), i});
    std::sort(want.begin(), want.end());
    ASSERT_EQ(hits.size(), want.size());
    for (std::size_t i = 0; i < hits.size(); ++i) EXPECT_NEAR(hits[i].score, -want[i].first, 1e-9);
}

TEST(RetrievePaired, FewRelevantRecords) {
    const auto idx = retrieval::PairedIndex::build(
        {record("music is fun", "a"), record("music night", "b"), record("love music", "c"), record("rice", "d")}, nullptr);
    const auto c = retrieval::retrieve_paired(idx, nullptr, "music", fixtures::shipped()->bot);
    EXPECT_EQ(c.size(), 3u);
    for (const auto& x : c) {
        EXPECT_EQ(x.source, CandidateSource::Paired);
        EXPECT_TRUE(x.retrieval.present);
        EXPECT_GT(x.retrieval.bm25, 0.0);
    }
}

TEST(RetrievePaired, CapsAtFourHundred) {
    std::vector<retrieval::PairedRecord> recs;
    for (int i = 0; i < 500; ++i) recs.push_back(record("music " + std::to_string(i), "reply " + std::to_string(i)));
    const auto idx = retrieval::PairedIndex::build(recs, nullptr);
    EXPECT_EQ(retrieval::retrieve_paired(idx, nullptr, "music", fixtures::shipped()->bot).size(), 400u);
}

TEST(RetrievePaired, DuplicateHitsAppearOnce) {
    auto enc = ml::DualEncoder::untrained(1024, 16, true, 2);
    const auto idx = retrieval::PairedIndex::build({record("do you like music", "yes"), record("music fans", "me")}, &enc);
    const auto c = retrieval::retrieve_paired(idx, &enc, "do you like music", fixtures::shipped()->bot);
    std::set<std::string> ids;
    for (const auto& x : c) EXPECT_TRUE(ids.insert(x.provenance).second);
    EXPECT_EQ(c.size(), 2u);
    EXPECT_NEAR(c.front().retrieval.cosine, 1.0, 1e-12);
}

TEST(RetrievePaired, ConflictingPersonaDropped) {
    const auto idx = retrieval::PairedIndex::build(
        {record("music", "ok", {{"gender", "male"}}), record("music again", "fine", {{"gender", "female"}})}, nullptr);
    const auto c = retrieval::retrieve_paired(idx, nullptr, "music", fixtures::shipped()->bot);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].text, "fine");
}

TEST(PairedRecord, ContentIdIgnoresCaseAndPunctuation) {
    EXPECT_EQ(retrieval::PairedRecord::content_id("Hello!", "Hi."), retrieval::PairedRecord::content_id("hello", "hi"));
    EXPECT_NE(retrieval::PairedRecord::content_id("hello", "hi"), retrieval::PairedRecord::content_id("hi", "hello"));
}

TEST(IndexFile, ChecksumVerifiedOnRead) {
    const auto dir = std::filesystem::temp_directory_path() / "socialbot_unit_idx";
    std::filesystem::create_directories(dir);
    const auto path = dir / "x.idx";
    retrieval::write_index_file(path, {1, "paired", 0, "", 0}, "payload bytes");
    retrieval::IndexFileHeader h;
    EXPECT_EQ(retrieval::read_index_file(path, "paired", &h), "payload bytes");
    EXPECT_EQ(h.payload_bytes, 13u);
    EXPECT_ANY_THROW(retrieval::read_index_file(path, "unpaired"));
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(-1, std::ios::end);
        f.put('X');
    }
    EXPECT_ANY_THROW(retrieval::read_index_file(path, "paired"));
    std::filesystem::remove_all(dir);
}
