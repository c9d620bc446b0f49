#include "socialbot/retrieval/inverted_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "socialbot/util/jsonl.hpp"
#include "socialbot/util/text.hpp"

namespace socialbot::retrieval {

InvertedIndex InvertedIndex::build(const std::vector<std::string>& documents) {
    InvertedIndex idx;
    std::uint64_t total = 0;
    idx.doc_lengths_.reserve(documents.size());
    for (std::size_t d = 0; d < documents.size(); ++d) {
        const auto words = text::words(documents[d]);
        idx.doc_lengths_.push_back(static_cast<std::uint32_t>(words.size()));
        total += words.size();
        std::map<std::string, std::uint32_t> counts;
        for (const auto& w : words) ++counts[w];
        for (const auto& [w, c] : counts) {
            idx.postings_[w].push_back({static_cast<std::uint32_t>(d), c});
        }
    }
    idx.avg_length_ = documents.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(documents.size());
    return idx;
}

const std::vector<Posting>* InvertedIndex::postings(const std::string& token) const {
    auto it = postings_.find(token);
    return it == postings_.end() ? nullptr : &it->second;
}

std::size_t InvertedIndex::df(const std::string& token) const {
    const auto* p = postings(token);
    return p == nullptr ? 0 : p->size();
}

std::uint32_t InvertedIndex::tf(const std::string& token, std::uint32_t doc) const {
    const auto* p = postings(token);
    if (p == nullptr) return 0;
    auto it = std::lower_bound(p->begin(), p->end(), doc,
                               [](const Posting& a, std::uint32_t d) { return a.doc < d; });
    return (it != p->end() && it->doc == doc) ? it->tf : 0;
}

double InvertedIndex::idf(const std::string& token) const {
    const double n = static_cast<double>(doc_count());
    const double f = static_cast<double>(df(token));
    return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

namespace {

double bm25_term(double tf, double idf, double dl, double avgdl, const Bm25Params& p) {
    const double norm = avgdl > 0.0 ? dl / avgdl : 0.0;
    return idf * tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * norm));
}

}  // namespace

double InvertedIndex::bm25(const std::vector<std::string>& terms, std::uint32_t doc, const Bm25Params& p) const {
    double score = 0.0;
    const double dl = doc_length(doc);
    for (const auto& t : terms) {
        const std::uint32_t f = tf(t, doc);
        if (f == 0) continue;
        score += bm25_term(f, idf(t), dl, avg_length_, p);
    }
    return score;
}

double InvertedIndex::tfidf(const std::vector<std::string>& terms, std::uint32_t doc) const {
    double score = 0.0;
    const double n = static_cast<double>(doc_count());
    for (const auto& t : terms) {
        const std::uint32_t f = tf(t, doc);
        if (f == 0) continue;
        score += f * std::log(1.0 + n / static_cast<double>(df(t)));
    }
    return score;
}

std::vector<std::string> InvertedIndex::query_terms(std::string_view query) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (auto& w : text::words(query)) {
        if (seen.insert(w).second) out.push_back(std::move(w));
    }
    return out;
}

std::vector<ScoredDoc> InvertedIndex::keyword_search(std::string_view query, std::size_t limit,
                                                     const Bm25Params& p) const {
    if (limit == 0) throw std::invalid_argument("keyword_search: limit must be >= 1");
    const auto terms = query_terms(query);
    std::unordered_map<std::uint32_t, double> acc;
    for (const auto& t : terms) {
        const auto* plist = postings(t);
        if (plist == nullptr) continue;
        const double w = idf(t);
        for (const auto& post : *plist) {
            acc[post.doc] += bm25_term(post.tf, w, doc_lengths_[post.doc], avg_length_, p);
        }
    }
    std::vector<ScoredDoc> out;
    out.reserve(acc.size());
    for (const auto& [doc, score] : acc) out.push_back({doc, score});
    auto better = [](const ScoredDoc& a, const ScoredDoc& b) {
        return a.score != b.score ? a.score > b.score : a.doc < b.doc;
    };
    if (out.size() > limit) {
        std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(limit), out.end(), better);
        out.resize(limit);
    } else {
        std::sort(out.begin(), out.end(), better);
    }
    return out;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view in, std::size_t& off) {
    if (off + 4 > in.size()) throw DataError("truncated index payload");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[off + static_cast<std::size_t>(i)])) << (8 * i);
    off += 4;
    return v;
}

double get_f64(std::string_view in, std::size_t& off) {
    if (off + 8 > in.size()) throw DataError("truncated index payload");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[off + static_cast<std::size_t>(i)])) << (8 * i);
    off += 8;
    double v = 0;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

}  // namespace

std::string InvertedIndex::serialize() const {
    std::string out;
    put_u32(out, static_cast<std::uint32_t>(doc_lengths_.size()));
    for (auto l : doc_lengths_) put_u32(out, l);
    put_f64(out, avg_length_);
    put_u32(out, static_cast<std::uint32_t>(postings_.size()));
    for (const auto& [term, plist] : postings_) {
        put_u32(out, static_cast<std::uint32_t>(term.size()));
        out += term;
        put_u32(out, static_cast<std::uint32_t>(plist.size()));
        for (const auto& p : plist) {
            put_u32(out, p.doc);
            put_u32(out, p.tf);
        }
    }
    return out;
}

InvertedIndex InvertedIndex::deserialize(std::string_view in, std::size_t& off) {
    InvertedIndex idx;
    const std::uint32_t n = get_u32(in, off);
    idx.doc_lengths_.resize(n);
    for (auto& l : idx.doc_lengths_) l = get_u32(in, off);
    idx.avg_length_ = get_f64(in, off);
    const std::uint32_t terms = get_u32(in, off);
    for (std::uint32_t t = 0; t < terms; ++t) {
        const std::uint32_t len = get_u32(in, off);
        if (off + len > in.size()) throw DataError("truncated index payload");
        std::string term(in.substr(off, len));
        off += len;
        const std::uint32_t count = get_u32(in, off);
        std::vector<Posting> plist(count);
        for (auto& p : plist) {
            p.doc = get_u32(in, off);
            p.tf = get_u32(in, off);
            if (p.doc >= n) throw DataError("posting references unknown document");
        }
        idx.postings_.emplace(std::move(term), std::move(plist));
    }
    return idx;
}

}  // namespace socialbot::retrieval
