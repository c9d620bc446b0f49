#include "socialbot/retrieval/paired.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "socialbot/util/text.hpp"

namespace socialbot::retrieval {

std::string PairedRecord::content_id(const std::string& qc, const std::string& response) {
    return "p" + text::hex64(text::fnv1a64(text::normalize(qc) + "\x1f" + text::normalize(response)));
}

json PairedRecord::to_json() const {
    return json{{"id", id},         {"qc", qc},         {"response", response},
                {"e_q", socialbot::to_json(e_q)}, {"e_r", socialbot::to_json(e_r)}, {"source", source}};
}

PairedRecord PairedRecord::from_json(const json& j, const EmpathySchema& schema) {
    PairedRecord r;
    r.qc = j.at("qc").get<std::string>();
    r.response = j.at("response").get<std::string>();
    r.id = j.contains("id") ? j.at("id").get<std::string>() : content_id(r.qc, r.response);
    r.e_q = schema.make(j.value("e_q", json::object()).get<std::map<std::string, std::string>>());
    r.e_r = schema.make(j.value("e_r", json::object()).get<std::map<std::string, std::string>>());
    r.source = j.value("source", "internet");
    return r;
}

void write_index_file(const std::filesystem::path& path, IndexFileHeader header, const std::string& payload) {
    header.payload_bytes = payload.size();
    header.checksum = text::hex64(text::fnv1a64(payload));
    json h{{"schema_version", header.schema_version}, {"kind", header.kind},
           {"doc_count", header.doc_count},           {"checksum", header.checksum},
           {"payload_bytes", header.payload_bytes}};
    write_text_file(path, h.dump() + "\n" + payload);
}

std::string read_index_file(const std::filesystem::path& path, const std::string& kind, IndexFileHeader* out) {
    const std::string bytes = read_text_file(path);
    const auto nl = bytes.find('\n');
    if (nl == std::string::npos) throw DataError(path.string() + ": missing index header");
    json h;
    try {
        h = json::parse(bytes.substr(0, nl));
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": bad index header: " + e.what());
    }
    IndexFileHeader header;
    header.schema_version = h.value("schema_version", 0);
    header.kind = h.value("kind", "");
    header.doc_count = h.value("doc_count", std::size_t{0});
    header.checksum = h.value("checksum", "");
    header.payload_bytes = h.value("payload_bytes", std::size_t{0});
    if (header.schema_version != 1) throw DataError(path.string() + ": unsupported schema_version");
    if (header.kind != kind) throw DataError(path.string() + ": expected a " + kind + " index");
    std::string payload = bytes.substr(nl + 1);
    if (payload.size() != header.payload_bytes) throw DataError(path.string() + ": payload size mismatch");
    if (text::hex64(text::fnv1a64(payload)) != header.checksum) throw DataError(path.string() + ": checksum mismatch");
    if (out != nullptr) *out = header;
    return payload;
}

PairedIndex PairedIndex::build(std::vector<PairedRecord> records, const ml::DualEncoder* encoder) {
    PairedIndex idx;
    std::vector<std::string> docs;
    docs.reserve(records.size());
    for (const auto& r : records) docs.push_back(r.qc);
    idx.index_ = InvertedIndex::build(docs);
    if (encoder != nullptr && !records.empty()) {
        idx.encodings_.resize(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(encoder->dim()));
        for (std::size_t i = 0; i < records.size(); ++i) {
            idx.encodings_.row(static_cast<Eigen::Index>(i)) = encoder->encode_query(records[i].qc).transpose();
        }
    }
    idx.records_ = std::move(records);
    return idx;
}

std::vector<ScoredDoc> PairedIndex::keyword_search(const std::string& qc, std::size_t limit,
                                                   const Bm25Params& p) const {
    return index_.keyword_search(qc, limit, p);
}

std::vector<ScoredDoc> PairedIndex::semantic_search(const ml::DualEncoder& encoder, const std::string& qc,
                                                    std::size_t limit) const {
    std::vector<ScoredDoc> out;
    if (records_.empty() || limit == 0) return out;
    if (encodings_.rows() == 0 || encodings_.cols() != static_cast<Eigen::Index>(encoder.dim())) {
        throw std::logic_error("semantic_search: index was built without a matching encoder");
    }
    const Eigen::VectorXd q = encoder.encode_query(qc);
    if (q.squaredNorm() == 0.0) return out;
    const Eigen::VectorXd scores = encodings_ * q;
    out.reserve(records_.size());
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        out.push_back({static_cast<std::uint32_t>(i), std::clamp(scores[i], -1.0, 1.0)});
    }
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

void PairedIndex::save(const std::filesystem::path& path) const {
    std::string payload = index_.serialize();
    json recs = json::array();
    for (const auto& r : records_) recs.push_back(r.to_json());
    payload += recs.dump();
    write_index_file(path, {1, "paired", records_.size(), "", 0}, payload);
}

PairedIndex PairedIndex::load(const std::filesystem::path& path, const EmpathySchema& schema,
                              const ml::DualEncoder* encoder) {
    IndexFileHeader header;
    const std::string payload = read_index_file(path, "paired", &header);
    std::size_t off = 0;
    InvertedIndex keywords = InvertedIndex::deserialize(payload, off);
    std::vector<PairedRecord> records;
    for (const auto& j : json::parse(payload.substr(off))) records.push_back(PairedRecord::from_json(j, schema));
    if (records.size() != header.doc_count || keywords.doc_count() != records.size()) {
        throw DataError(path.string() + ": document count mismatch");
    }
    PairedIndex idx = build(std::move(records), encoder);
    if (!(idx.index_ == keywords)) throw DataError(path.string() + ": stored postings disagree with records");
    return idx;
}

bool persona_conflict(const EmpathyVector& stored, const PersonaProfile& bot) {
    for (auto key : kPersonaKeys) {
        const std::string k(key);
        const std::string& v = stored.get(k);
        if (v == "unknown") continue;
        auto it = bot.keys.find(k);
        if (it != bot.keys.end() && it->second != "unknown" && it->second != v) return true;
    }
    return false;
}

std::vector<ResponseCandidate> retrieve_paired(const PairedIndex& index, const ml::DualEncoder* encoder,
                                               const std::string& qc, const PersonaProfile& bot,
                                               const PairedRetrievalParams& params) {
    std::vector<ResponseCandidate> out;
    if (index.size() == 0 || params.cap == 0) return out;

    std::map<std::uint32_t, double> merged;
    const auto kw = index.keyword_search(qc, std::max<std::size_t>(params.keyword_limit, 1), params.bm25);
    const double best = kw.empty() ? 0.0 : kw.front().score;
    for (const auto& d : kw) merged[d.doc] = best > 0.0 ? d.score / best : 0.0;
    if (encoder != nullptr && index.has_encodings()) {
        for (const auto& d : index.semantic_search(*encoder, qc, params.semantic_limit)) {
            if (d.score < params.semantic_min_score) break;
            auto [it, inserted] = merged.emplace(d.doc, d.score);
            if (!inserted) it->second = std::max(it->second, d.score);
        }
    }

    std::vector<std::pair<std::uint32_t, double>> ranked;
    ranked.reserve(merged.size());
    for (const auto& [doc, score] : merged) {
        if (persona_conflict(index.records()[doc].e_r, bot)) continue;
        ranked.emplace_back(doc, score);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > params.cap) ranked.resize(params.cap);

    const auto terms = InvertedIndex::query_terms(qc);
    out.reserve(ranked.size());
    for (const auto& [doc, score] : ranked) {
        const PairedRecord& rec = index.records()[doc];
        ResponseCandidate c;
        c.text = rec.response;
        c.source = CandidateSource::Paired;
        c.provenance = rec.id;
        c.generator_score = score;
        c.retrieval.bm25 = index.keywords().bm25(terms, doc, params.bm25);
        c.retrieval.tfidf = index.keywords().tfidf(terms, doc);
        c.retrieval.cosine = encoder != nullptr ? encoder->similarity(qc, rec.qc) : 0.0;
        c.retrieval.present = true;
        c.stored_e_r = rec.e_r;
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace socialbot::retrieval
