#include "socialbot/kg/knowledge_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "socialbot/retrieval/paired.hpp"
#include "socialbot/util/text.hpp"

namespace socialbot::kg {

std::vector<KgTriple> load_triples(const std::filesystem::path& path, std::vector<MalformedLine>* malformed) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<KgTriple> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string trimmed = text::trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const auto tab = line.find('\t', start);
            fields.push_back(text::trim(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start)));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        const bool ok = fields.size() == 3 &&
                        std::none_of(fields.begin(), fields.end(), [](const std::string& f) { return f.empty(); });
        if (!ok) {
            if (malformed == nullptr) throw DataError(path.string() + ":" + std::to_string(n) + ": expected head<TAB>relation<TAB>tail");
            malformed->push_back({n, "expected head<TAB>relation<TAB>tail"});
            continue;
        }
        out.push_back({fields[0], fields[1], fields[2]});
    }
    return out;
}

std::size_t cooccurrence_count(const std::vector<std::vector<std::string>>& conversations, const std::string& a,
                               const std::string& b) {
    const auto ta = text::words(a);
    const auto tb = text::words(b);
    std::size_t n = 0;
    for (const auto& c : conversations) {
        if (text::contains_phrase(c, ta) && text::contains_phrase(c, tb)) ++n;
    }
    return n;
}

namespace {

std::pair<std::string, std::string> ordered(std::string a, std::string b) {
    if (b < a) std::swap(a, b);
    return {std::move(a), std::move(b)};
}

const std::vector<Neighbor> kNoNeighbors;

}  // namespace

KnowledgeGraph KnowledgeGraph::build(const std::vector<KgTriple>& source, const std::vector<std::string>& conversations,
                                     std::size_t threshold, KgBuildStats* stats) {
    if (threshold == 0) throw std::invalid_argument("build_kg: threshold must be >= 1");
    std::vector<std::vector<std::string>> tokens;
    tokens.reserve(conversations.size());
    for (const auto& c : conversations) tokens.push_back(text::words(c));

    // records containing each distinct endpoint, computed once per name
    std::map<std::string, std::vector<std::uint32_t>> hits;
    auto records_with = [&](const std::string& name) -> const std::vector<std::uint32_t>& {
        const std::string key = text::normalize(name);
        auto it = hits.find(key);
        if (it != hits.end()) return it->second;
        const auto phrase = text::words(name);
        std::vector<std::uint32_t> ids;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (text::contains_phrase(tokens[i], phrase)) ids.push_back(static_cast<std::uint32_t>(i));
        }
        return hits.emplace(key, std::move(ids)).first->second;
    };

    KnowledgeGraph kg;
    std::map<std::pair<std::string, std::string>, std::size_t> cooc;
    std::set<KgTriple> seen;
    for (const auto& t : source) {
        if (t.head.empty() || t.relation.empty() || t.tail.empty()) continue;
        if (!seen.insert(t).second) continue;
        const auto key = ordered(text::normalize(t.head), text::normalize(t.tail));
        auto it = cooc.find(key);
        std::size_t count = 0;
        if (it != cooc.end()) {
            count = it->second;
        } else {
            const auto& a = records_with(t.head);
            const auto& b = records_with(t.tail);
            std::vector<std::uint32_t> both;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
            count = both.size();
            cooc.emplace(key, count);
        }
        if (count >= threshold) kg.triples_.push_back(t);
    }
    kg.index_adjacency(cooc);
    if (stats != nullptr) *stats = {source.size(), kg.triples_.size(), threshold};
    return kg;
}

void KnowledgeGraph::index_adjacency(const std::map<std::pair<std::string, std::string>, std::size_t>& cooc) {
    display_.clear();
    adjacency_.clear();
    cooc_.clear();
    std::map<std::string, std::size_t> relation_count;
    for (const auto& t : triples_) ++relation_count[t.relation];
    const double total = static_cast<double>(triples_.size());

    struct Edge {
        std::size_t edges = 0;
        std::map<std::string, std::size_t> relations;
    };
    std::map<std::pair<std::string, std::string>, Edge> edges;
    for (const auto& t : triples_) {
        const std::string h = text::normalize(t.head);
        const std::string tl = text::normalize(t.tail);
        display_.emplace(h, t.head);
        display_.emplace(tl, t.tail);
        if (h == tl) continue;
        auto& e = edges[ordered(h, tl)];
        ++e.edges;
        ++e.relations[t.relation];
    }
    for (const auto& [key, e] : edges) {
        auto it = cooc.find(key);
        const std::size_t c = it == cooc.end() ? 0 : it->second;
        cooc_[key] = c;
        std::size_t best = 0;
        for (const auto& [rel, n] : e.relations) best = std::max(best, relation_count[rel]);
        const double freq = total > 0 ? static_cast<double>(best) / total : 0.0;
        adjacency_[key.first].push_back({display_[key.second], c, e.edges, freq});
        adjacency_[key.second].push_back({display_[key.first], c, e.edges, freq});
    }
    for (auto& [k, list] : adjacency_) {
        std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) { return a.topic < b.topic; });
    }
}

const std::vector<Neighbor>& KnowledgeGraph::neighbors(const std::string& topic) const {
    auto it = adjacency_.find(text::normalize(topic));
    return it == adjacency_.end() ? kNoNeighbors : it->second;
}

std::vector<std::string> KnowledgeGraph::nodes() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : display_) out.push_back(v);
    return out;
}

bool KnowledgeGraph::contains(const std::string& topic) const { return display_.count(text::normalize(topic)) > 0; }

json KnowledgeGraph::to_json() const {
    json triples = json::array();
    for (const auto& t : triples_) triples.push_back({t.head, t.relation, t.tail});
    json cooc = json::array();
    for (const auto& [k, c] : cooc_) cooc.push_back({k.first, k.second, c});
    return json{{"schema_version", 1}, {"kind", "kg"}, {"triples", triples}, {"cooccurrence", cooc}};
}

KnowledgeGraph KnowledgeGraph::from_json(const json& j) {
    if (j.value("schema_version", 0) != 1 || j.value("kind", "") != "kg") throw DataError("not a version-1 kg file");
    KnowledgeGraph kg;
    for (const auto& t : j.at("triples")) {
        kg.triples_.push_back({t.at(0).get<std::string>(), t.at(1).get<std::string>(), t.at(2).get<std::string>()});
    }
    std::map<std::pair<std::string, std::string>, std::size_t> cooc;
    for (const auto& c : j.at("cooccurrence")) {
        cooc[{c.at(0).get<std::string>(), c.at(1).get<std::string>()}] = c.at(2).get<std::size_t>();
    }
    kg.index_adjacency(cooc);
    return kg;
}

void KnowledgeGraph::save(const std::filesystem::path& path) const { write_text_file(path, to_json().dump(1) + "\n"); }

KnowledgeGraph KnowledgeGraph::load(const std::filesystem::path& path) { return from_json(load_json(path)); }

std::vector<std::string> extract_topics(const std::string& qc, const empathy::Lexicons& lexicons) {
    std::vector<std::string> out;
    for (const auto& m : lexicons.topic_matcher().match(text::words(qc))) {
        const std::string& t = lexicons.topics()[m.id];
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    }
    return out;
}

double default_related_score(const std::vector<double>& f) {
    return std::log1p(f[0]) + f[1] + 0.1 * std::log1p(std::max(0.0, f[2])) + f[3];
}

std::vector<RelatedTopic> related_topics(const KnowledgeGraph& kg, const std::string& topic,
                                         const RelatedTopicContext& ctx) {
    std::vector<RelatedTopic> out;
    for (const auto& n : kg.neighbors(topic)) {
        RelatedTopic r;
        r.topic = n.topic;
        double pop = 0.0;
        if (ctx.popularity != nullptr) {
            auto it = ctx.popularity->find(text::normalize(n.topic));
            if (it != ctx.popularity->end()) pop = it->second;
        }
        const double sim = (ctx.encoder != nullptr && !ctx.qc.empty()) ? ctx.encoder->similarity(n.topic, ctx.qc) : 0.0;
        r.features = {static_cast<double>(n.cooccurrence), n.relation_frequency, pop, sim};
        r.score = ctx.ranker != nullptr ? ctx.ranker->predict(r.features) : default_related_score(r.features);
        out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end(), [](const RelatedTopic& a, const RelatedTopic& b) {
        return a.score != b.score ? a.score > b.score : a.topic < b.topic;
    });
    if (out.size() > ctx.cap) out.resize(ctx.cap);
    return out;
}

std::string UnpairedRecord::content_id(const std::string& s) { return "u" + text::hex64(text::fnv1a64(text::normalize(s))); }

json UnpairedRecord::to_json() const { return json{{"id", id}, {"text", text}, {"e_r", socialbot::to_json(e_r)}}; }

UnpairedRecord UnpairedRecord::from_json(const json& j, const EmpathySchema& schema) {
    UnpairedRecord r;
    r.text = j.at("text").get<std::string>();
    r.id = j.contains("id") ? j.at("id").get<std::string>() : content_id(r.text);
    r.e_r = schema.make(j.value("e_r", json::object()).get<std::map<std::string, std::string>>());
    return r;
}

UnpairedIndex UnpairedIndex::build(std::vector<UnpairedRecord> records) {
    UnpairedIndex idx;
    std::vector<std::string> docs;
    docs.reserve(records.size());
    for (const auto& r : records) docs.push_back(r.text);
    idx.index_ = retrieval::InvertedIndex::build(docs);
    idx.records_ = std::move(records);
    return idx;
}

void UnpairedIndex::save(const std::filesystem::path& path) const {
    std::string payload = index_.serialize();
    json recs = json::array();
    for (const auto& r : records_) recs.push_back(r.to_json());
    payload += recs.dump();
    retrieval::write_index_file(path, {1, "unpaired", records_.size(), "", 0}, payload);
}

UnpairedIndex UnpairedIndex::load(const std::filesystem::path& path, const EmpathySchema& schema) {
    retrieval::IndexFileHeader header;
    const std::string payload = retrieval::read_index_file(path, "unpaired", &header);
    std::size_t off = 0;
    auto keywords = retrieval::InvertedIndex::deserialize(payload, off);
    std::vector<UnpairedRecord> records;
    for (const auto& j : json::parse(payload.substr(off))) records.push_back(UnpairedRecord::from_json(j, schema));
    if (records.size() != header.doc_count) throw DataError(path.string() + ": document count mismatch");
    UnpairedIndex idx = build(std::move(records));
    if (!(idx.index_ == keywords)) throw DataError(path.string() + ": stored postings disagree with records");
    return idx;
}

double echo_overlap(const std::string& sentence, const std::string& qc, const empathy::Lexicons* lexicons) {
    const auto words = lexicons != nullptr ? lexicons->content_words(sentence) : text::words(sentence);
    if (words.empty()) return 0.0;
    const auto q = lexicons != nullptr ? lexicons->content_words(qc) : text::words(qc);
    const std::set<std::string> qs(q.begin(), q.end());
    std::size_t shared = 0;
    for (const auto& w : words) shared += qs.count(w);
    return static_cast<double>(shared) / static_cast<double>(words.size());
}

std::vector<ResponseCandidate> retrieve_unpaired(const UnpairedIndex& index, const std::string& qc,
                                                 const std::vector<std::string>& topics,
                                                 const std::vector<std::string>& related, const PersonaProfile& bot,
                                                 const empathy::Lexicons* lexicons, const UnpairedParams& params) {
    std::vector<ResponseCandidate> out;
    if (index.size() == 0 || params.cap == 0) return out;
    std::string query;
    for (const auto* list : {&topics, &related}) {
        for (const auto& t : *list) query += t + " ";
    }
    if (text::trim(query).empty()) query = qc;

    const std::string qnorm = text::normalize(qc);
    struct Hit {
        std::uint32_t doc;
        double score;
        double overlap;
    };
    std::vector<Hit> hits;
    for (const auto& d : index.keywords().keyword_search(query, std::max(params.search_limit, params.cap), params.bm25)) {
        const auto& rec = index.records()[d.doc];
        if (text::normalize(rec.text) == qnorm) continue;
        if (retrieval::persona_conflict(rec.e_r, bot)) continue;
        const double overlap = echo_overlap(rec.text, qc, lexicons);
        hits.push_back({d.doc, d.score * (1.0 - overlap), overlap});
    }
    std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        return a.score != b.score ? a.score > b.score : a.doc < b.doc;
    });
    if (hits.size() > params.cap) hits.resize(params.cap);
    out.reserve(hits.size());
    for (const auto& h : hits) {
        const auto& rec = index.records()[h.doc];
        ResponseCandidate c;
        c.text = rec.text;
        c.source = CandidateSource::Unpaired;
        c.provenance = rec.id;
        c.generator_score = h.score;
        c.stored_e_r = rec.e_r;
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace socialbot::kg
