#include "socialbot/service/ingest.hpp"

#include <sstream>
#include <stdexcept>

#include "socialbot/util/text.hpp"

namespace socialbot::service {

CorpusKind corpus_kind_from_string(std::string_view s) {
    if (s == "paired") return CorpusKind::Paired;
    if (s == "unpaired") return CorpusKind::Unpaired;
    if (s == "triples") return CorpusKind::Triples;
    if (s == "topics") return CorpusKind::Topics;
    if (s == "lexicons") return CorpusKind::Lexicons;
    throw std::invalid_argument("unknown corpus kind: " + std::string(s));
}

std::string_view to_string(CorpusKind k) {
    switch (k) {
        case CorpusKind::Paired: return "paired";
        case CorpusKind::Unpaired: return "unpaired";
        case CorpusKind::Triples: return "triples";
        case CorpusKind::Topics: return "topics";
        case CorpusKind::Lexicons: return "lexicons";
    }
    return "?";
}

std::size_t IngestStats::dropped_total() const {
    std::size_t n = 0;
    for (const auto& [_, c] : dropped) n += c;
    return n;
}

json IngestStats::to_json() const {
    json bad = json::array();
    for (const auto& m : malformed) bad.push_back({{"line", m.line}, {"message", m.message}});
    return {{"lines", lines},      {"kept", kept},           {"replaced", replaced},
            {"dropped", dropped},  {"dropped_total", dropped_total()}, {"malformed", bad}};
}

void check_malformed(const IngestStats& stats, const std::filesystem::path& path) {
    if (stats.lines == 0 || stats.malformed.empty()) return;
    const double share = static_cast<double>(stats.malformed.size()) / static_cast<double>(stats.lines);
    if (share > kMaxMalformedShare) {
        std::ostringstream msg;
        msg << path.string() << ": " << stats.malformed.size() << " of " << stats.lines
            << " lines malformed (first at line " << stats.malformed.front().line << ")";
        throw DataError(msg.str());
    }
}

std::vector<retrieval::RawPair> read_filtered_pairs(const std::filesystem::path& path,
                                                    const retrieval::FilterRules& rules, const PersonaProfile& bot,
                                                    IngestStats& stats) {
    std::vector<retrieval::RawPair> out;
    stats.lines += read_jsonl(
        path,
        [&](const json& j, std::size_t) {
            auto raw = retrieval::RawPair::from_json(j);
            const auto verdict = retrieval::filter_pair(raw, rules, bot);
            if (!verdict.keep) {
                ++stats.dropped[std::string(retrieval::to_string(verdict.reason))];
                return;
            }
            out.push_back(std::move(raw));
        },
        &stats.malformed);
    check_malformed(stats, path);
    return out;
}

std::vector<RawSentence> read_filtered_sentences(const std::filesystem::path& path,
                                                 const retrieval::FilterRules& rules, const PersonaProfile& bot,
                                                 IngestStats& stats) {
    std::vector<RawSentence> out;
    stats.lines += read_jsonl(
        path,
        [&](const json& j, std::size_t) {
            RawSentence s{j.at("text").get<std::string>(), j.value("meta", json::object())};
            const auto verdict = rules.check_response(s.text, bot);
            if (!verdict.keep) {
                ++stats.dropped[std::string(retrieval::to_string(verdict.reason))];
                return;
            }
            out.push_back(std::move(s));
        },
        &stats.malformed);
    check_malformed(stats, path);
    return out;
}

namespace {

PersonaProfile profile_from(const json& meta, const char* key) {
    if (meta.contains(key) && meta.at(key).is_object()) return PersonaProfile::from_json(meta.at(key));
    return {};
}

TurnAnnotations plain_annotations(const empathy::EmpathyEngine& engine, const std::string& user,
                                  const std::string& bot) {
    TurnAnnotations a;
    a.qc = user;
    a.user_entities = engine.detect_entities(user);
    a.bot_entities = engine.detect_entities(bot);
    return a;
}

}  // namespace

retrieval::PairedRecord annotate_pair(const retrieval::RawPair& raw, const empathy::EmpathyEngine& engine) {
    // context lines alternate user / bot, oldest first
    WorkingMemory memory;
    for (std::size_t i = 0; i < raw.context.size(); i += 2) {
        const std::string& u = raw.context[i];
        const std::string b = i + 1 < raw.context.size() ? raw.context[i + 1] : std::string();
        if (text::trim(u).empty()) continue;
        memory = tracker_update(std::move(memory), u, b, plain_annotations(engine, u, b), 0);
    }
    const PersonaProfile asker = profile_from(raw.meta, "asker");
    const PersonaProfile responder = profile_from(raw.meta, "responder");

    retrieval::PairedRecord rec;
    rec.qc = engine.contextual_rewrite(raw.query, memory).qc;
    rec.response = raw.response;
    rec.e_q = engine.understand_user(rec.qc, memory, &asker);

    WorkingMemory reply = memory;
    TurnAnnotations pseudo = plain_annotations(engine, rec.qc, "");
    pseudo.e_q = rec.e_q;
    pseudo.e_r = rec.e_q;
    reply = tracker_update(std::move(reply), rec.qc, "", std::move(pseudo), 0);
    rec.e_r = engine.understand_user(rec.response, reply, &responder);
    rec.source = raw.meta.value("source", "internet");
    rec.id = retrieval::PairedRecord::content_id(rec.qc, rec.response);
    return rec;
}

kg::UnpairedRecord annotate_sentence(const RawSentence& raw, const empathy::EmpathyEngine& engine) {
    const PersonaProfile author = profile_from(raw.meta, "author");
    kg::UnpairedRecord rec;
    rec.text = raw.text;
    rec.e_r = engine.understand_user(raw.text, WorkingMemory{}, &author);
    rec.id = kg::UnpairedRecord::content_id(raw.text);
    return rec;
}

namespace {

template <class Record>
void upsert_impl(std::vector<Record>& store, Record rec, IngestStats& stats) {
    for (auto& existing : store) {
        if (existing.id == rec.id) {
            existing = std::move(rec);
            ++stats.replaced;
            return;
        }
    }
    store.push_back(std::move(rec));
    ++stats.kept;
}

}  // namespace

void upsert(std::vector<retrieval::PairedRecord>& store, retrieval::PairedRecord rec, IngestStats& stats) {
    upsert_impl(store, std::move(rec), stats);
}

void upsert(std::vector<kg::UnpairedRecord>& store, kg::UnpairedRecord rec, IngestStats& stats) {
    upsert_impl(store, std::move(rec), stats);
}

std::vector<retrieval::PairedRecord> load_paired_store(const std::filesystem::path& path,
                                                       const EmpathySchema& schema) {
    std::vector<retrieval::PairedRecord> out;
    for (const auto& j : load_jsonl(path)) out.push_back(retrieval::PairedRecord::from_json(j, schema));
    return out;
}

void save_paired_store(const std::filesystem::path& path, const std::vector<retrieval::PairedRecord>& records) {
    std::string buf;
    for (const auto& r : records) buf += r.to_json().dump() + "\n";
    write_text_file(path, buf);
}

std::vector<kg::UnpairedRecord> load_unpaired_store(const std::filesystem::path& path, const EmpathySchema& schema) {
    std::vector<kg::UnpairedRecord> out;
    for (const auto& j : load_jsonl(path)) out.push_back(kg::UnpairedRecord::from_json(j, schema));
    return out;
}

void save_unpaired_store(const std::filesystem::path& path, const std::vector<kg::UnpairedRecord>& records) {
    std::string buf;
    for (const auto& r : records) buf += r.to_json().dump() + "\n";
    write_text_file(path, buf);
}

std::vector<std::string> conversation_texts(const std::vector<retrieval::RawPair>& pairs) {
    std::vector<std::string> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(p.query + "\n" + p.response);
    return out;
}

std::vector<std::string> conversation_texts(const std::vector<retrieval::PairedRecord>& records) {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.qc + "\n" + r.response);
    return out;
}

}  // namespace socialbot::service
