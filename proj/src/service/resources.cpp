#include "socialbot/service/resources.hpp"

#include <algorithm>

#include "socialbot/util/text.hpp"

namespace socialbot::service {

namespace {

std::shared_ptr<const ml::GbrtModel> optional_model(const EngineConfig& c, const std::string& name,
                                                    std::size_t num_features, std::vector<std::string>& notes) {
    auto p = c.existing(name);
    if (!p) return nullptr;
    auto m = std::make_shared<ml::GbrtModel>(ml::GbrtModel::load(*p));
    if (m->num_features() != num_features) {
        notes.push_back(name + ": expected " + std::to_string(num_features) + " features, ignoring model");
        return nullptr;
    }
    return m;
}

std::vector<std::string> graph_conversations(const EngineConfig& config, Foundation& f) {
    // texts only, so the store is read without a schema
    if (auto store = config.existing("paired_store")) {
        std::vector<std::string> out;
        for (const auto& j : load_jsonl(*store)) {
            out.push_back(j.at("qc").get<std::string>() + "\n" + j.at("response").get<std::string>());
        }
        return out;
    }
    if (f.raw_pairs.empty()) {
        f.raw_pairs = read_filtered_pairs(config.path("paired_corpus"), f.filters, f.bot, f.pair_stats);
    }
    return conversation_texts(f.raw_pairs);
}

}  // namespace

Foundation load_foundation(const EngineConfig& config, bool force_rebuild_graph) {
    Foundation f;
    f.bot = PersonaProfile::from_json(load_json(config.path("bot_persona")));
    f.filters = retrieval::FilterRules::load(config.path("filter_rules"));
    f.lexicons = std::make_shared<empathy::Lexicons>(empathy::Lexicons::load(config.path("lexicons")));
    f.topics = config.existing("topics") ? dm::TopicDB::load(config.path("topics")) : dm::TopicDB{};

    auto kg_file = config.existing("kg");
    if (kg_file && !force_rebuild_graph) {
        f.graph = std::make_shared<kg::KnowledgeGraph>(kg::KnowledgeGraph::load(*kg_file));
    } else {
        std::vector<kg::KgTriple> triples;
        if (auto t = config.existing("triples")) {
            std::vector<MalformedLine> bad;
            triples = kg::load_triples(*t, &bad);
            for (const auto& b : bad) {
                f.notes.push_back("triples line " + std::to_string(b.line) + ": " + b.message);
            }
        }
        f.graph = std::make_shared<kg::KnowledgeGraph>(
            kg::KnowledgeGraph::build(triples, graph_conversations(config, f), config.kg_threshold));
    }

    std::vector<std::string> extra = f.topics.names();
    for (auto& n : f.graph->nodes()) extra.push_back(std::move(n));
    f.lexicons->add_topics(extra);
    f.lexicons->validate_topics(std::set<std::string>(extra.begin(), extra.end()));

    f.schema = EmpathySchema::standard(f.lexicons->topics(), config.persona_values);
    if (config.empathy_dim && *config.empathy_dim != f.schema.dim()) {
        throw DataError("config: dims.k = " + std::to_string(*config.empathy_dim) + " but the empathy schema has " +
                        std::to_string(f.schema.dim()) + " dimensions");
    }
    f.empathy = std::make_shared<empathy::EmpathyEngine>(f.lexicons, f.schema,
                                                         empathy::HeuristicTable::load(config.path("heuristics")));
    return f;
}

std::vector<retrieval::PairedRecord> paired_records(const EngineConfig& config, Foundation& f, IngestStats* stats) {
    if (auto store = config.existing("paired_store")) return load_paired_store(*store, f.schema);
    if (f.raw_pairs.empty() && f.pair_stats.lines == 0) {
        f.raw_pairs = read_filtered_pairs(config.path("paired_corpus"), f.filters, f.bot, f.pair_stats);
    }
    IngestStats local = f.pair_stats;
    std::vector<retrieval::PairedRecord> out;
    for (const auto& raw : f.raw_pairs) upsert(out, annotate_pair(raw, *f.empathy), local);
    if (stats != nullptr) *stats = local;
    return out;
}

std::vector<kg::UnpairedRecord> unpaired_records(const EngineConfig& config, const Foundation& f, IngestStats* stats) {
    if (auto store = config.existing("unpaired_store")) return load_unpaired_store(*store, f.schema);
    IngestStats local;
    std::vector<kg::UnpairedRecord> out;
    if (auto corpus = config.existing("unpaired_corpus")) {
        for (const auto& s : read_filtered_sentences(*corpus, f.filters, f.bot, local)) {
            upsert(out, annotate_sentence(s, *f.empathy), local);
        }
    }
    if (stats != nullptr) *stats = local;
    return out;
}

std::shared_ptr<const Resources> Resources::load(const EngineConfig& config) {
    auto r = std::make_shared<Resources>();
    r->config = config;
    Foundation f = load_foundation(config);
    r->notes = f.notes;
    r->bot = f.bot;
    r->lexicons = f.lexicons;
    r->empathy = f.empathy;
    r->filters = std::make_shared<retrieval::FilterRules>(f.filters);
    r->editorial = std::make_shared<chat::EditorialSet>(chat::EditorialSet::load(config.path("editorial")));
    r->topics = std::make_shared<dm::TopicDB>(f.topics);
    r->popularity = r->topics->popularity();
    r->graph = f.graph;

    std::vector<retrieval::PairedRecord> records;
    auto paired_index_file = config.existing("paired_index");
    const bool need_records =
        !paired_index_file || (!config.existing("encoder") && config.train_encoder_if_missing);
    if (need_records) {
        IngestStats st;
        records = paired_records(config, f, &st);
        if (!paired_index_file) r->ingest["paired"] = st;
    }

    if (auto enc = config.existing("encoder")) {
        r->encoder = std::make_shared<ml::DualEncoder>(ml::DualEncoder::load(*enc));
    } else if (config.train_encoder_if_missing && records.size() >= 2) {
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& rec : records) pairs.emplace_back(rec.qc, rec.response);
        r->encoder = std::make_shared<ml::DualEncoder>(ml::train_dual_encoder(pairs, config.encoder));
        r->notes.push_back("encoder trained in memory");
    }

    if (paired_index_file) {
        r->paired = std::make_shared<retrieval::PairedIndex>(
            retrieval::PairedIndex::load(*paired_index_file, f.schema, r->encoder.get()));
    } else {
        r->paired = std::make_shared<retrieval::PairedIndex>(
            retrieval::PairedIndex::build(std::move(records), r->encoder.get()));
        r->notes.push_back("paired index built in memory");
    }

    if (auto u = config.existing("unpaired_index")) {
        r->unpaired = std::make_shared<kg::UnpairedIndex>(kg::UnpairedIndex::load(*u, f.schema));
    } else {
        IngestStats st;
        r->unpaired = std::make_shared<kg::UnpairedIndex>(kg::UnpairedIndex::build(unpaired_records(config, f, &st)));
        r->ingest["unpaired"] = st;
        r->notes.push_back("unpaired index built in memory");
    }

    if (auto n = config.existing("nrg_model")) {
        auto model = std::make_shared<nrg::NrgModel>(nrg::NrgModel::load(*n));
        if (model->k() != f.schema.dim()) {
            r->notes.push_back("nrg_model: empathy dimension " + std::to_string(model->k()) +
                               " does not match the schema, neural generator disabled");
        } else {
            r->nrg = std::move(model);
        }
    } else {
        r->notes.push_back("no neural model, neural generator disabled");
    }

    r->ranker_model = optional_model(config, "ranker_model", chat::feature_names().size(), r->notes);
    r->switch_model = optional_model(config, "switch_model", 4, r->notes);
    r->topic_model = optional_model(config, "topic_model", dm::kTopicFeatures.size(), r->notes);
    r->related_model = optional_model(config, "related_model", kg::kRelatedTopicFeatures.size(), r->notes);

    dm::SkillResources skill_res;
    skill_res.empathy = r->empathy;
    if (auto w = config.existing("weather")) {
        skill_res.weather = std::make_shared<dm::CannedWeatherProvider>(
            load_json(*w).get<std::map<std::string, std::string>>());
    }
    r->skills = std::make_shared<dm::SkillRegistry>(
        config.existing("skills") ? dm::registry_from_json(load_json(config.path("skills")), skill_res)
                                  : dm::SkillRegistry{});

    r->generators["paired"] =
        std::make_shared<chat::PairedGenerator>(r->paired, r->encoder, r->bot, config.paired);
    r->generators["unpaired"] = std::make_shared<chat::UnpairedGenerator>(
        r->unpaired, r->graph, r->lexicons, r->related_context(), r->bot, config.unpaired);
    if (r->nrg) r->generators["neural"] = std::make_shared<chat::NeuralGenerator>(r->nrg, config.beam);
    r->core_chat = r->make_core_chat(config.generators);
    return r;
}

std::vector<std::shared_ptr<const chat::CandidateGenerator>> Resources::select_generators(
    const std::vector<std::string>& names) const {
    std::vector<std::shared_ptr<const chat::CandidateGenerator>> out;
    for (const auto& n : names) {
        if (auto it = generators.find(n); it != generators.end()) out.push_back(it->second);
    }
    return out;
}

std::shared_ptr<const chat::CoreChat> Resources::make_core_chat(const std::vector<std::string>& names) const {
    chat::CoreChatConfig cc;
    cc.generators = select_generators(names);
    cc.features.empathy = empathy.get();
    cc.features.pair_encoder = encoder.get();
    cc.features.bot = bot;
    cc.features.context_turns = config.context_turns;
    if (ranker_model) cc.ranker.ranker = std::make_shared<chat::GbrtRanker>(ranker_model);
    cc.ranker.threshold = config.rank_threshold;
    cc.editorial = editorial.get();
    cc.repetition_window = config.repetition_window;
    cc.time_budget_ms = config.time_budget_ms;
    return std::make_shared<chat::CoreChat>(std::move(cc));
}

kg::RelatedTopicContext Resources::related_context() const {
    kg::RelatedTopicContext ctx;
    ctx.ranker = related_model.get();
    ctx.encoder = encoder.get();
    ctx.popularity = &popularity;
    ctx.cap = config.related_cap;
    return ctx;
}

dm::TopicRankerContext Resources::topic_context(TimestampMs now) const {
    dm::TopicRankerContext ctx;
    ctx.ranker = topic_model.get();
    ctx.encoder = encoder.get();
    ctx.now_ms = now;
    ctx.half_life_days = config.topic_half_life_days;
    return ctx;
}

}  // namespace socialbot::service
