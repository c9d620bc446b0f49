// Command-line front end: data preparation, training, evaluation, chat and serving.
#include <chrono>
#include <csignal>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "socialbot/service/engine.hpp"
#include "socialbot/service/evaluation.hpp"
#include "socialbot/service/http.hpp"
#include "socialbot/service/ingest.hpp"
#include "socialbot/service/training.hpp"
#include "socialbot/util/text.hpp"

namespace sb = socialbot;
namespace svc = socialbot::service;

namespace {

struct Globals {
    std::string config = std::string(SOCIALBOT_DATA_DIR) + "/config/engine.json";
    std::string data_dir;
    std::optional<std::uint64_t> seed;
};

svc::EngineConfig load_config(const Globals& g) {
    auto c = svc::EngineConfig::load(g.config, g.data_dir);
    if (g.seed) c.seed = *g.seed;
    return c;
}

void print(const sb::json& j) {
    std::cout << j.dump(2) << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_ingest(const Globals& g, const std::string& kind_s, const std::string& input) {
    const auto cfg = load_config(g);
    const auto kind = svc::corpus_kind_from_string(kind_s);
    svc::IngestStats stats;
    switch (kind) {
        case svc::CorpusKind::Paired: {
            auto f = svc::load_foundation(cfg);
            auto raw = svc::read_filtered_pairs(input, f.filters, f.bot, stats);
            const auto store_path = cfg.path("paired_store");
            std::vector<sb::retrieval::PairedRecord> store;
            if (std::filesystem::exists(store_path)) store = svc::load_paired_store(store_path, f.schema);
            for (const auto& r : raw) svc::upsert(store, svc::annotate_pair(r, *f.empathy), stats);
            svc::save_paired_store(store_path, store);
            break;
        }
        case svc::CorpusKind::Unpaired: {
            auto f = svc::load_foundation(cfg);
            auto raw = svc::read_filtered_sentences(input, f.filters, f.bot, stats);
            const auto store_path = cfg.path("unpaired_store");
            std::vector<sb::kg::UnpairedRecord> store;
            if (std::filesystem::exists(store_path)) store = svc::load_unpaired_store(store_path, f.schema);
            for (const auto& s : raw) svc::upsert(store, svc::annotate_sentence(s, *f.empathy), stats);
            svc::save_unpaired_store(store_path, store);
            break;
        }
        case svc::CorpusKind::Triples: {
            auto triples = sb::kg::load_triples(input, &stats.malformed);
            stats.lines = triples.size() + stats.malformed.size();
            svc::check_malformed(stats, input);
            stats.kept = triples.size();
            std::string out = "# head\trelation\ttail\n";
            for (const auto& t : triples) out += t.head + "\t" + t.relation + "\t" + t.tail + "\n";
            sb::write_text_file(cfg.path("triples"), out);
            break;
        }
        case svc::CorpusKind::Topics: {
            std::vector<sb::dm::TopicEntry> entries;
            stats.lines = sb::read_jsonl(
                input, [&](const sb::json& j, std::size_t) { entries.push_back(sb::dm::TopicEntry::from_json(j)); },
                &stats.malformed);
            svc::check_malformed(stats, input);
            std::vector<sb::dm::TopicEntry> merged;
            if (auto existing = cfg.existing("topics"); existing && *existing != std::filesystem::path(input)) {
                merged = sb::dm::TopicDB::load(*existing).entries();
            }
            const std::size_t before = sb::dm::TopicDB(merged).entries().size();
            for (auto& e : entries) merged.push_back(std::move(e));
            sb::dm::TopicDB db(std::move(merged));
            stats.kept = db.entries().size() - before;
            stats.replaced = entries.size() - stats.kept;
            std::string out;
            for (const auto& e : db.entries()) out += e.to_json().dump() + "\n";
            sb::write_text_file(cfg.path("topics"), out);
            break;
        }
        case svc::CorpusKind::Lexicons: {
            std::vector<sb::json> records;
            stats.lines = sb::read_jsonl(input, [&](const sb::json& j, std::size_t) { records.push_back(j); },
                                         &stats.malformed);
            svc::check_malformed(stats, input);
            sb::empathy::Lexicons::from_records(records);  // validates
            stats.kept = records.size();
            std::string out;
            for (const auto& r : records) out += r.dump() + "\n";
            sb::write_text_file(cfg.path("lexicons"), out);
            break;
        }
    }
    sb::json j = stats.to_json();
    j["kind"] = kind_s;
    print(j);
    return 0;
}

int cmd_build_index(const Globals& g) {
    const auto cfg = load_config(g);
    const auto t0 = std::chrono::steady_clock::now();
    auto f = svc::load_foundation(cfg);
    svc::IngestStats pstats;
    auto records = svc::paired_records(cfg, f, &pstats);
    std::unique_ptr<sb::ml::DualEncoder> enc;
    if (auto e = cfg.existing("encoder")) enc = std::make_unique<sb::ml::DualEncoder>(sb::ml::DualEncoder::load(*e));
    if (!cfg.existing("paired_store")) svc::save_paired_store(cfg.path("paired_store"), records);
    const std::size_t n_paired = records.size();
    sb::retrieval::PairedIndex::build(std::move(records), enc.get()).save(cfg.path("paired_index"));

    svc::IngestStats ustats;
    auto sentences = svc::unpaired_records(cfg, f, &ustats);
    if (!cfg.existing("unpaired_store")) svc::save_unpaired_store(cfg.path("unpaired_store"), sentences);
    const std::size_t n_unpaired = sentences.size();
    sb::kg::UnpairedIndex::build(std::move(sentences)).save(cfg.path("unpaired_index"));
    print({{"paired_records", n_paired},
           {"unpaired_records", n_unpaired},
           {"paired_ingest", pstats.to_json()},
           {"unpaired_ingest", ustats.to_json()},
           {"semantic", enc != nullptr},
           {"seconds", seconds_since(t0)}});
    return 0;
}

int cmd_build_kg(const Globals& g) {
    const auto cfg = load_config(g);
    std::vector<sb::MalformedLine> bad;
    const auto triples = sb::kg::load_triples(cfg.path("triples"), &bad);
    auto f = svc::load_foundation(cfg, true);
    const auto records = svc::paired_records(cfg, f, nullptr);
    sb::kg::KgBuildStats stats;
    const auto graph = sb::kg::KnowledgeGraph::build(triples, svc::conversation_texts(records), cfg.kg_threshold, &stats);
    graph.save(cfg.path("kg"));
    sb::json bad_j = sb::json::array();
    for (const auto& b : bad) bad_j.push_back({{"line", b.line}, {"message", b.message}});
    print({{"source_triples", stats.source_triples},
           {"retained", stats.retained},
           {"threshold", stats.threshold},
           {"nodes", graph.nodes().size()},
           {"malformed", bad_j}});
    return 0;
}

int cmd_train_encoder(const Globals& g) {
    const auto cfg = load_config(g);
    auto f = svc::load_foundation(cfg);
    const auto records = svc::paired_records(cfg, f, nullptr);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& r : records) pairs.emplace_back(r.qc, r.response);
    sb::ml::DualEncoderReport report;
    const auto enc = sb::ml::train_dual_encoder(pairs, cfg.encoder, &report);
    enc.save(cfg.path("encoder"));
    print({{"pairs", pairs.size()},
           {"epoch_loss", report.epoch_loss},
           {"mean_positive_cosine", report.mean_positive},
           {"mean_negative_cosine", report.mean_negative}});
    return 0;
}

int cmd_train_ranker(const Globals& g, const std::string& labels, int rounds, int depth, double lr,
                     std::size_t max_queries) {
    const auto cfg = load_config(g);
    std::vector<sb::ml::LabeledExample> data;
    if (!labels.empty()) {
        data = sb::ml::load_examples(labels);
    } else {
        auto res = svc::Resources::load(cfg);
        data = svc::self_labelled_ranker_data(*res, max_queries, cfg.seed);
    }
    sb::ml::GbrtParams p;
    p.rounds = rounds;
    p.depth = depth;
    p.learning_rate = lr;
    const auto model = sb::ml::train_gbrt(data, p);
    model.save(cfg.path("ranker_model"));
    print({{"examples", data.size()},
           {"initial_loss", model.loss_history().front()},
           {"final_loss", model.loss_history().back()}});
    return 0;
}

int cmd_train_nrg(const Globals& g, int epochs, double lr) {
    auto cfg = load_config(g);
    if (epochs > 0) cfg.nrg_train.epochs = epochs;
    if (lr > 0) cfg.nrg_train.learning_rate = lr;
    const auto t0 = std::chrono::steady_clock::now();
    auto f = svc::load_foundation(cfg);
    const auto records = svc::paired_records(cfg, f, nullptr);
    auto [train_recs, held_recs] = svc::split_heldout(records);
    const auto vocab = svc::nrg_vocab(train_recs);
    const auto train = svc::nrg_examples(train_recs, vocab);
    const auto held = svc::nrg_examples(held_recs, vocab);
    auto model = sb::nrg::NrgModel::random(vocab, cfg.hidden_dim, f.schema.dim(), cfg.seed);
    sb::nrg::NrgTrainReport report;
    sb::nrg::train(model, train, cfg.nrg_train, &report);
    model.save(cfg.path("nrg_model"));
    print({{"train_examples", train.size()},
           {"heldout_examples", held.size()},
           {"vocab", vocab.size()},
           {"epoch_nll", report.epoch_nll},
           {"train_perplexity", sb::nrg::perplexity(model, train)},
           {"heldout_perplexity", held.empty() ? sb::json(nullptr) : sb::json(sb::nrg::perplexity(model, held))},
           {"seconds", seconds_since(t0)}});
    return 0;
}

int cmd_eval(const Globals& g, const std::string& what, const std::string& input) {
    const auto cfg = load_config(g);
    if (what == "perplexity") {
        auto path = cfg.existing("nrg_model");
        if (!path) throw sb::DataError("no neural model at " + cfg.path("nrg_model").string());
        const auto model = sb::nrg::NrgModel::load(*path);
        auto f = svc::load_foundation(cfg);
        const auto records = svc::paired_records(cfg, f, nullptr);
        const auto held = svc::nrg_examples(svc::split_heldout(records).second, model.vocab());
        auto uncond = model;
        uncond.set_empathy_conditioned(false);
        print({{"heldout_examples", held.size()},
               {"perplexity", sb::nrg::perplexity(model, held)},
               {"perplexity_constant_v", sb::nrg::perplexity(uncond, held)}});
    } else if (what == "coverage") {
        const auto res = svc::Resources::load(cfg);
        const auto set = svc::load_coverage_set(input.empty() ? cfg.data_dir / "eval/coverage.jsonl" : std::filesystem::path(input));
        sb::json out = sb::json::array();
        for (const std::vector<std::string>& gens :
             {std::vector<std::string>{"paired"}, std::vector<std::string>{"paired", "unpaired"},
              std::vector<std::string>{"paired", "unpaired", "neural"}}) {
            out.push_back(svc::response_coverage(*res, gens, set, svc::keyword_judge).to_json());
        }
        print(out);
    } else if (what == "cps") {
        const auto path = input.empty() ? cfg.path("session_log") : std::filesystem::path(input);
        std::map<std::string, svc::SessionLog> sessions;
        std::vector<std::string> order;
        for (const auto& j : sb::load_jsonl(path)) {
            auto line = svc::TurnLogLine::from_json(j);
            auto [it, fresh] = sessions.try_emplace(line.session_id);
            if (fresh) {
                order.push_back(line.session_id);
                it->second.session_id = line.session_id;
                it->second.started_ms = line.ts_ms;
            }
            it->second.turns.push_back(std::move(line));
        }
        std::vector<svc::SessionLog> logs;
        for (const auto& id : order) logs.push_back(sessions.at(id));
        print(svc::compute_metrics(logs).to_json());
    } else {
        throw std::invalid_argument("eval: unknown measure " + what);
    }
    return 0;
}

int cmd_simulate(const Globals& g, const std::string& script_path, std::size_t sessions, const std::string& compare,
                 const std::string& dump) {
    const auto cfg = load_config(g);
    const auto script = svc::UserScript::load(script_path.empty() ? cfg.data_dir / "eval/simulation.json"
                                                                  : std::filesystem::path(script_path));
    const std::size_t n = sessions > 0 ? sessions : script.users;
    const auto res = svc::Resources::load(cfg);
    if (!compare.empty()) {
        auto other = svc::EngineConfig::load(compare, g.data_dir);
        if (g.seed) other.seed = *g.seed;
        print(svc::compare_configs(res, svc::Resources::load(other), script, n, cfg.seed).to_json());
        return 0;
    }
    const auto logs = svc::simulate_sessions(res, script, n, cfg.seed);
    if (!dump.empty()) {
        std::string buf;
        for (const auto& l : logs) {
            for (const auto& t : l.turns) buf += t.to_json().dump() + "\n";
        }
        sb::write_text_file(dump, buf);
    }
    auto report = svc::compute_metrics(logs).to_json();
    std::size_t timeouts = 0;
    for (const auto& l : logs) timeouts += l.close_reason == svc::CloseReason::Timeout;
    report["timeouts"] = timeouts;
    print(report);
    return 0;
}

int cmd_chat(const Globals& g, bool show_trace) {
    const auto cfg = load_config(g);
    const auto res = svc::Resources::load(cfg);
    for (const auto& n : res->notes) std::cerr << "note: " << n << "\n";
    svc::Engine engine(res, std::make_shared<sb::SystemClock>());
    if (!cfg.path("session_log").empty()) engine.set_log_file(cfg.path("session_log"));
    std::string sid = engine.create_session({"console", std::nullopt});
    std::cout << "Type a message; /trace shows the last turn, /new starts over, /quit exits.\n";
    std::string line;
    std::optional<std::size_t> last;
    while (std::cout << "> " << std::flush, std::getline(std::cin, line)) {
        const std::string cmd = sb::text::trim(line);
        if (cmd.empty()) continue;
        if (cmd == "/quit") break;
        if (cmd == "/new") {
            engine.close_session(sid);
            sid = engine.create_session({"console", std::nullopt});
            last.reset();
            continue;
        }
        if (cmd == "/trace") {
            if (last) print(*engine.get_trace(sid, *last));
            continue;
        }
        const auto reply = engine.chat_turn(sid, cmd);
        std::cout << res->bot.name << ": " << reply.response << "\n";
        if (reply.closed) {
            sid = engine.create_session({"console", std::nullopt});
            last.reset();
            continue;
        }
        last = reply.turn;
        if (show_trace) {
            const auto tr = engine.get_trace(sid, *last);
            std::cout << "  qc: " << tr->at("qc").get<std::string>()
                      << "  source: " << tr->at("selected_source").get<std::string>() << "\n";
        }
    }
    return 0;
}

svc::HttpServer* g_server = nullptr;

int cmd_serve(const Globals& g, const std::string& host, int port, const std::string& static_dir) {
    const auto cfg = load_config(g);
    const auto res = svc::Resources::load(cfg);
    for (const auto& n : res->notes) std::cerr << "note: " << n << "\n";
    svc::Engine engine(res, std::make_shared<sb::SystemClock>());
    if (!cfg.path("session_log").empty()) engine.set_log_file(cfg.path("session_log"));
    svc::HttpServer server(engine);
    if (!static_dir.empty()) server.mount_static(static_dir);
    const int bound = server.bind(host, port);
    if (bound < 0) {
        std::cerr << "cannot bind " << host << ":" << port << "\n";
        return 1;
    }
    std::cerr << "listening on http://" << host << ":" << bound << "\n";
    g_server = &server;
    std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_server) g_server->stop();
    });
    server.listen();
    g_server = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Open-domain social chat engine"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config, "Engine config JSON")->check(CLI::ExistingFile);
    app.add_option("--data-dir", g.data_dir, "Override the data directory");
    auto* seed_opt = app.add_option("--seed", seed, "Override the engine seed");

    std::string kind;
    std::string input;
    auto* ingest = app.add_subcommand("ingest", "Validate, filter and store a corpus file");
    ingest->add_option("--kind", kind, "paired | unpaired | triples | topics | lexicons")->required();
    ingest->add_option("--input", input, "Input file")->required()->check(CLI::ExistingFile);

    app.add_subcommand("build-index", "Build the paired and unpaired keyword indexes");
    app.add_subcommand("build-kg", "Build the knowledge graph from triples and conversations");
    app.add_subcommand("train-encoder", "Train the dual encoder on stored pairs");

    std::string labels;
    int rounds = 100;
    int depth = 3;
    double lr = 0.1;
    std::size_t max_queries = 200;
    auto* ranker = app.add_subcommand("train-ranker", "Train the candidate ranker");
    ranker->add_option("--labels", labels, "Labelled examples JSONL (default: self-labelled from the store)");
    ranker->add_option("--rounds", rounds);
    ranker->add_option("--depth", depth);
    ranker->add_option("--learning-rate", lr);
    ranker->add_option("--max-queries", max_queries);

    int epochs = 0;
    double nrg_lr = 0.0;
    auto* nrg = app.add_subcommand("train-nrg", "Train the neural response generator");
    nrg->add_option("--epochs", epochs);
    nrg->add_option("--learning-rate", nrg_lr);

    std::string what;
    std::string eval_input;
    auto* eval = app.add_subcommand("eval", "Evaluate perplexity, coverage or CPS");
    eval->add_option("what", what, "perplexity | coverage | cps")->required();
    eval->add_option("--input", eval_input, "Coverage set or session log");

    std::string script;
    std::size_t sessions = 0;
    std::string compare;
    std::string dump;
    auto* sim = app.add_subcommand("simulate", "Run scripted users against the engine");
    sim->add_option("--script", script, "User script JSON");
    sim->add_option("--sessions", sessions, "Number of sessions (default from script)");
    sim->add_option("--compare", compare, "Second engine config for an A/B comparison");
    sim->add_option("--dump", dump, "Write the simulated session log here");

    bool show_trace = false;
    auto* chat = app.add_subcommand("chat", "Interactive terminal chat");
    chat->add_flag("--show-trace", show_trace, "Print qc and source after each reply");

    std::string host = "127.0.0.1";
    int port = 8080;
    std::string static_dir;
    auto* serve = app.add_subcommand("serve", "Serve the HTTP JSON API");
    serve->add_option("--host", host);
    serve->add_option("--port", port);
    serve->add_option("--static-dir", static_dir, "Directory of console assets served at /");

    CLI11_PARSE(app, argc, argv);
    if (*seed_opt) g.seed = seed;

    try {
        if (*ingest) return cmd_ingest(g, kind, input);
        if (app.got_subcommand("build-index")) return cmd_build_index(g);
        if (app.got_subcommand("build-kg")) return cmd_build_kg(g);
        if (app.got_subcommand("train-encoder")) return cmd_train_encoder(g);
        if (*ranker) return cmd_train_ranker(g, labels, rounds, depth, lr, max_queries);
        if (*nrg) return cmd_train_nrg(g, epochs, nrg_lr);
        if (*eval) return cmd_eval(g, what, eval_input);
        if (*sim) return cmd_simulate(g, script, sessions, compare, dump);
        if (*chat) return cmd_chat(g, show_trace);
        if (*serve) return cmd_serve(g, host, port, static_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
