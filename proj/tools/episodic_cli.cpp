// episodic: augment corpora, query stores, chat with a persona, run the
// mode comparison, serve the HTTP API.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "episodic/augmentation.hpp"
#include "episodic/calendar.hpp"
#include "episodic/error.hpp"
#include "episodic/eval.hpp"
#include "episodic/persona.hpp"
#include "episodic/service.hpp"

using namespace episodic;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitInternal = 2;

struct ProviderOptions {
  std::string stub;
  std::string llm_endpoint;
  std::string llm_model;
  std::size_t llm_parallel = 4;
  std::string embedder = "trigram";
  std::string embed_endpoint;
  std::string embed_model;
  std::size_t dimension = 256;
};

struct RetrievalOptions {
  std::size_t max_entries = 5;
  double threshold = 0.2;
  std::string expansion = "full_scan";
  bool no_emotional = false;
  bool no_spatial = false;
  bool no_temporal = false;
  bool relevance = false;
  bool cosine_only = false;

  RetrievalParams params() const {
    RetrievalParams p;
    p.max_entries = max_entries;
    p.similarity_threshold = threshold;
    const auto e = parse_expansion(expansion);
    if (!e) throw Error(ErrorCode::kInvalidArgument, "unknown expansion '" + expansion + "'");
    p.expansion = *e;
    p.factors = {!no_emotional, !no_spatial, !no_temporal, relevance};
    if (cosine_only) p.factors = FactorToggles::cosine_only();
    p.validate();
    return p;
  }
};

void add_llm_options(CLI::App* cmd, ProviderOptions& o) {
  cmd->add_option("--stub", o.stub, "Scripted LLM responses (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--llm-endpoint", o.llm_endpoint, "OpenAI-compatible chat completions URL");
  cmd->add_option("--llm-model", o.llm_model, "Remote model name");
  cmd->add_option("--llm-parallel", o.llm_parallel, "Concurrent remote LLM calls")->check(CLI::PositiveNumber);
}

void add_embed_options(CLI::App* cmd, ProviderOptions& o) {
  cmd->add_option("--embedder", o.embedder, "trigram or remote")->check(CLI::IsMember({"trigram", "remote"}));
  cmd->add_option("--embed-endpoint", o.embed_endpoint, "OpenAI-compatible embeddings URL");
  cmd->add_option("--embed-model", o.embed_model, "Remote embedding model");
  cmd->add_option("--dimension", o.dimension, "Embedding dimension")->check(CLI::PositiveNumber);
}

void add_retrieval_options(CLI::App* cmd, RetrievalOptions& o) {
  cmd->add_option("--max-entries", o.max_entries, "Maximum scenes returned");
  cmd->add_option("--threshold", o.threshold, "Entry-point cosine threshold");
  cmd->add_option("--expansion", o.expansion, "full_scan or graph_1hop");
  cmd->add_flag("--no-emotional", o.no_emotional, "Disable the emotional factor");
  cmd->add_flag("--no-spatial", o.no_spatial, "Disable the spatial factor");
  cmd->add_flag("--no-temporal", o.no_temporal, "Disable the temporal factor");
  cmd->add_flag("--relevance", o.relevance, "Multiply in the relevance score");
  cmd->add_flag("--cosine-only", o.cosine_only, "Rank by cosine alone");
}

std::unique_ptr<LlmProvider> make_llm(const ProviderOptions& o) {
  if (!o.stub.empty()) return std::make_unique<ScriptedStub>(ScriptedStub::load(o.stub));
  if (!o.llm_endpoint.empty()) {
    RemoteLlmConfig c;
    c.endpoint = o.llm_endpoint;
    c.model = o.llm_model;
    c.max_in_flight = o.llm_parallel;
    return std::make_unique<RemoteLlm>(c);
  }
  throw Error(ErrorCode::kInvalidArgument, "no LLM configured: pass --stub or --llm-endpoint");
}

std::shared_ptr<EmbeddingProvider> make_embedder(const ProviderOptions& o) {
  if (o.embedder == "remote") {
    RemoteEmbedderConfig c;
    c.endpoint = o.embed_endpoint;
    c.model = o.embed_model;
    c.dimension = o.dimension;
    return std::make_shared<MemoizingEmbedder>(std::make_shared<RemoteEmbedder>(c));
  }
  return std::make_shared<TrigramEmbedder>(o.dimension);
}

PersonaProfile default_profile() {
  PersonaProfile p;
  p.name = "Vincent van Gogh";
  p.character_description =
      "A Dutch painter (1853-1890), speaking in the first person about his own life, work and relationships.";
  p.task_instructions =
      "Answer the interviewer in character. Ground your answer in the retrieved scenes when they are given; "
      "do not invent events that contradict them.";
  return p;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path, {{"path", path}});
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path, {{"path", path}});
  out << text;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void print_explanation(const RetrievalExplanation& e) {
  if (e.no_entry_point) {
    std::cout << "no record reached similarity " << fixed(e.params.similarity_threshold, 2) << "\n";
    return;
  }
  std::cout << "entry point: " << e.entry_point_id << "\n";
  std::cout << "rank  id                              cosine  emot    spat    temp    compound\n";
  for (const auto& c : e.candidates) {
    char line[256];
    std::snprintf(line, sizeof line, "%-5zu %-31s %-7s %-7s %-7s %-7s %s\n", c.rank, c.record_id.c_str(),
                  fixed(c.cosine).c_str(), fixed(c.emotional_factor).c_str(), fixed(c.spatial_factor).c_str(),
                  fixed(c.temporal_factor).c_str(), fixed(c.compound_score).c_str());
    std::cout << line;
  }
}

StoreMetadata metadata_for(const std::string& corpus_path) {
  return {creation_timestamp(), std::filesystem::path(corpus_path).filename().string()};
}

// Subcommand state.
struct Options {
  bool json = false;
  ProviderOptions providers;
  RetrievalOptions retrieval;
  std::string corpus;
  std::string out;
  std::string store;
  std::string raw_store;
  std::string text;
  std::string provenance;
  std::string prompts;
  std::string gazetteer;
  std::string persona = "Vincent van Gogh";
  std::size_t k = kDefaultNeighborCount;
  std::string mode = "autonoesis_ranked_data";
  std::string profile;
  std::string transcript;
  std::string queries;
  std::string mode_matrix = "all";
  std::string format = "markdown";
  bool timings = false;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string store_dir;
  std::string config;
  std::string token;
};

int run_augment(const Options& o) {
  const auto segments = load_corpus(o.corpus);
  if (segments.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus " + o.corpus + " has no segments");
  auto llm = make_llm(o.providers);
  auto embed = make_embedder(o.providers);
  PipelineConfig config;
  config.persona_name = o.persona;
  config.k = o.k;
  config.metadata = metadata_for(o.corpus);
  if (!o.prompts.empty()) config.prompts = PromptSet::load(o.prompts);
  if (!o.gazetteer.empty()) config.gazetteer = Gazetteer::load(o.gazetteer);
  const auto result = run_pipeline(segments, *llm, *embed, config);
  save_store(result.store, o.out);
  if (!o.provenance.empty()) write_file(o.provenance, provenance_to_jsonl(result.provenance));
  if (o.json) {
    json failures = json::array();
    for (const auto& f : result.failures) failures.push_back({{"stage", f.stage}, {"id", f.item_id}, {"error", f.error}});
    std::cout << json{{"store", o.out}, {"records", result.store.size()}, {"failures", failures}}.dump(2) << "\n";
  } else {
    std::cout << "wrote " << result.store.size() << " records to " << o.out << "\n";
    for (const auto& f : result.failures) {
      std::cout << "  failed " << f.stage << " " << f.item_id << ": " << f.error["message"].get<std::string>() << "\n";
    }
  }
  return kExitOk;
}

int run_ingest_raw(const Options& o) {
  const auto segments = load_corpus(o.corpus);
  auto embed = make_embedder(o.providers);
  const auto store = ingest_raw(segments, *embed, o.k, metadata_for(o.corpus));
  save_store(store, o.out);
  if (o.json) {
    std::cout << json{{"store", o.out}, {"records", store.size()}}.dump(2) << "\n";
  } else {
    std::cout << "wrote " << store.size() << " records to " << o.out << "\n";
  }
  return kExitOk;
}

int run_query(const Options& o) {
  const auto store = load_store(o.store);
  auto embed = make_embedder(o.providers);
  const auto explanation = retrieve(o.text, store, o.retrieval.params(), *embed);
  if (o.json) {
    std::cout << to_json(explanation).dump(2) << "\n";
  } else {
    print_explanation(explanation);
  }
  return kExitOk;
}

int run_chat(const Options& o) {
  const auto mode = parse_mode(o.mode);
  if (!mode) throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + o.mode + "'");
  std::optional<MemoryStore> store;
  if (*mode != PersonaMode::kBaseline) {
    if (o.store.empty()) throw Error(ErrorCode::kInvalidArgument, "mode " + o.mode + " needs --store");
    store = load_store(o.store);
  }
  auto llm = make_llm(o.providers);
  auto embed = make_embedder(o.providers);
  ChatSession session{"cli", o.profile.empty() ? default_profile() : load_profile(o.profile), *mode,
                      o.retrieval.params(), {}};
  session.profile.validate();
  if (!o.json) std::cerr << "chatting as " << session.profile.name << " (" << o.mode << "); /explain, /quit\n";

  std::string line;
  while (true) {
    if (!o.json) std::cerr << "> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    if (line == "/quit") break;
    if (line.empty()) continue;
    try {
      if (line == "/explain") {
        const auto& e = explain_last(session);
        if (o.json) {
          std::cout << to_json(e).dump() << "\n";
        } else {
          print_explanation(e);
        }
        continue;
      }
      const auto result = answer(session, line, store ? &*store : nullptr, *llm, *embed);
      if (o.json) {
        std::cout << json{{"text", result.text},
                          {"explanation", result.explanation ? to_json(*result.explanation) : json(nullptr)}}
                         .dump()
                  << "\n";
      } else {
        std::cout << result.text << "\n";
      }
    } catch (const Error& e) {
      if (o.json) {
        std::cout << e.to_json().dump() << "\n";
      } else {
        std::cerr << error_code_name(e.code()) << ": " << e.what() << "\n";
      }
    }
  }
  if (!o.transcript.empty()) write_file(o.transcript, transcript_to_json(session).dump(2) + "\n");
  return kExitOk;
}

std::vector<PersonaMode> parse_mode_matrix(const std::string& text) {
  if (text == "all") return {std::begin(kAllModes), std::end(kAllModes)};
  std::vector<PersonaMode> modes;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto m = parse_mode(item);
    if (!m) throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + item + "' in --mode-matrix");
    modes.push_back(*m);
  }
  if (modes.empty()) throw Error(ErrorCode::kInvalidArgument, "--mode-matrix lists no modes");
  return modes;
}

int run_eval(const Options& o) {
  const auto queries = load_queries(o.queries);
  const auto modes = parse_mode_matrix(o.mode_matrix);
  const auto format = parse_report_format(o.format);
  if (!format) throw Error(ErrorCode::kInvalidArgument, "unknown report format '" + o.format + "'");
  std::optional<MemoryStore> raw;
  std::optional<MemoryStore> augmented;
  if (!o.raw_store.empty()) raw = load_store(o.raw_store);
  if (!o.store.empty()) augmented = load_store(o.store);
  auto llm = make_llm(o.providers);
  auto embed = make_embedder(o.providers);
  const auto profile = o.profile.empty() ? default_profile() : load_profile(o.profile);
  const auto report = run_comparison(queries, {raw ? &*raw : nullptr, augmented ? &*augmented : nullptr}, *llm,
                                     *embed, profile, o.retrieval.params(), modes);
  const auto text = emit_report(report, o.json ? ReportFormat::kJson : *format, {o.timings});
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file(o.out, text);
    if (!o.json) std::cout << "wrote " << report.rows.size() << " rows to " << o.out << "\n";
  }
  return kExitOk;
}

int run_serve(Options o) {
  json config = json::object();
  if (!o.config.empty()) {
    config = json::parse(read_file(o.config), nullptr, false);
    if (config.is_discarded() || !config.is_object()) {
      throw Error(ErrorCode::kInvalidArgument, "config " + o.config + " is not a JSON object");
    }
  }
  ServiceConfig service;
  service.default_profile = default_profile();
  if (config.contains("profile")) service.default_profile = profile_from_json(config["profile"]);
  if (config.contains("params")) service.default_params = params_from_json(config["params"]);
  if (config.contains("bearer_token")) service.bearer_token = config["bearer_token"].get<std::string>();
  if (const char* token = std::getenv("EPISODIC_SERVICE_TOKEN"); token && *token) service.bearer_token = token;
  if (!o.token.empty()) service.bearer_token = o.token;
  if (config.contains("store_dir") && o.store_dir.empty()) o.store_dir = config["store_dir"].get<std::string>();
  service.store_dir = o.store_dir;
  if (config.contains("host")) o.host = config["host"].get<std::string>();
  if (config.contains("port") && o.port == 8080) o.port = config["port"].get<int>();
  if (config.contains("llm")) {
    const auto& l = config["llm"];
    if (l.contains("stub")) o.providers.stub = l["stub"].get<std::string>();
    if (l.contains("endpoint")) o.providers.llm_endpoint = l["endpoint"].get<std::string>();
    if (l.contains("model")) o.providers.llm_model = l["model"].get<std::string>();
    if (l.contains("max_in_flight")) o.providers.llm_parallel = l["max_in_flight"].get<std::size_t>();
  }
  if (config.contains("embedder")) {
    const auto& e = config["embedder"];
    if (e.contains("kind")) o.providers.embedder = e["kind"].get<std::string>();
    if (e.contains("endpoint")) o.providers.embed_endpoint = e["endpoint"].get<std::string>();
    if (e.contains("model")) o.providers.embed_model = e["model"].get<std::string>();
    if (e.contains("dimension")) o.providers.dimension = e["dimension"].get<std::size_t>();
  }
  if (config.contains("pipeline")) {
    const auto& p = config["pipeline"];
    if (p.contains("k")) service.pipeline.k = p["k"].get<std::size_t>();
    if (p.contains("persona_name")) service.pipeline.persona_name = p["persona_name"].get<std::string>();
  }
  auto llm = make_llm(o.providers);
  auto embed = make_embedder(o.providers);
  Service server(service, *llm, *embed);
  std::cerr << "listening on " << o.host << ":" << o.port << "\n";
  server.listen(o.host, o.port);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Episodic-memory persona toolkit"};
  app.require_subcommand(1);
  Options o;

  auto* augment = app.add_subcommand("augment", "Augment a biography corpus into a memory store");
  augment->add_option("--corpus", o.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  augment->add_option("--out", o.out, "Store file to write")->required();
  augment->add_option("--provenance", o.provenance, "Provenance JSONL to write");
  augment->add_option("--prompts", o.prompts, "Directory overriding the built-in prompts");
  augment->add_option("--gazetteer", o.gazetteer, "Place -> coordinates JSON");
  augment->add_option("--persona", o.persona, "Person the biography is about");
  augment->add_option("--k", o.k, "Neighbors per record")->check(CLI::PositiveNumber);
  add_llm_options(augment, o.providers);
  add_embed_options(augment, o.providers);

  auto* raw = app.add_subcommand("ingest-raw", "Embed corpus segments directly into a store");
  raw->add_option("--corpus", o.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  raw->add_option("--out", o.out, "Store file to write")->required();
  raw->add_option("--k", o.k, "Neighbors per record")->check(CLI::PositiveNumber);
  add_embed_options(raw, o.providers);

  auto* query = app.add_subcommand("query", "Retrieve ranked memories for a query");
  query->add_option("--store", o.store, "Store file")->required()->check(CLI::ExistingFile);
  query->add_option("--text", o.text, "Query text")->required();
  add_retrieval_options(query, o.retrieval);
  add_embed_options(query, o.providers);

  auto* chat = app.add_subcommand("chat", "Interview the persona from the terminal");
  chat->add_option("--mode", o.mode, "baseline, traditional_rag, autonoesis or autonoesis_ranked_data");
  chat->add_option("--store", o.store, "Store file (raw store for traditional_rag)")->check(CLI::ExistingFile);
  chat->add_option("--profile", o.profile, "Persona profile JSON")->check(CLI::ExistingFile);
  chat->add_option("--transcript", o.transcript, "Write the session transcript here on exit");
  add_retrieval_options(chat, o.retrieval);
  add_llm_options(chat, o.providers);
  add_embed_options(chat, o.providers);

  auto* eval = app.add_subcommand("eval", "Compare the persona modes over a query set");
  eval->add_option("--queries", o.queries, "One query per line")->required()->check(CLI::ExistingFile);
  eval->add_option("--store", o.store, "Augmented store")->check(CLI::ExistingFile);
  eval->add_option("--raw-store", o.raw_store, "Raw store")->check(CLI::ExistingFile);
  eval->add_option("--profile", o.profile, "Persona profile JSON")->check(CLI::ExistingFile);
  eval->add_option("--mode-matrix", o.mode_matrix, "all, or a comma-separated list of modes");
  eval->add_option("--format", o.format, "markdown or json");
  eval->add_option("--out", o.out, "Report file (stdout when absent)");
  eval->add_flag("--timings", o.timings, "Include retrieval latency in the report");
  add_retrieval_options(eval, o.retrieval);
  add_llm_options(eval, o.providers);
  add_embed_options(eval, o.providers);

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--port", o.port, "TCP port");
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("--store-dir", o.store_dir, "Directory of persisted stores");
  serve->add_option("--config", o.config, "Service config JSON")->check(CLI::ExistingFile);
  serve->add_option("--token", o.token, "Static bearer token");
  add_llm_options(serve, o.providers);
  add_embed_options(serve, o.providers);

  for (auto* cmd : {augment, raw, query, chat, eval, serve}) cmd->add_flag("--json", o.json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUser;
  }

  try {
    if (*augment) return run_augment(o);
    if (*raw) return run_ingest_raw(o);
    if (*query) return run_query(o);
    if (*chat) return run_chat(o);
    if (*eval) return run_eval(o);
    if (*serve) return run_serve(o);
  } catch (const Error& e) {
    if (o.json) {
      std::cerr << e.to_json().dump() << "\n";
    } else {
      std::cerr << error_code_name(e.code()) << ": " << e.what() << "\n";
    }
    const int status = http_status(e.code());
    return status < 500 || e.code() == ErrorCode::kIoFailure ? kExitUser : kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
