#include "support/api_equivalence.hpp"

#include <httplib.h>

#include <cstdlib>
#include <map>

#include "episodic/calendar.hpp"
#include "episodic/error.hpp"
#include "episodic/service.hpp"
#include "support/test_support.hpp"

namespace episodic::testing {

namespace {

struct LibraryStore {
  const MemoryStore* store = nullptr;
  std::string kind;
};

struct LibrarySession {
  ChatSession session;
  const MemoryStore* store = nullptr;
  std::string store_id;
};

nlohmann::json normalized(const nlohmann::json& j) { return nlohmann::json::parse(j.dump()); }

nlohmann::json summary(const std::string& id, const LibraryStore& s) {
  return {{"store_id", id},
          {"kind", s.kind},
          {"size", s.store->size()},
          {"dimension", s.store->dimension()},
          {"k", s.store->k()},
          {"created_at", s.store->metadata().created_at},
          {"source", s.store->metadata().source}};
}

nlohmann::json context_body(const ContextPrompt& c) {
  nlohmann::json sections = nlohmann::json::array();
  for (auto header : {kCharacterHeader, kInstructionsHeader, kScenesHeader, kRawValuesHeader}) {
    if (c.request.system_text.find(header) != std::string::npos) sections.push_back(header);
  }
  return {{"sections", sections},
          {"scene_ids", c.scene_ids},
          {"history_turns", c.history_turns},
          {"sizes",
           {{"character", c.sizes.character},
            {"instructions", c.sizes.instructions},
            {"scenes", c.sizes.scenes},
            {"raw_values", c.sizes.raw_values},
            {"history", c.sizes.history},
            {"query", c.sizes.query},
            {"total", c.sizes.total}}}};
}

std::string substitute(std::string path, const std::map<std::string, std::string>& names) {
  for (const auto& [name, value] : names) {
    const std::string key = "{" + name + "}";
    for (auto pos = path.find(key); pos != std::string::npos; pos = path.find(key)) path.replace(pos, key.size(), value);
  }
  return path;
}

class Transport {
 public:
  Transport(Service& service, bool over_http) : service_(service) {
    if (over_http) {
      port_ = service_.start("127.0.0.1", 0);
      client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    }
  }
  ~Transport() {
    if (client_) service_.stop();
  }

  ServiceResponse send(const std::string& method, const std::string& path, const std::string& body) {
    if (!client_) return service_.handle({method, path, body, ""});
    auto res = method == "GET" ? client_->Get(path) : client_->Post(path, body, "application/json");
    if (!res) return {-1, {{"transport_error", httplib::to_string(res.error())}}};
    return {res->status, nlohmann::json::parse(res->body, nullptr, false)};
  }

 private:
  Service& service_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> client_;
};

}  // namespace

std::vector<ApiCheck> run_api_fixtures(const std::filesystem::path& fixture_file, bool over_http) {
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  const auto doc = nlohmann::json::parse(read_text(fixture_file));
  const auto replies = doc["llm_replies"].get<std::vector<std::string>>();
  const auto& fx = fixture_stores();

  auto service_llm = ScriptedStub::queue(replies);
  auto library_llm = ScriptedStub::queue(replies);
  TrigramEmbedder service_embed;
  TrigramEmbedder library_embed;

  ServiceConfig config;
  config.default_profile = fixture_profile();
  Service service(config, service_llm, service_embed);
  service.add_store("fixture", fx.augmented, "augmented");
  service.add_store("fixture-raw", fx.raw, "raw");
  Transport transport(service, over_http);

  std::map<std::string, LibraryStore> stores = {{"fixture", {&fx.augmented, "augmented"}},
                                                {"fixture-raw", {&fx.raw, "raw"}}};
  std::vector<std::unique_ptr<MemoryStore>> created;
  std::map<std::string, LibrarySession> sessions;
  std::map<std::string, std::string> names;
  std::vector<ApiCheck> checks;

  for (const auto& req : doc["requests"]) {
    ApiCheck check;
    check.name = req["name"].get<std::string>();
    const auto path = substitute(req["path"].get<std::string>(), names);
    const std::string body = req.contains("body") ? req["body"].dump() : "";
    const auto response = transport.send(req["method"].get<std::string>(), path, body);
    const auto& lib = req["library"];
    const std::string call = lib["call"].get<std::string>();

    nlohmann::json expected;
    bool shape_only = false;
    try {
      if (call == "store_summary") {
        const auto id = lib["store"].get<std::string>();
        expected = summary(id, stores.at(id));
      } else if (call == "record") {
        const auto& s = *stores.at(lib["store"].get<std::string>()).store;
        expected = record_to_json(s.record(*s.find(lib["record_id"].get<std::string>())));
      } else if (call == "retrieve") {
        auto params = params_from_json(lib["params"], config.default_params);
        params.validate();
        expected = to_json(retrieve(lib["query"].get<std::string>(), *stores.at(lib["store"].get<std::string>()).store,
                                    params, library_embed));
      } else if (call == "create_store") {
        const auto segments = parse_corpus(lib["corpus"].get<std::string>(), "corpus");
        const StoreMetadata metadata{creation_timestamp(), lib["source"].get<std::string>()};
        const auto kind = lib["kind"].get<std::string>();
        MemoryStore built;
        if (kind == "raw") {
          built = ingest_raw(segments, library_embed, config.pipeline.k, metadata);
        } else {
          PipelineConfig pipeline = config.pipeline;
          pipeline.metadata = metadata;
          built = run_pipeline(segments, library_llm, library_embed, pipeline).store;
        }
        created.push_back(std::make_unique<MemoryStore>(std::move(built)));
        const auto id = lib["id"].get<std::string>();
        stores[id] = {created.back().get(), kind};
        expected = summary(id, stores[id]);
      } else if (call == "error") {
        shape_only = true;
        expected = {{"error_code", lib["error_code"]}};
      } else if (call == "create_session") {
        const auto name = lib["session"].get<std::string>();
        const auto& request_body = req["body"];
        LibrarySession s;
        s.session.id = response.body.value("session_id", std::string());
        s.session.mode = *parse_mode(request_body["mode"].get<std::string>());
        s.session.profile = config.default_profile;
        s.session.params = config.default_params;
        if (lib.contains("store")) {
          s.store_id = lib["store"].get<std::string>();
          s.store = stores.at(s.store_id).store;
        }
        expected = {{"session_id", s.session.id},
                    {"mode", mode_name(s.session.mode)},
                    {"store_id", s.store_id.empty() ? nlohmann::json(nullptr) : nlohmann::json(s.store_id)},
                    {"profile", to_json(s.session.profile)},
                    {"params", to_json(s.session.params)}};
        names[name] = s.session.id;
        sessions[name] = std::move(s);
      } else if (call == "message") {
        auto& s = sessions.at(lib["session"].get<std::string>());
        auto working = s.session;
        const auto result = answer(working, lib["text"].get<std::string>(), s.store, library_llm, library_embed);
        s.session = std::move(working);
        expected = {{"session_id", s.session.id},
                    {"text", result.text},
                    {"explanation", result.explanation ? to_json(*result.explanation) : nlohmann::json(nullptr)},
                    {"context", context_body(result.context)}};
      } else if (call == "explain") {
        expected = to_json(explain_last(sessions.at(lib["session"].get<std::string>()).session));
      } else {
        check.detail = "unknown library call " + call;
      }
    } catch (const Error& e) {
      expected = error_body(e);
    }

    const int want_status = req["status"].get<int>();
    if (!check.detail.empty()) {
      // already failed
    } else if (response.status != want_status) {
      check.detail = "status " + std::to_string(response.status) + " != " + std::to_string(want_status) + ": " +
                     response.body.dump();
    } else if (shape_only) {
      const bool shape = response.body.is_object() && response.body.size() == 3 && response.body.contains("message") &&
                         response.body.contains("details") && response.body["error_code"] == expected["error_code"];
      if (!shape) check.detail = "error body " + response.body.dump();
    } else if (normalized(response.body) != normalized(expected)) {
      check.detail = "body differs from library result:\n  service: " + response.body.dump().substr(0, 400) +
                     "\n  library: " + expected.dump().substr(0, 400);
    }
    check.ok = check.detail.empty();
    checks.push_back(std::move(check));
  }
  ::unsetenv("SOURCE_DATE_EPOCH");
  return checks;
}

}  // namespace episodic::testing
