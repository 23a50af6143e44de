#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "episodic/augmentation.hpp"
#include "episodic/error.hpp"
#include "episodic/persona.hpp"

namespace httplib {
class Server;
}

namespace episodic {

struct ServiceConfig {
  /// Stores are saved here as <id>.jsonl and reloaded at startup. Empty
  /// keeps everything in memory.
  std::filesystem::path store_dir;
  /// Required as "Authorization: Bearer <token>" when non-empty.
  std::string bearer_token;
  PersonaProfile default_profile;
  RetrievalParams default_params;
  PipelineConfig pipeline;
};

struct ServiceRequest {
  std::string method;
  std::string path;
  std::string body;
  std::string authorization;
};

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

/// HTTP status for an error code.
int http_status(ErrorCode code);

/// Request router over shared immutable stores and per-session state. The
/// providers must outlive the service.
class Service {
 public:
  Service(ServiceConfig config, LlmProvider& llm, EmbeddingProvider& embed);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Transport-independent entry point; the HTTP server forwards here.
  ServiceResponse handle(const ServiceRequest& request);

  /// Registers a store under `id` (replacing nothing: duplicates are errors).
  void add_store(const std::string& id, MemoryStore store, std::string kind);
  std::shared_ptr<const MemoryStore> store(const std::string& id) const;

  /// Binds and serves on a background thread. Port 0 picks a free port;
  /// returns the bound port.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct StoreEntry {
    std::shared_ptr<const MemoryStore> store;
    std::string kind;
  };
  struct SessionSlot {
    std::mutex mutex;  // guards session
    ChatSession session;
    std::shared_ptr<const MemoryStore> store;
    std::string store_id;
    std::atomic<bool> busy{false};
  };
  struct Job {
    std::string status = "running";
    std::string store_id;
    nlohmann::json error;
  };

  ServiceResponse route(const ServiceRequest& request);
  ServiceResponse create_store(const nlohmann::json& body);
  ServiceResponse get_store(const std::string& id) const;
  ServiceResponse get_record(const std::string& id, const std::string& record_id) const;
  ServiceResponse retrieve_from(const std::string& id, const nlohmann::json& body);
  ServiceResponse create_session(const nlohmann::json& body);
  ServiceResponse post_message(const std::string& id, const nlohmann::json& body);
  ServiceResponse get_session(const std::string& id) const;
  ServiceResponse latest_explanation(const std::string& id) const;
  ServiceResponse get_job(const std::string& id) const;

  std::shared_ptr<SessionSlot> session(const std::string& id) const;
  MemoryStore build_store(const nlohmann::json& body, std::string& kind);
  std::string register_store(std::string requested_id, MemoryStore store, std::string kind);
  void install_routes();

  ServiceConfig config_;
  LlmProvider& llm_;
  EmbeddingProvider& embed_;

  mutable std::shared_mutex stores_mutex_;
  std::map<std::string, StoreEntry> stores_;
  std::size_t next_store_ = 1;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<SessionSlot>> sessions_;
  std::size_t next_session_ = 1;

  mutable std::mutex jobs_mutex_;
  std::map<std::string, Job> jobs_;
  std::size_t next_job_ = 1;
  std::vector<std::jthread> workers_;

  std::unique_ptr<httplib::Server> server_;
  std::jthread server_thread_;
};

/// Error body shared by every endpoint.
nlohmann::json error_body(const Error& error);

}  // namespace episodic
