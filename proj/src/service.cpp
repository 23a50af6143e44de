#include "episodic/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <regex>

#include "episodic/calendar.hpp"

namespace episodic {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kNothingToExplain:
      return 404;
    case ErrorCode::kBusy:
    case ErrorCode::kDuplicateId:
      return 409;
    case ErrorCode::kPipelineFailure:
      return 422;
    case ErrorCode::kProviderUnavailable:
    case ErrorCode::kStubExhausted:
    case ErrorCode::kNoJsonFound:
    case ErrorCode::kMissingLabel:
    case ErrorCode::kUnparseable:
      return 502;
    case ErrorCode::kTimeout:
      return 504;
    case ErrorCode::kIoFailure:
      return 500;
    default:
      return 400;
  }
}

nlohmann::json error_body(const Error& error) { return error.to_json(); }

namespace {

ServiceResponse error_response(const Error& e) { return {http_status(e.code()), error_body(e)}; }

[[noreturn]] void not_found(const std::string& what, const std::string& id) {
  throw Error(ErrorCode::kNotFound, what + " '" + id + "' not found", {{what + "_id", id}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  const auto end_of_path = path.find('?');
  const std::string clean = path.substr(0, end_of_path);
  while (start < clean.size()) {
    auto slash = clean.find('/', start);
    if (slash == std::string::npos) slash = clean.size();
    if (slash > start) parts.push_back(clean.substr(start, slash - start));
    start = slash + 1;
  }
  return parts;
}

nlohmann::json parse_body(const std::string& body) {
  if (body.empty()) return nlohmann::json::object();
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  }
  return j;
}

const nlohmann::json* optional_field(const nlohmann::json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string string_field(const nlohmann::json& body, const char* key, bool required = true) {
  const auto* value = optional_field(body, key);
  if (value == nullptr) {
    if (required) throw Error(ErrorCode::kMissingField, std::string("missing field '") + key + "'", {{"field", key}});
    return "";
  }
  if (!value->is_string()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("field '") + key + "' must be a string", {{"field", key}});
  }
  return value->get<std::string>();
}

void check_keys(const nlohmann::json& body, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : body.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown field '" + key + "'", {{"field", key}});
    }
  }
}

nlohmann::json store_summary(const std::string& id, const MemoryStore& store, const std::string& kind) {
  return {{"store_id", id},
          {"kind", kind},
          {"size", store.size()},
          {"dimension", store.dimension()},
          {"k", store.k()},
          {"created_at", store.metadata().created_at},
          {"source", store.metadata().source}};
}

nlohmann::json context_json(const ContextPrompt& context) {
  nlohmann::json sections = nlohmann::json::array();
  for (auto header : {kCharacterHeader, kInstructionsHeader, kScenesHeader, kRawValuesHeader}) {
    if (context.request.system_text.find(header) != std::string::npos) sections.push_back(header);
  }
  const auto& s = context.sizes;
  return {{"sections", std::move(sections)},
          {"scene_ids", context.scene_ids},
          {"history_turns", context.history_turns},
          {"sizes",
           {{"character", s.character},
            {"instructions", s.instructions},
            {"scenes", s.scenes},
            {"raw_values", s.raw_values},
            {"history", s.history},
            {"query", s.query},
            {"total", s.total}}}};
}

bool valid_id(const std::string& id) {
  static const std::regex pattern("[A-Za-z0-9][A-Za-z0-9._-]{0,127}");
  return std::regex_match(id, pattern);
}

}  // namespace

Service::Service(ServiceConfig config, LlmProvider& llm, EmbeddingProvider& embed)
    : config_(std::move(config)), llm_(llm), embed_(embed) {
  config_.default_profile.validate();
  config_.default_params.validate();
  if (config_.store_dir.empty()) return;
  std::filesystem::create_directories(config_.store_dir);
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(config_.store_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    stores_[f.stem().string()] = {std::make_shared<const MemoryStore>(load_store(f)), "loaded"};
  }
}

Service::~Service() {
  stop();
  workers_.clear();
}

void Service::add_store(const std::string& id, MemoryStore store, std::string kind) {
  register_store(id, std::move(store), std::move(kind));
}

std::shared_ptr<const MemoryStore> Service::store(const std::string& id) const {
  std::shared_lock lock(stores_mutex_);
  auto it = stores_.find(id);
  if (it == stores_.end()) not_found("store", id);
  return it->second.store;
}

std::string Service::register_store(std::string requested_id, MemoryStore store, std::string kind) {
  if (!requested_id.empty() && !valid_id(requested_id)) {
    throw Error(ErrorCode::kInvalidArgument, "store id may use letters, digits, '.', '_' and '-' only",
                {{"field", "id"}, {"value", requested_id}});
  }
  auto shared = std::make_shared<const MemoryStore>(std::move(store));
  std::unique_lock lock(stores_mutex_);
  std::string id = requested_id;
  if (id.empty()) {
    do {
      id = "store-" + std::to_string(next_store_++);
    } while (stores_.count(id) > 0);
  } else if (stores_.count(id) > 0) {
    throw Error(ErrorCode::kDuplicateId, "store '" + id + "' already exists", {{"store_id", id}});
  }
  if (!config_.store_dir.empty()) save_store(*shared, config_.store_dir / (id + ".jsonl"));
  stores_[id] = {std::move(shared), std::move(kind)};
  return id;
}

ServiceResponse Service::handle(const ServiceRequest& request) {
  if (!config_.bearer_token.empty() && request.authorization != "Bearer " + config_.bearer_token) {
    return {401,
            {{"error_code", "Unauthorized"}, {"message", "missing or wrong bearer token"}, {"details", nlohmann::json::object()}}};
  }
  try {
    return route(request);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return {500, {{"error_code", "Internal"}, {"message", e.what()}, {"details", nlohmann::json::object()}}};
  }
}

ServiceResponse Service::route(const ServiceRequest& request) {
  const auto parts = split_path(request.path);
  const auto& m = request.method;
  const auto n = parts.size();
  auto is = [&](std::size_t i, const char* s) { return i < n && parts[i] == s; };

  if (is(0, "stores")) {
    if (n == 1 && m == "POST") return create_store(parse_body(request.body));
    if (n == 1 && m == "GET") {
      std::shared_lock lock(stores_mutex_);
      nlohmann::json list = nlohmann::json::array();
      for (const auto& [id, entry] : stores_) list.push_back(store_summary(id, *entry.store, entry.kind));
      return {200, {{"stores", std::move(list)}}};
    }
    if (n == 2 && m == "GET") return get_store(parts[1]);
    if (n == 3 && is(2, "retrieve") && m == "POST") return retrieve_from(parts[1], parse_body(request.body));
    if (n == 4 && is(2, "records") && m == "GET") return get_record(parts[1], parts[3]);
  } else if (is(0, "sessions")) {
    if (n == 1 && m == "POST") return create_session(parse_body(request.body));
    if (n == 2 && m == "GET") return get_session(parts[1]);
    if (n == 3 && is(2, "messages") && m == "POST") return post_message(parts[1], parse_body(request.body));
    if (n == 4 && is(2, "explanations") && is(3, "latest") && m == "GET") return latest_explanation(parts[1]);
  } else if (is(0, "jobs")) {
    if (n == 2 && m == "GET") return get_job(parts[1]);
  } else if (n == 1 && is(0, "health") && m == "GET") {
    return {200, {{"status", "ok"}}};
  }
  throw Error(ErrorCode::kNotFound, "no route for " + m + " " + request.path,
              {{"method", m}, {"path", request.path}});
}

MemoryStore Service::build_store(const nlohmann::json& body, std::string& kind) {
  kind = body.contains("kind") ? string_field(body, "kind") : "augmented";
  StoreMetadata metadata{creation_timestamp(), string_field(body, "source", false)};
  if (kind == "store") {
    auto loaded = parse_store(string_field(body, "store"), "store");
    return loaded;
  }
  if (kind != "raw" && kind != "augmented") {
    throw Error(ErrorCode::kInvalidArgument, "kind must be 'raw', 'augmented' or 'store'", {{"field", "kind"}});
  }
  const auto segments = parse_corpus(string_field(body, "corpus"), "corpus");
  if (kind == "raw") return ingest_raw(segments, embed_, config_.pipeline.k, metadata);
  PipelineConfig pipeline = config_.pipeline;
  pipeline.metadata = metadata;
  return run_pipeline(segments, llm_, embed_, pipeline).store;
}

ServiceResponse Service::create_store(const nlohmann::json& body) {
  check_keys(body, {"kind", "corpus", "store", "id", "source", "async"});
  const std::string requested_id = string_field(body, "id", false);
  if (!requested_id.empty() && !valid_id(requested_id)) {
    throw Error(ErrorCode::kInvalidArgument, "store id may use letters, digits, '.', '_' and '-' only",
                {{"field", "id"}, {"value", requested_id}});
  }
  const auto* async = optional_field(body, "async");
  if (async != nullptr && !async->is_boolean()) {
    throw Error(ErrorCode::kInvalidArgument, "field 'async' must be a boolean", {{"field", "async"}});
  }
  if (async == nullptr || !async->get<bool>()) {
    std::string kind;
    auto built = build_store(body, kind);
    const auto id = register_store(requested_id, std::move(built), kind);
    return {201, store_summary(id, *store(id), kind)};
  }

  std::string job_id;
  {
    std::lock_guard lock(jobs_mutex_);
    job_id = "job-" + std::to_string(next_job_++);
    jobs_[job_id] = Job{};
  }
  std::lock_guard lock(jobs_mutex_);
  workers_.emplace_back([this, body, job_id, requested_id] {
    Job done;
    try {
      std::string kind;
      auto built = build_store(body, kind);
      done.store_id = register_store(requested_id, std::move(built), kind);
      done.status = "succeeded";
    } catch (const Error& e) {
      done.status = "failed";
      done.error = e.to_json();
    } catch (const std::exception& e) {
      done.status = "failed";
      done.error = {{"error_code", "Internal"}, {"message", e.what()}, {"details", nlohmann::json::object()}};
    }
    std::lock_guard lock(jobs_mutex_);
    jobs_[job_id] = std::move(done);
  });
  return {202, {{"job_id", job_id}, {"status", "running"}}};
}

ServiceResponse Service::get_job(const std::string& id) const {
  std::lock_guard lock(jobs_mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) not_found("job", id);
  nlohmann::json body = {{"job_id", id}, {"status", it->second.status}};
  if (!it->second.store_id.empty()) body["store_id"] = it->second.store_id;
  if (!it->second.error.is_null()) body["error"] = it->second.error;
  return {200, body};
}

ServiceResponse Service::get_store(const std::string& id) const {
  std::shared_lock lock(stores_mutex_);
  auto it = stores_.find(id);
  if (it == stores_.end()) not_found("store", id);
  return {200, store_summary(id, *it->second.store, it->second.kind)};
}

ServiceResponse Service::get_record(const std::string& id, const std::string& record_id) const {
  const auto s = store(id);
  const auto index = s->find(record_id);
  if (!index) not_found("record", record_id);
  return {200, record_to_json(s->record(*index))};
}

ServiceResponse Service::retrieve_from(const std::string& id, const nlohmann::json& body) {
  check_keys(body, {"query", "params"});
  const auto s = store(id);
  const auto query = string_field(body, "query");
  RetrievalParams params = config_.default_params;
  if (const auto* p = optional_field(body, "params")) params = params_from_json(*p, params);
  params.validate();
  return {200, to_json(retrieve(query, *s, params, embed_))};
}

ServiceResponse Service::create_session(const nlohmann::json& body) {
  check_keys(body, {"mode", "store_id", "profile", "params"});
  const auto mode_text = string_field(body, "mode");
  const auto mode = parse_mode(mode_text);
  if (!mode) {
    throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + mode_text + "'",
                {{"field", "mode"}, {"value", mode_text}});
  }
  auto slot = std::make_shared<SessionSlot>();
  slot->session.mode = *mode;
  slot->session.profile = config_.default_profile;
  if (const auto* p = optional_field(body, "profile")) slot->session.profile = profile_from_json(*p);
  slot->session.params = config_.default_params;
  if (const auto* p = optional_field(body, "params")) slot->session.params = params_from_json(*p, slot->session.params);
  slot->session.params.validate();
  slot->store_id = string_field(body, "store_id", *mode != PersonaMode::kBaseline);
  if (!slot->store_id.empty()) slot->store = store(slot->store_id);

  std::lock_guard lock(sessions_mutex_);
  slot->session.id = "session-" + std::to_string(next_session_++);
  sessions_[slot->session.id] = slot;
  return {201,
          {{"session_id", slot->session.id},
           {"mode", mode_name(*mode)},
           {"store_id", slot->store_id.empty() ? nlohmann::json(nullptr) : nlohmann::json(slot->store_id)},
           {"profile", to_json(slot->session.profile)},
           {"params", to_json(slot->session.params)}}};
}

std::shared_ptr<Service::SessionSlot> Service::session(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) not_found("session", id);
  return it->second;
}

ServiceResponse Service::post_message(const std::string& id, const nlohmann::json& body) {
  check_keys(body, {"text"});
  const auto slot = session(id);
  const auto text = string_field(body, "text");
  if (slot->busy.exchange(true)) {
    throw Error(ErrorCode::kBusy, "session '" + id + "' already has a turn in flight", {{"session_id", id}});
  }
  struct Release {
    std::atomic<bool>& flag;
    ~Release() { flag = false; }
  } release{slot->busy};

  ChatSession working;
  {
    std::lock_guard lock(slot->mutex);
    working = slot->session;
  }
  auto result = answer(working, text, slot->store.get(), llm_, embed_);
  {
    std::lock_guard lock(slot->mutex);
    slot->session = std::move(working);
  }
  return {200,
          {{"session_id", id},
           {"text", result.text},
           {"explanation", result.explanation ? to_json(*result.explanation) : nlohmann::json(nullptr)},
           {"context", context_json(result.context)}}};
}

ServiceResponse Service::get_session(const std::string& id) const {
  const auto slot = session(id);
  std::lock_guard lock(slot->mutex);
  auto body = transcript_to_json(slot->session);
  body["store_id"] = slot->store_id.empty() ? nlohmann::json(nullptr) : nlohmann::json(slot->store_id);
  return {200, body};
}

ServiceResponse Service::latest_explanation(const std::string& id) const {
  const auto slot = session(id);
  std::lock_guard lock(slot->mutex);
  return {200, to_json(explain_last(slot->session))};
}

void Service::install_routes() {
  server_ = std::make_unique<httplib::Server>();
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const auto out = handle({req.method, req.path, req.body, req.get_header_value("Authorization")});
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server_->Get(".*", forward);
  server_->Post(".*", forward);
  server_->Put(".*", forward);
  server_->Delete(".*", forward);
}

int Service::start(const std::string& host, int port) {
  install_routes();
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorCode::kIoFailure, "cannot bind " + host + ":" + std::to_string(port));
  server_thread_ = std::jthread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void Service::listen(const std::string& host, int port) {
  install_routes();
  if (!server_->listen(host, port)) {
    throw Error(ErrorCode::kIoFailure, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void Service::stop() {
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace episodic
