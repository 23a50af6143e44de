#include "episodic/llm.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "episodic/error.hpp"
#include "http_client.hpp"

namespace episodic {

std::string_view role_name(Role role) { return role == Role::kUser ? "user" : "assistant"; }

void ChatRequest::validate() const {
  if (messages.empty()) throw Error(ErrorCode::kInvalidArgument, "chat request has no messages");
  for (std::size_t i = 0; i < messages.size(); ++i) {
    const Role expected = i % 2 == 0 ? Role::kUser : Role::kAssistant;
    if (messages[i].role != expected) {
      throw Error(ErrorCode::kInvalidArgument, "chat messages must alternate user/assistant", {{"index", i}});
    }
  }
  if (messages.back().role != Role::kUser) {
    throw Error(ErrorCode::kInvalidArgument, "last chat message must come from the user");
  }
  if (temperature < 0.0) throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  if (max_output_tokens == 0) throw Error(ErrorCode::kInvalidArgument, "max_output_tokens must be positive");
}

std::string request_fingerprint(const ChatRequest& request) {
  std::uint64_t h = 14695981039346656037ULL;
  auto feed = [&h](std::string_view bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  feed(request.system_text);
  for (const auto& m : request.messages) {
    feed("\x1e");
    feed(role_name(m.role));
    feed("\x1f");
    feed(m.text);
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

ScriptedStub ScriptedStub::queue(std::vector<std::string> responses) {
  ScriptedStub stub;
  stub.queue_.assign(std::make_move_iterator(responses.begin()), std::make_move_iterator(responses.end()));
  return stub;
}

ScriptedStub ScriptedStub::mapped(std::map<std::string, std::string> responses) {
  ScriptedStub stub;
  stub.mapped_mode_ = true;
  stub.map_ = std::move(responses);
  return stub;
}

ScriptedStub::ScriptedStub(const ScriptedStub& other) {
  std::lock_guard lock(other.mutex_);
  mapped_mode_ = other.mapped_mode_;
  queue_ = other.queue_;
  map_ = other.map_;
  seen_ = other.seen_;
}

ScriptedStub ScriptedStub::from_json(const nlohmann::json& script) {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::kSchemaViolation, "stub script: " + why); };
  if (!script.is_object()) bad("must be an object");
  const std::string mode = script.value("mode", std::string("queue"));
  if (!script.contains("responses")) bad("missing \"responses\"");
  const auto& responses = script["responses"];
  if (mode == "queue") {
    if (!responses.is_array()) bad("queue responses must be an array of strings");
    std::vector<std::string> texts;
    for (const auto& r : responses) {
      if (!r.is_string()) bad("queue responses must be an array of strings");
      texts.push_back(r.get<std::string>());
    }
    return queue(std::move(texts));
  }
  if (mode == "map") {
    if (!responses.is_object()) bad("map responses must be an object of fingerprint -> text");
    std::map<std::string, std::string> texts;
    for (const auto& [key, value] : responses.items()) {
      if (!value.is_string()) bad("map responses must be strings");
      texts.emplace(key, value.get<std::string>());
    }
    return mapped(std::move(texts));
  }
  bad("unknown mode \"" + mode + "\"");
  return queue({});
}

ScriptedStub ScriptedStub::load(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw Error(ErrorCode::kIoFailure, "cannot open stub script " + path.string());
  std::ostringstream text;
  text << file.rdbuf();
  const auto script = nlohmann::json::parse(text.str(), nullptr, false);
  if (script.is_discarded()) throw Error(ErrorCode::kSchemaViolation, "stub script is not valid JSON: " + path.string());
  return from_json(script);
}

std::string ScriptedStub::complete(const ChatRequest& request) {
  request.validate();
  std::lock_guard lock(mutex_);
  seen_.push_back(request);
  if (mapped_mode_) {
    const auto key = request_fingerprint(request);
    auto it = map_.find(key);
    if (it == map_.end()) {
      throw Error(ErrorCode::kStubExhausted, "stub has no response for fingerprint " + key, {{"fingerprint", key}});
    }
    return it->second;
  }
  if (queue_.empty()) {
    throw Error(ErrorCode::kStubExhausted, "stub response queue is exhausted", {{"calls", seen_.size()}});
  }
  std::string text = std::move(queue_.front());
  queue_.pop_front();
  return text;
}

std::size_t ScriptedStub::remaining() const {
  std::lock_guard lock(mutex_);
  return mapped_mode_ ? map_.size() : queue_.size();
}

std::size_t ScriptedStub::calls() const {
  std::lock_guard lock(mutex_);
  return seen_.size();
}

std::vector<ChatRequest> ScriptedStub::transcript() const {
  std::lock_guard lock(mutex_);
  return seen_;
}

RemoteLlm::RemoteLlm(RemoteLlmConfig config) : config_(std::move(config)) {
  if (config_.api_key.empty()) {
    if (const char* key = std::getenv("EPISODIC_LLM_API_KEY")) config_.api_key = key;
  }
  if (config_.endpoint.empty()) throw Error(ErrorCode::kInvalidArgument, "remote LLM needs an endpoint");
  if (config_.max_in_flight == 0) config_.max_in_flight = 1;
}

std::string RemoteLlm::complete(const ChatRequest& request) {
  request.validate();
  nlohmann::json messages = nlohmann::json::array();
  if (!request.system_text.empty()) messages.push_back({{"role", "system"}, {"content", request.system_text}});
  for (const auto& m : request.messages) {
    messages.push_back({{"role", std::string(role_name(m.role))}, {"content", m.text}});
  }
  const nlohmann::json body = {{"model", config_.model},
                               {"messages", std::move(messages)},
                               {"temperature", request.temperature},
                               {"max_tokens", request.max_output_tokens}};
  const auto response = detail::post_json(config_.endpoint, body, config_.api_key, config_.timeout);
  try {
    return response.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kProviderUnavailable, "completion response lacks choices[0].message.content");
  }
}

}  // namespace episodic
