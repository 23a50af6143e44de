#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace episodic {

enum class Role { kUser, kAssistant };

std::string_view role_name(Role role);

struct ChatMessage {
  Role role = Role::kUser;
  std::string text;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string system_text;
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
  std::size_t max_output_tokens = 1024;

  /// Messages must alternate roles, start and end with the user.
  void validate() const;
};

/// Key for map-mode stubs: 16 lowercase hex digits of FNV-1a 64 over
///   system_text, then for each message: 0x1E, role name, 0x1F, text.
std::string request_fingerprint(const ChatRequest& request);

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;

  /// Throws ProviderUnavailable, Timeout or StubExhausted.
  virtual std::string complete(const ChatRequest& request) = 0;
  /// Upper bound on concurrent complete() calls the provider tolerates.
  virtual std::size_t max_in_flight() const { return 1; }
  virtual std::string name() const = 0;
};

/// Deterministic canned provider. Queue mode replays responses in order and
/// is serial; map mode answers by request fingerprint and tolerates
/// concurrent callers. Running out (or a fingerprint miss) is an error.
class ScriptedStub final : public LlmProvider {
 public:
  static ScriptedStub queue(std::vector<std::string> responses);
  static ScriptedStub mapped(std::map<std::string, std::string> responses);

  /// {"mode": "queue", "responses": [...]} or {"mode": "map", "responses": {fingerprint: text}}.
  static ScriptedStub from_json(const nlohmann::json& script);
  static ScriptedStub load(const std::filesystem::path& path);

  ScriptedStub(const ScriptedStub& other);
  ScriptedStub& operator=(const ScriptedStub&) = delete;

  std::string complete(const ChatRequest& request) override;
  std::size_t max_in_flight() const override { return mapped_mode_ ? 8 : 1; }
  std::string name() const override { return mapped_mode_ ? "stub:map" : "stub:queue"; }

  std::size_t remaining() const;
  std::size_t calls() const;
  /// Requests seen so far, in call order.
  std::vector<ChatRequest> transcript() const;

 private:
  ScriptedStub() = default;

  bool mapped_mode_ = false;
  std::deque<std::string> queue_;
  std::map<std::string, std::string> map_;
  std::vector<ChatRequest> seen_;
  mutable std::mutex mutex_;
};

struct RemoteLlmConfig {
  std::string endpoint;  // e.g. https://api.openai.com/v1/chat/completions
  std::string model;
  std::string api_key;  // defaults to $EPISODIC_LLM_API_KEY
  std::chrono::milliseconds timeout{std::chrono::seconds(60)};
  std::size_t max_in_flight = 4;
};

/// OpenAI-compatible chat completions client; wire format in docs/wire-formats.md.
class RemoteLlm final : public LlmProvider {
 public:
  explicit RemoteLlm(RemoteLlmConfig config);

  std::string complete(const ChatRequest& request) override;
  std::size_t max_in_flight() const override { return config_.max_in_flight; }
  std::string name() const override { return "remote:" + config_.model; }

 private:
  RemoteLlmConfig config_;
};

}  // namespace episodic
