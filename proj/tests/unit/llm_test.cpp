#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <cstdio>
#include <thread>

#include "episodic/embedding.hpp"
#include "episodic/error.hpp"
#include "episodic/llm.hpp"

namespace episodic {
namespace {

ChatRequest ask(std::string text) {
  ChatRequest r;
  r.system_text = "sys";
  r.messages = {{Role::kUser, std::move(text)}};
  return r;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kInvalidArgument;
}

// FNV-1a 64 over the documented byte layout, written out separately.
std::string expected_fingerprint(const ChatRequest& r) {
  std::string bytes = r.system_text;
  for (const auto& m : r.messages) {
    bytes += '\x1e';
    bytes += m.role == Role::kUser ? "user" : "assistant";
    bytes += '\x1f';
    bytes += m.text;
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

TEST(ChatRequest, Validation) {
  auto r = ask("hi");
  EXPECT_NO_THROW(r.validate());
  r.messages.push_back({Role::kAssistant, "hello"});
  EXPECT_THROW(r.validate(), Error);
  r.messages.push_back({Role::kAssistant, "again"});
  EXPECT_THROW(r.validate(), Error);
  r.messages = {};
  EXPECT_THROW(r.validate(), Error);
  r = ask("hi");
  r.temperature = -1;
  EXPECT_THROW(r.validate(), Error);
}

TEST(Stub, QueueReplaysThenExhausts) {
  auto stub = ScriptedStub::queue({"A"});
  EXPECT_EQ(stub.complete(ask("x")), "A");
  EXPECT_EQ(code_of([&] { stub.complete(ask("y")); }), ErrorCode::kStubExhausted);
  EXPECT_EQ(stub.calls(), 2u);
  EXPECT_EQ(stub.max_in_flight(), 1u);
}

TEST(Stub, MapByFingerprint) {
  auto first = ask("why the ear?");
  auto second = ask("why the sunflowers?");
  auto stub = ScriptedStub::mapped({{expected_fingerprint(first), "one"}, {expected_fingerprint(second), "two"}});
  EXPECT_EQ(stub.complete(second), "two");
  EXPECT_EQ(stub.complete(first), "one");
  EXPECT_EQ(stub.complete(first), "one");
  EXPECT_EQ(code_of([&] { stub.complete(ask("other")); }), ErrorCode::kStubExhausted);
  EXPECT_GT(stub.max_in_flight(), 1u);
}

TEST(Stub, FingerprintLayout) {
  ChatRequest r;
  r.system_text = "You are Vincent.";
  r.messages = {{Role::kUser, "a"}, {Role::kAssistant, "b"}, {Role::kUser, "c"}};
  EXPECT_EQ(request_fingerprint(r), expected_fingerprint(r));
  EXPECT_EQ(request_fingerprint(r).size(), 16u);
  auto moved = r;
  moved.system_text = "You are Vincent";
  moved.messages[0].text = ".a";
  EXPECT_NE(request_fingerprint(moved), request_fingerprint(r));
}

TEST(Stub, FromJson) {
  auto q = ScriptedStub::from_json({{"mode", "queue"}, {"responses", {"x", "y"}}});
  EXPECT_EQ(q.complete(ask("1")), "x");
  EXPECT_EQ(q.remaining(), 1u);
  EXPECT_THROW(ScriptedStub::from_json({{"mode", "queue"}, {"responses", {1}}}), Error);
  EXPECT_THROW(ScriptedStub::from_json({{"mode", "loop"}, {"responses", nlohmann::json::array()}}), Error);
  EXPECT_EQ(code_of([] { ScriptedStub::load("/nonexistent/stub.json"); }), ErrorCode::kIoFailure);
}

TEST(Stub, ConcurrentMapCallers) {
  std::map<std::string, std::string> responses;
  for (int i = 0; i < 64; ++i) responses[expected_fingerprint(ask(std::to_string(i)))] = std::to_string(i * i);
  auto stub = ScriptedStub::mapped(responses);
  std::atomic<int> wrong{0};
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&, t] {
        for (int i = t; i < 64; i += 8) {
          if (stub.complete(ask(std::to_string(i))) != std::to_string(i * i)) ++wrong;
        }
      });
    }
  }
  EXPECT_EQ(wrong, 0);
  EXPECT_EQ(stub.calls(), 64u);
}

class FakeProvider : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_body_ = nlohmann::json::parse(req.body);
      last_auth_ = req.get_header_value("Authorization");
      res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"Bonjour"}}]})", "application/json");
    });
    server_.Post("/v1/embeddings", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"data":[{"embedding":[3.0, 4.0]}]})", "application/json");
    });
    server_.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
      res.status = 500;
      res.set_content("{}", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  nlohmann::json last_body_;
  std::string last_auth_;
};

TEST_F(FakeProvider, RemoteLlmWireFormat) {
  RemoteLlm llm({url("/v1/chat/completions"), "test-model", "secret", std::chrono::seconds(5), 2});
  ChatRequest r = ask("hello");
  r.temperature = 0.2;
  r.max_output_tokens = 50;
  EXPECT_EQ(llm.complete(r), "Bonjour");
  EXPECT_EQ(last_auth_, "Bearer secret");
  EXPECT_EQ(last_body_["model"], "test-model");
  EXPECT_EQ(last_body_["max_tokens"], 50);
  ASSERT_EQ(last_body_["messages"].size(), 2u);
  EXPECT_EQ(last_body_["messages"][0]["role"], "system");
  EXPECT_EQ(last_body_["messages"][1]["content"], "hello");
  EXPECT_EQ(llm.max_in_flight(), 2u);
}

TEST_F(FakeProvider, RemoteEmbedderNormalizes) {
  RemoteEmbedder e({url("/v1/embeddings"), "m", 2, "k", std::chrono::seconds(5)});
  const auto v = e.embed("hello");
  EXPECT_NEAR(v[0], 0.6, 1e-7);
  EXPECT_NEAR(v[1], 0.8, 1e-7);
  RemoteEmbedder wrong_dim({url("/v1/embeddings"), "m", 3, "k", std::chrono::seconds(5)});
  EXPECT_EQ(code_of([&] { wrong_dim.embed("hello"); }), ErrorCode::kDimensionMismatch);
}

TEST_F(FakeProvider, ServerErrorIsUnavailable) {
  RemoteLlm llm({url("/broken"), "m", "k", std::chrono::seconds(5), 1});
  EXPECT_EQ(code_of([&] { llm.complete(ask("x")); }), ErrorCode::kProviderUnavailable);
}

TEST(RemoteLlm, UnreachableEndpoint) {
  RemoteLlm llm({"http://127.0.0.1:9/v1/chat/completions", "m", "k", std::chrono::milliseconds(500), 1});
  const auto start = std::chrono::steady_clock::now();
  const auto code = code_of([&] { llm.complete(ask("x")); });
  EXPECT_TRUE(code == ErrorCode::kProviderUnavailable || code == ErrorCode::kTimeout);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
}

}  // namespace
}  // namespace episodic
