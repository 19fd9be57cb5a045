#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "fixtures.h"
#include "hvc/errors.h"
#include "hvc/remote.h"
#include "httplib.h"
#include "json.hpp"

namespace hvc {
namespace {

// Local transcription stub: answers with a fixed transcript and records what
// it was sent.
class StubServer {
 public:
  StubServer() {
    server_.Post("/asr", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      last_auth = req.get_header_value("Authorization");
      last_content_type = req.get_header_value("Content-Type");
      last_body_size = req.body.size();
      if (status != 200) {
        res.status = status;
        return;
      }
      res.set_content(body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/asr"; }

  std::atomic<int> hits{0};
  int status = 200;
  std::string body = R"({"transcript": "open the door"})";
  std::string last_auth;
  std::string last_content_type;
  std::size_t last_body_size = 0;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RemoteConfig config_for(const StubServer& s) {
  RemoteConfig c;
  c.url = s.url();
  c.target_phrase = "open the door";
  c.budget = 3;
  c.timeout_s = 5.0;
  return c;
}

TEST(EditDistance, Levenshtein) {
  EXPECT_EQ(edit_distance("", ""), 0u);
  EXPECT_EQ(edit_distance("door", "dor"), 1u);
  EXPECT_EQ(edit_distance("kitten", "sitting"), 3u);
  EXPECT_EQ(edit_distance("abc", ""), 3u);
}

TEST(TranscriptMatch, ToleranceRule) {
  EXPECT_TRUE(transcript_matches("open the dor", "open the door"));
  EXPECT_TRUE(transcript_matches("Open the door!", "open the door"));
  EXPECT_TRUE(transcript_matches("Pay money.", "pay money"));
  EXPECT_TRUE(transcript_matches("pay-money", "pay money"));
  EXPECT_FALSE(transcript_matches("open the", "open the door"));
  EXPECT_FALSE(transcript_matches("open a window", "open the door"));
  EXPECT_FALSE(transcript_matches("open the d", "open the door"));
  EXPECT_FALSE(transcript_matches("open the dor", "open the door", 0));
  EXPECT_FALSE(transcript_matches("", ""));
}

TEST(RemoteConfigText, Parses) {
  const auto c = parse_remote_config(
      "url = https://asr.example/v1/recognize\nauth_env = ASR_TOKEN\n"
      "transcript_json_path = results.0.text\nbudget = 7\ntarget_phrase = pay money\n");
  EXPECT_EQ(c.url, "https://asr.example/v1/recognize");
  EXPECT_EQ(c.auth_env, "ASR_TOKEN");
  EXPECT_EQ(c.transcript_json_path, "results.0.text");
  EXPECT_EQ(c.budget, 7u);
  EXPECT_EQ(c.method, "POST");
  EXPECT_EQ(c.target_phrase, "pay money");
  EXPECT_THROW(parse_remote_config("method = POST\n"), ParameterError);
  EXPECT_THROW(parse_remote_config("url = http://x\ncolour = red\n"), ParameterError);
}

TEST(RemoteTranscriber, BadUrlOrMethod) {
  RemoteConfig c;
  c.url = "ftp://host/x";
  EXPECT_THROW(RemoteTranscriber{c}, ParameterError);
  c.url = "http://host/x";
  c.method = "GET";
  EXPECT_THROW(RemoteTranscriber{c}, ParameterError);
}

TEST(RemoteTranscriber, UnreachableHostIsBackendErrorWithoutBudget) {
  RemoteConfig c;
  c.url = "http://127.0.0.1:1/asr";
  c.target_phrase = "x";
  c.timeout_s = 2.0;
  auto backend = remote_transcriber(c);
  EXPECT_THROW(backend->transcribe(testing::random_buffer(1, 160)), BackendError);
  EXPECT_EQ(backend->queries_used(), 0u);
}

TEST(RemoteTranscriber, AcceptsMatchingTranscript) {
  StubServer server;
  RemoteTranscriber t(config_for(server));
  const auto audio = testing::random_buffer(1, 1600);
  const auto v = t.transcribe(audio);
  EXPECT_TRUE(v.accepted);
  EXPECT_EQ(v.transcript, "open the door");
  EXPECT_EQ(v.query_index, 1u);
  EXPECT_EQ(server.hits, 1);
  EXPECT_EQ(server.last_content_type, "audio/wav");
  EXPECT_EQ(server.last_body_size, 44u + 2 * 1600);
  EXPECT_TRUE(server.last_auth.empty());
}

TEST(RemoteTranscriber, NearMissSpellingAccepted) {
  StubServer server;
  server.body = R"({"transcript": "Open the dor."})";
  RemoteTranscriber t(config_for(server));
  EXPECT_TRUE(t.transcribe(testing::random_buffer(1, 160)).accepted);
}

TEST(RemoteTranscriber, WrongPhraseRejectedAndCounted) {
  StubServer server;
  server.body = R"({"transcript": "close the window"})";
  RemoteTranscriber t(config_for(server));
  const auto v = t.transcribe(testing::random_buffer(1, 160));
  EXPECT_FALSE(v.accepted);
  EXPECT_EQ(v.transcript, "close the window");
  EXPECT_EQ(t.queries_used(), 1u);
}

TEST(RemoteTranscriber, NestedTranscriptPath) {
  StubServer server;
  server.body = R"({"results": [{"alternatives": [{"text": "open the door"}]}]})";
  auto c = config_for(server);
  c.transcript_json_path = "results.0.alternatives.0.text";
  RemoteTranscriber t(c);
  EXPECT_TRUE(t.transcribe(testing::random_buffer(1, 160)).accepted);
  c.transcript_json_path = "results.3.text";
  RemoteTranscriber missing(c);
  EXPECT_THROW(missing.transcribe(testing::random_buffer(1, 160)), BackendError);
  EXPECT_EQ(missing.queries_used(), 0u);
}

TEST(RemoteTranscriber, SendsBearerTokenFromEnvironment) {
  StubServer server;
  auto c = config_for(server);
  c.auth_env = "HVC_TEST_ASR_TOKEN";
  ::unsetenv("HVC_TEST_ASR_TOKEN");
  RemoteTranscriber t(c);
  EXPECT_THROW(t.transcribe(testing::random_buffer(1, 160)), BackendError);
  EXPECT_EQ(server.hits, 0);
  ::setenv("HVC_TEST_ASR_TOKEN", "s3cret", 1);
  EXPECT_TRUE(t.transcribe(testing::random_buffer(1, 160)).accepted);
  EXPECT_EQ(server.last_auth, "Bearer s3cret");
  ::unsetenv("HVC_TEST_ASR_TOKEN");
}

TEST(RemoteTranscriber, HttpErrorsAreBackendErrors) {
  StubServer server;
  RemoteTranscriber t(config_for(server));
  for (int status : {401, 403, 500, 404}) {
    server.status = status;
    EXPECT_THROW(t.transcribe(testing::random_buffer(1, 160)), BackendError) << status;
  }
  server.status = 200;
  server.body = "not json";
  EXPECT_THROW(t.transcribe(testing::random_buffer(1, 160)), BackendError);
  EXPECT_EQ(t.queries_used(), 0u);
}

TEST(RemoteTranscriber, BudgetEnforced) {
  StubServer server;
  server.body = R"({"transcript": "nope"})";
  RemoteTranscriber t(config_for(server));
  const auto out = generic_attack(testing::synth_utterance(1, 0.5).audio, t,
                                  {PerturbationParams{}, PerturbationParams{},
                                   PerturbationParams{}, PerturbationParams{}});
  EXPECT_TRUE(out.budget_exhausted);
  EXPECT_EQ(out.queries(), 3u);
  EXPECT_EQ(server.hits, 3);
}

}  // namespace
}  // namespace hvc
