#pragma once

#include <memory>
#include <string>

#include "hvc/attack.h"

namespace hvc {

// Endpoint description for an HTTP transcription service. The WAV bytes are
// the request body; the transcript is read from the JSON response at
// transcript_json_path (dot separated, numeric segments index arrays).
struct RemoteConfig {
  std::string url;
  std::string method = "POST";
  std::string auth_env;  // name of the env var holding a bearer token
  std::string content_type = "audio/wav";
  std::string transcript_json_path = "transcript";
  std::size_t budget = kDefaultQueryBudget;
  std::string target_phrase;
  int max_word_edit_distance = 2;
  double timeout_s = 10.0;
};

// Keys: url, method, auth_env, content_type, transcript_json_path, budget,
// target_phrase, max_word_edit_distance, timeout_s.
RemoteConfig parse_remote_config(const std::string& text);

std::size_t edit_distance(const std::string& a, const std::string& b);

// Case-insensitive, punctuation-insensitive, word-by-word comparison that
// tolerates up to max_word_edit_distance edits per word.
bool transcript_matches(const std::string& transcript, const std::string& target,
                        int max_word_edit_distance = 2);

class RemoteTranscriber : public TranscriberBackend {
 public:
  explicit RemoteTranscriber(RemoteConfig config);

 protected:
  Response query(const AudioBuffer& audio) override;

 private:
  RemoteConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

std::unique_ptr<TranscriberBackend> remote_transcriber(const RemoteConfig& config);

}  // namespace hvc
