#include "hvc/remote.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <numeric>
#include <regex>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "hvc/channel.h"
#include "hvc/errors.h"

namespace hvc {
namespace {

std::vector<std::string> normalized_words(const std::string& text) {
  std::string cleaned;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '\'')
      cleaned += static_cast<char>(std::tolower(c));
    else if (std::isspace(c) || c == '-')
      cleaned += ' ';
  }
  cleaned.erase(std::remove(cleaned.begin(), cleaned.end(), '\''), cleaned.end());
  std::istringstream in(cleaned);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

std::string extract_transcript(const nlohmann::json& doc, const std::string& path) {
  const nlohmann::json* node = &doc;
  std::istringstream in(path);
  std::string seg;
  while (std::getline(in, seg, '.')) {
    if (seg.empty()) continue;
    if (node->is_array()) {
      if (!std::all_of(seg.begin(), seg.end(), [](unsigned char c) { return std::isdigit(c); }))
        throw BackendError("transcript path segment '" + seg + "' must index an array");
      const auto i = std::stoul(seg);
      if (i >= node->size()) throw BackendError("transcript path index out of range");
      node = &(*node)[i];
    } else if (node->is_object() && node->contains(seg)) {
      node = &(*node)[seg];
    } else {
      throw BackendError("transcript path '" + path + "' not found in response");
    }
  }
  if (!node->is_string()) throw BackendError("transcript path does not name a string");
  return node->get<std::string>();
}

}  // namespace

RemoteConfig parse_remote_config(const std::string& text) {
  RemoteConfig c;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "url") c.url = value;
    else if (key == "method") c.method = value;
    else if (key == "auth_env") c.auth_env = value;
    else if (key == "content_type") c.content_type = value;
    else if (key == "transcript_json_path") c.transcript_json_path = value;
    else if (key == "budget") c.budget = static_cast<std::size_t>(std::stoul(value));
    else if (key == "target_phrase") c.target_phrase = value;
    else if (key == "max_word_edit_distance") c.max_word_edit_distance = std::stoi(value);
    else if (key == "timeout_s") c.timeout_s = std::stod(value);
    else throw ParameterError("unknown remote backend key '" + key + "'");
  }
  if (c.url.empty()) throw ParameterError("remote backend config needs a url");
  return c;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

bool transcript_matches(const std::string& transcript, const std::string& target,
                        int max_word_edit_distance) {
  const auto got = normalized_words(transcript);
  const auto want = normalized_words(target);
  if (got.size() != want.size() || want.empty()) return false;
  for (std::size_t i = 0; i < want.size(); ++i)
    if (edit_distance(got[i], want[i]) > static_cast<std::size_t>(max_word_edit_distance))
      return false;
  return true;
}

RemoteTranscriber::RemoteTranscriber(RemoteConfig config)
    : TranscriberBackend(config.budget), config_(std::move(config)) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(config_.url, m, url_re))
    throw ParameterError("remote url must look like http(s)://host[:port]/path");
  scheme_host_port_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
  if (config_.method != "POST" && config_.method != "PUT")
    throw ParameterError("remote method must be POST or PUT");
}

RemoteTranscriber::Response RemoteTranscriber::query(const AudioBuffer& audio) {
  httplib::Headers headers;
  if (!config_.auth_env.empty()) {
    const char* token = std::getenv(config_.auth_env.c_str());
    if (token == nullptr || *token == '\0')
      throw BackendError("auth token variable " + config_.auth_env + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  httplib::Client client(scheme_host_port_);
  const auto secs = static_cast<time_t>(config_.timeout_s);
  const auto usecs = static_cast<time_t>((config_.timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  const auto bytes = write_wav(audio);
  const std::string body(bytes.begin(), bytes.end());
  auto result = config_.method == "PUT"
                    ? client.Put(path_, headers, body, config_.content_type)
                    : client.Post(path_, headers, body, config_.content_type);
  if (!result)
    throw BackendError("transport failure: " + httplib::to_string(result.error()));
  if (result->status == 401 || result->status == 403)
    throw BackendError("authorization rejected (HTTP " + std::to_string(result->status) + ")");
  if (result->status < 200 || result->status >= 300)
    throw BackendError("HTTP " + std::to_string(result->status));

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("response is not JSON: ") + e.what());
  }
  std::string transcript = extract_transcript(doc, config_.transcript_json_path);
  const bool ok =
      transcript_matches(transcript, config_.target_phrase, config_.max_word_edit_distance);
  return {ok, std::move(transcript)};
}

std::unique_ptr<TranscriberBackend> remote_transcriber(const RemoteConfig& config) {
  return std::make_unique<RemoteTranscriber>(config);
}

}  // namespace hvc
