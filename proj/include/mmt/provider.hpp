#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "mmt/core.hpp"

namespace mmt {

/// One chat completion to be issued. The digest is a stable hash over every
/// field, computed from a canonical byte encoding, and keys the replay store.
struct CompletionRequest {
    std::string system_text;
    std::string user_text;
    std::string model_name;
    double temperature = 0.0;
    int max_tokens = 16;

    std::string digest() const;
};

struct RetryPolicy {
    int max_attempts = 3;
    int base_backoff_ms = 250;
};

enum class ProviderKind { HttpChat, Replay, Scripted };

struct ProviderConfig {
    std::string name;  // provider_id stamped on responses
    ProviderKind kind = ProviderKind::Scripted;
    std::string endpoint_url;  // HttpChat: full chat-completions URL
    std::string model;
    std::string auth_env;  // name of the environment variable holding the bearer token
    int max_in_flight = 4;
    int timeout_ms = 30000;
    RetryPolicy retry;
    std::string script;  // Scripted: named script, e.g. "echo-gold"

    void validate() const;
};

enum class ReplayMode { Record, Replay, Passthrough };

/// Digest-keyed response cache backed by an append-only JSONL file with
/// records {digest, model_name, raw_text, timestamp}. Writes are serialized;
/// lookups are safe from multiple threads once loading has finished.
class ReplayStore {
  public:
    static std::shared_ptr<ReplayStore> open(const std::filesystem::path& path, ReplayMode mode);

    std::optional<std::string> lookup(const std::string& digest) const;
    void put(const std::string& digest, const std::string& model_name,
             const std::string& raw_text);

    ReplayMode mode() const { return mode_; }
    std::size_t size() const { return entries_.size(); }
    const std::filesystem::path& path() const { return path_; }

  private:
    ReplayStore(std::filesystem::path path, ReplayMode mode);

    std::filesystem::path path_;
    ReplayMode mode_;
    std::map<std::string, std::string> entries_;
    mutable std::mutex write_mutex_;
};

/// Uniform completion interface. Implementations must tolerate concurrent
/// complete() calls from up to max_in_flight() threads.
class Provider {
  public:
    virtual ~Provider() = default;
    virtual ModelResponse complete(const CompletionRequest& request) = 0;
    virtual int max_in_flight() const { return 1; }
};

/// Live OpenAI-style chat-completions client. Retries NetworkError and
/// RateLimited with exponential backoff (honoring Retry-After); AuthError is
/// never retried.
std::unique_ptr<Provider> make_http_provider(const ProviderConfig& config);

/// Deterministic in-process provider; `fn` maps a request to the raw
/// response text.
std::unique_ptr<Provider> make_scripted_provider(
    std::string provider_id, std::function<std::string(const CompletionRequest&)> fn,
    int max_in_flight = 4);

/// Serves completions from the store only; a missing digest is a ReplayMiss.
std::unique_ptr<Provider> make_replay_provider(const ProviderConfig& config,
                                               std::shared_ptr<ReplayStore> store);

/// Live provider that persists every response; repeated identical requests
/// are answered from the store without a second network call. Only HttpChat
/// providers can record.
std::unique_ptr<Provider> make_recording_provider(const ProviderConfig& config,
                                                  std::shared_ptr<ReplayStore> store);

const char* to_string(ProviderKind kind);
ProviderKind provider_kind_from_string(std::string_view s);
const char* to_string(ReplayMode mode);
ReplayMode replay_mode_from_string(std::string_view s);

}  // namespace mmt
