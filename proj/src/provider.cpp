#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "mmt/provider.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "jsonl.hpp"
#include "mmt/digest.hpp"
#include "timefmt.hpp"

namespace mmt {

namespace {

void append_field(std::string& buffer, std::string_view name, std::string_view value) {
    buffer.append(name);
    buffer.push_back('=');
    buffer.append(std::to_string(value.size()));
    buffer.push_back(':');
    buffer.append(value);
    buffer.push_back('\n');
}

std::string shortest_double(double value) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

}  // namespace

std::string CompletionRequest::digest() const {
    // Canonical length-prefixed encoding; any change here invalidates
    // existing replay stores, so the layout is versioned.
    std::string buffer = "mmt.request.v1\n";
    append_field(buffer, "system", system_text);
    append_field(buffer, "user", user_text);
    append_field(buffer, "model", model_name);
    append_field(buffer, "temperature", shortest_double(temperature));
    append_field(buffer, "max_tokens", std::to_string(max_tokens));
    return sha256_hex(buffer);
}

void ProviderConfig::validate() const {
    if (name.empty()) {
        throw HarnessError(ErrorKind::Config, "provider needs a name");
    }
    if (max_in_flight < 1 || timeout_ms < 1 || retry.max_attempts < 1 ||
        retry.base_backoff_ms < 0) {
        throw HarnessError(ErrorKind::Config, "provider '" + name + "' has invalid limits");
    }
    if (kind == ProviderKind::HttpChat) {
        if (endpoint_url.empty() || auth_env.empty()) {
            throw HarnessError(ErrorKind::Config,
                               "http provider '" + name + "' needs endpoint_url and auth_env");
        }
        if (model.empty()) {
            throw HarnessError(ErrorKind::Config, "http provider '" + name + "' needs a model");
        }
    }
    if (kind == ProviderKind::Scripted && script.empty()) {
        throw HarnessError(ErrorKind::Config, "scripted provider '" + name + "' needs a script");
    }
}

// ---------------------------------------------------------------------------
// Replay store
// ---------------------------------------------------------------------------

ReplayStore::ReplayStore(std::filesystem::path path, ReplayMode mode)
    : path_(std::move(path)), mode_(mode) {}

std::shared_ptr<ReplayStore> ReplayStore::open(const std::filesystem::path& path,
                                               ReplayMode mode) {
    auto store = std::shared_ptr<ReplayStore>(new ReplayStore(path, mode));
    if (std::filesystem::exists(path)) {
        jsonl::for_each_record(path, [&](const jsonl::Json& record, int line) {
            std::string where = path.string() + ":" + std::to_string(line);
            std::string digest = jsonl::require_string(record, "digest", where);
            store->entries_[digest] = jsonl::require_string(record, "raw_text", where);
        });
    } else if (mode == ReplayMode::Replay) {
        throw HarnessError(ErrorKind::Io, "replay store '" + path.string() + "' not found");
    }
    return store;
}

std::optional<std::string> ReplayStore::lookup(const std::string& digest) const {
    auto it = entries_.find(digest);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ReplayStore::put(const std::string& digest, const std::string& model_name,
                      const std::string& raw_text) {
    std::lock_guard<std::mutex> lock(write_mutex_);
    if (entries_.contains(digest)) return;
    if (path_.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path_.parent_path(), ec);
    }
    std::ofstream out(path_, std::ios::app);
    if (!out) {
        throw HarnessError(ErrorKind::Storage, "cannot append to '" + path_.string() + "'");
    }
    jsonl::Json record;
    record["digest"] = digest;
    record["model_name"] = model_name;
    record["raw_text"] = raw_text;
    record["timestamp"] = iso_timestamp();
    out << record.dump() << "\n";
    if (!out) {
        throw HarnessError(ErrorKind::Storage, "short write to '" + path_.string() + "'");
    }
    entries_[digest] = raw_text;
}

// ---------------------------------------------------------------------------
// HTTP chat provider
// ---------------------------------------------------------------------------

namespace {

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw HarnessError(ErrorKind::Config, "endpoint '" + url + "' needs a scheme");
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpChatProvider : public Provider {
  public:
    explicit HttpChatProvider(ProviderConfig config) : config_(std::move(config)) {
        config_.validate();
        url_ = split_url(config_.endpoint_url);
    }

    ModelResponse complete(const CompletionRequest& request) override {
        const char* token = std::getenv(config_.auth_env.c_str());
        if (!token || !*token) {
            throw HarnessError(ErrorKind::Auth,
                               "environment variable '" + config_.auth_env + "' is not set");
        }

        nlohmann::ordered_json body;
        body["model"] = request.model_name;
        body["messages"] = nlohmann::ordered_json::array(
            {{{"role", "system"}, {"content", request.system_text}},
             {{"role", "user"}, {"content", request.user_text}}});
        body["temperature"] = request.temperature;
        body["max_tokens"] = request.max_tokens;
        const std::string payload = body.dump();

        const auto started = std::chrono::steady_clock::now();
        std::string last_error = "no attempt made";
        int backoff_ms = config_.retry.base_backoff_ms;

        for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
            if (attempt > 1) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
                backoff_ms *= 2;
            }
            httplib::Client client(url_.base);
            client.set_connection_timeout(config_.timeout_ms / 1000,
                                          (config_.timeout_ms % 1000) * 1000);
            client.set_read_timeout(config_.timeout_ms / 1000,
                                    (config_.timeout_ms % 1000) * 1000);
            client.set_bearer_token_auth(token);

            auto res = client.Post(url_.path, payload, "application/json");
            if (!res) {
                last_error = "connection failed: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 401 || res->status == 403) {
                throw HarnessError(ErrorKind::Auth, "HTTP " + std::to_string(res->status));
            }
            if (res->status == 429) {
                last_error = "HTTP 429";
                // Server hint takes precedence over our own backoff schedule.
                if (res->has_header("Retry-After")) {
                    int hint = std::atoi(res->get_header_value("Retry-After").c_str());
                    if (hint > 0) backoff_ms = std::max(backoff_ms, hint * 1000);
                }
                continue;
            }
            if (res->status >= 500 || res->status == 408) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200) {
                throw HarnessError(ErrorKind::Network,
                                   "HTTP " + std::to_string(res->status) + ": " + res->body);
            }
            return parse_response(request, res->body, started);
        }
        const std::string digest = request.digest();
        if (last_error == "HTTP 429") {
            throw HarnessError(ErrorKind::RateLimited,
                               "gave up after " + std::to_string(config_.retry.max_attempts) +
                                   " attempts");
        }
        throw HarnessError(ErrorKind::Network,
                           "gave up after " + std::to_string(config_.retry.max_attempts) +
                               " attempts; last: " + last_error + " (digest " + digest + ")");
    }

    int max_in_flight() const override { return config_.max_in_flight; }

  private:
    ModelResponse parse_response(const CompletionRequest& request, const std::string& body,
                                 std::chrono::steady_clock::time_point started) const {
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw HarnessError(ErrorKind::MalformedResponse, e.what());
        }
        if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
            parsed["choices"].empty()) {
            throw HarnessError(ErrorKind::MalformedResponse, "response has no choices");
        }
        const auto& first = parsed["choices"][0];
        if (!first.contains("message") || !first["message"].contains("content") ||
            !first["message"]["content"].is_string()) {
            throw HarnessError(ErrorKind::MalformedResponse, "choice has no message content");
        }
        ModelResponse response;
        response.raw_text = first["message"]["content"].get<std::string>();
        response.provider_id = config_.name;
        response.request_digest = request.digest();
        response.latency_ms = static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started)
                .count());
        return response;
    }

    ProviderConfig config_;
    ParsedUrl url_;
};

class ScriptedProvider : public Provider {
  public:
    ScriptedProvider(std::string provider_id,
                     std::function<std::string(const CompletionRequest&)> fn, int max_in_flight)
        : provider_id_(std::move(provider_id)), fn_(std::move(fn)),
          max_in_flight_(max_in_flight) {}

    ModelResponse complete(const CompletionRequest& request) override {
        ModelResponse response;
        response.raw_text = fn_(request);
        response.provider_id = provider_id_;
        response.request_digest = request.digest();
        response.latency_ms = 0;
        return response;
    }

    int max_in_flight() const override { return max_in_flight_; }

  private:
    std::string provider_id_;
    std::function<std::string(const CompletionRequest&)> fn_;
    int max_in_flight_;
};

class ReplayProvider : public Provider {
  public:
    ReplayProvider(std::string provider_id, std::shared_ptr<ReplayStore> store, int max_in_flight)
        : provider_id_(std::move(provider_id)), store_(std::move(store)),
          max_in_flight_(max_in_flight) {}

    ModelResponse complete(const CompletionRequest& request) override {
        const std::string digest = request.digest();
        auto stored = store_->lookup(digest);
        if (!stored) {
            throw HarnessError(ErrorKind::ReplayMiss, "digest " + digest + " not in store");
        }
        ModelResponse response;
        response.raw_text = *stored;
        response.provider_id = provider_id_;
        response.request_digest = digest;
        response.latency_ms = 0;
        return response;
    }

    int max_in_flight() const override { return max_in_flight_; }

  private:
    std::string provider_id_;
    std::shared_ptr<ReplayStore> store_;
    int max_in_flight_;
};

class RecordingProvider : public Provider {
  public:
    RecordingProvider(std::unique_ptr<Provider> inner, std::shared_ptr<ReplayStore> store,
                      std::string provider_id)
        : inner_(std::move(inner)), store_(std::move(store)),
          provider_id_(std::move(provider_id)) {}

    ModelResponse complete(const CompletionRequest& request) override {
        const std::string digest = request.digest();
        if (auto stored = store_->lookup(digest)) {
            ModelResponse response;
            response.raw_text = *stored;
            response.provider_id = provider_id_;
            response.request_digest = digest;
            response.latency_ms = 0;
            return response;
        }
        ModelResponse response = inner_->complete(request);
        store_->put(digest, request.model_name, response.raw_text);
        return response;
    }

    int max_in_flight() const override { return inner_->max_in_flight(); }

  private:
    std::unique_ptr<Provider> inner_;
    std::shared_ptr<ReplayStore> store_;
    std::string provider_id_;
};

}  // namespace

std::unique_ptr<Provider> make_http_provider(const ProviderConfig& config) {
    return std::make_unique<HttpChatProvider>(config);
}

std::unique_ptr<Provider> make_scripted_provider(
    std::string provider_id, std::function<std::string(const CompletionRequest&)> fn,
    int max_in_flight) {
    return std::make_unique<ScriptedProvider>(std::move(provider_id), std::move(fn),
                                              max_in_flight);
}

std::unique_ptr<Provider> make_replay_provider(const ProviderConfig& config,
                                               std::shared_ptr<ReplayStore> store) {
    if (store->mode() != ReplayMode::Replay) {
        throw HarnessError(ErrorKind::Config, "store must be opened in replay mode");
    }
    return std::make_unique<ReplayProvider>(config.name, std::move(store), config.max_in_flight);
}

std::unique_ptr<Provider> make_recording_provider(const ProviderConfig& config,
                                                  std::shared_ptr<ReplayStore> store) {
    if (config.kind != ProviderKind::HttpChat) {
        throw HarnessError(ErrorKind::Config,
                           "record mode needs a live http provider, got '" +
                               std::string(to_string(config.kind)) + "'");
    }
    if (store->mode() != ReplayMode::Record) {
        throw HarnessError(ErrorKind::Config, "store must be opened in record mode");
    }
    return std::make_unique<RecordingProvider>(make_http_provider(config), std::move(store),
                                               config.name);
}

const char* to_string(ProviderKind kind) {
    switch (kind) {
        case ProviderKind::HttpChat: return "http";
        case ProviderKind::Replay: return "replay";
        case ProviderKind::Scripted: return "scripted";
    }
    return "?";
}

ProviderKind provider_kind_from_string(std::string_view s) {
    if (s == "http") return ProviderKind::HttpChat;
    if (s == "replay") return ProviderKind::Replay;
    if (s == "scripted") return ProviderKind::Scripted;
    throw HarnessError(ErrorKind::Schema, "unknown provider kind '" + std::string(s) + "'");
}

const char* to_string(ReplayMode mode) {
    switch (mode) {
        case ReplayMode::Record: return "record";
        case ReplayMode::Replay: return "replay";
        case ReplayMode::Passthrough: return "off";
    }
    return "?";
}

ReplayMode replay_mode_from_string(std::string_view s) {
    if (s == "record") return ReplayMode::Record;
    if (s == "replay") return ReplayMode::Replay;
    if (s == "off") return ReplayMode::Passthrough;
    throw HarnessError(ErrorKind::Schema, "unknown replay mode '" + std::string(s) + "'");
}

}  // namespace mmt
