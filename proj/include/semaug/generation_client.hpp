#pragma once

// Text-to-image backends: a remote inference service reached over HTTP, and a
// deterministic procedural mock for offline runs.
//
// Remote wire protocol:
//   POST {endpoint}/generate
//   {"prompt": str, "seed": int, "width": int, "height": int,
//    "steps": int, "guidance_scale": number}
//   -> 200 {"image_base64": "<PNG>"}; any other status is a server error.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace semaug {

using Json = nlohmann::json;

inline constexpr const char* kBackendUrlEnv = "SEMAUG_BACKEND_URL";

struct GenerationRequest {
    std::string prompt;
    uint64_t seed = 0;
    int width = 512;
    int height = 512;
    int steps = 30;
    double guidance_scale = 7.5;

    /// Throws GenerationError(InvalidRequest).
    void validate() const;
    Json to_json() const;

    bool operator==(const GenerationRequest&) const = default;
};

struct GenerationResult {
    std::vector<uint8_t> image;  // PNG
    GenerationRequest request_echo;
    std::string backend_id;
    int64_t elapsed_ms = 0;
};

enum class BackendKind { Mock, Remote };

struct BackendConfig {
    BackendKind kind = BackendKind::Mock;
    std::string endpoint;  // http://host[:port][/base]
    int timeout_ms = 120000;
    int max_in_flight = 4;
    int retries = 3;
    int backoff_base_ms = 500;

    /// Throws std::invalid_argument.
    void validate() const;
    static BackendConfig from_json(const Json& j);
    Json to_json() const;
};

/// Applies SEMAUG_BACKEND_URL, if set, over cfg.endpoint.
BackendConfig with_env_overrides(BackendConfig cfg);

enum class GenerationErrorKind {
    InvalidRequest,
    Timeout,
    ConnectionFailed,
    ServerError,
    InvalidImage,
    TransportFailed,  // retries exhausted; cause() holds the last failure kind
};

std::string_view to_string(GenerationErrorKind kind);

class GenerationError : public std::runtime_error {
public:
    GenerationError(GenerationErrorKind kind, const std::string& message, int status = 0, std::string body_excerpt = {},
                    std::optional<GenerationErrorKind> cause = std::nullopt, int attempts = 1);

    GenerationErrorKind kind() const { return kind_; }
    /// HTTP status for ServerError (or a wrapped one), else 0.
    int status() const { return status_; }
    const std::string& body_excerpt() const { return body_excerpt_; }
    std::optional<GenerationErrorKind> cause() const { return cause_; }
    int attempts() const { return attempts_; }

private:
    GenerationErrorKind kind_;
    int status_;
    std::string body_excerpt_;
    std::optional<GenerationErrorKind> cause_;
    int attempts_;
};

/// Result or error for one request of a batch.
class BatchSlot {
public:
    BatchSlot(GenerationResult r) : value_(std::move(r)) {}
    BatchSlot(GenerationError e) : value_(std::move(e)) {}

    bool ok() const { return value_.index() == 0; }
    const GenerationResult& result() const { return std::get<GenerationResult>(value_); }
    const GenerationError& error() const { return std::get<GenerationError>(value_); }

private:
    std::variant<GenerationResult, GenerationError> value_;
};

/// Quadrant colors for the mock image: with h = fnv1a64(prompt) ^ seed written
/// big-endian twice (16 bytes), quadrant k takes bytes 3k..3k+2 as RGB.
/// Quadrants: 0 top-left, 1 top-right, 2 bottom-left, 3 bottom-right.
std::array<std::array<uint8_t, 3>, 4> mock_quadrant_colors(std::string_view prompt, uint64_t seed);

GenerationResult mock_generate(const GenerationRequest& req);

/// One request with retry: up to cfg.retries extra attempts, sleeping
/// backoff_base_ms * 2^k before retry k. Timeouts, connection failures, 5xx,
/// 408 and 429 are retried; other failures surface immediately.
GenerationResult generate(const BackendConfig& cfg, const GenerationRequest& req);

using CompletionCallback = std::function<void(std::size_t index, const BatchSlot& slot)>;

/// Runs requests with at most cfg.max_in_flight outstanding. Results come back
/// in input order; a failed request yields an error slot. `on_complete` runs
/// on the worker thread that finished the request.
std::vector<BatchSlot> batch_generate(const BackendConfig& cfg, std::span<const GenerationRequest> reqs,
                                      const CompletionCallback& on_complete = {});

}  // namespace semaug
